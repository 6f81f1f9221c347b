use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::problem::{ExpSine1d, ExpSine2d, ExactSolution, Forcing, ProblemSpec, TanhProfile};

pub struct RegistryEntry {
    pub id: &'static str,
    pub description: &'static str,
    /// `Some(d)` when the problem only makes sense in dimension `d`.
    pub dimension: Option<usize>,
    /// An exact solution is available (error norms and rates).
    pub manufactured: bool,
    /// Builds the problem for `(ε, T)`.
    pub build: fn(f64, f64) -> Result<ProblemSpec>,
}

fn zero(eps: f64, t: f64) -> Result<ProblemSpec> {
    ProblemSpec::zero(eps, t)
}

fn expsine(eps: f64, t: f64) -> Result<ProblemSpec> {
    ProblemSpec::manufactured(eps, t, Arc::new(ExpSine1d))
}

fn expsine2d(eps: f64, t: f64) -> Result<ProblemSpec> {
    ProblemSpec::manufactured(eps, t, Arc::new(ExpSine2d))
}

fn interface(eps: f64, t: f64) -> Result<ProblemSpec> {
    let p = TanhProfile { epsilon: eps };
    ProblemSpec::new(eps, t, Forcing::Zero, Arc::new(move |x| p.value(0.0, x)))
}

fn smallsine(eps: f64, t: f64) -> Result<ProblemSpec> {
    ProblemSpec::new(eps, t, Forcing::Zero, Arc::new(|x| 0.1 * (PI * x[0]).sin()))
}

pub static REGISTRY: &[RegistryEntry] = &[
    RegistryEntry {
        id: "zero",
        description: "u0 = 0, f = 0",
        dimension: None,
        manufactured: false,
        build: zero,
    },
    RegistryEntry {
        id: "expsine",
        description: "u = exp(-t) sin(pi x) on (0,1), manufactured forcing",
        dimension: Some(1),
        manufactured: true,
        build: expsine,
    },
    RegistryEntry {
        id: "expsine2d",
        description: "u = exp(-t) sin(pi x) sin(pi y) on the unit square, manufactured forcing",
        dimension: Some(2),
        manufactured: true,
        build: expsine2d,
    },
    RegistryEntry {
        id: "interface",
        description: "u0 = tanh((x - 1/2)/(sqrt(2) eps)), f = 0",
        dimension: None,
        manufactured: false,
        build: interface,
    },
    RegistryEntry {
        id: "smallsine",
        description: "u0 = 0.1 sin(pi x), f = 0",
        dimension: None,
        manufactured: false,
        build: smallsine,
    },
];

pub fn lookup(id: &str) -> Option<&'static RegistryEntry> {
    REGISTRY.iter().find(|e| e.id == id)
}
