//! Problem data: `u_t − Δu + ε⁻²(u³ − u) = f`, homogeneous Dirichlet, `u(0) = u₀`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::space::{ElementRule, FeSpace};

/// A smooth function of `(t, x)` with the derivatives needed for manufactured data.
pub trait ExactSolution: Send + Sync {
    fn value(&self, t: f64, x: Point) -> f64;
    fn time_derivative(&self, t: f64, x: Point) -> f64;
    fn gradient(&self, t: f64, x: Point) -> [f64; 2];
    fn laplacian(&self, t: f64, x: Point) -> f64;
}

/// `e^{−t} sin(πx)` on `(0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpSine1d;

impl ExactSolution for ExpSine1d {
    fn value(&self, t: f64, x: Point) -> f64 {
        (-t).exp() * (PI * x[0]).sin()
    }
    fn time_derivative(&self, t: f64, x: Point) -> f64 {
        -self.value(t, x)
    }
    fn gradient(&self, t: f64, x: Point) -> [f64; 2] {
        [(-t).exp() * PI * (PI * x[0]).cos(), 0.0]
    }
    fn laplacian(&self, t: f64, x: Point) -> f64 {
        -PI * PI * self.value(t, x)
    }
}

/// `e^{−t} sin(πx) sin(πy)` on the unit square.
#[derive(Debug, Clone, Copy)]
pub struct ExpSine2d;

impl ExactSolution for ExpSine2d {
    fn value(&self, t: f64, x: Point) -> f64 {
        (-t).exp() * (PI * x[0]).sin() * (PI * x[1]).sin()
    }
    fn time_derivative(&self, t: f64, x: Point) -> f64 {
        -self.value(t, x)
    }
    fn gradient(&self, t: f64, x: Point) -> [f64; 2] {
        let e = (-t).exp() * PI;
        [
            e * (PI * x[0]).cos() * (PI * x[1]).sin(),
            e * (PI * x[0]).sin() * (PI * x[1]).cos(),
        ]
    }
    fn laplacian(&self, t: f64, x: Point) -> f64 {
        -2.0 * PI * PI * self.value(t, x)
    }
}

/// Constant-in-space-and-time function, used for pure-phase linearizations.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl ExactSolution for Constant {
    fn value(&self, _t: f64, _x: Point) -> f64 {
        self.0
    }
    fn time_derivative(&self, _t: f64, _x: Point) -> f64 {
        0.0
    }
    fn gradient(&self, _t: f64, _x: Point) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn laplacian(&self, _t: f64, _x: Point) -> f64 {
        0.0
    }
}

/// Stationary interface profile `tanh((x − ½)/(√2 ε))` in the first coordinate.
#[derive(Debug, Clone, Copy)]
pub struct TanhProfile {
    pub epsilon: f64,
}

impl ExactSolution for TanhProfile {
    fn value(&self, _t: f64, x: Point) -> f64 {
        ((x[0] - 0.5) / (SQRT_2 * self.epsilon)).tanh()
    }
    fn time_derivative(&self, _t: f64, _x: Point) -> f64 {
        0.0
    }
    fn gradient(&self, _t: f64, x: Point) -> [f64; 2] {
        let s = SQRT_2 * self.epsilon;
        let th = ((x[0] - 0.5) / s).tanh();
        [(1.0 - th * th) / s, 0.0]
    }
    fn laplacian(&self, _t: f64, x: Point) -> f64 {
        let s = SQRT_2 * self.epsilon;
        let th = ((x[0] - 0.5) / s).tanh();
        -2.0 * th * (1.0 - th * th) / (s * s)
    }
}

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type SpaceTimeField = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;
/// Load vector over the free dofs as a function of time.
pub type LoadField = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Forcing {
    Zero,
    Function(SpaceTimeField),
    /// `f = u_t − Δu + ε⁻²(u³ − u)` for the given exact solution.
    Manufactured(Arc<dyn ExactSolution>),
    /// A discrete load `t ↦ (f(t), φ_a)` supplied directly.
    LoadVector(LoadField),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Function(_) => write!(f, "Function(..)"),
            Forcing::Manufactured(_) => write!(f, "Manufactured(..)"),
            Forcing::LoadVector(_) => write!(f, "LoadVector(..)"),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub final_time: f64,
    pub forcing: Forcing,
    pub initial: ScalarField,
    pub exact: Option<Arc<dyn ExactSolution>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("epsilon", &self.epsilon)
            .field("final_time", &self.final_time)
            .field("forcing", &self.forcing)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(epsilon: f64, final_time: f64, forcing: Forcing, initial: ScalarField) -> Result<Self> {
        let p = ProblemSpec {
            epsilon,
            final_time,
            forcing,
            initial,
            exact: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Zero data: `u₀ = 0`, `f = 0`.
    pub fn zero(epsilon: f64, final_time: f64) -> Result<Self> {
        Self::new(epsilon, final_time, Forcing::Zero, Arc::new(|_| 0.0))
    }

    /// Forcing and initial data generated by an exact solution.
    pub fn manufactured(epsilon: f64, final_time: f64, exact: Arc<dyn ExactSolution>) -> Result<Self> {
        let e0 = exact.clone();
        let mut p = Self::new(
            epsilon,
            final_time,
            Forcing::Manufactured(exact.clone()),
            Arc::new(move |x| e0.value(0.0, x)),
        )?;
        p.exact = Some(exact);
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be positive (got {})", self.epsilon)));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::invalid(format!("final time must be positive (got {})", self.final_time)));
        }
        Ok(())
    }

    pub fn has_forcing(&self) -> bool {
        !matches!(self.forcing, Forcing::Zero)
    }

    /// Pointwise forcing value, if the forcing is given pointwise.
    pub fn forcing_value(&self, t: f64, x: Point) -> Option<f64> {
        let inv = 1.0 / (self.epsilon * self.epsilon);
        match &self.forcing {
            Forcing::Zero => Some(0.0),
            Forcing::Function(f) => Some(f(t, x)),
            Forcing::Manufactured(u) => {
                let v = u.value(t, x);
                Some(u.time_derivative(t, x) - u.laplacian(t, x) + inv * (v * v * v - v))
            }
            Forcing::LoadVector(_) => None,
        }
    }

    /// Load vector `(f(t), φ_a)` over free dofs; `None` when `f ≡ 0`.
    pub fn load_at(&self, space: &FeSpace, rule: &ElementRule, t: f64) -> Result<Option<Vec<f64>>> {
        match &self.forcing {
            Forcing::Zero => Ok(None),
            Forcing::LoadVector(f) => {
                let v = f(t);
                if v.len() != space.free_count() {
                    return Err(Error::invalid(format!(
                        "load vector has length {}, space has {} free dofs",
                        v.len(),
                        space.free_count()
                    )));
                }
                Ok(Some(v))
            }
            _ => space
                .load_with(rule, |x| self.forcing_value(t, x).expect("pointwise forcing"))
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(u: &dyn ExactSolution, t: f64, x: Point, dim: usize) {
        let h = 1e-4;
        let ut = (u.value(t + h, x) - u.value(t - h, x)) / (2.0 * h);
        assert!((ut - u.time_derivative(t, x)).abs() < 1e-6);
        let mut lap = 0.0;
        for d in 0..dim {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let g = (u.value(t, xp) - u.value(t, xm)) / (2.0 * h);
            assert!((g - u.gradient(t, x)[d]).abs() < 1e-6);
            lap += (u.value(t, xp) - 2.0 * u.value(t, x) + u.value(t, xm)) / (h * h);
        }
        assert!((lap - u.laplacian(t, x)).abs() < 1e-4 * (1.0 + lap.abs()));
    }

    #[test]
    fn manufactured_derivatives_are_consistent() {
        fd_check(&ExpSine1d, 0.3, [0.27, 0.0], 1);
        fd_check(&ExpSine2d, 0.7, [0.31, 0.62], 2);
        fd_check(&TanhProfile { epsilon: 0.2 }, 0.0, [0.43, 0.0], 1);
    }

    #[test]
    fn manufactured_forcing_formula() {
        let p = ProblemSpec::manufactured(0.5, 1.0, Arc::new(ExpSine1d)).unwrap();
        let (t, x) = (0.2, [0.3, 0.0]);
        let u = ExpSine1d.value(t, x);
        let expected = -u + PI * PI * u + 4.0 * (u * u * u - u);
        assert!((p.forcing_value(t, x).unwrap() - expected).abs() < 1e-13);
        assert!((p.initial)(x) == ExpSine1d.value(0.0, x));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ProblemSpec::zero(0.0, 1.0).is_err());
        assert!(ProblemSpec::zero(0.1, -1.0).is_err());
    }
}
