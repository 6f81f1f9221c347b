use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::registry::{lookup, RegistryEntry};
use crate::error::{Error, Result};
use crate::forward::NewtonConfig;
use crate::linalg::{LinearMethod, LinearSolveConfig};
use crate::mesh::{build_interval_mesh, build_square_mesh, Mesh};
use crate::problem::ProblemSpec;
use crate::space::FeSpace;
use crate::time::{make_time_basis, TimeBasis, TimePartition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_side: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(rename = "N_slabs")]
    pub n_slabs: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub degree_l: usize,
}

/// Exactly one of the two ids must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_profile: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub newton_abs_tol: f64,
    pub newton_rel_tol: f64,
    pub max_iter: usize,
    pub linear_method: LinearMethod,
    pub linear_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let n = NewtonConfig::default();
        SolverConfig {
            newton_abs_tol: n.abs_tol,
            newton_rel_tol: n.rel_tol,
            max_iter: n.max_iter,
            linear_method: n.linear.method,
            linear_tol: n.linear.rel_tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Gauss points per slab; at least `2k + 2` unless `under_integrate` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_points: Option<usize>,
    /// Polynomial degree integrated exactly by the element rule; defaults to `4l`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_order: Option<usize>,
    /// Use `k + 1` time points (negative control for the exactness checks).
    pub under_integrate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    pub run_id: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            run_id: "run".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub space: SpaceConfig,
    pub epsilon: f64,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical (compact, field-ordered) JSON.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Mesh resolution: `n` in 1D, `n_per_side` in 2D.
    pub fn resolution(&self) -> usize {
        match self.dimension {
            1 => self.mesh.n.unwrap_or(0),
            _ => self.mesh.n_per_side.unwrap_or(0),
        }
    }

    pub fn with_resolution(&self, n: usize) -> Self {
        let mut c = self.clone();
        match c.dimension {
            1 => c.mesh.n = Some(n),
            _ => c.mesh.n_per_side = Some(n),
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        match (self.dimension, self.mesh.n, self.mesh.n_per_side) {
            (1, Some(n), None) if n >= 1 => {}
            (2, None, Some(n)) if n >= 1 => {}
            (1, ..) => return Err(cfg_err("dimension 1 needs mesh.n ≥ 1 and no mesh.n_per_side")),
            (2, ..) => return Err(cfg_err("dimension 2 needs mesh.n_per_side ≥ 1 and no mesh.n")),
            (d, ..) => return Err(cfg_err(format!("dimension must be 1 or 2 (got {d})"))),
        }
        if !(self.time.final_time > 0.0 && self.time.final_time.is_finite()) {
            return Err(cfg_err("time.T must be positive"));
        }
        if self.time.n_slabs == 0 {
            return Err(cfg_err("time.N_slabs must be positive"));
        }
        if !(1..=2).contains(&self.space.degree_l) {
            return Err(cfg_err("space.degree_l must be 1 or 2"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(cfg_err("epsilon must be positive"));
        }
        let s = &self.solver;
        if !(s.newton_abs_tol > 0.0 && s.newton_rel_tol > 0.0 && s.linear_tol > 0.0) {
            return Err(cfg_err("solver tolerances must be positive"));
        }
        if s.max_iter == 0 {
            return Err(cfg_err("solver.max_iter must be positive"));
        }
        let q = &self.quadrature;
        if let Some(p) = q.time_points {
            if q.under_integrate {
                return Err(cfg_err("quadrature.time_points and quadrature.under_integrate are exclusive"));
            }
            make_time_basis(self.time.k, p).map_err(|e| cfg_err(e.to_string()))?;
        }
        if let Some(o) = q.space_order {
            if o < 2 * self.space.degree_l {
                return Err(cfg_err("quadrature.space_order must be at least 2l"));
            }
        }
        if self.output.run_id.is_empty() || self.output.run_id.contains(['/', '\\']) {
            return Err(cfg_err("output.run_id must be a plain non-empty name"));
        }
        self.entry().map(|_| ())
    }

    /// The registry entry named by `problem`.
    pub fn entry(&self) -> Result<&'static RegistryEntry> {
        let id = match (&self.problem.manufactured, &self.problem.initial_profile) {
            (Some(id), None) => id,
            (None, Some(id)) => id,
            _ => return Err(cfg_err("problem needs exactly one of manufactured / initial_profile")),
        };
        let entry = lookup(id).ok_or_else(|| cfg_err(format!("unknown problem id {id:?}")))?;
        if self.problem.manufactured.is_some() && !entry.manufactured {
            return Err(cfg_err(format!("{id:?} has no exact solution; use initial_profile")));
        }
        if let Some(d) = entry.dimension {
            if d != self.dimension {
                return Err(cfg_err(format!("{id:?} is defined in dimension {d}")));
            }
        }
        Ok(entry)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match self.dimension {
            1 => build_interval_mesh(0.0, 1.0, self.resolution()),
            _ => build_square_mesh(self.resolution()),
        }
    }

    pub fn build_space(&self) -> Result<Arc<FeSpace>> {
        let mesh = self.build_mesh()?;
        let l = self.space.degree_l;
        let space = match self.quadrature.space_order {
            Some(o) => FeSpace::with_quadrature_degree(mesh, l, o)?,
            None => FeSpace::new(mesh, l)?,
        };
        Ok(Arc::new(space))
    }

    pub fn build_basis(&self) -> Result<TimeBasis> {
        let k = self.time.k;
        if self.quadrature.under_integrate {
            return Ok(TimeBasis::under_integrated(k));
        }
        match self.quadrature.time_points {
            Some(p) => make_time_basis(k, p),
            None => Ok(TimeBasis::new(k)),
        }
    }

    pub fn build_partition(&self) -> Result<TimePartition> {
        TimePartition::uniform(self.time.final_time, self.time.n_slabs)
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        (self.entry()?.build)(self.epsilon, self.time.final_time)
    }

    pub fn newton(&self) -> NewtonConfig {
        let s = &self.solver;
        NewtonConfig {
            abs_tol: s.newton_abs_tol,
            rel_tol: s.newton_rel_tol,
            max_iter: s.max_iter,
            linear: LinearSolveConfig {
                method: s.linear_method,
                rel_tolerance: s.linear_tol,
                ..LinearSolveConfig::default()
            },
            ..NewtonConfig::default()
        }
    }

    /// `<out>/<run_id>`, with `out` overriding `output.directory`.
    pub fn run_dir(&self, out: Option<&Path>) -> PathBuf {
        out.map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&self.output.directory))
            .join(&self.output.run_id)
    }
}
