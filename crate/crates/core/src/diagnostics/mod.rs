//! Norms, energy balances, spectral diagnostics and identity reports.

mod energy;
mod norms;
mod spectrum;

pub use energy::{discrete_energy, energy_identity, energy_trace, stability_balance, EnergySlab, EnergyTrace};
pub use norms::{best_approximation_ratio, compute_norms, BestApproximation, NormReport, SlabNorms, LINF_SAMPLES_PER_DEGREE};
pub use spectrum::{linearized_operator, spectrum_along_solution, SpectrumSource, SpectrumTrace, DIRICHLET_NOTE};

use serde::{Deserialize, Serialize};

/// Both sides of a discrete identity and their relative defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / (|lhs| + |rhs| + 1)`
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            residual: relative_defect(lhs, rhs),
            config_hash: None,
        }
    }

    pub fn with_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }
}

pub fn relative_defect(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0)
}
