use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::quadrature::{gauss_legendre, right_radau_nodes};

/// Nodal Lagrange basis of `P_k[0, 1]` at the right Radau points, with a Gauss rule.
///
/// The last node is `s = 1`, so the right trace of a slab polynomial is its last coefficient.
#[derive(Debug, Clone)]
pub struct TimeBasis {
    k: usize,
    nodes: Vec<f64>,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
    /// `values[q][i] = χ_i(s_q)`
    values: Vec<Vec<f64>>,
    /// `derivs[q][i] = χ_i'(s_q)`
    derivs: Vec<Vec<f64>>,
    left_values: Vec<f64>,
    right_values: Vec<f64>,
    under_integrated: bool,
}

/// Smallest admissible Gauss rule size: exact for degree `4k + 3`.
pub fn min_quad_points(k: usize) -> usize {
    (4 * k + 3).div_ceil(2)
}

pub fn make_time_basis(k: usize, quad_points: usize) -> Result<TimeBasis> {
    if quad_points < min_quad_points(k) {
        return Err(Error::invalid(format!(
            "time quadrature with {quad_points} points is not exact for degree {}; need at least {}",
            4 * k + 2,
            min_quad_points(k)
        )));
    }
    Ok(TimeBasis::build(k, quad_points, false))
}

impl TimeBasis {
    /// Basis with the default rule of `2k + 2` points.
    pub fn new(k: usize) -> Self {
        Self::build(k, min_quad_points(k), false)
    }

    /// Deliberately under-integrating basis with only `k + 1` Gauss points (exact to degree `2k + 1`).
    /// The cubic term and the dual coupling are then integrated inexactly.
    pub fn under_integrated(k: usize) -> Self {
        Self::build(k, k + 1, true)
    }

    fn build(k: usize, quad_points: usize, under_integrated: bool) -> Self {
        let nodes = right_radau_nodes(k);
        let (quad_points, quad_weights) = gauss_legendre(quad_points);
        let mut basis = TimeBasis {
            k,
            nodes,
            quad_points,
            quad_weights,
            values: Vec::new(),
            derivs: Vec::new(),
            left_values: Vec::new(),
            right_values: Vec::new(),
            under_integrated,
        };
        basis.values = basis.quad_points.iter().map(|&s| basis.eval_all(s)).collect();
        basis.derivs = basis.quad_points.iter().map(|&s| basis.deriv_all(s)).collect();
        basis.left_values = basis.eval_all(0.0);
        basis.right_values = basis.eval_all(1.0);
        basis
    }

    /// The same basis with a different quadrature size (no exactness check).
    pub fn with_quadrature(&self, quad_points: usize) -> Self {
        Self::build(self.k, quad_points, quad_points < min_quad_points(self.k))
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn n_nodes(&self) -> usize {
        self.k + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_points(&self) -> &[f64] {
        &self.quad_points
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn n_quad(&self) -> usize {
        self.quad_points.len()
    }

    /// `χ_i(s_q)` as `values()[q][i]`.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn derivs(&self) -> &[Vec<f64>] {
        &self.derivs
    }

    pub fn left_values(&self) -> &[f64] {
        &self.left_values
    }

    pub fn right_values(&self) -> &[f64] {
        &self.right_values
    }

    pub fn is_under_integrated(&self) -> bool {
        self.under_integrated
    }

    pub fn eval(&self, i: usize, s: f64) -> f64 {
        let xi = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| (s - xj) / (xi - xj))
            .product()
    }

    pub fn deriv(&self, i: usize, s: f64) -> f64 {
        let xi = self.nodes[i];
        let mut total = 0.0;
        for (m, &xm) in self.nodes.iter().enumerate() {
            if m == i {
                continue;
            }
            let mut p = 1.0 / (xi - xm);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != m {
                    p *= (s - xj) / (xi - xj);
                }
            }
            total += p;
        }
        total
    }

    pub fn eval_all(&self, s: f64) -> Vec<f64> {
        (0..=self.k).map(|i| self.eval(i, s)).collect()
    }

    pub fn deriv_all(&self, s: f64) -> Vec<f64> {
        (0..=self.k).map(|i| self.deriv(i, s)).collect()
    }

    /// Evaluate `Σ_j χ_j(s) U_j` for coefficient vectors `coeffs[j]`.
    pub fn evaluate(&self, coeffs: &[Vec<f64>], s: f64) -> Vec<f64> {
        combine(coeffs, &self.eval_all(s))
    }

    pub fn operators(&self) -> DgTimeOperators {
        DgTimeOperators::new(self)
    }
}

/// `Σ_j w_j U_j`.
pub fn combine(coeffs: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = coeffs.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (c, &w) in coeffs.iter().zip(weights) {
        if w != 0.0 {
            out.iter_mut().zip(c).for_each(|(o, x)| *o += w * x);
        }
    }
    out
}

/// Slab coupling matrices on the reference interval:
/// `G_ij = χ_i(1)χ_j(1) − ∫ χ_j χ_i'`, `Θ_ij = ∫ χ_i χ_j`, `left_load_i = χ_i(0)`.
#[derive(Debug, Clone)]
pub struct DgTimeOperators {
    pub g: DenseMatrix,
    pub theta: DenseMatrix,
    pub left_load: Vec<f64>,
}

impl DgTimeOperators {
    pub fn new(basis: &TimeBasis) -> Self {
        // integrands have degree ≤ 2k; k + 1 Gauss points suffice
        let k = basis.degree();
        let (s, w) = gauss_legendre(k + 1);
        let vals: Vec<Vec<f64>> = s.iter().map(|&x| basis.eval_all(x)).collect();
        let ders: Vec<Vec<f64>> = s.iter().map(|&x| basis.deriv_all(x)).collect();
        let r = basis.right_values();
        let g = DenseMatrix::from_fn(k + 1, k + 1, |i, j| {
            let integral: f64 = (0..s.len()).map(|q| w[q] * vals[q][j] * ders[q][i]).sum();
            r[i] * r[j] - integral
        });
        let theta = DenseMatrix::from_fn(k + 1, k + 1, |i, j| {
            (0..s.len()).map(|q| w[q] * vals[q][i] * vals[q][j]).sum()
        });
        DgTimeOperators {
            g,
            theta,
            left_load: basis.left_values().to_vec(),
        }
    }
}
