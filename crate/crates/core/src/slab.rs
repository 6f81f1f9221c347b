//! Space-time block algebra for one slab.
//!
//! Slab unknowns are stored interleaved, `idx = a (k+1) + j` for spatial free dof `a` and
//! time node `j`, which keeps the coupled matrix banded.

use std::sync::Arc;

use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::space::{ElementRule, FeSpace};
use crate::time::{DgTimeOperators, TimeBasis};

/// Shared per-discretization data: spatial matrices and time operators.
#[derive(Debug, Clone)]
pub struct SlabContext {
    pub space: Arc<FeSpace>,
    pub basis: TimeBasis,
    pub ops: DgTimeOperators,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
}

impl SlabContext {
    pub fn new(space: Arc<FeSpace>, basis: TimeBasis) -> Self {
        let ops = basis.operators();
        let mass = space.mass();
        let stiffness = space.stiffness();
        SlabContext {
            space,
            basis,
            ops,
            mass,
            stiffness,
        }
    }

    pub fn nt(&self) -> usize {
        self.basis.n_nodes()
    }

    pub fn nf(&self) -> usize {
        self.space.free_count()
    }

    pub fn rule(&self) -> &ElementRule {
        self.space.rule()
    }

    /// Interleave `U[j][a]` into a single vector.
    pub fn pack(&self, u: &[Vec<f64>]) -> Vec<f64> {
        let nt = self.nt();
        let mut out = vec![0.0; nt * self.nf()];
        for (j, uj) in u.iter().enumerate() {
            for (a, v) in uj.iter().enumerate() {
                out[a * nt + j] = *v;
            }
        }
        out
    }

    pub fn unpack(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let nt = self.nt();
        (0..nt)
            .map(|j| (0..self.nf()).map(|a| x[a * nt + j]).collect())
            .collect()
    }

    /// Spatial matrices `K_ij = Σ_q w_q χ_i(s_q) χ_j(s_q) M[c_q]`, where `coef[q]` holds a
    /// coefficient at the spatial quadrature points at time node `s_q` of `weights`/`chi`.
    /// Returned as value arrays on the spatial pattern, indexed `i (k+1) + j`.
    pub fn reaction_blocks(&self, weights: &[f64], chi: &[Vec<f64>], coef: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nt = self.nt();
        let space = &self.space;
        let rule = space.rule();
        let nqs = rule.len();
        let nnz = space.pattern().nnz();
        let mut blocks = vec![vec![0.0; nnz]; nt * nt];
        let nloc = space.element_dofs(0).len();
        let mut local = vec![0.0; nloc * nloc];
        for e in 0..space.num_elements() {
            let det = space.geometry(e).det;
            let scatter = space.element_scatter(e);
            for (q, &wq) in weights.iter().enumerate() {
                local.iter_mut().for_each(|v| *v = 0.0);
                for x in 0..nqs {
                    let c = coef[q][e * nqs + x] * rule.rule.weights[x] * det;
                    if c == 0.0 {
                        continue;
                    }
                    let phi = &rule.phi[x];
                    for a in 0..nloc {
                        let ca = c * phi[a];
                        for b in 0..nloc {
                            local[a * nloc + b] += ca * phi[b];
                        }
                    }
                }
                for i in 0..nt {
                    for j in i..nt {
                        let s = wq * chi[q][i] * chi[q][j];
                        if s == 0.0 {
                            continue;
                        }
                        let blk = &mut blocks[i * nt + j];
                        for &(la, lb, pos) in scatter {
                            blk[pos] += s * local[la * nloc + lb];
                        }
                    }
                }
            }
        }
        for i in 0..nt {
            for j in 0..i {
                blocks[i * nt + j] = blocks[j * nt + i].clone();
            }
        }
        blocks
    }

    /// `T ⊗ M + τ Θ ⊗ A + scale · K` in the interleaved ordering.
    pub fn assemble(&self, time_op: &DenseMatrix, tau: f64, reaction: Option<(&[Vec<f64>], f64)>) -> CsrMatrix {
        let nt = self.nt();
        let nf = self.nf();
        let pat = self.space.pattern();
        let rp = pat.row_ptr();
        let ci = pat.col_idx();
        let mv = self.mass.values();
        let av = self.stiffness.values();
        let theta = &self.ops.theta;
        let n = nf * nt;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(pat.nnz() * nt * nt);
        let mut values = Vec::with_capacity(pat.nnz() * nt * nt);
        row_ptr.push(0);
        for a in 0..nf {
            for i in 0..nt {
                for p in rp[a]..rp[a + 1] {
                    let b = ci[p];
                    for j in 0..nt {
                        let mut v = time_op[(i, j)] * mv[p] + tau * theta[(i, j)] * av[p];
                        if let Some((k, scale)) = reaction {
                            v += scale * k[i * nt + j][p];
                        }
                        col_idx.push(b * nt + j);
                        values.push(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix::from_parts(n, n, row_ptr, col_idx, values).expect("block pattern is valid")
    }

    /// `out_i = Σ_j T_ij (mat U_j)`.
    pub fn apply_time_space(&self, t: &DenseMatrix, mat: &CsrMatrix, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nt = self.nt();
        let mu: Vec<Vec<f64>> = u.iter().map(|uj| mat.matvec(uj)).collect();
        (0..nt)
            .map(|i| {
                let mut out = vec![0.0; self.nf()];
                for (j, mj) in mu.iter().enumerate() {
                    let c = t[(i, j)];
                    if c != 0.0 {
                        out.iter_mut().zip(mj).for_each(|(o, x)| *o += c * x);
                    }
                }
                out
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_interval_mesh;

    #[test]
    fn block_matrix_matches_kronecker() {
        let space = Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, 5).unwrap(), 1).unwrap());
        let ctx = SlabContext::new(space.clone(), TimeBasis::new(1));
        let tau = 0.3;
        let big = ctx.assemble(&ctx.ops.g, tau, None).to_dense();
        let m = ctx.mass.to_dense();
        let a = ctx.stiffness.to_dense();
        let nt = 2;
        for ai in 0..space.free_count() {
            for bi in 0..space.free_count() {
                for i in 0..nt {
                    for j in 0..nt {
                        let expect = ctx.ops.g[(i, j)] * m[ai][bi] + tau * ctx.ops.theta[(i, j)] * a[ai][bi];
                        assert!((big[ai * nt + i][bi * nt + j] - expect).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_reaction_reproduces_time_mass() {
        let space = Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, 4).unwrap(), 2).unwrap());
        let basis = TimeBasis::new(2);
        let ctx = SlabContext::new(space.clone(), basis.clone());
        let ones = vec![vec![1.0; space.num_elements() * space.rule().len()]; basis.n_quad()];
        let k = ctx.reaction_blocks(basis.quad_weights(), basis.values(), &ones);
        let m = ctx.mass.values();
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..m.len() {
                    assert!((k[i * 3 + j][p] - ctx.ops.theta[(i, j)] * m[p]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pack_roundtrip() {
        let space = Arc::new(FeSpace::new(build_interval_mesh(0.0, 1.0, 4).unwrap(), 1).unwrap());
        let ctx = SlabContext::new(space, TimeBasis::new(2));
        let u = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let x = ctx.pack(&u);
        assert_eq!(x[0..3], [1.0, 4.0, 7.0]);
        assert_eq!(ctx.unpack(&x), u);
    }
}
