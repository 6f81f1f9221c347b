//! Band LU with partial pivoting and a symmetric band LDLᵀ used for inertia counts.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Band LU factorization `P A = L U`, LAPACK `gbtrf` style: row swaps are
/// applied only to the not-yet-eliminated columns, multipliers stay in place.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        // row r stores columns [r - kl, r + kl + ku]
        r * self.width + (c + self.kl - r)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::invalid("band LU needs a square matrix"));
        }
        let n = a.rows();
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut f = BandedLu {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
        };
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in a.row(i) {
                let p = f.idx(i, j);
                f.data[p] = v;
                scale = scale.max(v.abs());
            }
        }
        let tiny = scale.max(f64::MIN_POSITIVE) * 1e-300;
        for i in 0..n {
            let last_row = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = f.data[f.idx(i, i)].abs();
            for r in i + 1..=last_row {
                let v = f.data[f.idx(r, i)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny || !best.is_finite() {
                return Err(Error::Singular { row: i });
            }
            f.pivots[i] = p;
            let last_col = (i + kl + ku).min(n - 1);
            if p != i {
                for c in i..=last_col {
                    let (a_, b_) = (f.idx(i, c), f.idx(p, c));
                    f.data.swap(a_, b_);
                }
            }
            let piv = f.data[f.idx(i, i)];
            for r in i + 1..=last_row {
                let ri = f.idx(r, i);
                let m = f.data[ri] / piv;
                f.data[ri] = m;
                if m != 0.0 {
                    for c in i + 1..=last_col {
                        let (rc, ic) = (f.idx(r, c), f.idx(i, c));
                        f.data[rc] -= m * f.data[ic];
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                x.swap(i, p);
            }
            let xi = x[i];
            if xi != 0.0 {
                for r in i + 1..=(i + self.kl).min(n.saturating_sub(1)) {
                    x[r] -= self.data[self.idx(r, i)] * xi;
                }
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + self.kl + self.ku).min(n - 1);
            let mut s = x[i];
            for c in i + 1..=last_col {
                s -= self.data[self.idx(i, c)] * x[c];
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }
}

/// Number of negative pivots of the symmetric band factorization
/// `A - shift * M = L D Lᵀ` (no pivoting). By Sylvester's law of inertia this is
/// the number of generalized eigenvalues of `(A, M)` below `shift`.
/// Returns `None` when a pivot is too small to trust the count.
pub fn count_eigenvalues_below(a: &CsrMatrix, m: &CsrMatrix, shift: f64) -> Option<usize> {
    let n = a.rows();
    let (kl_a, _) = a.bandwidth();
    let (kl_m, _) = m.bandwidth();
    let b = kl_a.max(kl_m);
    // lower band storage: row i holds columns [i - b, i]
    let w = b + 1;
    let mut l = vec![0.0; n * w];
    let idx = |i: usize, j: usize| i * w + (j + b - i);
    let mut scale = 0.0f64;
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j <= i {
                l[idx(i, j)] += v;
            }
        }
        for (j, v) in m.row(i) {
            if j <= i {
                l[idx(i, j)] -= shift * v;
            }
        }
        scale = scale.max(l[idx(i, i)].abs());
    }
    let mut d = vec![0.0; n];
    let mut negatives = 0;
    for j in 0..n {
        let lo = j.saturating_sub(b);
        let mut djj = l[idx(j, j)];
        for p in lo..j {
            let ljp = l[idx(j, p)];
            djj -= ljp * ljp * d[p];
        }
        if !djj.is_finite() || djj.abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        d[j] = djj;
        if djj < 0.0 {
            negatives += 1;
        }
        for i in j + 1..(j + b + 1).min(n) {
            let lo_i = i.saturating_sub(b).max(lo);
            let mut s = l[idx(i, j)];
            for p in lo_i..j {
                s -= l[idx(i, p)] * l[idx(j, p)] * d[p];
            }
            l[idx(i, j)] = s / djj;
        }
    }
    Some(negatives)
}
