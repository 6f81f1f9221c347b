//! Gauss-type quadrature rules on the unit interval and the reference triangle.

use std::f64::consts::PI;

/// A quadrature rule with points in `[0, 1]` (1D) or the reference triangle (2D).
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative, by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // endpoint: P_n'(±1) = (±1)^(n-1) n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`; exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        // ascending order on [0,1]
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss-Legendre rule on an arbitrary interval.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let len = b - a;
    (
        x.iter().map(|s| a + len * s).collect(),
        w.iter().map(|wi| wi * len).collect(),
    )
}

/// Smallest Gauss-Legendre size integrating polynomials of `degree` exactly.
pub fn points_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

/// The `k + 1` right Radau points on `[0, 1]`, i.e. the roots of `P_{k+1} - P_k`
/// mapped from `[-1, 1]`. The last node is always `1`.
pub fn right_radau_nodes(k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    let f = |x: f64| {
        let (a, da) = legendre(k + 1, x);
        let (b, db) = legendre(k, x);
        (a - b, da - db)
    };
    // k interior roots in (-1, 1): bracket by sign changes on a fine grid.
    let samples = 400 * (k + 1);
    let mut roots = Vec::with_capacity(k + 1);
    let mut xl = -1.0;
    let mut fl = f(xl).0;
    for s in 1..samples {
        let xr = -1.0 + 2.0 * s as f64 / samples as f64;
        let fr = f(xr).0;
        if fl == 0.0 {
            roots.push(xl);
        } else if fl * fr < 0.0 {
            let (mut a, mut b) = (xl, xr);
            let mut fa = fl;
            let mut z = 0.5 * (a + b);
            for _ in 0..200 {
                let (fz, dfz) = f(z);
                if fz == 0.0 {
                    break;
                }
                if fa * fz < 0.0 {
                    b = z;
                } else {
                    a = z;
                    fa = fz;
                }
                let newton = z - fz / dfz;
                let next = if newton > a && newton < b {
                    newton
                } else {
                    0.5 * (a + b)
                };
                if (next - z).abs() < 1e-16 {
                    z = next;
                    break;
                }
                z = next;
            }
            roots.push(z);
        }
        xl = xr;
        fl = fr;
    }
    roots.push(1.0);
    assert_eq!(roots.len(), k + 1, "right Radau root search failed for k = {k}");
    roots.into_iter().map(|z| 0.5 * (1.0 + z)).collect()
}

/// Rule on `[0, 1]` stored with 2D points (second coordinate zero).
pub fn interval_rule(degree: usize) -> Rule {
    let (x, w) = gauss_legendre(points_for_degree(degree));
    Rule {
        points: x.into_iter().map(|s| [s, 0.0]).collect(),
        weights: w,
    }
}

/// Collapsed (Duffy) Gauss product rule on the reference triangle
/// `{(0,0), (1,0), (0,1)}`, exact for polynomials of total `degree`.
pub fn triangle_rule(degree: usize) -> Rule {
    // Under x = u, y = v (1 - u) the integrand gains one degree in u.
    let n = points_for_degree(degree + 1);
    let (g, gw) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (u, wu) in g.iter().zip(&gw) {
        for (v, wv) in g.iter().zip(&gw) {
            points.push([*u, v * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Rule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_monomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn radau_nodes_known_values() {
        assert_eq!(right_radau_nodes(0), vec![1.0]);
        let r1 = right_radau_nodes(1);
        assert!((r1[0] - 1.0 / 3.0).abs() < 1e-15 && r1[1] == 1.0);
        let r2 = right_radau_nodes(2);
        let s6 = 6f64.sqrt();
        assert!((r2[0] - (4.0 - s6) / 10.0).abs() < 1e-14);
        assert!((r2[1] - (4.0 + s6) / 10.0).abs() < 1e-14);
        for k in 0..8 {
            let r = right_radau_nodes(k);
            assert!(r.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn triangle_rule_is_exact() {
        for deg in 0..=9 {
            let rule = triangle_rule(deg);
            for p in 0..=deg {
                for q in 0..=(deg - p) {
                    let num: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32))
                        .sum();
                    // ∫ x^p y^q over the reference triangle = p! q! / (p+q+2)!
                    let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
                    let exact = fact(p) * fact(q) / fact(p + q + 2);
                    assert!((num - exact).abs() < 1e-15, "deg={deg} p={p} q={q}");
                }
            }
        }
    }
}
