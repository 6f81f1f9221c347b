//! Conforming Lagrange P1/P2 spaces with homogeneous Dirichlet dofs eliminated.
//!
//! All vectors handed out by this module live on the *free* (non-Dirichlet) dofs;
//! [`FeSpace::expand`] lifts them to the full dof set with zero boundary values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{interval_rule, triangle_rule, Rule};

/// Affine element map `x = origin + J ξ`.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub inv_t: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn map(&self, xi: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// A quadrature rule together with the reference basis tabulated at its points.
#[derive(Debug, Clone)]
pub struct ElementRule {
    pub degree: usize,
    pub rule: Rule,
    /// `phi[q][a]`
    pub phi: Vec<Vec<f64>>,
    /// reference gradients `dphi[q][a]`
    pub dphi: Vec<Vec<[f64; 2]>>,
}

impl ElementRule {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }
}

/// Reference Lagrange basis. Local order: vertices, then edges (2D edges (0,1), (1,2), (2,0);
/// in 1D the single interior node at the midpoint).
pub fn reference_basis(dimension: usize, degree: usize, xi: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
    match (dimension, degree) {
        (1, 1) => (vec![1.0 - xi[0], xi[0]], vec![[-1.0, 0.0], [1.0, 0.0]]),
        (1, 2) => {
            let s = xi[0];
            (
                vec![(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)],
                vec![[4.0 * s - 3.0, 0.0], [4.0 * s - 1.0, 0.0], [4.0 - 8.0 * s, 0.0]],
            )
        }
        (2, 1) => (
            vec![1.0 - xi[0] - xi[1], xi[0], xi[1]],
            vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        ),
        (2, 2) => {
            let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut phi = Vec::with_capacity(6);
            let mut dphi = Vec::with_capacity(6);
            for i in 0..3 {
                phi.push(l[i] * (2.0 * l[i] - 1.0));
                let f = 4.0 * l[i] - 1.0;
                dphi.push([f * dl[i][0], f * dl[i][1]]);
            }
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                phi.push(4.0 * l[i] * l[j]);
                dphi.push([
                    4.0 * (dl[i][0] * l[j] + l[i] * dl[j][0]),
                    4.0 * (dl[i][1] * l[j] + l[i] * dl[j][1]),
                ]);
            }
            (phi, dphi)
        }
        _ => panic!("unsupported element: dimension {dimension}, degree {degree}"),
    }
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    degree: usize,
    dof_coordinates: Vec<Point>,
    element_dofs: Vec<Vec<usize>>,
    dirichlet_dofs: Vec<usize>,
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    rule: ElementRule,
    pattern: CsrMatrix,
    /// per element: (local a, local b, position in `pattern`) for free pairs
    scatter: Vec<Vec<(usize, usize, usize)>>,
}

pub fn build_space(mesh: Mesh, degree_l: usize) -> Result<FeSpace> {
    FeSpace::new(mesh, degree_l)
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        Self::with_quadrature_degree(mesh, degree, 4 * degree)
    }

    /// Space whose assembly rule integrates polynomials of `quad_degree` exactly.
    /// The default `4 l` makes the cubic term `(u³, φ)` exact.
    pub fn with_quadrature_degree(mesh: Mesh, degree: usize, quad_degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::Unsupported(format!("polynomial degree {degree}; only 1 and 2 are supported")));
        }
        if quad_degree < 2 * degree {
            return Err(Error::invalid(format!(
                "spatial quadrature degree {quad_degree} cannot integrate the mass matrix of degree {degree}"
            )));
        }
        let dim = mesh.dimension();
        let nv = mesh.num_vertices();

        // provisional numbering: vertices first, then edge/midpoint nodes
        let mut coords: Vec<Point> = mesh.vertices().to_vec();
        let mut on_boundary: Vec<bool> = mesh.boundary_vertex_flags().to_vec();
        let mut element_dofs: Vec<Vec<usize>> = mesh.elements().to_vec();
        if degree == 2 {
            if dim == 1 {
                for el in element_dofs.iter_mut() {
                    let (a, b) = (mesh.vertices()[el[0]], mesh.vertices()[el[1]]);
                    el.push(coords.len());
                    coords.push([0.5 * (a[0] + b[0]), 0.0]);
                    on_boundary.push(false);
                }
            } else {
                let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
                for el in mesh.elements() {
                    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                        let key = (el[i].min(el[j]), el[i].max(el[j]));
                        *edge_count.entry(key).or_default() += 1;
                    }
                }
                let mut edge_dof: HashMap<(usize, usize), usize> = HashMap::new();
                for el in element_dofs.iter_mut() {
                    let verts = [el[0], el[1], el[2]];
                    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                        let key = (verts[i].min(verts[j]), verts[i].max(verts[j]));
                        let id = *edge_dof.entry(key).or_insert_with(|| {
                            let (a, b) = (mesh.vertices()[key.0], mesh.vertices()[key.1]);
                            coords.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                            on_boundary.push(edge_count[&key] == 1);
                            coords.len() - 1
                        });
                        el.push(id);
                    }
                }
            }
        }
        debug_assert!(coords.len() >= nv);

        // renumber by (y, x) so that neighbouring dofs get nearby indices
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&p, &q| {
            coords[p][1]
                .total_cmp(&coords[q][1])
                .then(coords[p][0].total_cmp(&coords[q][0]))
        });
        let mut new_id = vec![0; coords.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let dof_coordinates: Vec<Point> = order.iter().map(|&o| coords[o]).collect();
        let boundary: Vec<bool> = order.iter().map(|&o| on_boundary[o]).collect();
        for el in element_dofs.iter_mut() {
            el.iter_mut().for_each(|d| *d = new_id[*d]);
        }

        let mut free_index = vec![None; dof_coordinates.len()];
        let mut free_dofs = Vec::new();
        let mut dirichlet_dofs = Vec::new();
        for (d, &b) in boundary.iter().enumerate() {
            if b {
                dirichlet_dofs.push(d);
            } else {
                free_index[d] = Some(free_dofs.len());
                free_dofs.push(d);
            }
        }

        let geometry = (0..mesh.num_elements())
            .map(|e| element_geometry(&mesh, e))
            .collect();
        let rule = make_rule(dim, degree, quad_degree);

        let nf = free_dofs.len();
        let mut builder = TripletBuilder::new(nf, nf);
        for el in &element_dofs {
            for &a in el {
                for &b in el {
                    if let (Some(i), Some(j)) = (free_index[a], free_index[b]) {
                        builder.push(i, j, 0.0);
                    }
                }
            }
        }
        let pattern = builder.build();
        let scatter = element_dofs
            .iter()
            .map(|el| {
                let mut s = Vec::new();
                for (la, &a) in el.iter().enumerate() {
                    for (lb, &b) in el.iter().enumerate() {
                        if let (Some(i), Some(j)) = (free_index[a], free_index[b]) {
                            s.push((la, lb, pattern.position(i, j).expect("pattern entry")));
                        }
                    }
                }
                s
            })
            .collect();

        Ok(FeSpace {
            mesh,
            degree,
            dof_coordinates,
            element_dofs,
            dirichlet_dofs,
            free_index,
            free_dofs,
            geometry,
            rule,
            pattern,
            scatter,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.mesh.dimension()
    }

    pub fn dof_count(&self) -> usize {
        self.dof_coordinates.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn dof_coordinates(&self) -> &[Point] {
        &self.dof_coordinates
    }

    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet_dofs
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e]
    }

    pub fn num_elements(&self) -> usize {
        self.element_dofs.len()
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    /// The assembly rule (exact for degree `4 l` unless configured otherwise).
    pub fn rule(&self) -> &ElementRule {
        &self.rule
    }

    /// A rule of a different exactness degree with tabulated basis.
    pub fn rule_of_degree(&self, degree: usize) -> ElementRule {
        make_rule(self.dimension(), self.degree, degree)
    }

    /// Zero-valued matrix with the free-dof sparsity pattern.
    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    /// `(local a, local b, position)` triples for scattering element matrices into [`Self::pattern`].
    pub fn element_scatter(&self, e: usize) -> &[(usize, usize, usize)] {
        &self.scatter[e]
    }

    /// Lift a free-dof vector to all dofs (Dirichlet values zero).
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.free_count());
        let mut full = vec![0.0; self.dof_count()];
        for (i, &d) in self.free_dofs.iter().enumerate() {
            full[d] = free[i];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }

    /// Local coefficients of a free-dof vector on element `e` (zeros on Dirichlet dofs).
    pub fn local_values(&self, e: usize, free: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.element_dofs[e]
                .iter()
                .map(|&d| self.free_index[d].map_or(0.0, |i| free[i])),
        );
    }

    /// Nodal interpolant restricted to the free dofs.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| f(self.dof_coordinates[d])).collect()
    }

    /// Assemble `∫ c φ_b φ_a` for a coefficient given at the (element, qp) points of `rule`
    /// (`coef[e * rule.len() + q]`), on the free-dof pattern.
    pub fn weighted_mass_with(&self, rule: &ElementRule, coef: &[f64]) -> CsrMatrix {
        let nq = rule.len();
        assert_eq!(coef.len(), self.num_elements() * nq);
        let mut m = self.pattern.clone();
        let vals = m.values_mut();
        for e in 0..self.num_elements() {
            let det = self.geometry[e].det;
            for &(la, lb, pos) in &self.scatter[e] {
                let mut s = 0.0;
                for q in 0..nq {
                    s += rule.rule.weights[q] * coef[e * nq + q] * rule.phi[q][la] * rule.phi[q][lb];
                }
                vals[pos] += s * det;
            }
        }
        m
    }

    pub fn weighted_mass(&self, coef: &[f64]) -> CsrMatrix {
        self.weighted_mass_with(&self.rule, coef)
    }

    pub fn mass(&self) -> CsrMatrix {
        let ones = vec![1.0; self.num_elements() * self.rule.len()];
        self.weighted_mass(&ones)
    }

    /// `a(φ_b, φ_a) = ∫ ∇φ_b · ∇φ_a`.
    pub fn stiffness(&self) -> CsrMatrix {
        let rule = &self.rule;
        let nq = rule.len();
        let mut m = self.pattern.clone();
        let vals = m.values_mut();
        let nloc = self.element_dofs[0].len();
        let mut grads = vec![[0.0; 2]; nloc];
        for e in 0..self.num_elements() {
            let g = &self.geometry[e];
            let mut local = vec![0.0; nloc * nloc];
            for q in 0..nq {
                for a in 0..nloc {
                    grads[a] = g.grad(rule.dphi[q][a]);
                }
                let w = rule.rule.weights[q] * g.det;
                for a in 0..nloc {
                    for b in 0..nloc {
                        local[a * nloc + b] += w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    }
                }
            }
            for &(la, lb, pos) in &self.scatter[e] {
                vals[pos] += local[la * nloc + lb];
            }
        }
        m
    }

    /// Load vector `(f, φ_a)` over free dofs, integrated with `rule`.
    pub fn load_with(&self, rule: &ElementRule, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.free_count()];
        for e in 0..self.num_elements() {
            let g = &self.geometry[e];
            for q in 0..rule.len() {
                let x = g.map(rule.rule.points[q]);
                let v = f(x);
                if !v.is_finite() {
                    return Err(Error::NonFinite("load integrand"));
                }
                let w = rule.rule.weights[q] * g.det * v;
                for (a, &d) in self.element_dofs[e].iter().enumerate() {
                    if let Some(i) = self.free_index[d] {
                        out[i] += w * rule.phi[q][a];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn load(&self, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
        self.load_with(&self.rule, f)
    }

    /// Gradient load `(g, ∇φ_a)` for a vector field `g`, integrated with `rule`.
    pub fn grad_load_with(&self, rule: &ElementRule, g: impl Fn(Point) -> [f64; 2]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.free_count()];
        for e in 0..self.num_elements() {
            let geo = &self.geometry[e];
            for q in 0..rule.len() {
                let v = g(geo.map(rule.rule.points[q]));
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(Error::NonFinite("gradient load integrand"));
                }
                let w = rule.rule.weights[q] * geo.det;
                for (a, &d) in self.element_dofs[e].iter().enumerate() {
                    if let Some(i) = self.free_index[d] {
                        let gp = geo.grad(rule.dphi[q][a]);
                        out[i] += w * (v[0] * gp[0] + v[1] * gp[1]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Load `(v, φ_a)` with `v` given at the (element, qp) points of `rule`.
    pub fn load_from_values(&self, rule: &ElementRule, values: &[f64]) -> Vec<f64> {
        let nq = rule.len();
        let mut out = vec![0.0; self.free_count()];
        for e in 0..self.num_elements() {
            let det = self.geometry[e].det;
            for q in 0..nq {
                let w = rule.rule.weights[q] * det * values[e * nq + q];
                for (a, &d) in self.element_dofs[e].iter().enumerate() {
                    if let Some(i) = self.free_index[d] {
                        out[i] += w * rule.phi[q][a];
                    }
                }
            }
        }
        out
    }

    /// Values of a free-dof function at all (element, qp) points of `rule`.
    pub fn values_at(&self, rule: &ElementRule, free: &[f64]) -> Vec<f64> {
        let nq = rule.len();
        let mut out = vec![0.0; self.num_elements() * nq];
        let mut loc = Vec::new();
        for e in 0..self.num_elements() {
            self.local_values(e, free, &mut loc);
            for q in 0..nq {
                out[e * nq + q] = loc.iter().zip(&rule.phi[q]).map(|(c, p)| c * p).sum();
            }
        }
        out
    }

    /// Physical gradients of a free-dof function at all (element, qp) points of `rule`.
    pub fn gradients_at(&self, rule: &ElementRule, free: &[f64]) -> Vec<[f64; 2]> {
        let nq = rule.len();
        let mut out = vec![[0.0; 2]; self.num_elements() * nq];
        let mut loc = Vec::new();
        for e in 0..self.num_elements() {
            self.local_values(e, free, &mut loc);
            let g = &self.geometry[e];
            for q in 0..nq {
                let mut r = [0.0; 2];
                for (c, d) in loc.iter().zip(&rule.dphi[q]) {
                    r[0] += c * d[0];
                    r[1] += c * d[1];
                }
                out[e * nq + q] = g.grad(r);
            }
        }
        out
    }

    /// Physical coordinates of all (element, qp) points of `rule`.
    pub fn points_at(&self, rule: &ElementRule) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.num_elements() * rule.len());
        for g in &self.geometry {
            for p in &rule.rule.points {
                out.push(g.map(*p));
            }
        }
        out
    }

    /// Integration weights (reference weight × |det J|) at all (element, qp) points.
    pub fn weights_at(&self, rule: &ElementRule) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_elements() * rule.len());
        for g in &self.geometry {
            for w in &rule.rule.weights {
                out.push(w * g.det);
            }
        }
        out
    }
}

fn make_rule(dimension: usize, degree: usize, quad_degree: usize) -> ElementRule {
    let rule = if dimension == 1 {
        interval_rule(quad_degree)
    } else {
        triangle_rule(quad_degree)
    };
    let mut phi = Vec::with_capacity(rule.len());
    let mut dphi = Vec::with_capacity(rule.len());
    for p in &rule.points {
        let (v, d) = reference_basis(dimension, degree, *p);
        phi.push(v);
        dphi.push(d);
    }
    ElementRule {
        degree: quad_degree,
        rule,
        phi,
        dphi,
    }
}

fn element_geometry(mesh: &Mesh, e: usize) -> ElementGeometry {
    let el = &mesh.elements()[e];
    let v = mesh.vertices();
    if mesh.dimension() == 1 {
        let (a, b) = (v[el[0]], v[el[1]]);
        let h = b[0] - a[0];
        ElementGeometry {
            origin: a,
            jac: [[h, 0.0], [0.0, 1.0]],
            det: h.abs(),
            inv_t: [[1.0 / h, 0.0], [0.0, 1.0]],
        }
    } else {
        let (p0, p1, p2) = (v[el[0]], v[el[1]], v[el[2]]);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // J^{-T}
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        ElementGeometry {
            origin: p0,
            jac,
            det: det.abs(),
            inv_t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_interval_mesh, build_square_mesh};
    use std::f64::consts::PI;

    #[test]
    fn dof_counts() {
        let s = build_space(build_interval_mesh(0.0, 1.0, 4).unwrap(), 1).unwrap();
        assert_eq!((s.dof_count(), s.free_count()), (5, 3));
        let s = build_space(build_interval_mesh(0.0, 1.0, 4).unwrap(), 2).unwrap();
        assert_eq!((s.dof_count(), s.free_count()), (9, 7));
        let s = build_space(build_square_mesh(2).unwrap(), 1).unwrap();
        assert_eq!((s.dof_count(), s.free_count()), (9, 1));
        // P2 on square(2): 9 vertices + 16 edges; interior: 1 vertex + 8 interior edges
        let s = build_space(build_square_mesh(2).unwrap(), 2).unwrap();
        assert_eq!((s.dof_count(), s.free_count()), (25, 9));
        assert!(build_space(build_interval_mesh(0.0, 1.0, 4).unwrap(), 3).is_err());
    }

    #[test]
    fn dirichlet_dofs_lie_on_boundary() {
        for l in [1, 2] {
            let s = build_space(build_square_mesh(3).unwrap(), l).unwrap();
            let on_gamma = |p: Point| p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
            for d in 0..s.dof_count() {
                let p = s.dof_coordinates()[d];
                assert_eq!(s.dirichlet_dofs().contains(&d), on_gamma(p), "dof {d} at {p:?}");
            }
        }
    }

    #[test]
    fn shared_dofs_are_continuous() {
        // every P2 edge dof shared by two triangles maps to one global index
        let s = build_space(build_square_mesh(3).unwrap(), 2).unwrap();
        let mut seen: HashMap<usize, Point> = HashMap::new();
        for e in 0..s.num_elements() {
            let g = s.geometry(e);
            let nodes = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
            for (a, &d) in s.element_dofs(e).iter().enumerate() {
                let x = g.map(nodes[a]);
                let prev = *seen.entry(d).or_insert(x);
                assert!((prev[0] - x[0]).abs() < 1e-14 && (prev[1] - x[1]).abs() < 1e-14);
                assert!((s.dof_coordinates()[d][0] - x[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        for (dim, l) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let rule = make_rule(dim, l, 4 * l);
            for q in 0..rule.len() {
                let s: f64 = rule.phi[q].iter().sum();
                assert!((s - 1.0).abs() <= 1e-13);
                let g: [f64; 2] = rule.dphi[q]
                    .iter()
                    .fold([0.0, 0.0], |acc, d| [acc[0] + d[0], acc[1] + d[1]]);
                assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mass_and_stiffness_1d_p1() {
        let s = build_space(build_interval_mesh(0.0, 1.0, 4).unwrap(), 1).unwrap();
        let h = 0.25;
        let a = s.stiffness();
        let m = s.mass();
        assert!((a.get(0, 0) - 2.0 / h).abs() < 1e-13);
        assert!((a.get(0, 1) + 1.0 / h).abs() < 1e-13);
        assert!((m.get(1, 1) - 4.0 * h / 6.0).abs() < 1e-15);
        assert!((m.get(1, 2) - h / 6.0).abs() < 1e-15);
        assert_eq!(m.transpose(), m);
    }

    #[test]
    fn bandwidth_stays_small_in_2d() {
        let s = build_space(build_square_mesh(8).unwrap(), 2).unwrap();
        let (kl, ku) = s.mass().bandwidth();
        assert!(kl <= 2 * 17 + 2 && ku <= 2 * 17 + 2, "bandwidth ({kl}, {ku})");
    }

    fn interp_errors(n: usize, l: usize) -> (f64, f64) {
        let s = build_space(build_interval_mesh(0.0, 1.0, n).unwrap(), l).unwrap();
        let u = s.interpolate(|p| (PI * p[0]).sin());
        let rule = s.rule_of_degree(12);
        let vals = s.values_at(&rule, &u);
        let grads = s.gradients_at(&rule, &u);
        let pts = s.points_at(&rule);
        let w = s.weights_at(&rule);
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for i in 0..w.len() {
            let x = pts[i][0];
            l2 += w[i] * (vals[i] - (PI * x).sin()).powi(2);
            h1 += w[i] * (grads[i][0] - PI * (PI * x).cos()).powi(2);
        }
        (l2.sqrt(), h1.sqrt())
    }

    #[test]
    fn interpolation_rates() {
        for l in [1usize, 2] {
            let levels: Vec<(f64, f64)> = [4, 8, 16, 32, 64].iter().map(|&n| interp_errors(n, l)).collect();
            for w in levels.windows(2).skip(1) {
                let o_l2 = (w[0].0 / w[1].0).log2();
                let o_h1 = (w[0].1 / w[1].1).log2();
                assert!((o_l2 - (l as f64 + 1.0)).abs() < 0.15, "l={l} L2 order {o_l2}");
                assert!((o_h1 - l as f64).abs() < 0.15, "l={l} H1 order {o_h1}");
            }
        }
    }
}
