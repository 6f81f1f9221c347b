//! Structured interval and unit-square triangulations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    Interval { a: f64, b: f64, n_cells: usize },
    UnitSquare { n_per_side: usize },
}

/// Simplicial mesh in one or two dimensions. 1D vertices carry a zero second coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    kind: MeshKind,
    dimension: usize,
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    boundary_vertex_flags: Vec<bool>,
    mesh_size_h: f64,
}

pub fn build_interval_mesh(a: f64, b: f64, n_cells: usize) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(Error::invalid("interval mesh needs at least one cell"));
    }
    if !(a < b) {
        return Err(Error::invalid(format!("interval endpoints must satisfy a < b (got {a}, {b})")));
    }
    let h = (b - a) / n_cells as f64;
    let vertices: Vec<Point> = (0..=n_cells)
        .map(|i| {
            // pin the right endpoint exactly
            let x = if i == n_cells { b } else { a + i as f64 * h };
            [x, 0.0]
        })
        .collect();
    let elements = (0..n_cells).map(|i| vec![i, i + 1]).collect();
    let mut flags = vec![false; n_cells + 1];
    flags[0] = true;
    flags[n_cells] = true;
    Mesh::new(MeshKind::Interval { a, b, n_cells }, 1, vertices, elements, flags)
}

/// Unit square with `n × n` cells, each split along its lower-left to upper-right diagonal.
pub fn build_square_mesh(n_per_side: usize) -> Result<Mesh> {
    if n_per_side == 0 {
        return Err(Error::invalid("square mesh needs at least one cell per side"));
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let coord = |i: usize| if i == n { 1.0 } else { i as f64 * h };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut flags = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(i), coord(j)]);
            flags.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            elements.push(vec![v00, v10, v11]);
            elements.push(vec![v00, v11, v01]);
        }
    }
    Mesh::new(MeshKind::UnitSquare { n_per_side }, 2, vertices, elements, flags)
}

impl Mesh {
    fn new(
        kind: MeshKind,
        dimension: usize,
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        boundary_vertex_flags: Vec<bool>,
    ) -> Result<Self> {
        let mut mesh = Mesh {
            kind,
            dimension,
            vertices,
            elements,
            boundary_vertex_flags,
            mesh_size_h: 0.0,
        };
        mesh.mesh_size_h = (0..mesh.elements.len())
            .map(|e| mesh.element_diameter(e))
            .fold(0.0, f64::max);
        mesh.validate()?;
        Ok(mesh)
    }

    /// Check connectivity, orientation and conformity.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        let per = self.dimension + 1;
        for (e, el) in self.elements.iter().enumerate() {
            if el.len() != per || el.iter().any(|&v| v >= nv) {
                return Err(Error::invalid(format!("element {e} has invalid vertex indices")));
            }
            if !(self.element_volume(e) > 0.0) {
                return Err(Error::invalid(format!("element {e} has non-positive volume")));
            }
        }
        // facets: vertices in 1D, edges in 2D
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for el in &self.elements {
            for f in 0..per {
                let mut facet: Vec<usize> = el
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != f)
                    .map(|(_, &v)| v)
                    .collect();
                facet.sort_unstable();
                *facets.entry(facet).or_default() += 1;
            }
        }
        for (facet, count) in facets {
            let on_boundary = facet.iter().all(|&v| self.boundary_vertex_flags[v]);
            if count > 2 || (count == 1 && !on_boundary) {
                return Err(Error::invalid(format!("non-conforming facet {facet:?}")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex_flags
    }

    pub fn mesh_size_h(&self) -> f64 {
        self.mesh_size_h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Number of cells in 1D or cells per side in 2D.
    pub fn resolution(&self) -> usize {
        match self.kind {
            MeshKind::Interval { n_cells, .. } => n_cells,
            MeshKind::UnitSquare { n_per_side } => n_per_side,
        }
    }

    /// Signed length (1D) or area (2D).
    pub fn element_volume(&self, e: usize) -> f64 {
        let el = &self.elements[e];
        let p = |i: usize| self.vertices[el[i]];
        if self.dimension == 1 {
            p(1)[0] - p(0)[0]
        } else {
            let (a, b, c) = (p(0), p(1), p(2));
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        }
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        let el = &self.elements[e];
        let mut d = 0.0f64;
        for i in 0..el.len() {
            for j in i + 1..el.len() {
                let (a, b) = (self.vertices[el[i]], self.vertices[el[j]]);
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        d
    }

    /// Uniform refinement of the structured mesh; existing vertices keep their coordinates.
    pub fn refine(&self) -> Result<Mesh> {
        match self.kind {
            MeshKind::Interval { a, b, n_cells } => build_interval_mesh(a, b, 2 * n_cells),
            MeshKind::UnitSquare { n_per_side } => build_square_mesh(2 * n_per_side),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let m = build_interval_mesh(0.0, 1.0, 4).unwrap();
        let xs: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.mesh_size_h(), 0.25);

        let m = build_interval_mesh(0.0, 1.0, 1).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.boundary_vertex_flags(), &[true, true]);

        let m = build_interval_mesh(-1.0, 1.0, 8).unwrap();
        assert_eq!(m.mesh_size_h(), 0.25);
        assert_eq!(m.num_vertices(), 9);
    }

    #[test]
    fn interval_errors() {
        assert!(build_interval_mesh(0.0, 1.0, 0).is_err());
        assert!(build_interval_mesh(1.0, 1.0, 3).is_err());
        assert!(build_interval_mesh(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn square_examples() {
        let interior = |m: &Mesh| m.boundary_vertex_flags().iter().filter(|b| !**b).count();
        let m = build_square_mesh(1).unwrap();
        assert_eq!((m.num_vertices(), m.num_elements(), interior(&m)), (4, 2, 0));
        let m = build_square_mesh(2).unwrap();
        assert_eq!((m.num_vertices(), m.num_elements(), interior(&m)), (9, 8, 1));
        let m = build_square_mesh(4).unwrap();
        assert_eq!((m.num_vertices(), m.num_elements(), interior(&m)), (25, 32, 9));
        assert!((m.mesh_size_h() - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(build_square_mesh(0).is_err());
    }

    #[test]
    fn square_counts_match_independent_enumeration() {
        // count lattice points strictly inside the unit square by brute force
        for n in 1..7usize {
            let m = build_square_mesh(n).unwrap();
            let mut inside = 0;
            for j in 0..=n {
                for i in 0..=n {
                    if i > 0 && i < n && j > 0 && j < n {
                        inside += 1;
                    }
                }
            }
            let interior = m.boundary_vertex_flags().iter().filter(|b| !**b).count();
            assert_eq!(interior, inside);
            let total_area: f64 = (0..m.num_elements()).map(|e| m.element_volume(e)).sum();
            assert!((total_area - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn refinement_is_nested() {
        for coarse in [build_interval_mesh(-1.0, 2.0, 5).unwrap(), build_square_mesh(3).unwrap()] {
            let fine = coarse.refine().unwrap();
            for p in coarse.vertices() {
                assert!(fine.vertices().iter().any(|q| q == p), "vertex {p:?} moved");
            }
        }
    }

    #[test]
    fn json_dump_has_fields() {
        let m = build_interval_mesh(0.0, 1.0, 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["elements"].as_array().unwrap().len(), 2);
        assert_eq!(v["boundary_vertex_flags"][0], true);
    }
}
