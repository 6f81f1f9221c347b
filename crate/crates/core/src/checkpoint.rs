//! JSON checkpoints: a manifest plus one file per slab, enough to rebuild a `DgSolution`
//! without re-solving.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{DgSolution, Direction, SlabSolution};
use crate::mesh::{build_interval_mesh, build_square_mesh, MeshKind};
use crate::space::FeSpace;
use crate::time::{make_time_basis, TimeBasis, TimePartition};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub problem_hash: String,
    pub direction: Direction,
    pub k: usize,
    pub l: usize,
    #[serde(rename = "N")]
    pub n_slabs: usize,
    pub n: usize,
    pub epsilon: f64,
    pub mesh: MeshKind,
    pub time_quad_points: usize,
    pub under_integrated: bool,
    pub partition: TimePartition,
    pub initial: Vec<f64>,
    pub slab_files: Vec<String>,
}

fn slab_file(n: usize) -> String {
    format!("slab_{n:05}.json")
}

/// Write `sol` into `dir` (created if needed).
pub fn write_checkpoint(dir: &Path, sol: &DgSolution, problem_hash: &str, epsilon: f64) -> Result<CheckpointManifest> {
    fs::create_dir_all(dir)?;
    let slab_files: Vec<String> = (0..sol.n_slabs()).map(slab_file).collect();
    for (s, name) in sol.slabs.iter().zip(&slab_files) {
        fs::write(dir.join(name), serde_json::to_string(s)?)?;
    }
    let manifest = CheckpointManifest {
        problem_hash: problem_hash.to_string(),
        direction: sol.direction,
        k: sol.basis.degree(),
        l: sol.space.degree(),
        n_slabs: sol.n_slabs(),
        n: sol.space.mesh().resolution(),
        epsilon,
        mesh: sol.space.mesh().kind(),
        time_quad_points: sol.basis.n_quad(),
        under_integrated: sol.basis.is_under_integrated(),
        partition: sol.partition.clone(),
        initial: sol.initial.clone(),
        slab_files,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<CheckpointManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

/// Rebuild the solution stored in `dir`, including its space and time basis.
pub fn load_checkpoint(dir: &Path) -> Result<(CheckpointManifest, DgSolution)> {
    let manifest = read_manifest(dir)?;
    let mesh = match manifest.mesh {
        MeshKind::Interval { a, b, n_cells } => build_interval_mesh(a, b, n_cells)?,
        MeshKind::UnitSquare { n_per_side } => build_square_mesh(n_per_side)?,
    };
    let space = Arc::new(FeSpace::new(mesh, manifest.l)?);
    let basis = if manifest.under_integrated {
        TimeBasis::under_integrated(manifest.k).with_quadrature(manifest.time_quad_points)
    } else {
        make_time_basis(manifest.k, manifest.time_quad_points)?
    };
    if manifest.slab_files.len() != manifest.n_slabs || manifest.partition.n_slabs() != manifest.n_slabs {
        return Err(Error::invalid("checkpoint manifest is inconsistent"));
    }
    let mut slabs = Vec::with_capacity(manifest.n_slabs);
    for (n, name) in manifest.slab_files.iter().enumerate() {
        let s: SlabSolution = serde_json::from_str(&fs::read_to_string(dir.join(name))?)?;
        let shape_ok = s.slab_index == n
            && s.coefficients.len() == manifest.k + 1
            && s.coefficients.iter().all(|c| c.len() == space.free_count());
        if !shape_ok {
            return Err(Error::invalid(format!("checkpoint slab {n} does not match the manifest")));
        }
        slabs.push(s);
    }
    if manifest.initial.len() != space.free_count() {
        return Err(Error::invalid("checkpoint initial data does not match the space"));
    }
    let sol = DgSolution {
        direction: manifest.direction,
        partition: manifest.partition.clone(),
        basis,
        space,
        slabs,
        initial: manifest.initial.clone(),
    };
    Ok((manifest, sol))
}
