//! Face penalty coefficients χ_e, χ_p, χ_f.

use crate::material::MaterialModel;
use crate::mesh::{FaceTag, Region};
use crate::space::Discretization;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySpec {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Multiply the boundary-face values by c1/c2/c3 as well. Without it the
    /// forms lose coercivity on typical meshes.
    #[serde(default)]
    pub scale_boundary: bool,
}

impl Default for PenaltySpec {
    fn default() -> Self {
        PenaltySpec { c1: 10.0, c2: 10.0, c3: 10.0, scale_boundary: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    Elastic,
    Pressure,
    Fluid,
}

#[derive(Debug, Error, PartialEq)]
#[error("face {face} ({tag}) does not carry the {kind:?} penalty")]
pub struct PenaltyError {
    pub face: usize,
    pub tag: &'static str,
    pub kind: PenaltyKind,
}

/// Per-cell coefficient times p² / h_K.
fn cell_value(d: &Discretization, mat: &MaterialModel, kind: PenaltyKind, c: usize) -> f64 {
    let cell = &d.mesh.cells[c];
    let p = d.space.degree_of(cell.region) as f64;
    let coef = match kind {
        PenaltyKind::Elastic => mat.poro(c).c_bar(),
        PenaltyKind::Pressure => mat.poro(c).m,
        PenaltyKind::Fluid => 1.0 / mat.fluid(c).rho_f,
    };
    coef * p * p / cell.diameter
}

pub fn penalty_chi(
    d: &Discretization,
    mat: &MaterialModel,
    spec: &PenaltySpec,
    kind: PenaltyKind,
    face: usize,
) -> Result<f64, PenaltyError> {
    let f = &d.mesh.faces[face];
    let (interior, boundary) = match kind {
        PenaltyKind::Elastic | PenaltyKind::Pressure => (FaceTag::InteriorP, FaceTag::DirichletP),
        PenaltyKind::Fluid => (FaceTag::InteriorF, FaceTag::NeumannF),
    };
    let c = match kind {
        PenaltyKind::Elastic => spec.c1,
        PenaltyKind::Pressure => spec.c2,
        PenaltyKind::Fluid => spec.c3,
    };
    if f.tag == interior {
        let a = cell_value(d, mat, kind, f.cells.0);
        let b = cell_value(d, mat, kind, f.cells.1.unwrap());
        Ok(c * a.max(b))
    } else if f.tag == boundary {
        let v = cell_value(d, mat, kind, f.cells.0);
        Ok(if spec.scale_boundary { c * v } else { v })
    } else {
        Err(PenaltyError { face, tag: f.tag.name(), kind })
    }
}

/// χ for every face, zero where the penalty does not apply.
#[derive(Debug, Clone)]
pub struct PenaltyField {
    pub chi_e: Vec<f64>,
    pub chi_p: Vec<f64>,
    pub chi_f: Vec<f64>,
}

impl PenaltyField {
    pub fn new(d: &Discretization, mat: &MaterialModel, spec: &PenaltySpec) -> PenaltyField {
        let n = d.mesh.faces.len();
        let get = |kind, fi| penalty_chi(d, mat, spec, kind, fi).unwrap_or(0.0);
        PenaltyField {
            chi_e: (0..n).map(|fi| get(PenaltyKind::Elastic, fi)).collect(),
            chi_p: (0..n).map(|fi| get(PenaltyKind::Pressure, fi)).collect(),
            chi_f: (0..n).map(|fi| get(PenaltyKind::Fluid, fi)).collect(),
        }
    }
}

/// Region whose forms are penalized on a face of this tag.
pub fn penalized_region(tag: FaceTag) -> Option<Region> {
    match tag {
        FaceTag::InteriorP | FaceTag::DirichletP => Some(Region::Poro),
        FaceTag::InteriorF | FaceTag::NeumannF => Some(Region::Fluid),
        _ => None,
    }
}
