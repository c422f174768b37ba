//! Discrete inf-sup constant of the weak-symmetry pairing.
//!
//! β_h² is the smallest eigenvalue of Bᵀ G⁻¹ B, where B pairs stresses with
//! rotations and G is the Gram matrix of the stress norm
//! ‖τ‖² = ‖(2μ_f)^{-1/2} dev τ‖² + ‖ρ_f^{-1/2} ∇·τ‖² + Σ_F χ_f‖[τ]‖²_F
//!        + ‖δ^{-1/2} τn·t‖²_{Γ_I} + χ_I‖τn‖²_{Γ_I}.
//! The rotation basis is L²-orthonormal, so its Gram matrix is the identity.

use crate::assembly::{collect, PenaltySpec, SystemBlocks};
use crate::linalg::CsrMatrix;
use crate::material::MaterialModel;
use crate::mesh::{FaceTag, Region};
use crate::space::{Block, Discretization};
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::Serialize;
use thiserror::Error;

pub const MAX_DENSE_DOFS: usize = 5000;

#[derive(Debug, Error)]
pub enum InfSupError {
    #[error("inf-sup problem has {0} stress + rotation unknowns, above the dense limit {MAX_DENSE_DOFS}")]
    TooLarge(usize),
    #[error("stress Gram matrix is not positive definite")]
    Gram,
    #[error("eigenvalue solver failed")]
    Eigen,
    #[error("the fluid region is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InfSup {
    pub beta: f64,
    pub n_stress: usize,
    pub n_rotation: usize,
}

/// Gram matrix of the stress norm on the S block.
pub fn stress_gram(d: &Discretization, mat: &MaterialModel, spec: &PenaltySpec, blocks: &SystemBlocks) -> CsrMatrix {
    let l = &d.space.layout;
    let nf = l.n_f;
    let size = l.block_len(Block::S);
    let cells: Vec<usize> = d.mesh.cells_in(Region::Fluid).collect();
    let div = collect(&cells, size, size, |&c, e| {
        let t = &d.cells[c];
        let k = 1.0 / mat.fluid(c).rho_f;
        for q in 0..t.weights.len() {
            let g = t.grad_at(q);
            for a in 0..2 {
                for b in 0..2 {
                    for dd in 0..2 {
                        for i in 0..nf {
                            for j in 0..nf {
                                e.push((l.ften(c, a, b) + i, l.ften(c, a, dd) + j, t.weights[q] * k * g[i][b] * g[j][dd]));
                            }
                        }
                    }
                }
            }
        }
    });
    let faces: Vec<usize> = (0..d.mesh.faces.len())
        .filter(|&f| matches!(d.mesh.faces[f].tag, FaceTag::InteriorF | FaceTag::NeumannF | FaceTag::Interface))
        .collect();
    let jump = collect(&faces, size, size, |&f, e| {
        let face = &d.mesh.faces[f];
        let ft = &d.faces[f];
        let n = face.normal;
        // on the interface only the fluid side (index 1) carries stress unknowns
        let (sides, chi): (Vec<usize>, f64) = if face.tag == FaceTag::Interface {
            let c = ft.sides[1].cell;
            let p = d.space.degree_of(Region::Fluid) as f64;
            (vec![1], spec.c3 * p * p / (mat.fluid(c).rho_f * d.mesh.cells[c].diameter))
        } else {
            ((0..ft.sides.len()).collect(), blocks.penalty.chi_f[f])
        };
        for q in 0..ft.weights.len() {
            for &s in &sides {
                for &s2 in &sides {
                    let (ts, tt) = (&ft.sides[s], &ft.sides[s2]);
                    let sg = if s == s2 { 1.0 } else { -1.0 };
                    let (ps, pt) = (ts.phi_at(q), tt.phi_at(q));
                    for a in 0..2 {
                        for b in 0..2 {
                            for dd in 0..2 {
                                for i in 0..nf {
                                    for j in 0..nf {
                                        let v = ft.weights[q] * chi * sg * ps[i] * n[b] * pt[j] * n[dd];
                                        e.push((l.ften(ts.cell, a, b) + i, l.ften(tt.cell, a, dd) + j, v));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    blocks.fluid.m_f.lin_comb(1.0, &blocks.fluid.d_f, 1.0).lin_comb(1.0, &div, 1.0).lin_comb(1.0, &jump, 1.0)
}

/// Restrict to the fluid unknowns: rows of S and R that belong to fluid cells.
fn fluid_indices(d: &Discretization) -> (Vec<usize>, Vec<usize>) {
    let l = &d.space.layout;
    let mut s = Vec::new();
    let mut r = Vec::new();
    for c in d.mesh.cells_in(Region::Fluid) {
        for a in 0..2 {
            for b in 0..2 {
                s.extend(l.ften(c, a, b)..l.ften(c, a, b) + l.n_f);
            }
        }
        r.extend(l.fr(c)..l.fr(c) + l.n_r);
    }
    (s, r)
}

pub fn inf_sup(d: &Discretization, mat: &MaterialModel, spec: &PenaltySpec, blocks: &SystemBlocks) -> Result<InfSup, InfSupError> {
    let (si, ri) = fluid_indices(d);
    if si.is_empty() {
        return Err(InfSupError::Empty);
    }
    if si.len() + ri.len() > MAX_DENSE_DOFS {
        return Err(InfSupError::TooLarge(si.len() + ri.len()));
    }
    let g = stress_gram(d, mat, spec, blocks);
    let (ns, nr) = (si.len(), ri.len());
    let mut sp = vec![usize::MAX; g.nrows];
    for (k, &i) in si.iter().enumerate() {
        sp[i] = k;
    }
    let mut rp = vec![usize::MAX; blocks.fluid.b_f.ncols];
    for (k, &j) in ri.iter().enumerate() {
        rp[j] = k;
    }
    let mut gd = Mat::<f64>::zeros(ns, ns);
    for (i, j, v) in g.triplets() {
        if sp[i] != usize::MAX && sp[j] != usize::MAX {
            gd[(sp[i], sp[j])] += v;
        }
    }
    let mut bd = Mat::<f64>::zeros(ns, nr);
    for (i, j, v) in blocks.fluid.b_f.triplets() {
        if sp[i] != usize::MAX && rp[j] != usize::MAX {
            bd[(sp[i], rp[j])] += v;
        }
    }
    let llt = gd.llt(Side::Lower).map_err(|_| InfSupError::Gram)?;
    let x = llt.solve(&bd);
    let c = bd.transpose() * &x;
    let ev = c.self_adjoint_eigenvalues(Side::Lower).map_err(|_| InfSupError::Eigen)?;
    let lmin = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(InfSup { beta: lmin.max(0.0).sqrt(), n_stress: ns, n_rotation: nr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::AssembledSystem;
    use crate::material::MaterialSet;
    use crate::mesh::{generate_cartesian, RegionBox};

    #[test]
    fn positive_on_small_mesh_and_guarded() {
        let boxes = RegionBox::manufactured_pair();
        let d = Discretization::new(generate_cartesian(&boxes, 2, 2).unwrap(), 1, 2).unwrap();
        let mat = MaterialModel::uniform(&d.mesh, &MaterialSet::preset("test1").unwrap());
        let spec = PenaltySpec::default();
        let sys = AssembledSystem::new(&d, &mat, &spec).unwrap();
        let g = stress_gram(&d, &mat, &spec, &sys.blocks);
        assert!(g.asymmetry() < 1e-12);
        let r = inf_sup(&d, &mat, &spec, &sys.blocks).unwrap();
        assert!(r.beta > 1e-3, "beta = {}", r.beta);
        let big = Discretization::new(generate_cartesian(&boxes, 12, 12).unwrap(), 1, 3).unwrap();
        let mat = MaterialModel::uniform(&big.mesh, &MaterialSet::preset("test1").unwrap());
        let sys = AssembledSystem::new(&big, &mat, &spec).unwrap();
        assert!(matches!(inf_sup(&big, &mat, &spec, &sys.blocks), Err(InfSupError::TooLarge(_))));
    }
}
