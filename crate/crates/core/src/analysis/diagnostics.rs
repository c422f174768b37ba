//! Structural checks of the assembled matrices.

use crate::assembly::AssembledSystem;
use crate::linalg::CsrMatrix;
use crate::material::{density_block_cholesky, MaterialModel};
use crate::space::{Block, Discretization};
use faer::Side;
use serde::Serialize;
use std::ops::Range;

#[derive(Debug, Clone, Serialize)]
pub struct MatrixDiagnostics {
    /// (name, max|B − Bᵀ| / max|B|) for every block that must be symmetric.
    pub symmetry: Vec<(String, f64)>,
    pub a_e_cholesky: bool,
    pub density_cholesky: bool,
    /// max |C^{pf} − (C^{fp})ᵀ| with C^{pf} read from M and C^{fp} from A.
    pub coupling_transpose: f64,
}

impl MatrixDiagnostics {
    pub fn max_asymmetry(&self) -> f64 {
        self.symmetry.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol && self.a_e_cholesky && self.density_cholesky && self.coupling_transpose <= tol
    }
}

/// Sub-block of a global matrix.
pub fn extract(m: &CsrMatrix, rows: Range<usize>, cols: Range<usize>) -> CsrMatrix {
    let mut t = crate::linalg::Triplets::new(rows.len(), cols.len());
    for i in rows.clone() {
        for (j, v) in m.row(i) {
            if cols.contains(&j) {
                t.push(i - rows.start, j - cols.start, v);
            }
        }
    }
    t.to_csr()
}

/// Sparse Cholesky succeeds (the matrix is numerically SPD).
pub fn cholesky_ok(m: &CsrMatrix) -> bool {
    m.nrows == 0 || m.to_faer().sp_cholesky(Side::Lower).is_ok()
}

pub fn diagnose(d: &Discretization, mat: &MaterialModel, sys: &AssembledSystem) -> MatrixDiagnostics {
    let symmetry = sys
        .named_blocks()
        .into_iter()
        .filter(|(name, _)| !matches!(*name, "M" | "A" | "B_b" | "B_f" | "N" | "N_alpha" | "T"))
        .map(|(name, m)| (name.to_string(), m.asymmetry()))
        .collect();
    let l = &d.space.layout;
    let (v, z, s) = (l.range(Block::V), l.range(Block::Z), l.range(Block::S));
    let c_pf = |r: Range<usize>| extract(&sys.m, r, s.clone()).scaled(-1.0);
    let c_fp = |c: Range<usize>| extract(&sys.a, s.clone(), c).transpose();
    let coupling_transpose = c_pf(v.clone())
        .lin_comb(1.0, &c_fp(v), -1.0)
        .max_abs()
        .max(c_pf(z.clone()).lin_comb(1.0, &c_fp(z), -1.0).max_abs());
    let density_cholesky = d.mesh.cells_in(crate::mesh::Region::Poro).all(|c| density_block_cholesky(mat.poro(c)).is_some());
    MatrixDiagnostics { symmetry, a_e_cholesky: cholesky_ok(&sys.blocks.poro.a_e), density_cholesky, coupling_transpose }
}
