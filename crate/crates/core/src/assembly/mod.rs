//! Bilinear forms, load vector and the global block system M Ẋ + A X = F.

mod forms;
mod load;
mod penalty;
mod sources;

pub(crate) use forms::collect;
pub use forms::{assemble_coupling, assemble_fluid, assemble_poro, beta_vector, CouplingBlocks, FluidBlocks, PoroBlocks};
pub use load::{assemble_load, assemble_load_with, fluid_potential, FluidLoadForm};
pub use penalty::{penalized_region, penalty_chi, PenaltyError, PenaltyField, PenaltyKind, PenaltySpec};
pub use sources::{FluidForcing, InterfaceFn, NormalVectorFn, ScalarFn, Sources, TensorFn, VectorFn};

use crate::linalg::{CsrMatrix, Triplets};
use crate::material::{MaterialError, MaterialModel};
use crate::space::{Block, Discretization};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("missing source component: {0}")]
    MissingSource(&'static str),
    #[error("block {name} has shape {got:?}, expected {expected:?}")]
    Dimension { name: String, got: (usize, usize), expected: (usize, usize) },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("material model has {got} cells, mesh has {expected}")]
    CellCount { got: usize, expected: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SystemBlocks {
    pub poro: PoroBlocks,
    pub fluid: FluidBlocks,
    pub coupling: CouplingBlocks,
    pub penalty: PenaltyField,
}

/// Assembled, time-independent matrices together with the per-block pieces.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub m: CsrMatrix,
    pub a: CsrMatrix,
    pub blocks: SystemBlocks,
}

pub fn assemble_blocks(d: &Discretization, mat: &MaterialModel, spec: &PenaltySpec) -> Result<SystemBlocks, AssemblyError> {
    if mat.cells.len() != d.mesh.n_cells() {
        return Err(AssemblyError::CellCount { got: mat.cells.len(), expected: d.mesh.n_cells() });
    }
    mat.validate()?;
    let penalty = PenaltyField::new(d, mat, spec);
    let poro = assemble_poro(d, mat, &penalty);
    let fluid = assemble_fluid(d, mat, &penalty);
    let coupling = assemble_coupling(d, mat);
    Ok(SystemBlocks { poro, fluid, coupling, penalty })
}

struct Placer<'a> {
    d: &'a Discretization,
    t: Triplets,
}

impl Placer<'_> {
    fn put(&mut self, name: &str, row: Block, col: Block, m: &CsrMatrix, s: f64) -> Result<(), AssemblyError> {
        let l = &self.d.space.layout;
        let expected = (l.block_len(row), l.block_len(col));
        if (m.nrows, m.ncols) != expected {
            return Err(AssemblyError::Dimension { name: name.to_string(), got: (m.nrows, m.ncols), expected });
        }
        let (r0, c0) = (l.range(row).start, l.range(col).start);
        for (i, j, v) in m.triplets() {
            self.t.push(r0 + i, c0 + j, s * v);
        }
        Ok(())
    }
}

/// Place the blocks into the global mass-like matrix M and stiffness-like matrix A.
pub fn build_global(d: &Discretization, b: &SystemBlocks) -> Result<(CsrMatrix, CsrMatrix), AssemblyError> {
    use Block::*;
    let n = d.ndof();
    let l = &d.space.layout;
    let id = CsrMatrix::identity(l.block_len(U));
    let (p, f, c) = (&b.poro, &b.fluid, &b.coupling);
    let nat = c.n_alpha.lin_comb(1.0, &c.t, 1.0);

    let mut m = Placer { d, t: Triplets::new(n, n) };
    m.put("I", U, U, &id, 1.0)?;
    m.put("I", W, W, &id, 1.0)?;
    m.put("M_rho", V, V, &p.m_rho, 1.0)?;
    m.put("M_rhof", V, Z, &p.m_rhof, 1.0)?;
    m.put("M_rhof", Z, V, &p.m_rhof, 1.0)?;
    m.put("M_rhow", Z, Z, &p.m_rhow, 1.0)?;
    m.put("(N_alpha+T)^T", V, S, &nat.transpose(), -1.0)?;
    m.put("N^T", Z, S, &c.n.transpose(), -1.0)?;
    m.put("M_f+D_f", S, S, &f.m_f.lin_comb(1.0, &f.d_f, 1.0), 1.0)?;
    m.put("B_f^T", R, S, &f.b_f.transpose(), 1.0)?;

    let mut a = Placer { d, t: Triplets::new(n, n) };
    a.put("-I", U, V, &id, -1.0)?;
    a.put("-I", W, Z, &id, -1.0)?;
    a.put("A_e+B_bb", V, U, &p.a_e.lin_comb(1.0, &p.b_bb, 1.0), 1.0)?;
    a.put("B_b", V, W, &p.b_b, 1.0)?;
    a.put("B_b^T", Z, U, &p.b_b.transpose(), 1.0)?;
    a.put("B_p", Z, W, &p.b_p, 1.0)?;
    a.put("D_eta+D_gamma", Z, Z, &p.d_eta.lin_comb(1.0, &p.d_gamma, 1.0), 1.0)?;
    a.put("N_alpha+T", S, V, &nat, 1.0)?;
    a.put("N", S, Z, &c.n, 1.0)?;
    a.put("A_f", S, S, &f.a_f, 1.0)?;
    a.put("B_f", S, R, &f.b_f, 1.0)?;
    Ok((m.t.to_csr(), a.t.to_csr()))
}

impl AssembledSystem {
    pub fn new(d: &Discretization, mat: &MaterialModel, spec: &PenaltySpec) -> Result<Self, AssemblyError> {
        let blocks = assemble_blocks(d, mat, spec)?;
        let (m, a) = build_global(d, &blocks)?;
        log::info!("assembled system: {} dofs, nnz(M) = {}, nnz(A) = {}", d.ndof(), m.nnz(), a.nnz());
        Ok(AssembledSystem { m, a, blocks })
    }

    pub fn load(&self, d: &Discretization, mat: &MaterialModel, src: &Sources, t: f64) -> Result<Vec<f64>, AssemblyError> {
        assemble_load(d, mat, &self.blocks.penalty, src, t)
    }

    pub fn named_blocks(&self) -> Vec<(&'static str, &CsrMatrix)> {
        let (p, f, c) = (&self.blocks.poro, &self.blocks.fluid, &self.blocks.coupling);
        vec![
            ("M", &self.m),
            ("A", &self.a),
            ("M_rho", &p.m_rho),
            ("M_rhof", &p.m_rhof),
            ("M_rhow", &p.m_rhow),
            ("D_eta", &p.d_eta),
            ("D_gamma", &p.d_gamma),
            ("A_e", &p.a_e),
            ("B_p", &p.b_p),
            ("B_bb", &p.b_bb),
            ("B_b", &p.b_b),
            ("M_f", &f.m_f),
            ("D_f", &f.d_f),
            ("A_f", &f.a_f),
            ("B_f", &f.b_f),
            ("N", &c.n),
            ("N_alpha", &c.n_alpha),
            ("T", &c.t),
        ]
    }

    /// Write every named block as `<dir>/<name>.coo`.
    pub fn dump(&self, dir: &Path) -> Result<(), AssemblyError> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in self.named_blocks() {
            let f = std::fs::File::create(dir.join(format!("{name}.coo")))?;
            m.write_coo(std::io::BufWriter::new(f))?;
        }
        Ok(())
    }
}
