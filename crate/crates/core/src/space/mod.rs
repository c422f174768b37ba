//! Discrete spaces: per-cell modal bases, block DoF layout and tabulated quadrature.

pub mod basis;
mod tab;
pub mod tensor;

use crate::mesh::{PolyMesh, Region};
use crate::quadrature::QuadratureError;
use std::ops::Range;
use thiserror::Error;

pub use basis::{scalar_dim, CellBasis};
pub use tab::{CellTab, Discretization, FaceSide, FaceTab};

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("polynomial degree must be at least 1 (got p_p = {0}, p_f = {1})")]
    Degree(usize, usize),
    #[error("cell {cell}: {source}")]
    Quadrature { cell: usize, source: QuadratureError },
    #[error("face {face}: {source}")]
    FaceQuadrature { face: usize, source: QuadratureError },
}

/// The six unknown blocks in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    U,
    W,
    V,
    Z,
    S,
    R,
}

impl Block {
    pub const ALL: [Block; 6] = [Block::U, Block::W, Block::V, Block::Z, Block::S, Block::R];

    pub fn name(self) -> &'static str {
        match self {
            Block::U => "U",
            Block::W => "W",
            Block::V => "V",
            Block::Z => "Z",
            Block::S => "S",
            Block::R => "R",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone)]
pub struct DofLayout {
    /// Start of each block, plus the total at index 6.
    pub offsets: [usize; 7],
    /// Position of a cell among the cells of its region.
    pub local: Vec<usize>,
    pub n_p: usize,
    pub n_f: usize,
    pub n_r: usize,
    pub n_pcells: usize,
    pub n_fcells: usize,
}

impl DofLayout {
    pub fn ndof(&self) -> usize {
        self.offsets[6]
    }

    pub fn range(&self, b: Block) -> Range<usize> {
        self.offsets[b.index()]..self.offsets[b.index() + 1]
    }

    pub fn block_len(&self, b: Block) -> usize {
        self.offsets[b.index() + 1] - self.offsets[b.index()]
    }

    /// Offset of component `comp` of a vector block on a p-cell, relative to the block start.
    #[inline]
    pub fn pvec(&self, cell: usize, comp: usize) -> usize {
        (self.local[cell] * 2 + comp) * self.n_p
    }

    /// Offset of tensor entry (i, j) of the S block on an f-cell, relative to the block start.
    #[inline]
    pub fn ften(&self, cell: usize, i: usize, j: usize) -> usize {
        (self.local[cell] * 4 + 2 * i + j) * self.n_f
    }

    #[inline]
    pub fn fr(&self, cell: usize) -> usize {
        self.local[cell] * self.n_r
    }
}

#[derive(Debug, Clone)]
pub struct DgSpace {
    pub degree_p: usize,
    pub degree_f: usize,
    pub bases: Vec<CellBasis>,
    pub layout: DofLayout,
}

impl DgSpace {
    pub fn degree_of(&self, region: Region) -> usize {
        match region {
            Region::Poro => self.degree_p,
            Region::Fluid => self.degree_f,
        }
    }
}

pub(crate) fn layout_for(mesh: &PolyMesh, degree_p: usize, degree_f: usize) -> DofLayout {
    let mut local = vec![0; mesh.n_cells()];
    let (mut np, mut nf) = (0, 0);
    for (i, c) in mesh.cells.iter().enumerate() {
        match c.region {
            Region::Poro => {
                local[i] = np;
                np += 1;
            }
            Region::Fluid => {
                local[i] = nf;
                nf += 1;
            }
        }
    }
    let (n_p, n_f, n_r) = (scalar_dim(degree_p), scalar_dim(degree_f), scalar_dim(degree_f - 1));
    let pv = 2 * n_p * np;
    let sizes = [pv, pv, pv, pv, 4 * n_f * nf, n_r * nf];
    let mut offsets = [0; 7];
    for k in 0..6 {
        offsets[k + 1] = offsets[k] + sizes[k];
    }
    DofLayout { offsets, local, n_p, n_f, n_r, n_pcells: np, n_fcells: nf }
}
