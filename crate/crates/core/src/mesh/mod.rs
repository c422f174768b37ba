//! Two-region polygonal meshes: storage, validation, face classification.

mod build;
pub mod generate;
pub mod interface;
pub mod io;
pub mod regularity;
mod voronoi;

use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub use generate::{generate_cartesian, generate_triangulated, generate_voronoi, refine_polygonal, RegionBox, SideKind};
pub use interface::{build_interface_segmentation, InterfaceSegment, InterfaceSegmentation};
pub use io::{load_mesh, save_mesh, MeshFile};
pub use regularity::{regularity_report, RegularityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "p")]
    Poro,
    #[serde(rename = "f")]
    Fluid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceTag {
    InteriorP,
    InteriorF,
    Interface,
    DirichletP,
    NeumannP,
    DirichletF,
    NeumannF,
}

impl FaceTag {
    pub fn name(self) -> &'static str {
        match self {
            FaceTag::InteriorP => "interior_p",
            FaceTag::InteriorF => "interior_f",
            FaceTag::Interface => "interface",
            FaceTag::DirichletP => "dirichlet_p",
            FaceTag::NeumannP => "neumann_p",
            FaceTag::DirichletF => "dirichlet_f",
            FaceTag::NeumannF => "neumann_f",
        }
    }

    pub fn boundary(region: Region, kind: BoundaryKind) -> FaceTag {
        match (region, kind) {
            (Region::Poro, BoundaryKind::Dirichlet) => FaceTag::DirichletP,
            (Region::Poro, BoundaryKind::Neumann) => FaceTag::NeumannP,
            (Region::Fluid, BoundaryKind::Dirichlet) => FaceTag::DirichletF,
            (Region::Fluid, BoundaryKind::Neumann) => FaceTag::NeumannF,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, FaceTag::DirichletP | FaceTag::NeumannP | FaceTag::DirichletF | FaceTag::NeumannF)
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub verts: Vec<usize>,
    pub region: Region,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Face {
    pub a: Point,
    pub b: Point,
    pub length: f64,
    /// Unit normal pointing out of `cells.0` (for interface faces: out of the p-cell).
    pub normal: Point,
    pub cells: (usize, Option<usize>),
    pub tag: FaceTag,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("cell {cell}: vertex index out of range")]
    VertexOutOfRange { cell: usize },
    #[error("cell {cell}: fewer than 3 vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell}: polygon is self-intersecting")]
    NotSimple { cell: usize },
    #[error("cell {cell}: non-positive signed area (vertex loops must be counter-clockwise)")]
    NotCounterClockwise { cell: usize },
    #[error("cell {cell}: not star-shaped with respect to its centroid")]
    NotStarShaped { cell: usize },
    #[error("cells without region tag: {0:?}")]
    UntaggedCells(Vec<usize>),
    #[error("edge ({0}, {1}) is shared by more than two cells")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({a}, {b}) of cell {cell}: unclassifiable boundary face ({reason})")]
    Unclassifiable { a: usize, b: usize, cell: usize, reason: String },
    #[error("boundary tag on edge ({0}, {1}) does not match any cell edge")]
    DanglingTag(usize, usize),
    #[error("unknown boundary tag '{0}'")]
    UnknownTag(String),
    #[error("cells {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("interface: {0}")]
    Interface(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

/// Boundary tag attached to an undirected edge; `region` is optional and checked
/// against the adjacent cell when given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeTag {
    pub kind: BoundaryKind,
    pub region: Option<Region>,
}

#[derive(Debug, Clone)]
pub struct PolyMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub cell_faces: Vec<Vec<usize>>,
    pub edge_tags: BTreeMap<(usize, usize), EdgeTag>,
    pub interface: Option<InterfaceSegmentation>,
}

impl PolyMesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].verts.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cells_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(move |(_, c)| c.region == region).map(|(i, _)| i)
    }

    pub fn faces_tagged(&self, tag: FaceTag) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().enumerate().filter(move |(_, f)| f.tag == tag).map(|(i, _)| i)
    }

    pub fn region_area(&self, region: Region) -> f64 {
        self.cells.iter().filter(|c| c.region == region).map(|c| c.area).sum()
    }

    pub fn max_diameter(&self, region: Option<Region>) -> f64 {
        self.cells
            .iter()
            .filter(|c| region.is_none_or(|r| c.region == r))
            .map(|c| c.diameter)
            .fold(0.0, f64::max)
    }

    pub fn count_tag(&self, tag: FaceTag) -> usize {
        self.faces_tagged(tag).count()
    }
}

pub use build::build_mesh;
