//! JSON mesh files.

use super::{build_mesh, BoundaryKind, EdgeTag, FaceTag, MeshError, PolyMesh, Region};
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellEntry {
    pub verts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagEntry {
    pub edge: [usize; 2],
    pub tag: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<Point>,
    pub cells: Vec<CellEntry>,
    #[serde(default)]
    pub boundary_tags: Vec<TagEntry>,
}

fn parse_tag(s: &str) -> Result<Option<EdgeTag>, MeshError> {
    let (kind, region) = match s {
        "dirichlet_p" => (BoundaryKind::Dirichlet, Some(Region::Poro)),
        "neumann_p" => (BoundaryKind::Neumann, Some(Region::Poro)),
        "dirichlet_f" => (BoundaryKind::Dirichlet, Some(Region::Fluid)),
        "neumann_f" => (BoundaryKind::Neumann, Some(Region::Fluid)),
        "dirichlet" => (BoundaryKind::Dirichlet, None),
        "neumann" => (BoundaryKind::Neumann, None),
        "interface" => return Ok(None),
        other => return Err(MeshError::UnknownTag(other.to_string())),
    };
    Ok(Some(EdgeTag { kind, region }))
}

impl MeshFile {
    pub fn from_mesh(mesh: &PolyMesh) -> MeshFile {
        let mut boundary_tags = Vec::new();
        for f in &mesh.faces {
            if !f.tag.is_boundary() {
                continue;
            }
            let c = &mesh.cells[f.cells.0];
            let n = c.verts.len();
            let l = (0..n)
                .find(|&l| mesh.vertices[c.verts[l]] == f.a && mesh.vertices[c.verts[(l + 1) % n]] == f.b)
                .expect("boundary face matches a cell edge");
            boundary_tags.push(TagEntry { edge: [c.verts[l], c.verts[(l + 1) % n]], tag: f.tag.name().to_string() });
        }
        MeshFile {
            vertices: mesh.vertices.clone(),
            cells: mesh.cells.iter().map(|c| CellEntry { verts: c.verts.clone(), region: Some(c.region) }).collect(),
            boundary_tags,
        }
    }

    pub fn into_mesh(self) -> Result<PolyMesh, MeshError> {
        let nv = self.vertices.len();
        for (ci, c) in self.cells.iter().enumerate() {
            if c.verts.iter().any(|&v| v >= nv) {
                return Err(MeshError::VertexOutOfRange { cell: ci });
            }
        }
        let mut tags = BTreeMap::new();
        for t in &self.boundary_tags {
            if let Some(tag) = parse_tag(&t.tag)? {
                let [a, b] = t.edge;
                tags.insert((a.min(b), a.max(b)), tag);
            }
        }
        build_mesh(self.vertices, self.cells.into_iter().map(|c| (c.verts, c.region)).collect(), tags)
    }
}

pub fn mesh_from_json(text: &str) -> Result<PolyMesh, MeshError> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| MeshError::Parse(e.to_string()))?;
    file.into_mesh()
}

pub fn mesh_to_json(mesh: &PolyMesh) -> String {
    serde_json::to_string_pretty(&MeshFile::from_mesh(mesh)).expect("mesh serializes")
}

pub fn load_mesh(path: &Path) -> Result<PolyMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    mesh_from_json(&text)
}

pub fn save_mesh(mesh: &PolyMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, mesh_to_json(mesh)).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}

/// Face tags in a canonical order, for comparing two classifications.
pub fn tag_signature(mesh: &PolyMesh) -> Vec<(FaceTag, usize, Option<usize>)> {
    let mut v: Vec<_> = mesh.faces.iter().map(|f| (f.tag, f.cells.0, f.cells.1)).collect();
    v.sort();
    v
}
