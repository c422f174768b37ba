//! Shape diagnostics: fan-simplex ratios, neighbor size ratios, heuristic aspect metrics.

use super::{FaceTag, PolyMesh};
use crate::geometry::{self, Point};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// Per cell: max over faces of h_K |F| / (2 |S_K^F|), S_K^F the centroid fan triangle.
    pub cell_ratio: Vec<f64>,
    pub max_cell_ratio: f64,
    /// Largest h_K+/h_K- over faces joining two cells of the same region.
    pub max_neighbor_ratio: f64,
    /// Largest h_K^2 / |K|.
    pub max_aspect: f64,
    /// Largest h_K / (shortest edge of K).
    pub max_edge_ratio: f64,
    pub n_cells: usize,
    pub n_faces: usize,
}

pub fn cell_fan_ratio(poly: &[Point], center: Point) -> f64 {
    let h = geometry::diameter(poly);
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let s = 0.5 * geometry::cross(geometry::sub(a, center), geometry::sub(b, center));
            h * geometry::dist(a, b) / (2.0 * s)
        })
        .fold(0.0, f64::max)
}

pub fn regularity_report(mesh: &PolyMesh) -> RegularityReport {
    let mut cell_ratio = Vec::with_capacity(mesh.n_cells());
    let mut max_aspect: f64 = 0.0;
    let mut max_edge_ratio: f64 = 0.0;
    for (ci, c) in mesh.cells.iter().enumerate() {
        let poly = mesh.cell_points(ci);
        cell_ratio.push(cell_fan_ratio(&poly, c.centroid));
        max_aspect = max_aspect.max(c.diameter * c.diameter / c.area);
        let n = poly.len();
        let shortest = (0..n).map(|i| geometry::dist(poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min);
        max_edge_ratio = max_edge_ratio.max(c.diameter / shortest);
    }
    let max_neighbor_ratio = mesh
        .faces
        .iter()
        .filter(|f| matches!(f.tag, FaceTag::InteriorP | FaceTag::InteriorF))
        .map(|f| {
            let (a, b) = (mesh.cells[f.cells.0].diameter, mesh.cells[f.cells.1.unwrap()].diameter);
            a.max(b) / a.min(b)
        })
        .fold(1.0, f64::max);
    RegularityReport {
        max_cell_ratio: cell_ratio.iter().cloned().fold(0.0, f64::max),
        cell_ratio,
        max_neighbor_ratio,
        max_aspect,
        max_edge_ratio,
        n_cells: mesh.n_cells(),
        n_faces: mesh.faces.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoundaryKind, EdgeTag, Region};
    use std::collections::BTreeMap;

    #[test]
    fn unit_square_ratio() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let r = cell_fan_ratio(&sq, [0.5, 0.5]);
        assert!((r - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn equilateral_faces_agree() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
        let c = geometry::centroid(&tri);
        let h = geometry::diameter(&tri);
        let ratios: Vec<f64> = (0..3)
            .map(|i| {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let s = 0.5 * geometry::cross(geometry::sub(a, c), geometry::sub(b, c));
                h * geometry::dist(a, b) / (2.0 * s)
            })
            .collect();
        assert!((ratios[0] - ratios[1]).abs() < 1e-13 && (ratios[1] - ratios[2]).abs() < 1e-13);
    }

    #[test]
    fn neighbor_ratio_ten() {
        // unit square (h = sqrt 2) next to a long triangle with h = 10 sqrt 2
        let a = (200.0f64 - 0.25).sqrt();
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0 + a, 0.5]];
        let cells = vec![(vec![0, 1, 2, 3], Some(Region::Fluid)), (vec![1, 4, 2], Some(Region::Fluid))];
        let mut tags = BTreeMap::new();
        for e in [(0, 1), (2, 3), (0, 3), (1, 4), (2, 4)] {
            tags.insert(e, EdgeTag { kind: BoundaryKind::Dirichlet, region: None });
        }
        let m = build_mesh(v, cells, tags).unwrap();
        let rep = regularity_report(&m);
        assert!((rep.max_neighbor_ratio - 10.0).abs() < 1e-12);
    }
}
