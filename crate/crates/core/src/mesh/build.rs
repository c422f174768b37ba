use super::interface::{InterfaceSegmentation, Trace};
use super::{Cell, EdgeTag, Face, FaceTag, MeshError, PolyMesh, Region};
use crate::geometry::{self, Point};
use std::collections::BTreeMap;

fn edge_normal(a: Point, b: Point) -> (Point, f64) {
    let d = geometry::sub(b, a);
    let len = geometry::norm(d);
    ([d[1] / len, -d[0] / len], len)
}

/// Validate cells, classify every edge and assemble the face list.
///
/// Edges shared by two cells of one region become interior faces, edges shared
/// across regions and untagged edges on a region boundary form the interface;
/// every other boundary edge needs an entry in `edge_tags`.
pub fn build_mesh(
    vertices: Vec<Point>,
    cells: Vec<(Vec<usize>, Option<Region>)>,
    edge_tags: BTreeMap<(usize, usize), EdgeTag>,
) -> Result<PolyMesh, MeshError> {
    let untagged: Vec<usize> = cells.iter().enumerate().filter(|(_, c)| c.1.is_none()).map(|(i, _)| i).collect();
    if !untagged.is_empty() {
        return Err(MeshError::UntaggedCells(untagged));
    }
    let mut out_cells = Vec::with_capacity(cells.len());
    for (ci, (verts, region)) in cells.into_iter().enumerate() {
        if verts.iter().any(|&v| v >= vertices.len()) {
            return Err(MeshError::VertexOutOfRange { cell: ci });
        }
        if verts.len() < 3 {
            return Err(MeshError::TooFewVertices { cell: ci });
        }
        let poly: Vec<Point> = verts.iter().map(|&v| vertices[v]).collect();
        if !geometry::is_simple(&poly) {
            return Err(MeshError::NotSimple { cell: ci });
        }
        let area = geometry::signed_area(&poly);
        if area <= 0.0 {
            return Err(MeshError::NotCounterClockwise { cell: ci });
        }
        let centroid = geometry::centroid(&poly);
        if !geometry::star_shaped_wrt(&poly, centroid, 1e-12) {
            return Err(MeshError::NotStarShaped { cell: ci });
        }
        out_cells.push(Cell { diameter: geometry::diameter(&poly), verts, region: region.unwrap(), area, centroid });
    }
    check_overlap(&vertices, &out_cells)?;

    let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (ci, c) in out_cells.iter().enumerate() {
        let n = c.verts.len();
        for l in 0..n {
            let (a, b) = (c.verts[l], c.verts[(l + 1) % n]);
            edges.entry((a.min(b), a.max(b))).or_default().push((ci, l));
        }
    }
    for key in edge_tags.keys() {
        if !edges.contains_key(key) {
            return Err(MeshError::DanglingTag(key.0, key.1));
        }
    }

    let mut faces = Vec::new();
    let mut p_traces = Vec::new();
    let mut f_traces = Vec::new();
    let local_edge = |ci: usize, l: usize| {
        let c: &Cell = &out_cells[ci];
        let n = c.verts.len();
        (vertices[c.verts[l]], vertices[c.verts[(l + 1) % n]])
    };
    for (&(va, vb), uses) in &edges {
        match uses.as_slice() {
            [(c0, l0), (c1, _)] => {
                if edge_tags.contains_key(&(va, vb)) {
                    return Err(MeshError::Unclassifiable {
                        a: va,
                        b: vb,
                        cell: *c0,
                        reason: "boundary tag on a shared edge".into(),
                    });
                }
                let (r0, r1) = (out_cells[*c0].region, out_cells[*c1].region);
                let (a, b) = local_edge(*c0, *l0);
                if r0 == r1 {
                    let (normal, length) = edge_normal(a, b);
                    let tag = if r0 == Region::Poro { FaceTag::InteriorP } else { FaceTag::InteriorF };
                    faces.push(Face { a, b, length, normal, cells: (*c0, Some(*c1)), tag });
                } else {
                    let (pc, fc) = if r0 == Region::Poro { (*c0, *c1) } else { (*c1, *c0) };
                    let (pa, pb) = if r0 == Region::Poro { (a, b) } else { (b, a) };
                    p_traces.push(Trace { cell: pc, a: pa, b: pb });
                    f_traces.push(Trace { cell: fc, a: pb, b: pa });
                }
            }
            [(c0, l0)] => {
                let region = out_cells[*c0].region;
                let (a, b) = local_edge(*c0, *l0);
                match edge_tags.get(&(va, vb)) {
                    Some(t) => {
                        if t.region.is_some_and(|r| r != region) {
                            return Err(MeshError::Unclassifiable {
                                a: va,
                                b: vb,
                                cell: *c0,
                                reason: "tag region differs from the cell region".into(),
                            });
                        }
                        let (normal, length) = edge_normal(a, b);
                        faces.push(Face { a, b, length, normal, cells: (*c0, None), tag: FaceTag::boundary(region, t.kind) });
                    }
                    None => {
                        let tr = Trace { cell: *c0, a, b };
                        if region == Region::Poro {
                            p_traces.push(tr)
                        } else {
                            f_traces.push(tr)
                        }
                    }
                }
            }
            _ => return Err(MeshError::NonManifoldEdge(va, vb)),
        }
    }

    let interface = if p_traces.is_empty() && f_traces.is_empty() {
        None
    } else if p_traces.is_empty() || f_traces.is_empty() {
        let t = p_traces.first().or(f_traces.first()).unwrap();
        let (a, b) = nearest_vertices(&vertices, &out_cells[t.cell], t.a, t.b);
        return Err(MeshError::Unclassifiable {
            a,
            b,
            cell: t.cell,
            reason: "untagged boundary edge and no opposite region".into(),
        });
    } else {
        Some(InterfaceSegmentation::from_traces(&p_traces, &f_traces)?)
    };
    if let Some(seg) = &interface {
        for s in &seg.segments {
            faces.push(Face {
                a: s.a,
                b: s.b,
                length: geometry::dist(s.a, s.b),
                normal: seg.n_p,
                cells: (s.p_cell, Some(s.f_cell)),
                tag: FaceTag::Interface,
            });
        }
    }
    let mut cell_faces = vec![Vec::new(); out_cells.len()];
    for (fi, f) in faces.iter().enumerate() {
        cell_faces[f.cells.0].push(fi);
        if let Some(c1) = f.cells.1 {
            cell_faces[c1].push(fi);
        }
    }
    Ok(PolyMesh { vertices, cells: out_cells, faces, cell_faces, edge_tags, interface })
}

fn nearest_vertices(vertices: &[Point], cell: &Cell, a: Point, b: Point) -> (usize, usize) {
    let find = |x: Point| *cell.verts.iter().find(|&&v| vertices[v] == x).unwrap_or(&cell.verts[0]);
    (find(a), find(b))
}

fn check_overlap(vertices: &[Point], cells: &[Cell]) -> Result<(), MeshError> {
    let boxes: Vec<(Point, Point)> = cells
        .iter()
        .map(|c| geometry::bounding_box(&c.verts.iter().map(|&v| vertices[v]).collect::<Vec<_>>()))
        .collect();
    // sweep along x over bounding boxes
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| boxes[i].0[0].total_cmp(&boxes[j].0[0]));
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].0[0] >= boxes[i].1[0] {
                break;
            }
            if boxes[j].0[1] >= boxes[i].1[1] || boxes[i].0[1] >= boxes[j].1[1] {
                continue;
            }
            let pi: Vec<Point> = cells[i].verts.iter().map(|&v| vertices[v]).collect();
            let pj: Vec<Point> = cells[j].verts.iter().map(|&v| vertices[v]).collect();
            if geometry::contains(&pj, cells[i].centroid) || geometry::contains(&pi, cells[j].centroid) {
                return Err(MeshError::Overlap(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryKind;

    fn tag(kind: BoundaryKind) -> EdgeTag {
        EdgeTag { kind, region: None }
    }

    fn two_cell() -> (Vec<Point>, Vec<(Vec<usize>, Option<Region>)>, BTreeMap<(usize, usize), EdgeTag>) {
        // poro (-1,0)x(0,1) and fluid (0,1)x(0,1) sharing vertices 1 and 4
        let v = vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [-1.0, 1.0]];
        let cells = vec![(vec![0, 1, 4, 5], Some(Region::Poro)), (vec![1, 2, 3, 4], Some(Region::Fluid))];
        let mut tags = BTreeMap::new();
        for e in [(0, 1), (0, 5), (4, 5)] {
            tags.insert(e, tag(BoundaryKind::Dirichlet));
        }
        for e in [(1, 2), (2, 3), (3, 4)] {
            tags.insert(e, tag(BoundaryKind::Neumann));
        }
        (v, cells, tags)
    }

    #[test]
    fn classifies_two_cell_mesh() {
        let (v, c, t) = two_cell();
        let m = build_mesh(v, c, t).unwrap();
        assert_eq!(m.faces.len(), 7);
        assert_eq!(m.count_tag(FaceTag::Interface), 1);
        assert_eq!(m.count_tag(FaceTag::DirichletP), 3);
        assert_eq!(m.count_tag(FaceTag::NeumannF), 3);
        let fi = m.faces_tagged(FaceTag::Interface).next().unwrap();
        let f = &m.faces[fi];
        assert_eq!(f.cells, (0, Some(1)));
        assert!((f.normal[0] - 1.0).abs() < 1e-15 && f.normal[1].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_vertex_index() {
        let (v, mut c, t) = two_cell();
        c[0].0[1] = 999;
        let e = build_mesh(v, c, t).unwrap_err();
        assert_eq!(e.to_string(), "cell 0: vertex index out of range");
    }

    #[test]
    fn lists_untagged_cells() {
        let (v, mut c, t) = two_cell();
        c[1].1 = None;
        assert_eq!(build_mesh(v, c, t).unwrap_err(), MeshError::UntaggedCells(vec![1]));
    }

    #[test]
    fn rejects_clockwise_cell() {
        let (v, mut c, t) = two_cell();
        c[0].0.reverse();
        assert_eq!(build_mesh(v, c, t).unwrap_err(), MeshError::NotCounterClockwise { cell: 0 });
    }

    #[test]
    fn untagged_outer_edge_without_partner_fails() {
        let (v, c, mut t) = two_cell();
        t.remove(&(2, 3));
        t.remove(&(0, 5));
        // both regions now have loose edges that are not collinear with each other
        assert!(build_mesh(v, c, t).is_err());
    }

    #[test]
    fn detects_overlap() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.25, 0.25], [1.25, 0.25], [1.25, 1.25], [0.25, 1.25]];
        let cells = vec![(vec![0, 1, 2, 3], Some(Region::Fluid)), (vec![4, 5, 6, 7], Some(Region::Fluid))];
        let mut t = BTreeMap::new();
        for e in [(0, 1), (1, 2), (2, 3), (0, 3), (4, 5), (5, 6), (6, 7), (4, 7)] {
            t.insert(e, tag(BoundaryKind::Dirichlet));
        }
        assert_eq!(build_mesh(v, cells, t).unwrap_err(), MeshError::Overlap(0, 1));
    }
}
