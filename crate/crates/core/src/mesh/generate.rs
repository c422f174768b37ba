//! Structured and Voronoi generators on one or two abutting axis-aligned boxes.

use super::{build_mesh, voronoi, BoundaryKind, EdgeTag, MeshError, PolyMesh, Region};
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideKind {
    Dirichlet,
    Neumann,
    Interface,
}

/// Axis-aligned box of one region with side kinds ordered left, right, bottom, top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub region: Region,
    pub lo: Point,
    pub hi: Point,
    pub sides: [SideKind; 4],
}

impl RegionBox {
    pub fn width(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn height(&self) -> f64 {
        self.hi[1] - self.lo[1]
    }

    /// Manufactured-solution geometry: p in (-1,0)x(0,1), f in (0,1)x(0,1), interface x = 0.
    pub fn manufactured_pair() -> Vec<RegionBox> {
        use SideKind::*;
        vec![
            RegionBox { region: Region::Poro, lo: [-1.0, 0.0], hi: [0.0, 1.0], sides: [Dirichlet, Interface, Dirichlet, Neumann] },
            RegionBox { region: Region::Fluid, lo: [0.0, 0.0], hi: [1.0, 1.0], sides: [Interface, Neumann, Dirichlet, Dirichlet] },
        ]
    }

    /// Driven-flow geometry: f in (0,2)x(0,1) above p in (0,2)x(-1,0).
    pub fn channel_pair() -> Vec<RegionBox> {
        use SideKind::*;
        vec![
            RegionBox { region: Region::Poro, lo: [0.0, -1.0], hi: [2.0, 0.0], sides: [Dirichlet, Dirichlet, Neumann, Interface] },
            RegionBox { region: Region::Fluid, lo: [0.0, 0.0], hi: [2.0, 1.0], sides: [Dirichlet, Neumann, Interface, Dirichlet] },
        ]
    }

    pub fn unit(region: Region, kind: SideKind) -> RegionBox {
        RegionBox { region, lo: [0.0, 0.0], hi: [1.0, 1.0], sides: [kind; 4] }
    }

    pub(crate) fn corners(&self) -> Vec<Point> {
        vec![self.lo, [self.hi[0], self.lo[1]], self.hi, [self.lo[0], self.hi[1]]]
    }

    /// Index of the box side containing the segment, if any.
    fn side_of(&self, a: Point, b: Point, tol: f64) -> Option<usize> {
        let on = |p: Point, d: usize, v: f64| (p[d] - v).abs() <= tol;
        let within = |p: Point| {
            p[0] >= self.lo[0] - tol && p[0] <= self.hi[0] + tol && p[1] >= self.lo[1] - tol && p[1] <= self.hi[1] + tol
        };
        if !within(a) || !within(b) {
            return None;
        }
        [(0, self.lo[0]), (0, self.hi[0]), (1, self.lo[1]), (1, self.hi[1])]
            .iter()
            .position(|&(d, v)| on(a, d, v) && on(b, d, v))
    }
}

fn check_boxes(boxes: &[RegionBox]) -> Result<Option<(usize, usize)>, MeshError> {
    for b in boxes {
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(MeshError::Geometry("empty region box".into()));
        }
    }
    match boxes {
        [_] => Ok(None),
        [p, f] => {
            if p.region == f.region {
                return Err(MeshError::Geometry("the two boxes must belong to different regions".into()));
            }
            let tol = 1e-12 * (p.width() + p.height() + f.width() + f.height());
            let eq = |x: f64, y: f64| (x - y).abs() <= tol;
            let same_y = eq(p.lo[1], f.lo[1]) && eq(p.hi[1], f.hi[1]);
            let same_x = eq(p.lo[0], f.lo[0]) && eq(p.hi[0], f.hi[0]);
            let shared = if same_y && eq(p.hi[0], f.lo[0]) {
                (1, 0)
            } else if same_y && eq(f.hi[0], p.lo[0]) {
                (0, 1)
            } else if same_x && eq(p.hi[1], f.lo[1]) {
                (3, 2)
            } else if same_x && eq(f.hi[1], p.lo[1]) {
                (2, 3)
            } else {
                return Err(MeshError::Geometry("boxes do not share a full side".into()));
            };
            Ok(Some(shared))
        }
        _ => Err(MeshError::Geometry(format!("expected one or two region boxes, got {}", boxes.len()))),
    }
}

struct VertexPool {
    tol: f64,
    points: Vec<Point>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool { tol, points: Vec::new(), grid: HashMap::new() }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        let h = 4.0 * self.tol;
        ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        let q = self.points[i];
                        if (q[0] - p[0]).abs() <= self.tol && (q[1] - p[1]).abs() <= self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        self.points.push(p);
        let i = self.points.len() - 1;
        self.grid.entry((kx, ky)).or_default().push(i);
        i
    }
}

/// Turn polygon loops into a classified mesh, merging coincident vertices and
/// tagging outer edges from the box side kinds.
pub(crate) fn assemble(polys: Vec<(Vec<Point>, Region)>, boxes: &[RegionBox]) -> Result<PolyMesh, MeshError> {
    let shared = check_boxes(boxes)?;
    let scale = boxes.iter().map(|b| b.width() + b.height()).fold(0.0, f64::max);
    let tol = 1e-10 * scale;
    let mut pool = VertexPool::new(tol);
    let mut cells = Vec::with_capacity(polys.len());
    for (poly, region) in &polys {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let i = pool.insert(p);
            if ids.last() != Some(&i) {
                ids.push(i);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        cells.push((ids, Some(*region)));
    }
    let mut uses: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (ids, _) in &cells {
        for k in 0..ids.len() {
            let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut tags = BTreeMap::new();
    for (ids, region) in &cells {
        let bx = boxes.iter().position(|b| Some(b.region) == *region).unwrap();
        for k in 0..ids.len() {
            let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
            let key = (a.min(b), a.max(b));
            if uses[&key] != 1 {
                continue;
            }
            let side = boxes[bx]
                .side_of(pool.points[a], pool.points[b], tol)
                .ok_or_else(|| MeshError::Geometry(format!("edge ({a}, {b}) is not on the box boundary")))?;
            let on_shared = shared.is_some_and(|(sp, sf)| side == if bx == 0 { sp } else { sf });
            let kind = match boxes[bx].sides[side] {
                _ if on_shared => continue,
                SideKind::Interface => continue,
                SideKind::Dirichlet => BoundaryKind::Dirichlet,
                SideKind::Neumann => BoundaryKind::Neumann,
            };
            tags.insert(key, EdgeTag { kind, region: *region });
        }
    }
    build_mesh(pool.points, cells, tags)
}

fn grid_points(b: &RegionBox, nx: usize, ny: usize) -> impl Fn(usize, usize) -> Point + '_ {
    move |i, j| {
        [
            if i == nx { b.hi[0] } else { b.lo[0] + b.width() * i as f64 / nx as f64 },
            if j == ny { b.hi[1] } else { b.lo[1] + b.height() * j as f64 / ny as f64 },
        ]
    }
}

/// nx-by-ny quadrilaterals in every box.
pub fn generate_cartesian(boxes: &[RegionBox], nx: usize, ny: usize) -> Result<PolyMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Geometry("nx and ny must be positive".into()));
    }
    let mut polys = Vec::new();
    for b in boxes {
        let g = grid_points(b, nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                polys.push((vec![g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)], b.region));
            }
        }
    }
    assemble(polys, boxes)
}

/// Cartesian grid with every square split along its diagonal.
pub fn generate_triangulated(boxes: &[RegionBox], nx: usize, ny: usize) -> Result<PolyMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Geometry("nx and ny must be positive".into()));
    }
    let mut polys = Vec::new();
    for b in boxes {
        let g = grid_points(b, nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                polys.push((vec![g(i, j), g(i + 1, j), g(i + 1, j + 1)], b.region));
                polys.push((vec![g(i, j), g(i + 1, j + 1), g(i, j + 1)], b.region));
            }
        }
    }
    assemble(polys, boxes)
}

/// Lloyd-relaxed clipped Voronoi tessellation with `n_seeds` cells per box.
pub fn generate_voronoi(boxes: &[RegionBox], n_seeds: usize, lloyd_iters: usize, rng_seed: u64) -> Result<PolyMesh, MeshError> {
    if n_seeds == 0 {
        return Err(MeshError::Geometry("at least one seed per region is required".into()));
    }
    check_boxes(boxes)?;
    let polys = voronoi::relaxed_cells(boxes, n_seeds, lloyd_iters, rng_seed);
    assemble(polys, boxes)
}

/// Nested refinement: every cell is split into quadrilaterals joining its
/// vertex centroid to the edge midpoints. Tags are recomputed from `boxes`.
pub fn refine_polygonal(mesh: &PolyMesh, boxes: &[RegionBox]) -> Result<PolyMesh, MeshError> {
    check_boxes(boxes)?;
    let mut polys = Vec::new();
    for (c, cell) in mesh.cells.iter().enumerate() {
        let pts = mesh.cell_points(c);
        let n = pts.len();
        let ctr = pts.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / n as f64, a[1] + p[1] / n as f64]);
        let mid = |i: usize| {
            let (a, b) = (pts[i % n], pts[(i + 1) % n]);
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
        };
        for i in 0..n {
            polys.push((vec![ctr, mid(i + n - 1), pts[i], mid(i)], cell.region));
        }
    }
    assemble(polys, boxes)
}
