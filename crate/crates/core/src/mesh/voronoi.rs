use super::{Region, RegionBox};
use crate::geometry::{self, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cell_of(i: usize, seeds: &[Point], order: &mut Vec<usize>, bx: &RegionBox) -> Vec<Point> {
    let s = seeds[i];
    order.clear();
    order.extend((0..seeds.len()).filter(|&j| j != i));
    order.sort_by(|&a, &b| geometry::dist(seeds[a], s).total_cmp(&geometry::dist(seeds[b], s)));
    let mut poly = bx.corners();
    for &j in order.iter() {
        let d = geometry::dist(seeds[j], s);
        let reach = poly.iter().map(|&p| geometry::dist(p, s)).fold(0.0, f64::max);
        if 0.5 * d > reach {
            break;
        }
        let m = geometry::scale(geometry::add(s, seeds[j]), 0.5);
        poly = geometry::clip_halfplane(&poly, m, geometry::sub(seeds[j], s));
    }
    poly
}

/// Voronoi cells of `n_seeds` random seeds per box after `lloyd_iters` centroid updates.
pub(crate) fn relaxed_cells(boxes: &[RegionBox], n_seeds: usize, lloyd_iters: usize, rng_seed: u64) -> Vec<(Vec<Point>, Region)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::new();
    let mut order = Vec::new();
    for bx in boxes {
        let mut seeds: Vec<Point> = (0..n_seeds)
            .map(|_| [bx.lo[0] + bx.width() * rng.random::<f64>(), bx.lo[1] + bx.height() * rng.random::<f64>()])
            .collect();
        for _ in 0..lloyd_iters {
            seeds = (0..seeds.len()).map(|i| geometry::centroid(&cell_of(i, &seeds, &mut order, bx))).collect();
        }
        for i in 0..seeds.len() {
            out.push((cell_of(i, &seeds, &mut order, bx), bx.region));
        }
    }
    out
}
