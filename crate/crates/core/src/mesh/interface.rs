//! Overlay of the p-side and f-side traces of a straight interface.

use super::{MeshError, PolyMesh, Region};
use crate::geometry::{self, Point};

pub const INTERFACE_TOL: f64 = 1e-10;

/// One edge of a cell lying on the interface, oriented counter-clockwise in that cell.
#[derive(Debug, Clone, Copy)]
pub struct Trace {
    pub cell: usize,
    pub a: Point,
    pub b: Point,
}

#[derive(Debug, Clone)]
pub struct InterfaceSegment {
    pub a: Point,
    pub b: Point,
    /// Arc coordinates of `a` and `b` along t_p, measured from the start of the interface.
    pub s: (f64, f64),
    pub p_cell: usize,
    pub f_cell: usize,
    /// Index into the p-side (resp. f-side) trace list.
    pub p_trace: usize,
    pub f_trace: usize,
}

#[derive(Debug, Clone)]
pub struct InterfaceSegmentation {
    pub n_p: Point,
    pub t_p: Point,
    pub origin: Point,
    pub length: f64,
    pub p_traces: Vec<Trace>,
    pub f_traces: Vec<Trace>,
    pub segments: Vec<InterfaceSegment>,
}

fn unit_normal(t: &Trace) -> Point {
    let d = geometry::sub(t.b, t.a);
    let l = geometry::norm(d);
    [d[1] / l, -d[0] / l]
}

struct Interval {
    lo: f64,
    hi: f64,
    plo: Point,
    phi: Point,
    idx: usize,
}

impl InterfaceSegmentation {
    pub fn from_traces(p_traces: &[Trace], f_traces: &[Trace]) -> Result<Self, MeshError> {
        if p_traces.is_empty() || f_traces.is_empty() {
            return Err(MeshError::Interface("one side of the interface has no faces".into()));
        }
        let n_p = unit_normal(&p_traces[0]);
        for t in p_traces {
            let n = unit_normal(t);
            if geometry::dist(n, n_p) > INTERFACE_TOL {
                return Err(MeshError::Interface(format!("p-face of cell {} is not aligned with a straight interface", t.cell)));
            }
        }
        for t in f_traces {
            let n = unit_normal(t);
            if geometry::dist(n, geometry::scale(n_p, -1.0)) > INTERFACE_TOL {
                return Err(MeshError::Interface(format!("f-face of cell {} is not aligned with a straight interface", t.cell)));
            }
        }
        let t_p = [n_p[1], -n_p[0]];
        let x0 = p_traces[0].a;
        let coord = |x: Point| -> Result<f64, MeshError> {
            let r = geometry::sub(x, x0);
            if geometry::dot(r, n_p).abs() > INTERFACE_TOL {
                return Err(MeshError::Interface("interface faces are not collinear".into()));
            }
            Ok(geometry::dot(r, t_p))
        };
        let intervals = |traces: &[Trace]| -> Result<Vec<Interval>, MeshError> {
            let mut v = Vec::with_capacity(traces.len());
            for (idx, t) in traces.iter().enumerate() {
                let (sa, sb) = (coord(t.a)?, coord(t.b)?);
                let (lo, hi, plo, phi) = if sa <= sb { (sa, sb, t.a, t.b) } else { (sb, sa, t.b, t.a) };
                v.push(Interval { lo, hi, plo, phi, idx });
            }
            v.sort_by(|x, y| x.lo.total_cmp(&y.lo));
            for w in v.windows(2) {
                if (w[1].lo - w[0].hi).abs() > INTERFACE_TOL {
                    return Err(MeshError::Interface(format!(
                        "gap or overlap in the interface trace at arc coordinate {}",
                        w[0].hi
                    )));
                }
            }
            Ok(v)
        };
        let pi = intervals(p_traces)?;
        let fi = intervals(f_traces)?;
        let (plo, phi) = (pi[0].lo, pi.last().unwrap().hi);
        let (flo, fhi) = (fi[0].lo, fi.last().unwrap().hi);
        if (plo - flo).abs() > INTERFACE_TOL || (phi - fhi).abs() > INTERFACE_TOL {
            return Err(MeshError::Interface(format!(
                "p-trace [{plo}, {phi}] and f-trace [{flo}, {fhi}] have different endpoints"
            )));
        }

        let mut breaks: Vec<(f64, Point)> = Vec::new();
        for iv in pi.iter().chain(fi.iter()) {
            breaks.push((iv.lo, iv.plo));
            breaks.push((iv.hi, iv.phi));
        }
        breaks.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, Point)> = Vec::new();
        for b in breaks {
            match merged.last() {
                Some(last) if b.0 - last.0 <= INTERFACE_TOL => {}
                _ => merged.push(b),
            }
        }
        let find = |ivs: &[Interval], s: f64| -> usize {
            let k = ivs.partition_point(|iv| iv.hi < s);
            ivs[k.min(ivs.len() - 1)].idx
        };
        let mut segments = Vec::with_capacity(merged.len());
        for w in merged.windows(2) {
            let mid = 0.5 * (w[0].0 + w[1].0);
            let p_trace = find(&pi, mid);
            let f_trace = find(&fi, mid);
            segments.push(InterfaceSegment {
                a: w[0].1,
                b: w[1].1,
                s: (w[0].0 - plo, w[1].0 - plo),
                p_cell: p_traces[p_trace].cell,
                f_cell: f_traces[f_trace].cell,
                p_trace,
                f_trace,
            });
        }
        Ok(InterfaceSegmentation {
            n_p,
            t_p,
            origin: merged[0].1,
            length: merged.last().unwrap().0 - merged[0].0,
            p_traces: p_traces.to_vec(),
            f_traces: f_traces.to_vec(),
            segments,
        })
    }
}

/// Recompute the interface overlay from the cell loops of `mesh`.
pub fn build_interface_segmentation(mesh: &PolyMesh) -> Result<InterfaceSegmentation, MeshError> {
    match &mesh.interface {
        None => Err(MeshError::Interface("mesh has no interface faces".into())),
        Some(seg) => {
            let fresh = InterfaceSegmentation::from_traces(&seg.p_traces, &seg.f_traces)?;
            debug_assert!(mesh.cells[fresh.segments[0].p_cell].region == Region::Poro);
            Ok(fresh)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // interface on x = 0 with the p side on the left: p edges run upward, f edges downward
    fn p_split(ys: &[f64]) -> Vec<Trace> {
        ys.windows(2).enumerate().map(|(i, w)| Trace { cell: i, a: [0.0, w[0]], b: [0.0, w[1]] }).collect()
    }

    fn f_split(ys: &[f64]) -> Vec<Trace> {
        ys.windows(2).enumerate().map(|(i, w)| Trace { cell: 100 + i, a: [0.0, w[1]], b: [0.0, w[0]] }).collect()
    }

    #[test]
    fn matching_single_faces() {
        let s = InterfaceSegmentation::from_traces(&p_split(&[0.0, 1.0]), &f_split(&[0.0, 1.0])).unwrap();
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.n_p, [1.0, 0.0]);
        assert_eq!(s.t_p, [0.0, -1.0]);
        assert!((s.length - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlay_of_nonmatching_splits() {
        let s = InterfaceSegmentation::from_traces(&p_split(&[0.0, 0.5, 1.0]), &f_split(&[0.0, 0.3, 1.0])).unwrap();
        let mut ys: Vec<(f64, f64)> =
            s.segments.iter().map(|g| (g.a[1].min(g.b[1]), g.a[1].max(g.b[1]))).collect();
        ys.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(ys, vec![(0.0, 0.3), (0.3, 0.5), (0.5, 1.0)]);
        let total: f64 = s.segments.iter().map(|g| g.s.1 - g.s.0).sum();
        assert!((total - s.length).abs() < 1e-12);
        for g in &s.segments {
            let mid = 0.5 * (g.a[1] + g.b[1]);
            let pt = &s.p_traces[g.p_trace];
            let ft = &s.f_traces[g.f_trace];
            assert!(mid > pt.a[1].min(pt.b[1]) && mid < pt.a[1].max(pt.b[1]));
            assert!(mid > ft.a[1].min(ft.b[1]) && mid < ft.a[1].max(ft.b[1]));
        }
    }

    #[test]
    fn mismatched_endpoints_fail() {
        let e = InterfaceSegmentation::from_traces(&p_split(&[0.0, 1.0]), &f_split(&[0.0, 0.9])).unwrap_err();
        assert!(matches!(e, MeshError::Interface(_)));
    }
}
