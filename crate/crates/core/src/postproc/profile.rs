//! Interface flux profiles, line samplers and a pore-pressure oscillation metric.

use super::{FieldSnapshot, PointFields, PostError};
use crate::geometry::{self, Point};
use crate::material::MaterialModel;
use crate::mesh::{FaceTag, Region};
use crate::space::Discretization;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub y: f64,
    /// (αu̇_p + ẇ_p)·n_p
    pub flux_p: f64,
    /// u_f·n_p
    pub flux_f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterfaceProfile {
    pub rows: Vec<ProfileRow>,
    /// ‖(αu̇_p + ẇ_p)·n_p − u_f·n_p‖ in L²(Γ_I)
    pub mismatch_l2: f64,
}

impl InterfaceProfile {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x,y,flux_p,flux_f")?;
        for r in &self.rows {
            writeln!(w, "{:.10e},{:.10e},{:.10e},{:.10e}", r.x, r.y, r.flux_p, r.flux_f)?;
        }
        Ok(())
    }
}

/// Normal fluxes from both sides at the interface quadrature points.
pub fn interface_profile(d: &Discretization, mat: &MaterialModel, snap: &FieldSnapshot) -> InterfaceProfile {
    let alpha = mat.interface.alpha;
    let mut rows = Vec::new();
    let mut sq = 0.0;
    for f in d.mesh.faces_tagged(FaceTag::Interface) {
        let n = d.mesh.faces[f].normal;
        let ft = &d.faces[f];
        let (cp, cf) = (ft.sides[0].cell, ft.sides[1].cell);
        for (q, &x) in ft.points.iter().enumerate() {
            let p = snap.eval(d, cp, x);
            let fl = snap.eval(d, cf, x);
            let (ud, wd, uf) = (p.u_dot.unwrap_or_default(), p.w_dot.unwrap_or_default(), fl.u_f.unwrap_or_default());
            let flux_p = (alpha * ud[0] + wd[0]) * n[0] + (alpha * ud[1] + wd[1]) * n[1];
            let flux_f = uf[0] * n[0] + uf[1] * n[1];
            sq += ft.weights[q] * (flux_p - flux_f).powi(2);
            rows.push(ProfileRow { x: x[0], y: x[1], flux_p, flux_f });
        }
    }
    let (xs, ys) = rows.iter().fold(((f64::MAX, f64::MIN), (f64::MAX, f64::MIN)), |(a, b), r| {
        ((a.0.min(r.x), a.1.max(r.x)), (b.0.min(r.y), b.1.max(r.y)))
    });
    let along_x = xs.1 - xs.0 >= ys.1 - ys.0;
    rows.sort_by(|a, b| if along_x { a.x.total_cmp(&b.x) } else { a.y.total_cmp(&b.y) });
    InterfaceProfile { rows, mismatch_l2: sq.sqrt() }
}

#[derive(Debug, Clone, Copy)]
pub struct LineSample {
    pub s: f64,
    pub x: Point,
    pub cell: Option<usize>,
    pub fields: PointFields,
}

/// n ≥ 2 equispaced samples on the segment a-b; points outside the mesh have no cell.
pub fn sample_line(d: &Discretization, snap: &FieldSnapshot, a: Point, b: Point, n: usize) -> Vec<LineSample> {
    let n = n.max(2);
    let polys: Vec<Vec<Point>> = (0..d.mesh.n_cells()).map(|c| d.mesh.cell_points(c)).collect();
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let x = geometry::lerp(a, b, s);
            let cell = polys.iter().position(|p| geometry::contains(p, x));
            let fields = cell.map(|c| snap.eval(d, c, x)).unwrap_or_default();
            LineSample { s, x, cell, fields }
        })
        .collect()
}

pub fn write_line_csv(samples: &[LineSample], mut w: impl Write) -> Result<(), PostError> {
    let io = |source| PostError::Io { path: "line profile".into(), source };
    writeln!(w, "s,x,y,cell,u_p_x,u_p_y,u_p_rate_x,u_p_rate_y,w_p_rate_x,w_p_rate_y,p_p,u_f_x,u_f_y,p_f").map_err(io)?;
    let o = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
    for s in samples {
        let f = &s.fields;
        let c = |v: Option<[f64; 2]>, k: usize| o(v.map(|a| a[k]));
        writeln!(
            w,
            "{:.10e},{:.10e},{:.10e},{},{},{},{},{},{},{},{},{},{},{}",
            s.s,
            s.x[0],
            s.x[1],
            s.cell.map(|c| c.to_string()).unwrap_or_default(),
            c(f.u, 0),
            c(f.u, 1),
            c(f.u_dot, 0),
            c(f.u_dot, 1),
            c(f.w_dot, 0),
            c(f.w_dot, 1),
            o(f.p_p),
            c(f.u_f, 0),
            c(f.u_f, 1),
            o(f.p_f)
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Pore-pressure boundedness and neighbour-jump statistics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillationReport {
    /// max − min of the p-cell averages
    pub range: f64,
    /// max |p_p| over cell quadrature points
    pub max_abs: f64,
    /// max |p_p⁺ − p_p⁻| over interior p-face quadrature points
    pub max_face_jump: f64,
    pub all_finite: bool,
}

impl OscillationReport {
    pub fn checkerboard_free(&self, factor: f64) -> bool {
        self.all_finite && self.max_face_jump <= factor * self.range
    }
}

pub fn pressure_oscillation(d: &Discretization, snap: &FieldSnapshot) -> OscillationReport {
    let mut all_finite = true;
    let (mut lo, mut hi, mut max_abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for c in d.mesh.cells_in(Region::Poro) {
        let m = snap.cell_mean(d, c).p_p.unwrap_or(0.0);
        all_finite &= m.is_finite();
        lo = lo.min(m);
        hi = hi.max(m);
        for &x in &d.cells[c].points {
            let v = snap.eval(d, c, x).p_p.unwrap_or(0.0);
            all_finite &= v.is_finite();
            max_abs = max_abs.max(v.abs());
        }
    }
    let mut jump = 0.0f64;
    for f in d.mesh.faces_tagged(FaceTag::InteriorP) {
        let ft = &d.faces[f];
        for &x in &ft.points {
            let a = snap.eval(d, ft.sides[0].cell, x).p_p.unwrap_or(0.0);
            let b = snap.eval(d, ft.sides[1].cell, x).p_p.unwrap_or(0.0);
            jump = jump.max((a - b).abs());
        }
    }
    OscillationReport { range: if hi >= lo { hi - lo } else { 0.0 }, max_abs, max_face_jump: jump, all_finite }
}
