//! Recovery of fluid velocity/pressure and pore pressure, plus exporters.

mod profile;
mod vtk;

pub use profile::{interface_profile, pressure_oscillation, sample_line, write_line_csv, InterfaceProfile, LineSample, OscillationReport, ProfileRow};
pub use vtk::export_vtk;

use crate::analysis::norms::{eval_ften, eval_pvec};
use crate::analysis::ExactSolution;
use crate::assembly::{fluid_potential, Sources};
use crate::geometry::Point;
use crate::material::MaterialModel;
use crate::mesh::Region;
use crate::space::{Block, Discretization};
use crate::stepper::SimState;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PostError {
    #[error("no rate for Σ_f at step {0}: a previous state or an exact rate is required")]
    NoRate(usize),
    #[error("states from different spaces ({0} vs {1} unknowns)")]
    Size(usize, usize),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// How Σ̇_f is obtained.
pub enum SigmaRate<'a> {
    /// (S^k − S^{k−1}) / Δt
    Backward(&'a SimState),
    Exact(&'a dyn ExactSolution),
}

/// Recovered fields as per-cell coefficients in the cell's own basis.
///
/// `p_p` uses the p-cell layout (n_p per cell), `u_f` two components of n_f
/// modes per f-cell, `p_f` n_f modes per f-cell. Cell order is the local
/// index of the layout.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub k: usize,
    pub p_p: Vec<f64>,
    pub u_f: Vec<f64>,
    pub p_f: Vec<f64>,
    /// Raw coefficient vector (U, W, V, Z, S, R).
    #[serde(skip)]
    pub x: Vec<f64>,
}

/// Values of every field at one point of one cell; `None` outside its region.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointFields {
    pub u: Option<[f64; 2]>,
    pub w: Option<[f64; 2]>,
    pub u_dot: Option<[f64; 2]>,
    pub w_dot: Option<[f64; 2]>,
    pub p_p: Option<f64>,
    pub sigma: Option<[[f64; 2]; 2]>,
    pub u_f: Option<[f64; 2]>,
    pub p_f: Option<f64>,
}

/// p_p = −m(β∇·u + ∇·w), projected cellwise (exact: the divergences are polynomials of lower degree).
pub fn recover_poro_pressure(d: &Discretization, mat: &MaterialModel, state: &SimState) -> Vec<f64> {
    let l = &d.space.layout;
    let (u, w) = (state.block(d, Block::U), state.block(d, Block::W));
    let mut out = vec![0.0; l.block_len(Block::U) / 2];
    for c in d.mesh.cells_in(Region::Poro) {
        let pp = mat.poro(c);
        let t = &d.cells[c];
        let base = l.pvec(c, 0) / 2;
        for q in 0..t.weights.len() {
            let (phi, g) = (t.phi_at(q), t.grad_at(q));
            let gu = eval_pvec(u, l, c, phi, g).1;
            let gw = eval_pvec(w, l, c, phi, g).1;
            let p = -pp.m * (pp.beta * (gu[0][0] + gu[1][1]) + gw[0][0] + gw[1][1]);
            for i in 0..l.n_p {
                out[base + i] += t.weights[q] * p * phi[i];
            }
        }
    }
    out
}

/// u_f = ρ_f⁻¹∇·Σ_f + H and p_f = −tr(Σ̇_f)/2 on every f-cell.
pub fn recover_fluid(
    d: &Discretization,
    mat: &MaterialModel,
    src: &Sources,
    state: &SimState,
    rate: Option<SigmaRate>,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>), PostError> {
    let l = &d.space.layout;
    let nfc = l.block_len(Block::S) / 4;
    let s = state.block(d, Block::S);
    let mut u_f = vec![0.0; 2 * nfc];
    let mut p_f = vec![0.0; nfc];
    let rate_coeffs: Option<Vec<f64>> = match rate {
        Some(SigmaRate::Backward(prev)) => {
            if prev.x.len() != state.x.len() {
                return Err(PostError::Size(prev.x.len(), state.x.len()));
            }
            let sp = prev.block(d, Block::S);
            Some(s.iter().zip(sp).map(|(a, b)| (a - b) / dt).collect())
        }
        Some(SigmaRate::Exact(e)) => Some(d.project_ften(|x| e.sigma_t(x, state.t))),
        None => None,
    };
    if rate_coeffs.is_none() {
        return Err(PostError::NoRate(state.k));
    }
    let rc = rate_coeffs.unwrap();
    for c in d.mesh.cells_in(Region::Fluid) {
        let rho = mat.fluid(c).rho_f;
        let t = &d.cells[c];
        let base = l.ften(c, 0, 0) / 4;
        for q in 0..t.weights.len() {
            let (phi, g) = (t.phi_at(q), t.grad_at(q));
            let dv = eval_ften(s, l, c, phi, g).1;
            let h = fluid_potential(src, t.points[q], state.t);
            for a in 0..2 {
                let v = dv[a] / rho + h[a];
                for i in 0..l.n_f {
                    u_f[2 * base + a * l.n_f + i] += t.weights[q] * v * phi[i];
                }
            }
        }
        for i in 0..l.n_f {
            p_f[base + i] = -0.5 * (rc[l.ften(c, 0, 0) + i] + rc[l.ften(c, 1, 1) + i]);
        }
    }
    Ok((u_f, p_f))
}

impl FieldSnapshot {
    pub fn build(
        d: &Discretization,
        mat: &MaterialModel,
        src: &Sources,
        state: &SimState,
        rate: Option<SigmaRate>,
        dt: f64,
    ) -> Result<Self, PostError> {
        let p_p = recover_poro_pressure(d, mat, state);
        let (u_f, p_f) = recover_fluid(d, mat, src, state, rate, dt)?;
        Ok(FieldSnapshot { t: state.t, k: state.k, p_p, u_f, p_f, x: state.x.clone() })
    }

    /// Snapshot without fluid recovery (u_f, p_f zero), e.g. at k = 0 without a rate.
    pub fn poro_only(d: &Discretization, mat: &MaterialModel, state: &SimState) -> Self {
        let nfc = d.space.layout.block_len(Block::S) / 4;
        FieldSnapshot {
            t: state.t,
            k: state.k,
            p_p: recover_poro_pressure(d, mat, state),
            u_f: vec![0.0; 2 * nfc],
            p_f: vec![0.0; nfc],
            x: state.x.clone(),
        }
    }

    pub fn eval(&self, d: &Discretization, c: usize, x: Point) -> PointFields {
        let l = &d.space.layout;
        let (phi, g) = d.space.bases[c].eval(x);
        let blk = |b: Block| &self.x[l.range(b)];
        let mut out = PointFields::default();
        match d.mesh.cells[c].region {
            Region::Poro => {
                out.u = Some(eval_pvec(blk(Block::U), l, c, &phi, &g).0);
                out.w = Some(eval_pvec(blk(Block::W), l, c, &phi, &g).0);
                out.u_dot = Some(eval_pvec(blk(Block::V), l, c, &phi, &g).0);
                out.w_dot = Some(eval_pvec(blk(Block::Z), l, c, &phi, &g).0);
                let base = l.pvec(c, 0) / 2;
                out.p_p = Some((0..l.n_p).map(|i| self.p_p[base + i] * phi[i]).sum());
            }
            Region::Fluid => {
                out.sigma = Some(eval_ften(blk(Block::S), l, c, &phi, &g).0);
                let base = l.ften(c, 0, 0) / 4;
                let comp = |a: usize| (0..l.n_f).map(|i| self.u_f[2 * base + a * l.n_f + i] * phi[i]).sum();
                out.u_f = Some([comp(0), comp(1)]);
                out.p_f = Some((0..l.n_f).map(|i| self.p_f[base + i] * phi[i]).sum());
            }
        }
        out
    }

    /// Cell average of every field (quadrature mean).
    pub fn cell_mean(&self, d: &Discretization, c: usize) -> PointFields {
        let t = &d.cells[c];
        let area = d.mesh.cells[c].area;
        let mut acc: Option<PointFields> = None;
        for q in 0..t.weights.len() {
            let v = self.eval(d, c, t.points[q]);
            let s = t.weights[q] / area;
            acc = Some(match acc {
                None => scale_fields(&v, s),
                Some(a) => add_fields(&a, &scale_fields(&v, s)),
            });
        }
        acc.unwrap_or_default()
    }
}

fn map2(a: Option<[f64; 2]>, b: Option<[f64; 2]>, f: impl Fn(f64, f64) -> f64) -> Option<[f64; 2]> {
    Some([f(a?[0], b?[0]), f(a?[1], b?[1])])
}

fn scale_fields(v: &PointFields, s: f64) -> PointFields {
    let v2 = |o: Option<[f64; 2]>| o.map(|x| [x[0] * s, x[1] * s]);
    PointFields {
        u: v2(v.u),
        w: v2(v.w),
        u_dot: v2(v.u_dot),
        w_dot: v2(v.w_dot),
        p_p: v.p_p.map(|x| x * s),
        sigma: v.sigma.map(|m| [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]),
        u_f: v2(v.u_f),
        p_f: v.p_f.map(|x| x * s),
    }
}

fn add_fields(a: &PointFields, b: &PointFields) -> PointFields {
    let add = |x: f64, y: f64| x + y;
    PointFields {
        u: map2(a.u, b.u, add),
        w: map2(a.w, b.w, add),
        u_dot: map2(a.u_dot, b.u_dot, add),
        w_dot: map2(a.w_dot, b.w_dot, add),
        p_p: a.p_p.zip(b.p_p).map(|(x, y)| x + y),
        sigma: a.sigma.zip(b.sigma).map(|(x, y)| [[x[0][0] + y[0][0], x[0][1] + y[0][1]], [x[1][0] + y[1][0], x[1][1] + y[1][1]]]),
        u_f: map2(a.u_f, b.u_f, add),
        p_f: a.p_f.zip(b.p_f).map(|(x, y)| x + y),
    }
}

#[cfg(test)]
mod tests;
