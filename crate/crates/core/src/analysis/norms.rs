//! Energy and dG norms of discrete states, exact fields, or their difference.

use super::manufactured::ExactSolution;
use crate::assembly::PenaltyField;
use crate::material::{elastic_stress, MaterialModel};
use crate::mesh::{FaceTag, Region};
use crate::space::tensor::{dev, Tensor};
use crate::space::{Block, DofLayout, Discretization};
use rayon::prelude::*;
use serde::Serialize;

/// Vector value and gradient of a p-block at one point.
#[inline]
pub fn eval_pvec(block: &[f64], l: &DofLayout, c: usize, phi: &[f64], grad: &[[f64; 2]]) -> ([f64; 2], Tensor) {
    let mut v = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        let o = l.pvec(c, a);
        for i in 0..l.n_p {
            let k = block[o + i];
            v[a] += k * phi[i];
            g[a][0] += k * grad[i][0];
            g[a][1] += k * grad[i][1];
        }
    }
    (v, g)
}

/// Tensor value and row-wise divergence of the S block at one point.
#[inline]
pub fn eval_ften(block: &[f64], l: &DofLayout, c: usize, phi: &[f64], grad: &[[f64; 2]]) -> (Tensor, [f64; 2]) {
    let mut s = [[0.0; 2]; 2];
    let mut dv = [0.0; 2];
    for a in 0..2 {
        for b in 0..2 {
            let o = l.ften(c, a, b);
            for i in 0..l.n_f {
                let k = block[o + i];
                s[a][b] += k * phi[i];
                dv[a] += k * grad[i][b];
            }
        }
    }
    (s, dv)
}

pub fn eval_fr(block: &[f64], l: &DofLayout, c: usize, phi: &[f64]) -> f64 {
    (0..l.n_r).map(|i| block[l.fr(c) + i] * phi[i]).sum()
}

/// Squared contributions of every term of the energy norms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyParts {
    pub u_t: f64,
    pub w_t: f64,
    pub eta_w: f64,
    pub gamma_w: f64,
    pub dg_e: f64,
    pub dg_p: f64,
    pub dev_f: f64,
    pub dg_f: f64,
    pub delta_f: f64,
    pub r: f64,
}

impl EnergyParts {
    pub fn e_p(&self) -> f64 {
        (self.u_t + self.w_t + self.eta_w + self.gamma_w + self.dg_e + self.dg_p).max(0.0).sqrt()
    }

    pub fn e_f(&self) -> f64 {
        (self.dev_f + self.dg_f + self.delta_f).max(0.0).sqrt()
    }

    pub fn e(&self) -> f64 {
        (self.e_p().powi(2) + self.e_f().powi(2)).sqrt()
    }

    pub fn dg_e(&self) -> f64 {
        self.dg_e.max(0.0).sqrt()
    }

    pub fn dg_p(&self) -> f64 {
        self.dg_p.max(0.0).sqrt()
    }

    pub fn dg_f(&self) -> f64 {
        self.dg_f.max(0.0).sqrt()
    }

    pub fn r_l2(&self) -> f64 {
        self.r.max(0.0).sqrt()
    }

    fn add(mut self, o: EnergyParts) -> EnergyParts {
        self.u_t += o.u_t;
        self.w_t += o.w_t;
        self.eta_w += o.eta_w;
        self.gamma_w += o.gamma_w;
        self.dg_e += o.dg_e;
        self.dg_p += o.dg_p;
        self.dev_f += o.dev_f;
        self.dg_f += o.dg_f;
        self.delta_f += o.delta_f;
        self.r += o.r;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Ep,
    Ef,
    E,
    DgE,
    DgP,
    DgF,
}

impl EnergyParts {
    pub fn get(&self, k: NormKind) -> f64 {
        match k {
            NormKind::Ep => self.e_p(),
            NormKind::Ef => self.e_f(),
            NormKind::E => self.e(),
            NormKind::DgE => self.dg_e(),
            NormKind::DgP => self.dg_p(),
            NormKind::DgF => self.dg_f(),
        }
    }
}

/// Pointwise field values on one side of a face or at a cell point.
#[derive(Default, Clone, Copy)]
struct PVals {
    u: [f64; 2],
    w: [f64; 2],
    gu: Tensor,
    gw: Tensor,
    v: [f64; 2],
    z: [f64; 2],
}

#[derive(Default, Clone, Copy)]
struct FVals {
    s: Tensor,
    div: [f64; 2],
    r: f64,
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn sub4(a: Tensor, b: Tensor) -> Tensor {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// Norm parts of (exact − discrete). Either side may be absent (treated as zero).
pub fn energy_parts(
    d: &Discretization,
    mat: &MaterialModel,
    pen: &PenaltyField,
    state: Option<&[f64]>,
    exact: Option<(&dyn ExactSolution, f64)>,
) -> EnergyParts {
    let l = &d.space.layout;
    let blk = |b: Block| state.map(|x| &x[l.range(b)]);
    let (bu, bw, bv, bz, bs, br) = (blk(Block::U), blk(Block::W), blk(Block::V), blk(Block::Z), blk(Block::S), blk(Block::R));

    let pvals = |c: usize, x: [f64; 2], phi: &[f64], grad: &[[f64; 2]]| -> PVals {
        let mut p = PVals::default();
        if let Some((e, t)) = exact {
            p = PVals { u: e.u(x, t), w: e.w(x, t), gu: e.grad_u(x, t), gw: e.grad_w(x, t), v: e.u_t(x, t), z: e.w_t(x, t) };
        }
        if state.is_some() {
            let (u, gu) = eval_pvec(bu.unwrap(), l, c, phi, grad);
            let (w, gw) = eval_pvec(bw.unwrap(), l, c, phi, grad);
            let (v, _) = eval_pvec(bv.unwrap(), l, c, phi, grad);
            let (z, _) = eval_pvec(bz.unwrap(), l, c, phi, grad);
            p = PVals { u: sub2(p.u, u), w: sub2(p.w, w), gu: sub4(p.gu, gu), gw: sub4(p.gw, gw), v: sub2(p.v, v), z: sub2(p.z, z) };
        }
        p
    };
    let fvals = |c: usize, x: [f64; 2], phi: &[f64], grad: &[[f64; 2]]| -> FVals {
        let mut f = FVals::default();
        if let Some((e, t)) = exact {
            f = FVals { s: e.sigma(x, t), div: e.div_sigma(x, t), r: e.r(x, t) };
        }
        if state.is_some() {
            let (s, dv) = eval_ften(bs.unwrap(), l, c, phi, grad);
            let r = eval_fr(br.unwrap(), l, c, phi);
            f = FVals { s: sub4(f.s, s), div: sub2(f.div, dv), r: f.r - r };
        }
        f
    };

    let cells: Vec<usize> = (0..d.mesh.n_cells()).collect();
    let vol = cells
        .par_iter()
        .map(|&c| {
            let tab = &d.cells[c];
            let mut e = EnergyParts::default();
            for q in 0..tab.weights.len() {
                let (x, w) = (tab.points[q], tab.weights[q]);
                let (phi, grad) = (tab.phi_at(q), tab.grad_at(q));
                match d.mesh.cells[c].region {
                    Region::Poro => {
                        let p = mat.poro(c);
                        let v = pvals(c, x, phi, grad);
                        let n2 = |a: [f64; 2]| a[0] * a[0] + a[1] * a[1];
                        e.u_t += w * n2(v.v);
                        e.w_t += w * n2(v.z);
                        e.eta_w += w * p.eta_over_k() * n2(v.w);
                        let eps = [[v.gu[0][0], 0.5 * (v.gu[0][1] + v.gu[1][0])], [0.5 * (v.gu[0][1] + v.gu[1][0]), v.gu[1][1]]];
                        let sig = elastic_stress(&eps, p.lambda, p.mu);
                        e.dg_e += w * (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| sig[i][j] * eps[i][j]).sum::<f64>();
                        let dq = p.beta * (v.gu[0][0] + v.gu[1][1]) + v.gw[0][0] + v.gw[1][1];
                        e.dg_p += w * p.m * dq * dq;
                    }
                    Region::Fluid => {
                        let fl = mat.fluid(c);
                        let v = fvals(c, x, phi, grad);
                        let dv = dev(&v.s);
                        e.dev_f += w / (2.0 * fl.mu_f) * dv.iter().flatten().map(|a| a * a).sum::<f64>();
                        e.dg_f += w / fl.rho_f * (v.div[0] * v.div[0] + v.div[1] * v.div[1]);
                        e.r += w * v.r * v.r;
                    }
                }
            }
            e
        })
        .reduce(EnergyParts::default, EnergyParts::add);

    let faces: Vec<usize> = (0..d.mesh.faces.len()).collect();
    let surf = faces
        .par_iter()
        .map(|&f| {
            let face = &d.mesh.faces[f];
            let ft = &d.faces[f];
            let n = face.normal;
            let tn = [n[1], -n[0]];
            let mut e = EnergyParts::default();
            for q in 0..ft.weights.len() {
                let (x, w) = (ft.points[q], ft.weights[q]);
                match face.tag {
                    FaceTag::InteriorP | FaceTag::DirichletP => {
                        let mut ju = [0.0; 2];
                        let mut jq = 0.0;
                        for (k, s) in ft.sides.iter().enumerate() {
                            let sg = if k == 0 { 1.0 } else { -1.0 };
                            let v = pvals(s.cell, x, s.phi_at(q), s.grad_at(q));
                            let beta = mat.poro(s.cell).beta;
                            ju[0] += sg * v.u[0];
                            ju[1] += sg * v.u[1];
                            jq += sg * ((beta * v.u[0] + v.w[0]) * n[0] + (beta * v.u[1] + v.w[1]) * n[1]);
                        }
                        e.dg_e += w * pen.chi_e[f] * (ju[0] * ju[0] + ju[1] * ju[1]);
                        e.dg_p += w * pen.chi_p[f] * jq * jq;
                    }
                    FaceTag::InteriorF | FaceTag::NeumannF => {
                        let mut j = [0.0; 2];
                        for (k, s) in ft.sides.iter().enumerate() {
                            let sg = if k == 0 { 1.0 } else { -1.0 };
                            let v = fvals(s.cell, x, s.phi_at(q), s.grad_at(q));
                            for a in 0..2 {
                                j[a] += sg * (v.s[a][0] * n[0] + v.s[a][1] * n[1]);
                            }
                        }
                        e.dg_f += w * pen.chi_f[f] * (j[0] * j[0] + j[1] * j[1]);
                    }
                    FaceTag::Interface => {
                        let ps = &ft.sides[0];
                        let v = pvals(ps.cell, x, ps.phi_at(q), ps.grad_at(q));
                        let wn = v.w[0] * n[0] + v.w[1] * n[1];
                        e.gamma_w += w * mat.interface.gamma * wn * wn;
                        let fs = &ft.sides[1];
                        let s = fvals(fs.cell, x, fs.phi_at(q), fs.grad_at(q)).s;
                        let snt = (0..2).map(|a| tn[a] * (s[a][0] * n[0] + s[a][1] * n[1])).sum::<f64>();
                        e.delta_f += w / mat.interface.delta * snt * snt;
                    }
                    _ => {}
                }
            }
            e
        })
        .reduce(EnergyParts::default, EnergyParts::add);
    vol.add(surf)
}

/// Error of a discrete state against exact fields at time t.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorReport {
    pub t: f64,
    pub err_ep: f64,
    pub err_ef: f64,
    pub err_e: f64,
    pub err_r: f64,
    pub parts: EnergyParts,
}

pub fn error_vs_exact(
    d: &Discretization,
    mat: &MaterialModel,
    pen: &PenaltyField,
    state: &[f64],
    exact: &dyn ExactSolution,
    t: f64,
) -> ErrorReport {
    let parts = energy_parts(d, mat, pen, Some(state), Some((exact, t)));
    ErrorReport { t, err_ep: parts.e_p(), err_ef: parts.e_f(), err_e: parts.e(), err_r: parts.r_l2(), parts }
}

/// Discrete energy ½VᵀM^pV + ½UᵀA^pU + ½SᵀA^fS of a state (V = (V,Z), U = (U,W)).
pub fn discrete_energy(d: &Discretization, blocks: &crate::assembly::SystemBlocks, x: &[f64]) -> (f64, f64, f64) {
    let l = &d.space.layout;
    let g = |b: Block| &x[l.range(b)];
    let (u, w, v, z, s) = (g(Block::U), g(Block::W), g(Block::V), g(Block::Z), g(Block::S));
    let p = &blocks.poro;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let kin = p.m_rho.dot_form(v, v) + 2.0 * p.m_rhof.dot_form(v, z) + p.m_rhow.dot_form(z, z);
    let ae = p.a_e.dot_form(u, u) + p.b_bb.dot_form(u, u) + 2.0 * dot(u, &p.b_b.matvec(w)) + p.b_p.dot_form(w, w);
    let ef = blocks.fluid.a_f.dot_form(s, s);
    let ep = 0.5 * (kin + ae);
    (ep + 0.5 * ef, ep, 0.5 * ef)
}
