//! Cell and face kernels of the poroelastic, fluid and coupling bilinear forms.

use super::penalty::PenaltyField;
use crate::linalg::{CsrMatrix, Triplets};
use crate::material::MaterialModel;
use crate::mesh::{FaceTag, Region};
use crate::space::{Block, Discretization};
use rayon::prelude::*;

type Entries = Vec<(usize, usize, f64)>;

/// Run `kernel` over `items` in parallel and merge the entries in item order.
pub(crate) fn collect<I, F>(items: &[I], rows: usize, cols: usize, kernel: F) -> CsrMatrix
where
    I: Sync,
    F: Fn(&I, &mut Entries) + Sync,
{
    let parts: Vec<Entries> = items
        .par_iter()
        .map(|it| {
            let mut e = Vec::new();
            kernel(it, &mut e);
            compress(e)
        })
        .collect();
    let mut t = Triplets::new(rows, cols);
    t.entries.reserve(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        t.entries.extend(p);
    }
    t.to_csr()
}

/// Sum duplicates of one local contribution (kernels emit one entry per quadrature point).
fn compress(mut e: Entries) -> Entries {
    e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Entries = Vec::with_capacity(e.len() / 4);
    for (i, j, v) in e {
        match out.last_mut() {
            Some(l) if (l.0, l.1) == (i, j) => l.2 += v,
            _ => out.push((i, j, v)),
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct PoroBlocks {
    pub m_rho: CsrMatrix,
    pub m_rhof: CsrMatrix,
    pub m_rhow: CsrMatrix,
    pub d_eta: CsrMatrix,
    pub d_gamma: CsrMatrix,
    pub a_e: CsrMatrix,
    /// B^p acting on q = βu + w with unit scaling.
    pub b_p: CsrMatrix,
    /// B^p(βu, βv).
    pub b_bb: CsrMatrix,
    /// B^p(w, βv): rows are V/U test indices, columns W trial indices.
    pub b_b: CsrMatrix,
}

#[derive(Debug, Clone)]
pub struct FluidBlocks {
    pub m_f: CsrMatrix,
    pub d_f: CsrMatrix,
    pub a_f: CsrMatrix,
    /// Rows S, columns R.
    pub b_f: CsrMatrix,
}

#[derive(Debug, Clone)]
pub struct CouplingBlocks {
    /// Rows S, columns Z: ⟨z·n_p, τn_p·n_p⟩.
    pub n: CsrMatrix,
    /// Rows S, columns V: ⟨αv·n_p, τn_p·n_p⟩.
    pub n_alpha: CsrMatrix,
    /// Rows S, columns V: ⟨v·t_p, τn_p·t_p⟩.
    pub t: CsrMatrix,
}

fn region_cells(d: &Discretization, r: Region) -> Vec<usize> {
    d.mesh.cells_in(r).collect()
}

fn tagged_faces(d: &Discretization, tags: &[FaceTag]) -> Vec<usize> {
    (0..d.mesh.faces.len()).filter(|&f| tags.contains(&d.mesh.faces[f].tag)).collect()
}

/// (σ_e(φ e_b) n)_a for a scalar mode with gradient g.
#[inline]
fn sigma_n(a: usize, b: usize, g: [f64; 2], n: [f64; 2], lambda: f64, mu: f64) -> f64 {
    let gn = g[0] * n[0] + g[1] * n[1];
    mu * (if a == b { gn } else { 0.0 } + g[a] * n[b]) + lambda * g[b] * n[a]
}

pub fn assemble_poro(d: &Discretization, mat: &MaterialModel, pen: &PenaltyField) -> PoroBlocks {
    let l = &d.space.layout;
    let np = l.n_p;
    let size = l.block_len(Block::U);
    let cells = region_cells(d, Region::Poro);

    let mass = |coef: &(dyn Fn(usize) -> f64 + Sync)| {
        collect(&cells, size, size, |&c, e| {
            let t = &d.cells[c];
            let k = coef(c);
            for q in 0..t.weights.len() {
                let phi = t.phi_at(q);
                let w = t.weights[q] * k;
                for a in 0..2 {
                    let o = l.pvec(c, a);
                    for i in 0..np {
                        for j in 0..np {
                            e.push((o + i, o + j, w * phi[i] * phi[j]));
                        }
                    }
                }
            }
        })
    };
    let m_rho = mass(&|c| mat.poro(c).rho());
    let m_rhof = mass(&|c| mat.poro(c).rho_f);
    let m_rhow = mass(&|c| mat.poro(c).rho_w());
    let d_eta = mass(&|c| mat.poro(c).eta_over_k());

    let gamma = mat.interface.gamma;
    let iface = tagged_faces(d, &[FaceTag::Interface]);
    let d_gamma = collect(&iface, size, size, |&f, e| {
        let ft = &d.faces[f];
        let n = d.mesh.faces[f].normal;
        let side = &ft.sides[0];
        let c = side.cell;
        for q in 0..ft.weights.len() {
            let phi = side.phi_at(q);
            let w = ft.weights[q] * gamma;
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..np {
                        for j in 0..np {
                            e.push((l.pvec(c, a) + i, l.pvec(c, b) + j, w * phi[i] * n[a] * phi[j] * n[b]));
                        }
                    }
                }
            }
        }
    });

    let faces = tagged_faces(d, &[FaceTag::InteriorP, FaceTag::DirichletP]);
    let a_vol = collect(&cells, size, size, |&c, e| {
        let t = &d.cells[c];
        let p = mat.poro(c);
        for q in 0..t.weights.len() {
            let g = t.grad_at(q);
            let w = t.weights[q];
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..np {
                        for j in 0..np {
                            let dd = if a == b { g[i][0] * g[j][0] + g[i][1] * g[j][1] } else { 0.0 };
                            let v = p.mu * (dd + g[j][a] * g[i][b]) + p.lambda * g[i][a] * g[j][b];
                            e.push((l.pvec(c, a) + i, l.pvec(c, b) + j, w * v));
                        }
                    }
                }
            }
        }
    });
    let a_face = collect(&faces, size, size, |&f, e| {
        let ft = &d.faces[f];
        let n = d.mesh.faces[f].normal;
        let chi = pen.chi_e[f];
        let omega = if ft.sides.len() == 2 { 0.5 } else { 1.0 };
        for q in 0..ft.weights.len() {
            let w = ft.weights[q];
            for (s, ts) in ft.sides.iter().enumerate() {
                let ss = if s == 0 { 1.0 } else { -1.0 };
                let ps = mat.poro(ts.cell);
                for (s2, tt) in ft.sides.iter().enumerate() {
                    let st = if s2 == 0 { 1.0 } else { -1.0 };
                    let pt = mat.poro(tt.cell);
                    let (phi_s, g_s) = (ts.phi_at(q), ts.grad_at(q));
                    let (phi_t, g_t) = (tt.phi_at(q), tt.grad_at(q));
                    for a in 0..2 {
                        for b in 0..2 {
                            for i in 0..np {
                                for j in 0..np {
                                    let mut v = -omega * ss * phi_s[i] * sigma_n(a, b, g_t[j], n, pt.lambda, pt.mu);
                                    v -= omega * st * phi_t[j] * sigma_n(b, a, g_s[i], n, ps.lambda, ps.mu);
                                    if a == b {
                                        v += chi * ss * st * phi_s[i] * phi_t[j];
                                    }
                                    e.push((l.pvec(ts.cell, a) + i, l.pvec(tt.cell, b) + j, w * v));
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    let a_e = a_vol.lin_comb(1.0, &a_face, 1.0);

    let b_vol = collect(&cells, size, size, |&c, e| {
        let t = &d.cells[c];
        let m = mat.poro(c).m;
        for q in 0..t.weights.len() {
            let g = t.grad_at(q);
            let w = t.weights[q] * m;
            for a in 0..2 {
                for b in 0..2 {
                    for i in 0..np {
                        for j in 0..np {
                            e.push((l.pvec(c, a) + i, l.pvec(c, b) + j, w * g[i][a] * g[j][b]));
                        }
                    }
                }
            }
        }
    });
    let b_face = collect(&faces, size, size, |&f, e| {
        let ft = &d.faces[f];
        let n = d.mesh.faces[f].normal;
        let chi = pen.chi_p[f];
        let omega = if ft.sides.len() == 2 { 0.5 } else { 1.0 };
        for q in 0..ft.weights.len() {
            let w = ft.weights[q];
            for (s, ts) in ft.sides.iter().enumerate() {
                let ss = if s == 0 { 1.0 } else { -1.0 };
                let ms = mat.poro(ts.cell).m;
                for (s2, tt) in ft.sides.iter().enumerate() {
                    let st = if s2 == 0 { 1.0 } else { -1.0 };
                    let mt = mat.poro(tt.cell).m;
                    let (phi_s, g_s) = (ts.phi_at(q), ts.grad_at(q));
                    let (phi_t, g_t) = (tt.phi_at(q), tt.grad_at(q));
                    for a in 0..2 {
                        for b in 0..2 {
                            for i in 0..np {
                                for j in 0..np {
                                    let mut v = -omega * mt * g_t[j][b] * ss * phi_s[i] * n[a];
                                    v -= omega * st * phi_t[j] * n[b] * ms * g_s[i][a];
                                    v += chi * ss * st * phi_s[i] * n[a] * phi_t[j] * n[b];
                                    e.push((l.pvec(ts.cell, a) + i, l.pvec(tt.cell, b) + j, w * v));
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    let b_p = b_vol.lin_comb(1.0, &b_face, 1.0);
    let beta = beta_vector(d, mat);
    let b_b = scale_rows(&b_p, &beta);
    let b_bb = scale_cols(&b_b, &beta);
    PoroBlocks { m_rho, m_rhof, m_rhow, d_eta, d_gamma, a_e, b_p, b_bb, b_b }
}

/// β of the owning cell for every index of a p-vector block.
pub fn beta_vector(d: &Discretization, mat: &MaterialModel) -> Vec<f64> {
    let l = &d.space.layout;
    let mut v = vec![0.0; l.block_len(Block::U)];
    for c in d.mesh.cells_in(Region::Poro) {
        let b = mat.poro(c).beta;
        for a in 0..2 {
            let o = l.pvec(c, a);
            v[o..o + l.n_p].fill(b);
        }
    }
    v
}

fn scale_rows(m: &CsrMatrix, s: &[f64]) -> CsrMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows {
        for k in m.indptr[i]..m.indptr[i + 1] {
            out.values[k] *= s[i];
        }
    }
    out
}

fn scale_cols(m: &CsrMatrix, s: &[f64]) -> CsrMatrix {
    let mut out = m.clone();
    for k in 0..m.values.len() {
        out.values[k] *= s[m.indices[k]];
    }
    out
}

pub fn assemble_fluid(d: &Discretization, mat: &MaterialModel, pen: &PenaltyField) -> FluidBlocks {
    let l = &d.space.layout;
    let nf = l.n_f;
    let nr = l.n_r;
    let size = l.block_len(Block::S);
    let cells = region_cells(d, Region::Fluid);
    let idx = |c: usize, a: usize, b: usize| l.ften(c, a, b);

    let m_f = collect(&cells, size, size, |&c, e| {
        let t = &d.cells[c];
        let k = 1.0 / (2.0 * mat.fluid(c).mu_f);
        for q in 0..t.weights.len() {
            let phi = t.phi_at(q);
            let w = t.weights[q] * k;
            for a in 0..2 {
                for b in 0..2 {
                    for cc in 0..2 {
                        for dd in 0..2 {
                            let dev = if a == cc && b == dd { 1.0 } else { 0.0 } - if a == b && cc == dd { 0.5 } else { 0.0 };
                            if dev == 0.0 {
                                continue;
                            }
                            for i in 0..nf {
                                for j in 0..nf {
                                    e.push((idx(c, a, b) + i, idx(c, cc, dd) + j, w * dev * phi[i] * phi[j]));
                                }
                            }
                        }
                    }
                }
            }
        }
    });

    let inv_delta = 1.0 / mat.interface.delta;
    let iface = tagged_faces(d, &[FaceTag::Interface]);
    let d_f = collect(&iface, size, size, |&f, e| {
        let ft = &d.faces[f];
        let n = d.mesh.faces[f].normal;
        let tn = [n[1], -n[0]];
        let side = &ft.sides[1];
        let c = side.cell;
        for q in 0..ft.weights.len() {
            let phi = side.phi_at(q);
            let w = ft.weights[q] * inv_delta;
            for a in 0..2 {
                for b in 0..2 {
                    for cc in 0..2 {
                        for dd in 0..2 {
                            let k = tn[a] * n[b] * tn[cc] * n[dd];
                            for i in 0..nf {
                                for j in 0..nf {
                                    e.push((idx(c, a, b) + i, idx(c, cc, dd) + j, w * k * phi[i] * phi[j]));
                                }
                            }
                        }
                    }
                }
            }
        }
    });

    let a_vol = collect(&cells, size, size, |&c, e| {
        let t = &d.cells[c];
        let k = 1.0 / mat.fluid(c).rho_f;
        for q in 0..t.weights.len() {
            let g = t.grad_at(q);
            let w = t.weights[q] * k;
            for a in 0..2 {
                for b in 0..2 {
                    for dd in 0..2 {
                        for i in 0..nf {
                            for j in 0..nf {
                                e.push((idx(c, a, b) + i, idx(c, a, dd) + j, w * g[i][b] * g[j][dd]));
                            }
                        }
                    }
                }
            }
        }
    });
    let faces = tagged_faces(d, &[FaceTag::InteriorF, FaceTag::NeumannF]);
    let a_face = collect(&faces, size, size, |&f, e| {
        let ft = &d.faces[f];
        let n = d.mesh.faces[f].normal;
        let chi = pen.chi_f[f];
        let omega = if ft.sides.len() == 2 { 0.5 } else { 1.0 };
        for q in 0..ft.weights.len() {
            let w = ft.weights[q];
            for (s, ts) in ft.sides.iter().enumerate() {
                let ss = if s == 0 { 1.0 } else { -1.0 };
                let rs = 1.0 / mat.fluid(ts.cell).rho_f;
                for (s2, tt) in ft.sides.iter().enumerate() {
                    let st = if s2 == 0 { 1.0 } else { -1.0 };
                    let rt = 1.0 / mat.fluid(tt.cell).rho_f;
                    let (phi_s, g_s) = (ts.phi_at(q), ts.grad_at(q));
                    let (phi_t, g_t) = (tt.phi_at(q), tt.grad_at(q));
                    // test τ = φ_i E_ab on side s, trial Σ = φ_j E_ad on side s2 (row a must match)
                    for a in 0..2 {
                        for b in 0..2 {
                            for dd in 0..2 {
                                for i in 0..nf {
                                    for j in 0..nf {
                                        let mut v = -omega * rt * ss * g_t[j][dd] * phi_s[i] * n[b];
                                        v -= omega * rs * st * phi_t[j] * n[dd] * g_s[i][b];
                                        v += chi * ss * st * phi_s[i] * n[b] * phi_t[j] * n[dd];
                                        e.push((idx(ts.cell, a, b) + i, idx(tt.cell, a, dd) + j, w * v));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    let a_f = a_vol.lin_comb(1.0, &a_face, 1.0);

    let b_f = collect(&cells, size, l.block_len(Block::R), |&c, e| {
        let t = &d.cells[c];
        for q in 0..t.weights.len() {
            let phi = t.phi_at(q);
            let w = t.weights[q];
            for i in 0..nf {
                for j in 0..nr {
                    let v = w * phi[i] * phi[j];
                    e.push((idx(c, 0, 1) + i, l.fr(c) + j, v));
                    e.push((idx(c, 1, 0) + i, l.fr(c) + j, -v));
                }
            }
        }
    });
    FluidBlocks { m_f, d_f, a_f, b_f }
}

pub fn assemble_coupling(d: &Discretization, mat: &MaterialModel) -> CouplingBlocks {
    let l = &d.space.layout;
    let (np, nf) = (l.n_p, l.n_f);
    let (rows, cols) = (l.block_len(Block::S), l.block_len(Block::V));
    let iface = tagged_faces(d, &[FaceTag::Interface]);
    if iface.is_empty() {
        log::warn!("mesh has no interface faces; coupling blocks are zero");
    }
    let build = |kernel: &(dyn Fn([f64; 2], [f64; 2], usize, usize, usize) -> f64 + Sync)| {
        collect(&iface, rows, cols, |&f, e| {
            let ft = &d.faces[f];
            let n = d.mesh.faces[f].normal;
            let tn = [n[1], -n[0]];
            let (ps, fs) = (&ft.sides[0], &ft.sides[1]);
            for q in 0..ft.weights.len() {
                let (pp, pf) = (ps.phi_at(q), fs.phi_at(q));
                let w = ft.weights[q];
                for a in 0..2 {
                    for b in 0..2 {
                        for cc in 0..2 {
                            let k = kernel(n, tn, a, b, cc);
                            if k == 0.0 {
                                continue;
                            }
                            for i in 0..nf {
                                for j in 0..np {
                                    e.push((l.ften(fs.cell, a, b) + i, l.pvec(ps.cell, cc) + j, w * k * pf[i] * pp[j]));
                                }
                            }
                        }
                    }
                }
            }
        })
    };
    let n = build(&|n, _, a, b, c| n[c] * n[a] * n[b]);
    let alpha = mat.interface.alpha;
    let n_alpha = build(&|n, _, a, b, c| alpha * n[c] * n[a] * n[b]);
    let t = build(&|n, t, a, b, c| t[c] * t[a] * n[b]);
    CouplingBlocks { n, n_alpha, t }
}
