//! Time-dependent right-hand side F(t).

use super::penalty::PenaltyField;
use super::sources::{FluidForcing, Sources};
use super::AssemblyError;
use crate::geometry::Point;
use crate::material::MaterialModel;
use crate::mesh::{FaceTag, Region};
use crate::space::{Block, Discretization};
use rayon::prelude::*;

type Pairs = Vec<(usize, f64)>;

fn gather<I: Sync>(items: &[I], out: &mut [f64], kernel: impl Fn(&I, &mut Pairs) + Sync) {
    let parts: Vec<Pairs> = items
        .par_iter()
        .map(|it| {
            let mut p = Vec::new();
            kernel(it, &mut p);
            p
        })
        .collect();
    for p in parts {
        for (i, v) in p {
            out[i] += v;
        }
    }
}

fn need<'a, T>(o: &'a Option<T>, name: &'static str) -> Result<&'a T, AssemblyError> {
    o.as_ref().ok_or(AssemblyError::MissingSource(name))
}

fn faces_with(d: &Discretization, tag: FaceTag) -> Vec<usize> {
    (0..d.mesh.faces.len()).filter(|&f| d.mesh.faces[f].tag == tag).collect()
}

/// (σ_e(φ e_a) n) · g for a scalar mode with gradient gr.
fn sigma_n_dot(a: usize, gr: [f64; 2], n: [f64; 2], g: [f64; 2], lambda: f64, mu: f64) -> f64 {
    let gn = gr[0] * n[0] + gr[1] * n[1];
    let mut s = 0.0;
    for b in 0..2 {
        // (σ(φ e_a) n)_b
        let v = mu * (if a == b { gn } else { 0.0 } + gr[b] * n[a]) + lambda * gr[a] * n[b];
        s += v * g[b];
    }
    s
}

/// Which expression is used for the fluid-stress rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluidLoadForm {
    /// (∇H, τ) plus boundary and interface traces of G_f.
    Boundary,
    /// −(H, ∇·τ) with face terms, after integration by parts.
    Volume,
}

pub fn assemble_load(
    d: &Discretization,
    mat: &MaterialModel,
    pen: &PenaltyField,
    src: &Sources,
    t: f64,
) -> Result<Vec<f64>, AssemblyError> {
    assemble_load_with(d, mat, pen, src, t, FluidLoadForm::Boundary)
}

pub fn assemble_load_with(
    d: &Discretization,
    mat: &MaterialModel,
    pen: &PenaltyField,
    src: &Sources,
    t: f64,
    form: FluidLoadForm,
) -> Result<Vec<f64>, AssemblyError> {
    let l = &d.space.layout;
    let mut out = vec![0.0; l.ndof()];
    let (ov, oz, os) = (l.range(Block::V).start, l.range(Block::Z).start, l.range(Block::S).start);
    let np = l.n_p;
    let nf = l.n_f;
    let pcells: Vec<usize> = d.mesh.cells_in(Region::Poro).collect();
    let fcells: Vec<usize> = d.mesh.cells_in(Region::Fluid).collect();

    if !pcells.is_empty() {
        let f_p = need(&src.f_p, "f_p")?;
        let g_p = need(&src.g_p, "g_p")?;
        gather(&pcells, &mut out, |&c, e| {
            let tab = &d.cells[c];
            for q in 0..tab.weights.len() {
                let x = tab.points[q];
                let (fv, gv) = (f_p(x, t), g_p(x, t));
                let phi = tab.phi_at(q);
                let w = tab.weights[q];
                for a in 0..2 {
                    for i in 0..np {
                        e.push((ov + l.pvec(c, a) + i, w * fv[a] * phi[i]));
                        e.push((oz + l.pvec(c, a) + i, w * gv[a] * phi[i]));
                    }
                }
            }
        });
    }

    let dir_p = faces_with(d, FaceTag::DirichletP);
    if !dir_p.is_empty() {
        let u_d = need(&src.u_d, "u_d")?;
        let w_d = need(&src.w_d, "w_d")?;
        gather(&dir_p, &mut out, |&f, e| {
            let ft = &d.faces[f];
            let n = d.mesh.faces[f].normal;
            let s = &ft.sides[0];
            let c = s.cell;
            let p = mat.poro(c);
            for q in 0..ft.weights.len() {
                let x = ft.points[q];
                let (gu, gw) = (u_d(x, t), w_d(x, t));
                let gqn = (p.beta * gu[0] + gw[0]) * n[0] + (p.beta * gu[1] + gw[1]) * n[1];
                let (phi, gr) = (s.phi_at(q), s.grad_at(q));
                let w = ft.weights[q];
                for a in 0..2 {
                    for i in 0..np {
                        let bp = -gqn * p.m * gr[i][a] + pen.chi_p[f] * gqn * phi[i] * n[a];
                        let ae = -sigma_n_dot(a, gr[i], n, gu, p.lambda, p.mu) + pen.chi_e[f] * gu[a] * phi[i];
                        e.push((ov + l.pvec(c, a) + i, w * (ae + p.beta * bp)));
                        e.push((oz + l.pvec(c, a) + i, w * bp));
                    }
                }
            }
        });
    }

    let neu_p = faces_with(d, FaceTag::NeumannP);
    if !neu_p.is_empty() {
        let tr = need(&src.traction_p, "traction_p")?;
        let pr = need(&src.pressure_p, "pressure_p")?;
        gather(&neu_p, &mut out, |&f, e| {
            let ft = &d.faces[f];
            let n = d.mesh.faces[f].normal;
            let s = &ft.sides[0];
            for q in 0..ft.weights.len() {
                let x = ft.points[q];
                let (sv, pv) = (tr(x, n, t), pr(x, t));
                let phi = s.phi_at(q);
                let w = ft.weights[q];
                for a in 0..2 {
                    for i in 0..np {
                        e.push((ov + l.pvec(s.cell, a) + i, w * sv[a] * phi[i]));
                        e.push((oz + l.pvec(s.cell, a) + i, -w * pv * n[a] * phi[i]));
                    }
                }
            }
        });
    }

    let iface = faces_with(d, FaceTag::Interface);
    let inv_delta = 1.0 / mat.interface.delta;

    if !fcells.is_empty() {
        let fl = need(&src.fluid, "fluid forcing")?;
        match form {
            FluidLoadForm::Boundary => {
                gather(&fcells, &mut out, |&c, e| {
                    let tab = &d.cells[c];
                    for q in 0..tab.weights.len() {
                        let g = fl.grad_h(tab.points[q], t);
                        let phi = tab.phi_at(q);
                        let w = tab.weights[q];
                        for a in 0..2 {
                            for b in 0..2 {
                                for i in 0..nf {
                                    e.push((os + l.ften(c, a, b) + i, w * g[a][b] * phi[i]));
                                }
                            }
                        }
                    }
                });
            }
            FluidLoadForm::Volume => {
                gather(&fcells, &mut out, |&c, e| {
                    let tab = &d.cells[c];
                    for q in 0..tab.weights.len() {
                        let h = fl.h(tab.points[q], t);
                        let gr = tab.grad_at(q);
                        let w = tab.weights[q];
                        for a in 0..2 {
                            for b in 0..2 {
                                for i in 0..nf {
                                    e.push((os + l.ften(c, a, b) + i, -w * h[a] * gr[i][b]));
                                }
                            }
                        }
                    }
                });
                let int_f = faces_with(d, FaceTag::InteriorF);
                gather(&int_f, &mut out, |&f, e| {
                    let ft = &d.faces[f];
                    let n = d.mesh.faces[f].normal;
                    for q in 0..ft.weights.len() {
                        let h = fl.h(ft.points[q], t);
                        let w = ft.weights[q];
                        for (k, s) in ft.sides.iter().enumerate() {
                            let sg = if k == 0 { 1.0 } else { -1.0 };
                            let phi = s.phi_at(q);
                            for a in 0..2 {
                                for b in 0..2 {
                                    for i in 0..nf {
                                        e.push((os + l.ften(s.cell, a, b) + i, sg * w * h[a] * n[b] * phi[i]));
                                    }
                                }
                            }
                        }
                    }
                });
                let neu_f = faces_with(d, FaceTag::NeumannF);
                gather(&neu_f, &mut out, |&f, e| {
                    let ft = &d.faces[f];
                    let n = d.mesh.faces[f].normal;
                    let s = &ft.sides[0];
                    for q in 0..ft.weights.len() {
                        let h = fl.h(ft.points[q], t);
                        let phi = s.phi_at(q);
                        for a in 0..2 {
                            for b in 0..2 {
                                for i in 0..nf {
                                    e.push((os + l.ften(s.cell, a, b) + i, ft.weights[q] * h[a] * n[b] * phi[i]));
                                }
                            }
                        }
                    }
                });
            }
        }

        let dir_f = faces_with(d, FaceTag::DirichletF);
        if !dir_f.is_empty() {
            let g_d = need(&src.velocity_f, "velocity_f")?;
            gather(&dir_f, &mut out, |&f, e| {
                let ft = &d.faces[f];
                let n = d.mesh.faces[f].normal;
                let s = &ft.sides[0];
                for q in 0..ft.weights.len() {
                    let x = ft.points[q];
                    let gv = g_d(x, t);
                    let g = match form {
                        FluidLoadForm::Boundary => {
                            let h = fl.h(x, t);
                            [gv[0] - h[0], gv[1] - h[1]]
                        }
                        FluidLoadForm::Volume => gv,
                    };
                    let phi = s.phi_at(q);
                    for a in 0..2 {
                        for b in 0..2 {
                            for i in 0..nf {
                                e.push((os + l.ften(s.cell, a, b) + i, ft.weights[q] * g[a] * n[b] * phi[i]));
                            }
                        }
                    }
                }
            });
        }

        let neu_f = faces_with(d, FaceTag::NeumannF);
        if !neu_f.is_empty() {
            let tr = need(&src.traction_f, "traction_f")?;
            gather(&neu_f, &mut out, |&f, e| {
                let ft = &d.faces[f];
                let n = d.mesh.faces[f].normal;
                let s = &ft.sides[0];
                let inv_rho = 1.0 / mat.fluid(s.cell).rho_f;
                for q in 0..ft.weights.len() {
                    let sn = tr(ft.points[q], n, t);
                    let (phi, gr) = (s.phi_at(q), s.grad_at(q));
                    for a in 0..2 {
                        for b in 0..2 {
                            for i in 0..nf {
                                let v = -inv_rho * sn[a] * gr[i][b] + pen.chi_f[f] * sn[a] * phi[i] * n[b];
                                e.push((os + l.ften(s.cell, a, b) + i, ft.weights[q] * v));
                            }
                        }
                    }
                }
            });
        }

        if form == FluidLoadForm::Boundary {
            gather(&iface, &mut out, |&f, e| {
                let ft = &d.faces[f];
                let n = d.mesh.faces[f].normal;
                let s = &ft.sides[1];
                for q in 0..ft.weights.len() {
                    let h = fl.h(ft.points[q], t);
                    let phi = s.phi_at(q);
                    for a in 0..2 {
                        for b in 0..2 {
                            for i in 0..nf {
                                e.push((os + l.ften(s.cell, a, b) + i, ft.weights[q] * h[a] * n[b] * phi[i]));
                            }
                        }
                    }
                }
            });
        }
    }

    if let Some(extra) = &src.interface_extra {
        gather(&iface, &mut out, |&f, e| {
            let ft = &d.faces[f];
            let n = d.mesh.faces[f].normal;
            let tn = [n[1], -n[0]];
            let (ps, fs) = (&ft.sides[0], &ft.sides[1]);
            for q in 0..ft.weights.len() {
                let [f1, f2, f3, f4, f5] = extra(ft.points[q], t);
                let w = ft.weights[q];
                let pp = ps.phi_at(q);
                for a in 0..2 {
                    for i in 0..np {
                        e.push((ov + l.pvec(ps.cell, a) + i, w * (f3 * n[a] + f4 * tn[a]) * pp[i]));
                        e.push((oz + l.pvec(ps.cell, a) + i, -w * f2 * n[a] * pp[i]));
                    }
                }
                let pf = fs.phi_at(q);
                for a in 0..2 {
                    for b in 0..2 {
                        let k = -f1 * n[a] * n[b] - inv_delta * f5 * tn[a] * n[b];
                        for i in 0..nf {
                            e.push((os + l.ften(fs.cell, a, b) + i, w * k * pf[i]));
                        }
                    }
                }
            }
        });
    }
    Ok(out)
}

/// Fluid potential H of the sources at a point, zero when absent.
pub fn fluid_potential(src: &Sources, x: Point, t: f64) -> [f64; 2] {
    src.fluid.as_ref().map(|f: &FluidForcing| f.h(x, t)).unwrap_or([0.0; 2])
}
