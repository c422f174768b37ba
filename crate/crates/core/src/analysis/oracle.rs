//! Finite-difference residual check of a manufactured case.
//!
//! Only the closed forms u, w, Σ_f, u_f, r_f and the case's data (f_p, g_p,
//! H, interface extras) are used; every derivative is a central difference.

use super::manufactured::ManufacturedCase;
use crate::geometry::Point;
use crate::space::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const HX: f64 = 1e-3;
const HT: f64 = 1e-3;

/// Largest absolute residual of every equation over the sample.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ResidualReport {
    pub n_points: usize,
    /// ρü + ρ_f ẅ − ∇·σ_p − f_p
    pub solid_momentum: f64,
    /// ρ_f ü + ρ_w ẅ + (η/κ)ẇ + ∇p_p − g_p
    pub filtration: f64,
    /// (2μ_f)⁻¹dev Σ̇ − ∇(ρ_f⁻¹∇·Σ) + r_f − ∇H
    pub stress_momentum: f64,
    /// skew Σ̇
    pub stress_skew: f64,
    /// u_f − ρ_f⁻¹∇·Σ − H
    pub velocity: f64,
    /// flux, Robin, normal stress, tangential stress, BJS
    pub interface: [f64; 5],
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [self.solid_momentum, self.filtration, self.stress_momentum, self.stress_skew, self.velocity]
            .into_iter()
            .chain(self.interface)
            .fold(0.0, f64::max)
    }
}

fn d_dt<const N: usize>(f: impl Fn(f64) -> [f64; N], t: f64) -> [f64; N] {
    let (a, b) = (f(t + HT), f(t - HT));
    std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * HT))
}

fn d2_dt2<const N: usize>(f: impl Fn(f64) -> [f64; N], t: f64) -> [f64; N] {
    let (a, m, b) = (f(t + HT), f(t), f(t - HT));
    std::array::from_fn(|i| (a[i] - 2.0 * m[i] + b[i]) / (HT * HT))
}

/// (∇v)_ij = ∂_j v_i
fn grad(f: &impl Fn(Point) -> [f64; 2], x: Point) -> Tensor {
    let mut g = [[0.0; 2]; 2];
    for j in 0..2 {
        let (mut p, mut m) = (x, x);
        p[j] += HX;
        m[j] -= HX;
        let (a, b) = (f(p), f(m));
        for i in 0..2 {
            g[i][j] = (a[i] - b[i]) / (2.0 * HX);
        }
    }
    g
}

fn grad_scalar(f: &impl Fn(Point) -> f64, x: Point) -> [f64; 2] {
    let g = grad(&|p| [f(p), 0.0], x);
    [g[0][0], g[0][1]]
}

/// Row-wise divergence.
fn div_rows(f: &impl Fn(Point) -> Tensor, x: Point) -> [f64; 2] {
    let mut d = [0.0; 2];
    for j in 0..2 {
        let (mut p, mut m) = (x, x);
        p[j] += HX;
        m[j] -= HX;
        let (a, b) = (f(p), f(m));
        for i in 0..2 {
            d[i] += (a[i][j] - b[i][j]) / (2.0 * HX);
        }
    }
    d
}

fn flat(t: Tensor) -> [f64; 4] {
    [t[0][0], t[0][1], t[1][0], t[1][1]]
}

fn unflat(v: [f64; 4]) -> Tensor {
    [[v[0], v[1]], [v[2], v[3]]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn apply(t: &Tensor, n: [f64; 2]) -> [f64; 2] {
    [dot(t[0], n), dot(t[1], n)]
}

impl ManufacturedCase {
    fn pore_pressure_fd(&self, x: Point, t: f64) -> f64 {
        let p = &self.material.p;
        let gu = grad(&|y| self.exact.u(y, t), x);
        let gw = grad(&|y| self.exact.w(y, t), x);
        -p.m * (p.beta * (gu[0][0] + gu[1][1]) + gw[0][0] + gw[1][1])
    }

    fn stress_fd(&self, x: Point, t: f64) -> Tensor {
        let p = &self.material.p;
        let g = grad(&|y| self.exact.u(y, t), x);
        let div = g[0][0] + g[1][1];
        let pp = self.pore_pressure_fd(x, t);
        let e01 = 0.5 * (g[0][1] + g[1][0]);
        let iso = p.lambda * div - p.beta * pp;
        [[2.0 * p.mu * g[0][0] + iso, 2.0 * p.mu * e01], [2.0 * p.mu * e01, 2.0 * p.mu * g[1][1] + iso]]
    }

    fn poro_residuals(&self, x: Point, t: f64) -> (f64, f64) {
        let p = &self.material.p;
        let e = &self.exact;
        let ua = d2_dt2(|s| e.u(x, s), t);
        let wa = d2_dt2(|s| e.w(x, s), t);
        let wv = d_dt(|s| e.w(x, s), t);
        let div = div_rows(&|y| self.stress_fd(y, t), x);
        let gp = grad_scalar(&|y| self.pore_pressure_fd(y, t), x);
        let (f, g) = (e.f_p(x, t), e.g_p(x, t));
        let mut r1: f64 = 0.0;
        let mut r2: f64 = 0.0;
        for i in 0..2 {
            r1 = r1.max((p.rho() * ua[i] + p.rho_f * wa[i] - div[i] - f[i]).abs());
            r2 = r2.max((p.rho_f * ua[i] + p.rho_w() * wa[i] + p.eta_over_k() * wv[i] + gp[i] - g[i]).abs());
        }
        (r1, r2)
    }

    fn fluid_residuals(&self, x: Point, t: f64) -> (f64, f64, f64) {
        let fl = &self.material.f;
        let e = &self.exact;
        let st = unflat(d_dt(|s| flat(e.sigma(x, s)), t));
        let tr = 0.5 * (st[0][0] + st[1][1]);
        let dev = [[st[0][0] - tr, st[0][1]], [st[1][0], st[1][1] - tr]];
        let gdiv = grad(&|y| div_rows(&|z| e.sigma(z, t), y), x);
        let gh = grad(&|y| e.h(y, t), x);
        let r = e.r(x, t);
        let rot = [[0.0, r], [-r, 0.0]];
        let mut mom: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                mom = mom.max((dev[i][j] / (2.0 * fl.mu_f) - gdiv[i][j] / fl.rho_f + rot[i][j] - gh[i][j]).abs());
            }
        }
        let skew = (st[0][1] - st[1][0]).abs() / 2.0;
        let (uf, div, h) = (e.u_f(x, t), div_rows(&|y| e.sigma(y, t), x), e.h(x, t));
        let vel = (0..2).map(|i| (uf[i] - div[i] / fl.rho_f - h[i]).abs()).fold(0.0, f64::max);
        (mom, skew, vel)
    }

    /// Interface conditions at x ∈ Γ_I with poro outward normal n.
    fn interface_residuals(&self, x: Point, n: [f64; 2], t: f64) -> [f64; 5] {
        let ip = &self.material.interface;
        let e = &self.exact;
        let tan = [n[1], -n[0]];
        let ud = d_dt(|s| e.u(x, s), t);
        let wd = d_dt(|s| e.w(x, s), t);
        let st = unflat(d_dt(|s| flat(e.sigma(x, s)), t));
        let sn = apply(&st, n);
        let pn = apply(&self.stress_fd(x, t), n);
        let uf = e.u_f(x, t);
        let pp = self.pore_pressure_fd(x, t);
        let f = e.interface_extra(x, t);
        let slip = [uf[0] - ud[0], uf[1] - ud[1]];
        [
            (dot([ip.alpha * ud[0] + wd[0], ip.alpha * ud[1] + wd[1]], n) - dot(uf, n) + f[0]).abs(),
            (dot(sn, n) - ip.gamma * dot(wd, n) + pp - f[1]).abs(),
            (ip.alpha * dot(sn, n) - dot(pn, n) + f[2]).abs(),
            (dot(sn, tan) - dot(pn, tan) + f[3]).abs(),
            (dot(sn, tan) - ip.delta * dot(slip, tan) + f[4]).abs(),
        ]
    }

    /// Residuals at `n` random points per region and on the interface x = 0 of
    /// the manufactured geometry, for t in [0.05, 1].
    pub fn residuals(&self, n: usize, seed: u64) -> ResidualReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = ResidualReport { n_points: n, ..Default::default() };
        for _ in 0..n {
            let t = rng.random_range(0.05..1.0);
            let xp = [rng.random_range(-0.99..-0.01), rng.random_range(0.01..0.99)];
            let (a, b) = self.poro_residuals(xp, t);
            rep.solid_momentum = rep.solid_momentum.max(a);
            rep.filtration = rep.filtration.max(b);
            let xf = [rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
            let (c, d, v) = self.fluid_residuals(xf, t);
            rep.stress_momentum = rep.stress_momentum.max(c);
            rep.stress_skew = rep.stress_skew.max(d);
            rep.velocity = rep.velocity.max(v);
            let xi = [0.0, rng.random_range(0.0..1.0)];
            for (k, r) in self.interface_residuals(xi, [1.0, 0.0], t).into_iter().enumerate() {
                rep.interface[k] = rep.interface[k].max(r);
            }
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::manufactured::ExactSolution;
    use std::sync::Arc;

    #[test]
    fn reference_cases_pass() {
        for case in [ManufacturedCase::test1(), ManufacturedCase::test2()] {
            let r = case.residuals(100, 1);
            assert!(r.max() <= 1e-6, "{}: {r:?}", case.name);
        }
    }

    struct Perturbed;
    impl ExactSolution for Perturbed {
        fn u(&self, x: Point, t: f64) -> [f64; 2] {
            crate::analysis::manufactured::Test1.u(x, t)
        }
        fn w(&self, x: Point, t: f64) -> [f64; 2] {
            crate::analysis::manufactured::Test1.w(x, t)
        }
        fn sigma(&self, x: Point, t: f64) -> Tensor {
            crate::analysis::manufactured::Test1.sigma(x, t)
        }
        fn u_f(&self, x: Point, t: f64) -> [f64; 2] {
            crate::analysis::manufactured::Test1.u_f(x, t)
        }
        fn f_p(&self, x: Point, t: f64) -> [f64; 2] {
            let f = crate::analysis::manufactured::Test1.f_p(x, t);
            [f[0] + 1e-3, f[1]]
        }
        fn g_p(&self, x: Point, t: f64) -> [f64; 2] {
            crate::analysis::manufactured::Test1.g_p(x, t)
        }
        fn interface_extra(&self, _x: Point, _t: f64) -> [f64; 5] {
            [0.0; 5]
        }
    }

    #[test]
    fn detects_wrong_data() {
        let case = ManufacturedCase { exact: Arc::new(Perturbed), ..ManufacturedCase::test1() };
        let r = case.residuals(20, 2);
        assert!((r.solid_momentum - 1e-3).abs() < 1e-6);
        assert!(r.interface[2] > 1e-3, "missing f_I^3 must show: {r:?}");
        assert!(r.filtration < 1e-6 && r.velocity < 1e-6);
    }
}
