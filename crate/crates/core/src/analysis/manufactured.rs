//! Closed-form reference solutions and the data they induce.

use crate::assembly::{FluidForcing, Sources};
use crate::geometry::Point;
use crate::material::{elastic_stress, pore_pressure, MaterialSet};
use crate::space::tensor::{apply, Tensor};
use std::sync::Arc;

const Z2: [f64; 2] = [0.0; 2];
const Z4: Tensor = [[0.0; 2]; 2];

/// Exact fields of a reference problem. Every method defaults to zero.
pub trait ExactSolution: Send + Sync {
    fn u(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn u_t(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    /// (∇u)_ij = ∂_j u_i
    fn grad_u(&self, _x: Point, _t: f64) -> Tensor {
        Z4
    }
    fn w(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn w_t(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn grad_w(&self, _x: Point, _t: f64) -> Tensor {
        Z4
    }
    fn sigma(&self, _x: Point, _t: f64) -> Tensor {
        Z4
    }
    fn sigma_t(&self, _x: Point, _t: f64) -> Tensor {
        Z4
    }
    /// Row-wise divergence of Σ_f.
    fn div_sigma(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn r(&self, _x: Point, _t: f64) -> f64 {
        0.0
    }
    fn u_f(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn p_f(&self, _x: Point, _t: f64) -> f64 {
        0.0
    }
    /// H = ∫₀ᵗ h_f + u_f0 = u_f − ρ_f⁻¹ ∇·Σ_f.
    fn h(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn grad_h(&self, _x: Point, _t: f64) -> Tensor {
        Z4
    }
    fn f_p(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    fn g_p(&self, _x: Point, _t: f64) -> [f64; 2] {
        Z2
    }
    /// f1..f5 on the interface.
    fn interface_extra(&self, _x: Point, _t: f64) -> [f64; 5] {
        [0.0; 5]
    }
}

fn sym(g: &Tensor) -> Tensor {
    let o = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], o], [o, g[1][1]]]
}

/// Closed-form polynomial solution on (-1,0)x(0,1) ∪ (0,1)x(0,1); Σ_f is quadratic in space.
pub struct Test1;

impl ExactSolution for Test1 {
    fn u(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [x * t * t / 4.0, t * x * x * y / 2.0 - y * t.powi(3) / 6.0]
    }
    fn u_t(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [x * t / 2.0, x * x * y / 2.0 - y * t * t / 2.0]
    }
    fn grad_u(&self, x: Point, t: f64) -> Tensor {
        let (x, y) = (x[0], x[1]);
        [[t * t / 4.0, 0.0], [t * x * y, t * x * x / 2.0 - t.powi(3) / 6.0]]
    }
    fn w(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [-t * x * y * y / 2.0 + x * t.powi(3) / 6.0, y * t * t / 4.0]
    }
    fn w_t(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [-x * y * y / 2.0 + x * t * t / 2.0, y * t / 2.0]
    }
    fn grad_w(&self, x: Point, t: f64) -> Tensor {
        let (x, y) = (x[0], x[1]);
        [[-t * y * y / 2.0 + t.powi(3) / 6.0, -t * x * y], [0.0, t * t / 4.0]]
    }
    fn sigma(&self, x: Point, t: f64) -> Tensor {
        let q = t * t * (x[1] * x[1] - x[0] * x[0]) / 4.0;
        let c = t.powi(3) / 6.0;
        [[c - q, 0.0], [0.0, -c - q]]
    }
    fn sigma_t(&self, x: Point, t: f64) -> Tensor {
        let q = t * (x[1] * x[1] - x[0] * x[0]) / 2.0;
        let c = t * t / 2.0;
        [[c - q, 0.0], [0.0, -c - q]]
    }
    fn div_sigma(&self, x: Point, t: f64) -> [f64; 2] {
        [t * t * x[0] / 2.0, -t * t * x[1] / 2.0]
    }
    fn u_f(&self, x: Point, t: f64) -> [f64; 2] {
        [t * t * x[0] / 2.0, -t * t * x[1] / 2.0]
    }
    fn p_f(&self, x: Point, t: f64) -> f64 {
        t * (x[1] * x[1] - x[0] * x[0]) / 2.0
    }
    fn f_p(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [x / 2.0 - 2.0 * t * x, y / 2.0 - y * t]
    }
    fn g_p(&self, x: Point, t: f64) -> [f64; 2] {
        let (x, y) = (x[0], x[1]);
        [x / 2.0 + x * t - x * y * y / 2.0 + x * t * t / 2.0, y + y * t / 2.0]
    }
    fn interface_extra(&self, _x: Point, t: f64) -> [f64; 5] {
        [0.0, 0.0, -t.powi(3) / 6.0 + 0.75 * t * t, 0.0, 0.0]
    }
}

/// Trigonometric solution on the same geometry, decaying like e^{-t}.
pub struct Test2;

impl Test2 {
    fn sc(x: Point) -> (f64, f64) {
        let a = x[0] - x[1];
        (a.sin(), a.cos())
    }
}

impl ExactSolution for Test2 {
    fn u(&self, x: Point, t: f64) -> [f64; 2] {
        let s = Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn u_t(&self, x: Point, t: f64) -> [f64; 2] {
        let s = -Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn grad_u(&self, x: Point, t: f64) -> Tensor {
        let c = Self::sc(x).1 * (-t).exp();
        [[c, -c], [c, -c]]
    }
    fn w(&self, x: Point, t: f64) -> [f64; 2] {
        let s = -Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn w_t(&self, x: Point, t: f64) -> [f64; 2] {
        let s = Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn grad_w(&self, x: Point, t: f64) -> Tensor {
        let c = -Self::sc(x).1 * (-t).exp();
        [[c, -c], [c, -c]]
    }
    fn sigma(&self, x: Point, t: f64) -> Tensor {
        let c = Self::sc(x).1 * ((-t).exp() - 1.0);
        [[c, 0.0], [0.0, -c]]
    }
    fn sigma_t(&self, x: Point, t: f64) -> Tensor {
        let c = -Self::sc(x).1 * (-t).exp();
        [[c, 0.0], [0.0, -c]]
    }
    fn div_sigma(&self, x: Point, t: f64) -> [f64; 2] {
        let s = Self::sc(x).0 * (1.0 - (-t).exp());
        [s, s]
    }
    fn r(&self, x: Point, t: f64) -> f64 {
        (-t).exp() * Self::sc(x).1
    }
    fn u_f(&self, x: Point, t: f64) -> [f64; 2] {
        let s = -Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn h(&self, x: Point, _t: f64) -> [f64; 2] {
        let s = -Self::sc(x).0;
        [s, s]
    }
    fn grad_h(&self, x: Point, _t: f64) -> Tensor {
        let c = Self::sc(x).1;
        [[-c, c], [-c, c]]
    }
    fn f_p(&self, x: Point, t: f64) -> [f64; 2] {
        let s = Self::sc(x).0 * (-t).exp();
        [s, s]
    }
    fn interface_extra(&self, x: Point, t: f64) -> [f64; 5] {
        let e = (-t).exp() * x[1].cos();
        [0.0, -e, 3.0 * e, 0.0, 0.0]
    }
}

/// A reference problem together with its parameter set.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub material: MaterialSet,
    pub exact: Arc<dyn ExactSolution>,
}

impl ManufacturedCase {
    pub fn test1() -> Self {
        ManufacturedCase { name: "test1".into(), material: MaterialSet::preset("test1").unwrap(), exact: Arc::new(Test1) }
    }

    pub fn test2() -> Self {
        ManufacturedCase { name: "test2".into(), material: MaterialSet::preset("test2").unwrap(), exact: Arc::new(Test2) }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "test1" => Some(Self::test1()),
            "test2" => Some(Self::test2()),
            _ => None,
        }
    }

    pub fn pore_pressure(&self, x: Point, t: f64) -> f64 {
        let p = &self.material.p;
        let (gu, gw) = (self.exact.grad_u(x, t), self.exact.grad_w(x, t));
        pore_pressure(gu[0][0] + gu[1][1], gw[0][0] + gw[1][1], p.m, p.beta)
    }

    /// Total poroelastic stress σ_e(u) − β p_p I.
    pub fn total_stress(&self, x: Point, t: f64) -> Tensor {
        let p = &self.material.p;
        let mut s = elastic_stress(&sym(&self.exact.grad_u(x, t)), p.lambda, p.mu);
        let pp = self.pore_pressure(x, t);
        s[0][0] -= p.beta * pp;
        s[1][1] -= p.beta * pp;
        s
    }

    /// Data for every boundary type, taken from the exact fields.
    pub fn sources(&self) -> Sources {
        let e = self.exact.clone();
        let (e1, e2, e3, e4, e5, e6, e7, e8) = (e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), e.clone(), e.clone());
        let me = self.clone();
        let me2 = self.clone();
        Sources {
            f_p: Some(Arc::new(move |x, t| e1.f_p(x, t))),
            g_p: Some(Arc::new(move |x, t| e2.g_p(x, t))),
            fluid: Some(FluidForcing::Potential {
                h: Arc::new(move |x, t| e3.h(x, t)),
                grad_h: Arc::new(move |x, t| e4.grad_h(x, t)),
            }),
            u_d: Some(Arc::new(move |x, t| e5.u(x, t))),
            w_d: Some(Arc::new(move |x, t| e6.w(x, t))),
            traction_p: Some(Arc::new(move |x, n, t| apply(&me.total_stress(x, t), n))),
            pressure_p: Some(Arc::new(move |x, t| me2.pore_pressure(x, t))),
            velocity_f: Some(Arc::new(move |x, t| e7.u_f(x, t))),
            traction_f: Some(Arc::new(move |x, n, t| apply(&e8.sigma(x, t), n))),
            interface_extra: Some({
                let e = e.clone();
                Arc::new(move |x, t| e.interface_extra(x, t))
            }),
        }
    }
}

/// Zero solution, convenient for homogeneous runs.
pub struct ZeroSolution;
impl ExactSolution for ZeroSolution {}
