//! Data functions entering the load vector.

use crate::geometry::Point;
use crate::space::tensor::Tensor;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Point, f64) -> Tensor + Send + Sync>;
/// Boundary data depending on the outward normal: (x, n, t).
pub type NormalVectorFn = Arc<dyn Fn(Point, [f64; 2], f64) -> [f64; 2] + Send + Sync>;
/// The five interface residuals f1..f5 at (x, t).
pub type InterfaceFn = Arc<dyn Fn(Point, f64) -> [f64; 5] + Send + Sync>;

/// How the fluid potential H = ∫₀ᵗ h_f + u_f0 is obtained.
#[derive(Clone)]
pub enum FluidForcing {
    /// H and its gradient (∇H)_ij = ∂_j H_i in closed form.
    Potential { h: VectorFn, grad_h: TensorFn },
    /// Body force rate h_f integrated by the composite trapezoid rule with step `dt`.
    Rate { h_f: VectorFn, grad_h_f: TensorFn, u_f0: VectorFn, grad_u_f0: TensorFn, dt: f64 },
}

fn trapezoid<T: Copy>(t: f64, dt: f64, f: impl Fn(f64) -> T, add: impl Fn(T, T, f64) -> T, zero: T) -> T {
    if t <= 0.0 {
        return zero;
    }
    let mut acc = zero;
    let mut s = 0.0;
    let mut prev = f(0.0);
    while s < t - 1e-14 * t.max(1.0) {
        let e = (s + dt).min(t);
        let cur = f(e);
        acc = add(acc, add(prev, cur, 1.0), 0.5 * (e - s));
        prev = cur;
        s = e;
    }
    acc
}

fn add_vec(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    // a + s·b
    [a[0] + s * b[0], a[1] + s * b[1]]
}

fn add_ten(a: Tensor, b: Tensor, s: f64) -> Tensor {
    let mut r = a;
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] += s * b[i][j];
        }
    }
    r
}

impl FluidForcing {
    pub fn zero() -> Self {
        FluidForcing::Potential { h: Arc::new(|_, _| [0.0; 2]), grad_h: Arc::new(|_, _| [[0.0; 2]; 2]) }
    }

    pub fn h(&self, x: Point, t: f64) -> [f64; 2] {
        match self {
            FluidForcing::Potential { h, .. } => h(x, t),
            FluidForcing::Rate { h_f, u_f0, dt, .. } => {
                let i = trapezoid(t, *dt, |s| h_f(x, s), add_vec, [0.0; 2]);
                add_vec(i, u_f0(x, t), 1.0)
            }
        }
    }

    pub fn grad_h(&self, x: Point, t: f64) -> Tensor {
        match self {
            FluidForcing::Potential { grad_h, .. } => grad_h(x, t),
            FluidForcing::Rate { grad_h_f, grad_u_f0, dt, .. } => {
                let i = trapezoid(t, *dt, |s| grad_h_f(x, s), add_ten, [[0.0; 2]; 2]);
                add_ten(i, grad_u_f0(x, t), 1.0)
            }
        }
    }
}

/// All volume, boundary and interface data. Entries left `None` are reported by
/// name when the mesh needs them.
#[derive(Clone, Default)]
pub struct Sources {
    /// Momentum source of the solid equation.
    pub f_p: Option<VectorFn>,
    /// Momentum source of the filtration equation.
    pub g_p: Option<VectorFn>,
    pub fluid: Option<FluidForcing>,
    /// Dirichlet displacement data on Γ_p^D.
    pub u_d: Option<VectorFn>,
    pub w_d: Option<VectorFn>,
    /// Total traction σ_p n on Γ_p^N.
    pub traction_p: Option<NormalVectorFn>,
    /// Pore pressure on Γ_p^N.
    pub pressure_p: Option<ScalarFn>,
    /// Fluid velocity on Γ_f^D.
    pub velocity_f: Option<VectorFn>,
    /// Σ n on Γ_f^N.
    pub traction_f: Option<NormalVectorFn>,
    /// Residuals of the transmission conditions; absent means zero.
    pub interface_extra: Option<InterfaceFn>,
}

impl Sources {
    pub fn zero() -> Sources {
        let v: VectorFn = Arc::new(|_, _| [0.0; 2]);
        let nv: NormalVectorFn = Arc::new(|_, _, _| [0.0; 2]);
        Sources {
            f_p: Some(v.clone()),
            g_p: Some(v.clone()),
            fluid: Some(FluidForcing::zero()),
            u_d: Some(v.clone()),
            w_d: Some(v.clone()),
            traction_p: Some(nv.clone()),
            pressure_p: Some(Arc::new(|_, _| 0.0)),
            velocity_f: Some(v),
            traction_f: Some(nv),
            interface_extra: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_matches_closed_form() {
        // h_f = (t, 1) ⇒ H = (t²/2, t) + u_f0; trapezoid is exact for linear integrands
        let f = FluidForcing::Rate {
            h_f: Arc::new(|_, t| [t, 1.0]),
            grad_h_f: Arc::new(|_, _| [[0.0; 2]; 2]),
            u_f0: Arc::new(|x, _| [x[0], 0.0]),
            grad_u_f0: Arc::new(|_, _| [[1.0, 0.0], [0.0, 0.0]]),
            dt: 0.1,
        };
        let h = f.h([2.0, 0.0], 0.35);
        assert!((h[0] - (0.35f64.powi(2) / 2.0 + 2.0)).abs() < 1e-14);
        assert!((h[1] - 0.35).abs() < 1e-14);
        assert_eq!(f.grad_h([0.0, 0.0], 0.3)[0][0], 1.0);
        assert_eq!(f.h([1.0, 0.0], 0.0), [1.0, 0.0]);
    }

    #[test]
    fn trapezoid_second_order() {
        let err = |dt: f64| {
            let f = FluidForcing::Rate {
                h_f: Arc::new(|_, t: f64| [t.exp(), 0.0]),
                grad_h_f: Arc::new(|_, _| [[0.0; 2]; 2]),
                u_f0: Arc::new(|_, _| [0.0; 2]),
                grad_u_f0: Arc::new(|_, _| [[0.0; 2]; 2]),
                dt,
            };
            (f.h([0.0, 0.0], 1.0)[0] - (1f64.exp() - 1.0)).abs()
        };
        let r = (err(0.02) / err(0.01)).log2();
        assert!((r - 2.0).abs() < 0.05, "{r}");
    }
}
