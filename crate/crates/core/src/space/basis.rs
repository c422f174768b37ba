//! Bounding-box scaled monomials, orthonormalized in the L² product of one cell.

use crate::geometry::Point;
use crate::quadrature::QuadratureRule;
use faer::{Mat, Side};

pub fn scalar_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Exponents (a, b) of x^a y^b ordered by total degree, so the first
/// `scalar_dim(q)` entries span P_q.
pub fn exponents(p: usize) -> Vec<(u32, u32)> {
    let mut e = Vec::with_capacity(scalar_dim(p));
    for k in 0..=p as u32 {
        for j in 0..=k {
            e.push((k - j, j));
        }
    }
    e
}

#[derive(Debug, Clone)]
pub struct CellBasis {
    pub degree: usize,
    pub center: Point,
    pub half: Point,
    exps: Vec<(u32, u32)>,
    /// Lower-triangular n x n, row i holds mode i in monomial coefficients.
    coeffs: Vec<f64>,
}

impl CellBasis {
    /// Orthonormalize against `rule`, which must integrate degree 2p exactly on the cell.
    pub fn new(degree: usize, lo: Point, hi: Point, rule: &QuadratureRule) -> CellBasis {
        let n = scalar_dim(degree);
        let mut b = CellBasis {
            degree,
            center: [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
            half: [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])],
            exps: exponents(degree),
            coeffs: vec![0.0; n * n],
        };
        for i in 0..n {
            b.coeffs[i * n + i] = 1.0;
        }
        // two Gram-Cholesky passes bring the Gram matrix to identity at round-off level
        for _ in 0..2 {
            let g = b.gram(rule);
            let l = Mat::from_fn(n, n, |i, j| g[i * n + j]).llt(Side::Lower).expect("monomial Gram matrix is SPD");
            let mut inv = Mat::<f64>::identity(n, n);
            l.L().solve_lower_triangular_in_place(inv.as_mut());
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let mut s = 0.0;
                    for k in j..=i {
                        s += inv[(i, k)] * b.coeffs[k * n + j];
                    }
                    next[i * n + j] = s;
                }
            }
            b.coeffs = next;
        }
        b
    }

    pub fn n_modes(&self) -> usize {
        self.exps.len()
    }

    fn monomials(&self, x: Point, m: &mut [f64], dm: &mut [[f64; 2]]) {
        let xi = (x[0] - self.center[0]) / self.half[0];
        let eta = (x[1] - self.center[1]) / self.half[1];
        let p = self.degree;
        let mut px = vec![1.0; p + 1];
        let mut py = vec![1.0; p + 1];
        for k in 1..=p {
            px[k] = px[k - 1] * xi;
            py[k] = py[k - 1] * eta;
        }
        for (k, &(a, b)) in self.exps.iter().enumerate() {
            let (a, b) = (a as usize, b as usize);
            m[k] = px[a] * py[b];
            dm[k] = [
                if a > 0 { a as f64 * px[a - 1] * py[b] / self.half[0] } else { 0.0 },
                if b > 0 { b as f64 * px[a] * py[b - 1] / self.half[1] } else { 0.0 },
            ];
        }
    }

    /// Values and gradients of all modes at `x`.
    pub fn eval_into(&self, x: Point, val: &mut [f64], grad: &mut [[f64; 2]]) {
        let n = self.n_modes();
        let mut m = vec![0.0; n];
        let mut dm = vec![[0.0; 2]; n];
        self.monomials(x, &mut m, &mut dm);
        for i in 0..n {
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for j in 0..=i {
                let c = self.coeffs[i * n + j];
                v += c * m[j];
                gx += c * dm[j][0];
                gy += c * dm[j][1];
            }
            val[i] = v;
            grad[i] = [gx, gy];
        }
    }

    pub fn eval(&self, x: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let n = self.n_modes();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        self.eval_into(x, &mut v, &mut g);
        (v, g)
    }

    pub fn gram(&self, rule: &QuadratureRule) -> Vec<f64> {
        let n = self.n_modes();
        let mut g = vec![0.0; n * n];
        let mut v = vec![0.0; n];
        let mut d = vec![[0.0; 2]; n];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            self.eval_into(*x, &mut v, &mut d);
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::cell_quadrature;

    fn pentagon() -> Vec<Point> {
        vec![[0.0, 0.0], [2.0, 0.1], [2.4, 1.3], [1.0, 2.0], [-0.3, 1.1]]
    }

    #[test]
    fn orthonormal_on_pentagon() {
        let poly = pentagon();
        let c = crate::geometry::centroid(&poly);
        let (lo, hi) = crate::geometry::bounding_box(&poly);
        for p in 1..=5 {
            let q = cell_quadrature(&poly, c, 2 * p).unwrap();
            let b = CellBasis::new(p, lo, hi, &q);
            let g = b.gram(&q);
            let n = b.n_modes();
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * n + j] - e).abs() < 1e-10, "p={p} ({i},{j}) {}", g[i * n + j]);
                }
            }
            let area = crate::geometry::signed_area(&poly);
            let (v, d) = b.eval([0.7, 0.9]);
            assert!((v[0] - 1.0 / area.sqrt()).abs() < 1e-12);
            assert!(d[0][0].abs() < 1e-12 && d[0][1].abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_differences() {
        let poly = pentagon();
        let c = crate::geometry::centroid(&poly);
        let (lo, hi) = crate::geometry::bounding_box(&poly);
        let q = cell_quadrature(&poly, c, 8).unwrap();
        let b = CellBasis::new(4, lo, hi, &q);
        let x = [1.1, 0.8];
        let h = 1e-6;
        let (_, g) = b.eval(x);
        let (vxp, _) = b.eval([x[0] + h, x[1]]);
        let (vxm, _) = b.eval([x[0] - h, x[1]]);
        let (vyp, _) = b.eval([x[0], x[1] + h]);
        let (vym, _) = b.eval([x[0], x[1] - h]);
        for i in 0..b.n_modes() {
            let fx = (vxp[i] - vxm[i]) / (2.0 * h);
            let fy = (vyp[i] - vym[i]) / (2.0 * h);
            let scale = g[i][0].abs().max(g[i][1].abs()).max(1.0);
            assert!((fx - g[i][0]).abs() < 1e-6 * scale);
            assert!((fy - g[i][1]).abs() < 1e-6 * scale);
        }
    }
}
