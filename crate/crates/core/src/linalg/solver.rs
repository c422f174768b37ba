//! Linear solvers for the stepping matrix: sparse LU with refinement, or block-Jacobi GMRES.

use super::condensed::{CondensedLdlt, Condensation};
use super::sparse::CsrMatrix;
use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("singular or ill-conditioned system: backward error {backward_error:.3e} after {refinements} refinement steps (check penalty constants and boundary conditions)")]
    Singular { backward_error: f64, refinements: usize },
    #[error("GMRES did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Iterative { tol: f64, restart: usize, max_iter: usize },
}

impl Default for SolverKind {
    fn default() -> Self {
        SolverKind::Direct
    }
}

/// Normwise backward error ‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞).
pub fn backward_error(a: &CsrMatrix, a_norm: f64, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (q - p).abs()).fold(0.0, f64::max);
    let xn = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let den = a_norm * xn + bn;
    if den == 0.0 {
        if r == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        r / den
    }
}

pub const DIRECT_TOL: f64 = 1e-12;

enum Factor {
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Condensed(CondensedLdlt),
}

pub struct DirectSolver {
    a: CsrMatrix,
    a_norm: f64,
    factor: Factor,
}

impl DirectSolver {
    /// General sparse LU.
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let lu = a.to_faer().sp_lu().map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
        Ok(DirectSolver { a: a.clone(), a_norm: a.norm_inf(), factor: Factor::Lu(lu) })
    }

    /// Condensed LDLᵀ when `a` has the announced structure, sparse LU otherwise.
    pub fn with_condensation(a: &CsrMatrix, c: &Condensation) -> Result<Self, SolverError> {
        match CondensedLdlt::new(a, c) {
            Ok(f) => Ok(DirectSolver { a: a.clone(), a_norm: a.norm_inf(), factor: Factor::Condensed(f) }),
            Err(why) => {
                log::warn!("condensed factorization unavailable ({why:?}); using sparse LU");
                Self::new(a)
            }
        }
    }

    pub fn is_condensed(&self) -> bool {
        matches!(self.factor, Factor::Condensed(_))
    }

    fn raw(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Lu(lu) => {
                let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = lu.solve(&rhs);
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
            Factor::Condensed(f) => f.solve(b),
        }
    }

    /// Solve with up to three refinement steps; fails above the backward-error tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let mut x = self.raw(b);
        let mut eta = backward_error(&self.a, self.a_norm, &x, b);
        let mut steps = 0;
        while !(eta <= 1e-14) && steps < 3 && eta.is_finite() {
            let ax = self.a.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.raw(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let e = backward_error(&self.a, self.a_norm, &cand, b);
            steps += 1;
            if !(e < eta) {
                break;
            }
            x = cand;
            eta = e;
        }
        if !(eta <= DIRECT_TOL) || x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Singular { backward_error: eta, refinements: steps });
        }
        Ok(x)
    }
}

pub struct BlockJacobi {
    groups: Vec<Vec<usize>>,
    lus: Vec<faer::linalg::solvers::PartialPivLu<f64>>,
}

impl BlockJacobi {
    pub fn new(a: &CsrMatrix, groups: Vec<Vec<usize>>) -> Self {
        let mut pos = vec![usize::MAX; a.nrows];
        let lus = groups
            .iter()
            .map(|g| {
                for (k, &i) in g.iter().enumerate() {
                    pos[i] = k;
                }
                let mut m = Mat::<f64>::zeros(g.len(), g.len());
                for (k, &i) in g.iter().enumerate() {
                    for (j, v) in a.row(i) {
                        if pos[j] != usize::MAX && g.get(pos[j]) == Some(&j) {
                            m[(k, pos[j])] = v;
                        }
                    }
                }
                for &i in g {
                    pos[i] = usize::MAX;
                }
                m.partial_piv_lu()
            })
            .collect();
        BlockJacobi { groups, lus }
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = r.to_vec();
        for (g, lu) in self.groups.iter().zip(&self.lus) {
            let rhs = Mat::from_fn(g.len(), 1, |k, _| r[g[k]]);
            let x = lu.solve(&rhs);
            for (k, &i) in g.iter().enumerate() {
                z[i] = x[(k, 0)];
            }
        }
        z
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Right-preconditioned restarted GMRES.
pub fn gmres(
    a: &CsrMatrix,
    pre: &BlockJacobi,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<Vec<f64>, SolverError> {
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = x0.to_vec();
    let mut iters = 0;
    loop {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        if beta / bn <= tol {
            return Ok(x);
        }
        if iters >= max_iter {
            return Err(SolverError::NoConvergence { residual: beta / bn, iterations: iters });
        }
        let m = restart.max(1);
        let mut vs: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && iters < max_iter {
            let z = pre.apply(&vs[k]);
            let mut w = a.matvec(&z);
            zs.push(z);
            for i in 0..=k {
                let hik: f64 = w.iter().zip(&vs[i]).map(|(p, q)| p * q).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&vs[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iters += 1;
            k += 1;
            if g[k].abs() / bn <= tol || hn == 0.0 {
                break;
            }
            vs.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&zs[j]) {
                *xi += yj * zi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::Triplets;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.5);
            }
        }
        t.to_csr()
    }

    #[test]
    fn direct_and_gmres_agree() {
        let a = tridiag(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x = DirectSolver::new(&a).unwrap().solve(&b).unwrap();
        assert!(backward_error(&a, a.norm_inf(), &x, &b) < 1e-14);
        let groups: Vec<Vec<usize>> = (0..10).map(|g| (5 * g..5 * g + 5).collect()).collect();
        let pre = BlockJacobi::new(&a, groups);
        let y = gmres(&a, &pre, &b, &vec![0.0; 50], 1e-12, 20, 500).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        let a = t.to_csr();
        let r = DirectSolver::new(&a).and_then(|s| s.solve(&[1.0, 1.0, 1.0]));
        assert!(r.is_err());
    }
}
