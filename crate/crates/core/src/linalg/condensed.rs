//! Direct solve through exact elimination of "x_i − τ y_j = b_i" rows followed
//! by a sparse LDLᵀ of the row-scaled (symmetric) remainder.
//!
//! The remainder is typically quasi-definite with a zero diagonal block for
//! Lagrange multipliers; those unknowns are ordered after all of their
//! neighbours so that no pivoting is needed.

use super::sparse::{CsrMatrix, Triplets};
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::perm::PermRef;
use faer::sparse::linalg::amd;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::{Conj, Mat, Side};

/// How to condense: `eliminate[k] = (x, y)` removes unknown x using the row
/// x − τ y = b_x; `row_scale[i]` multiplies every retained row i.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub eliminate: Vec<(usize, usize)>,
    pub tau: f64,
    pub row_scale: Vec<f64>,
}

pub struct CondensedLdlt {
    keep: Vec<usize>,
    elim: Vec<(usize, usize)>,
    is_elim: Vec<bool>,
    tau: f64,
    scale: Vec<f64>,
    k: CsrMatrix,
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
}

/// Why a matrix does not admit the condensed path.
#[derive(Debug, Clone, PartialEq)]
pub enum CondenseRefusal {
    EliminatedRow(usize),
    Asymmetric(f64),
    Factorization(String),
}

impl CondensedLdlt {
    pub fn new(k: &CsrMatrix, c: &Condensation) -> Result<Self, CondenseRefusal> {
        let n = k.nrows;
        let mut is_elim = vec![false; n];
        for &(x, y) in &c.eliminate {
            is_elim[x] = true;
            let scale = k.get(x, x).abs().max(c.tau);
            let ok = k.row(x).all(|(j, v)| {
                let want = if j == x { 1.0 } else if j == y { -c.tau } else { 0.0 };
                (v - want).abs() <= 1e-14 * scale
            });
            if !ok || (k.get(x, y) + c.tau).abs() > 1e-14 * scale {
                return Err(CondenseRefusal::EliminatedRow(x));
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&i| !is_elim[i]).collect();
        let mut red = vec![usize::MAX; n];
        for (r, &g) in keep.iter().enumerate() {
            red[g] = r;
        }
        let mut partner = vec![usize::MAX; n];
        for &(x, y) in &c.eliminate {
            partner[x] = y;
        }
        let m = keep.len();
        let mut t = Triplets::new(m, m);
        for (r, &g) in keep.iter().enumerate() {
            let s = c.row_scale[g];
            for (j, v) in k.row(g) {
                if is_elim[j] {
                    t.push(r, red[partner[j]], s * v * c.tau);
                } else {
                    t.push(r, red[j], s * v);
                }
            }
        }
        let kr = t.to_csr();
        let asym = kr.asymmetry();
        if !(asym <= 1e-10) {
            return Err(CondenseRefusal::Asymmetric(asym));
        }
        let (fwd, inv) = ordering(&kr).map_err(CondenseRefusal::Factorization)?;
        let a = kr.to_faer();
        let fail = |e: String| CondenseRefusal::Factorization(e);
        let symbolic = factorize_symbolic_cholesky(
            a.symbolic(),
            Side::Lower,
            SymmetricOrdering::Custom(PermRef::new_checked(&fwd, &inv, m)),
            Default::default(),
        )
        .map_err(|e| fail(format!("{e:?}")))?;
        let mut values = vec![0.0; symbolic.len_val()];
        let par = faer::get_global_parallelism();
        let mut mem = MemBuffer::try_new(symbolic.factorize_numeric_ldlt_scratch::<f64>(par, Default::default()))
            .map_err(|e| fail(format!("{e:?}")))?;
        symbolic
            .factorize_numeric_ldlt(
                &mut values,
                a.as_ref(),
                Side::Lower,
                LdltRegularization::default(),
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| fail(format!("{e:?}")))?;
        log::debug!("condensed LDLᵀ: {m} of {n} unknowns, {} factor entries", values.len());
        Ok(CondensedLdlt {
            keep,
            elim: c.eliminate.clone(),
            is_elim,
            tau: c.tau,
            scale: c.row_scale.clone(),
            k: k.clone(),
            symbolic,
            values,
        })
    }

    pub fn factor_entries(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.keep.len();
        let mut rhs = Mat::from_fn(m, 1, |r, _| {
            let g = self.keep[r];
            let coupled: f64 = self.k.row(g).filter(|(j, _)| self.is_elim[*j]).map(|(j, v)| v * b[j]).sum();
            self.scale[g] * (b[g] - coupled)
        });
        let par = faer::get_global_parallelism();
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, par));
        LdltRef::new(&self.symbolic, &self.values).solve_in_place_with_conj(Conj::No, rhs.as_mut(), par, MemStack::new(&mut mem));
        let mut x = vec![0.0; b.len()];
        for (r, &g) in self.keep.iter().enumerate() {
            x[g] = rhs[(r, 0)];
        }
        for &(xi, y) in &self.elim {
            x[xi] = b[xi] + self.tau * x[y];
        }
        x
    }
}

/// AMD, then every zero-diagonal unknown is moved behind all of its neighbours.
fn ordering(a: &CsrMatrix) -> Result<(Vec<usize>, Vec<usize>), String> {
    let n = a.nrows;
    let f = a.to_faer();
    let (mut fwd, mut inv) = (vec![0usize; n], vec![0usize; n]);
    let nnz = f.compute_nnz();
    let mut mem = MemBuffer::try_new(amd::order_scratch::<usize>(n, nnz)).map_err(|e| format!("{e:?}"))?;
    amd::order(&mut fwd, &mut inv, f.symbolic(), Default::default(), MemStack::new(&mut mem)).map_err(|e| format!("{e:?}"))?;
    let key = |i: usize| {
        if a.get(i, i) != 0.0 {
            (inv[i], 0)
        } else {
            (a.row(i).map(|(j, _)| inv[j]).fold(inv[i], usize::max), 1)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (key(i), inv[i]));
    for (p, &i) in order.iter().enumerate() {
        inv[i] = p;
    }
    Ok((order, inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// [x; v; s; r] with x − τv = b, a symmetric-after-scaling coupling
    /// between v and s and a multiplier r on s.
    fn model(tau: f64) -> (CsrMatrix, Condensation) {
        let mut t = Triplets::new(6, 6);
        // x0, x1 | v2, v3 | s4 | r5
        for (x, v) in [(0, 2), (1, 3)] {
            t.push(x, x, 1.0);
            t.push(x, v, -tau);
        }
        let m = [[2.0, 0.5], [0.5, 3.0]];
        let e = [[4.0, -1.0], [-1.0, 5.0]];
        for i in 0..2 {
            for j in 0..2 {
                t.push(2 + i, 2 + j, m[i][j]);
                t.push(2 + i, j, tau * e[i][j]);
            }
        }
        let c = [0.7, -0.2];
        for i in 0..2 {
            t.push(2 + i, 4, -c[i]);
            t.push(4, 2 + i, tau * c[i]);
        }
        t.push(4, 4, 1.5);
        t.push(4, 5, tau * 0.9);
        t.push(5, 4, 0.9);
        let k = t.to_csr();
        let cond = Condensation {
            eliminate: vec![(0, 2), (1, 3)],
            tau,
            row_scale: vec![1.0, 1.0, 1.0, 1.0, -1.0 / tau, -1.0],
        };
        (k, cond)
    }

    #[test]
    fn matches_dense_solution() {
        let (k, c) = model(0.05);
        let s = CondensedLdlt::new(&k, &c).unwrap();
        let b = [0.3, -1.0, 2.0, 0.5, -0.7, 1.1];
        let x = s.solve(&b);
        let r = k.matvec(&x);
        for i in 0..6 {
            assert!((r[i] - b[i]).abs() < 1e-12, "row {i}: {} vs {}", r[i], b[i]);
        }
    }

    #[test]
    fn refuses_unstructured_input() {
        let (mut k, c) = model(0.05);
        let p = k.indptr[0];
        k.values[p] = 2.0;
        assert!(matches!(CondensedLdlt::new(&k, &c), Err(CondenseRefusal::EliminatedRow(0))));
        let (k, mut c) = model(0.05);
        c.row_scale[4] = 1.0;
        assert!(matches!(CondensedLdlt::new(&k, &c), Err(CondenseRefusal::Asymmetric(_))));
    }
}
