//! θ-method time stepping of M Ẋ + A X = F.

use crate::analysis::manufactured::ExactSolution;
use crate::assembly::{AssembledSystem, AssemblyError};
use crate::linalg::{gmres, BlockJacobi, Condensation, CsrMatrix, DirectSolver, SolverError, SolverKind};
use crate::space::{Block, Discretization};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("theta must lie in [1/2, 1], got {0}")]
    Theta(f64),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
    #[error("final time {t_final} is not an integer multiple of dt = {dt}")]
    NotMultiple { t_final: f64, dt: f64 },
    #[error("step {step}: {source}")]
    Solver { step: usize, source: SolverError },
    #[error("non-finite value in block {block} at step {step}")]
    NonFinite { step: usize, block: &'static str },
    #[error("load assembly failed: {0}")]
    Load(#[from] AssemblyError),
    #[error("state has {got} entries, system has {expected}")]
    Size { got: usize, expected: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub k: usize,
    pub x: Vec<f64>,
}

impl SimState {
    pub fn zeros(n: usize) -> Self {
        SimState { t: 0.0, k: 0, x: vec![0.0; n] }
    }

    pub fn block<'a>(&'a self, d: &Discretization, b: Block) -> &'a [f64] {
        &self.x[d.space.layout.range(b)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaScheme {
    pub theta: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub solver: SolverKind,
}

impl ThetaScheme {
    pub fn new(theta: f64, dt: f64, t_final: f64, solver: SolverKind) -> Result<Self, StepError> {
        if !(0.5..=1.0).contains(&theta) {
            return Err(StepError::Theta(theta));
        }
        if !(dt > 0.0) {
            return Err(StepError::TimeStep(dt));
        }
        let r = t_final / dt;
        let n = r.round();
        if (r - n).abs() > 1e-9 * r.max(1.0) || n < 1.0 {
            return Err(StepError::NotMultiple { t_final, dt });
        }
        Ok(ThetaScheme { theta, dt, n_steps: n as usize, solver })
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }
}

/// L² projection of the initial data. Projecting r_f(t0) as well matters for
/// θ = 1/2: only θR^{k+1} + (1-θ)R^k is constrained, so a wrong R^0 persists
/// as an undamped oscillation.
pub fn project_initial(d: &Discretization, exact: &dyn ExactSolution, t0: f64) -> SimState {
    let l = &d.space.layout;
    let mut x = vec![0.0; l.ndof()];
    let put = |x: &mut Vec<f64>, b: Block, v: Vec<f64>| x[l.range(b)].copy_from_slice(&v);
    put(&mut x, Block::U, d.project_pvec(|p| exact.u(p, t0)));
    put(&mut x, Block::W, d.project_pvec(|p| exact.w(p, t0)));
    put(&mut x, Block::V, d.project_pvec(|p| exact.u_t(p, t0)));
    put(&mut x, Block::Z, d.project_pvec(|p| exact.w_t(p, t0)));
    put(&mut x, Block::S, d.project_ften(|p| exact.sigma(p, t0)));
    put(&mut x, Block::R, d.project_fr(|p| exact.r(p, t0)));
    SimState { t: t0, k: 0, x }
}

enum LinearSolver {
    Direct(DirectSolver),
    Iterative { k: CsrMatrix, pre: BlockJacobi, tol: f64, restart: usize, max_iter: usize },
}

/// Factorized θ-scheme operator for a fixed (Δt, θ).
pub struct Stepper {
    pub scheme: ThetaScheme,
    rhs: CsrMatrix,
    solver: LinearSolver,
    n: usize,
}

fn cell_groups(d: &Discretization) -> Vec<Vec<usize>> {
    let l = &d.space.layout;
    (0..d.mesh.n_cells())
        .map(|c| {
            let mut g = Vec::new();
            match d.mesh.cells[c].region {
                crate::mesh::Region::Poro => {
                    for b in [Block::U, Block::W, Block::V, Block::Z] {
                        for a in 0..2 {
                            let o = l.range(b).start + l.pvec(c, a);
                            g.extend(o..o + l.n_p);
                        }
                    }
                }
                crate::mesh::Region::Fluid => {
                    for a in 0..2 {
                        for b in 0..2 {
                            let o = l.range(Block::S).start + l.ften(c, a, b);
                            g.extend(o..o + l.n_f);
                        }
                    }
                    let o = l.range(Block::R).start + l.fr(c);
                    g.extend(o..o + l.n_r);
                }
            }
            g
        })
        .collect()
}

/// Displacement rows U − τV = b, W − τZ = b are eliminated; scaling the S rows
/// by −1/τ and the R rows by −1 makes the remaining operator symmetric.
fn condensation(d: &Discretization, tau: f64) -> Condensation {
    let l = &d.space.layout;
    let mut eliminate = Vec::with_capacity(2 * l.block_len(Block::U));
    for (x, y) in [(Block::U, Block::V), (Block::W, Block::Z)] {
        eliminate.extend(l.range(x).zip(l.range(y)));
    }
    let mut row_scale = vec![1.0; l.ndof()];
    row_scale[l.range(Block::S)].fill(-1.0 / tau);
    row_scale[l.range(Block::R)].fill(-1.0);
    Condensation { eliminate, tau, row_scale }
}

impl Stepper {
    pub fn new(d: &Discretization, sys: &AssembledSystem, scheme: ThetaScheme) -> Result<Self, StepError> {
        Self::build(&sys.m, &sys.a, scheme, || cell_groups(d), Some(condensation(d, scheme.theta * scheme.dt)))
    }

    /// Build from raw M and A; `groups` gives the block-Jacobi index sets for the iterative solver.
    pub fn from_matrices(
        m: &CsrMatrix,
        a: &CsrMatrix,
        scheme: ThetaScheme,
        groups: impl FnOnce() -> Vec<Vec<usize>>,
    ) -> Result<Self, StepError> {
        Self::build(m, a, scheme, groups, None)
    }

    fn build(
        m: &CsrMatrix,
        a: &CsrMatrix,
        scheme: ThetaScheme,
        groups: impl FnOnce() -> Vec<Vec<usize>>,
        cond: Option<Condensation>,
    ) -> Result<Self, StepError> {
        let (th, dt) = (scheme.theta, scheme.dt);
        let k = m.lin_comb(1.0, a, dt * th);
        let rhs = m.lin_comb(1.0, a, -dt * (1.0 - th));
        let solver = match scheme.solver {
            SolverKind::Direct => {
                let f = match &cond {
                    Some(c) => DirectSolver::with_condensation(&k, c),
                    None => DirectSolver::new(&k),
                };
                LinearSolver::Direct(f.map_err(|source| StepError::Solver { step: 0, source })?)
            }
            SolverKind::Iterative { tol, restart, max_iter } => {
                let pre = BlockJacobi::new(&k, groups());
                LinearSolver::Iterative { k, pre, tol, restart, max_iter }
            }
        };
        Ok(Stepper { scheme, rhs, solver, n: m.nrows })
    }

    /// One step X^k → X^{k+1} given F(t_k) and F(t_{k+1}).
    pub fn step(&self, s: &SimState, f_k: &[f64], f_k1: &[f64]) -> Result<SimState, StepError> {
        if s.x.len() != self.n {
            return Err(StepError::Size { got: s.x.len(), expected: self.n });
        }
        let (th, dt) = (self.scheme.theta, self.scheme.dt);
        let mut b = self.rhs.matvec(&s.x);
        for i in 0..b.len() {
            b[i] += dt * (th * f_k1[i] + (1.0 - th) * f_k[i]);
        }
        let step = s.k + 1;
        let x = match &self.solver {
            LinearSolver::Direct(lu) => lu.solve(&b),
            LinearSolver::Iterative { k, pre, tol, restart, max_iter } => gmres(k, pre, &b, &s.x, *tol, *restart, *max_iter),
        }
        .map_err(|source| StepError::Solver { step, source })?;
        Ok(SimState { t: self.scheme.time(step), k: step, x })
    }
}

/// Per-step record kept by `run`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    pub energy: f64,
    pub energy_p: f64,
    pub energy_f: f64,
    /// ‖B^{fT} S‖∞ / ‖S‖∞ (0 when S = 0).
    pub weak_symmetry: f64,
}

pub struct RunOutput {
    pub final_state: SimState,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<SimState>,
    /// State one step before each snapshot (None for the initial one).
    pub snapshot_previous: Vec<Option<SimState>>,
    /// State one step before the final one, for backward-difference rates.
    pub previous: Option<SimState>,
}

pub fn weak_symmetry_residual(d: &Discretization, sys: &AssembledSystem, x: &[f64]) -> f64 {
    let s = &x[d.space.layout.range(Block::S)];
    let sn = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sn == 0.0 {
        return 0.0;
    }
    let r = sys.blocks.fluid.b_f.transpose().matvec(s);
    r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / sn
}

fn check_finite(d: &Discretization, s: &SimState) -> Result<(), StepError> {
    for b in Block::ALL {
        if s.x[d.space.layout.range(b)].iter().any(|v| !v.is_finite()) {
            return Err(StepError::NonFinite { step: s.k, block: b.name() });
        }
    }
    Ok(())
}

/// Advance N_T steps, recording energy and weak symmetry, with snapshots every `stride` steps (0 = none).
pub fn run(
    d: &Discretization,
    sys: &AssembledSystem,
    stepper: &Stepper,
    init: SimState,
    mut load: impl FnMut(f64) -> Result<Vec<f64>, AssemblyError>,
    stride: usize,
) -> Result<RunOutput, StepError> {
    let record = |s: &SimState| {
        let (e, ep, ef) = crate::analysis::discrete_energy(d, &sys.blocks, &s.x);
        StepRecord { k: s.k, t: s.t, energy: e, energy_p: ep, energy_f: ef, weak_symmetry: weak_symmetry_residual(d, sys, &s.x) }
    };
    check_finite(d, &init)?;
    let mut records = vec![record(&init)];
    let mut snapshots = Vec::new();
    let mut snapshot_previous = Vec::new();
    if stride > 0 {
        snapshots.push(init.clone());
        snapshot_previous.push(None);
    }
    let mut f_k = load(init.t)?;
    let mut state = init;
    let mut previous = None;
    for _ in 0..stepper.scheme.n_steps {
        let t1 = stepper.scheme.time(state.k + 1);
        let f_k1 = load(t1)?;
        let next = stepper.step(&state, &f_k, &f_k1)?;
        check_finite(d, &next)?;
        records.push(record(&next));
        if stride > 0 && next.k % stride == 0 {
            snapshots.push(next.clone());
            snapshot_previous.push(Some(state.clone()));
        }
        log::debug!("step {} t = {:.4} E = {:.6e}", next.k, next.t, records.last().unwrap().energy);
        previous = Some(std::mem::replace(&mut state, next));
        f_k = f_k1;
    }
    Ok(RunOutput { final_state: state, records, snapshots, snapshot_previous, previous })
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    ndof: usize,
    offsets: [usize; 7],
    t: f64,
    k: usize,
}

/// JSON header line followed by little-endian f64 values.
pub fn write_checkpoint(d: &Discretization, s: &SimState, path: &Path) -> Result<(), StepError> {
    let err = |e: std::io::Error| StepError::Checkpoint(e.to_string());
    let h = CheckpointHeader { ndof: s.x.len(), offsets: d.space.layout.offsets, t: s.t, k: s.k };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(err)?);
    writeln!(f, "{}", serde_json::to_string(&h).unwrap()).map_err(err)?;
    for v in &s.x {
        f.write_all(&v.to_le_bytes()).map_err(err)?;
    }
    Ok(())
}

pub fn read_checkpoint(d: &Discretization, path: &Path) -> Result<SimState, StepError> {
    let bytes = std::fs::read(path).map_err(|e| StepError::Checkpoint(e.to_string()))?;
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| StepError::Checkpoint("missing header".into()))?;
    let h: CheckpointHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| StepError::Checkpoint(format!("bad header: {e}")))?;
    if h.offsets != d.space.layout.offsets {
        return Err(StepError::Checkpoint("block offsets do not match the discretization".into()));
    }
    let mut body = &bytes[nl + 1..];
    if body.len() != 8 * h.ndof {
        return Err(StepError::Checkpoint(format!("expected {} values, found {} bytes", h.ndof, body.len())));
    }
    let mut x = Vec::with_capacity(h.ndof);
    let mut buf = [0u8; 8];
    for _ in 0..h.ndof {
        body.read_exact(&mut buf).map_err(|e| StepError::Checkpoint(e.to_string()))?;
        x.push(f64::from_le_bytes(buf));
    }
    Ok(SimState { t: h.t, k: h.k, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_validation() {
        assert!(ThetaScheme::new(0.4, 0.1, 1.0, SolverKind::Direct).is_err());
        assert!(ThetaScheme::new(0.5, 0.0, 1.0, SolverKind::Direct).is_err());
        assert!(matches!(ThetaScheme::new(0.5, 0.3, 1.0, SolverKind::Direct), Err(StepError::NotMultiple { .. })));
        assert_eq!(ThetaScheme::new(0.5, 1e-3, 0.1, SolverKind::Direct).unwrap().n_steps, 100);
        assert_eq!(ThetaScheme::new(0.5, 0.01, 1.5, SolverKind::Direct).unwrap().n_steps, 150);
    }

    fn scalar(v: f64) -> CsrMatrix {
        let mut t = crate::linalg::Triplets::new(1, 1);
        t.push(0, 0, v);
        t.to_csr()
    }

    #[test]
    fn scalar_surrogate_step() {
        let sch = ThetaScheme::new(0.5, 0.1, 0.1, SolverKind::Direct).unwrap();
        let st = Stepper::from_matrices(&scalar(1.0), &scalar(1.0), sch, Vec::new).unwrap();
        let x1 = st.step(&SimState { t: 0.0, k: 0, x: vec![1.0] }, &[0.0], &[0.0]).unwrap();
        assert!((x1.x[0] - 0.95 / 1.05).abs() < 1e-15);
        assert_eq!(x1.k, 1);
        let z = st.step(&SimState::zeros(1), &[0.0], &[0.0]).unwrap();
        assert_eq!(z.x[0], 0.0);
    }

    #[test]
    fn crank_nicolson_is_second_order() {
        // x' = -x + cos t, x(0) = 0 has x = (sin t + cos t - e^{-t}) / 2
        let err = |n: usize| {
            let sch = ThetaScheme::new(0.5, 1.0 / n as f64, 1.0, SolverKind::Direct).unwrap();
            let st = Stepper::from_matrices(&scalar(1.0), &scalar(1.0), sch, Vec::new).unwrap();
            let mut s = SimState::zeros(1);
            for _ in 0..n {
                let (f0, f1) = (s.t.cos(), sch.time(s.k + 1).cos());
                s = st.step(&s, &[f0], &[f1]).unwrap();
            }
            (s.x[0] - (1f64.sin() + 1f64.cos() - (-1f64).exp()) / 2.0).abs()
        };
        let order = (err(20) / err(40)).log2();
        assert!(order >= 1.95, "{order}");
    }

    #[test]
    fn gmres_path_matches_direct() {
        let mut t = crate::linalg::Triplets::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 1, 3.0);
        let a = t.to_csr();
        let m = CsrMatrix::identity(2);
        let d = ThetaScheme::new(1.0, 0.1, 0.1, SolverKind::Direct).unwrap();
        let i = ThetaScheme { solver: SolverKind::Iterative { tol: 1e-13, restart: 5, max_iter: 50 }, ..d };
        let s0 = SimState { t: 0.0, k: 0, x: vec![1.0, -2.0] };
        let x = Stepper::from_matrices(&m, &a, d, Vec::new).unwrap().step(&s0, &[0.0; 2], &[1.0, 0.0]).unwrap();
        let y = Stepper::from_matrices(&m, &a, i, || vec![vec![0], vec![1]]).unwrap().step(&s0, &[0.0; 2], &[1.0, 0.0]).unwrap();
        assert!((x.x[0] - y.x[0]).abs() < 1e-12 && (x.x[1] - y.x[1]).abs() < 1e-12);
    }
}
