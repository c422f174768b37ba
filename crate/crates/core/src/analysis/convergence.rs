//! Manufactured-solution runs and h-/p-convergence tables.

use super::manufactured::ManufacturedCase;
use super::norms::{error_vs_exact, ErrorReport};
use crate::assembly::{AssembledSystem, PenaltySpec};
use crate::linalg::SolverKind;
use crate::material::MaterialModel;
use crate::mesh::PolyMesh;
use crate::space::Discretization;
use crate::stepper::{project_initial, run, StepRecord, Stepper, ThetaScheme};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Space(#[from] crate::space::SpaceError),
    #[error(transparent)]
    Assembly(#[from] crate::assembly::AssemblyError),
    #[error(transparent)]
    Step(#[from] crate::stepper::StepError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSettings {
    pub t_final: f64,
    pub dt: f64,
    pub theta: f64,
}

impl TimeSettings {
    pub fn manufactured() -> Self {
        TimeSettings { t_final: 0.1, dt: 1e-3, theta: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub h: f64,
    pub ndof: usize,
    pub degree_p: usize,
    pub degree_f: usize,
    pub error: ErrorReport,
    pub max_weak_symmetry: f64,
    #[serde(skip)]
    pub records: Vec<StepRecord>,
}

/// Solve a manufactured case on one mesh and measure the final-time error.
pub fn solve_manufactured(
    mesh: PolyMesh,
    degree_p: usize,
    degree_f: usize,
    case: &ManufacturedCase,
    time: TimeSettings,
    penalty: &PenaltySpec,
    solver: SolverKind,
) -> Result<CaseResult, RunError> {
    let h = mesh.max_diameter(None);
    let d = Discretization::new(mesh, degree_p, degree_f)?;
    let mat = MaterialModel::uniform(&d.mesh, &case.material);
    let sys = AssembledSystem::new(&d, &mat, penalty)?;
    let scheme = ThetaScheme::new(time.theta, time.dt, time.t_final, solver)?;
    let stepper = Stepper::new(&d, &sys, scheme)?;
    let src = case.sources();
    let init = project_initial(&d, case.exact.as_ref(), 0.0);
    let out = run(&d, &sys, &stepper, init, |t| sys.load(&d, &mat, &src, t), 0)?;
    let t = out.final_state.t;
    let error = error_vs_exact(&d, &mat, &sys.blocks.penalty, &out.final_state.x, case.exact.as_ref(), t);
    let max_weak_symmetry = out.records.iter().map(|r| r.weak_symmetry).fold(0.0, f64::max);
    log::info!(
        "{}: h = {h:.4}, p = ({degree_p}, {degree_f}), ndof = {}, E_p error {:.3e}, E_f error {:.3e}",
        case.name,
        d.ndof(),
        error.err_ep,
        error.err_ef
    );
    Ok(CaseResult { h, ndof: d.ndof(), degree_p, degree_f, error, max_weak_symmetry, records: out.records })
}

/// log(e1/e2) / log(h1/h2)
pub fn eoc(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub degree: usize,
    pub ndof: usize,
    pub err_ep: f64,
    pub err_ef: f64,
    pub err_e: f64,
    pub eoc_ep: Option<f64>,
    pub eoc_ef: Option<f64>,
    pub eoc_e: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// h-study rows; EOC filled between consecutive rows.
    pub fn from_h_results(results: &[CaseResult]) -> Self {
        let mut rows: Vec<ConvergenceRow> = results
            .iter()
            .map(|r| ConvergenceRow {
                h: r.h,
                degree: r.degree_p,
                ndof: r.ndof,
                err_ep: r.error.err_ep,
                err_ef: r.error.err_ef,
                err_e: r.error.err_e,
                eoc_ep: None,
                eoc_ef: None,
                eoc_e: None,
            })
            .collect();
        for i in 1..rows.len() {
            let (a, b) = (rows[i - 1].clone(), &mut rows[i]);
            b.eoc_ep = Some(eoc(a.err_ep, b.err_ep, a.h, b.h));
            b.eoc_ef = Some(eoc(a.err_ef, b.err_ef, a.h, b.h));
            b.eoc_e = Some(eoc(a.err_e, b.err_e, a.h, b.h));
        }
        ConvergenceTable { rows }
    }

    /// p-study rows; no EOC column.
    pub fn from_p_results(results: &[CaseResult]) -> Self {
        let mut t = Self::from_h_results(results);
        for r in &mut t.rows {
            r.eoc_ep = None;
            r.eoc_ef = None;
            r.eoc_e = None;
        }
        t
    }

    pub fn last_eoc(&self) -> Option<(f64, f64, f64)> {
        let r = self.rows.last()?;
        Some((r.eoc_ep?, r.eoc_ef?, r.eoc_e?))
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "h,degree,ndof,err_Ep,err_Ef,err_E,eoc_Ep,eoc_Ef,eoc_E")?;
        let f = |o: Option<f64>| o.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                w,
                "{:.8e},{},{},{:.8e},{:.8e},{:.8e},{},{},{}",
                r.h,
                r.degree,
                r.ndof,
                r.err_ep,
                r.err_ef,
                r.err_e,
                f(r.eoc_ep),
                f(r.eoc_ef),
                f(r.eoc_e)
            )?;
        }
        Ok(())
    }
}

/// Run independent cases in parallel, preserving input order.
pub fn run_many<T: Send + Sync>(
    items: &[T],
    job: impl Fn(&T) -> Result<CaseResult, RunError> + Sync + Send,
) -> Result<Vec<CaseResult>, RunError> {
    items.par_iter().map(job).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_examples() {
        assert!((eoc(0.1, 0.025, 0.2, 0.1) - 2.0).abs() < 1e-14);
        assert!((eoc(1.0, 0.5, 1.0, 0.5) - 1.0).abs() < 1e-14);
    }
}
