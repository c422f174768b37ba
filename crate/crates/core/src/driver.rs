//! Config-driven pipeline: mesh, assembly, stepping, analysis and export.

use crate::analysis::convergence::{run_many, solve_manufactured, CaseResult, ConvergenceTable, RunError, TimeSettings};
use crate::analysis::monitor::{first_energy_increase, random_admissible_state, write_energy_csv};
use crate::analysis::{error_vs_exact, ErrorReport, ManufacturedCase};
use crate::assembly::{AssembledSystem, Sources};
use crate::config::{CaseKind, ConfigError, Geometry, MeshKind, MeshSpec, RunConfig, StudyMode};
use crate::material::MaterialModel;
use crate::mesh::{
    generate_cartesian, generate_triangulated, generate_voronoi, load_mesh, refine_polygonal, MeshError, PolyMesh, RegionBox,
};
use crate::postproc::{export_vtk, interface_profile, pressure_oscillation, FieldSnapshot, OscillationReport, PostError, SigmaRate};
use crate::space::Discretization;
use crate::stepper::{project_initial, run, RunOutput, SimState, StepError, Stepper, ThetaScheme};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Post(#[from] PostError),
    #[error("{0}")]
    Io(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl From<crate::space::SpaceError> for DriverError {
    fn from(e: crate::space::SpaceError) -> Self {
        DriverError::Run(e.into())
    }
}

impl From<crate::assembly::AssemblyError> for DriverError {
    fn from(e: crate::assembly::AssemblyError) -> Self {
        DriverError::Run(e.into())
    }
}

impl From<StepError> for DriverError {
    fn from(e: StepError) -> Self {
        DriverError::Run(e.into())
    }
}

/// Logistic inflow ramp 1 / (1 + e^{−10(t−1)}).
pub fn inflow_h(t: f64) -> f64 {
    1.0 / (1.0 + (-10.0 * (t - 1.0)).exp())
}

/// Driven-flow data: parabolic inflow h(t)(−40y(y−1), 0) on the left fluid
/// side, zero velocity data on the top, everything else homogeneous.
pub fn channel_sources() -> Sources {
    let mut s = Sources::zero();
    s.velocity_f = Some(Arc::new(|x, t| if x[0] < 1e-9 { [-40.0 * x[1] * (x[1] - 1.0) * inflow_h(t), 0.0] } else { [0.0; 2] }));
    s
}

pub fn region_boxes(g: Geometry) -> Vec<RegionBox> {
    match g {
        Geometry::Manufactured => RegionBox::manufactured_pair(),
        Geometry::Channel => RegionBox::channel_pair(),
    }
}

/// Mesh of refinement level `level` (0 = as configured).
pub fn build_mesh(spec: &MeshSpec, level: usize, seed: u64) -> Result<PolyMesh, DriverError> {
    let boxes = region_boxes(spec.geometry);
    let n = spec.n << level;
    Ok(match spec.kind {
        MeshKind::Cartesian => generate_cartesian(&boxes, n, n)?,
        MeshKind::Triangulated => generate_triangulated(&boxes, n, n)?,
        MeshKind::Voronoi => generate_voronoi(&boxes, spec.seeds << (2 * level), spec.lloyd, seed + level as u64)?,
        MeshKind::NestedVoronoi => {
            let mut m = generate_voronoi(&boxes, spec.seeds, spec.lloyd, seed)?;
            for _ in 0..spec.refinements + level {
                m = refine_polygonal(&m, &boxes)?;
            }
            m
        }
        MeshKind::File => {
            if level > 0 {
                return Err(DriverError::Config(ConfigError::Invalid("a mesh file cannot be refined".into())));
            }
            load_mesh(Path::new(spec.path.as_deref().unwrap_or_default()))?
        }
    })
}

pub fn sources_for(case: CaseKind) -> (Sources, Option<ManufacturedCase>) {
    match case {
        CaseKind::Test1 | CaseKind::Test2 => {
            let m = ManufacturedCase::by_name(case.name()).expect("manufactured case");
            (m.sources(), Some(m))
        }
        CaseKind::Test3A | CaseKind::Test3B => (channel_sources(), None),
        CaseKind::Zero => (Sources::zero(), None),
    }
}

/// Everything needed to step one configuration on one mesh.
pub struct Prepared {
    pub d: Discretization,
    pub mat: MaterialModel,
    pub src: Sources,
    pub sys: AssembledSystem,
    pub exact: Option<ManufacturedCase>,
}

pub fn prepare(cfg: &RunConfig, mesh: PolyMesh, p: usize, f: usize) -> Result<Prepared, DriverError> {
    let set = cfg.materials()?;
    let d = Discretization::new(mesh, p, f)?;
    let mat = MaterialModel::uniform(&d.mesh, &set);
    let sys = AssembledSystem::new(&d, &mat, &cfg.penalty)?;
    let (src, exact) = sources_for(cfg.case);
    log::info!("{}: {} cells, {} unknowns, p = ({p}, {f})", cfg.case.name(), d.mesh.n_cells(), d.ndof());
    Ok(Prepared { d, mat, src, sys, exact })
}

pub fn initial_state(cfg: &RunConfig, prep: &Prepared) -> SimState {
    match (&prep.exact, cfg.case) {
        (Some(m), _) => project_initial(&prep.d, m.exact.as_ref(), 0.0),
        (None, CaseKind::Zero) => random_admissible_state(&prep.d, cfg.seed),
        _ => SimState::zeros(prep.d.ndof()),
    }
}

pub fn simulate(cfg: &RunConfig, prep: &Prepared) -> Result<RunOutput, DriverError> {
    let scheme = ThetaScheme::new(cfg.time.theta, cfg.time.dt, cfg.time.t_final, cfg.solver.kind())?;
    let stepper = Stepper::new(&prep.d, &prep.sys, scheme)?;
    let init = initial_state(cfg, prep);
    Ok(run(&prep.d, &prep.sys, &stepper, init, |t| prep.sys.load(&prep.d, &prep.mat, &prep.src, t), cfg.output.stride)?)
}

/// Recovered fields at a stored state, using the best rate available.
pub fn snapshot_at(cfg: &RunConfig, prep: &Prepared, state: &SimState, prev: Option<&SimState>) -> Result<FieldSnapshot, DriverError> {
    let rate = match (prev, &prep.exact) {
        (Some(p), _) => Some(SigmaRate::Backward(p)),
        (None, Some(m)) => Some(SigmaRate::Exact(m.exact.as_ref())),
        (None, None) => None,
    };
    Ok(match rate {
        Some(r) => FieldSnapshot::build(&prep.d, &prep.mat, &prep.src, state, Some(r), cfg.time.dt)?,
        None => FieldSnapshot::poro_only(&prep.d, &prep.mat, state),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub n_cells: usize,
    pub ndof: usize,
    pub steps: usize,
    pub t_final: f64,
    pub final_energy: f64,
    pub energy_non_increasing: bool,
    pub max_weak_symmetry: f64,
    pub interface_mismatch: f64,
    pub oscillation: OscillationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

pub fn summarize(cfg: &RunConfig, prep: &Prepared, out: &RunOutput) -> Result<(FlowSummary, FieldSnapshot), DriverError> {
    let last = snapshot_at(cfg, prep, &out.final_state, out.previous.as_ref())?;
    let energy: Vec<f64> = out.records.iter().map(|r| r.energy).collect();
    let error = prep.exact.as_ref().map(|m| {
        error_vs_exact(&prep.d, &prep.mat, &prep.sys.blocks.penalty, &out.final_state.x, m.exact.as_ref(), out.final_state.t)
    });
    let s = FlowSummary {
        n_cells: prep.d.mesh.n_cells(),
        ndof: prep.d.ndof(),
        steps: out.final_state.k,
        t_final: out.final_state.t,
        final_energy: *energy.last().unwrap_or(&0.0),
        energy_non_increasing: first_energy_increase(&energy, 1e-10).is_none(),
        max_weak_symmetry: out.records.iter().map(|r| r.weak_symmetry).fold(0.0, f64::max),
        interface_mismatch: interface_profile(&prep.d, &prep.mat, &last).mismatch_l2,
        oscillation: pressure_oscillation(&prep.d, &last),
        error,
    };
    Ok((s, last))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub case: &'static str,
    pub mode: StudyMode,
    pub config: RunConfig,
    pub files: Vec<String>,
    pub summary: serde_json::Value,
    pub elapsed_seconds: f64,
}

struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn create(&mut self, name: &str) -> Result<std::io::BufWriter<std::fs::File>, DriverError> {
        let path = self.dir.join(name);
        let f = std::fs::File::create(&path).map_err(|e| DriverError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(std::io::BufWriter::new(f))
    }

    fn write_with(&mut self, name: &str, w: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<(), DriverError> {
        let mut f = self.create(name)?;
        w(&mut f).map_err(|e| DriverError::Io(format!("{name}: {e}")))
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}

fn study_cases(cfg: &RunConfig, workers: usize, jobs: Vec<(MeshSpec, usize, usize, usize)>) -> Result<Vec<CaseResult>, DriverError> {
    let case = ManufacturedCase::by_name(cfg.case.name()).expect("manufactured case");
    let set = cfg.materials()?;
    let case = ManufacturedCase { material: set, ..case };
    let ts = TimeSettings { t_final: cfg.time.t_final, dt: cfg.time.dt, theta: cfg.time.theta };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| DriverError::Pool(e.to_string()))?;
    pool.install(|| {
        run_many(&jobs, |(spec, level, p, f)| {
            let mesh = build_mesh(spec, *level, cfg.seed).map_err(|e| RunError::Other(e.to_string()))?;
            solve_manufactured(mesh, *p, *f, &case, ts, &cfg.penalty, cfg.solver.kind())
        })
    })
    .map_err(DriverError::from)
}

pub fn h_study(cfg: &RunConfig, workers: usize) -> Result<ConvergenceTable, DriverError> {
    let jobs = (0..cfg.study.levels).map(|l| (cfg.mesh.clone(), l, cfg.degree.p, cfg.degree.f)).collect();
    Ok(ConvergenceTable::from_h_results(&study_cases(cfg, workers, jobs)?))
}

pub fn p_study(cfg: &RunConfig, workers: usize) -> Result<ConvergenceTable, DriverError> {
    let mesh = cfg.study.p_mesh.clone().unwrap_or_else(|| cfg.mesh.clone());
    let [lo, hi] = cfg.study.degrees;
    let jobs = (lo..=hi).map(|p| (mesh.clone(), 0, p, p)).collect();
    Ok(ConvergenceTable::from_p_results(&study_cases(cfg, workers, jobs)?))
}

/// Execute a configuration and write its artifacts plus `manifest.json` under `out_dir`.
pub fn run_case(cfg: &RunConfig, out_dir: &Path, workers: usize) -> Result<Manifest, DriverError> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    std::fs::create_dir_all(out_dir).map_err(|e| DriverError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut out = Out { dir: out_dir.to_path_buf(), files: Vec::new() };
    out.write_with("config.toml", |w| w.write_all(cfg.to_toml().as_bytes()))?;
    let summary = match cfg.study.mode {
        StudyMode::H | StudyMode::P => {
            let (table, name) = if cfg.study.mode == StudyMode::H {
                (h_study(cfg, workers)?, "convergence.csv")
            } else {
                (p_study(cfg, workers)?, "pstudy.csv")
            };
            out.write_with(name, |w| table.write_csv(w))?;
            serde_json::to_value(&table).expect("serializable")
        }
        StudyMode::Single => {
            let mesh = build_mesh(&cfg.mesh, 0, cfg.seed)?;
            let prep = prepare(cfg, mesh, cfg.degree.p, cfg.degree.f)?;
            let res = simulate(cfg, &prep)?;
            if cfg.output.energy {
                out.write_with("energy.csv", |w| write_energy_csv(&res.records, w))?;
            }
            let (summary, last) = summarize(cfg, &prep, &res)?;
            out.write_with("interface_profile.csv", |w| interface_profile(&prep.d, &prep.mat, &last).write_csv(w))?;
            if cfg.output.vtk {
                for (s, prev) in res.snapshots.iter().zip(&res.snapshot_previous) {
                    let snap = snapshot_at(cfg, &prep, s, prev.as_ref())?;
                    let path = out.path(&format!("snapshot_{:05}.vtk", s.k));
                    export_vtk(&prep.d.mesh, Some((&prep.d, &snap)), &path)?;
                }
                let path = out.path("final.vtk");
                export_vtk(&prep.d.mesh, Some((&prep.d, &last)), &path)?;
            }
            serde_json::to_value(&summary).expect("serializable")
        }
    };
    let manifest = Manifest {
        tool: "polydg",
        version: env!("CARGO_PKG_VERSION"),
        case: cfg.case.name(),
        mode: cfg.study.mode,
        config: cfg.clone(),
        files: out.files.clone(),
        summary,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("serializable");
    std::fs::write(out_dir.join("manifest.json"), text).map_err(|e| DriverError::Io(format!("manifest.json: {e}")))?;
    Ok(manifest)
}
