use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use polydg_core::config::{Geometry, MeshKind, MeshSpec, RunConfig, StudyMode};
use polydg_core::driver::{build_mesh, run_case};
use polydg_core::mesh::{load_mesh, regularity_report, save_mesh, FaceTag, PolyMesh, Region};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polydg", version, about = "Polytopal dG solver for coupled poroelastic / Stokes flow")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a configuration file.
    Run(RunArgs),
    /// Generate or inspect mesh files.
    #[command(subcommand)]
    Mesh(MeshCmd),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in configuration: test1, test2, test3A, test3B.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polynomial degree for both regions.
    #[arg(long)]
    degree: Option<usize>,
    /// Number of meshes of an h-study, or uniform refinements of a single run.
    #[arg(long)]
    refinements: Option<usize>,
    /// Degree range of a p-study, e.g. 1..4.
    #[arg(long, value_parser = parse_range)]
    pstudy: Option<[usize; 2]>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// θ of the θ-method, in [1/2, 1].
    #[arg(long)]
    theta: Option<f64>,
    /// Output directory (default: out/<case>).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Parallel sub-runs of a convergence study (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Generate a mesh of the two-region test geometry.
    Gen {
        #[arg(long, value_parser = ["cartesian", "triangulated", "voronoi"])]
        kind: String,
        #[arg(long, value_parser = ["manufactured", "channel"], default_value = "manufactured")]
        geometry: String,
        /// Voronoi seeds per region.
        #[arg(long, default_value_t = 16)]
        seeds: usize,
        /// Lloyd relaxation sweeps.
        #[arg(long, default_value_t = 30)]
        lloyd: usize,
        /// Seed of the point generator.
        #[arg(long, default_value_t = 0)]
        rng: u64,
        /// Cells per side and region for the structured kinds.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Destination JSON file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a mesh file and print a summary.
    Check { file: PathBuf },
}

fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s}"))?;
    let p = |t: &str| t.trim().trim_start_matches('=').parse::<usize>().map_err(|e| format!("{t}: {e}"));
    Ok([p(a)?, p(b)?])
}

fn resolve(a: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(p), _) => RunConfig::preset(p)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_toml(&text)?
        }
        (None, None) => bail!("either --preset or --config is required"),
    };
    if let Some(d) = a.degree {
        cfg.degree.p = d;
        cfg.degree.f = d;
    }
    if let Some([lo, hi]) = a.pstudy {
        cfg.study.mode = StudyMode::P;
        cfg.study.degrees = [lo, hi];
    }
    if let Some(r) = a.refinements {
        if cfg.study.mode == StudyMode::H {
            cfg.study.levels = r;
        } else {
            refine_spec(&mut cfg.mesh, r)?;
        }
    }
    if let Some(dt) = a.dt {
        cfg.time.dt = dt;
    }
    if let Some(t) = a.theta {
        cfg.time.theta = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn refine_spec(m: &mut MeshSpec, r: usize) -> Result<()> {
    match m.kind {
        MeshKind::Cartesian | MeshKind::Triangulated => m.n <<= r,
        MeshKind::Voronoi => m.seeds <<= 2 * r,
        MeshKind::NestedVoronoi => m.refinements += r,
        MeshKind::File => bail!("a mesh file cannot be refined"),
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = resolve(&a)?;
    if a.dry_run {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let out = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.case.name()));
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = run_case(&cfg, &out, workers)?;
    log::info!("finished in {:.1} s", manifest.elapsed_seconds);
    println!("{}", out.join("manifest.json").display());
    Ok(())
}

fn summary(mesh: &PolyMesh) -> serde_json::Value {
    let reg = regularity_report(mesh);
    let tags = [
        FaceTag::InteriorP,
        FaceTag::InteriorF,
        FaceTag::Interface,
        FaceTag::DirichletP,
        FaceTag::NeumannP,
        FaceTag::DirichletF,
        FaceTag::NeumannF,
    ];
    serde_json::json!({
        "cells": mesh.n_cells(),
        "cells_poro": mesh.cells_in(Region::Poro).count(),
        "cells_fluid": mesh.cells_in(Region::Fluid).count(),
        "vertices": mesh.vertices.len(),
        "faces": tags.iter().map(|t| (t.name().to_string(), mesh.count_tag(*t).into())).collect::<serde_json::Map<_, _>>(),
        "area_poro": mesh.region_area(Region::Poro),
        "area_fluid": mesh.region_area(Region::Fluid),
        "h_max": mesh.max_diameter(None),
        "max_cell_ratio": reg.max_cell_ratio,
        "max_neighbor_ratio": reg.max_neighbor_ratio,
        "max_aspect": reg.max_aspect,
        "max_edge_ratio": reg.max_edge_ratio,
    })
}

fn mesh_cmd(c: MeshCmd) -> Result<()> {
    match c {
        MeshCmd::Gen { kind, geometry, seeds, lloyd, rng, n, out } => {
            let spec = MeshSpec {
                kind: match kind.as_str() {
                    "cartesian" => MeshKind::Cartesian,
                    "triangulated" => MeshKind::Triangulated,
                    _ => MeshKind::Voronoi,
                },
                geometry: if geometry == "channel" { Geometry::Channel } else { Geometry::Manufactured },
                n,
                seeds,
                lloyd,
                refinements: 0,
                path: None,
            };
            let mesh = build_mesh(&spec, 0, rng)?;
            save_mesh(&mesh, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary(&mesh))?);
        }
        MeshCmd::Check { file } => {
            let mesh = load_mesh(&file)?;
            println!("{}", serde_json::to_string_pretty(&summary(&mesh))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POLYDG_LOG", "info")).format_timestamp(None).init();
    let cli = Cli::parse();
    let r = match cli.cmd {
        Command::Run(a) => run(a),
        Command::Mesh(m) => mesh_cmd(m),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
