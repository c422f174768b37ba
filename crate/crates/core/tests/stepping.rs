use polydg_core::analysis::ManufacturedCase;
use polydg_core::assembly::{AssembledSystem, PenaltySpec, Sources};
use polydg_core::linalg::SolverKind;
use polydg_core::material::MaterialModel;
use polydg_core::mesh::{generate_voronoi, RegionBox};
use polydg_core::space::{Block, Discretization};
use polydg_core::stepper::{project_initial, read_checkpoint, run, write_checkpoint, RunOutput, SimState, Stepper, ThetaScheme};

struct Setup {
    d: Discretization,
    mat: MaterialModel,
    sys: AssembledSystem,
    case: ManufacturedCase,
}

fn setup(seed: u64) -> Setup {
    let case = ManufacturedCase::test2();
    let d = Discretization::new(generate_voronoi(&RegionBox::manufactured_pair(), 12, 10, seed).unwrap(), 2, 2).unwrap();
    let mat = MaterialModel::uniform(&d.mesh, &case.material);
    let sys = AssembledSystem::new(&d, &mat, &PenaltySpec::default()).unwrap();
    Setup { d, mat, sys, case }
}

fn advance(s: &Setup, theta: f64, t_final: f64, init: SimState, src: &Sources) -> RunOutput {
    let stepper = Stepper::new(&s.d, &s.sys, ThetaScheme::new(theta, 0.01, t_final, SolverKind::Direct).unwrap()).unwrap();
    run(&s.d, &s.sys, &stepper, init, |t| s.sys.load(&s.d, &s.mat, src, t), 0).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn rotation_start_value_does_not_steer_the_other_fields() {
    let s = setup(3);
    let src = s.case.sources();
    let l = &s.d.space.layout;
    let base = project_initial(&s.d, s.case.exact.as_ref(), 0.0);
    let mut bumped = base.clone();
    let delta: Vec<f64> = l.range(Block::R).map(|i| 0.3 * ((i * 7919) % 13) as f64 - 1.7).collect();
    for (i, v) in l.range(Block::R).zip(&delta) {
        bumped.x[i] += v;
    }
    for theta in [0.5, 1.0] {
        let a = advance(&s, theta, 0.05, base.clone(), &src);
        let b = advance(&s, theta, 0.05, bumped.clone(), &src);
        let scale = a.final_state.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for blk in [Block::U, Block::W, Block::V, Block::Z, Block::S] {
            let r = l.range(blk);
            let d = max_diff(&a.final_state.x[r.clone()], &b.final_state.x[r]);
            assert!(d <= 1e-10 * scale, "θ = {theta}, block {}: {d:.2e}", blk.name());
        }
        // five steps: Crank–Nicolson carries (−1)^k δ, implicit Euler forgets it
        let r = l.range(Block::R);
        let shift: Vec<f64> = r.clone().map(|i| b.final_state.x[i] - a.final_state.x[i]).collect();
        let want: Vec<f64> = delta.iter().map(|v| if theta == 0.5 { -v } else { 0.0 }).collect();
        assert!(max_diff(&shift, &want) <= 1e-8, "θ = {theta}: {:.2e}", max_diff(&shift, &want));
    }
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let (a, b) = (setup(9), setup(9));
    assert_eq!(a.sys.m.values, b.sys.m.values);
    assert_eq!(a.sys.a.values, b.sys.a.values);
    let ra = advance(&a, 0.5, 0.05, project_initial(&a.d, a.case.exact.as_ref(), 0.0), &a.case.sources());
    let rb = advance(&b, 0.5, 0.05, project_initial(&b.d, b.case.exact.as_ref(), 0.0), &b.case.sources());
    assert_eq!(ra.final_state.x, rb.final_state.x);
    let ea: Vec<f64> = ra.records.iter().map(|r| r.energy).collect();
    let eb: Vec<f64> = rb.records.iter().map(|r| r.energy).collect();
    assert_eq!(ea, eb);
}

#[test]
fn restart_from_checkpoint_matches_a_single_run() {
    let s = setup(4);
    let src = s.case.sources();
    let init = project_initial(&s.d, s.case.exact.as_ref(), 0.0);
    let whole = advance(&s, 0.5, 0.08, init.clone(), &src);
    let half = advance(&s, 0.5, 0.04, init, &src);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    write_checkpoint(&s.d, &half.final_state, &path).unwrap();
    let back = read_checkpoint(&s.d, &path).unwrap();
    assert_eq!((back.k, back.t, &back.x), (half.final_state.k, half.final_state.t, &half.final_state.x));
    let rest = advance(&s, 0.5, 0.04, back, &src);
    assert_eq!(rest.final_state.k, 8);
    assert!(max_diff(&rest.final_state.x, &whole.final_state.x) <= 1e-12);
}

#[test]
fn zero_data_keeps_the_zero_state() {
    let s = setup(5);
    let out = advance(&s, 0.5, 0.05, SimState::zeros(s.d.ndof()), &Sources::zero());
    assert!(out.final_state.x.iter().all(|&v| v == 0.0));
    assert!(out.records.iter().all(|r| r.energy == 0.0 && r.weak_symmetry == 0.0));
}

#[test]
fn checkpoint_from_another_discretization_is_refused() {
    let (a, b) = (setup(6), setup(7));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    write_checkpoint(&a.d, &SimState::zeros(a.d.ndof()), &path).unwrap();
    if a.d.space.layout.offsets != b.d.space.layout.offsets {
        assert!(read_checkpoint(&b.d, &path).is_err());
    }
    std::fs::write(&path, b"{\"ndof\": 3}\n").unwrap();
    assert!(read_checkpoint(&a.d, &path).is_err());
}
