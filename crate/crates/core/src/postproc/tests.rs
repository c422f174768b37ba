use super::*;
use crate::analysis::manufactured::{ManufacturedCase, Test1, Test2};
use crate::material::MaterialSet;
use crate::mesh::{generate_cartesian, generate_voronoi, RegionBox};
use crate::stepper::project_initial;

fn setup(preset: &str, p: usize) -> (Discretization, MaterialModel) {
    let d = Discretization::new(generate_voronoi(&RegionBox::manufactured_pair(), 6, 5, 2).unwrap(), p, p).unwrap();
    let mat = MaterialModel::uniform(&d.mesh, &MaterialSet::preset(preset).unwrap());
    (d, mat)
}

#[test]
fn zero_state_recovers_zero() {
    let (d, mat) = setup("test1", 2);
    let s = SimState::zeros(d.ndof());
    let snap = FieldSnapshot::build(&d, &mat, &Sources::zero(), &s, Some(SigmaRate::Backward(&s)), 0.1).unwrap();
    assert!(snap.u_f.iter().chain(&snap.p_f).chain(&snap.p_p).all(|v| *v == 0.0));
}

#[test]
fn missing_rate_is_an_error() {
    let (d, mat) = setup("test1", 1);
    let s = SimState::zeros(d.ndof());
    assert!(matches!(recover_fluid(&d, &mat, &Sources::zero(), &s, None, 0.1), Err(PostError::NoRate(0))));
}

#[test]
fn test2_fluid_pressure_vanishes() {
    let (d, mat) = setup("test2", 2);
    let case = ManufacturedCase::test2();
    let s = project_initial(&d, &Test2, 0.4);
    let (_, p_f) = recover_fluid(&d, &mat, &case.sources(), &s, Some(SigmaRate::Exact(&Test2)), 0.0).unwrap();
    assert!(p_f.iter().all(|v| v.abs() < 1e-13), "{:?}", p_f.iter().fold(0.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn test1_fluid_velocity_matches_closed_form() {
    // Σ_f is quadratic, so with p_f = 2 the recovered u_f = ∇·Σ_f is exact.
    let (d, mat) = setup("test1", 2);
    let case = ManufacturedCase::test1();
    let t = 0.7;
    let s = project_initial(&d, &Test1, t);
    let snap = FieldSnapshot::build(&d, &mat, &case.sources(), &s, Some(SigmaRate::Exact(&Test1)), 0.0).unwrap();
    for c in d.mesh.cells_in(Region::Fluid) {
        let x = d.mesh.cells[c].centroid;
        let v = snap.eval(&d, c, x);
        let (uf, pf) = (v.u_f.unwrap(), v.p_f.unwrap());
        let e = [t * t * x[0] / 2.0, -t * t * x[1] / 2.0];
        assert!((uf[0] - e[0]).abs() < 1e-11 && (uf[1] - e[1]).abs() < 1e-11);
        assert!((pf - t * (x[1] * x[1] - x[0] * x[0]) / 2.0).abs() < 1e-11);
    }
}

#[test]
fn pore_pressure_of_unit_divergence() {
    let (d, mat) = setup("test1", 1);
    let mut s = SimState::zeros(d.ndof());
    let u = d.project_pvec(|x| [x[0], 0.0]);
    let r = d.space.layout.range(Block::U);
    s.x[r].copy_from_slice(&u);
    let snap = FieldSnapshot::poro_only(&d, &mat, &s);
    for c in d.mesh.cells_in(Region::Poro) {
        let v = snap.eval(&d, c, d.mesh.cells[c].centroid).p_p.unwrap();
        assert!((v + 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn exact_state_has_matching_interface_fluxes() {
    // Test 2 has f1 = 0: the exact normal fluxes agree and the projection error shrinks with p.
    let mut last = f64::INFINITY;
    for p in [2, 4] {
        let (d, mat) = setup("test2", p);
        let case = ManufacturedCase::test2();
        let s = project_initial(&d, &Test2, 0.5);
        let snap = FieldSnapshot::build(&d, &mat, &case.sources(), &s, Some(SigmaRate::Exact(&Test2)), 0.0).unwrap();
        let prof = interface_profile(&d, &mat, &snap);
        assert!(prof.mismatch_l2 < 0.2 * last);
        last = prof.mismatch_l2;
    }
    let (d, mat) = setup("test2", 2);
    let s = project_initial(&d, &Test2, 0.5);
    let snap = FieldSnapshot::build(&d, &mat, &ManufacturedCase::test2().sources(), &s, Some(SigmaRate::Exact(&Test2)), 0.0).unwrap();
    let prof = interface_profile(&d, &mat, &snap);
    assert!(prof.rows.windows(2).all(|w| w[0].y <= w[1].y));
    assert!(prof.rows.iter().any(|r| r.flux_f.abs() > 1e-3));
}

#[test]
fn smooth_pressure_has_small_jumps() {
    let (d, mat) = setup("test1", 3);
    let s = project_initial(&d, &Test1, 0.9);
    let rep = pressure_oscillation(&d, &FieldSnapshot::poro_only(&d, &mat, &s));
    assert!(rep.all_finite && rep.range > 0.0);
    assert!(rep.max_face_jump < 1e-10, "{rep:?}");
    assert!(rep.checkerboard_free(10.0));
}

#[test]
fn vtk_files() {
    let dir = tempfile::tempdir().unwrap();
    let (d, mat) = setup("test1", 1);
    let p0 = dir.path().join("mesh.vtk");
    export_vtk(&d.mesh, None, &p0).unwrap();
    let txt = std::fs::read_to_string(&p0).unwrap();
    assert!(txt.starts_with("# vtk DataFile Version 3.0"));
    assert!(txt.contains(&format!("CELLS {} ", d.mesh.n_cells())));
    assert!(!txt.contains("POINT_DATA"));
    let s = project_initial(&d, &Test1, 0.3);
    let snap = FieldSnapshot::poro_only(&d, &mat, &s);
    let p1 = dir.path().join("f.vtk");
    export_vtk(&d.mesh, Some((&d, &snap)), &p1).unwrap();
    let txt = std::fs::read_to_string(&p1).unwrap();
    let types = txt.split("CELL_TYPES ").nth(1).unwrap();
    assert_eq!(types.lines().skip(1).take_while(|l| l.trim() == "7").count(), d.mesh.n_cells());
    for key in ["VECTORS u_f double", "SCALARS p_p double 1", &format!("POINT_DATA {}", d.mesh.vertices.len())] {
        assert!(txt.contains(key), "{key}");
    }
    assert!(export_vtk(&d.mesh, None, &dir.path().join("no/such/dir.vtk")).is_err());
}

#[test]
fn line_samples() {
    let d = Discretization::new(generate_cartesian(&RegionBox::manufactured_pair(), 2, 2).unwrap(), 1, 1).unwrap();
    let mat = MaterialModel::uniform(&d.mesh, &MaterialSet::preset("test1").unwrap());
    let s = project_initial(&d, &Test1, 0.5);
    let snap = FieldSnapshot::poro_only(&d, &mat, &s);
    let v = sample_line(&d, &snap, [-0.9, 0.3], [1.5, 0.3], 5);
    assert_eq!(v.len(), 5);
    assert!(v[0].fields.u.is_some() && v[0].fields.u_f.is_none());
    assert!(v[4].cell.is_none());
    let mut out = Vec::new();
    write_line_csv(&v, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 6);
}
