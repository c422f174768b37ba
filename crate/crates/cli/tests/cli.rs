use std::path::Path;
use std::process::{Command, Output};

fn polydg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polydg")).args(args).env("POLYDG_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
case = "test1"
seed = 3

[mesh]
kind = "cartesian"
geometry = "manufactured"
n = 2

[degree]
p = 1
f = 1

[time]
T = 0.003
dt = 0.001
theta = 0.5

[study]
mode = "single"

[output]
stride = 1
vtk = true
"#;

#[test]
fn dry_run_is_deterministic_and_reparses() {
    let a = polydg(&["run", "--preset", "test3B", "--dry-run"]);
    let b = polydg(&["run", "--preset", "test3B", "--dry-run"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resolved.toml");
    std::fs::write(&path, &a.stdout).unwrap();
    let c = polydg(&["run", "--config", path.to_str().unwrap(), "--dry-run"]);
    assert!(c.status.success(), "{}", stderr(&c));
    assert_eq!(stdout(&c), stdout(&a));
}

#[test]
fn overrides_reach_the_resolved_config() {
    let o = polydg(&["run", "--preset", "test1", "--pstudy", "2..4", "--dt", "0.0005", "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("mode = \"p\""), "{text}");
    assert!(text.contains("degrees = [2, 4]"), "{text}");
    assert!(text.contains("dt = 0.0005"), "{text}");
    let o = polydg(&["run", "--preset", "test3A", "--refinements", "1", "--dry-run"]);
    assert!(stdout(&o).contains("seeds = 3200"), "{}", stdout(&o));
}

#[test]
fn unknown_keys_fail_with_their_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, SMALL.replace("[time]", "[time]\nsteps = 4").replace("seed = 3", "seed = 3\ncolour = \"red\"")).unwrap();
    let o = polydg(&["run", "--config", path.to_str().unwrap(), "--dry-run"]);
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(e.contains("time.steps") && e.contains("colour"), "{e}");
}

#[test]
fn invalid_requests_are_rejected() {
    for args in [
        &["run", "--preset", "nope"][..],
        &["run", "--dry-run"][..],
        &["run", "--preset", "test1", "--theta", "0.2", "--dry-run"][..],
        &["run", "--preset", "test1", "--config", "x.toml"][..],
    ] {
        let o = polydg(args);
        assert!(!o.status.success(), "{args:?} should fail");
    }
}

#[test]
fn small_run_writes_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let o = polydg(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["case"], "test1");
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for f in &files {
        assert!(out.join(f).exists(), "{f} listed but missing");
    }
    assert!(files.contains(&"energy.csv") && files.contains(&"config.toml"), "{files:?}");
    assert!(files.iter().any(|f| f.ends_with(".vtk")), "{files:?}");
    let energy = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 1 + 4, "{energy}");
    let steps = manifest["summary"]["steps"].as_u64().unwrap();
    assert_eq!(steps, 3);
}

fn mesh_gen(kind: &str, out: &Path) -> serde_json::Value {
    let o = polydg(&["mesh", "gen", "--kind", kind, "--seeds", "6", "--n", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn generated_meshes_check_out() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["cartesian", "triangulated", "voronoi"] {
        let path = dir.path().join(format!("{kind}.json"));
        let made = mesh_gen(kind, &path);
        let o = polydg(&["mesh", "check", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let checked: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(made, checked);
        assert!((checked["area_poro"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(checked["faces"]["interface"].as_u64().unwrap() >= 1, "{checked}");
    }
    std::fs::write(dir.path().join("broken.json"), "{\"vertices\": []}").unwrap();
    assert!(!polydg(&["mesh", "check", dir.path().join("broken.json").to_str().unwrap()]).status.success());
}
