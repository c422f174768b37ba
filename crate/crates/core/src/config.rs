//! Run configuration (TOML) and the frozen presets.

use crate::assembly::PenaltySpec;
use crate::linalg::SolverKind;
use crate::material::{FluidParams, InterfaceParams, MaterialError, MaterialSet, PoroParams};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("unknown preset '{0}' (available: test1, test2, test3A, test3B)")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    #[serde(rename = "test1")]
    Test1,
    #[serde(rename = "test2")]
    Test2,
    #[serde(rename = "test3A")]
    Test3A,
    #[serde(rename = "test3B")]
    Test3B,
    /// All sources zero; random admissible initial data from `seed`.
    #[serde(rename = "zero")]
    Zero,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Test1 => "test1",
            CaseKind::Test2 => "test2",
            CaseKind::Test3A => "test3A",
            CaseKind::Test3B => "test3B",
            CaseKind::Zero => "zero",
        }
    }

    pub fn is_manufactured(self) -> bool {
        matches!(self, CaseKind::Test1 | CaseKind::Test2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Cartesian,
    Triangulated,
    Voronoi,
    /// Voronoi base refined `refinements` times by polygon quadrisection.
    NestedVoronoi,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Manufactured,
    Channel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub kind: MeshKind,
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    /// Subdivisions per direction and region (structured kinds).
    #[serde(default = "default_n")]
    pub n: usize,
    /// Seeds per region (Voronoi kinds).
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_lloyd")]
    pub lloyd: usize,
    #[serde(default)]
    pub refinements: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_geometry() -> Geometry {
    Geometry::Manufactured
}
fn default_n() -> usize {
    4
}
fn default_seeds() -> usize {
    16
}
fn default_lloyd() -> usize {
    30
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degrees {
    pub p: usize,
    pub f: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// Defaults to the case name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poro: Option<PoroParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluid: Option<FluidParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<InterfaceParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_restart() -> usize {
    60
}
fn default_max_iter() -> usize {
    2000
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec { kind: SolverChoice::Direct, tol: default_tol(), restart: default_restart(), max_iter: default_max_iter() }
    }
}

impl SolverSpec {
    pub fn kind(&self) -> SolverKind {
        match self.kind {
            SolverChoice::Direct => SolverKind::Direct,
            SolverChoice::Iterative => SolverKind::Iterative { tol: self.tol, restart: self.restart, max_iter: self.max_iter },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyMode {
    Single,
    H,
    P,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub mode: StudyMode,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Inclusive degree range of a p-study.
    #[serde(default = "default_degrees")]
    pub degrees: [usize; 2],
    /// Mesh of a p-study; the main mesh when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_mesh: Option<MeshSpec>,
}

fn default_levels() -> usize {
    4
}
fn default_degrees() -> [usize; 2] {
    [1, 5]
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec { mode: StudyMode::Single, levels: default_levels(), degrees: default_degrees(), p_mesh: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Snapshot stride in steps (0 = final state only).
    #[serde(default)]
    pub stride: usize,
    #[serde(default)]
    pub vtk: bool,
    #[serde(default = "yes")]
    pub energy: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { stride: 0, vtk: false, energy: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub case: CaseKind,
    #[serde(default)]
    pub seed: u64,
    pub mesh: MeshSpec,
    pub degree: Degrees,
    #[serde(default)]
    pub material: MaterialSpec,
    #[serde(default)]
    pub penalty: PenaltySpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub study: StudySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

pub const PRESETS: [(&str, &str); 4] = [
    ("test1", include_str!("../presets/test1.toml")),
    ("test2", include_str!("../presets/test2.toml")),
    ("test3A", include_str!("../presets/test3A.toml")),
    ("test3B", include_str!("../presets/test3B.toml")),
];

impl RunConfig {
    /// Parse TOML, rejecting (and listing) every unknown key.
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut unknown = BTreeSet::new();
        let cfg: RunConfig =
            serde_ignored::deserialize(de, |path| {
                unknown.insert(path.to_string());
            })
            .map_err(|e| ConfigError::Parse(e.to_string()))?;
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown.into_iter().collect()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
        let text = PRESETS.iter().find(|p| p.0 == name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?.1;
        Self::from_toml(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.degree.p < 1 || self.degree.f < 1 {
            return bad(format!("degrees must be ≥ 1 (got p = {}, f = {})", self.degree.p, self.degree.f));
        }
        let [lo, hi] = self.study.degrees;
        if lo < 1 || hi < lo {
            return bad(format!("study.degrees must satisfy 1 ≤ lo ≤ hi (got [{lo}, {hi}])"));
        }
        if self.study.mode == StudyMode::H && self.study.levels < 2 {
            return bad("an h-study needs at least 2 levels".into());
        }
        if self.study.mode != StudyMode::Single && !self.case.is_manufactured() {
            return bad(format!("convergence studies need a manufactured case, not {}", self.case.name()));
        }
        if self.mesh.kind == MeshKind::File && self.mesh.path.is_none() {
            return bad("mesh.kind = \"file\" requires mesh.path".into());
        }
        if self.mesh.kind == MeshKind::File && self.study.mode == StudyMode::H {
            return bad("an h-study needs a generated mesh family".into());
        }
        let expected = match self.case {
            CaseKind::Test3A | CaseKind::Test3B => Geometry::Channel,
            CaseKind::Test1 | CaseKind::Test2 => Geometry::Manufactured,
            CaseKind::Zero => self.mesh.geometry,
        };
        if self.mesh.kind != MeshKind::File && self.mesh.geometry != expected {
            return bad(format!("case {} runs on the {:?} geometry", self.case.name(), expected));
        }
        if !(self.time.theta >= 0.5 && self.time.theta <= 1.0) || !(self.time.dt > 0.0) || !(self.time.t_final > 0.0) {
            return bad("time needs 1/2 ≤ theta ≤ 1, dt > 0 and T > 0".into());
        }
        self.materials()?;
        Ok(())
    }

    /// Material preset (default: the case name) with explicit tables overriding it.
    pub fn materials(&self) -> Result<MaterialSet, ConfigError> {
        let name = self.material.preset.clone().unwrap_or_else(|| match self.case {
            CaseKind::Zero => "test1".into(),
            c => c.name().into(),
        });
        let mut set = MaterialSet::preset(&name)?;
        if let Some(p) = self.material.poro {
            set.p = p;
        }
        if let Some(f) = self.material.fluid {
            set.f = f;
        }
        if let Some(i) = self.material.interface {
            set.interface = i;
        }
        set.validate()?;
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_roundtrip() {
        for (name, _) in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            assert_eq!(c.case.name(), name);
            let again = RunConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(again, c);
            assert_eq!(again.to_toml(), c.to_toml());
        }
        let t3 = RunConfig::preset("test3A").unwrap();
        assert_eq!((t3.mesh.seeds, t3.degree.p, t3.time.dt, t3.time.t_final), (800, 3, 0.01, 1.5));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let mut text = PRESETS[0].1.replace("[time]", "bogus = 1\n[time]\nstep = 3");
        text.push_str("extra = true\n");
        match RunConfig::from_toml(&text) {
            Err(ConfigError::UnknownKeys(k)) => {
                assert!(k.contains(&"mesh.bogus".to_string()) || k.contains(&"degree.bogus".to_string()), "{k:?}");
                assert!(k.iter().any(|s| s.ends_with("step")));
                assert!(k.iter().any(|s| s.ends_with("extra")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values() {
        let mut c = RunConfig::preset("test1").unwrap();
        c.degree.p = 0;
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
        let mut c = RunConfig::preset("test3A").unwrap();
        c.study.mode = StudyMode::H;
        assert!(c.validate().is_err());
        let mut c = RunConfig::preset("test1").unwrap();
        c.material.preset = Some("granite".into());
        assert!(matches!(c.validate(), Err(ConfigError::Material(_))));
        assert!(matches!(RunConfig::preset("test9"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn explicit_tables_override() {
        let text = format!("{}\n[material.fluid]\nrho_f = 2.0\nmu_f = 0.25\n", PRESETS[0].1);
        let c = RunConfig::from_toml(&text).unwrap();
        let m = c.materials().unwrap();
        assert_eq!((m.f.rho_f, m.f.mu_f), (2.0, 0.25));
        assert_eq!(m.p, MaterialSet::preset("test1").unwrap().p);
    }
}
