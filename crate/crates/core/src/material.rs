//! Physical coefficients, constant per cell.

use crate::mesh::{PolyMesh, Region};
use crate::space::tensor::{Tensor, IDENTITY};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaterialError {
    #[error("invalid poroelastic parameters: {0}")]
    Poro(String),
    #[error("invalid fluid parameters: {0}")]
    Fluid(String),
    #[error("invalid interface parameters: {0}")]
    Interface(String),
    #[error("unknown material preset '{0}'")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoroParams {
    pub rho_s: f64,
    pub rho_f: f64,
    pub phi: f64,
    /// tortuosity
    pub a: f64,
    pub eta: f64,
    /// permeability
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    pub beta: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams {
    pub rho_f: f64,
    pub mu_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceParams {
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl PoroParams {
    pub fn rho(&self) -> f64 {
        self.phi * self.rho_f + (1.0 - self.phi) * self.rho_s
    }

    pub fn rho_w(&self) -> f64 {
        self.a / self.phi * self.rho_f
    }

    pub fn eta_over_k(&self) -> f64 {
        self.eta / self.k
    }

    /// Spectral norm of the isotropic stiffness acting on symmetric tensors.
    pub fn c_bar(&self) -> f64 {
        stiffness_norm(self.lambda, self.mu)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let bad = |s: &str| Err(MaterialError::Poro(s.to_string()));
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return bad("porosity must lie in (0, 1)");
        }
        if !(self.a >= 1.0) {
            return bad("tortuosity must be at least 1");
        }
        for (name, v) in [("eta", self.eta), ("k", self.k), ("mu", self.mu), ("m", self.m), ("rho_f", self.rho_f), ("rho_s", self.rho_s)] {
            if !(v > 0.0) {
                return Err(MaterialError::Poro(format!("{name} must be positive")));
            }
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !(self.beta > self.phi && self.beta <= 1.0) {
            return bad("Biot-Willis coefficient must lie in (phi, 1]");
        }
        if density_block_cholesky(self).is_none() {
            return bad("density block is not positive definite");
        }
        Ok(())
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.rho_f > 0.0 && self.mu_f > 0.0) {
            return Err(MaterialError::Fluid("rho_f and mu_f must be positive".into()));
        }
        Ok(())
    }
}

impl InterfaceParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.alpha > 0.0 && self.delta > 0.0 && self.gamma >= 0.0) {
            return Err(MaterialError::Interface("need alpha > 0, delta > 0, gamma >= 0".into()));
        }
        Ok(())
    }
}

/// Cholesky factor (l11, l21, l22) of [[rho, rho_f], [rho_f, rho_w]], if it exists.
pub fn density_block_cholesky(p: &PoroParams) -> Option<(f64, f64, f64)> {
    let (a, b, c) = (p.rho(), p.rho_f, p.rho_w());
    if !(a > 0.0) {
        return None;
    }
    let l11 = a.sqrt();
    let l21 = b / l11;
    let d = c - l21 * l21;
    if !(d > 0.0) {
        return None;
    }
    Some((l11, l21, d.sqrt()))
}

pub fn elastic_stress(eps: &Tensor, lambda: f64, mu: f64) -> Tensor {
    let tr = eps[0][0] + eps[1][1];
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = 2.0 * mu * eps[i][j] + lambda * tr * IDENTITY[i][j];
        }
    }
    s
}

pub fn pore_pressure(div_u: f64, div_w: f64, m: f64, beta: f64) -> f64 {
    -m * (beta * div_u + div_w)
}

pub fn stiffness_norm(lambda: f64, mu: f64) -> f64 {
    (2.0 * mu).max(2.0 * mu + 2.0 * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub p: PoroParams,
    pub f: FluidParams,
    pub interface: InterfaceParams,
}

impl MaterialSet {
    pub fn validate(&self) -> Result<(), MaterialError> {
        self.p.validate()?;
        self.f.validate()?;
        self.interface.validate()
    }

    pub fn preset(name: &str) -> Result<MaterialSet, MaterialError> {
        let base = PoroParams {
            rho_s: 1.0,
            rho_f: 1.0,
            phi: 0.5,
            a: 1.0,
            eta: 1.0,
            k: 1.0,
            lambda: 1.0,
            mu: 1.0,
            beta: 1.0,
            m: 1.0,
        };
        let f = FluidParams { rho_f: 1.0, mu_f: 0.5 };
        Ok(match name {
            "test1" => MaterialSet { p: base, f, interface: InterfaceParams { alpha: 1.0, delta: 1.0, gamma: 0.0 } },
            "test2" => MaterialSet {
                p: PoroParams { mu: 0.5, ..base },
                f,
                interface: InterfaceParams { alpha: 2.0, delta: 1.0, gamma: 0.0 },
            },
            "test3A" => MaterialSet { p: base, f, interface: InterfaceParams { alpha: 1.0, delta: 1.0, gamma: 1.0 } },
            "test3B" => MaterialSet {
                p: PoroParams { lambda: 1e6, eta: 1e4, m: 1e4, ..base },
                f,
                interface: InterfaceParams { alpha: 1.0, delta: 100.0, gamma: 1.0 },
            },
            other => return Err(MaterialError::UnknownPreset(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellMaterial {
    Poro(PoroParams),
    Fluid(FluidParams),
}

#[derive(Debug, Clone)]
pub struct MaterialModel {
    pub cells: Vec<CellMaterial>,
    pub interface: InterfaceParams,
}

impl MaterialModel {
    pub fn uniform(mesh: &PolyMesh, set: &MaterialSet) -> MaterialModel {
        MaterialModel {
            cells: mesh
                .cells
                .iter()
                .map(|c| match c.region {
                    Region::Poro => CellMaterial::Poro(set.p),
                    Region::Fluid => CellMaterial::Fluid(set.f),
                })
                .collect(),
            interface: set.interface,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        for c in &self.cells {
            match c {
                CellMaterial::Poro(p) => p.validate()?,
                CellMaterial::Fluid(f) => f.validate()?,
            }
        }
        self.interface.validate()
    }

    pub fn poro(&self, cell: usize) -> &PoroParams {
        match &self.cells[cell] {
            CellMaterial::Poro(p) => p,
            CellMaterial::Fluid(_) => panic!("cell {cell} is a fluid cell"),
        }
    }

    pub fn fluid(&self, cell: usize) -> &FluidParams {
        match &self.cells[cell] {
            CellMaterial::Fluid(f) => f,
            CellMaterial::Poro(_) => panic!("cell {cell} is a poroelastic cell"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stress_examples() {
        assert_eq!(elastic_stress(&IDENTITY, 1.0, 1.0), [[4.0, 0.0], [0.0, 4.0]]);
        assert_eq!(elastic_stress(&[[0.0; 2]; 2], 3.0, 1.0), [[0.0; 2]; 2]);
        assert_eq!(elastic_stress(&[[0.0, 0.5], [0.5, 0.0]], 7.0, 1.0), [[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn pressure_examples() {
        assert_eq!(pore_pressure(1.0, -1.0, 1.0, 1.0), 0.0);
        assert!((pore_pressure(1e-4, 0.0, 1e4, 1.0) + 1.0).abs() < 1e-12);
        assert_eq!(pore_pressure(0.0, 0.0, 5.0, 0.7), 0.0);
    }

    #[test]
    fn stiffness_examples() {
        assert_eq!(stiffness_norm(1.0, 1.0), 4.0);
        assert_eq!(stiffness_norm(0.0, 1.5), 3.0);
        assert_eq!(stiffness_norm(1e6, 1.0), 2e6 + 2.0);
    }

    #[test]
    fn presets_valid() {
        for name in ["test1", "test2", "test3A", "test3B"] {
            let s = MaterialSet::preset(name).unwrap();
            s.validate().unwrap();
            assert_eq!(s.p.rho_w(), 2.0);
            assert!(s.p.rho_w() >= s.p.rho_f);
        }
        assert!(MaterialSet::preset("test9").is_err());
    }

    #[test]
    fn invalid_porosity() {
        let mut s = MaterialSet::preset("test1").unwrap();
        s.p.phi = 1.2;
        assert!(s.validate().is_err());
    }
}
