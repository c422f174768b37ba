//! Polytopal discontinuous Galerkin solver for coupled poroelastic / Stokes flow.

pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod space;
pub mod linalg;
pub mod material;
pub mod assembly;
pub mod analysis;
pub mod stepper;
pub mod postproc;
pub mod config;
pub mod driver;
