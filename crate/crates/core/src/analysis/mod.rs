//! Error norms, manufactured solutions, convergence studies and matrix diagnostics.

pub mod convergence;
pub mod diagnostics;
pub mod infsup;
pub mod manufactured;
pub mod monitor;
pub mod norms;
pub mod oracle;

pub use convergence::{eoc, solve_manufactured, CaseResult, ConvergenceTable, RunError, TimeSettings};
pub use oracle::ResidualReport;
pub use manufactured::{ExactSolution, ManufacturedCase};
pub use norms::{discrete_energy, energy_parts, error_vs_exact, EnergyParts, ErrorReport, NormKind};
