pub mod condensed;
pub mod solver;
pub mod sparse;

pub use condensed::{CondenseRefusal, CondensedLdlt, Condensation};
pub use solver::{backward_error, gmres, BlockJacobi, DirectSolver, SolverError, SolverKind};
pub use sparse::{CsrMatrix, Triplets};
