//! Discrete vector calculus with summation-by-parts operators, grid
//! oscillation analysis and discrete Helmholtz Hodge decompositions.

pub mod error;
pub mod field;
pub mod field_io;
pub mod hodge;
pub mod krylov;
pub mod maps;
pub mod potential;
pub mod sbp;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{FieldKind, GridField};
pub use hodge::{helmholtz, HodgeDecomposition, HodgeDiagnostics, HodgeOptions, ProjectionOrder};
pub use krylov::{DenseMap, KrylovOptions, LinearMap, SolveStats, Solver, StopReason};
pub use maps::{DiffOperator, OperatorMap};
pub use sbp::{Grid1D, OscillationVector1D, SbpOperator1D, V0Inverse};
pub use tensor::{AxisOp, OscillationFields, TensorOps};
