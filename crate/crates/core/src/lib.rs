//! Arithmetic supports of cyclic modules over the first Weyl algebra in
//! characteristic `p`, computed exactly.

pub mod charp;
pub mod curves;
pub mod expr;
pub mod ffield;
pub mod linalg;
pub mod mpoly;
pub mod poly;
pub mod qtorus;
pub mod sweep;
pub mod weyl;

pub use ffield::{Fe, FieldCtx, FieldError};
pub use linalg::{BandedMatrixFF, LinalgError, MatrixFF};
pub use mpoly::BivarPoly;
pub use weyl::{DiffOp, FieldOp, SL2Mat};
