//! Differentiation `D` and backward-shift composition `C_b` on discrete
//! function spaces over infinite rooted trees.
//!
//! Trees are never materialised: a [`TreeShape`] is a branching law and a
//! [`Vertex`] is an address word under that law. Functions come in three
//! representations (sparse, radial, rule) with closure rules for the
//! derivative and for composition with the backward shift. On top of that
//! sit truncated norms for the Lipschitz space, weighted `L^inf_mu` spaces and
//! Hardy spaces on homogeneous trees, plus operator-level analysis (norm
//! bounds and witnesses, eigenvalue classification, spectrum bounding
//! disks, finite-section matrices).
//!
//! Every supremum over the infinite tree is computed on a ball of finite
//! radius and reported as a lower bound; [`NormReport::attained_exactly`]
//! marks the cases where the representation proves the truncation is exact.

pub mod error;
pub mod expr;
pub mod func;
pub mod io;
pub mod operators;
pub mod oracle;
pub mod spaces;
pub mod summation;
pub mod tree;
pub mod weight;

pub use error::{Error, Result};
pub use expr::{Expr, ParamEnv};
pub use func::{linear_combine, Scalar, TreeFunction, VertexMap};
pub use operators::{DiskRegion, EigenClassification, EigenVerdict, OperatorDescriptor};
pub use spaces::{HardyParams, NormReport, Space, Witness};
pub use tree::{backward_shift, TreeShape, Vertex};
pub use weight::Weight;

/// Absolute tolerance used for all floating-point comparisons in the crate.
pub const TOLERANCE: f64 = 1e-12;
