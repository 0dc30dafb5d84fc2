//! Upper bounds on the global minimum of sums of rational functions over the
//! box `[-1, 1]^n` or the unit sphere, via moment hierarchies in the original
//! variables and over pushforward (image) measures.

// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod eigsolve;
pub mod error;
pub mod generators;
pub mod hierarchy;
pub mod momentmatrix;
pub mod moments;
pub mod oracle;
pub mod poly;
pub mod problem;
pub mod report;
pub mod scalar;
pub mod sdp;

pub use eigsolve::{GenEig, Pencil, PencilStatus, PrecisionPolicy};
pub use error::{Error, Result};
pub use hierarchy::{CoeffMode, HierarchyOptions, HierarchyResult, Method, SRule, Status, Sweep};
pub use momentmatrix::{Basis, SymMatrix};
pub use moments::{MomentOracle, MomentTable, TableLayout, TableOptions};
pub use poly::{Monomial, MultiPoly};
pub use problem::{Fraction, Problem, SetKind};
pub use scalar::{Coefficient, Field};
pub use sdp::{FirstConstraint, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
