//! Positive steady states of logistic equations with harvesting,
//! `-Δu = λ a(x) u - b(x) g(u) - μ h(x)`, on radially symmetric domains in `R^N`.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod families;
pub mod field;
pub mod functional;
pub mod grid;
pub mod hypotheses;
pub mod instanton;
pub mod minimize;
pub mod nonlinearity;
pub mod obstacle;
pub mod operator;
pub mod oracles;
pub mod pipeline;
pub mod problem;
pub mod profile;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use field::{Field, FieldRole};
pub use grid::{DomainKind, RadialGrid, Side};
pub use operator::{BoundaryCondition, LaplaceOperator};
pub use problem::{Coefficients, ProblemSpec, ZeroSet};
pub use profile::Profile;
