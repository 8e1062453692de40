//! Exact arithmetic and high-precision numerics for relations between traces
//! of singular moduli, Hurwitz-Kronecker class numbers, and Hecke traces.
//!
//! The crate is organized around one exact carrier type, [`qseries::QSeries`]
//! (truncated Laurent series in `q` with big-rational coefficients), plus:
//!
//! - [`quadforms`]: reduction and enumeration of positive definite binary
//!   quadratic forms, Hurwitz class numbers `H(d)`
//! - [`modforms`]: Miller bases of level-1 cusp spaces, Hecke matrices and
//!   their exact traces
//! - [`cmtrace`]: high-precision evaluation of `j_m` at CM points and the
//!   integer trace functions `t_m(d)`
//! - [`weilrep`]: exact Weil-representation matrices over `Q(zeta_8)` and
//!   half-integral-weight Kloosterman sums
//! - [`poincare`]: weakly holomorphic Poincare series, exact principal parts
//!   and numeric cusp components via Kloosterman-Bessel series
//! - [`relations`]: the combinatorial kernels `p_k`, `lambda_k`, `Q_{nu,i}`
//!   and coefficient-by-coefficient verification of the trace relations
//! - [`lfunc`]: symmetrized shifted convolution L-values, Petersson norms,
//!   and the modified traces they control

pub mod arith;
pub mod cmtrace;
pub mod lfunc;
pub mod modforms;
pub mod mp;
pub mod poincare;
pub mod qseries;
pub mod quadforms;
pub mod relations;
pub mod report;
pub mod weilrep;

mod error;

pub use error::{Error, Result};
