//! Numerical toolkit around critical-line zero gaps of the completed
//! zeta function's derivative.
//!
//! The crate has three layers. [`arith`] and [`analytic`] supply the raw
//! material: sieved multiplicative coefficients with their convolution
//! arrays, and complex special functions up to the Euler-Maclaurin zeta with
//! two derivatives. [`zerofinder`] turns those into certified zero lists and
//! normalized-gap statistics. [`functionals`] and [`optimize`] sit on top:
//! the closed-form mollified-moment functionals, their empirical
//! counterparts computed directly from scanned zeros, and the parameter
//! searches certifying gap bounds on either side of the average spacing.

pub mod analytic;
pub mod arith;
pub mod error;
pub mod functionals;
pub mod optimize;
pub mod quad;
pub mod util;
pub mod zerofinder;

pub use error::{Error, Result};

pub use arith::{ArithTables, CoeffKind};
pub use functionals::{FunctionalResult, MollifierKind, MollifierSpec, PolyF};
pub use optimize::{Direction, OptReport};
pub use zerofinder::{GapStats, ZeroKind, ZeroList};
