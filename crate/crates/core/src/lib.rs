//! Symbol-level diagnostics for global hypoellipticity of systems of
//! left-invariant operators on the torus `T^r` and on `SU(2)`.
//!
//! A system is a grid of [`symbol::ScalarSymbol`]s assembled into a
//! [`block::SystemSymbol`]; [`diagnostics::scan`] evaluates it over the
//! dual up to a cutoff and [`diagnostics::verdict`] turns two scans into a
//! classification.

pub mod block;
pub mod bounds;
pub mod coefficients;
pub mod config;
pub mod counterexample;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod group;
pub mod linalg;
pub mod report;
pub mod selftest;
pub mod symbol;

pub use block::{BlockEvaluation, SystemSymbol};
pub use bounds::{Bound, BoundReport};
pub use coefficients::CoefficientField;
pub use config::{load_config, SystemConfig};
pub use diagnostics::{scan, verdict, Classification, ScanRecord, VerdictReport};
pub use error::{Error, Result};
pub use group::{GroupId, RepIndex};
pub use linalg::{ComplexMatrix, C64};
pub use symbol::{Axis, Order, ScalarSymbol};
