//! Distance-to-monotonicity estimation for Boolean functions on the
//! hypercube: nonadaptive samplers, exact oracles, isoperimetric quantities
//! and lower-bound instances.

pub mod approx;
pub mod cli;
pub mod cube;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod flow;
pub mod func;
pub mod isoperimetry;
pub mod lowerbound;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod suite;

pub use lowerbound::families;

pub use cube::{Cube, DimSet, Point};
pub use error::{Error, Result};
pub use func::{Func, Value};
