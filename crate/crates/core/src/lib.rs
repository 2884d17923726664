//! Spin-bath decoherence models, gravitational clock damping and the
//! feasibility calculus for measuring a global observable.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod chain;
pub mod density;
pub mod despagnat;
pub mod error;
pub mod feasibility;
pub mod logc;
pub mod oracle;
pub mod realclock;
pub mod sampling;
pub mod types;
pub mod undecidability;
pub mod validation;
pub mod zurek;

pub use error::{Error, Result};
pub use logc::{log_product, LogComplex};
pub use types::{Bath, BathSpin, PhysicalConstants, PhysicalScenario, QubitAmplitudes};
