#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod adiabatic;
pub mod collective_spin;
pub mod error;
pub mod harness;
pub mod metrology;
pub mod noise;
pub mod oracle;
pub mod phase_estimation;
pub mod pi_code;

pub use error::{Error, Result};
