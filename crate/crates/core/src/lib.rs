// `!(x > 0.0)` is used deliberately so that NaN fails every positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod init_reg;
pub mod scenario;
pub mod stepper;
