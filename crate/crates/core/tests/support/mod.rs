//! Independent oracles and data generators shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

pub mod cell;
pub mod dense_lp;
pub mod milp_oracle;
pub mod stp_oracle;
pub mod synth;
