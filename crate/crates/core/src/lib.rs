//! Singular fields at the tip of a sharp notch in dipolar gradient elasticity:
//! exponents, eigenfunctions, derived fields and their verification.

// range checks are written `!(x > lo)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod charfn;
pub mod cli;
pub mod eigensolver;
pub mod equilibrium;
pub mod error;
pub mod fields;
pub mod model;
pub mod series;
pub mod verify;
