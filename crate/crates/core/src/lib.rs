//! QC relaxation of AC optimal power flow.
//!
//! `netdata` reads networks, `envelopes` generates the convex envelopes,
//! `qcmodel` assembles the second-order cone program, and `obbt` tightens
//! the variable boxes the envelopes are built on.

pub mod envelopes;
pub mod gap;
pub mod netdata;
pub mod obbt;
pub mod qcmodel;

pub use gap::{gap_percent, implied_bound, GapDenominator, GapError};
