//! Interference field and average rate of a drone cellular network whose
//! drones follow simplified random-waypoint (SRWP) mobility.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod displacement;
pub mod error;
pub mod interference;
pub mod mobility;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rate;

pub use error::{Error, Result};
