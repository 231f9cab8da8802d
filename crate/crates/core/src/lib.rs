//! Model-regulator (two-degree-of-freedom) control with a limited-integrator
//! Q filter, applied to active steering of a single-track vehicle model.
//!
//! * [`lti`]: polynomial and rational-function algebra, realizations, exact
//!   ZOH discretization, simulation, frequency response.
//! * [`vehicle`]: yaw-rate transfer functions of the single-track model.
//! * [`regulator`]: Q filters, closed-loop maps, integrator counting and the
//!   small-gain robustness test.
//! * [`steering`]: the regulated steering loop with a saturating auxiliary
//!   actuator, its linear channels and time-domain simulation.

pub mod error;
pub mod lti;
pub mod regulator;
pub mod steering;
pub mod vehicle;

pub use error::{Error, Result};
