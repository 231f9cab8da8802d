//! Linear time-invariant building blocks: polynomials, rational transfer
//! functions, state-space realizations, ZOH discretization, simulation and
//! frequency response.

pub mod expm;
pub mod freq;
pub mod poly;
pub mod roots;
pub mod ss;
pub mod tf;

pub use freq::{FrequencyGrid, FrequencyResponse};
pub use poly::Polynomial;
pub use ss::{lsim, step_response, DiscreteStateSpace, StateSpace, TimeSeries};
pub use tf::RationalTF;
