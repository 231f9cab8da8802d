//! Model-regulator steering loop.
//!
//! The driver command `delta_s` is summed with a bounded correction
//! `delta_mr` from an auxiliary actuator `G_sa`. The correction is
//! `G_sa (Q delta_f - (Q/G_n) r)`, where `delta_f = delta_s + delta_mr` is the
//! wheel angle actually applied and `r` the measured yaw rate. A yaw moment
//! `M_z` enters through the disturbance path of the vehicle.

mod campaign;
mod channels;
mod sim;

pub use campaign::{
    min_saturating_moment, normalized_steer_step, peak_actuator_per_unit_moment, reference_trace,
    run_campaign, tracking_deviation, CampaignEntry, ConditionRun,
};
pub use channels::{ChannelTfs, EquivalenceReport};
pub use sim::{simulate_block, simulate_conventional, SimResult, SimSummary};

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::lti::{RationalTF, TimeSeries};
use crate::regulator::{DesiredModel, QFilter};
use crate::vehicle::{self, OperatingCondition, VehicleParams};

/// Auxiliary actuator authority: 3 degrees of wheel rotation.
pub const DEFAULT_SAT_LIMIT: f64 = 3.0 * PI / 180.0;

/// Which correction signal feeds the `Q delta_f` branch of the regulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FeedbackTap {
    /// The clamped, physically applied correction.
    #[default]
    PostSaturation,
    /// The controller demand before the clamp.
    PreSaturation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringLoop {
    params: VehicleParams,
    condition: OperatingCondition,
    desired: DesiredModel,
    q: QFilter,
    actuator: RationalTF,
    sat_limit: f64,
    tap: FeedbackTap,
}

impl SteeringLoop {
    /// Loop at `condition` with the reference model `K_n(v)/(tau_n s + 1)`,
    /// unity actuator and the default 3 degree authority.
    pub fn new(params: VehicleParams, condition: OperatingCondition, tau_n: f64, q: QFilter) -> Result<Self> {
        params.validate()?;
        let k_n = vehicle::nominal_dc_gain(&params, condition.v())?;
        Ok(Self {
            params,
            condition,
            desired: DesiredModel::first_order(k_n, tau_n)?,
            q,
            actuator: RationalTF::gain(1.0),
            sat_limit: DEFAULT_SAT_LIMIT,
            tap: FeedbackTap::default(),
        })
    }

    pub fn with_actuator(mut self, actuator: RationalTF) -> Result<Self> {
        if !actuator.is_proper() {
            return Err(invalid("actuator", "G_sa must be proper"));
        }
        if !actuator.is_stable()? {
            return Err(invalid("actuator", "G_sa must be stable"));
        }
        self.actuator = actuator;
        Ok(self)
    }

    pub fn with_sat_limit(mut self, limit: f64) -> Result<Self> {
        if !(limit.is_finite() && limit > 0.0) {
            return Err(invalid("sat_limit", format!("must be positive, got {limit}")));
        }
        self.sat_limit = limit;
        Ok(self)
    }

    pub fn with_feedback_tap(mut self, tap: FeedbackTap) -> Self {
        self.tap = tap;
        self
    }

    pub fn with_q(mut self, q: QFilter) -> Self {
        self.q = q;
        self
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }
    pub fn condition(&self) -> &OperatingCondition {
        &self.condition
    }
    pub fn desired(&self) -> &DesiredModel {
        &self.desired
    }
    pub fn q(&self) -> &QFilter {
        &self.q
    }
    pub fn actuator(&self) -> &RationalTF {
        &self.actuator
    }
    pub fn sat_limit(&self) -> f64 {
        self.sat_limit
    }
    pub fn feedback_tap(&self) -> FeedbackTap {
        self.tap
    }

    pub fn plant(&self) -> Result<RationalTF> {
        vehicle::steering_tf(&self.params, &self.condition)
    }

    pub fn disturbance_plant(&self) -> Result<RationalTF> {
        vehicle::disturbance_tf(&self.params, &self.condition)
    }

    /// The feedback block `Q / G_n`; requires `reldeg(Q) >= reldeg(G_n)`.
    pub fn correction_block(&self) -> Result<RationalTF> {
        let (q, gn) = (self.q.tf(), self.desired.tf());
        if !q.is_zero() && q.relative_degree() < gn.relative_degree() {
            return Err(Error::NonCausalCorrection {
                q: q.relative_degree(),
                gn: gn.relative_degree(),
            });
        }
        q.div(gn)
    }
}

/// A step of `amplitude` starting at `onset` seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInput {
    pub amplitude: f64,
    pub onset: f64,
}

impl StepInput {
    pub fn new(amplitude: f64, onset: f64) -> Self {
        Self { amplitude, onset }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    duration: f64,
    dt: f64,
    steer: StepInput,
    moment: StepInput,
    saturation_enabled: bool,
}

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_DURATION: f64 = 5.0;

impl Scenario {
    pub fn new(duration: f64, dt: f64, steer: StepInput, moment: StepInput, saturation_enabled: bool) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(invalid("duration", format!("must be positive, got {duration}")));
        }
        if !(dt.is_finite() && dt > 0.0 && dt <= duration) {
            return Err(invalid("dt", format!("need 0 < dt <= duration, got {dt}")));
        }
        for (name, s) in [("steer onset", steer), ("moment onset", moment)] {
            if !(s.onset >= 0.0 && s.onset <= duration) {
                return Err(Error::InvalidParameter {
                    name: "onset",
                    reason: format!("{name} {} outside [0, {duration}]", s.onset),
                });
            }
            if !s.amplitude.is_finite() {
                return Err(invalid("amplitude", format!("{name}: amplitude must be finite")));
            }
        }
        Ok(Self {
            duration,
            dt,
            steer,
            moment,
            saturation_enabled,
        })
    }

    /// Steering step only, default timing.
    pub fn steer_step(amplitude: f64, saturation_enabled: bool) -> Result<Self> {
        Self::new(
            DEFAULT_DURATION,
            DEFAULT_DT,
            StepInput::new(amplitude, 0.0),
            StepInput::default(),
            saturation_enabled,
        )
    }

    /// Yaw moment step only, default timing.
    pub fn moment_step(amplitude: f64, saturation_enabled: bool) -> Result<Self> {
        Self::new(
            DEFAULT_DURATION,
            DEFAULT_DT,
            StepInput::default(),
            StepInput::new(amplitude, 0.0),
            saturation_enabled,
        )
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn steer(&self) -> StepInput {
        self.steer
    }
    pub fn moment(&self) -> StepInput {
        self.moment
    }
    pub fn saturation_enabled(&self) -> bool {
        self.saturation_enabled
    }

    pub fn with_saturation(mut self, enabled: bool) -> Self {
        self.saturation_enabled = enabled;
        self
    }

    pub fn with_steer(mut self, steer: StepInput) -> Self {
        self.steer = steer;
        self
    }

    pub fn with_moment(mut self, moment: StepInput) -> Self {
        self.moment = moment;
        self
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    pub fn steer_series(&self) -> Result<TimeSeries> {
        TimeSeries::step(self.dt, self.samples(), self.steer.amplitude, self.steer.onset)
    }

    pub fn moment_series(&self) -> Result<TimeSeries> {
        TimeSeries::step(self.dt, self.samples(), self.moment.amplitude, self.moment.onset)
    }
}
