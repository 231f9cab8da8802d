use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lti::step_response;
use crate::vehicle::OperatingCondition;

use super::channels::{max_abs_diff, ChannelTfs};
use super::sim::{simulate_block, simulate_conventional, SimResult};
use super::{Scenario, SteeringLoop};

/// Driver step that gives a steady yaw rate of 1 rad/s on the nominal
/// (dry-road) vehicle: `1 / K_n(v)`.
pub fn normalized_steer_step(lp: &SteeringLoop) -> Result<f64> {
    let k = lp.desired().k_n();
    if k == 0.0 {
        return Err(Error::Degenerate("zero nominal d.c. gain".into()));
    }
    Ok(1.0 / k)
}

fn require_stable(ch: &ChannelTfs) -> Result<()> {
    if ch.is_stable()? {
        return Ok(());
    }
    let max_real = ch
        .characteristic
        .roots()?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Err(Error::Unstable { max_real })
}

/// Peak `|delta_mr|` of the linear unit-moment step response over the
/// scenario horizon, rad per N m.
pub fn peak_actuator_per_unit_moment(lp: &SteeringLoop, sc: &Scenario) -> Result<f64> {
    let ch = ChannelTfs::build(lp)?;
    require_stable(&ch)?;
    let y = step_response(&ch.dmr_from_moment, sc.dt(), sc.samples(), 1.0, 0.0)?;
    Ok(y.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Smallest step moment whose linear response reaches the actuator limit, N m.
pub fn min_saturating_moment(lp: &SteeringLoop, sc: &Scenario) -> Result<f64> {
    let peak = peak_actuator_per_unit_moment(lp, sc)?;
    if peak == 0.0 {
        return Err(Error::Degenerate("moment does not reach the actuator".into()));
    }
    Ok(lp.sat_limit() / peak)
}

/// Reference-model response `G_n delta_s` to the scenario's steering step.
pub fn reference_trace(lp: &SteeringLoop, sc: &Scenario) -> Result<Vec<f64>> {
    let s = sc.steer();
    step_response(lp.desired().tf(), sc.dt(), sc.samples(), s.amplitude, s.onset)
}

/// Largest deviation of the simulated yaw rate from the reference model.
pub fn tracking_deviation(lp: &SteeringLoop, sc: &Scenario, res: &SimResult) -> Result<f64> {
    Ok(max_abs_diff(&res.r, &reference_trace(lp, sc)?))
}

/// Controlled and conventional runs of one operating condition.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRun {
    pub controlled: SimResult,
    pub conventional: SimResult,
    pub characteristic_hurwitz: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignEntry {
    pub condition: OperatingCondition,
    pub outcome: Result<ConditionRun>,
}

fn run_one(lp: &SteeringLoop, sc: &Scenario) -> Result<ConditionRun> {
    let ch = ChannelTfs::build(lp)?;
    let characteristic_hurwitz = ch.is_stable()?;
    Ok(ConditionRun {
        controlled: simulate_block(lp, sc)?,
        conventional: simulate_conventional(lp, sc)?,
        characteristic_hurwitz,
    })
}

/// Runs every loop against the scenario; a failing condition is recorded
/// and the rest still run. Output order follows `loops`.
pub fn run_campaign(loops: &[SteeringLoop], sc: &Scenario) -> Vec<CampaignEntry> {
    loops
        .par_iter()
        .map(|lp| CampaignEntry {
            condition: *lp.condition(),
            outcome: run_one(lp, sc),
        })
        .collect()
}
