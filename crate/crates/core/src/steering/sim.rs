//! Time-domain simulation of the steering loop from its individual blocks.
//!
//! Each block (`G`, `G_Mz`, `Q/G_n`, `Q`, `G_sa`) is realized on its own and
//! the interconnection is assembled in state space. Two continuous-time
//! composites share one state vector:
//!
//! * *tracking*: the correction equals the controller demand, the loop is
//!   closed continuously;
//! * *held*: the correction is an external input held over the sample
//!   (the clamp value when saturated, zero for the conventional vehicle).
//!
//! Both are discretized exactly by ZOH at `dt`. At every sample the demand of
//! the tracking composite decides which one advances the state, so without
//! saturation the result is the exact sampled response of the continuous loop.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::ss::Stepper;
use crate::lti::{DiscreteStateSpace, StateSpace};

use super::{FeedbackTap, Scenario, SteeringLoop};

// signal indices
const R: usize = 0;
const W: usize = 1;
const QO: usize = 2;
const V: usize = 3;
const MU: usize = 4;
const DF: usize = 5;
const UQ: usize = 6;
const SIGNALS: usize = 7;

// exogenous inputs
const DS: usize = 0;
const MZ: usize = 1;
const DA: usize = 2;
const INPUTS: usize = 3;

// composite outputs
const OUT_R: usize = 0;
const OUT_MU: usize = 1;
const OUT_DF: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Tracking,
    Held,
}

struct Blocks {
    plant: StateSpace,
    moment: StateSpace,
    correction: StateSpace,
    q: StateSpace,
    actuator: StateSpace,
}

impl Blocks {
    fn realize(lp: &SteeringLoop) -> Result<Self> {
        Ok(Self {
            plant: StateSpace::from_tf(&lp.plant()?)?,
            moment: StateSpace::from_tf(&lp.disturbance_plant()?)?,
            correction: StateSpace::from_tf(&lp.correction_block()?)?,
            q: StateSpace::from_tf(lp.q().tf())?,
            actuator: StateSpace::from_tf(lp.actuator())?,
        })
    }

    fn list(&self) -> [&StateSpace; 5] {
        [&self.plant, &self.moment, &self.correction, &self.q, &self.actuator]
    }

    fn offsets(&self) -> ([usize; 5], usize) {
        let mut off = [0; 5];
        let mut n = 0;
        for (i, b) in self.list().iter().enumerate() {
            off[i] = n;
            n += b.states();
        }
        (off, n)
    }
}

fn composite(blocks: &Blocks, tap: FeedbackTap, mode: Mode) -> Result<StateSpace> {
    let (off, n) = blocks.offsets();
    let [og, om, ow, oq, os] = off;
    let (g, m, w, q, s) = (
        &blocks.plant,
        &blocks.moment,
        &blocks.correction,
        &blocks.q,
        &blocks.actuator,
    );

    let mut zx = DMatrix::<f64>::zeros(SIGNALS, n);
    let mut ze = DMatrix::<f64>::zeros(SIGNALS, INPUTS);
    let mut zz = DMatrix::<f64>::zeros(SIGNALS, SIGNALS);

    // r = C_G x_G + D_G delta_f + C_M x_M + D_M M_z
    for k in 0..g.states() {
        zx[(R, og + k)] = g.c()[(0, k)];
    }
    zz[(R, DF)] = g.d()[(0, 0)];
    for k in 0..m.states() {
        zx[(R, om + k)] = m.c()[(0, k)];
    }
    ze[(R, MZ)] = m.d()[(0, 0)];
    // w = (Q/G_n) r
    for k in 0..w.states() {
        zx[(W, ow + k)] = w.c()[(0, k)];
    }
    zz[(W, R)] = w.d()[(0, 0)];
    // q = Q u_Q
    for k in 0..q.states() {
        zx[(QO, oq + k)] = q.c()[(0, k)];
    }
    zz[(QO, UQ)] = q.d()[(0, 0)];
    // v = q - w
    zz[(V, QO)] = 1.0;
    zz[(V, W)] = -1.0;
    // demand = G_sa v
    for k in 0..s.states() {
        zx[(MU, os + k)] = s.c()[(0, k)];
    }
    zz[(MU, V)] = s.d()[(0, 0)];
    // delta_f = delta_s + correction
    ze[(DF, DS)] = 1.0;
    match mode {
        Mode::Tracking => zz[(DF, MU)] = 1.0,
        Mode::Held => ze[(DF, DA)] = 1.0,
    }
    match tap {
        FeedbackTap::PostSaturation => zz[(UQ, DF)] = 1.0,
        FeedbackTap::PreSaturation => {
            ze[(UQ, DS)] = 1.0;
            zz[(UQ, MU)] = 1.0;
        }
    }

    let lhs = DMatrix::<f64>::identity(SIGNALS, SIGNALS) - zz;
    let lu = lhs.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::AlgebraicLoop);
    }
    let hx = lu.solve(&zx).ok_or(Error::AlgebraicLoop)?;
    let he = lu.solve(&ze).ok_or(Error::AlgebraicLoop)?;

    // x' = A_blk x + B_z z + B_e e
    let mut a_blk = DMatrix::<f64>::zeros(n, n);
    let mut bz = DMatrix::<f64>::zeros(n, SIGNALS);
    let mut be = DMatrix::<f64>::zeros(n, INPUTS);
    let mut place = |block: &StateSpace, o: usize, signal: Option<usize>, input: Option<usize>| {
        let k = block.states();
        a_blk.view_mut((o, o), (k, k)).copy_from(block.a());
        for i in 0..k {
            if let Some(sig) = signal {
                bz[(o + i, sig)] = block.b()[(i, 0)];
            }
            if let Some(inp) = input {
                be[(o + i, inp)] = block.b()[(i, 0)];
            }
        }
    };
    place(g, og, Some(DF), None);
    place(m, om, None, Some(MZ));
    place(w, ow, Some(R), None);
    place(q, oq, Some(UQ), None);
    place(s, os, Some(V), None);

    let a = &a_blk + &bz * &hx;
    let b = &be + &bz * &he;
    let mut c = DMatrix::<f64>::zeros(3, n);
    let mut d = DMatrix::<f64>::zeros(3, INPUTS);
    for (row, sig) in [(OUT_R, R), (OUT_MU, MU), (OUT_DF, DF)] {
        c.row_mut(row).copy_from(&hx.row(sig));
        d.row_mut(row).copy_from(&he.row(sig));
    }
    StateSpace::new(a, b, c, d)
}

/// Time series produced by one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub dt: f64,
    /// Yaw rate, rad/s.
    pub r: Vec<f64>,
    /// Applied wheel angle, rad.
    pub delta_f: Vec<f64>,
    /// Applied correction, rad.
    pub delta_mr: Vec<f64>,
    /// Controller demand before the clamp, rad.
    pub delta_mr_unsat: Vec<f64>,
    /// `|delta_mr_unsat| > sat_limit` at the sample.
    pub saturated: Vec<bool>,
    pub summary: SimSummary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSummary {
    pub peak_delta_mr: f64,
    pub peak_delta_mr_unsat: f64,
    pub peak_r: f64,
    /// Mean of the final 5% of samples.
    pub steady_state_r: f64,
    pub any_saturated: bool,
}

impl SimResult {
    pub fn times(&self) -> Vec<f64> {
        (0..self.r.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

pub(crate) fn steady_state(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let tail = ((x.len() as f64) * 0.05).ceil().max(1.0) as usize;
    let tail = &x[x.len() - tail.min(x.len())..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn summarize(r: &[f64], dmr: &[f64], unsat: &[f64], flags: &[bool]) -> SimSummary {
    SimSummary {
        peak_delta_mr: peak(dmr),
        peak_delta_mr_unsat: peak(unsat),
        peak_r: peak(r),
        steady_state_r: steady_state(r),
        any_saturated: flags.iter().any(|&f| f),
    }
}

fn discretize(blocks: &Blocks, tap: FeedbackTap, mode: Mode, dt: f64) -> Result<DiscreteStateSpace> {
    composite(blocks, tap, mode)?.discretize_zoh(dt)
}

/// Simulates the regulated vehicle. With `saturation_enabled` the correction
/// is clamped to `+-sat_limit`; saturated samples are flagged either way.
pub fn simulate_block(lp: &SteeringLoop, sc: &Scenario) -> Result<SimResult> {
    let blocks = Blocks::realize(lp)?;
    let dt = sc.dt();
    let tracking = discretize(&blocks, lp.feedback_tap(), Mode::Tracking, dt)?;
    let held = if sc.saturation_enabled() {
        Some(Stepper::new(&discretize(&blocks, lp.feedback_tap(), Mode::Held, dt)?))
    } else {
        None
    };
    let mut track = Stepper::new(&tracking);
    let mut held = held;

    let steer = sc.steer_series()?.channel(0);
    let moment = sc.moment_series()?.channel(0);
    let limit = lp.sat_limit();
    let n = sc.samples();
    let mut r = Vec::with_capacity(n);
    let mut delta_f = Vec::with_capacity(n);
    let mut dmr = Vec::with_capacity(n);
    let mut unsat = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    let mut y = [0.0; 3];

    for k in 0..n {
        let mut e = [steer[k], moment[k], 0.0];
        track.output(&e, &mut y);
        let demand = y[OUT_MU];
        let exceeds = demand.abs() > limit;
        match held.as_mut() {
            Some(h) if exceeds => {
                e[DA] = limit.copysign(demand);
                h.set_state(track.state());
                h.output(&e, &mut y);
                r.push(y[OUT_R]);
                delta_f.push(y[OUT_DF]);
                dmr.push(e[DA]);
                unsat.push(y[OUT_MU]);
                flags.push(true);
                h.advance(&e);
                track.set_state(h.state());
            }
            _ => {
                r.push(y[OUT_R]);
                delta_f.push(y[OUT_DF]);
                dmr.push(demand);
                unsat.push(demand);
                flags.push(exceeds);
                track.advance(&e);
            }
        }
    }
    let summary = summarize(&r, &dmr, &unsat, &flags);
    Ok(SimResult {
        dt,
        r,
        delta_f,
        delta_mr: dmr,
        delta_mr_unsat: unsat,
        saturated: flags,
        summary,
    })
}

/// The same vehicle and inputs with the correction path removed.
pub fn simulate_conventional(lp: &SteeringLoop, sc: &Scenario) -> Result<SimResult> {
    let plant = StateSpace::from_tf(&lp.plant()?)?.discretize_zoh(sc.dt())?;
    let moment = StateSpace::from_tf(&lp.disturbance_plant()?)?.discretize_zoh(sc.dt())?;
    let steer_u = sc.steer_series()?;
    let r_s = plant.simulate(&steer_u)?.channel(0);
    let r_m = moment.simulate(&sc.moment_series()?)?.channel(0);
    let r: Vec<f64> = r_s.iter().zip(&r_m).map(|(a, b)| a + b).collect();
    let n = r.len();
    let zeros = vec![0.0; n];
    let flags = vec![false; n];
    let summary = summarize(&r, &zeros, &zeros, &flags);
    Ok(SimResult {
        dt: sc.dt(),
        r,
        delta_f: steer_u.channel(0),
        delta_mr: zeros.clone(),
        delta_mr_unsat: zeros,
        saturated: flags,
        summary,
    })
}
