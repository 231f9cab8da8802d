//! Linear input-output channels of the steering loop, saturation ignored.
//!
//! With `G = b/a`, `G_Mz = c/a`, `G_n = n_n/d_n`, `Q = n_Q/d_Q` and
//! `G_sa = n_S/d_S` all channels share
//!
//! ```text
//! P = n_n a (d_S d_Q - n_S n_Q) + d_n n_S n_Q b
//! ```
//!
//! and
//!
//! ```text
//! r/delta_s       = b n_n d_S d_Q / P
//! r/M_z           = c n_n (d_S d_Q - n_S n_Q) / P
//! delta_mr/delta_s = n_S n_Q (n_n a - d_n b) / P
//! delta_mr/M_z    = -n_S n_Q d_n c / P
//! ```

use crate::error::{Error, Result};
use crate::lti::{lsim, Polynomial, RationalTF};

use super::sim::{simulate_block, SimResult};
use super::{Scenario, SteeringLoop};

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTfs {
    pub r_from_steer: RationalTF,
    pub r_from_moment: RationalTF,
    pub dmr_from_steer: RationalTF,
    pub dmr_from_moment: RationalTF,
    pub characteristic: Polynomial,
}

/// Largest sample-wise deviation between block and channel simulations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub max_dev_r: f64,
    pub max_dev_dmr: f64,
    pub max_dev_delta_f: f64,
}

impl EquivalenceReport {
    pub fn max(&self) -> f64 {
        self.max_dev_r.max(self.max_dev_dmr).max(self.max_dev_delta_f)
    }
}

impl ChannelTfs {
    pub fn build(lp: &SteeringLoop) -> Result<Self> {
        let g = lp.plant()?;
        let gm = lp.disturbance_plant()?;
        let (b, a) = (g.num(), g.den());
        // shared denominator; G_Mz numerator over the same monic a
        debug_assert_eq!(a, gm.den());
        let c = gm.num();
        let (nn, dn) = (lp.desired().tf().num(), lp.desired().tf().den());
        let (nq, dq) = (lp.q().tf().num(), lp.q().tf().den());
        let (ns, ds) = (lp.actuator().num(), lp.actuator().den());

        let sq = ns * nq;
        let one_minus = &(ds * dq) - &sq;
        let p = &(&(nn * a) * &one_minus) + &(&(dn * &sq) * b);
        if p.is_zero() {
            return Err(Error::AlgebraicDegeneracy);
        }
        let r_from_steer = RationalTF::new(&(&(b * nn) * ds) * dq, p.clone())?;
        let r_from_moment = RationalTF::new(&(c * nn) * &one_minus, p.clone())?;
        let dmr_from_steer = RationalTF::new(&sq * &(&(nn * a) - &(dn * b)), p.clone())?;
        let dmr_from_moment = RationalTF::new(-&(&(&sq * dn) * c), p.clone())?;
        let characteristic = r_from_steer.den().clone();
        Ok(Self {
            r_from_steer,
            r_from_moment,
            dmr_from_steer,
            dmr_from_moment,
            characteristic,
        })
    }

    pub fn is_stable(&self) -> Result<bool> {
        self.characteristic.is_hurwitz()
    }

    /// Linear response `(r, delta_mr, delta_f)` to the scenario's inputs.
    pub fn simulate(&self, sc: &Scenario) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let steer = sc.steer_series()?.channel(0);
        let moment = sc.moment_series()?.channel(0);
        let dt = sc.dt();
        let r = add(
            &lsim(&self.r_from_steer, dt, &steer)?,
            &lsim(&self.r_from_moment, dt, &moment)?,
        );
        let dmr = add(
            &lsim(&self.dmr_from_steer, dt, &steer)?,
            &lsim(&self.dmr_from_moment, dt, &moment)?,
        );
        let delta_f = add(&steer, &dmr);
        Ok((r, dmr, delta_f))
    }

    /// Compares the channel responses with the block-level simulation run
    /// with saturation disabled.
    pub fn verify_against_block(&self, lp: &SteeringLoop, sc: &Scenario) -> Result<EquivalenceReport> {
        let block: SimResult = simulate_block(lp, &sc.with_saturation(false))?;
        let (r, dmr, delta_f) = self.simulate(sc)?;
        Ok(EquivalenceReport {
            max_dev_r: max_abs_diff(&block.r, &r),
            max_dev_dmr: max_abs_diff(&block.delta_mr, &dmr),
            max_dev_delta_f: max_abs_diff(&block.delta_f, &delta_f),
        })
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
