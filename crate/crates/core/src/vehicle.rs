//! Linear single-track (bicycle) model of the yaw dynamics at constant speed.
//!
//! Yaw rate responds to the front wheel angle through
//! `(b1 s + b0) / (a2 s^2 + a1 s + a0)` and to a yaw moment about the centre of
//! gravity through `(m v^2 s + (c_f + c_r) v) / (a2 s^2 + a1 s + a0)`, with
//! cornering stiffnesses scaled by the road friction coefficient.
//! All quantities are SI.

use crate::error::{invalid, Error, Result};
use crate::lti::{Polynomial, RationalTF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleParams {
    /// CG to front axle, m.
    pub l_f: f64,
    /// CG to rear axle, m.
    pub l_r: f64,
    /// Mass, kg.
    pub mass: f64,
    /// Yaw moment of inertia, kg m^2.
    pub yaw_inertia: f64,
    /// Front cornering stiffness on dry road, N/rad.
    pub c_f0: f64,
    /// Rear cornering stiffness on dry road, N/rad.
    pub c_r0: f64,
    /// Friction coefficient the nominal model is built at.
    pub mu_nominal: f64,
}

impl Default for VehicleParams {
    /// Mid-sized passenger car.
    fn default() -> Self {
        Self {
            l_f: 1.25,
            l_r: 1.32,
            mass: 1296.0,
            yaw_inertia: 1750.0,
            c_f0: 84_000.0,
            c_r0: 96_000.0,
            mu_nominal: 1.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("l_f", self.l_f),
            ("l_r", self.l_r),
            ("mass", self.mass),
            ("yaw_inertia", self.yaw_inertia),
            ("c_f0", self.c_f0),
            ("c_r0", self.c_r0),
            ("mu_nominal", self.mu_nominal),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn wheelbase(&self) -> f64 {
        self.l_f + self.l_r
    }
}

/// Constant longitudinal speed and road friction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingCondition {
    v: f64,
    mu: f64,
}

impl OperatingCondition {
    pub fn new(v: f64, mu: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid("v", format!("speed must be positive, got {v}")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(invalid("mu", format!("friction must lie in (0, 1], got {mu}")));
        }
        Ok(Self { v, mu })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Raw, unnormalised coefficients of the yaw-rate transfer functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YawCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Moment input numerator: `e1 s + e0`.
    pub e0: f64,
    pub e1: f64,
}

impl YawCoefficients {
    pub fn compute(p: &VehicleParams, v: f64, mu: f64) -> Self {
        let c_f = mu * p.c_f0;
        let c_r = mu * p.c_r0;
        let m = p.mass;
        let j = p.yaw_inertia;
        let l = p.wheelbase();
        let v2 = v * v;
        Self {
            b0: c_f * c_r * l * v,
            b1: c_f * p.l_f * m * v2,
            a0: c_f * c_r * l * l + (c_r * p.l_r - c_f * p.l_f) * m * v2,
            a1: (c_f * (j + p.l_f * p.l_f * m) + c_r * (j + p.l_r * p.l_r * m)) * v,
            a2: j * m * v2,
            e0: (c_f + c_r) * v,
            e1: m * v2,
        }
    }

    pub fn denominator(&self) -> Polynomial {
        Polynomial::new(vec![self.a0, self.a1, self.a2])
    }
}

pub fn coefficients(p: &VehicleParams, oc: &OperatingCondition) -> YawCoefficients {
    YawCoefficients::compute(p, oc.v(), oc.mu())
}

/// Front wheel angle (rad) to yaw rate (rad/s).
pub fn steering_tf(p: &VehicleParams, oc: &OperatingCondition) -> Result<RationalTF> {
    p.validate()?;
    let k = coefficients(p, oc);
    RationalTF::new(Polynomial::new(vec![k.b0, k.b1]), k.denominator())
}

/// Yaw disturbance moment (N m) to yaw rate (rad/s).
pub fn disturbance_tf(p: &VehicleParams, oc: &OperatingCondition) -> Result<RationalTF> {
    p.validate()?;
    let k = coefficients(p, oc);
    RationalTF::new(Polynomial::new(vec![k.e0, k.e1]), k.denominator())
}

/// Steady-state yaw rate per unit steering angle at the nominal friction.
pub fn nominal_dc_gain(p: &VehicleParams, v: f64) -> Result<f64> {
    p.validate()?;
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid("v", format!("speed must be positive, got {v}")));
    }
    let k = YawCoefficients::compute(p, v, p.mu_nominal);
    if k.a0 == 0.0 {
        return Err(Error::Degenerate(format!("a0 = 0 at v = {v} m/s (critical speed)")));
    }
    Ok(k.b0 / k.a0)
}
