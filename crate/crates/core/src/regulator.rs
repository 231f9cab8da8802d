//! Model-regulator mathematics.
//!
//! The regulator drives the plant input with `u = u_n - (Q/G_n)(y + n) + Q u`,
//! which forces `y ~ G_n u_n` inside the bandwidth of the low-pass `Q`. With
//! `G = n_G/d_G`, `G_n = n_n/d_n` and `Q = n_Q/d_Q`, every closed-loop map
//! shares the characteristic numerator
//!
//! ```text
//! P = n_n d_G (d_Q - n_Q) + d_n n_G n_Q
//! ```
//!
//! which is `G_n (1 - Q) + G Q` over the common denominator `d_n d_G d_Q`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lti::poly::TRAILING_ZERO_TOL;
use crate::lti::{FrequencyGrid, Polynomial, RationalTF};

/// Slack allowed on `|Q(0)| <= 1`.
pub const DC_GAIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum QKind {
    FirstOrder { tau_q: f64 },
    LimitedIntegrator { k: f64, tau: f64, r: RationalTF },
    General,
}

/// Proper, stable low-pass with `|Q(0)| <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFilter {
    tf: RationalTF,
    kind: QKind,
}

impl QFilter {
    /// `1 / (tau_q s + 1)`: unity d.c. gain, one integrator in the loop.
    pub fn first_order(tau_q: f64) -> Result<Self> {
        if !(tau_q.is_finite() && tau_q > 0.0) {
            return Err(invalid("tau_q", format!("must be positive, got {tau_q}")));
        }
        Self::validated(RationalTF::first_order_lag(tau_q)?, QKind::FirstOrder { tau_q })
    }

    /// Q whose loop factor is `Q/(1-Q) = K/(tau s + 1) * R(s)`:
    ///
    /// `Q = K n_R / ((tau s + 1) d_R + K n_R)`
    pub fn limited_integrator(k: f64, tau: f64, r: RationalTF) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid("k", format!("must be positive, got {k}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        if !r.is_proper() {
            return Err(invalid("r", "R(s) must be proper"));
        }
        if r.den().coeff(0) == 0.0 {
            return Err(invalid("r", "R(s) must not have a pole at the origin"));
        }
        let k_nr = r.num().scale(k);
        let lag = Polynomial::new(vec![1.0, tau]);
        let den = &(&lag * r.den()) + &k_nr;
        let tf = RationalTF::new(k_nr, den)?;
        Self::validated(tf, QKind::LimitedIntegrator { k, tau, r })
    }

    /// Limited integrator with `R = 1`: `Q = K / (tau s + 1 + K)`.
    pub fn limited_integrator_simple(k: f64, tau: f64) -> Result<Self> {
        Self::limited_integrator(k, tau, RationalTF::gain(1.0))
    }

    pub fn general(tf: RationalTF) -> Result<Self> {
        Self::validated(tf, QKind::General)
    }

    fn validated(tf: RationalTF, kind: QKind) -> Result<Self> {
        if !tf.is_proper() {
            return Err(Error::InvalidQ(format!(
                "improper (numerator degree {} > denominator degree {})",
                tf.num().degree(),
                tf.den().degree()
            )));
        }
        if !tf.is_stable()? {
            return Err(Error::InvalidQ("unstable: pole outside the open left half-plane".into()));
        }
        let dc = tf.dc_gain()?;
        if dc.abs() > 1.0 + DC_GAIN_TOL {
            return Err(Error::InvalidQ(format!("|Q(0)| = {dc} exceeds 1")));
        }
        Ok(Self { tf, kind })
    }

    pub fn tf(&self) -> &RationalTF {
        &self.tf
    }

    pub fn kind(&self) -> &QKind {
        &self.kind
    }

    /// Standard regulator with the same fast pole as a limited integrator:
    /// `tau_q = tau / (1 + K)`.
    pub fn standard_counterpart(&self) -> Result<Self> {
        match self.kind {
            QKind::LimitedIntegrator { k, tau, .. } => Self::first_order(tau / (1.0 + k)),
            QKind::FirstOrder { tau_q } => Self::first_order(tau_q),
            QKind::General => Err(Error::InvalidQ(
                "standard counterpart is defined for limited-integrator Q only".into(),
            )),
        }
    }
}

/// `Q / (1 - Q)` in canonical form, no cancellation.
pub fn q_over_one_minus_q(q: &QFilter) -> Result<RationalTF> {
    let (n, d) = (q.tf.num(), q.tf.den());
    let diff = d - n;
    if diff.is_zero() {
        return Err(Error::QIsUnity);
    }
    RationalTF::new(n.clone(), diff)
}

/// Number of integrators `Q` places in the loop: the multiplicity of `s = 0`
/// as a root of `d_Q - n_Q`. A coefficient difference counts as zero when it
/// is below `tol` relative to the operands it was formed from.
pub fn integrator_count(q: &QFilter) -> Result<usize> {
    integrator_count_tol(q, TRAILING_ZERO_TOL)
}

pub fn integrator_count_tol(q: &QFilter, tol: f64) -> Result<usize> {
    let (n, d) = (q.tf.num(), q.tf.den());
    if (d - n).is_zero() {
        return Err(Error::QIsUnity);
    }
    let len = n.coeffs().len().max(d.coeffs().len());
    let scale = n.max_abs_coeff().max(d.max_abs_coeff());
    let count = (0..len)
        .take_while(|&k| {
            let (a, b) = (d.coeff(k), n.coeff(k));
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(tol * scale)
        })
        .count();
    Ok(count)
}

/// First-order reference yaw model `K_n / (tau_n s + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesiredModel {
    tf: RationalTF,
    k_n: f64,
    tau_n: f64,
}

/// Default time constant of the reference model, s.
pub const DEFAULT_TAU_N: f64 = 0.15;

impl DesiredModel {
    pub fn first_order(k_n: f64, tau_n: f64) -> Result<Self> {
        if !(k_n.is_finite() && k_n != 0.0) {
            return Err(invalid("k_n", format!("must be finite and nonzero, got {k_n}")));
        }
        if !(tau_n.is_finite() && tau_n > 0.0) {
            return Err(invalid("tau_n", format!("must be positive, got {tau_n}")));
        }
        let tf = RationalTF::first_order_lag(tau_n)?.scale(k_n);
        Ok(Self { tf, k_n, tau_n })
    }

    pub fn tf(&self) -> &RationalTF {
        &self.tf
    }

    pub fn k_n(&self) -> f64 {
        self.k_n
    }

    pub fn tau_n(&self) -> f64 {
        self.tau_n
    }
}

/// Loop gain and the three closed-loop maps of the regulated plant.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopMaps {
    /// `y / u_n = G_n G / (G_n (1-Q) + G Q)`
    pub y_un: RationalTF,
    /// `y / d = G_n (1-Q) / (G_n (1-Q) + G Q)`
    pub y_d: RationalTF,
    /// `y / n = -G Q / (G_n (1-Q) + G Q)`
    pub y_n: RationalTF,
    /// `L = G Q / (G_n (1-Q))`
    pub loop_gain: Option<RationalTF>,
    pub characteristic: Polynomial,
}

fn characteristic_raw(g: &RationalTF, gn: &RationalTF, q: &RationalTF) -> Polynomial {
    let one_minus = q.den() - q.num();
    &(&(gn.num() * g.den()) * &one_minus) + &(&(gn.den() * g.num()) * q.num())
}

pub fn closed_loop_maps(g: &RationalTF, gn: &DesiredModel, q: &QFilter) -> Result<ClosedLoopMaps> {
    closed_loop_maps_tf(g, gn.tf(), q.tf())
}

/// As [`closed_loop_maps`] for an arbitrary nominal model and Q.
pub fn closed_loop_maps_tf(g: &RationalTF, gn: &RationalTF, q: &RationalTF) -> Result<ClosedLoopMaps> {
    let p = characteristic_raw(g, gn, q);
    if p.is_zero() {
        return Err(Error::AlgebraicDegeneracy);
    }
    let one_minus = q.den() - q.num();
    let y_un = RationalTF::new(&(gn.num() * g.num()) * q.den(), p.clone())?;
    let y_d = RationalTF::new(&(gn.num() * g.den()) * &one_minus, p.clone())?;
    let y_n = RationalTF::new(-&(&(g.num() * q.num()) * gn.den()), p.clone())?;
    let l_den = &(g.den() * gn.num()) * &one_minus;
    // Q = 1 gives an infinite loop gain
    let loop_gain = if l_den.is_zero() {
        None
    } else {
        Some(RationalTF::new(&(g.num() * q.num()) * gn.den(), l_den)?)
    };
    let characteristic = y_un.den().clone();
    Ok(ClosedLoopMaps {
        y_un,
        y_d,
        y_n,
        loop_gain,
        characteristic,
    })
}

/// Monic numerator of `G_n (1-Q) + G Q` over the common denominator.
pub fn characteristic_polynomial(g: &RationalTF, gn: &DesiredModel, q: &QFilter) -> Result<Polynomial> {
    let p = characteristic_raw(g, gn.tf(), q.tf());
    if p.is_zero() {
        return Err(Error::AlgebraicDegeneracy);
    }
    let lead = p.leading();
    Ok(p.scale(1.0 / lead))
}

/// `|G(jw)/G_n(jw) - 1|` per grid point; `None` where `G_n(jw) = 0` or either
/// side hits a pole.
pub fn multiplicative_error(g: &RationalTF, gn: &RationalTF, grid: &FrequencyGrid) -> Vec<Option<f64>> {
    grid.omegas()
        .iter()
        .map(|&w| {
            let s = Complex64::new(0.0, w);
            let (gd, gnd) = (g.den().eval(s), gn.den().eval(s));
            let gnn = gn.num().eval(s);
            if gd.norm() == 0.0 || gnd.norm() == 0.0 || gnn.norm() == 0.0 {
                return None;
            }
            let ratio = (g.num().eval(s) / gd) / (gnn / gnd);
            Some((ratio - 1.0).norm())
        })
        .collect()
}

/// Pointwise maximum of `|G_i/G_n - 1|` over a plant family. A point where
/// any member is undefined is reported as `None`.
pub fn family_bound(family: &[RationalTF], gn: &RationalTF, grid: &FrequencyGrid) -> Vec<Option<f64>> {
    let mut bound: Vec<Option<f64>> = vec![Some(0.0); grid.len()];
    for g in family {
        for (b, e) in bound.iter_mut().zip(multiplicative_error(g, gn, grid)) {
            *b = match (*b, e) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            };
        }
    }
    bound
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallGainReport {
    pub pass: bool,
    /// `min over the grid of (1/|dm|) / |Q|`; above 1 when the check passes.
    pub margin: f64,
    pub violations: Vec<f64>,
}

/// Sufficient robust-stability test `|Q(jw)| < 1/|dm(jw)|` at every grid point.
pub fn small_gain_check(q: &QFilter, grid: &FrequencyGrid, dm_bound: &[Option<f64>]) -> Result<SmallGainReport> {
    if dm_bound.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "bound has {} points, grid has {}",
            dm_bound.len(),
            grid.len()
        )));
    }
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (&w, bound) in grid.omegas().iter().zip(dm_bound) {
        let qm = q.tf.eval_jw(w).norm();
        let Some(dm) = bound else {
            violations.push(w);
            margin = margin.min(0.0);
            continue;
        };
        let local = if qm == 0.0 || *dm == 0.0 {
            f64::INFINITY
        } else {
            (1.0 / dm) / qm
        };
        margin = margin.min(local);
        if qm * dm >= 1.0 {
            violations.push(w);
        }
    }
    Ok(SmallGainReport {
        pass: violations.is_empty(),
        margin,
        violations,
    })
}
