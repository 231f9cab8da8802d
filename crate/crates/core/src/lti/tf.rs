//! SISO rational transfer functions `num(s) / den(s)`.
//!
//! Arithmetic is exact polynomial algebra: no common factors are cancelled
//! unless [`RationalTF::minreal`] is called explicitly.

use std::fmt;

use num_complex::Complex64;

use super::freq::{FrequencyGrid, FrequencyResponse};
use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Default relative tolerance for pole/zero cancellation in [`RationalTF::minreal`].
pub const MINREAL_TOL: f64 = 1e-8;

/// Rational function with a monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTF {
    /// Builds `num / den` and normalises the denominator to be monic.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::AlgebraicDegeneracy);
        }
        Ok(Self { num, den }.canonicalize())
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    /// `1 / (tau s + 1)`
    pub fn first_order_lag(tau: f64) -> Result<Self> {
        Self::from_coeffs(&[1.0], &[1.0, tau])
    }

    pub fn canonicalize(self) -> Self {
        let lead = self.den.leading();
        if lead == 1.0 {
            return self;
        }
        Self {
            num: self.num.scale(1.0 / lead),
            den: self.den.scale(1.0 / lead),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg(den) - deg(num)`; the zero function counts as infinitely strictly proper.
    pub fn relative_degree(&self) -> isize {
        if self.num.is_zero() {
            return isize::MAX;
        }
        self.den.degree() as isize - self.num.degree() as isize
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree() > 0
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn eval_jw(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn dc_gain(&self) -> Result<f64> {
        let d0 = self.den.coeff(0);
        if d0 == 0.0 {
            return Err(Error::PoleAtOrigin);
        }
        Ok(self.num.coeff(0) / d0)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    pub fn is_stable(&self) -> Result<bool> {
        self.den.is_hurwitz()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Self::new(num, &self.den * &other.den)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.num.is_zero() {
            return Err(Error::AlgebraicDegeneracy);
        }
        Self::new(&self.num * &other.den, &self.den * &other.num)
    }

    /// `G / (1 - sign * G * H)`; `sign = -1.0` is ordinary negative feedback.
    pub fn feedback(&self, h: &Self, sign: f64) -> Result<Self> {
        let num = &self.num * &h.den;
        let den = &(&self.den * &h.den) - &(&self.num * &h.num).scale(sign);
        Self::new(num, den)
    }

    /// Cancels pole/zero pairs closer than `tol * max(1, |p|)`.
    pub fn minreal(&self, tol: f64) -> Result<Self> {
        if self.num.is_zero() {
            return Ok(Self::gain(0.0));
        }
        let mut zeros = self.zeros()?;
        let mut poles = self.poles()?;
        let mut kept_poles = Vec::with_capacity(poles.len());
        for p in poles.drain(..) {
            let hit = zeros
                .iter()
                .enumerate()
                .filter(|(_, z)| (**z - p).norm() <= tol * p.norm().max(1.0))
                .min_by(|a, b| (*a.1 - p).norm().total_cmp(&(*b.1 - p).norm()))
                .map(|(i, _)| i);
            match hit {
                Some(i) => {
                    zeros.swap_remove(i);
                }
                None => kept_poles.push(p),
            }
        }
        let k = self.num.leading() / self.den.leading();
        let num = Polynomial::from_roots(&zeros).scale(k);
        Self::new(num, Polynomial::from_roots(&kept_poles))
    }

    /// Complex response at each grid frequency; `None` where `den(jw) = 0`.
    pub fn freq_response(&self, grid: &FrequencyGrid) -> FrequencyResponse {
        let values = grid
            .omegas()
            .iter()
            .map(|&w| {
                let s = Complex64::new(0.0, w);
                let d = self.den.eval(s);
                if d.norm() == 0.0 {
                    None
                } else {
                    Some(self.num.eval(s) / d)
                }
            })
            .collect();
        FrequencyResponse::new(grid.clone(), values)
    }

    /// Peak gain over the grid and `w = 0`.
    pub fn peak_gain(&self, grid: &FrequencyGrid) -> f64 {
        let dc = self.eval(Complex64::new(0.0, 0.0)).norm();
        self.freq_response(grid)
            .magnitudes()
            .into_iter()
            .flatten()
            .fold(if dc.is_finite() { dc } else { f64::INFINITY }, f64::max)
    }
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(n: &[f64], d: &[f64]) -> RationalTF {
        RationalTF::from_coeffs(n, d).unwrap()
    }

    #[test]
    fn integrator_unity_feedback() {
        let g = tf(&[1.0], &[0.0, 1.0]);
        let cl = g.feedback(&RationalTF::gain(1.0), -1.0).unwrap();
        assert_eq!(cl, tf(&[1.0], &[1.0, 1.0]));
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let g = tf(&[2.0, 1.0], &[3.0, 4.0, 5.0]);
        assert_eq!(g.mul(&RationalTF::gain(1.0)).unwrap(), g);
    }

    #[test]
    fn canonical_form_is_monic_and_idempotent() {
        let g = tf(&[3.0], &[2.0, 4.0]);
        assert_eq!(g.den().leading(), 1.0);
        assert_eq!(g.clone().canonicalize(), g);
    }

    #[test]
    fn dc_gain_cases() {
        assert_eq!(tf(&[1.0], &[1.0, 0.1]).dc_gain().unwrap(), 1.0);
        let q = tf(&[10.0], &[11.0, 0.006]);
        assert!((q.dc_gain().unwrap() - 10.0 / 11.0).abs() < 1e-15);
        assert_eq!(tf(&[1.0], &[0.0, 1.0]).dc_gain(), Err(Error::PoleAtOrigin));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RationalTF::from_coeffs(&[1.0], &[0.0]),
            Err(Error::AlgebraicDegeneracy)
        );
        // G / (1 - G H) with G H = 1 everywhere
        let g = RationalTF::gain(1.0);
        assert_eq!(g.feedback(&g, 1.0), Err(Error::AlgebraicDegeneracy));
    }

    #[test]
    fn poles_of_simple_systems() {
        let p = tf(&[1.0], &[1.0, 0.01]).poles().unwrap();
        assert!((p[0].re + 100.0).abs() < 1e-12);
        let p = tf(&[1.0], &[2.0, 3.0, 1.0]).poles().unwrap();
        assert!((p[0].re + 2.0).abs() < 1e-12 && (p[1].re + 1.0).abs() < 1e-12);
        assert!(RationalTF::gain(4.0).poles().unwrap().is_empty());
    }

    #[test]
    fn minreal_cancels_common_root() {
        let g = tf(&[2.0, 2.0], &[2.0, 3.0, 1.0]); // 2(s+1)/((s+1)(s+2))
        let m = g.minreal(MINREAL_TOL).unwrap();
        assert_eq!(m.den().degree(), 1);
        assert!((m.dc_gain().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_frequency_magnitude() {
        let tau = 0.25;
        let g = RationalTF::first_order_lag(tau).unwrap();
        assert!((g.eval_jw(1.0 / tau).norm() - 0.5_f64.sqrt()).abs() < 1e-15);
        let low = g.eval_jw(1e-6);
        assert!((low.re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn imaginary_axis_pole_is_marked() {
        let g = tf(&[1.0], &[1.0, 0.0, 1.0]);
        let grid = FrequencyGrid::new(vec![0.5, 1.0, 2.0]).unwrap();
        let r = g.freq_response(&grid);
        assert!(r.values()[0].is_some());
        assert!(r.values()[1].is_none());
    }
}
