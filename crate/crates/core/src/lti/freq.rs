use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Ascending, strictly positive angular frequencies in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(invalid("omegas", "empty grid"));
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("omegas", "frequencies must be positive and finite"));
        }
        if omegas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("omegas", "frequencies must be strictly increasing"));
        }
        Ok(Self { omegas })
    }

    /// `n` points spaced evenly in log10 between `lo` and `hi` inclusive.
    pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(invalid("omega range", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(invalid("points", "need at least two points"));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (n - 1) as f64;
        Self::new((0..n).map(|i| 10f64.powf(a + step * i as f64)).collect())
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Complex frequency response. `None` marks a grid point where evaluation
/// hit a pole.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    grid: FrequencyGrid,
    values: Vec<Option<Complex64>>,
}

impl FrequencyResponse {
    pub(crate) fn new(grid: FrequencyGrid, values: Vec<Option<Complex64>>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Option<Complex64>] {
        &self.values
    }

    pub fn magnitudes(&self) -> Vec<Option<f64>> {
        self.values.iter().map(|v| v.map(|z| z.norm())).collect()
    }
}
