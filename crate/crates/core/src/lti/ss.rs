//! State-space realizations, exact zero-order-hold discretization and
//! discrete-time simulation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expm::expm;
use super::tf::RationalTF;
use crate::error::{Error, Result};

/// Continuous-time `(A, B, C, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

fn check_dims(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
    }
    if b.nrows() != n {
        return Err(Error::Dimension(format!("B has {} rows, A has {n}", b.nrows())));
    }
    if c.ncols() != n {
        return Err(Error::Dimension(format!("C has {} columns, A has {n}", c.ncols())));
    }
    if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "D is {}x{}, expected {}x{}",
            d.nrows(),
            d.ncols(),
            c.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        check_dims(&a, &b, &c, &d)?;
        Ok(Self { a, b, c, d })
    }

    /// Controllable canonical realization of a proper SISO transfer function.
    pub fn from_tf(g: &RationalTF) -> Result<Self> {
        if !g.is_proper() {
            return Err(Error::Improper {
                num: g.num().degree(),
                den: g.den().degree(),
            });
        }
        let den = g.den();
        let n = den.degree();
        let lead = den.leading();
        let feedthrough = g.num().coeff(n) / lead;
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, 1);
        let mut c = DMatrix::zeros(1, n);
        if n > 0 {
            for i in 0..n - 1 {
                a[(i, i + 1)] = 1.0;
            }
            for j in 0..n {
                a[(n - 1, j)] = -den.coeff(j) / lead;
                c[(0, j)] = g.num().coeff(j) / lead - feedthrough * den.coeff(j) / lead;
            }
            b[(n - 1, 0)] = 1.0;
        }
        let d = DMatrix::from_element(1, 1, feedthrough);
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `C (sI - A)^-1 B + D` for output `i`, input `j`.
    pub fn transfer_at(&self, s: Complex64, i: usize, j: usize) -> Result<Complex64> {
        let n = self.states();
        let d = Complex64::new(self.d[(i, j)], 0.0);
        if n == 0 {
            return Ok(d);
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |r, c| {
            let diag = if r == c { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(r, c)]
        });
        let rhs = DMatrix::<Complex64>::from_fn(n, 1, |r, _| Complex64::new(self.b[(r, j)], 0.0));
        let lu = m.clone().lu();
        let singular = || Error::Degenerate("s is an eigenvalue of A".into());
        let mut x = lu.solve(&rhs).ok_or_else(singular)?;
        // companion realizations lose digits at large |s|; refine
        for _ in 0..2 {
            let r = &rhs - &m * &x;
            x += lu.solve(&r).ok_or_else(singular)?;
        }
        let y: Complex64 = (0..n).map(|k| x[(k, 0)] * self.c[(i, k)]).sum();
        Ok(y + d)
    }

    /// Exact ZOH equivalent via `exp([A B; 0 0] dt)`.
    pub fn discretize_zoh(&self, dt: f64) -> Result<DiscreteStateSpace> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("sample time must be positive, got {dt}"),
            });
        }
        let n = self.states();
        let m = self.inputs();
        let mut aug = DMatrix::zeros(n + m, n + m);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.a * dt));
        aug.view_mut((0, n), (n, m)).copy_from(&(&self.b * dt));
        let e = expm(&aug);
        Ok(DiscreteStateSpace {
            a: e.view((0, 0), (n, n)).into_owned(),
            b: e.view((0, n), (n, m)).into_owned(),
            c: self.c.clone(),
            d: self.d.clone(),
            dt,
        })
    }
}

/// Sampled-data system `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k] + D u[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteStateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    dt: f64,
}

impl DiscreteStateSpace {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Zero-initial-state response to a sampled input.
    pub fn simulate(&self, u: &TimeSeries) -> Result<TimeSeries> {
        if u.channels() != self.inputs() {
            return Err(Error::Dimension(format!(
                "input has {} channels, system has {} inputs",
                u.channels(),
                self.inputs()
            )));
        }
        if (u.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::Dimension(format!(
                "input sampled at {} s, system at {} s",
                u.dt(),
                self.dt
            )));
        }
        let mut stepper = Stepper::new(self);
        let mut out = Vec::with_capacity(u.len());
        let mut y = vec![0.0; self.outputs()];
        for sample in u.samples() {
            stepper.output(sample, &mut y);
            out.push(y.clone());
            stepper.advance(sample);
        }
        TimeSeries::new(self.dt, out)
    }
}

/// Allocation-free stepping over a discrete system with row-major copies of
/// its matrices.
#[derive(Clone, Debug)]
pub(crate) struct Stepper {
    n: usize,
    m: usize,
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
    scratch: Vec<f64>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

impl Stepper {
    pub(crate) fn new(sys: &DiscreteStateSpace) -> Self {
        let n = sys.states();
        Self {
            n,
            m: sys.inputs(),
            p: sys.outputs(),
            a: row_major(&sys.a),
            b: row_major(&sys.b),
            c: row_major(&sys.c),
            d: row_major(&sys.d),
            x: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub(crate) fn output(&self, u: &[f64], y: &mut [f64]) {
        for i in 0..self.p {
            let mut acc = 0.0;
            for k in 0..self.n {
                acc += self.c[i * self.n + k] * self.x[k];
            }
            for j in 0..self.m {
                acc += self.d[i * self.m + j] * u[j];
            }
            y[i] = acc;
        }
    }

    pub(crate) fn advance(&mut self, u: &[f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in 0..self.n {
                acc += self.a[i * self.n + k] * self.x[k];
            }
            for j in 0..self.m {
                acc += self.b[i * self.m + j] * u[j];
            }
            self.scratch[i] = acc;
        }
        std::mem::swap(&mut self.x, &mut self.scratch);
    }

    pub(crate) fn state(&self) -> &[f64] {
        &self.x
    }

    pub(crate) fn set_state(&mut self, x: &[f64]) {
        self.x.copy_from_slice(x);
    }
}

/// Uniformly sampled, possibly multi-channel signal.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        if let Some(first) = values.first() {
            let ch = first.len();
            if values.iter().any(|v| v.len() != ch) {
                return Err(Error::Dimension("ragged samples".into()));
            }
        }
        Ok(Self { dt, values })
    }

    pub fn scalar(dt: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(dt, values.into_iter().map(|v| vec![v]).collect())
    }

    /// `amplitude` from sample index `ceil(onset/dt)` on, zero before.
    pub fn step(dt: f64, samples: usize, amplitude: f64, onset: f64) -> Result<Self> {
        let first = onset_index(onset, dt);
        Self::scalar(
            dt,
            (0..samples)
                .map(|k| if k >= first { amplitude } else { 0.0 })
                .collect(),
        )
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn channels(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.values
    }
    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i]).collect()
    }
    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt).collect()
    }
}

/// Sample index of a step onset; tolerant to `onset` being a rounded multiple of `dt`.
pub fn onset_index(onset: f64, dt: f64) -> usize {
    if onset <= 0.0 {
        0
    } else {
        (onset / dt - 1e-9).ceil() as usize
    }
}

/// Step response of a proper SISO transfer function, `samples` points at `dt`.
pub fn step_response(g: &RationalTF, dt: f64, samples: usize, amplitude: f64, onset: f64) -> Result<Vec<f64>> {
    let sys = StateSpace::from_tf(g)?.discretize_zoh(dt)?;
    let u = TimeSeries::step(dt, samples, amplitude, onset)?;
    Ok(sys.simulate(&u)?.channel(0))
}

/// Response to an arbitrary scalar input sequence.
pub fn lsim(g: &RationalTF, dt: f64, u: &[f64]) -> Result<Vec<f64>> {
    let sys = StateSpace::from_tf(g)?.discretize_zoh(dt)?;
    Ok(sys.simulate(&TimeSeries::scalar(dt, u.to_vec())?)?.channel(0))
}
