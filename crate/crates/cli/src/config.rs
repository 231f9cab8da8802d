//! Campaign configuration: a sectioned TOML file with unit-suffixed keys.
//!
//! Every section is optional; omitted keys take the defaults below. Unknown
//! keys are rejected and every diagnostic carries a line and column.
//!
//! ```toml
//! [vehicle]
//! l_f_m = 1.25
//! l_r_m = 1.32
//! mass_kg = 1296.0
//! yaw_inertia_kgm2 = 1750.0
//! c_f0_n_per_rad = 84000.0
//! c_r0_n_per_rad = 96000.0
//! mu_nominal = 1.0
//!
//! [[conditions]]
//! v_mps = 20.0
//! mu = 0.3
//!
//! [q]
//! kind = "limited-integrator"   # or "first-order" (tau_q_s), "general" (num, den)
//! k = 10.0
//! tau_s = 0.006
//!
//! [desired]
//! tau_n_s = 0.15
//! tracking_envelope_radps = 0.1
//!
//! [scenario]
//! dt_s = 1e-4
//! duration_s = 5.0
//! # steer_amplitude_rad = 0.01   # absent: 1/K_n(v), unit dry-road yaw rate
//! steer_onset_s = 0.0
//! moment_amplitude_nm = 4000.0
//! moment_onset_s = 0.0
//! saturation = false
//! sat_limit_deg = 3.0
//!
//! [actuator]
//! num = [1.0]                    # ascending powers of s
//! den = [1.0]
//! feedback_tap = "post-saturation"
//!
//! [bode]
//! omega_min_rps = 0.01
//! omega_max_rps = 1e5
//! points = 400
//! nominal_v_mps = 20.0
//! family_v_mps = [10.0, 20.0, 30.0]
//! family_mu = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
//!
//! [output]
//! directory = "out"
//! plot_data = true
//! plot_decimate = 10
//! ```
//! Polynomial coefficients are listed in ascending powers of `s`.

use serde::{Deserialize, Serialize};

use yawreg_core::lti::{FrequencyGrid, RationalTF};
use yawreg_core::regulator::QFilter;
use yawreg_core::steering::{
    normalized_steer_step, FeedbackTap, Scenario, SteeringLoop, StepInput,
};
use yawreg_core::vehicle::{OperatingCondition, VehicleParams};
use yawreg_core::Error;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub vehicle: VehicleSection,
    pub conditions: Vec<ConditionEntry>,
    pub q: QSection,
    pub desired: DesiredSection,
    pub scenario: ScenarioSection,
    pub actuator: ActuatorSection,
    pub bode: BodeSection,
    pub output: OutputSection,
}

impl Default for Config {
    fn default() -> Self {
        let conditions = [10.0, 20.0, 30.0]
            .iter()
            .flat_map(|&v| [0.3, 1.0].map(|mu| ConditionEntry { v_mps: v, mu }))
            .collect();
        Self {
            vehicle: VehicleSection::default(),
            conditions,
            q: QSection::default(),
            desired: DesiredSection::default(),
            scenario: ScenarioSection::default(),
            actuator: ActuatorSection::default(),
            bode: BodeSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub l_f_m: f64,
    pub l_r_m: f64,
    pub mass_kg: f64,
    pub yaw_inertia_kgm2: f64,
    pub c_f0_n_per_rad: f64,
    pub c_r0_n_per_rad: f64,
    pub mu_nominal: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        let p = VehicleParams::default();
        Self {
            l_f_m: p.l_f,
            l_r_m: p.l_r,
            mass_kg: p.mass,
            yaw_inertia_kgm2: p.yaw_inertia,
            c_f0_n_per_rad: p.c_f0,
            c_r0_n_per_rad: p.c_r0,
            mu_nominal: p.mu_nominal,
        }
    }
}

impl VehicleSection {
    pub fn params(&self) -> VehicleParams {
        VehicleParams {
            l_f: self.l_f_m,
            l_r: self.l_r_m,
            mass: self.mass_kg,
            yaw_inertia: self.yaw_inertia_kgm2,
            c_f0: self.c_f0_n_per_rad,
            c_r0: self.c_r0_n_per_rad,
            mu_nominal: self.mu_nominal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionEntry {
    pub v_mps: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QSection {
    LimitedIntegrator {
        k: f64,
        tau_s: f64,
        /// Optional shaping `R = r_num / r_den`; both default to `[1.0]`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_num: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_den: Option<Vec<f64>>,
    },
    FirstOrder {
        tau_q_s: f64,
    },
    General {
        num: Vec<f64>,
        den: Vec<f64>,
    },
}

impl Default for QSection {
    fn default() -> Self {
        QSection::LimitedIntegrator {
            k: 10.0,
            tau_s: 0.006,
            r_num: None,
            r_den: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesiredSection {
    pub tau_n_s: f64,
    /// Allowed `|r - r_ref|` for the normalized steer step.
    pub tracking_envelope_radps: f64,
}

impl Default for DesiredSection {
    fn default() -> Self {
        Self {
            tau_n_s: yawreg_core::regulator::DEFAULT_TAU_N,
            tracking_envelope_radps: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub dt_s: f64,
    pub duration_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steer_amplitude_rad: Option<f64>,
    pub steer_onset_s: f64,
    pub moment_amplitude_nm: f64,
    pub moment_onset_s: f64,
    pub saturation: bool,
    pub sat_limit_deg: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            dt_s: yawreg_core::steering::DEFAULT_DT,
            duration_s: yawreg_core::steering::DEFAULT_DURATION,
            steer_amplitude_rad: None,
            steer_onset_s: 0.0,
            moment_amplitude_nm: 4000.0,
            moment_onset_s: 0.0,
            saturation: false,
            sat_limit_deg: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TapSetting {
    #[default]
    PostSaturation,
    PreSaturation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorSection {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub feedback_tap: TapSetting,
}

impl Default for ActuatorSection {
    fn default() -> Self {
        Self {
            num: vec![1.0],
            den: vec![1.0],
            feedback_tap: TapSetting::PostSaturation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodeSection {
    pub omega_min_rps: f64,
    pub omega_max_rps: f64,
    pub points: usize,
    pub nominal_v_mps: f64,
    pub family_v_mps: Vec<f64>,
    pub family_mu: Vec<f64>,
}

impl Default for BodeSection {
    fn default() -> Self {
        Self {
            omega_min_rps: 1e-2,
            omega_max_rps: 1e5,
            points: 400,
            nominal_v_mps: 20.0,
            family_v_mps: vec![10.0, 20.0, 30.0],
            family_mu: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub plot_data: bool,
    /// Keep every n-th sample in plot data files.
    pub plot_decimate: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            plot_data: true,
            plot_decimate: 10,
        }
    }
}

/// Config text with its origin, kept for diagnostics.
pub struct Source<'a> {
    pub label: &'a str,
    pub text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, line: usize, column: usize, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.label.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn offset_to_line_col(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
        (line, col)
    }

    /// Line and column of `key` inside `section` (the `nth` occurrence of an
    /// array-of-tables section); falls back to the section header, then 1:1.
    pub fn locate(&self, section: &str, key: &str, nth: usize) -> (usize, usize) {
        let mut current = String::new();
        let mut seen = 0usize;
        let mut header_line = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim_start();
            let indent = raw.len() - line.len();
            if let Some(h) = line.strip_prefix("[[") {
                current = h.split("]]").next().unwrap_or("").trim().to_string();
                if current == section {
                    if seen == nth {
                        header_line = Some(i + 1);
                    }
                    seen += 1;
                }
                continue;
            }
            if let Some(h) = line.strip_prefix('[') {
                current = h.split(']').next().unwrap_or("").trim().to_string();
                if current == section {
                    header_line = Some(i + 1);
                }
                continue;
            }
            let in_section = current == section && (seen == 0 || seen == nth + 1);
            if in_section {
                let name = line.split('=').next().unwrap_or("").trim();
                if name == key && line.contains('=') {
                    return (i + 1, indent + 1);
                }
            }
        }
        header_line.map_or((1, 1), |l| (l, 1))
    }

    fn at(&self, section: &str, key: &str, nth: usize, message: impl Into<String>) -> CliError {
        let (line, col) = self.locate(section, key, nth);
        self.error_at(line, col, format!("[{section}] {key}: {}", message.into()))
    }
}

/// Core objects assembled from a validated [`Config`].
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: Config,
    pub params: VehicleParams,
    pub q: QFilter,
    pub loops: Vec<SteeringLoop>,
    pub grid: FrequencyGrid,
    pub sat_limit: f64,
}

impl Resolved {
    /// Steer-step scenario for one loop; the amplitude defaults to the
    /// normalized step `1/K_n(v)`.
    pub fn steer_scenario(&self, lp: &SteeringLoop) -> Result<Scenario, Error> {
        let s = &self.config.scenario;
        let amp = match s.steer_amplitude_rad {
            Some(a) => a,
            None => normalized_steer_step(lp)?,
        };
        Scenario::new(
            s.duration_s,
            s.dt_s,
            StepInput::new(amp, s.steer_onset_s),
            StepInput::default(),
            s.saturation,
        )
    }

    pub fn moment_scenario(&self) -> Result<Scenario, Error> {
        let s = &self.config.scenario;
        Scenario::new(
            s.duration_s,
            s.dt_s,
            StepInput::default(),
            StepInput::new(s.moment_amplitude_nm, s.moment_onset_s),
            s.saturation,
        )
    }
}

impl Config {
    pub fn parse(src: &Source<'_>) -> CliResult<Config> {
        toml::from_str::<Config>(src.text).map_err(|e| {
            let (line, col) = e.span().map_or((1, 1), |s| src.offset_to_line_col(s.start));
            src.error_at(line, col, e.message().trim().to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks values and builds the core objects; diagnostics point at the
    /// offending key.
    pub fn resolve(&self, src: &Source<'_>) -> CliResult<Resolved> {
        let params = self.vehicle.params();
        params.validate().map_err(|e| {
            let key = match &e {
                Error::InvalidParameter { name, .. } => match *name {
                    "l_f" => "l_f_m",
                    "l_r" => "l_r_m",
                    "mass" => "mass_kg",
                    "yaw_inertia" => "yaw_inertia_kgm2",
                    "c_f0" => "c_f0_n_per_rad",
                    "c_r0" => "c_r0_n_per_rad",
                    _ => "mu_nominal",
                },
                _ => "",
            };
            src.at("vehicle", key, 0, e.to_string())
        })?;
        if self.vehicle.mu_nominal > 1.0 {
            return Err(src.at("vehicle", "mu_nominal", 0, "must not exceed 1"));
        }

        if self.conditions.is_empty() {
            return Err(src.at("conditions", "v_mps", 0, "at least one condition is required"));
        }
        let mut conditions = Vec::with_capacity(self.conditions.len());
        for (i, c) in self.conditions.iter().enumerate() {
            let oc = OperatingCondition::new(c.v_mps, c.mu).map_err(|e| {
                let key = match &e {
                    Error::InvalidParameter { name: "v", .. } => "v_mps",
                    _ => "mu",
                };
                src.at("conditions", key, i, e.to_string())
            })?;
            conditions.push(oc);
        }

        let q = self.q_filter(src)?;

        let d = &self.desired;
        if !(d.tau_n_s.is_finite() && d.tau_n_s > 0.0) {
            return Err(src.at("desired", "tau_n_s", 0, "must be positive"));
        }
        if !(d.tracking_envelope_radps.is_finite() && d.tracking_envelope_radps > 0.0) {
            return Err(src.at("desired", "tracking_envelope_radps", 0, "must be positive"));
        }

        let s = &self.scenario;
        if !(s.sat_limit_deg.is_finite() && s.sat_limit_deg > 0.0) {
            return Err(src.at("scenario", "sat_limit_deg", 0, "must be positive"));
        }
        Scenario::new(
            s.duration_s,
            s.dt_s,
            StepInput::new(s.steer_amplitude_rad.unwrap_or(0.0), s.steer_onset_s),
            StepInput::new(s.moment_amplitude_nm, s.moment_onset_s),
            s.saturation,
        )
        .map_err(|e| {
            let key = match &e {
                Error::InvalidParameter { name: "duration", .. } => "duration_s",
                Error::InvalidParameter { name: "dt", .. } => "dt_s",
                Error::InvalidParameter { reason, .. } if reason.starts_with("steer") => {
                    if reason.contains("amplitude") {
                        "steer_amplitude_rad"
                    } else {
                        "steer_onset_s"
                    }
                }
                Error::InvalidParameter { reason, .. } if reason.contains("amplitude") => "moment_amplitude_nm",
                _ => "moment_onset_s",
            };
            src.at("scenario", key, 0, e.to_string())
        })?;
        let sat_limit = s.sat_limit_deg.to_radians();

        let actuator = poly_tf(&self.actuator.num, &self.actuator.den)
            .map_err(|e| src.at("actuator", "den", 0, e.to_string()))?;
        let tap = match self.actuator.feedback_tap {
            TapSetting::PostSaturation => FeedbackTap::PostSaturation,
            TapSetting::PreSaturation => FeedbackTap::PreSaturation,
        };

        let b = &self.bode;
        let grid = FrequencyGrid::logspace(b.omega_min_rps, b.omega_max_rps, b.points).map_err(|e| {
            let key = if b.points < 2 { "points" } else { "omega_min_rps" };
            src.at("bode", key, 0, e.to_string())
        })?;
        if !(b.nominal_v_mps.is_finite() && b.nominal_v_mps > 0.0) {
            return Err(src.at("bode", "nominal_v_mps", 0, "must be positive"));
        }
        if b.family_v_mps.is_empty() || b.family_v_mps.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(src.at("bode", "family_v_mps", 0, "need a nonempty list of positive speeds"));
        }
        if b.family_mu.is_empty() || b.family_mu.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(src.at("bode", "family_mu", 0, "need a nonempty list of values in (0, 1]"));
        }
        if self.output.plot_decimate == 0 {
            return Err(src.at("output", "plot_decimate", 0, "must be at least 1"));
        }

        let mut loops = Vec::with_capacity(conditions.len());
        for (i, oc) in conditions.into_iter().enumerate() {
            let lp = SteeringLoop::new(params, oc, d.tau_n_s, q.clone())
                .map_err(|e| src.at("conditions", "v_mps", i, e.to_string()))?
                .with_actuator(actuator.clone())
                .map_err(|e| src.at("actuator", "den", 0, e.to_string()))?
                .with_sat_limit(sat_limit)
                .map_err(|e| src.at("scenario", "sat_limit_deg", 0, e.to_string()))?
                .with_feedback_tap(tap);
            loops.push(lp);
        }

        Ok(Resolved {
            config: self.clone(),
            params,
            q,
            loops,
            grid,
            sat_limit,
        })
    }

    fn q_filter(&self, src: &Source<'_>) -> CliResult<QFilter> {
        let q = match &self.q {
            QSection::LimitedIntegrator { k, tau_s, r_num, r_den } => {
                let one = vec![1.0];
                let r = poly_tf(r_num.as_ref().unwrap_or(&one), r_den.as_ref().unwrap_or(&one))
                    .map_err(|e| src.at("q", "r_den", 0, e.to_string()))?;
                QFilter::limited_integrator(*k, *tau_s, r).map_err(|e| {
                    let key = match &e {
                        Error::InvalidParameter { name: "k", .. } => "k",
                        Error::InvalidParameter { name: "tau", .. } => "tau_s",
                        Error::InvalidParameter { .. } => "r_num",
                        _ => "kind",
                    };
                    src.at("q", key, 0, e.to_string())
                })?
            }
            QSection::FirstOrder { tau_q_s } => {
                QFilter::first_order(*tau_q_s).map_err(|e| src.at("q", "tau_q_s", 0, e.to_string()))?
            }
            QSection::General { num, den } => {
                let tf = poly_tf(num, den).map_err(|e| src.at("q", "den", 0, e.to_string()))?;
                QFilter::general(tf).map_err(|e| src.at("q", "num", 0, e.to_string()))?
            }
        };
        Ok(q)
    }
}

fn poly_tf(num: &[f64], den: &[f64]) -> Result<RationalTF, Error> {
    if num.is_empty() || den.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    if num.iter().chain(den).any(|c| !c.is_finite()) {
        return Err(Error::Degenerate("coefficients must be finite".into()));
    }
    RationalTF::from_coeffs(num, den)
}
