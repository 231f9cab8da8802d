use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use yawreg_core::regulator::{
    family_bound, integrator_count, small_gain_check, DesiredModel, QFilter,
};
use yawreg_core::steering::{
    min_saturating_moment, reference_trace, run_campaign, simulate_block, simulate_conventional,
    tracking_deviation, ChannelTfs, SimResult, SteeringLoop,
};
use yawreg_core::vehicle::{nominal_dc_gain, steering_tf, OperatingCondition};
use yawreg_core::Error;

use crate::config::{QSection, Resolved};
use crate::error::{CliError, CliResult};
use crate::format::{columns_csv, flag, plot_data, sci, table, trace_csv};
use crate::manifest::{ConditionRecord, SummaryTable};
use crate::output::Artifacts;

/// Published reference values the campaign is compared against.
pub const REFERENCE_PEAK_LIMITED_DEG: f64 = 1.86;
pub const REFERENCE_PEAK_STANDARD_DEG: f64 = 2.24;
pub const REFERENCE_MIN_SATURATING_MOMENT_NM: f64 = 6119.0;
/// A reference value is consistent with a grid of results when it lies in
/// `[min / CROSS_CHECK_FACTOR, max * CROSS_CHECK_FACTOR]`.
pub const CROSS_CHECK_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    StepSteer,
    StepMoment,
    ActuatorCompare,
    Bode,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::StepSteer => "step-steer",
            Command::StepMoment => "step-moment",
            Command::ActuatorCompare => "actuator-compare",
            Command::Bode => "bode",
            Command::Check => "check",
        }
    }

    fn dir(self) -> &'static str {
        match self {
            Command::StepSteer => "step_steer",
            Command::StepMoment => "step_moment",
            Command::ActuatorCompare => "actuator_compare",
            Command::Bode => "bode",
            Command::Check => "check",
        }
    }
}

/// Everything a command produced, before anything is written.
#[derive(Debug)]
pub struct Report {
    pub command: Command,
    pub artifacts: Artifacts,
    pub conditions: Vec<ConditionRecord>,
    pub files: Vec<String>,
    pub summary: SummaryTable,
    /// Human-readable rows for the terminal (degrees for angles).
    pub display: SummaryTable,
    pub notes: Vec<String>,
    pub failed: bool,
}

impl Report {
    fn new(command: Command) -> Self {
        Self {
            command,
            artifacts: Artifacts::default(),
            conditions: Vec::new(),
            files: Vec::new(),
            summary: SummaryTable::default(),
            display: SummaryTable::default(),
            notes: Vec::new(),
            failed: false,
        }
    }

    pub fn render(&self) -> String {
        let header: Vec<&str> = self.display.header.iter().map(String::as_str).collect();
        let mut out = format!("{}\n", self.command.name());
        out.push_str(&table(&header, &self.display.rows));
        for c in &self.conditions {
            if let Some(e) = &c.error {
                out.push_str(&format!("FAILED v={} mu={}: {e}\n", c.v_mps, c.mu));
            }
        }
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    fn summary_csv(&mut self) {
        let mut text = self.summary.header.join(",");
        text.push('\n');
        for row in &self.summary.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let rel = format!("{}/summary.csv", self.command.dir());
        self.files.push(self.artifacts.add(rel, text));
    }
}

fn tag(oc: &OperatingCondition) -> String {
    format!("v{}_mu{}", oc.v(), oc.mu())
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Per-condition result of a campaign command.
struct Unit {
    files: Vec<(String, String)>,
    csv: Vec<String>,
    human: Vec<String>,
    ok: bool,
    /// Extra values kept for campaign-wide notes.
    extra: Vec<f64>,
}

fn times(res: &SimResult) -> Vec<f64> {
    res.times()
}

fn run_units<F>(res: &Resolved, selection: &[usize], report: &mut Report, f: F) -> Vec<Option<Vec<f64>>>
where
    F: Fn(&SteeringLoop) -> Result<Unit, Error> + Sync,
{
    let outcomes: Vec<(Result<Unit, Error>, f64)> = selection
        .par_iter()
        .map(|&i| {
            let t0 = Instant::now();
            let out = f(&res.loops[i]);
            (out, t0.elapsed().as_secs_f64())
        })
        .collect();
    let mut extras = Vec::with_capacity(selection.len());
    for (&i, (out, secs)) in selection.iter().zip(outcomes) {
        let oc = *res.loops[i].condition();
        let mut record = ConditionRecord {
            v_mps: oc.v(),
            mu: oc.mu(),
            files: Vec::new(),
            wall_clock_s: secs,
            error: None,
        };
        match out {
            Ok(unit) => {
                for (rel, text) in unit.files {
                    record.files.push(report.artifacts.add(rel, text));
                }
                report.summary.rows.push(unit.csv);
                report.display.rows.push(unit.human);
                report.failed |= !unit.ok;
                extras.push(Some(unit.extra));
            }
            Err(e) => {
                record.error = Some(e.to_string());
                report.failed = true;
                extras.push(None);
            }
        }
        report.conditions.push(record);
    }
    extras
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn execute(cmd: Command, res: &Resolved, selection: &[usize]) -> CliResult<Report> {
    match cmd {
        Command::StepSteer => step_steer(res, selection),
        Command::StepMoment => step_moment(res, selection),
        Command::ActuatorCompare => actuator_compare(res, selection),
        Command::Bode => bode(res),
        Command::Check => check(res, selection),
    }
}

fn step_steer(res: &Resolved, selection: &[usize]) -> CliResult<Report> {
    let mut report = Report::new(Command::StepSteer);
    report.summary.header = header(&[
        "v_mps",
        "mu",
        "steer_rad",
        "r_ss_controlled",
        "r_ss_conventional",
        "r_ss_reference",
        "max_tracking_dev",
        "within_envelope",
        "closer_to_reference",
        "hurwitz",
    ]);
    report.display.header = header(&[
        "v [m/s]", "mu", "steer [deg]", "r_ss ctrl", "r_ss conv", "r_ss ref", "max |r-r_ref|", "envelope", "hurwitz",
    ]);
    let envelope = res.config.desired.tracking_envelope_radps;
    let plots = res.config.output.plot_data;
    let step = res.config.output.plot_decimate;
    run_units(res, selection, &mut report, |lp| {
        let sc = res.steer_scenario(lp)?;
        let ctrl = simulate_block(lp, &sc)?;
        let conv = simulate_conventional(lp, &sc)?;
        let reference = reference_trace(lp, &sc)?;
        let dev = tracking_deviation(lp, &sc, &ctrl)?;
        let hurwitz = ChannelTfs::build(lp)?.is_stable()?;
        let tail = |x: &[f64]| {
            let n = ((x.len() as f64) * 0.05).ceil().max(1.0) as usize;
            x[x.len() - n..].iter().sum::<f64>() / n as f64
        };
        let r_ref = tail(&reference);
        let (rc, rv) = (ctrl.summary.steady_state_r, conv.summary.steady_state_r);
        let closer = (rc - r_ref).abs() <= (rv - r_ref).abs() + 1e-9 * r_ref.abs().max(1.0);
        let within = dev <= envelope;
        let t = times(&ctrl);
        let name = tag(lp.condition());
        let mut files = vec![
            (format!("step_steer/{name}_controlled.csv"), trace_csv(&ctrl)),
            (format!("step_steer/{name}_conventional.csv"), trace_csv(&conv)),
            (format!("step_steer/{name}_reference.csv"), columns_csv(&["t", "r"], &[&t, &reference])),
        ];
        if plots {
            files.push((
                format!("plots/step_steer_{name}.dat"),
                plot_data(&["t", "r_controlled", "r_conventional", "r_reference"], &[&t, &ctrl.r, &conv.r, &reference], step),
            ));
        }
        let oc = lp.condition();
        let amp = sc.steer().amplitude;
        Ok(Unit {
            files,
            csv: vec![
                sci(oc.v()),
                sci(oc.mu()),
                sci(amp),
                sci(rc),
                sci(rv),
                sci(r_ref),
                sci(dev),
                flag(within).into(),
                flag(closer).into(),
                flag(hurwitz).into(),
            ],
            human: vec![
                format!("{}", oc.v()),
                format!("{}", oc.mu()),
                format!("{:.4}", amp.to_degrees()),
                format!("{rc:.4}"),
                format!("{rv:.4}"),
                format!("{r_ref:.4}"),
                format!("{dev:.4}"),
                pass_fail(within).into(),
                yes_no(hurwitz),
            ],
            ok: hurwitz && within && closer,
            extra: vec![],
        })
    });
    report.notes.push(format!("tracking envelope {envelope} rad/s"));
    report.summary_csv();
    Ok(report)
}

fn step_moment(res: &Resolved, selection: &[usize]) -> CliResult<Report> {
    let mut report = Report::new(Command::StepMoment);
    report.summary.header = header(&[
        "v_mps",
        "mu",
        "moment_nm",
        "r_ss_controlled",
        "r_ss_conventional",
        "peak_r_controlled",
        "peak_r_conventional",
        "attenuated",
        "peak_delta_mr_unsat_rad",
        "saturated",
        "hurwitz",
    ]);
    report.display.header = header(&[
        "v [m/s]", "mu", "r_ss ctrl", "r_ss conv", "peak r ctrl", "peak r conv", "attenuated", "peak dmr [deg]", "saturated",
    ]);
    let sc = res.moment_scenario()?;
    let loops: Vec<SteeringLoop> = selection.iter().map(|&i| res.loops[i].clone()).collect();
    let t0 = Instant::now();
    let runs = run_campaign(&loops, &sc);
    let per = t0.elapsed().as_secs_f64() / loops.len() as f64;
    let plots = res.config.output.plot_data;
    let step = res.config.output.plot_decimate;
    for entry in runs {
        let oc = entry.condition;
        let mut record = ConditionRecord {
            v_mps: oc.v(),
            mu: oc.mu(),
            files: Vec::new(),
            wall_clock_s: per,
            error: None,
        };
        match entry.outcome {
            Ok(run) => {
                let (c, v) = (&run.controlled, &run.conventional);
                let name = tag(&oc);
                record.files.push(report.artifacts.add(format!("step_moment/{name}_controlled.csv"), trace_csv(c)));
                record.files.push(report.artifacts.add(format!("step_moment/{name}_conventional.csv"), trace_csv(v)));
                if plots {
                    let t = times(c);
                    record.files.push(report.artifacts.add(
                        format!("plots/step_moment_{name}.dat"),
                        plot_data(&["t", "r_controlled", "r_conventional"], &[&t, &c.r, &v.r], step),
                    ));
                }
                let (rc, rv) = (c.summary.steady_state_r, v.summary.steady_state_r);
                let attenuated = rc.abs() < rv.abs() || (rc == 0.0 && rv == 0.0);
                let peak = c.summary.peak_delta_mr_unsat;
                report.summary.rows.push(vec![
                    sci(oc.v()),
                    sci(oc.mu()),
                    sci(sc.moment().amplitude),
                    sci(rc),
                    sci(rv),
                    sci(c.summary.peak_r),
                    sci(v.summary.peak_r),
                    flag(attenuated).into(),
                    sci(peak),
                    flag(c.summary.any_saturated).into(),
                    flag(run.characteristic_hurwitz).into(),
                ]);
                report.display.rows.push(vec![
                    format!("{}", oc.v()),
                    format!("{}", oc.mu()),
                    format!("{rc:.5}"),
                    format!("{rv:.5}"),
                    format!("{:.5}", c.summary.peak_r),
                    format!("{:.5}", v.summary.peak_r),
                    yes_no(attenuated),
                    format!("{:.3}", peak.to_degrees()),
                    yes_no(c.summary.any_saturated),
                ]);
                report.failed |= !(attenuated && run.characteristic_hurwitz);
            }
            Err(e) => {
                record.error = Some(e.to_string());
                report.failed = true;
            }
        }
        report.conditions.push(record);
    }
    report.summary_csv();
    Ok(report)
}

/// `(min, max, consistent)` for a reference value against a set of results.
pub fn bracket(reference: f64, values: &[f64]) -> (f64, f64, bool) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ok = lo / CROSS_CHECK_FACTOR <= reference && reference <= hi * CROSS_CHECK_FACTOR;
    (lo, hi, ok)
}

fn actuator_compare(res: &Resolved, selection: &[usize]) -> CliResult<Report> {
    if !matches!(res.config.q, QSection::LimitedIntegrator { .. }) {
        return Err(CliError::Invalid(
            "actuator-compare needs a limited-integrator [q] block".into(),
        ));
    }
    let standard = res.q.standard_counterpart()?;
    let mut report = Report::new(Command::ActuatorCompare);
    report.summary.header = header(&[
        "v_mps",
        "mu",
        "peak_limited_rad",
        "peak_standard_rad",
        "limited_le_standard",
        "min_saturating_moment_nm",
        "saturated_limited",
        "saturated_standard",
    ]);
    report.display.header = header(&[
        "v [m/s]", "mu", "peak limited [deg]", "peak standard [deg]", "limited <= std", "min sat. moment [N m]", "saturated",
    ]);
    let sc = res.moment_scenario()?;
    let plots = res.config.output.plot_data;
    let step = res.config.output.plot_decimate;
    let extras = run_units(res, selection, &mut report, |lp| {
        let lim = simulate_block(lp, &sc)?;
        let std_loop = lp.clone().with_q(standard.clone());
        let stdr = simulate_block(&std_loop, &sc)?;
        let m_sat = min_saturating_moment(lp, &sc)?;
        let (pl, ps) = (lim.summary.peak_delta_mr, stdr.summary.peak_delta_mr);
        let ordered = pl <= ps;
        let name = tag(lp.condition());
        let mut files = vec![
            (format!("actuator_compare/{name}_limited.csv"), trace_csv(&lim)),
            (format!("actuator_compare/{name}_standard.csv"), trace_csv(&stdr)),
        ];
        if plots {
            let t = times(&lim);
            files.push((
                format!("plots/actuator_compare_{name}.dat"),
                plot_data(&["t", "delta_mr_limited", "delta_mr_standard"], &[&t, &lim.delta_mr, &stdr.delta_mr], step),
            ));
        }
        let oc = lp.condition();
        Ok(Unit {
            files,
            csv: vec![
                sci(oc.v()),
                sci(oc.mu()),
                sci(pl),
                sci(ps),
                flag(ordered).into(),
                sci(m_sat),
                flag(lim.summary.any_saturated).into(),
                flag(stdr.summary.any_saturated).into(),
            ],
            human: vec![
                format!("{}", oc.v()),
                format!("{}", oc.mu()),
                format!("{:.3}", pl.to_degrees()),
                format!("{:.3}", ps.to_degrees()),
                yes_no(ordered),
                format!("{m_sat:.1}"),
                yes_no(lim.summary.any_saturated),
            ],
            ok: ordered,
            extra: vec![pl.to_degrees(), ps.to_degrees(), m_sat],
        })
    });
    let done: Vec<&Vec<f64>> = extras.iter().flatten().collect();
    if !done.is_empty() {
        let col = |i: usize| done.iter().map(|e| e[i]).collect::<Vec<f64>>();
        let (l_lo, l_hi, l_ok) = bracket(REFERENCE_PEAK_LIMITED_DEG, &col(0));
        let (s_lo, s_hi, s_ok) = bracket(REFERENCE_PEAK_STANDARD_DEG, &col(1));
        let (m_lo, m_hi, m_ok) = bracket(REFERENCE_MIN_SATURATING_MOMENT_NM, &col(2));
        report.notes.push(format!(
            "peak limited: grid [{l_lo:.3}, {l_hi:.3}] deg vs reference {REFERENCE_PEAK_LIMITED_DEG} deg (factor-{CROSS_CHECK_FACTOR} check {})",
            pass_fail(l_ok)
        ));
        report.notes.push(format!(
            "peak standard: grid [{s_lo:.3}, {s_hi:.3}] deg vs reference {REFERENCE_PEAK_STANDARD_DEG} deg (factor-{CROSS_CHECK_FACTOR} check {})",
            pass_fail(s_ok)
        ));
        report.notes.push(format!(
            "min saturating moment: grid minimum {m_lo:.1} N m (max {m_hi:.1}) vs reference {REFERENCE_MIN_SATURATING_MOMENT_NM} N m, ratio {:.3} (factor-{CROSS_CHECK_FACTOR} check {})",
            m_lo / REFERENCE_MIN_SATURATING_MOMENT_NM,
            pass_fail(m_ok)
        ));
        let text = format!(
            "quantity,grid_min,grid_max,reference,consistent\n\
             peak_limited_deg,{},{},{},{}\n\
             peak_standard_deg,{},{},{},{}\n\
             min_saturating_moment_nm,{},{},{},{}\n",
            sci(l_lo),
            sci(l_hi),
            sci(REFERENCE_PEAK_LIMITED_DEG),
            flag(l_ok),
            sci(s_lo),
            sci(s_hi),
            sci(REFERENCE_PEAK_STANDARD_DEG),
            flag(s_ok),
            sci(m_lo),
            sci(m_hi),
            sci(REFERENCE_MIN_SATURATING_MOMENT_NM),
            flag(m_ok),
        );
        report.files.push(report.artifacts.add("actuator_compare/reference.csv", text));
    }
    report.summary_csv();
    Ok(report)
}

/// Frequency-domain robustness data.
pub struct BodeData {
    pub omega: Vec<f64>,
    pub q_mag: Vec<f64>,
    pub dm_bound: Vec<f64>,
    pub pass: bool,
    pub margin: f64,
}

pub fn bode_data(res: &Resolved) -> CliResult<BodeData> {
    let b = &res.config.bode;
    let k_n = nominal_dc_gain(&res.params, b.nominal_v_mps)?;
    let gn = DesiredModel::first_order(k_n, res.config.desired.tau_n_s)?;
    let mut family = Vec::new();
    for &v in &b.family_v_mps {
        for &mu in &b.family_mu {
            family.push(steering_tf(&res.params, &OperatingCondition::new(v, mu)?)?);
        }
    }
    let bound = family_bound(&family, gn.tf(), &res.grid);
    let check = small_gain_check(&res.q, &res.grid, &bound)?;
    let omega = res.grid.omegas().to_vec();
    let q_mag = omega.iter().map(|&w| res.q.tf().eval_jw(w).norm()).collect();
    let dm_bound = bound.iter().map(|b| b.unwrap_or(f64::NAN)).collect();
    Ok(BodeData {
        omega,
        q_mag,
        dm_bound,
        pass: check.pass,
        margin: check.margin,
    })
}

fn bode(res: &Resolved) -> CliResult<Report> {
    let mut report = Report::new(Command::Bode);
    let data = bode_data(res)?;
    let inv: Vec<f64> = data.dm_bound.iter().map(|d| 1.0 / d).collect();
    let text = columns_csv(
        &["omega", "q_mag", "dm_bound", "inv_dm_bound"],
        &[&data.omega, &data.q_mag, &data.dm_bound, &inv],
    );
    report.files.push(report.artifacts.add("bode/bode.csv", text));
    if res.config.output.plot_data {
        let text = plot_data(&["omega", "q_mag", "inv_dm_bound"], &[&data.omega, &data.q_mag, &inv], 1);
        report.files.push(report.artifacts.add("plots/bode.dat", text));
    }
    let q_peak = data.q_mag.iter().copied().fold(0.0, f64::max);
    let dm_peak = data.dm_bound.iter().copied().fold(0.0, f64::max);
    let family = res.config.bode.family_v_mps.len() * res.config.bode.family_mu.len();
    report.summary.header = header(&["verdict", "margin", "q_peak", "dm_bound_peak", "family_size"]);
    report.summary.rows.push(vec![
        pass_fail(data.pass).into(),
        sci(data.margin),
        sci(q_peak),
        sci(dm_peak),
        family.to_string(),
    ]);
    report.display.header = header(&["small-gain", "margin", "max |Q|", "max dm bound", "family"]);
    report.display.rows.push(vec![
        pass_fail(data.pass).into(),
        format!("{:.4}", data.margin),
        format!("{q_peak:.6}"),
        format!("{dm_peak:.4}"),
        family.to_string(),
    ]);
    report.failed = !data.pass;
    report.summary_csv();
    Ok(report)
}

fn complex(z: &Complex64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{}j", sci(z.re), sci(z.im.abs()))
}

fn check(res: &Resolved, selection: &[usize]) -> CliResult<Report> {
    let mut report = Report::new(Command::Check);
    let q = &res.q;
    let q_proper = q.tf().is_proper();
    let q_stable = q.tf().is_stable()?;
    let count = integrator_count(q)?;
    report.summary.header = header(&[
        "v_mps",
        "mu",
        "hurwitz",
        "max_root_re",
        "q_proper",
        "q_stable",
        "causal",
        "integrator_count",
        "status",
    ]);
    report.display.header = header(&[
        "v [m/s]", "mu", "hurwitz", "max Re(root)", "Q proper", "Q stable", "Q/G_n causal", "integrators", "status",
    ]);
    run_units(res, selection, &mut report, |lp| check_one(lp, q, q_proper, q_stable, count));
    report.notes.push(format!(
        "Q: proper {}, stable {}, integrator count {count}",
        pass_fail(q_proper),
        pass_fail(q_stable)
    ));
    report.summary_csv();
    Ok(report)
}

fn check_one(lp: &SteeringLoop, q: &QFilter, q_proper: bool, q_stable: bool, count: usize) -> Result<Unit, Error> {
    let ch = ChannelTfs::build(lp)?;
    let roots = ch.characteristic.roots()?;
    let hurwitz = ch.is_stable()?;
    let max_re = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let causal = match lp.correction_block() {
        Ok(_) => true,
        Err(Error::NonCausalCorrection { .. }) => false,
        Err(e) => return Err(e),
    };
    let ok = hurwitz && q_proper && q_stable && causal;
    let oc = lp.condition();
    let mut text = format!(
        "v_mps = {}\nmu = {}\nq = {:?}\nhurwitz = {}\ncausal = {}\nintegrator_count = {count}\nroots:\n",
        oc.v(),
        oc.mu(),
        q.kind(),
        pass_fail(hurwitz),
        pass_fail(causal)
    );
    for z in &roots {
        text.push_str(&complex(z));
        text.push('\n');
    }
    Ok(Unit {
        files: vec![(format!("check/{}_roots.txt", tag(oc)), text)],
        csv: vec![
            sci(oc.v()),
            sci(oc.mu()),
            pass_fail(hurwitz).into(),
            sci(max_re),
            pass_fail(q_proper).into(),
            pass_fail(q_stable).into(),
            pass_fail(causal).into(),
            count.to_string(),
            pass_fail(ok).into(),
        ],
        human: vec![
            format!("{}", oc.v()),
            format!("{}", oc.mu()),
            pass_fail(hurwitz).into(),
            format!("{max_re:.4e}"),
            pass_fail(q_proper).into(),
            pass_fail(q_stable).into(),
            pass_fail(causal).into(),
            count.to_string(),
            pass_fail(ok).into(),
        ],
        ok,
        extra: vec![],
    })
}
