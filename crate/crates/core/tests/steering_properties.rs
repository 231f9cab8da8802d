use num_complex::Complex64;
use proptest::prelude::*;

use yawreg_core::lti::{Polynomial, RationalTF};
use yawreg_core::regulator::{QFilter, DEFAULT_TAU_N};
use yawreg_core::steering::*;
use yawreg_core::vehicle::{steering_tf, OperatingCondition, VehicleParams};
use yawreg_core::Error;

const GRID: [(f64, f64); 6] = [(10.0, 0.3), (10.0, 1.0), (20.0, 0.3), (20.0, 1.0), (30.0, 0.3), (30.0, 1.0)];

fn limited() -> QFilter {
    QFilter::limited_integrator_simple(10.0, 0.006).unwrap()
}

fn loop_at(v: f64, mu: f64, q: QFilter) -> SteeringLoop {
    SteeringLoop::new(VehicleParams::default(), OperatingCondition::new(v, mu).unwrap(), DEFAULT_TAU_N, q).unwrap()
}

fn grid_loops() -> Vec<SteeringLoop> {
    GRID.iter().map(|&(v, mu)| loop_at(v, mu, limited())).collect()
}

/// Routh array sign test, written independently of the library's root finder.
fn routh_stable(p: &Polynomial) -> bool {
    let a: Vec<f64> = p.coeffs().iter().rev().copied().collect();
    let n = a.len() - 1;
    if a.iter().any(|&x| x * a[0] <= 0.0) {
        return false;
    }
    let mut prev: Vec<f64> = a.iter().step_by(2).copied().collect();
    let mut cur: Vec<f64> = a.iter().skip(1).step_by(2).copied().collect();
    let mut first = vec![prev[0]];
    for _ in 0..n {
        if cur.is_empty() {
            break;
        }
        first.push(cur[0]);
        if cur[0] == 0.0 {
            return false;
        }
        let next: Vec<f64> = (0..prev.len().saturating_sub(1))
            .map(|j| {
                let c = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * prev[j + 1] - prev[0] * c) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    first.len() == n + 1 && first.iter().all(|&x| x * first[0] > 0.0)
}

#[test]
fn block_and_channel_simulations_agree() {
    for lp in grid_loops() {
        let ch = ChannelTfs::build(&lp).unwrap();
        let steer = Scenario::steer_step(normalized_steer_step(&lp).unwrap(), false).unwrap();
        let moment = Scenario::moment_step(4000.0, false).unwrap();
        for sc in [steer, moment] {
            let rep = ch.verify_against_block(&lp, &sc).unwrap();
            assert!(rep.max() < 1e-6, "{:?} {rep:?}", lp.condition());
        }
    }
}

#[test]
fn feedback_tap_is_irrelevant_without_saturation() {
    let lp = loop_at(20.0, 0.3, limited());
    let sc = Scenario::moment_step(4000.0, false).unwrap();
    let post = simulate_block(&lp, &sc).unwrap();
    let pre = simulate_block(&lp.clone().with_feedback_tap(FeedbackTap::PreSaturation), &sc).unwrap();
    for (a, b) in post.r.iter().zip(&pre.r) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn responses_superpose() {
    for lp in grid_loops() {
        let steer = normalized_steer_step(&lp).unwrap();
        let both = Scenario::new(5.0, 1e-4, StepInput::new(steer, 0.2), StepInput::new(3000.0, 1.0), false).unwrap();
        let only_s = both.with_moment(StepInput::new(0.0, 0.0));
        let only_m = both.with_steer(StepInput::new(0.0, 0.0));
        let (a, b, c) = (
            simulate_block(&lp, &both).unwrap(),
            simulate_block(&lp, &only_s).unwrap(),
            simulate_block(&lp, &only_m).unwrap(),
        );
        for k in 0..a.len() {
            assert!((a.r[k] - b.r[k] - c.r[k]).abs() < 1e-9);
            assert!((a.delta_mr[k] - b.delta_mr[k] - c.delta_mr[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn zero_inputs_give_zero_outputs() {
    let lp = loop_at(20.0, 1.0, limited());
    let sc = Scenario::moment_step(0.0, true).unwrap();
    let res = simulate_block(&lp, &sc).unwrap();
    assert!(res.r.iter().chain(&res.delta_mr).chain(&res.delta_f).all(|&x| x == 0.0));
    assert!(!res.summary.any_saturated);
}

#[test]
fn clamp_holds_and_flags_match_demand() {
    let lp = loop_at(20.0, 0.3, limited());
    let sc = Scenario::moment_step(4000.0, true).unwrap();
    let res = simulate_block(&lp, &sc).unwrap();
    let limit = lp.sat_limit();
    assert!(res.summary.any_saturated);
    for k in 0..res.len() {
        assert!(res.delta_mr[k].abs() <= limit);
        assert_eq!(res.saturated[k], res.delta_mr_unsat[k].abs() > limit);
        if !res.saturated[k] {
            assert_eq!(res.delta_mr[k], res.delta_mr_unsat[k]);
        }
    }
}

#[test]
fn dry_road_moment_step_stays_inside_authority() {
    for lp in grid_loops().into_iter().filter(|lp| lp.condition().mu() == 1.0) {
        let res = simulate_block(&lp, &Scenario::moment_step(4000.0, true).unwrap()).unwrap();
        assert!(!res.summary.any_saturated, "{:?}", lp.condition());
        assert!(res.summary.peak_delta_mr < DEFAULT_SAT_LIMIT);
    }
}

#[test]
fn normalization_and_steady_state_ordering() {
    for lp in grid_loops() {
        let sc = Scenario::steer_step(normalized_steer_step(&lp).unwrap(), false).unwrap();
        let ctrl = simulate_block(&lp, &sc).unwrap().summary.steady_state_r;
        let conv = simulate_conventional(&lp, &sc).unwrap().summary.steady_state_r;
        if lp.condition().mu() == 1.0 {
            assert!((conv - 1.0).abs() < 1e-3, "{conv}");
        } else {
            assert!((conv - 1.0).abs() > 0.05);
            assert!((ctrl - 1.0).abs() < (conv - 1.0).abs(), "{ctrl} {conv}");
        }
    }
}

#[test]
fn steer_responses_follow_reference_model() {
    for lp in grid_loops() {
        let sc = Scenario::steer_step(normalized_steer_step(&lp).unwrap(), false).unwrap();
        let res = simulate_block(&lp, &sc).unwrap();
        assert!(tracking_deviation(&lp, &sc, &res).unwrap() < 0.1);
    }
}

#[test]
fn disturbance_is_attenuated_at_dc() {
    for lp in grid_loops() {
        let sc = Scenario::moment_step(4000.0, false).unwrap();
        let ctrl = simulate_block(&lp, &sc).unwrap().summary.steady_state_r;
        let conv = simulate_conventional(&lp, &sc).unwrap().summary.steady_state_r;
        assert!(ctrl.abs() < conv.abs());
        let ch = ChannelTfs::build(&lp).unwrap();
        assert!(ch.r_from_moment.dc_gain().unwrap().abs() > 1e-6);
    }
}

#[test]
fn integral_action_removes_moment_offset() {
    let q = QFilter::first_order(0.006 / 11.0).unwrap();
    for &(v, mu) in &GRID {
        let lp = loop_at(v, mu, q.clone());
        let ch = ChannelTfs::build(&lp).unwrap();
        assert!(ch.r_from_moment.dc_gain().unwrap().abs() < 1e-12);
    }
}

#[test]
fn limited_integrator_uses_less_actuator() {
    let sc = Scenario::moment_step(4000.0, false).unwrap();
    for lp in grid_loops() {
        let standard = lp.clone().with_q(lp.q().standard_counterpart().unwrap());
        let a = peak_actuator_per_unit_moment(&lp, &sc).unwrap();
        let b = peak_actuator_per_unit_moment(&standard, &sc).unwrap();
        assert!(a <= b, "{:?}", lp.condition());
    }
}

#[test]
fn actuator_peaks_are_linear() {
    for lp in grid_loops() {
        let sc = Scenario::moment_step(4000.0, false).unwrap();
        let unit = peak_actuator_per_unit_moment(&lp, &sc).unwrap();
        let p1 = simulate_block(&lp, &sc).unwrap().summary.peak_delta_mr;
        let p2 = simulate_block(&lp, &sc.with_moment(StepInput::new(8000.0, 0.0))).unwrap().summary.peak_delta_mr;
        assert!((4000.0 * unit - p1).abs() <= 1e-9 * p1);
        assert!((p2 - 2.0 * p1).abs() <= 1e-9 * p2);

        let m = min_saturating_moment(&lp, &sc).unwrap();
        assert!(m.is_finite() && m > 0.0);
        assert!((m * unit - lp.sat_limit()).abs() <= 1e-9 * lp.sat_limit());
        let at = simulate_block(&lp, &sc.with_moment(StepInput::new(m, 0.0))).unwrap();
        assert!((at.summary.peak_delta_mr - lp.sat_limit()).abs() <= 5e-3 * lp.sat_limit());

        let wide = lp.clone().with_sat_limit(2.0 * lp.sat_limit()).unwrap();
        let m2 = min_saturating_moment(&wide, &sc).unwrap();
        assert!((m2 - 2.0 * m).abs() <= 1e-12 * m2);
    }
}

#[test]
fn characteristic_polynomials_pass_routh() {
    for lp in grid_loops() {
        let p = ChannelTfs::build(&lp).unwrap().characteristic;
        assert!(p.is_hurwitz().unwrap());
        assert!(routh_stable(&p));
    }
}

#[test]
fn near_unity_q_reproduces_reference_model() {
    let q = QFilter::general(RationalTF::gain(0.999999)).unwrap();
    let lp = loop_at(20.0, 0.5, q);
    // Q constant has relative degree 0 < 1 of G_n: no causal correction block
    assert!(matches!(lp.correction_block(), Err(Error::NonCausalCorrection { .. })));
    let ch = ChannelTfs::build(&lp).unwrap();
    let gn = lp.desired().tf();
    for i in 0..30 {
        let w = 10f64.powf(-2.0 + 3.0 * i as f64 / 29.0);
        let (a, b) = (ch.r_from_steer.eval_jw(w), gn.eval_jw(w));
        assert!((a - b).norm() <= 1e-4 * b.norm(), "w={w}");
    }
    assert!(matches!(
        simulate_block(&lp, &Scenario::steer_step(0.01, false).unwrap()),
        Err(Error::NonCausalCorrection { .. })
    ));
}

#[test]
fn campaign_keeps_order_and_marks_results() {
    let loops = grid_loops();
    let sc = Scenario::moment_step(4000.0, false).unwrap();
    let out = run_campaign(&loops, &sc);
    assert_eq!(out.len(), loops.len());
    for (entry, lp) in out.iter().zip(&loops) {
        assert_eq!(&entry.condition, lp.condition());
        let run = entry.outcome.as_ref().unwrap();
        assert!(run.characteristic_hurwitz);
        assert!(run.conventional.delta_mr.iter().all(|&x| x == 0.0));
        assert_eq!(run.controlled, simulate_block(lp, &sc).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn routh_agrees_with_roots(
        roots in prop::collection::vec((-20.0..20.0f64, 0.0..10.0f64), 1..=3),
        lead in 0.1..10.0f64,
    ) {
        let mut zs = Vec::new();
        for (re, im) in roots {
            prop_assume!(re.abs() > 1e-2);
            if im < 1.0 {
                zs.push(Complex64::new(re, 0.0));
            } else {
                zs.push(Complex64::new(re, im));
                zs.push(Complex64::new(re, -im));
            }
        }
        let p = Polynomial::from_roots(&zs).scale(lead);
        let expect = zs.iter().all(|z| z.re < 0.0);
        prop_assert_eq!(routh_stable(&p), expect);
        prop_assert_eq!(p.is_hurwitz().unwrap(), expect);
    }

    #[test]
    fn open_loop_vehicle_is_stable(v in 5.0..60.0f64, mu in 0.1..=1.0f64) {
        let g = steering_tf(&VehicleParams::default(), &OperatingCondition::new(v, mu).unwrap()).unwrap();
        prop_assert!(routh_stable(g.den()));
        prop_assert!(g.den().is_hurwitz().unwrap());
    }
}
