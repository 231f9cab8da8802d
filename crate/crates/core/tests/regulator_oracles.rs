use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yawreg_core::lti::{FrequencyGrid, Polynomial, RationalTF};
use yawreg_core::regulator::{
    closed_loop_maps_tf, family_bound, integrator_count, small_gain_check, QFilter,
};
use yawreg_core::vehicle::{nominal_dc_gain, steering_tf, OperatingCondition, VehicleParams};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Monic polynomial with random stable roots (real or conjugate pairs).
fn stable_poly(rng: &mut ChaCha8Rng, degree: usize) -> Polynomial {
    let mut roots = Vec::new();
    while roots.len() < degree {
        if degree - roots.len() >= 2 && rng.gen_bool(0.4) {
            let (re, im) = (-rng.gen_range(0.2..20.0), rng.gen_range(0.1..20.0));
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        } else {
            roots.push(c(-rng.gen_range(0.1..50.0)));
        }
    }
    Polynomial::from_roots(&roots)
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Polynomial {
    let mut v: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-3.0..3.0)).collect();
    v[degree] = rng.gen_range(0.5..3.0);
    Polynomial::new(v)
}

fn random_triple(rng: &mut ChaCha8Rng) -> (RationalTF, RationalTF, RationalTF) {
    let gd = rng.gen_range(1..=3);
    let gnum = rng.gen_range(0..gd);
    let g = RationalTF::new(random_poly(rng, gnum), stable_poly(rng, gd)).unwrap();
    let nd = rng.gen_range(1..=2);
    let gn = RationalTF::new(random_poly(rng, nd - 1), stable_poly(rng, nd)).unwrap();
    let qd = rng.gen_range(1..=3);
    let qden = stable_poly(rng, qd);
    // unity d.c. numerator of random degree below the denominator's
    let mut qn: Vec<f64> = (0..qd).map(|_| rng.gen_range(-1.0..1.0)).collect();
    qn[0] = qden.coeff(0);
    let q = RationalTF::new(Polynomial::new(qn), qden).unwrap();
    (g, gn, q)
}

/// Solves `u = u_n + Q u - (Q/G_n)(y + n)`, `y = G u + d` at one point.
fn block_solve(g: Complex64, gn: Complex64, q: Complex64, un: f64, d: f64, n: f64) -> Complex64 {
    // [1-Q, Q/G_n; -G, 1] [u; y] = [u_n - (Q/G_n) n; d]
    let (a11, a12, a21, a22) = (1.0 - q, q / gn, -g, c(1.0));
    let (b1, b2) = (un - q / gn * n, c(d));
    let det = a11 * a22 - a12 * a21;
    (a11 * b2 - a21 * b1) / det
}

fn near_any(s: Complex64, roots: &[Complex64]) -> bool {
    roots.iter().any(|r| (s - r).norm() < 0.05 * (1.0 + r.norm()))
}

#[test]
fn closed_loop_maps_match_block_diagram_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for _ in 0..50 {
        let (g, gn, q) = random_triple(&mut rng);
        let maps = closed_loop_maps_tf(&g, &gn, &q).unwrap();
        let mut avoid = maps.characteristic.roots().unwrap();
        for p in [&g, &gn, &q] {
            avoid.extend(p.poles().unwrap());
            avoid.extend(p.zeros().unwrap());
        }
        let mut points = 0;
        while points < 20 {
            let s = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-30.0..30.0));
            if near_any(s, &avoid) {
                continue;
            }
            points += 1;
            let (gv, gnv, qv) = (g.eval(s), gn.eval(s), q.eval(s));
            for (tf, inputs) in [
                (&maps.y_un, (1.0, 0.0, 0.0)),
                (&maps.y_d, (0.0, 1.0, 0.0)),
                (&maps.y_n, (0.0, 0.0, 1.0)),
            ] {
                let expect = block_solve(gv, gnv, qv, inputs.0, inputs.1, inputs.2);
                let got = tf.eval(s);
                assert!(
                    (got - expect).norm() <= 1e-10 * expect.norm(),
                    "s={s} got={got} expect={expect}"
                );
            }
            let l = maps.loop_gain.as_ref().unwrap().eval(s);
            let one = 1.0 / (1.0 + l) + l / (1.0 + l);
            assert!((one - 1.0).norm() < 1e-10);
            let yd_minus_yn = maps.y_d.eval(s) - maps.y_n.eval(s);
            assert!((yd_minus_yn - 1.0).norm() < 1e-10, "s={s}");
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn nominal_plant_is_regulated_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (g, _, q) = random_triple(&mut rng);
        let maps = closed_loop_maps_tf(&g, &g, &q).unwrap();
        let reduced = maps.y_un.minreal(1e-8).unwrap();
        for w in [0.01, 0.3, 2.0, 40.0] {
            let (a, b) = (maps.y_un.eval_jw(w), g.eval_jw(w));
            assert!((a - b).norm() <= 1e-9 * b.norm());
            assert!((reduced.eval_jw(w) - b).norm() <= 1e-6 * b.norm());
        }
    }
}

/// Q whose numerator matches its denominator through `s^k`.
fn matched_q(rng: &mut ChaCha8Rng, k: usize, m: usize, n: usize) -> QFilter {
    let den = stable_poly(rng, n).scale(rng.gen_range(0.5..5.0));
    let mut num: Vec<f64> = den.coeffs()[..=k].to_vec();
    for i in k + 1..=m {
        let d = den.coeff(i);
        num.push(if i == k + 1 {
            // keep s^(k+1) visibly different from the denominator's
            let off = rng.gen_range(0.2..0.8) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            d * (1.0 + off)
        } else {
            rng.gen_range(-1.0..1.0) * d.abs().max(1e-3)
        });
    }
    QFilter::general(RationalTF::new(Polynomial::new(num), den).unwrap()).unwrap()
}

#[test]
fn matched_coefficients_give_one_more_integrator() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut cases = 0;
    for n in 1..=5 {
        for m in 0..n {
            for k in 0..=m {
                for _ in 0..10 {
                    let q = matched_q(&mut rng, k, m, n);
                    assert_eq!(integrator_count(&q).unwrap(), k + 1, "k={k} m={m} n={n} {:?}", q.tf());
                    cases += 1;
                }
            }
        }
    }
    assert!(cases > 300);
}

#[test]
fn q_scaling_leaves_results_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (g, gn, q) = random_triple(&mut rng);
    let base = closed_loop_maps_tf(&g, &gn, &q).unwrap();
    for k in [1e-3, -2.0, 1e4] {
        let scaled = RationalTF::new(q.num().scale(k), q.den().scale(k)).unwrap();
        let maps = closed_loop_maps_tf(&g, &gn, &scaled).unwrap();
        for w in [0.05, 1.0, 25.0] {
            for (a, b) in [(&maps.y_un, &base.y_un), (&maps.y_d, &base.y_d), (&maps.y_n, &base.y_n)] {
                let (x, y) = (a.eval_jw(w), b.eval_jw(w));
                assert!((x - y).norm() <= 1e-12 * y.norm().max(1e-300));
            }
        }
        assert_eq!(maps.characteristic.degree(), base.characteristic.degree());
        let qa = QFilter::general(q.clone()).unwrap();
        let qb = QFilter::general(scaled).unwrap();
        assert_eq!(integrator_count(&qa).unwrap(), integrator_count(&qb).unwrap());
    }
}

#[test]
fn small_gain_verdict_matches_brute_force() {
    let p = VehicleParams::default();
    let k_n = nominal_dc_gain(&p, 20.0).unwrap();
    let gn = RationalTF::from_coeffs(&[k_n], &[1.0, 0.15]).unwrap();
    let mut family = Vec::new();
    for v in [10.0, 20.0, 30.0] {
        for mu in [0.3, 1.0] {
            family.push(steering_tf(&p, &OperatingCondition::new(v, mu).unwrap()).unwrap());
        }
    }
    let grid = FrequencyGrid::logspace(1e-2, 1e5, 400).unwrap();
    let bound = family_bound(&family, &gn, &grid);
    for q in [
        QFilter::first_order(0.006 / 11.0).unwrap(),
        QFilter::limited_integrator_simple(10.0, 0.006).unwrap(),
    ] {
        let report = small_gain_check(&q, &grid, &bound).unwrap();
        let mut pass = true;
        let mut margin = f64::INFINITY;
        for (&w, b) in grid.omegas().iter().zip(&bound) {
            let s = Complex64::new(0.0, w);
            let qm = (q.tf().num().eval(s) / q.tf().den().eval(s)).norm();
            let dm = family
                .iter()
                .map(|g| ((g.num().eval(s) / g.den().eval(s)) / (gn.num().eval(s) / gn.den().eval(s)) - 1.0).norm())
                .fold(0.0, f64::max);
            assert!((b.unwrap() - dm).abs() <= 1e-12 * (1.0 + dm));
            pass &= qm * dm < 1.0;
            margin = margin.min(1.0 / (dm * qm));
        }
        assert_eq!(report.pass, pass);
        assert!((report.margin - margin).abs() <= 1e-9 * margin);
    }
}
