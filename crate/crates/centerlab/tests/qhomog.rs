use std::f64::consts::PI;

use centerlab::exactalg::q;
use centerlab::numeric::{Dopri5, OdeOptions};
use centerlab::qhomog::*;
use centerlab::systems::{system, PlaneSystem};
use num_complex::Complex64;

const SS5: &str = "xdot = 12*lambda*x^3 - 9*x^2*y - 20*lambda*x*y^2 - 25*y^3 + 9*mu*y^3; ydot = 9*x^3 + 12*lambda*x^2*y + 25*x*y^2 - 20*lambda*y^3";
const LL8: &str = "xdot = -a*y^3; ydot = b*x^5";

fn ss5(lambda: i64, mu: i64) -> PlaneSystem {
    system(SS5).specialize(&[("lambda".into(), q(lambda)), ("mu".into(), q(mu))]).unwrap()
}

fn ll8() -> PlaneSystem {
    system(LL8).specialize(&[("a".into(), q(1)), ("b".into(), q(1))]).unwrap()
}

const H11: QHSignature = QHSignature { p: 1, q: 1, m: 3 };
const H23: QHSignature = QHSignature { p: 2, q: 3, m: 8 };

/// First upward zero of `Sn`, located on the dense output.
fn ode_period(p: u32, q: u32) -> f64 {
    let z0 = [(p as f64).powf(-1.0 / (2.0 * q as f64)), 0.0];
    let (ep, eq) = (2 * p as i32 - 1, 2 * q as i32 - 1);
    let f = move |_t: f64, z: [f64; 2]| [-z[1].powi(ep), z[0].powi(eq)];
    let mut st = Dopri5::new(f, 0.0, z0, 1.0, OdeOptions { rtol: 1e-14, atol: 1e-16, ..Default::default() });
    let mut went_negative = false;
    loop {
        let seg = st.step(f64::INFINITY).unwrap();
        if seg.y1[1] < 0.0 {
            went_negative = true;
        }
        if went_negative && seg.y0[1] < 0.0 && seg.y1[1] >= 0.0 {
            let (mut a, mut b) = (seg.t0, seg.t1());
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if seg.eval(m)[1] < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
    }
}

#[test]
fn signatures() {
    assert!(detect_quasi_homogeneity(&system(LL8), 6).contains(&H23));
    assert!(detect_quasi_homogeneity(&system(SS5), 6).contains(&H11));
    // y and x^2 share weight 2 when (p,q) = (1,2), and x^3 then has weight 3
    assert_eq!(detect_quasi_homogeneity(&system("xdot = y + x^2; ydot = -x^3"), 10), vec![QHSignature { p: 1, q: 2, m: 2 }]);
    assert!(detect_quasi_homogeneity(&system("xdot = y + x^2; ydot = -x^3 + x*y^2"), 10).is_empty());
    // the eps x^3 term breaks the weights of the quintic
    assert!(detect_quasi_homogeneity(&system("xdot = -a*y^3; ydot = eps*x^3 + b*x^5"), 10).is_empty());
    assert!(detect_quasi_homogeneity(&system("xdot = 0; ydot = 0"), 4).is_empty());
}

#[test]
fn signature_weights_hold() {
    for src in [LL8, SS5, "xdot = -y^3; ydot = x^3", "xdot = y; ydot = -x^3"] {
        let s = system(src);
        for g in detect_quasi_homogeneity(&s, 8) {
            assert!(g.holds_for(&s));
            for (m, _) in s.p().terms() {
                assert_eq!(g.p * m.exp(0) + g.q * m.exp(1), g.p - 1 + g.m);
            }
            for (m, _) in s.q().terms() {
                assert_eq!(g.p * m.exp(0) + g.q * m.exp(1), g.q - 1 + g.m);
            }
        }
    }
}

#[test]
fn classical_trig() {
    for k in 0..50 {
        let th = -7.0 + 0.31 * k as f64;
        let (c, s) = pq_trig(1, 1, th).unwrap();
        assert!((c - th.cos()).abs() < 1e-10 && (s - th.sin()).abs() < 1e-10);
    }
    // the ODE path for (1,1), bypassing the closed form
    let c = PQCircle::new(1, 1, 16).unwrap();
    assert!(c.tolerance < 1e-14);
}

#[test]
fn trig_initial_condition() {
    for (p, qq) in [(1, 2), (2, 3), (3, 2), (4, 1)] {
        let (c, s) = pq_trig(p, qq, 0.0).unwrap();
        assert_eq!((c, s), ((p as f64).powf(-1.0 / (2.0 * qq as f64)), 0.0));
    }
}

#[test]
fn trig_identity() {
    for (p, qq) in [(2, 3), (1, 2), (3, 2)] {
        let c = PQCircle::new(p, qq, 512).unwrap();
        assert!(c.tolerance <= 1e-10, "({p},{qq}) {}", c.tolerance);
        for k in 0..20 {
            let th = 0.37 * k as f64;
            let (cs, sn) = pq_trig(p, qq, th).unwrap();
            assert!(identity_defect(p, qq, cs, sn) <= 1e-10);
        }
    }
}

#[test]
fn period_formula() {
    assert!((pq_period(1, 1) - 2.0 * PI).abs() < 1e-10);
    for (p, qq) in [(1, 1), (1, 2), (2, 3), (3, 2)] {
        let t = ode_period(p, qq);
        assert!((t - pq_period(p, qq)).abs() <= 1e-9, "({p},{qq}): ode {t} formula {}", pq_period(p, qq));
    }
}

#[test]
fn trig_is_periodic() {
    let tau = pq_period(2, 3);
    let a = pq_trig(2, 3, 0.8).unwrap();
    let b = pq_trig(2, 3, 0.8 + tau).unwrap();
    assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
}

#[test]
fn condition_i_cases() {
    let r = condition_i_no_real_factors(&ss5(1, 1), &H11).unwrap();
    assert_eq!(r, ConditionI::Holds { sign: 1, method: ConditionIMethod::ExactEven });
    assert!(!condition_i_no_real_factors(&ss5(0, 3), &H11).unwrap().holds());
    assert!(condition_i_no_real_factors(&ss5(0, 2), &H11).unwrap().holds());
    assert!(condition_i_no_real_factors(&ll8(), &H23).unwrap().holds());
}

#[test]
fn condition_i_grid_path() {
    // W = x^4 + x^3 y + y^4 is positive; x^4 + 3 x^3 y + y^4 is not
    let s = system("xdot = -y^3; ydot = x^3 + x^2*y");
    assert_eq!(condition_i_no_real_factors(&s, &H11).unwrap(), ConditionI::Holds { sign: 1, method: ConditionIMethod::GridLipschitz });
    let s = system("xdot = -y^3; ydot = x^3 + 3*x^2*y");
    match condition_i_no_real_factors(&s, &H11).unwrap() {
        ConditionI::Fails { window: (a, b), method } => {
            assert_eq!(method, ConditionIMethod::GridLipschitz);
            let g = |t: f64| t.cos().powi(4) + 3.0 * t.cos().powi(3) * t.sin() + t.sin().powi(4);
            assert!(g(a) * g(b) <= 0.0 || g(a).abs().min(g(b).abs()) < 1e-6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn condition_i_requires_coprime_numeric() {
    let s = system("xdot = -y*(x^2+y^2); ydot = x*(x^2+y^2)");
    assert!(matches!(condition_i_no_real_factors(&s, &H11), Err(QhError::NotCoprime(_))));
    assert!(matches!(condition_i_no_real_factors(&system(SS5), &H11), Err(QhError::Symbolic(_))));
    assert!(matches!(condition_i_no_real_factors(&ll8(), &H11), Err(QhError::WrongSignature { .. })));
}

/// The closed form printed for the homogeneous cubic family, with principal
/// complex square roots.
fn closed_form(lambda: f64, mu: f64) -> f64 {
    let c = |v: f64| Complex64::new(v, 0.0);
    let s = c(64.0 + 81.0 * mu).sqrt();
    let a = (c(-17.0) - s).sqrt();
    let b = (c(-17.0) + s).sqrt();
    let pre = c(-4.0 * PI * lambda) / (c(9.0 * mu - 25.0).sqrt() * s * a * b);
    let v = pre * (a * (c(160.0 - 27.0 * mu) - 5.0 * s) + b * (c(-160.0 + 27.0 * mu) - 5.0 * s));
    assert!(v.im.abs() < 1e-12 * v.re.abs().max(1.0));
    v.re
}

#[test]
fn condition_ii_cubic_family() {
    for (l, m) in [(0, 1), (1, 0)] {
        let v = condition_ii_integral(&ss5(l, m), &H11).unwrap();
        assert!(v.value.abs() <= 1e-8, "({l},{m}) {v:?}");
        assert!(v.is_zero());
    }
    let v = condition_ii_integral(&ss5(1, 1), &H11).unwrap();
    assert!(v.value.abs() >= 1e-3);
    let cf = closed_form(1.0, 1.0);
    assert!(((v.value - cf) / cf).abs() <= 1e-6, "{} vs {}", v.value, cf);
    let v = condition_ii_integral(&ss5(1, 2), &H11).unwrap();
    let cf = closed_form(1.0, 2.0);
    assert!(((v.value - cf) / cf).abs() <= 1e-6, "{} vs {}", v.value, cf);
}

#[test]
fn condition_ii_time_rescaling() {
    let s = ss5(1, 1);
    let s3 = PlaneSystem::new(s.p().scale(&q(3)), s.q().scale(&q(3))).unwrap();
    let a = condition_ii_integral(&s, &H11).unwrap().value;
    let b = condition_ii_integral(&s3, &H11).unwrap().value;
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn condition_ii_quasi_homogeneous() {
    let v = condition_ii_integral(&ll8(), &H23).unwrap();
    assert!(v.value.abs() <= 1e-8);
    assert!((v.period - pq_period(2, 3)).abs() < 1e-15);
}

#[test]
fn condition_ii_needs_condition_i() {
    assert!(matches!(condition_ii_integral(&ss5(0, 3), &H11), Err(QhError::ConditionIFails(..))));
}

#[test]
fn antisymmetric_integrand_cancels() {
    // F = sin cos (cos^2 - sin^2) changes sign under theta -> pi/2 - theta
    let s = system("xdot = -y^3; ydot = x^3");
    let v = condition_ii_integral(&s, &H11).unwrap();
    assert!(v.value.abs() <= 1e-14);
}

#[test]
fn classify_examples() {
    assert_eq!(classify_qh_center(&ll8(), &H23).unwrap().verdict, QhVerdict::Center);
    assert_eq!(classify_qh_center(&ss5(1, 1), &H11).unwrap().verdict, QhVerdict::Focus);
    assert_eq!(classify_qh_center(&ss5(0, 1), &H11).unwrap().verdict, QhVerdict::Center);
    assert_eq!(classify_qh_center(&system("xdot = -y^3; ydot = x^3"), &H11).unwrap().verdict, QhVerdict::Center);
    let r = classify_qh_center(&ss5(0, 3), &H11).unwrap();
    assert!(matches!(r.verdict, QhVerdict::Undecided { .. }));
}

#[test]
fn preferred_signature_is_smallest() {
    assert_eq!(preferred_signature(&system(SS5), 6), Some(H11));
    assert_eq!(preferred_signature(&system(LL8), 6), Some(H23));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn trig_identity_holds(pq in prop::sample::select(vec![(1u32, 1u32), (1, 2), (2, 1), (2, 3), (3, 2)]), th in -20.0f64..20.0) {
            let (cs, sn) = pq_trig(pq.0, pq.1, th).unwrap();
            prop_assert!(identity_defect(pq.0, pq.1, cs, sn) <= 1e-10);
        }

        #[test]
        fn time_rescaling_leaves_condition_ii(lambda in -3i64..=3, mu in -3i64..=2, k in 1i64..=9, d in 1i64..=4) {
            // lambda = mu = 0 leaves the common factor 9x^2 + 25y^2
            prop_assume!(lambda != 0 || mu != 0);
            let s = ss5(lambda, mu);
            let c = centerlab::exactalg::qf(k, d);
            let sk = PlaneSystem::new(s.p().scale(&c), s.q().scale(&c)).unwrap();
            let a = condition_ii_integral(&s, &H11).unwrap().value;
            let b = condition_ii_integral(&sk, &H11).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }
}
