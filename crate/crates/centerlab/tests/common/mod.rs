#![allow(dead_code)]

use centerlab::exactalg::{qf, table, MPoly, Monomial, RatFunc, VarTable, Vars, EPS};
use centerlab::liapunov::{back_substitution_defect, compute_liapunov_constants, solve_homological_step};
use centerlab::numeric::{integrate_adaptive, return_map, Transversal};
use centerlab::systems::{parse_expr, parse_system, PlaneSystem};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

// systems from the worked examples
pub const LL5: &str = "xdot = (-y+y^2)*(x^2+y^2); ydot = (x+2*x^2)*(x^2+y^2)";
pub const LL6: &str = "xdot = (-y+y^2)*(x^2+y^2-eps); ydot = (x+2*x^2)*(x^2+y^2-eps)";
pub const LL8: &str = "xdot = -a*y^3; ydot = b*x^5";
pub const LL9: &str = "xdot = -a*y^3; ydot = eps*x^3 + b*x^5";
pub const SS5: &str = "xdot = 12*lambda*x^3 - 9*x^2*y - 20*lambda*x*y^2 - 25*y^3 + 9*mu*y^3; ydot = 9*x^3 + 12*lambda*x^2*y + 25*x*y^2 - 20*lambda*y^3";
pub const G0: &str = "xdot = y + x^2 + k2*x*y; ydot = k1*x^2 - x^3";
pub const G1: &str = "xdot = y + A*x*y + B*y^2; ydot = -x^3 + K*x*y^2 + L*y^3";
pub const G11: &str = "xdot = y + A*x*y + B*y^2; ydot = -eps*x - x^3 + K*x*y^2 + L*y^3";
pub const G2: &str = "xdot = -y; ydot = x^5 + a*x^6 + y*(b*x^3 + c*x^4)";
pub const G21: &str = "xdot = -y; ydot = eps*x + x^5 + a*x^6 + y*(b*x^3 + c*x^4)";
pub const G3: &str = "xdot = -y + a11*x*y + a02*y^2 + a30*x^3 + a21*x^2*y + a12*x*y^2 + a03*y^3; ydot = x^3";
pub const G4: &str = "xdot = -y; ydot = a11*x*y + a02*y^2 + a30*x^3 + a21*x^2*y + a12*x*y^2 + a03*y^3";
pub const G5: &str = "xdot = -a*(1 + x)*(x^4 - 4*y^3 - 3*y^4) + mu*y^3; ydot = -a*(1 + y)*(4*x^3 + 3*x^4 - y^4) + lambda*x^5";
pub const CONT: &str = "xdot = y + x*y + (1-a)*y^2 + (1-a)*x*y^2 - a*x^4 - a*x^5; ydot = c*y^2 - 2*x^3 + c*y^3 - 2*x^3*y + (c-2)*x^4*(1+y)";
pub const CONT2: &str = "xdot = -eps*x*(a*x+a*x^2) + y + x*y + (1-a)*y^2 + (1-a)*x*y^2 - a*x^4 - a*x^5; ydot = -eps*x*(1+(1-c)*x+y+(1-c)*x*y) + c*y^2 - 2*x^3 + c*y^3 - 2*x^3*y + (c-2)*x^4*(1+y)";
pub const NIL: &str = "xdot = y + x^2; ydot = -x^3";
pub const NIL_EPS: &str = "xdot = y + x^2; ydot = -eps*x - x^3";
pub const RADIAL: &str = "xdot = -y - x*(x^2+y^2); ydot = x - y*(x^2+y^2)";
pub const G1_CENTER: &str = "xdot = y + A*x*y + B*y^2; ydot = -x^3 + A^2/2*x*y^2 + A*B/3*y^3";

/// Parses `text` over the table of `like` (extended with any new symbol).
pub fn expr(text: &str, like: &Vars) -> RatFunc {
    parse_expr(text, like).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Equality as rational functions after bringing both to a common table.
pub fn same(a: &RatFunc, b: &RatFunc) -> bool {
    let t = VarTable::union(a.vars(), b.vars());
    a.lift(&t).unwrap().cross_eq(&b.lift(&t).unwrap())
}

pub fn bind(s: &PlaneSystem, name: &str, value: &str) -> PlaneSystem {
    let v = expr(value, s.vars());
    assert!(v.is_polynomial());
    s.substitute(&[(name.to_string(), v.num().clone())]).unwrap()
}

// ---------------------------------------------------------------------------
// strategies

pub type Term = (i64, i64, u32, u32, u32, u32);

/// Terms `c·x^i y^j eps^k a^l` with small rational coefficients.
pub fn terms(max_xy: u32, max_eps: u32, max_a: u32, len: usize) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec((-6i64..=6, 1i64..=4, 0..=max_xy, 0..=max_xy, 0..=max_eps, 0..=max_a), 0..=len)
}

pub fn poly_from(vars: &Vars, ts: &[Term], min_xy: u32) -> MPoly {
    let a = vars.index("a");
    let mut p = MPoly::zero(vars);
    for &(c, d, i, j, k, l) in ts {
        if i + j < min_xy {
            continue;
        }
        let mut e = vec![0u32; vars.len()];
        e[0] = i;
        e[1] = j;
        e[EPS] = k;
        if let Some(ai) = a {
            e[ai] = l;
        }
        p.add_term(Monomial::new(e), qf(c, d));
    }
    p
}

pub fn nonzero(p: MPoly) -> MPoly {
    if p.is_zero() {
        MPoly::one(p.vars())
    } else {
        p
    }
}

// ---------------------------------------------------------------------------
// property bodies shared by the property suites and the acceptance target

/// A random degree-n residual solved against each supported linear part
/// back-substitutes exactly.
pub fn prop_homological_step(linear: usize, n: u32, ts: Vec<Term>) -> Result<(), TestCaseError> {
    let lin = ["xdot = -y; ydot = x", "xdot = y; ydot = -eps*x", "xdot = eps*y; ydot = -eps*x"][linear];
    let l = parse_system(lin).unwrap();
    let vars = table(&["a"]);
    let l = l.lift(&vars).unwrap();
    let r = MPoly::from_terms(&vars, poly_from(&vars, &ts, 0).terms().filter(|(m, _)| m.xy_degree() == n).map(|(m, c)| (m.clone(), c.clone())));
    let residual = RatFunc::from_poly(r.clone());
    let (h, v) = solve_homological_step(&l, n, &residual).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let lh = RatFunc::new(l.lie_derivative(h.num()).unwrap(), h.den().clone()).unwrap();
    let mut rhs = -&residual;
    if n.is_multiple_of(2) {
        let v = v.ok_or_else(|| TestCaseError::fail("even degree without V"))?;
        let r2 = parse_expr("(x^2+y^2)", &vars).unwrap().num().pow(n / 2);
        rhs = &rhs + &v.mul_poly(&r2);
        // kernel rule: no y^n term
        prop_assert!(h.num().terms().all(|(m, _)| m.exp(1) != n));
    } else {
        prop_assert!(v.is_none());
    }
    prop_assert!(same(&lh, &rhs), "L(H) = {} but expected {}", lh, rhs);
    Ok(())
}

/// Full report back-substitution on a random perturbed-nilpotent system.
pub fn prop_report_back_substitution(pt: Vec<Term>, qt: Vec<Term>) -> Result<(), TestCaseError> {
    let vars = table(&["a"]);
    let x = MPoly::var(&vars, 0);
    let y = MPoly::var(&vars, 1);
    let eps = MPoly::var(&vars, EPS);
    let p = &y + &poly_from(&vars, &pt, 2);
    let q = &(-&(&eps * &x)) + &poly_from(&vars, &qt, 2);
    let s = PlaneSystem::new(p, q).unwrap();
    let r = compute_liapunov_constants(&s, 6).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let d = back_substitution_defect(&s, &r);
    prop_assert!(d.is_zero(), "defect {}", d);
    Ok(())
}

/// normalize(a·d, b·d) = normalize(a, b) and (p·q)/(q·r) = p/r.
pub fn prop_normalization(a: Vec<Term>, b: Vec<Term>, d: Vec<Term>) -> Result<(), TestCaseError> {
    let vars = table(&["a"]);
    let a = poly_from(&vars, &a, 0);
    let b = nonzero(poly_from(&vars, &b, 0));
    let d = nonzero(poly_from(&vars, &d, 0));
    let r1 = RatFunc::new(a.clone(), b.clone()).unwrap();
    let r2 = RatFunc::new(&a * &d, &b * &d).unwrap();
    prop_assert_eq!(&r1, &r2);
    // idempotent
    let r3 = RatFunc::new(r1.num().clone(), r1.den().clone()).unwrap();
    prop_assert_eq!(&r1, &r3);
    prop_assert!(r1.cross_eq(&RatFunc::new(a.clone(), b.clone()).unwrap()));
    prop_assert!(r2.cross_eq(&RatFunc::new(a, b).unwrap()));
    if !r1.is_zero() {
        prop_assert!(r1.den().leading_coeff() > qf(0, 1));
    }
    Ok(())
}

const LINEAR_PARTS: [(&str, &str); 5] = [("-y", "x"), ("y", "-eps*x"), ("eps*y", "-eps*x"), ("y", "0"), ("0", "0")];

pub fn random_system(linear: usize, pt: &[Term], qt: &[Term]) -> PlaneSystem {
    let vars = table(&["a"]);
    let (lp, lq) = LINEAR_PARTS[linear];
    let p = &parse_expr(lp, &vars).unwrap().num().clone() + &poly_from(&vars, pt, 2);
    let q = &parse_expr(lq, &vars).unwrap().num().clone() + &poly_from(&vars, qt, 2);
    PlaneSystem::new(p, q).unwrap()
}

/// print → parse is the identity.
pub fn prop_round_trip(linear: usize, pt: Vec<Term>, qt: Vec<Term>) -> Result<(), TestCaseError> {
    let s = random_system(linear, &pt, &qt);
    let text = s.to_text();
    let back = parse_system(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    let back = back.lift(s.vars()).unwrap();
    prop_assert_eq!(back.p(), s.p());
    prop_assert_eq!(back.q(), s.q());
    prop_assert_eq!(back.linear_class(), s.linear_class());
    Ok(())
}

fn eps_valuation(p: &MPoly) -> u32 {
    p.terms().map(|(m, _)| m.exp(EPS)).min().unwrap_or(u32::MAX)
}

/// Re-summing the Laurent coefficients leaves a remainder of order `order + 1`.
pub fn prop_laurent(num: Vec<Term>, unit: Vec<Term>, u0: i64, v: u32, order: i64) -> Result<(), TestCaseError> {
    let vars = table(&["a"]);
    let n = poly_from(&vars, &num, 0);
    let n = MPoly::from_terms(&vars, n.terms().filter(|(m, _)| m.xy_degree() == 0).map(|(m, c)| (m.clone(), c.clone())));
    let u = poly_from(&vars, &unit, 0);
    let u = MPoly::from_terms(&vars, u.terms().filter(|(m, _)| m.xy_degree() == 0 && m.exp(EPS) > 0).map(|(m, c)| (m.clone(), c.clone())));
    let u = &u + &MPoly::int(&vars, u0);
    let mut e = vec![0u32; vars.len()];
    e[EPS] = v;
    let den = &u * &MPoly::monomial(&vars, qf(1, 1), e);
    let f = RatFunc::new(n, den).unwrap();
    let ex = centerlab::exactalg::laurent_expand_eps(&f, order).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut sum = RatFunc::zero(&vars);
    let eps = RatFunc::from_poly(MPoly::var(&vars, EPS));
    for (j, c) in &ex.terms {
        let mut t = c.clone();
        if *j >= 0 {
            t = t.mul_poly(&MPoly::var(&vars, EPS).pow(*j as u32));
        } else {
            for _ in 0..(-j) {
                t = &t / &eps;
            }
        }
        sum = &sum + &t;
    }
    let rest = &f - &sum;
    if !rest.is_zero() {
        let val = eps_valuation(rest.num()) as i64 - eps_valuation(rest.den()) as i64;
        prop_assert!(val > order, "remainder {} has order {}", rest, val);
    }
    Ok(())
}

/// Energy drift over one revolution of `H = (x²+y²)/2 + cubic + quartic`.
pub fn prop_energy(c3: [i64; 4], c4: [i64; 5], x0: f64) -> Result<(), TestCaseError> {
    let mut h = String::from("(x^2+y^2)/2");
    for (i, c) in c3.iter().enumerate() {
        h.push_str(&format!(" + ({c}/4)*x^{}*y^{}", 3 - i, i));
    }
    for (i, c) in c4.iter().enumerate() {
        h.push_str(&format!(" + ({c}/8)*x^{}*y^{}", 4 - i, i));
    }
    let vars = table(&[]);
    let hp = parse_expr(&h, &vars).unwrap().num().clone();
    let p = -&hp.partial(1);
    let q = hp.partial(0);
    let s = PlaneSystem::new(p, q).unwrap();
    let rm = return_map(&s, &[x0], Transversal::PositiveX).map_err(|e| TestCaseError::fail(format!("{h}: {e}")))?;
    let t = rm.samples[0].return_time;
    let tr = integrate_adaptive(&s, [x0, 0.0], (0.0, t), 1e-12, 1e-14).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let ev = |z: [f64; 2]| hp.eval_f64(&[z[0], z[1], 0.0]);
    let h0 = ev([x0, 0.0]);
    for (_, z) in tr.knots() {
        prop_assert!((ev(z) - h0).abs() <= 1e-9, "{}: drift {}", h, ev(z) - h0);
    }
    Ok(())
}
