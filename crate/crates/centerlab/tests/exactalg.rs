mod common;

use centerlab::exactalg::*;
use centerlab::systems::parse_poly;
use common::*;
use proptest::prelude::*;

fn p(text: &str, vars: &Vars) -> MPoly {
    parse_poly(text, vars).unwrap()
}

fn r(text: &str, vars: &Vars) -> RatFunc {
    expr(text, vars)
}

#[test]
fn arithmetic() {
    let v = table(&[]);
    assert_eq!(&p("x+y", &v) * &p("x-y", &v), p("x^2-y^2", &v));
    assert_eq!(p("(eps*x^2+y^2)/2", &v).partial(X), p("eps*x", &v));
    let sq = p("x^2+y^2", &v).pow(2);
    assert_eq!(sq, p("x^4+2*x^2*y^2+y^4", &v));
    assert_eq!(gcd(&sq, &p("x^2+y^2", &v)), p("x^2+y^2", &v));
    assert_eq!(sq.div_exact(&p("x^2+y^2", &v)), Some(p("x^2+y^2", &v)));
    assert!(matches!(p("x", &v).pow_checked(-1), Err(AlgError::NegativePower(-1))));
    assert!(p("x-x", &v).is_zero());
    assert_eq!(p("x-x", &v).nterms(), 0);
}

#[test]
fn table_mismatch() {
    let a = p("x", &table(&["a"]));
    let b = p("x", &table(&["b"]));
    assert!(matches!(a.checked_add(&b), Err(AlgError::TableMismatch(..))));
    assert!(matches!(a.checked_mul(&b), Err(AlgError::TableMismatch(..))));
}

#[test]
fn gcd_examples() {
    let v = table(&[]);
    assert_eq!(gcd(&p("x^2-y^2", &v), &p("x-y", &v)), p("x-y", &v));
    assert_eq!(gcd(&MPoly::zero(&v), &p("3+2*eps+3*eps^2", &v)), p("3*eps^2+2*eps+3", &v));
    assert_eq!(gcd(&p("6*x*y", &v), &p("4*x^2", &v)), p("x", &v));
    assert!(gcd(&p("x+1", &v), &p("y+1", &v)).is_one());
}

#[test]
fn monomial_order_prints_stably() {
    let v = table(&["a", "b"]);
    assert_eq!(p("b + a + eps + y + x + x^2", &v).to_text(), "x^2 + x + y + eps + a + b");
    assert_eq!(p("x*y^2 + x^2*y", &v).to_text(), "x^2*y + x*y^2");
}

#[test]
fn normalize_examples() {
    let v = table(&["a", "mu"]);
    let f = RatFunc::new(p("2*eps^2", &v), p("2*eps", &v)).unwrap();
    assert_eq!(f, r("eps", &v));
    assert_eq!(f.to_text(), "eps");
    let g = RatFunc::new(p("a*mu", &v), p("-eps", &v)).unwrap();
    assert_eq!(g.den(), &p("eps", &v));
    assert_eq!(g.num(), &p("-a*mu", &v));
    assert!(matches!(RatFunc::new(p("x", &v), MPoly::zero(&v)), Err(AlgError::ZeroDenominator)));
    assert_eq!(RatFunc::new(MPoly::zero(&v), p("x+1", &v)).unwrap(), RatFunc::zero(&v));
    assert!(RatFunc::zero(&v).den().is_one());
}

#[test]
fn ratio_constant_detects_scalar_multiples() {
    let v = table(&["a"]);
    let a = r("(a+1)/(3+eps)", &v);
    let b = r("(2*a+2)/(6+2*eps)", &v);
    assert!(a.cross_eq(&b));
    assert_eq!(a.ratio_constant(&r("-(a+1)/(3+eps)", &v)), Some(q(-1)));
    assert_eq!(a.ratio_constant(&r("a/(3+eps)", &v)), None);
}

#[test]
fn linsolve_identity_and_cramer() {
    let v = table(&[]);
    let one = RatFunc::one(&v);
    let zero = RatFunc::zero(&v);
    let rhs = vec![r("eps+1", &v), r("x/(1+eps)", &v)];
    let id = vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]];
    assert_eq!(linsolve_fraction_field(&id, &rhs).unwrap(), rhs);

    let a = vec![vec![r("eps", &v), one.clone()], vec![one.clone(), r("eps", &v)]];
    let sol = linsolve_fraction_field(&a, &[one.clone(), zero.clone()]).unwrap();
    assert!(sol[0].cross_eq(&r("eps/(eps^2-1)", &v)));
    assert!(sol[1].cross_eq(&r("-1/(eps^2-1)", &v)));
}

#[test]
fn linsolve_singular_and_isolated_poles() {
    let v = table(&[]);
    let a = vec![vec![r("eps", &v), r("1", &v)], vec![r("2*eps", &v), r("2", &v)]];
    assert_eq!(linsolve_fraction_field(&a, &[r("1", &v), r("1", &v)]), Err(AlgError::Singular));
    // det = eps^2 vanishes only at eps = 0
    let a = vec![vec![r("eps^2", &v), r("0", &v)], vec![r("0", &v), r("1", &v)]];
    let sol = linsolve_fraction_field(&a, &[r("1", &v), r("1", &v)]).unwrap();
    assert!(sol[0].cross_eq(&r("1/eps^2", &v)));
    assert!(matches!(linsolve_fraction_field(&a, &[r("1", &v)]), Err(AlgError::Shape(_))));
}

#[test]
fn laurent_examples() {
    let v = table(&["a", "mu"]);
    let f = r("-a*mu/eps", &v);
    let e = laurent_expand_eps(&f, 3).unwrap();
    assert_eq!(e.lowest_order(), Some(-1));
    assert_eq!(e.coefficient(-1).unwrap(), &r("-a*mu", &v));
    assert!(e.nonzero().all(|(j, _)| *j == -1));

    let e = laurent_expand_eps(&r("3 - eps + 7*eps^2", &v), 4).unwrap();
    let cs: Vec<_> = e.nonzero().map(|(j, c)| (*j, c.clone())).collect();
    assert_eq!(cs, vec![(0, r("3", &v)), (1, r("-1", &v)), (2, r("7", &v))]);

    let e = laurent_expand_eps(&r("1/(3+2*eps+3*eps^2)", &v), 2).unwrap();
    assert_eq!(e.coefficient(0).unwrap(), &r("1/3", &v));
    assert_eq!(e.coefficient(1).unwrap(), &r("-2/9", &v));
    // multiply back: (1/3 - 2/9 eps + c2 eps^2)(3 + 2 eps + 3 eps^2) = 1 + O(eps^3)
    let s = &(&r("1/3", &v) + &r("-2/9*eps", &v)) + &e.coefficient(2).unwrap().mul_poly(&p("eps^2", &v));
    let back = &(&s * &r("3+2*eps+3*eps^2", &v)) - &r("1", &v);
    assert!(back.num().terms().all(|(m, _)| m.exp(EPS) >= 3), "{back}");
}

#[test]
fn laurent_errors_and_side_conditions() {
    let v = table(&["a"]);
    assert_eq!(laurent_expand_eps(&r("x/eps", &v), 1).unwrap_err(), AlgError::StateDependent);
    let e = laurent_expand_eps(&r("1/(a + eps)", &v), 1).unwrap();
    assert_eq!(e.side_condition, Some(p("a", &v)));
    assert_eq!(e.coefficient(0).unwrap(), &r("1/a", &v));
    assert_eq!(e.coefficient(1).unwrap(), &r("-1/a^2", &v));
}

#[test]
fn random_six_by_six_back_substitutes() {
    use rand::{Rng, SeedableRng};
    let v = table(&[]);
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let rand_entry = |rng: &mut rand::rngs::StdRng| {
        let c: Vec<i64> = (0..3).map(|_| rng.gen_range(-4..=4)).collect();
        r(&format!("{} + {}*eps + {}*eps^2", c[0], c[1], c[2]), &v)
    };
    let a: Vec<Vec<RatFunc>> = (0..6).map(|_| (0..6).map(|_| rand_entry(&mut rng)).collect()).collect();
    let b: Vec<RatFunc> = (0..6).map(|_| rand_entry(&mut rng)).collect();
    let sol = linsolve_fraction_field(&a, &b).unwrap();
    for (row, rhs) in a.iter().zip(&b) {
        let mut acc = RatFunc::zero(&v);
        for (e, s) in row.iter().zip(&sol) {
            acc = &acc + &(e * s);
        }
        assert_eq!(&acc, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gcd_divides_both(a in terms(2, 1, 1, 3), b in terms(2, 1, 1, 3), g in terms(2, 1, 1, 3)) {
        let v = table(&["a"]);
        let g = nonzero(poly_from(&v, &g, 0));
        let a = nonzero(poly_from(&v, &a, 0));
        let b = nonzero(poly_from(&v, &b, 0));
        let (ga, gb) = (&g * &a, &g * &b);
        let d = gcd(&ga, &gb);
        prop_assert!(ga.div_exact(&d).is_some());
        prop_assert!(gb.div_exact(&d).is_some());
        // the planted factor divides the gcd
        prop_assert!(d.div_exact(&g.primitive_part()).is_some(), "gcd {} misses {}", d, g);
    }

    #[test]
    fn normalization_properties(a in terms(2, 2, 2, 4), b in terms(2, 2, 2, 4), d in terms(2, 2, 2, 3)) {
        prop_normalization(a, b, d)?;
    }

    #[test]
    fn laurent_multiply_back(n in terms(0, 4, 2, 5), u in terms(0, 3, 2, 4), u0 in prop_oneof![1i64..=5, -5i64..=-1], val in 0u32..=3, order in -2i64..=4) {
        prop_laurent(n, u, u0, val, order)?;
    }

    #[test]
    fn linsolve_back_substitutes(entries in prop::collection::vec((-4i64..=4, -4i64..=4), 9), rhs in prop::collection::vec((-4i64..=4, -4i64..=4), 3)) {
        let v = table(&[]);
        let e = |(c0, c1): (i64, i64)| r(&format!("{c0} + {c1}*eps"), &v);
        let a: Vec<Vec<RatFunc>> = entries.chunks(3).map(|row| row.iter().map(|&t| e(t)).collect()).collect();
        let b: Vec<RatFunc> = rhs.into_iter().map(e).collect();
        let pa: Vec<Vec<MPoly>> = a.iter().map(|row| row.iter().map(|x| x.num().clone()).collect()).collect();
        match linsolve_fraction_field(&a, &b) {
            Ok(sol) => {
                for (row, rhs) in a.iter().zip(&b) {
                    let mut acc = RatFunc::zero(&v);
                    for (x, s) in row.iter().zip(&sol) {
                        acc = &acc + &(x * s);
                    }
                    prop_assert_eq!(&acc, rhs);
                }
            }
            Err(AlgError::Singular) => prop_assert!(det(&pa).unwrap().is_zero()),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn pivot_order_does_not_change_solution(entries in prop::collection::vec((-3i64..=3, -3i64..=3, -2i64..=2), 9), rhs in prop::collection::vec(-4i64..=4, 3), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let v = table(&["a"]);
        let e = |(c0, c1, c2): (i64, i64, i64)| r(&format!("{c0} + {c1}*eps + {c2}*a"), &v);
        let a: Vec<Vec<RatFunc>> = entries.chunks(3).map(|row| row.iter().map(|&t| e(t)).collect()).collect();
        let b: Vec<RatFunc> = rhs.iter().map(|c| r(&c.to_string(), &v)).collect();
        let pa: Vec<Vec<RatFunc>> = perm.iter().map(|&i| a[i].clone()).collect();
        let pb: Vec<RatFunc> = perm.iter().map(|&i| b[i].clone()).collect();
        prop_assert_eq!(linsolve_fraction_field(&a, &b), linsolve_fraction_field(&pa, &pb));
    }
}
