use super::mpoly::{MPoly, Monomial};

/// Greatest common divisor, normalized to coprime integer coefficients with a
/// positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() && b.is_zero() {
        return a.clone();
    }
    gcd_rec(a, b).primitive_part()
}

pub fn gcd_many<'a, I: IntoIterator<Item = &'a MPoly>>(it: I) -> Option<MPoly> {
    let mut g: Option<MPoly> = None;
    for p in it {
        g = Some(match g {
            None => p.primitive_part(),
            Some(g) => {
                if g.is_constant() && !g.is_zero() {
                    return Some(g);
                }
                gcd(&g, p)
            }
        });
    }
    g
}

pub fn lcm(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() || b.is_zero() {
        return MPoly::zero(a.vars());
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).primitive_part()
}

fn gcd_monomial(a: &Monomial, b: &Monomial) -> Monomial {
    Monomial::new(a.exps().iter().zip(b.exps()).map(|(x, y)| *x.min(y)).collect())
}

fn div_monomial(p: &MPoly, m: &Monomial) -> MPoly {
    if m.degree() == 0 {
        return p.clone();
    }
    MPoly::from_terms(p.vars(), p.terms().map(|(k, c)| (m.quotient_of(k), c.clone())))
}

fn gcd_rec(a: &MPoly, b: &MPoly) -> MPoly {
    let vars = a.vars().clone();
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one(&vars);
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mg = gcd_monomial(&ma, &mb);
    let mono = MPoly::one(&vars).mul_monomial(&mg);
    let a = div_monomial(a, &ma);
    let b = div_monomial(b, &mb);
    if a.is_constant() || b.is_constant() {
        return mono;
    }
    let va = a.used_vars();
    let vb = b.used_vars();
    if !va.iter().all(|v| vb.contains(v)) {
        return mono.mul_with(&reduce_extra(&a, &b, &vb), Default::default());
    }
    if !vb.iter().all(|v| va.contains(v)) {
        return mono.mul_with(&reduce_extra(&b, &a, &va), Default::default());
    }
    // same variable set: recurse on the variable of smallest degree
    let v = *va.iter().min_by_key(|&&v| a.degree_in(v).max(b.degree_in(v))).unwrap();
    let ca = content_in(&a, v);
    let cb = content_in(&b, v);
    let c = gcd_rec(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = prs(pa, pb, v);
    &(&mono * &c) * &g
}

/// gcd(a, b) when `a` uses variables outside `keep`: fold the gcd over the
/// coefficients of `a` with respect to those extra variables.
fn reduce_extra(a: &MPoly, b: &MPoly, keep: &[usize]) -> MPoly {
    let mask: Vec<bool> = (0..a.vars().len()).map(|i| !keep.contains(&i)).collect();
    let groups = a.group_by(&mask);
    let mut coeffs: Vec<MPoly> = groups.into_values().collect();
    coeffs.sort_by_key(|c| c.nterms());
    let mut g = b.clone();
    for c in coeffs {
        g = gcd_rec(&g, &c);
        if g.is_constant() {
            break;
        }
    }
    g
}

fn content_in(p: &MPoly, v: usize) -> MPoly {
    let mut cs: Vec<MPoly> = p.coeffs_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    cs.sort_by_key(|c| c.nterms());
    let mut g = cs[0].clone();
    for c in &cs[1..] {
        if g.is_constant() {
            break;
        }
        g = gcd_rec(&g, c);
    }
    if g.is_constant() {
        MPoly::one(p.vars())
    } else {
        g.primitive_part()
    }
}

fn pp_in(p: &MPoly, v: usize) -> MPoly {
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").primitive_part()
}

fn lc_in(p: &MPoly, v: usize) -> MPoly {
    p.coeffs_in(v).pop().unwrap()
}

/// Sparse pseudo-remainder of `a` by `b` in variable `v`.
pub(crate) fn prem(a: &MPoly, b: &MPoly, v: usize) -> MPoly {
    let db = b.degree_in(v);
    let lb = lc_in(b, v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = lc_in(&r, v);
        let mut e = vec![0u32; a.vars().len()];
        e[v] = dr - db;
        let shift = Monomial::new(e);
        r = &(&lb * &r) - &(&lr * b).mul_monomial(&shift);
    }
    r
}

fn prs(a: MPoly, b: MPoly, v: usize) -> MPoly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    a = a.primitive_part();
    b = b.primitive_part();
    loop {
        let r = prem(&a, &b, v);
        if r.is_zero() {
            return b;
        }
        if r.degree_in(v) == 0 {
            return MPoly::one(a.vars());
        }
        a = b;
        b = pp_in(&r, v);
    }
}
