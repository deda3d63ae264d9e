//! Structural tests: Hamiltonian check, time-reversibility about a rotated axis,
//! candidate characteristic directions, and the Darboux first-integral verifier.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::univariate::{refine_root, UPoly};
use crate::exactalg::{q, qf, AlgError, MPoly, RatFunc, Role, VarTable, Vars, Q, X, Y};
use crate::systems::parse::{parse_expr_ast, Expr};
use crate::systems::{PlaneSystem, SystemError, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("system has free symbols {0:?}; specialize them first")]
    Symbolic(Vec<String>),
    #[error("x*Q - y*P vanishes identically: every direction is characteristic")]
    AllDirections,
    #[error("invalid first-integral expression: {0}")]
    BadIntegral(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// `∂P/∂x + ∂Q/∂y ≡ 0`.
pub fn is_hamiltonian(s: &PlaneSystem) -> bool {
    s.divergence().is_zero()
}

/// `p(X, Y)` for polynomials `X`, `Y` over the same table.
fn compose(p: &MPoly, xs: &MPoly, ys: &MPoly) -> MPoly {
    let vars = xs.vars();
    let mut xp: Vec<MPoly> = vec![MPoly::one(vars)];
    let mut yp: Vec<MPoly> = vec![MPoly::one(vars)];
    let mut out = MPoly::zero(vars);
    for (m, c) in p.terms() {
        let (i, j) = (m.exp(X) as usize, m.exp(Y) as usize);
        while xp.len() <= i {
            let n = xp.last().unwrap() * xs;
            xp.push(n);
        }
        while yp.len() <= j {
            let n = yp.last().unwrap() * ys;
            yp.push(n);
        }
        let mut e = m.exps().to_vec();
        e[X] = 0;
        e[Y] = 0;
        let rest = MPoly::monomial(vars, c.clone(), e);
        out = &out + &(&(&xp[i] * &yp[j]) * &rest);
    }
    out
}

// ---------------------------------------------------------------------------
// reversibility

/// Axis witness `(cos α, sin α)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisWitness {
    pub angle: f64,
    pub cos: f64,
    pub sin: f64,
    /// `tan α` when it is rational; `None` for irrational slopes and for `α = π/2`.
    pub exact_tan: Option<String>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ReversibilityVerdict {
    Reversible { witnesses: Vec<AxisWitness> },
    ReversibleAllAngles,
    NotReversible,
    Undetermined { free_symbols: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct ReversibilityResult {
    /// Homogeneous conditions in the rotation symbols, with factors `c² + s²` removed.
    pub axis_conditions: Vec<MPoly>,
    /// Names used for `cos α` and `sin α` in the conditions.
    pub cos_name: String,
    pub sin_name: String,
    pub verdict: ReversibilityVerdict,
}

fn fresh_name(vars: &Vars, base: &str) -> String {
    let mut n = base.to_string();
    while vars.index(&n).is_some() {
        n.push('_');
    }
    n
}

fn witness_from_tan(t: f64, exact: Option<&Q>) -> AxisWitness {
    let a = t.atan();
    AxisWitness { angle: a, cos: a.cos(), sin: a.sin(), exact_tan: exact.map(crate::exactalg::fmt_q), exact: exact.is_some() }
}

/// Rotates by `u = c·x − s·y`, `v = s·x + c·y` and imposes invariance under
/// `(u, v, t) → (u, −v, −t)`: `P(u,v) = −P(u,−v)` and `Q(u,v) = Q(u,−v)`.
pub fn reversibility_conditions(s: &PlaneSystem) -> Result<ReversibilityResult, StructureError> {
    let cn = fresh_name(s.vars(), "c");
    let sn = fresh_name(s.vars(), "s");
    let vars = s.vars().extended(&[(cn.clone(), Role::Parameter), (sn.clone(), Role::Parameter)]);
    let ci = vars.index(&cn).unwrap();
    let si = vars.index(&sn).unwrap();
    let c = MPoly::var(&vars, ci);
    let sv = MPoly::var(&vars, si);
    let u = MPoly::var(&vars, X);
    let v = MPoly::var(&vars, Y);
    let xs = &(&c * &u) + &(&sv * &v);
    let ys = &(&c * &v) - &(&sv * &u);
    let p = compose(&s.p().lift(&vars)?, &xs, &ys);
    let qq = compose(&s.q().lift(&vars)?, &xs, &ys);
    let pt = &(&c * &p) - &(&sv * &qq);
    let qt = &(&sv * &p) + &(&c * &qq);
    let mut mask = vec![false; vars.len()];
    mask[X] = true;
    mask[Y] = true;
    let circle = &(&c * &c) + &(&sv * &sv);
    let mut conds: Vec<MPoly> = Vec::new();
    let mut push = |coef: MPoly| {
        let mut k = coef;
        while let Some(r) = k.div_exact(&circle) {
            if r.is_zero() {
                break;
            }
            k = r;
        }
        let k = k.primitive_part();
        if !k.is_zero() && !conds.contains(&k) {
            conds.push(k);
        }
    };
    for (key, coef) in pt.group_by(&mask) {
        if key[Y] % 2 == 0 {
            push(coef);
        }
    }
    for (key, coef) in qt.group_by(&mask) {
        if key[Y] % 2 == 1 {
            push(coef);
        }
    }
    conds.sort_by_key(|a| (a.total_degree(), a.to_text()));
    let free = s.free_symbols();
    let verdict = if conds.is_empty() {
        ReversibilityVerdict::ReversibleAllAngles
    } else if !free.is_empty() {
        ReversibilityVerdict::Undetermined { free_symbols: free }
    } else {
        let mut witnesses = Vec::new();
        // c = 0, s = 1
        if conds.iter().all(|k| k.substitute_q(ci, &Q::zero()).substitute_q(si, &Q::one()).is_zero()) {
            let h = std::f64::consts::FRAC_PI_2;
            witnesses.push(AxisWitness { angle: h, cos: 0.0, sin: 1.0, exact_tan: None, exact: true });
        }
        // c = 1, s = t
        let mut g: Option<UPoly> = None;
        for k in &conds {
            let up = UPoly::from_mpoly(&k.substitute_q(ci, &Q::one()), si);
            g = Some(match g {
                None => up,
                Some(g) => g.gcd(&up),
            });
        }
        let g = g.unwrap();
        if g.degree().unwrap_or(0) > 0 {
            let rats = g.rational_roots();
            for r in &rats {
                witnesses.push(witness_from_tan(r.to_f64().unwrap(), Some(r)));
            }
            for (a, b) in g.isolate_real_roots(&qf(1, 1 << 20)) {
                let t = refine_root(&g, &a, &b);
                if rats.iter().any(|r| (r.to_f64().unwrap() - t).abs() < 1e-9) {
                    continue;
                }
                witnesses.push(witness_from_tan(t, None));
            }
        }
        if witnesses.is_empty() {
            ReversibilityVerdict::NotReversible
        } else {
            witnesses.sort_by(|a, b| a.angle.total_cmp(&b.angle));
            ReversibilityVerdict::Reversible { witnesses }
        }
    };
    Ok(ReversibilityResult { axis_conditions: conds, cos_name: cn, sin_name: sn, verdict })
}

/// Rotated field `(P̃, Q̃)` at `(u, v)` for a numeric system, used by tests of the
/// invariance identities.
pub fn rotated_field(s: &PlaneSystem, angle: f64, u: f64, v: f64) -> [f64; 2] {
    let (sa, ca) = angle.sin_cos();
    let x = ca * u + sa * v;
    let y = -sa * u + ca * v;
    let mut pt = vec![0.0; s.vars().len()];
    pt[X] = x;
    pt[Y] = y;
    let p = s.p().eval_f64(&pt);
    let qv = s.q().eval_f64(&pt);
    [ca * p - sa * qv, sa * p + ca * qv]
}

// ---------------------------------------------------------------------------
// characteristic directions

/// Real linear factor of the lowest-degree part of `xQ − yP`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Direction {
    /// `x = 0`
    Vertical,
    /// `y = slope·x`
    Slope { slope: f64, exact: Option<String> },
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Vertical => write!(f, "x = 0"),
            Direction::Slope { slope, exact } => match exact.as_deref() {
                Some("0") => write!(f, "y = 0"),
                Some("1") => write!(f, "y = x"),
                Some("-1") => write!(f, "y = -x"),
                Some(e) => write!(f, "y = {e}*x"),
                None => write!(f, "y = {slope}*x"),
            },
        }
    }
}

/// Candidate characteristic directions: real linear factors of the lowest-degree
/// homogeneous part of `xQ − yP`. An empty list means that form is sign-definite.
pub fn characteristic_directions<S: VectorField + ?Sized>(s: &S) -> Result<Vec<Direction>, StructureError> {
    let free = s.free_symbols();
    if !free.is_empty() {
        return Err(StructureError::Symbolic(free));
    }
    let vars = s.p().vars();
    let m = &(&MPoly::var(vars, X) * s.q()) - &(&MPoly::var(vars, Y) * s.p());
    let Some(low) = m.xy_order() else {
        return Err(StructureError::AllDirections);
    };
    let f = m.xy_part(low);
    let mut out = Vec::new();
    if f.coeff(&exps_xy(vars, 0, low)).is_zero() {
        out.push(Direction::Vertical);
    }
    let g = UPoly::from_mpoly(&f.substitute_q(X, &Q::one()), Y);
    let rats = g.rational_roots();
    let mut slopes: Vec<Direction> = rats
        .iter()
        .map(|r| Direction::Slope { slope: r.to_f64().unwrap(), exact: Some(crate::exactalg::fmt_q(r)) })
        .collect();
    for (a, b) in g.isolate_real_roots(&qf(1, 1 << 20)) {
        let t = refine_root(&g, &a, &b);
        if rats.iter().any(|r| (r.to_f64().unwrap() - t).abs() < 1e-9) {
            continue;
        }
        slopes.push(Direction::Slope { slope: t, exact: None });
    }
    slopes.sort_by(|a, b| match (a, b) {
        (Direction::Slope { slope: x, .. }, Direction::Slope { slope: y, .. }) => x.total_cmp(y),
        _ => std::cmp::Ordering::Equal,
    });
    out.extend(slopes);
    Ok(out)
}

fn exps_xy(vars: &Vars, i: u32, j: u32) -> Vec<u32> {
    let mut e = vec![0; vars.len()];
    e[X] = i;
    e[Y] = j;
    e
}

// ---------------------------------------------------------------------------
// Darboux first integrals

/// `Π f_i^λ_i · exp(g/h) · exp(κ·arg(u + i·v))`. Exponents are polynomials free
/// of x and y, so symbolic powers such as `-2*c` are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxExpr {
    pub power_factors: Vec<(MPoly, MPoly)>,
    pub exp_factor: Option<(MPoly, MPoly)>,
    pub arg_factor: Option<(MPoly, MPoly, MPoly)>,
}

impl DarbouxExpr {
    pub fn vars(&self) -> Vars {
        let mut t: Option<Vars> = None;
        let mut add = |p: &MPoly| {
            t = Some(match &t {
                None => p.vars().clone(),
                Some(v) => VarTable::union(v, p.vars()),
            })
        };
        for (f, l) in &self.power_factors {
            add(f);
            add(l);
        }
        if let Some((g, h)) = &self.exp_factor {
            add(g);
            add(h);
        }
        if let Some((k, u, v)) = &self.arg_factor {
            add(k);
            add(u);
            add(v);
        }
        t.unwrap_or_else(|| VarTable::new::<&str>(&[]))
    }

    pub fn lift(&self, to: &Vars) -> Result<DarbouxExpr, AlgError> {
        Ok(DarbouxExpr {
            power_factors: self.power_factors.iter().map(|(f, l)| Ok((f.lift(to)?, l.lift(to)?))).collect::<Result<_, AlgError>>()?,
            exp_factor: match &self.exp_factor {
                Some((g, h)) => Some((g.lift(to)?, h.lift(to)?)),
                None => None,
            },
            arg_factor: match &self.arg_factor {
                Some((k, u, v)) => Some((k.lift(to)?, u.lift(to)?, v.lift(to)?)),
                None => None,
            },
        })
    }

    /// Numeric value of `ln H` where every polynomial factor is positive, or
    /// `log|f|` in general; used by conservation checks along trajectories.
    pub fn log_value(&self, point: &[f64]) -> f64 {
        let mut r = 0.0;
        for (f, l) in &self.power_factors {
            r += l.eval_f64(point) * f.eval_f64(point).abs().ln();
        }
        if let Some((g, h)) = &self.exp_factor {
            r += g.eval_f64(point) / h.eval_f64(point);
        }
        if let Some((k, u, v)) = &self.arg_factor {
            r += k.eval_f64(point) * v.eval_f64(point).atan2(u.eval_f64(point));
        }
        r
    }
}

fn bad(msg: impl Into<String>) -> StructureError {
    StructureError::BadIntegral(msg.into())
}

fn flatten_product<'a>(e: &'a Expr, sign: i32, out: &mut Vec<(&'a Expr, i32)>) {
    match e {
        Expr::Mul(a, b) => {
            flatten_product(a, sign, out);
            flatten_product(b, sign, out);
        }
        Expr::Div(a, b, _, _) => {
            flatten_product(a, sign, out);
            flatten_product(b, -sign, out);
        }
        _ => out.push((e, sign)),
    }
}

fn free_of_xy(r: &RatFunc) -> bool {
    !r.depends_on_xy()
}

/// Parses `(1+x)^(-2*c) * (1+y)^(-2*a) * (x^4+y^2)`, `exp((g)/(h))` and
/// `argexp(kappa; u; v)` factors. Unknown symbols become parameters.
pub fn parse_darboux(text: &str, base: &Vars) -> Result<DarbouxExpr, StructureError> {
    let ast = parse_expr_ast(text)?;
    let mut syms = BTreeSet::new();
    ast.symbols(&mut syms);
    let extra: Vec<(String, Role)> = syms.into_iter().filter(|n| base.index(n).is_none()).map(|n| (n, Role::Parameter)).collect();
    let vars = base.extended(&extra);
    let mut factors = Vec::new();
    flatten_product(&ast, 1, &mut factors);
    let mut out = DarbouxExpr { power_factors: vec![], exp_factor: None, arg_factor: None };
    let mut exp_acc: Option<RatFunc> = None;
    for (f, sign) in factors {
        let sgn = MPoly::int(&vars, sign as i64);
        match f {
            Expr::Call(name, args, _, _) if name == "exp" => {
                if args.len() != 1 {
                    return Err(bad("exp takes one argument"));
                }
                let r = args[0].eval(&vars, true)?;
                let r = if sign < 0 { -r } else { r };
                exp_acc = Some(match exp_acc {
                    None => r,
                    Some(a) => &a + &r,
                });
            }
            Expr::Call(name, args, _, _) if name == "argexp" => {
                if args.len() != 3 {
                    return Err(bad("argexp takes kappa; u; v"));
                }
                if out.arg_factor.is_some() {
                    return Err(bad("at most one argexp factor"));
                }
                let k = args[0].eval(&vars, false)?;
                if !k.is_polynomial() || !free_of_xy(&k) {
                    return Err(bad("kappa must be free of x and y"));
                }
                let k = k.num().scale(&k.den().constant_value().unwrap().recip());
                let u = args[1].eval(&vars, true)?;
                let v = args[2].eval(&vars, true)?;
                // arg(u + iv) is unchanged by a common positive denominator; require one free of x, y
                if !free_of_xy(&RatFunc::from_poly(u.den().clone())) || !free_of_xy(&RatFunc::from_poly(v.den().clone())) {
                    return Err(bad("argexp arguments must be polynomial in x and y"));
                }
                let d = crate::exactalg::lcm(u.den(), v.den());
                let un = &u.num().clone() * &d.div_exact(u.den()).unwrap();
                let vn = &v.num().clone() * &d.div_exact(v.den()).unwrap();
                out.arg_factor = Some((&k * &sgn, un, vn));
            }
            Expr::Call(name, ..) => return Err(bad(format!("unknown function '{name}'"))),
            Expr::Pow(b, e, _, _) => {
                let base_r = b.eval(&vars, true)?;
                let ex = e.eval(&vars, true)?;
                if !ex.is_polynomial() || !free_of_xy(&ex) {
                    return Err(bad("exponents must be polynomial in the parameters"));
                }
                let ex = ex.num().scale(&ex.den().constant_value().unwrap().recip());
                let ex = &ex * &sgn;
                push_rat_factor(&mut out, &base_r, &ex);
            }
            other => {
                let r = other.eval(&vars, true)?;
                push_rat_factor(&mut out, &r, &sgn);
            }
        }
    }
    if let Some(r) = exp_acc {
        out.exp_factor = Some((r.num().clone(), r.den().clone()));
    }
    if out.power_factors.is_empty() && out.exp_factor.is_none() && out.arg_factor.is_none() {
        return Err(bad("no factor depends on x or y"));
    }
    Ok(out)
}

fn push_rat_factor(out: &mut DarbouxExpr, r: &RatFunc, ex: &MPoly) {
    if r.num().depends_on_xy() {
        out.power_factors.push((r.num().clone(), ex.clone()));
    }
    if r.den().depends_on_xy() {
        out.power_factors.push((r.den().clone(), -ex));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxVerdict {
    /// Numerator of `Ḣ/H` over the cleared common denominator.
    pub residual: MPoly,
    pub domain_note: Option<String>,
}

impl DarbouxVerdict {
    pub fn is_zero(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Logarithmic derivative of `H` along `s` with denominators cleared:
/// `Σ λ_i ḟ_i/f_i + d/dt(g/h) + κ (u v̇ − v u̇)/(u² + v²)`.
pub fn verify_darboux_integral(s: &PlaneSystem, h: &DarbouxExpr) -> Result<DarbouxVerdict, StructureError> {
    let vars = VarTable::union(s.vars(), &h.vars());
    let s = s.lift(&vars)?;
    let h = h.lift(&vars)?;
    let dot = |p: &MPoly| s.lie_derivative(p);
    let one = MPoly::one(&vars);
    let fs: Vec<&MPoly> = h.power_factors.iter().map(|(f, _)| f).collect();
    let w = match &h.arg_factor {
        Some((_, u, v)) => &(u * u) + &(v * v),
        None => one.clone(),
    };
    let (g, hh) = match &h.exp_factor {
        Some((g, hh)) => (g.clone(), hh.clone()),
        None => (MPoly::zero(&vars), one.clone()),
    };
    let h2 = &hh * &hh;
    let fprod = fs.iter().fold(one.clone(), |a, f| &a * *f);
    let mut n = MPoly::zero(&vars);
    for (i, (f, lam)) in h.power_factors.iter().enumerate() {
        let others = fs.iter().enumerate().filter(|(j, _)| *j != i).fold(one.clone(), |a, (_, f)| &a * *f);
        n = &n + &(&(&(&(lam * &dot(f)?) * &others) * &h2) * &w);
    }
    if h.exp_factor.is_some() {
        let d = &(&dot(&g)? * &hh) - &(&g * &dot(&hh)?);
        n = &n + &(&(&d * &fprod) * &w);
    }
    if let Some((k, u, v)) = &h.arg_factor {
        let a = &(u * &dot(v)?) - &(v * &dot(u)?);
        n = &n + &(&(&(k * &a) * &fprod) * &h2);
    }
    let residual = if n.is_zero() { n } else { n.primitive_part() };
    let domain_note = h.arg_factor.as_ref().map(|_| "certified only where u^2 + v^2 > 0".to_string());
    Ok(DarbouxVerdict { residual, domain_note })
}

/// Polynomial first integral `f` as a one-factor Darboux expression.
pub fn polynomial_integral(f: MPoly) -> DarbouxExpr {
    let l = MPoly::constant(f.vars(), q(1));
    DarbouxExpr { power_factors: vec![(f, l)], exp_factor: None, arg_factor: None }
}
