//! Quasi-homogeneous systems: signature detection, the (p,q)-trigonometric
//! functions, and the two center conditions.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::exactalg::univariate::UPoly;
use crate::exactalg::{gcd, MPoly, Q, X, Y};
use crate::exec::ExecPolicy;
use crate::numeric::{Dopri5, NumericError, OdeOptions, Poly2, State};
use crate::systems::VectorField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QhError {
    #[error("system has free symbols {0:?}; specialize them first")]
    Symbolic(Vec<String>),
    #[error("P and Q share the factor {0}")]
    NotCoprime(String),
    #[error("system is not ({p},{q})-quasi-homogeneous")]
    WrongSignature { p: u32, q: u32 },
    #[error("condition (i) fails: G vanishes near theta in [{0}, {1}]")]
    ConditionIFails(f64, f64),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// `P` has weight `p−1+m` and `Q` weight `q−1+m` under `(x, y) → (λᵖx, λ^q y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QHSignature {
    pub p: u32,
    pub q: u32,
    pub m: u32,
}

impl QHSignature {
    /// Monomial-by-monomial check of the weights.
    pub fn holds_for<S: VectorField + ?Sized>(&self, s: &S) -> bool {
        let ok = |f: &MPoly, base: u32| match weight_of(f, self.p, self.q) {
            WeightOf::Empty => true,
            WeightOf::Uniform(w) => w == base as i64 - 1 + self.m as i64,
            WeightOf::Mixed => false,
        };
        !(s.p().is_zero() && s.q().is_zero()) && ok(s.p(), self.p) && ok(s.q(), self.q)
    }
}

#[derive(Debug, PartialEq)]
enum WeightOf {
    Empty,
    Uniform(i64),
    Mixed,
}

fn weight_of(f: &MPoly, p: u32, q: u32) -> WeightOf {
    let mut w = WeightOf::Empty;
    for (m, _) in f.terms() {
        let k = p as i64 * m.exp(X) as i64 + q as i64 * m.exp(Y) as i64;
        w = match w {
            WeightOf::Empty => WeightOf::Uniform(k),
            WeightOf::Uniform(v) if v == k => WeightOf::Uniform(v),
            _ => return WeightOf::Mixed,
        };
    }
    w
}

/// All coprime `(p, q)` up to `bound` with a common weight degree `m ≥ 0`.
pub fn detect_quasi_homogeneity<S: VectorField + ?Sized>(s: &S, bound: u32) -> Vec<QHSignature> {
    let mut out = Vec::new();
    if s.p().is_zero() && s.q().is_zero() {
        return out;
    }
    for p in 1..=bound {
        for q in 1..=bound {
            if p.gcd(&q) != 1 {
                continue;
            }
            let mp = match weight_of(s.p(), p, q) {
                WeightOf::Mixed => continue,
                WeightOf::Empty => None,
                WeightOf::Uniform(w) => Some(w - (p as i64 - 1)),
            };
            let mq = match weight_of(s.q(), p, q) {
                WeightOf::Mixed => continue,
                WeightOf::Empty => None,
                WeightOf::Uniform(w) => Some(w - (q as i64 - 1)),
            };
            let m = match (mp, mq) {
                (Some(a), Some(b)) if a == b => a,
                (Some(a), None) | (None, Some(a)) => a,
                _ => continue,
            };
            if m >= 0 {
                out.push(QHSignature { p, q, m: m as u32 });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// (p,q)-trigonometric functions

/// `τ = 2·p^{−1/(2q)}·q^{−1/(2p)}·Γ(1/(2p))Γ(1/(2q))/Γ(1/(2p)+1/(2q))`.
pub fn pq_period(p: u32, q: u32) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    let a = 1.0 / (2.0 * pf);
    let b = 1.0 / (2.0 * qf);
    2.0 * pf.powf(-b) * qf.powf(-a) * gamma(a) * gamma(b) / gamma(a + b)
}

fn trig_rhs(p: u32, q: u32) -> impl Fn(f64, State) -> State {
    let (ep, eq) = (2 * p as i32 - 1, 2 * q as i32 - 1);
    move |_, z| [-z[1].powi(ep), z[0].powi(eq)]
}

pub fn trig_options() -> OdeOptions {
    OdeOptions { rtol: 1e-14, atol: 1e-16, ..Default::default() }
}

/// `(Cs θ, Sn θ)` from `ż = −w^{2p−1}, ẇ = z^{2q−1}`, `z(0) = p^{−1/(2q)}, w(0) = 0`.
pub fn pq_trig(p: u32, q: u32, theta: f64) -> Result<(f64, f64), NumericError> {
    let z0 = [(p as f64).powf(-1.0 / (2.0 * q as f64)), 0.0];
    if theta == 0.0 {
        return Ok((z0[0], z0[1]));
    }
    if p == 1 && q == 1 {
        return Ok((theta.cos(), theta.sin()));
    }
    let tau = pq_period(p, q);
    let th = theta.rem_euclid(tau);
    let mut st = Dopri5::new(trig_rhs(p, q), 0.0, z0, 1.0, trig_options());
    while st.t() != th {
        st.step(th)?;
    }
    let z = st.y();
    Ok((z[0], z[1]))
}

/// `(Cs, Sn)` tabulated on a uniform grid of one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PQCircle {
    pub p: u32,
    pub q: u32,
    pub tau: f64,
    /// `(θ, Cs θ, Sn θ)` at `θ = kτ/n`, `k = 0..n`.
    pub samples: Vec<(f64, f64, f64)>,
    /// Largest `|p·Cs^{2q} + q·Sn^{2p} − 1|` over the samples.
    pub tolerance: f64,
}

impl PQCircle {
    /// Integrates one period, landing the stepper exactly on each grid node.
    pub fn new(p: u32, q: u32, n: usize) -> Result<Self, NumericError> {
        let tau = pq_period(p, q);
        let mut samples = Vec::with_capacity(n);
        if p == 1 && q == 1 {
            for k in 0..n {
                let th = tau * k as f64 / n as f64;
                samples.push((th, th.cos(), th.sin()));
            }
        } else {
            let z0 = [(p as f64).powf(-1.0 / (2.0 * q as f64)), 0.0];
            let mut st = Dopri5::new(trig_rhs(p, q), 0.0, z0, 1.0, trig_options());
            samples.push((0.0, z0[0], z0[1]));
            for k in 1..n {
                let th = tau * k as f64 / n as f64;
                while st.t() != th {
                    st.step(th)?;
                }
                let z = st.y();
                samples.push((th, z[0], z[1]));
            }
        }
        let tolerance = samples.iter().map(|&(_, c, s)| identity_defect(p, q, c, s)).fold(0.0, f64::max);
        Ok(PQCircle { p, q, tau, samples, tolerance })
    }
}

/// `|p·Cs^{2q} + q·Sn^{2p} − 1|`.
pub fn identity_defect(p: u32, q: u32, cs: f64, sn: f64) -> f64 {
    (p as f64 * cs.powi(2 * q as i32) + q as f64 * sn.powi(2 * p as i32) - 1.0).abs()
}

// ---------------------------------------------------------------------------
// conditions

fn numeric_parts<S: VectorField + ?Sized>(s: &S, sig: &QHSignature) -> Result<(Poly2, Poly2), QhError> {
    let free = s.free_symbols();
    if !free.is_empty() {
        return Err(QhError::Symbolic(free));
    }
    if !sig.holds_for(s) {
        return Err(QhError::WrongSignature { p: sig.p, q: sig.q });
    }
    let g = gcd(s.p(), s.q());
    if g.xy_degree() > 0 {
        return Err(QhError::NotCoprime(g.to_text()));
    }
    let p = Poly2::from_mpoly(s.p()).map_err(QhError::Numeric)?;
    let q = Poly2::from_mpoly(s.q()).map_err(QhError::Numeric)?;
    Ok((p, q))
}

/// `W = p·x·Q − q·y·P`.
pub fn weighted_form<S: VectorField + ?Sized>(s: &S, sig: &QHSignature) -> MPoly {
    let vars = s.p().vars();
    let x = MPoly::var(vars, X);
    let y = MPoly::var(vars, Y);
    let a = (&x * s.q()).scale(&Q::from_integer(sig.p.into()));
    let b = (&y * s.p()).scale(&Q::from_integer(sig.q.into()));
    &a - &b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionIMethod {
    /// Substitution `y² = t` and Sturm counting on `t ≥ 0`.
    ExactEven,
    /// Grid over one period with a Lipschitz bound between nodes.
    GridLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConditionI {
    Holds { sign: i8, method: ConditionIMethod },
    Fails { window: (f64, f64), method: ConditionIMethod },
}

impl ConditionI {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionI::Holds { .. })
    }
}

/// `W(±1, y)` as a polynomial in `t = y²` when every exponent is even.
fn even_reduction(w: &MPoly) -> Option<(UPoly, Q)> {
    if w.terms().any(|(m, _)| m.exp(X) % 2 == 1 || m.exp(Y) % 2 == 1) {
        return None;
    }
    let top = w.terms().map(|(m, _)| m.exp(Y) / 2).max()? as usize;
    let mut c = vec![Q::zero(); top + 1];
    let mut pure_y = Q::zero();
    for (m, v) in w.terms() {
        c[(m.exp(Y) / 2) as usize] += v;
        if m.exp(X) == 0 {
            pure_y += v;
        }
    }
    Some((UPoly::new(c), pure_y))
}

fn sgn(v: &Q) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// `W` has no real factor vanishing on the weighted circle: `G(θ)` keeps one sign.
pub fn condition_i_no_real_factors<S: VectorField + ?Sized>(s: &S, sig: &QHSignature) -> Result<ConditionI, QhError> {
    condition_i_with(s, sig, ExecPolicy::default())
}

pub fn condition_i_with<S: VectorField + ?Sized>(s: &S, sig: &QHSignature, policy: ExecPolicy) -> Result<ConditionI, QhError> {
    let (pp, qq) = numeric_parts(s, sig)?;
    let w = weighted_form(s, sig);
    if let Some((f, pure_y)) = even_reduction(&w) {
        // on x = ±1 the form is f(y²); the axis x = 0 is the pure y-power
        let f0 = f.coeffs().first().cloned().unwrap_or_else(Q::zero);
        let positive_roots = f.count_roots(Some(&Q::zero()), None);
        let method = ConditionIMethod::ExactEven;
        let (s0, sy) = (sgn(&f0), sgn(&pure_y));
        if s0 != 0 && s0 == sy && positive_roots == 0 {
            return Ok(ConditionI::Holds { sign: s0, method });
        }
        let window = witness_window(&pp, &qq, sig, policy)?.unwrap_or((0.0, pq_period(sig.p, sig.q)));
        return Ok(ConditionI::Fails { window, method });
    }
    match witness_window(&pp, &qq, sig, policy)? {
        Some(window) => Ok(ConditionI::Fails { window, method: ConditionIMethod::GridLipschitz }),
        None => {
            let c = PQCircle::new(sig.p, sig.q, 8)?;
            let (_, cs, sn) = c.samples[0];
            let g = big_g(&pp, &qq, sig, cs, sn);
            Ok(ConditionI::Holds { sign: if g > 0.0 { 1 } else { -1 }, method: ConditionIMethod::GridLipschitz })
        }
    }
}

fn big_g(p: &Poly2, q: &Poly2, sig: &QHSignature, cs: f64, sn: f64) -> f64 {
    sig.p as f64 * cs * q.eval(cs, sn) - sig.q as f64 * sn * p.eval(cs, sn)
}

fn big_f(p: &Poly2, q: &Poly2, sig: &QHSignature, cs: f64, sn: f64) -> f64 {
    cs.powi(2 * sig.q as i32 - 1) * p.eval(cs, sn) + sn.powi(2 * sig.p as i32 - 1) * q.eval(cs, sn)
}

/// Bound on `|dG/dθ|` from coefficient magnitudes on the box `|Cs| ≤ c, |Sn| ≤ s`.
fn lipschitz_bound(p: &Poly2, q: &Poly2, sig: &QHSignature) -> f64 {
    let c = (sig.p as f64).powf(-1.0 / (2.0 * sig.q as f64)) * (1.0 + 1e-9);
    let s = (sig.q as f64).powf(-1.0 / (2.0 * sig.p as f64)) * (1.0 + 1e-9);
    // G = Σ g_ij x^i y^j
    let mut terms: Vec<(f64, i32, i32)> = Vec::new();
    for &(a, i, j) in &q.terms {
        terms.push((sig.p as f64 * a, i + 1, j));
    }
    for &(a, i, j) in &p.terms {
        terms.push((-(sig.q as f64) * a, i, j + 1));
    }
    let pw = |b: f64, e: i32| if e <= 0 { 1.0 } else { b.powi(e) };
    let gx: f64 = terms.iter().map(|&(a, i, j)| a.abs() * i as f64 * pw(c, i - 1) * pw(s, j)).sum();
    let gy: f64 = terms.iter().map(|&(a, i, j)| a.abs() * j as f64 * pw(c, i) * pw(s, j - 1)).sum();
    gx * pw(s, 2 * sig.p as i32 - 1) + gy * pw(c, 2 * sig.q as i32 - 1)
}

/// Window where `G` changes sign or cannot be separated from zero; `None` when
/// a single sign is certified over the whole period.
fn witness_window(p: &Poly2, q: &Poly2, sig: &QHSignature, policy: ExecPolicy) -> Result<Option<(f64, f64)>, QhError> {
    const N: usize = 1024;
    let circle = PQCircle::new(sig.p, sig.q, N)?;
    let l = lipschitz_bound(p, q, sig);
    let vals: Vec<f64> = circle.samples.iter().map(|&(_, c, s)| big_g(p, q, sig, c, s)).collect();
    let h = circle.tau / N as f64;
    let intervals: Vec<usize> = (0..N).collect();
    let (pi, qi) = (sig.p, sig.q);
    let results = policy.map(&intervals, |&k| {
        let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
        let ga = vals[k];
        let gb = vals[(k + 1) % N];
        certify(p, q, sig, (a, ga), (b, gb), l, pi, qi, 0)
    });
    for (k, r) in results.into_iter().enumerate() {
        match r? {
            Cert::Sign(sg) if sg == vals[0].signum() => {}
            Cert::Sign(_) => return Ok(Some((k as f64 * h, (k + 1) as f64 * h))),
            Cert::Zero(w) => return Ok(Some(w)),
        }
    }
    Ok(None)
}

enum Cert {
    Sign(f64),
    Zero((f64, f64)),
}

#[allow(clippy::too_many_arguments)]
fn certify(
    p: &Poly2,
    q: &Poly2,
    sig: &QHSignature,
    (a, ga): (f64, f64),
    (b, gb): (f64, f64),
    l: f64,
    pi: u32,
    qi: u32,
    depth: u32,
) -> Result<Cert, QhError> {
    if ga == 0.0 || gb == 0.0 || ga.signum() != gb.signum() {
        return Ok(Cert::Zero((a, b)));
    }
    if ga.abs().min(gb.abs()) > l * (b - a) / 2.0 + 1e-12 {
        return Ok(Cert::Sign(ga.signum()));
    }
    if depth >= 30 || b - a < 1e-10 {
        return Ok(Cert::Zero((a, b)));
    }
    let m = 0.5 * (a + b);
    let (cs, sn) = pq_trig(pi, qi, m)?;
    let gm = big_g(p, q, sig, cs, sn);
    match certify(p, q, sig, (a, ga), (m, gm), l, pi, qi, depth + 1)? {
        Cert::Sign(s1) => match certify(p, q, sig, (m, gm), (b, gb), l, pi, qi, depth + 1)? {
            Cert::Sign(s2) if s2 == s1 => Ok(Cert::Sign(s1)),
            Cert::Sign(_) => Ok(Cert::Zero((a, b))),
            z => Ok(z),
        },
        z => Ok(z),
    }
}

/// `∫ F/G dθ` over one period with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub period: f64,
    pub nodes: usize,
}

impl Quadrature {
    /// Zero at the tolerance `max(1e-8, 1e3·error)`.
    pub fn is_zero(&self) -> bool {
        self.value.abs() <= self.zero_tolerance()
    }

    pub fn zero_tolerance(&self) -> f64 {
        (1e3 * self.error).max(1e-8)
    }
}

/// Periodic trapezoidal rule with node doubling until successive values agree.
pub fn condition_ii_integral<S: VectorField + ?Sized>(s: &S, sig: &QHSignature) -> Result<Quadrature, QhError> {
    let (pp, qq) = numeric_parts(s, sig)?;
    if let ConditionI::Fails { window, .. } = condition_i_no_real_factors(s, sig)? {
        return Err(QhError::ConditionIFails(window.0, window.1));
    }
    let tau = pq_period(sig.p, sig.q);
    let integrand = |cs: f64, sn: f64| big_f(&pp, &qq, sig, cs, sn) / big_g(&pp, &qq, sig, cs, sn);
    let sum = |c: &PQCircle| c.samples.iter().map(|&(_, cs, sn)| integrand(cs, sn)).sum::<f64>() * c.tau / c.samples.len() as f64;
    let mut n = 64;
    let mut prev = sum(&PQCircle::new(sig.p, sig.q, n)?);
    loop {
        n *= 2;
        let cur = sum(&PQCircle::new(sig.p, sig.q, n)?);
        let err = (cur - prev).abs();
        if err <= 1e-13 * (1.0 + cur.abs()) || n >= 1 << 16 {
            return Ok(Quadrature { value: cur, error: err.max(f64::EPSILON * cur.abs()), period: tau, nodes: n });
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum QhVerdict {
    Center,
    Focus,
    Undecided { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QhReport {
    pub signature: QHSignature,
    pub condition_i: ConditionI,
    pub integral: Option<Quadrature>,
    pub verdict: QhVerdict,
    /// Both conditions are exact statements; the integral here is numeric.
    pub numeric: bool,
}

pub fn classify_qh_center<S: VectorField + ?Sized>(s: &S, sig: &QHSignature) -> Result<QhReport, QhError> {
    let ci = condition_i_no_real_factors(s, sig)?;
    if !ci.holds() {
        return Ok(QhReport {
            signature: *sig,
            condition_i: ci,
            integral: None,
            verdict: QhVerdict::Undecided { reason: "condition (i) fails: not monodromic by this criterion".into() },
            numeric: false,
        });
    }
    let quad = condition_ii_integral(s, sig)?;
    let verdict = if quad.is_zero() {
        if quad.error <= 1e-10 {
            QhVerdict::Center
        } else {
            QhVerdict::Undecided { reason: format!("integral {:e} within tolerance but quadrature error {:e} too large", quad.value, quad.error) }
        }
    } else {
        QhVerdict::Focus
    };
    Ok(QhReport { signature: *sig, condition_i: ci, integral: Some(quad), verdict, numeric: true })
}

/// Signature with the smallest `p + q` among those found up to `bound`.
pub fn preferred_signature<S: VectorField + ?Sized>(s: &S, bound: u32) -> Option<QHSignature> {
    detect_quasi_homogeneity(s, bound).into_iter().min_by_key(|g| (g.p + g.q, g.p))
}
