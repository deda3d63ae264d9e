//! Poincaré–Liapunov engine: degree-by-degree homological solves producing the
//! formal first-integral jets `H_n` and the Liapunov constants.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{bareiss_gauss_jordan, q, AlgError, BareissResult, MPoly, RatFunc, Vars, EPS, X, Y};
use crate::exec::ExecPolicy;
use crate::systems::{LinearClass, LinearPart, PlaneSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiapunovError {
    #[error("linear class {0} is not supported by the engine (expected linear_type, perturbed_nilpotent or perturbed_degenerate)")]
    WrongClass(LinearClass),
    #[error("max even degree must be an even number >= 4, got {0}")]
    BadDegree(u32),
    #[error("homological matrix at degree {0} is identically singular")]
    Singular(u32),
    #[error("residual is not homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// Normalization choices the constants depend on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convention {
    /// Quadratic seed of the formal integral.
    pub h2: String,
    /// Overall factor applied to the seed (the engine uses 1, not 1/2).
    pub h2_scale: String,
    pub corrective_term: String,
    pub kernel_rule: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiapunovConstant {
    /// Formal index: the constant arises at degree `2k + 2`.
    pub k: u32,
    pub degree: u32,
    pub value: RatFunc,
}

#[derive(Debug, Clone)]
pub struct LiapunovReport {
    pub convention: Convention,
    pub class: LinearClass,
    pub max_even_degree: u32,
    /// `(n, H_n)` for `2 <= n <= max_even_degree`.
    pub h_table: Vec<(u32, RatFunc)>,
    pub constants: Vec<LiapunovConstant>,
    pub side_conditions: Vec<MPoly>,
    pub warnings: Vec<String>,
}

impl LiapunovReport {
    pub fn vars(&self) -> &Vars {
        self.h_table[0].1.vars()
    }

    pub fn constant_at(&self, degree: u32) -> Option<&RatFunc> {
        self.constants.iter().find(|c| c.degree == degree).map(|c| &c.value)
    }

    /// Nonzero constants in degree order.
    pub fn nonzero(&self) -> impl Iterator<Item = &LiapunovConstant> {
        self.constants.iter().filter(|c| !c.value.is_zero())
    }

    pub fn all_vanish(&self) -> bool {
        self.constants.iter().all(|c| c.value.is_zero())
    }

    /// `Σ H_n` over the common denominator.
    pub fn h_sum(&self) -> RatFunc {
        let mut s = RatFunc::zero(self.vars());
        for (_, h) in &self.h_table {
            s = &s + h;
        }
        s
    }
}

/// Homological operator `L(H) = H_x·a·y + H_y·b·x` on degree-n forms, with the
/// fraction-free inverse cached per degree.
pub struct HomologicalSolver {
    vars: Vars,
    a: MPoly,
    b: MPoly,
    cache: Mutex<HashMap<u32, BareissResult>>,
}

fn binom(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

fn xy_monomial(vars: &Vars, i: u32, j: u32) -> MPoly {
    let mut e = vec![0u32; vars.len()];
    e[X] = i;
    e[Y] = j;
    MPoly::monomial(vars, q(1), e)
}

/// `(x² + y²)^k`.
pub fn r2_power(vars: &Vars, k: u32) -> MPoly {
    let r2 = &xy_monomial(vars, 2, 0) + &xy_monomial(vars, 0, 2);
    r2.pow(k)
}

impl HomologicalSolver {
    pub fn new(vars: &Vars, linear: &LinearPart) -> Self {
        HomologicalSolver {
            vars: vars.clone(),
            a: linear.a.lift(vars).expect("linear part table"),
            b: linear.b.lift(vars).expect("linear part table"),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Unknown count: `n + 1` coefficients for odd `n`; for even `n` the `y^n`
    /// coefficient is fixed to zero and `V` takes its place.
    fn matrix(&self, n: u32) -> Vec<Vec<MPoly>> {
        let z = MPoly::zero(&self.vars);
        let size = (n + 1) as usize;
        let mut m = vec![vec![z.clone(); size]; size];
        let ncoef = if n.is_multiple_of(2) { n } else { n + 1 };
        for j in 0..ncoef {
            // L(x^(n-j) y^j)
            if n - j > 0 {
                m[(j + 1) as usize][j as usize] = self.a.scale(&q((n - j) as i64));
            }
            if j > 0 {
                m[(j - 1) as usize][j as usize] = self.b.scale(&q(j as i64));
            }
        }
        if n.is_multiple_of(2) {
            for i in (0..=n).step_by(2) {
                m[i as usize][n as usize] = MPoly::int(&self.vars, -binom(n / 2, i / 2));
            }
        }
        m
    }

    fn inverse(&self, n: u32) -> Result<BareissResult, LiapunovError> {
        if let Some(r) = self.cache.lock().unwrap().get(&n) {
            return Ok(r.clone());
        }
        let m = self.matrix(n);
        let size = m.len();
        let id: Vec<Vec<MPoly>> = (0..size)
            .map(|i| (0..size).map(|j| if i == j { MPoly::one(&self.vars) } else { MPoly::zero(&self.vars) }).collect())
            .collect();
        let r = bareiss_gauss_jordan(&m, &id).map_err(|e| match e {
            AlgError::Singular => LiapunovError::Singular(n),
            e => LiapunovError::Alg(e),
        })?;
        self.cache.lock().unwrap().insert(n, r.clone());
        Ok(r)
    }

    /// Solves `L(H_n) = -R` (odd `n`) or `L(H_n) = -R + V·(x²+y²)^(n/2)` (even `n`).
    pub fn solve(&self, n: u32, residual: &RatFunc) -> Result<(RatFunc, Option<RatFunc>), LiapunovError> {
        let vars = &self.vars;
        let r = residual.lift(vars)?;
        if r.num().terms().any(|(m, _)| m.xy_degree() != n) {
            return Err(LiapunovError::NotHomogeneous(n));
        }
        let inv = self.inverse(n)?;
        // coefficient of x^(n-i) y^i in the numerator, as polynomials free of x, y
        let mut mask = vec![false; vars.len()];
        mask[X] = true;
        mask[Y] = true;
        let groups = r.num().group_by(&mask);
        let size = (n + 1) as usize;
        let mut rhs = vec![MPoly::zero(vars); size];
        for (key, c) in groups {
            rhs[key[Y] as usize] = -c;
        }
        let den = &inv.diag * r.den();
        let ncoef = if n.is_multiple_of(2) { n } else { n + 1 } as usize;
        let mut h = MPoly::zero(vars);
        let mut v = None;
        for (row, xrow) in inv.x.iter().enumerate() {
            let mut acc = MPoly::zero(vars);
            for (i, c) in rhs.iter().enumerate() {
                if !c.is_zero() && !xrow[i].is_zero() {
                    acc = &acc + &(&xrow[i] * c);
                }
            }
            if row < ncoef {
                h = &h + &(&acc * &xy_monomial(vars, n - row as u32, row as u32));
            } else {
                v = Some(RatFunc::new(acc, den.clone())?);
            }
        }
        Ok((RatFunc::new(h, den)?, v))
    }

    /// `L(H)` for a rational function whose denominator is free of x, y.
    pub fn apply(&self, h: &RatFunc) -> RatFunc {
        let ya = &xy_monomial(&self.vars, 0, 1) * &self.a;
        let xb = &xy_monomial(&self.vars, 1, 0) * &self.b;
        let n = &(&h.num().partial(X) * &ya) + &(&h.num().partial(Y) * &xb);
        RatFunc::new(n, h.den().clone()).expect("nonzero denominator")
    }
}

/// Quadratic seed `(-b/a)·x² + y²` for the linear part `(a·y, b·x)`.
pub fn seed_h2(vars: &Vars, linear: &LinearPart) -> Result<MPoly, LiapunovError> {
    let a = linear.a.lift(vars)?;
    let b = linear.b.lift(vars)?;
    // a = ca·eps^ea, b = cb·eps^eb with eb >= ea
    let (ma, ca) = a.leading().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero a");
    let (mb, cb) = b.leading().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero b");
    let shift = mb.exp(EPS) - ma.exp(EPS);
    let mut e = vec![0u32; vars.len()];
    e[X] = 2;
    e[EPS] = shift;
    Ok(&MPoly::monomial(vars, -(cb / ca), e) + &xy_monomial(vars, 0, 2))
}

fn convention_for(h2: &MPoly) -> Convention {
    Convention {
        h2: h2.to_text(),
        h2_scale: "1".into(),
        corrective_term: "(x^2+y^2)^(n/2)".into(),
        kernel_rule: "coefficient of y^n in H_n is zero for even n".into(),
    }
}

/// Computes `H_2..H_N` and the constants `V` at every even degree `4..=N`.
pub fn compute_liapunov_constants(s: &PlaneSystem, max_even_degree: u32) -> Result<LiapunovReport, LiapunovError> {
    compute_liapunov_constants_with(s, max_even_degree, ExecPolicy::default())
}

pub fn compute_liapunov_constants_with(
    s: &PlaneSystem,
    max_even_degree: u32,
    policy: ExecPolicy,
) -> Result<LiapunovReport, LiapunovError> {
    let class = s.linear_class();
    if !class.is_center_type() {
        return Err(LiapunovError::WrongClass(class));
    }
    if max_even_degree < 4 || max_even_degree % 2 == 1 {
        return Err(LiapunovError::BadDegree(max_even_degree));
    }
    let vars = s.vars().clone();
    let solver = HomologicalSolver::new(&vars, s.linear_part());
    let h2 = seed_h2(&vars, s.linear_part())?;
    let nmax = max_even_degree;
    let pd: Vec<MPoly> = (0..=nmax).map(|d| s.p().xy_part(d)).collect();
    let qd: Vec<MPoly> = (0..=nmax).map(|d| s.q().xy_part(d)).collect();
    let mut hs: Vec<RatFunc> = vec![RatFunc::zero(&vars), RatFunc::zero(&vars), RatFunc::from_poly(h2.clone())];
    let mut constants = Vec::new();
    for n in 3..=nmax {
        let ks: Vec<u32> = (2..n).collect();
        let pieces: Vec<RatFunc> = policy.map(&ks, |&k| {
            let h = &hs[k as usize];
            let d = (n + 1 - k) as usize;
            if pd[d].is_zero() && qd[d].is_zero() {
                return RatFunc::zero(&vars);
            }
            let num = &(&h.num().partial(X) * &pd[d]) + &(&h.num().partial(Y) * &qd[d]);
            RatFunc::new(num, h.den().clone()).expect("nonzero denominator")
        });
        let mut r = RatFunc::zero(&vars);
        for p in &pieces {
            r = &r + p;
        }
        let (h, v) = solver.solve(n, &r)?;
        hs.push(h);
        if let Some(v) = v {
            constants.push(LiapunovConstant { k: n / 2 - 1, degree: n, value: v });
        }
    }
    let mut warnings = vec![format!(
        "constants computed up to degree {nmax}; vanishing up to a truncation is not a proof of a center"
    )];
    if class == LinearClass::PerturbedDegenerate {
        warnings.push("degenerate perturbation: constants are Laurent in eps by construction".into());
    }
    Ok(LiapunovReport {
        convention: convention_for(&h2),
        class,
        max_even_degree: nmax,
        h_table: hs.into_iter().enumerate().skip(2).map(|(n, h)| (n as u32, h)).collect(),
        constants,
        side_conditions: vec![],
        warnings,
    })
}

/// Stand-alone homological step against the linear part of `linear`.
pub fn solve_homological_step(
    linear: &PlaneSystem,
    n: u32,
    residual: &RatFunc,
) -> Result<(RatFunc, Option<RatFunc>), LiapunovError> {
    if !linear.linear_class().is_center_type() {
        return Err(LiapunovError::WrongClass(linear.linear_class()));
    }
    let vars = crate::exactalg::VarTable::union(linear.vars(), residual.vars());
    let solver = HomologicalSolver::new(&vars, linear.linear_part());
    if n == 2 {
        return Ok((RatFunc::zero(&vars), None));
    }
    solver.solve(n, residual)
}

/// Terms of `Ḣ_{<=N} − Σ V·(x²+y²)^(n/2)` of degree at most `N`; empty when the
/// report is consistent with the system.
pub fn back_substitution_defect(s: &PlaneSystem, report: &LiapunovReport) -> RatFunc {
    let vars = report.vars().clone();
    let mut total = RatFunc::zero(&vars);
    for (_, h) in &report.h_table {
        let num = s.lie_derivative(h.num()).expect("compatible tables");
        total = &total + &RatFunc::new(num, h.den().clone()).unwrap();
    }
    for c in &report.constants {
        total = &total - &c.value.mul_poly(&r2_power(&vars, c.degree / 2));
    }
    let low = MPoly::from_terms(
        &vars,
        total.num().terms().filter(|(m, _)| m.xy_degree() <= report.max_even_degree).map(|(m, c)| (m.clone(), c.clone())),
    );
    RatFunc::new(low, total.den().clone()).unwrap()
}

/// Number of constants not implied by explicit eliminations solved from the
/// earlier ones; flagged undetermined when an earlier constant resists elimination.
pub fn count_independent_constants(report: &LiapunovReport) -> crate::perturb::IndependenceCount {
    crate::perturb::count_independent(report)
}
