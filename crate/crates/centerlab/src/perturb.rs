//! ε-perturbation families, extraction of center conditions from Liapunov
//! constants by ε-order, and the vanishing-singularity hypothesis check.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{
    gcd_many, laurent_expand_eps, q, AlgError, MPoly, RatFunc, Role, VarTable, Vars, EPS, Q, X, Y,
};
use crate::exec::ExecPolicy;
use crate::liapunov::LiapunovReport;
use crate::numeric::{singular_points, Field, NumericError};
use crate::systems::{LinearClass, PlaneSystem, SystemError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("perturbation kind {kind} needs a {expected} base system, got {found}")]
    ClassMismatch { kind: &'static str, expected: LinearClass, found: LinearClass },
    #[error("invalid perturbation: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Nilpotent,
    Degenerate,
    Hamiltonian,
}

impl PerturbationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PerturbationKind::Nilpotent => "nilpotent",
            PerturbationKind::Degenerate => "degenerate",
            PerturbationKind::Hamiltonian => "hamiltonian",
        }
    }
}

/// Direction of the linear rotation added by the degenerate kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `(εy, −εx)`
    #[default]
    Clockwise,
    /// `(−εy, εx)`
    CounterClockwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub g1: MPoly,
    pub g2: MPoly,
    pub orientation: Orientation,
}

fn template_name(prefix: &str, i: u32, j: u32) -> String {
    if i < 10 && j < 10 {
        format!("{prefix}{i}{j}")
    } else {
        format!("{prefix}{i}_{j}")
    }
}

impl PerturbationSpec {
    /// `G1 = G2 = 0`.
    pub fn minimal(kind: PerturbationKind) -> Self {
        let vars = VarTable::new::<&str>(&[]);
        PerturbationSpec { kind, g1: MPoly::zero(&vars), g2: MPoly::zero(&vars), orientation: Orientation::default() }
    }

    pub fn new(kind: PerturbationKind, g1: MPoly, g2: MPoly) -> Self {
        PerturbationSpec { kind, g1, g2, orientation: Orientation::default() }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    /// General template up to degree `d`: `G1 = Σ a_ij x^i y^j`, `G2 = Σ b_ij x^i y^j`
    /// with fresh perturbation parameters, `1 <= i+j` for the nilpotent kind and
    /// `2 <= i+j` for the degenerate kind. Prefixes avoid names already used by `base`.
    pub fn general(kind: PerturbationKind, d: u32, base: &PlaneSystem) -> Self {
        let lo = match kind {
            PerturbationKind::Nilpotent => 1,
            _ => 2,
        };
        let taken = base.vars().params();
        let pairs = [("a", "b"), ("g", "h"), ("u", "v"), ("pa", "pb")];
        let mut chosen = pairs[pairs.len() - 1];
        for pr in pairs {
            let clash = (lo..=d).any(|t| (0..=t).any(|i| taken.contains(&template_name(pr.0, i, t - i)) || taken.contains(&template_name(pr.1, i, t - i))));
            if !clash {
                chosen = pr;
                break;
            }
        }
        let mut names = Vec::new();
        for t in lo..=d {
            for i in (0..=t).rev() {
                names.push((template_name(chosen.0, i, t - i), i, t - i, 1));
                names.push((template_name(chosen.1, i, t - i), i, t - i, 2));
            }
        }
        let vars = VarTable::with_roles(names.iter().map(|(n, ..)| (n.clone(), Role::PerturbationParameter)));
        let mut g1 = MPoly::zero(&vars);
        let mut g2 = MPoly::zero(&vars);
        for (n, i, j, which) in &names {
            let mut e = vec![0u32; vars.len()];
            e[X] = *i;
            e[Y] = *j;
            e[vars.index(n).unwrap()] = 1;
            let m = MPoly::monomial(&vars, q(1), e);
            if *which == 1 {
                g1 = &g1 + &m;
            } else {
                g2 = &g2 + &m;
            }
        }
        PerturbationSpec { kind, g1, g2, orientation: Orientation::default() }
    }

    pub fn is_minimal(&self) -> bool {
        self.g1.is_zero() && self.g2.is_zero()
    }
}

/// Adds the perturbation of `spec` to `s`.
pub fn build_perturbation(s: &PlaneSystem, spec: &PerturbationSpec) -> Result<PlaneSystem, PerturbError> {
    let expected = match spec.kind {
        PerturbationKind::Nilpotent => LinearClass::Nilpotent,
        _ => LinearClass::Degenerate,
    };
    if s.linear_class() != expected {
        return Err(PerturbError::ClassMismatch { kind: spec.kind.as_str(), expected, found: s.linear_class() });
    }
    let low = |g: &MPoly, d: u32| (0..d).all(|k| g.xy_part(k).is_zero());
    match spec.kind {
        PerturbationKind::Nilpotent if !(low(&spec.g1, 1) && low(&spec.g2, 1)) => {
            return Err(PerturbError::InvalidSpec("G1, G2 must have no constant term".into()))
        }
        PerturbationKind::Degenerate if !(low(&spec.g1, 2) && low(&spec.g2, 2)) => {
            return Err(PerturbError::InvalidSpec("G1, G2 must have no constant or linear terms".into()))
        }
        PerturbationKind::Hamiltonian if !spec.is_minimal() => {
            return Err(PerturbError::InvalidSpec("the hamiltonian kind takes G1 = G2 = 0".into()))
        }
        _ => {}
    }
    let vars = VarTable::union(&VarTable::union(s.vars(), spec.g1.vars()), spec.g2.vars());
    let base = s.lift(&vars)?;
    let g1 = spec.g1.lift(&vars)?;
    let g2 = spec.g2.lift(&vars)?;
    let x = MPoly::var(&vars, X);
    let y = MPoly::var(&vars, Y);
    let e = MPoly::var(&vars, EPS);
    let ex = &e * &x;
    let ey = &e * &y;
    let (dp, dq) = match spec.kind {
        PerturbationKind::Nilpotent => {
            // the base linear part is c·y; the added term is −c·εx
            let c = base.linear_part().a.clone();
            (&ex * &g1, &(&ex * &g2) - &(&c * &ex))
        }
        PerturbationKind::Degenerate => {
            let (a, b) = match spec.orientation {
                Orientation::Clockwise => (ey.clone(), -&ex),
                Orientation::CounterClockwise => (-&ey, ex.clone()),
            };
            (&a + &(&e * &g1), &b + &(&e * &g2))
        }
        PerturbationKind::Hamiltonian => (-&ey, ex.clone()),
    };
    let out = PlaneSystem::with_assumptions(base.p() + &dp, base.q() + &dq, base.assumptions().to_vec())?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// center conditions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    AllOrders,
    FirstOrder,
}

/// Which parameters a condition involves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// Base parameters only: a necessary center condition.
    Base,
    /// Perturbation parameters only: solvable by perturbation choice.
    Perturbation,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub degree: u32,
    pub eps_order: i64,
    /// Primitive polynomial in the parameters, reduced by every earlier solution.
    pub poly: MPoly,
    pub kind: ConditionKind,
    /// Parameter eliminated with this condition, if any.
    pub solved_for: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchChoice {
    /// The common factor is assumed nonzero, so every cofactor must vanish.
    CommonFactorNonzero { factor: MPoly, cofactors: Vec<MPoly> },
    FactorZero(MPoly),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub degree: u32,
    pub choice: BranchChoice,
}

#[derive(Debug, Clone)]
pub struct CenterConditions {
    pub mode: ConditionMode,
    pub conditions: Vec<Condition>,
    pub side_conditions: Vec<MPoly>,
    /// Accumulated eliminations `name = value`, each free of eliminated names.
    pub substitution: Vec<(String, RatFunc)>,
    pub branches: Vec<Branch>,
    /// Every constant of the report vanishes under the substitution.
    pub all_vanish: bool,
    pub warnings: Vec<String>,
}

impl CenterConditions {
    /// Conditions that constrain the base system.
    pub fn base_conditions(&self) -> Vec<&MPoly> {
        self.conditions.iter().filter(|c| c.kind == ConditionKind::Base).map(|c| &c.poly).collect()
    }

    pub fn perturbation_conditions(&self) -> Vec<&MPoly> {
        self.conditions.iter().filter(|c| c.kind != ConditionKind::Base).map(|c| &c.poly).collect()
    }

    pub fn value_of(&self, name: &str) -> Option<&RatFunc> {
        self.substitution.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Applies the accumulated substitution.
    pub fn reduce(&self, f: &RatFunc) -> Result<RatFunc, AlgError> {
        let mut f = f.clone();
        for (n, v) in &self.substitution {
            if let Some(i) = f.vars().index(n) {
                f = f.substitute(i, &v.lift(f.vars())?);
            }
        }
        Ok(f)
    }
}

fn kind_of(p: &MPoly) -> ConditionKind {
    let vars = p.vars();
    let roles: Vec<Role> = p.used_vars().into_iter().map(|i| vars.role(i)).collect();
    let pert = roles.contains(&Role::PerturbationParameter);
    let base = roles.contains(&Role::Parameter);
    match (base, pert) {
        (true, true) => ConditionKind::Mixed,
        (false, true) => ConditionKind::Perturbation,
        _ => ConditionKind::Base,
    }
}

/// A linear elimination `var = value`, with the coefficient that must be nonzero.
struct Solution {
    var: usize,
    value: RatFunc,
    side: Option<MPoly>,
}

/// Picks a parameter that occurs linearly. Preference: perturbation parameter
/// with constant coefficient, then base parameter with constant coefficient,
/// then perturbation parameter with a non-constant coefficient.
fn try_solve(p: &MPoly) -> Option<Solution> {
    let vars = p.vars();
    let mut best: Option<(u8, usize, MPoly, MPoly)> = None;
    for i in p.used_vars() {
        if i <= EPS || p.degree_in(i) != 1 {
            continue;
        }
        let cs = p.coeffs_in(i);
        let (rest, coef) = (cs[0].clone(), cs[1].clone());
        let role = vars.role(i);
        let rank = match (role, coef.is_constant()) {
            (Role::PerturbationParameter, true) => 0,
            (Role::Parameter, true) => 1,
            (Role::PerturbationParameter, false) if !coef.uses(EPS) => 2,
            _ => continue,
        };
        if best.as_ref().map(|b| rank < b.0).unwrap_or(true) {
            best = Some((rank, i, rest, coef));
        }
    }
    let (rank, var, rest, coef) = best?;
    let side = if rank == 2 { Some(coef.primitive_part()) } else { None };
    let value = RatFunc::new(-rest, coef).ok()?;
    Some(Solution { var, value, side })
}

#[derive(Clone)]
struct State {
    vars: Vars,
    subs: Vec<(usize, RatFunc)>,
    out: Vec<Condition>,
    sides: Vec<MPoly>,
    branches: Vec<Branch>,
    notes: Vec<String>,
}

impl State {
    fn apply(&self, f: &RatFunc) -> RatFunc {
        let mut f = f.clone();
        for (i, v) in &self.subs {
            f = f.substitute(*i, v);
        }
        f
    }

    fn apply_poly(&self, p: &MPoly) -> MPoly {
        let r = self.apply(&RatFunc::from_poly(p.clone()));
        if r.is_zero() {
            r.num().clone()
        } else {
            r.num().primitive_part()
        }
    }

    fn bind(&mut self, s: Solution) {
        let Solution { var, value, side } = s;
        for (_, v) in self.subs.iter_mut() {
            *v = v.substitute(var, &value);
        }
        if let Some(sd) = side {
            self.push_side(sd);
        }
        self.subs.push((var, value));
    }

    fn push_side(&mut self, p: MPoly) {
        let p = self.apply_poly(&p);
        if !p.is_constant() && !self.sides.contains(&p) {
            self.sides.push(p);
        }
    }

    fn emit(&mut self, degree: u32, eps_order: i64, poly: MPoly) -> usize {
        let kind = kind_of(&poly);
        self.out.push(Condition { degree, eps_order, poly, kind, solved_for: None });
        self.out.len() - 1
    }
}

struct Extractor<'a> {
    constants: Vec<(u32, &'a RatFunc)>,
}

/// `(eps order, polynomial condition, side condition)` for a constant.
fn raw_conditions(v: &RatFunc, mode: ConditionMode) -> Result<Vec<(i64, MPoly, Option<MPoly>)>, AlgError> {
    let val = |p: &MPoly| p.terms().map(|(m, _)| m.exp(EPS)).min().unwrap_or(0) as i64;
    match mode {
        ConditionMode::AllOrders => {
            let shift = val(v.den());
            Ok(v.num()
                .coeffs_in(EPS)
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j as i64 - shift, c.primitive_part(), None))
                .collect())
        }
        ConditionMode::FirstOrder => {
            let lowest = val(v.num()) - val(v.den());
            let exp = laurent_expand_eps(v, lowest + 1)?;
            Ok(exp
                .nonzero()
                .map(|(j, c)| (*j, c.num().primitive_part(), exp.side_condition.clone()))
                .collect())
        }
    }
}

impl Extractor<'_> {
    fn later_vanish(&self, st: &State, k: usize) -> bool {
        self.constants[k + 1..].iter().all(|(_, v)| st.apply(v).is_zero())
    }

    /// Solves what can be solved directly and returns what is left.
    fn simplify(&self, st: &mut State, open: Vec<(Option<usize>, MPoly)>) -> Vec<(Option<usize>, MPoly)> {
        let mut open = open;
        loop {
            let mut progress = false;
            let mut next = Vec::new();
            for (idx, p) in open {
                let p = st.apply_poly(&p);
                if p.is_zero() {
                    continue;
                }
                if let Some(sol) = try_solve(&p) {
                    if let Some(i) = idx {
                        st.out[i].solved_for = Some(st.vars.name(sol.var).to_string());
                    }
                    st.bind(sol);
                    progress = true;
                } else {
                    next.push((idx, p));
                }
            }
            open = next;
            if !progress {
                return open;
            }
        }
    }

    fn resolve(&self, st: &mut State, open: Vec<(Option<usize>, MPoly)>, k: usize, depth: usize) -> bool {
        let open = self.simplify(st, open);
        if open.is_empty() {
            return true;
        }
        if depth > 12 {
            return false;
        }
        let polys: Vec<MPoly> = open.iter().map(|(_, p)| p.clone()).collect();
        let g = gcd_many(polys.iter()).expect("nonempty");
        let (g, cofactor_branch) = if g.is_constant() { (polys[0].clone(), false) } else { (g, polys.len() > 1) };
        let mut choices = Vec::new();
        if cofactor_branch {
            let cof: Vec<MPoly> = polys.iter().map(|p| p.div_exact(&g).expect("gcd divides")).collect();
            if cof.iter().all(|c| !c.is_constant()) {
                choices.push(BranchChoice::CommonFactorNonzero { factor: g.clone(), cofactors: cof });
            }
        }
        let mono = g.monomial_content();
        let rest = g.div_exact(&MPoly::monomial(&st.vars, q(1), mono.exps().to_vec())).expect("monomial divides");
        if !rest.is_constant() {
            choices.push(BranchChoice::FactorZero(rest.primitive_part()));
        }
        // monomial factors: branches that leave later constants alive go first
        let mut monos: Vec<(bool, usize)> = Vec::new();
        for (i, &e) in mono.exps().iter().enumerate() {
            if e > 0 {
                let mut t = st.clone();
                t.bind(Solution { var: i, value: RatFunc::zero(&st.vars), side: None });
                monos.push((self.later_vanish(&t, k), i));
            }
        }
        monos.sort();
        for (_, i) in monos {
            choices.push(BranchChoice::FactorZero(MPoly::var(&st.vars, i)));
        }
        let degree = self.constants[k].0;
        for choice in choices {
            let mut t = st.clone();
            let new_open: Vec<(Option<usize>, MPoly)> = match &choice {
                BranchChoice::CommonFactorNonzero { factor, cofactors } => {
                    t.push_side(factor.clone());
                    cofactors.iter().map(|c| (None, c.clone())).collect()
                }
                BranchChoice::FactorZero(f) => {
                    if try_solve(f).is_none() {
                        continue;
                    }
                    for sd in &st.sides {
                        if sd.div_exact(f).is_some() {
                            t.notes.push(format!(
                                "branch {} = 0 at degree {degree} contradicts side condition {} != 0: this perturbation cannot realize a center on that branch",
                                f.to_text(),
                                sd.to_text()
                            ));
                        }
                    }
                    vec![(None, f.clone())]
                }
            };
            t.branches.push(Branch { degree, choice: choice.clone() });
            let mut all = new_open;
            all.extend(open.iter().cloned());
            if self.resolve(&mut t, all, k, depth + 1) {
                *st = t;
                return true;
            }
        }
        false
    }
}

/// Center conditions from the constants of `report`.
///
/// Constants are processed in degree order under an accumulated substitution.
/// `AllOrders` emits every ε-coefficient of each numerator; `FirstOrder` emits the
/// Laurent coefficients at the two lowest orders. Each condition is solved for a
/// parameter occurring linearly when possible; products that cannot be solved are
/// split into branches (common factor nonzero first, then individual factors).
pub fn extract_center_conditions(report: &LiapunovReport, mode: ConditionMode) -> Result<CenterConditions, AlgError> {
    let vars = report.vars().clone();
    let mut constants: Vec<(u32, &RatFunc)> = report.constants.iter().map(|c| (c.degree, &c.value)).collect();
    constants.sort_by_key(|c| c.0);
    for (_, v) in &constants {
        if v.depends_on_xy() {
            return Err(AlgError::StateDependent);
        }
    }
    let ex = Extractor { constants };
    let mut st = State { vars: vars.clone(), subs: vec![], out: vec![], sides: vec![], branches: vec![], notes: vec![] };
    let mut warnings = Vec::new();
    for side in &report.side_conditions {
        st.push_side(side.clone());
    }
    let mut stopped = false;
    for k in 0..ex.constants.len() {
        let (degree, v) = ex.constants[k];
        let v = st.apply(v);
        if v.is_zero() {
            continue;
        }
        let mut open = Vec::new();
        for (order, poly, side) in raw_conditions(&v, mode)? {
            if let Some(sd) = side {
                st.push_side(sd);
            }
            let p = st.apply_poly(&poly);
            if p.is_zero() {
                continue;
            }
            let idx = st.emit(degree, order, p.clone());
            match try_solve(&p) {
                Some(sol) => {
                    st.out[idx].solved_for = Some(vars.name(sol.var).to_string());
                    st.bind(sol);
                }
                None => open.push((Some(idx), p)),
            }
        }
        if !open.is_empty() && !ex.resolve(&mut st, open, k, 0) {
            warnings.push(format!(
                "conditions at degree {degree} could not be reduced to eliminations; later constants are not reduced"
            ));
            stopped = true;
            break;
        }
    }
    for c in &st.out {
        let solved_pert = c.solved_for.as_deref().and_then(|n| vars.index(n)).map(|i| vars.role(i) == Role::PerturbationParameter);
        if c.kind == ConditionKind::Mixed && solved_pert != Some(true) {
            warnings.push(format!("mixed condition {} left unsolved in the perturbation parameters", c.poly.to_text()));
        }
    }
    warnings.extend(st.notes.iter().cloned());
    if !st.sides.is_empty() {
        warnings.push("conditions assume the listed side conditions are nonzero".into());
    }
    let all_vanish = !stopped && ex.constants.iter().all(|(_, v)| st.apply(v).is_zero());
    let mode_ok = mode == ConditionMode::FirstOrder || all_vanish || stopped;
    if !mode_ok {
        warnings.push("some constants do not vanish under the extracted conditions".into());
    }
    let substitution = st.subs.iter().map(|(i, v)| (vars.name(*i).to_string(), v.clone())).collect();
    Ok(CenterConditions {
        mode,
        conditions: st.out,
        side_conditions: st.sides,
        substitution,
        branches: st.branches,
        all_vanish,
        warnings,
    })
}

/// Number of constants not already implied by the eliminations solved from the
/// earlier ones. `undetermined` is set when an earlier constant could not be
/// turned into explicit eliminations while a later one is still nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndependenceCount {
    pub count: usize,
    pub undetermined: bool,
}

pub fn count_independent(report: &LiapunovReport) -> IndependenceCount {
    let vars = report.vars().clone();
    let mut st = State { vars, subs: vec![], out: vec![], sides: vec![], branches: vec![], notes: vec![] };
    let mut count = 0;
    let mut blocked = false;
    let mut undetermined = false;
    for c in &report.constants {
        let v = st.apply(&c.value);
        if v.is_zero() {
            continue;
        }
        if blocked {
            undetermined = true;
        }
        count += 1;
        let Ok(conds) = raw_conditions(&v, ConditionMode::AllOrders) else {
            blocked = true;
            continue;
        };
        for (_, p, _) in conds {
            let p = st.apply_poly(&p);
            if p.is_zero() {
                continue;
            }
            match try_solve(&p) {
                Some(sol) => st.bind(sol),
                None => blocked = true,
            }
        }
    }
    IndependenceCount { count, undetermined }
}

// ---------------------------------------------------------------------------
// vanishing singularities

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularitySample {
    pub eps: f64,
    /// Closest non-origin singular point inside the disk, if any.
    pub nearest: Option<[f64; 2]>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityCheck {
    pub pass: bool,
    pub samples: Vec<SingularitySample>,
    /// Sample exhibiting the shrinking distance when the check fails.
    pub witness: Option<SingularitySample>,
    pub note: String,
}

/// Numeric evidence that no singular point of the family tends to the origin as
/// `eps → 0`: fails when the nearest non-origin singular point moves monotonically
/// toward the origin across the samples and ends at less than half its first distance.
pub fn check_no_vanishing_singularities(
    family: &PlaneSystem,
    eps_samples: &[Q],
    radius: &Q,
) -> Result<SingularityCheck, PerturbError> {
    check_no_vanishing_singularities_with(family, eps_samples, radius, ExecPolicy::default())
}

pub fn check_no_vanishing_singularities_with(
    family: &PlaneSystem,
    eps_samples: &[Q],
    radius: &Q,
    policy: ExecPolicy,
) -> Result<SingularityCheck, PerturbError> {
    if !matches!(family.linear_class(), LinearClass::PerturbedNilpotent | LinearClass::PerturbedDegenerate | LinearClass::LinearType) {
        return Err(PerturbError::InvalidSpec(format!("expected a perturbed family, got {}", family.linear_class())));
    }
    let r = radius.to_f64().unwrap_or(1.0).abs();
    let mut samples = Vec::new();
    for e in eps_samples {
        let s = family.specialize(&[("eps".to_string(), e.clone())])?;
        let f = Field::new(&s)?;
        let pts = singular_points(&f, r, 48, policy);
        let origin_tol = 1e-9 * r.max(1.0);
        let nearest = pts
            .into_iter()
            .filter(|z| z[0].hypot(z[1]) > origin_tol)
            .min_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])));
        samples.push(SingularitySample { eps: e.to_f64().unwrap_or(f64::NAN), nearest, distance: nearest.map(|z| z[0].hypot(z[1])) });
    }
    let d: Vec<Option<f64>> = samples.iter().map(|s| s.distance).collect();
    let shrinking = d.len() >= 2
        && d.iter().all(|x| x.is_some())
        && d.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
        && d[d.len() - 1].unwrap() < 0.5 * d[0].unwrap();
    let witness = if shrinking { samples.last().cloned() } else { None };
    Ok(SingularityCheck {
        pass: !shrinking,
        samples,
        witness,
        note: "numeric sampling evidence, not a proof".into(),
    })
}
