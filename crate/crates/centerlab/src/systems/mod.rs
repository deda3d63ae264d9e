//! Planar polynomial systems: model, linear-part classification, homogeneous
//! decomposition, Lie derivatives, substitution and the text format.

pub mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{AlgError, MPoly, Role, VarTable, Vars, Q, EPS, X, Y};

pub use parse::{parse_expr, parse_poly, parse_rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown function symbol '{name}' at line {line}, column {col}")]
    UnknownFunction { line: usize, col: usize, name: String },
    #[error("nonzero constant term in {0}: the origin must be a singular point")]
    ConstantTerm(&'static str),
    #[error("unsupported linear part ({0}); pre-normalize to (-y, x), (y, 0), (0, 0) or their eps-perturbed forms")]
    UnsupportedLinearPart(String),
    #[error("cannot bind state variable '{0}'")]
    BindState(String),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// Linear part at the origin, up to the scalings accepted by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearClass {
    LinearType,
    Nilpotent,
    Degenerate,
    PerturbedNilpotent,
    PerturbedDegenerate,
}

impl LinearClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinearClass::LinearType => "linear_type",
            LinearClass::Nilpotent => "nilpotent",
            LinearClass::Degenerate => "degenerate",
            LinearClass::PerturbedNilpotent => "perturbed_nilpotent",
            LinearClass::PerturbedDegenerate => "perturbed_degenerate",
        }
    }

    pub fn is_center_type(&self) -> bool {
        matches!(self, LinearClass::LinearType | LinearClass::PerturbedNilpotent | LinearClass::PerturbedDegenerate)
    }
}

impl fmt::Display for LinearClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relation in an `assume:` annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
}

/// Inequality side condition carried on a system, checked only once every
/// parameter it mentions has a numeric value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assumption {
    pub text: String,
    /// `lhs - rhs`, compared against zero.
    pub expr: MPoly,
    pub rel: Relation,
}

impl Assumption {
    /// `None` while symbolic parameters remain.
    pub fn holds(&self) -> Option<bool> {
        let v = self.expr.constant_value()?;
        let s = v.cmp(&Q::from_integer(0.into()));
        Some(match self.rel {
            Relation::Gt => s.is_gt(),
            Relation::Ge => s.is_ge(),
            Relation::Lt => s.is_lt(),
            Relation::Le => s.is_le(),
            Relation::Ne => s.is_ne(),
        })
    }
}

/// Linear coefficients `P₁ = a·y`, `Q₁ = b·x`; `a, b` are polynomials in `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPart {
    pub a: MPoly,
    pub b: MPoly,
}

/// `ẋ = P(x, y)`, `ẏ = Q(x, y)` with parameters and `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSystem {
    p: MPoly,
    q: MPoly,
    class: LinearClass,
    linear: LinearPart,
    assumptions: Vec<Assumption>,
}

/// Homogeneous pieces `(d, P_d, Q_d)` in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousDecomposition {
    pub parts: Vec<(u32, MPoly, MPoly)>,
}

impl HomogeneousDecomposition {
    pub fn reassemble(&self, vars: &Vars) -> (MPoly, MPoly) {
        let mut p = MPoly::zero(vars);
        let mut q = MPoly::zero(vars);
        for (_, pd, qd) in &self.parts {
            p = &p + pd;
            q = &q + qd;
        }
        (p, q)
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.parts.iter().map(|(d, _, _)| *d).collect()
    }
}

fn eps_monomial_coeff(p: &MPoly) -> Option<(u32, Q)> {
    // single term c·eps^k
    if p.nterms() != 1 {
        return None;
    }
    let (m, c) = p.terms().next().unwrap();
    if m.exps().iter().enumerate().all(|(i, &e)| i == EPS || e == 0) {
        Some((m.exp(EPS), c.clone()))
    } else {
        None
    }
}

/// Classifies the linear part; see [`LinearClass`].
pub fn classify_linear(p: &MPoly, q: &MPoly) -> Result<(LinearClass, LinearPart), SystemError> {
    let vars = p.vars();
    let p1 = p.xy_part(1);
    let q1 = q.xy_part(1);
    let px = p1.partial(X).substitute_q(Y, &Q::from_integer(0.into()));
    let qy = q1.partial(Y).substitute_q(X, &Q::from_integer(0.into()));
    let a = p1.partial(Y);
    let b = q1.partial(X);
    let describe = || format!("P1 = {}, Q1 = {}", p1, q1);
    if !px.is_zero() || !qy.is_zero() {
        return Err(SystemError::UnsupportedLinearPart(describe()));
    }
    let lin = LinearPart { a: a.clone(), b: b.clone() };
    if a.is_zero() && b.is_zero() {
        return Ok((LinearClass::Degenerate, lin));
    }
    let (Some((ea, ca)), bz) = (eps_monomial_coeff(&a), b.is_zero()) else {
        return Err(SystemError::UnsupportedLinearPart(describe()));
    };
    if bz {
        return if ea == 0 { Ok((LinearClass::Nilpotent, lin)) } else { Err(SystemError::UnsupportedLinearPart(describe())) };
    }
    let Some((eb, cb)) = eps_monomial_coeff(&b) else {
        return Err(SystemError::UnsupportedLinearPart(describe()));
    };
    let opposite = (&ca * &cb) < Q::from_integer(0.into());
    let class = match (ea, eb, opposite) {
        (0, 0, true) => LinearClass::LinearType,
        (0, 1, true) => LinearClass::PerturbedNilpotent,
        (1, 1, true) => LinearClass::PerturbedDegenerate,
        _ => return Err(SystemError::UnsupportedLinearPart(describe())),
    };
    let _ = vars;
    Ok((class, lin))
}

impl PlaneSystem {
    pub fn new(p: MPoly, q: MPoly) -> Result<Self, SystemError> {
        Self::with_assumptions(p, q, vec![])
    }

    pub fn with_assumptions(p: MPoly, q: MPoly, assumptions: Vec<Assumption>) -> Result<Self, SystemError> {
        let (p, q) = if p.vars() == q.vars() || **p.vars() == **q.vars() {
            (p, q)
        } else {
            let t = VarTable::union(p.vars(), q.vars());
            (p.lift(&t)?, q.lift(&t)?)
        };
        if p.xy_order() == Some(0) {
            return Err(SystemError::ConstantTerm("xdot"));
        }
        if q.xy_order() == Some(0) {
            return Err(SystemError::ConstantTerm("ydot"));
        }
        let (class, linear) = classify_linear(&p, &q)?;
        Ok(PlaneSystem { p, q, class, linear, assumptions })
    }

    pub fn p(&self) -> &MPoly {
        &self.p
    }

    pub fn q(&self) -> &MPoly {
        &self.q
    }

    pub fn vars(&self) -> &Vars {
        self.p.vars()
    }

    pub fn params(&self) -> Vec<String> {
        self.vars().params()
    }

    pub fn linear_class(&self) -> LinearClass {
        self.class
    }

    pub fn linear_part(&self) -> &LinearPart {
        &self.linear
    }

    pub fn assumptions(&self) -> &[Assumption] {
        &self.assumptions
    }

    pub fn uses_eps(&self) -> bool {
        self.p.uses(EPS) || self.q.uses(EPS)
    }

    /// True when no parameter and no `eps` remains in P or Q.
    pub fn is_numeric(&self) -> bool {
        (2..self.vars().len()).all(|i| !self.p.uses(i) && !self.q.uses(i))
    }

    /// Symbols other than x, y that occur in P or Q.
    pub fn free_symbols(&self) -> Vec<String> {
        (2..self.vars().len()).filter(|&i| self.p.uses(i) || self.q.uses(i)).map(|i| self.vars().name(i).to_string()).collect()
    }

    /// Re-expresses the system over a larger table.
    pub fn lift(&self, to: &Vars) -> Result<PlaneSystem, SystemError> {
        let assumptions = self
            .assumptions
            .iter()
            .map(|a| Ok(Assumption { text: a.text.clone(), expr: a.expr.lift(to)?, rel: a.rel }))
            .collect::<Result<Vec<_>, AlgError>>()?;
        PlaneSystem::with_assumptions(self.p.lift(to)?, self.q.lift(to)?, assumptions)
    }

    pub fn homogeneous_parts(&self) -> HomogeneousDecomposition {
        let d = self.p.xy_degree().max(self.q.xy_degree());
        let parts = (1..=d)
            .map(|k| (k, self.p.xy_part(k), self.q.xy_part(k)))
            .filter(|(_, a, b)| !a.is_zero() || !b.is_zero())
            .collect();
        HomogeneousDecomposition { parts }
    }

    /// `Ḣ = H_x·P + H_y·Q`.
    pub fn lie_derivative(&self, h: &MPoly) -> Result<MPoly, AlgError> {
        h.partial(X).checked_mul(&self.p)?.checked_add(&h.partial(Y).checked_mul(&self.q)?)
    }

    /// `∂P/∂x + ∂Q/∂y`.
    pub fn divergence(&self) -> MPoly {
        &self.p.partial(X) + &self.q.partial(Y)
    }

    /// Substitutes parameters or `eps`; bound parameters leave the table.
    pub fn substitute(&self, bindings: &[(String, MPoly)]) -> Result<PlaneSystem, SystemError> {
        let mut table = self.vars().clone();
        for (name, v) in bindings {
            if name == "x" || name == "y" {
                return Err(SystemError::BindState(name.clone()));
            }
            table = VarTable::union(&table, v.vars());
        }
        let mut p = self.p.lift(&table)?;
        let mut q = self.q.lift(&table)?;
        let mut assumptions: Vec<Assumption> =
            self.assumptions.iter().map(|a| Ok(Assumption { expr: a.expr.lift(&table)?, ..a.clone() })).collect::<Result<_, AlgError>>()?;
        for (name, v) in bindings {
            let Some(i) = table.index(name) else { continue };
            let v = v.lift(&table)?;
            p = p.substitute(i, &v);
            q = q.substitute(i, &v);
            for a in assumptions.iter_mut() {
                a.expr = a.expr.substitute(i, &v);
            }
        }
        // drop bound parameters that no longer occur
        let drop: Vec<String> = bindings
            .iter()
            .map(|(n, _)| n.clone())
            .filter(|n| n != "eps" && n != "ε")
            .filter(|n| table.index(n).map(|i| !p.uses(i) && !q.uses(i) && assumptions.iter().all(|a| !a.expr.uses(i))).unwrap_or(false))
            .collect();
        let t2 = table.without(&drop);
        let assumptions = assumptions.into_iter().map(|a| Ok(Assumption { expr: a.expr.lift(&t2)?, ..a })).collect::<Result<_, AlgError>>()?;
        PlaneSystem::with_assumptions(p.lift(&t2)?, q.lift(&t2)?, assumptions)
    }

    /// Substitutes rational values for named symbols.
    pub fn specialize(&self, values: &[(String, Q)]) -> Result<PlaneSystem, SystemError> {
        let b: Vec<(String, MPoly)> = values.iter().map(|(n, v)| (n.clone(), MPoly::constant(self.vars(), v.clone()))).collect();
        self.substitute(&b)
    }

    /// Text form accepted by [`parse_system`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let roles = self.vars().param_roles();
        let base: Vec<&str> = roles.iter().filter(|(_, r)| *r == Role::Parameter).map(|(n, _)| n.as_str()).collect();
        let pert: Vec<&str> = roles.iter().filter(|(_, r)| *r == Role::PerturbationParameter).map(|(n, _)| n.as_str()).collect();
        if !base.is_empty() {
            s.push_str(&format!("params: {}\n", base.join(", ")));
        }
        if !pert.is_empty() {
            s.push_str(&format!("perturbation params: {}\n", pert.join(", ")));
        }
        for a in &self.assumptions {
            s.push_str(&format!("assume: {}\n", a.text));
        }
        s.push_str(&format!("xdot = {};\nydot = {}\n", self.p.to_text(), self.q.to_text()));
        s
    }
}

impl fmt::Display for PlaneSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ẋ = {}, ẏ = {}", self.p, self.q)
    }
}

/// Parses the system text format:
///
/// ```text
/// params: k1, k2
/// assume: a*mu > 0
/// xdot = y + x^2 + k2*x*y; ydot = k1*x^2 - x^3
/// ```
pub fn parse_system(text: &str) -> Result<PlaneSystem, SystemError> {
    let (p, q, assumptions) = parse_parts(text)?;
    PlaneSystem::with_assumptions(p, q, assumptions)
}

/// Parses without classifying the linear part, for numeric work on fields such
/// as foci that are not in one of the normal forms.
pub fn parse_raw_system(text: &str) -> Result<RawSystem, SystemError> {
    let (p, q, _) = parse_parts(text)?;
    RawSystem::new(p, q)
}

fn parse_parts(text: &str) -> Result<(MPoly, MPoly, Vec<Assumption>), SystemError> {
    use parse::{tokenize, Parser, Tok};

    let mut declared: Vec<(String, Role)> = Vec::new();
    let mut assume_src: Vec<(String, usize, usize)> = Vec::new();
    let mut stmts: Vec<(String, usize, usize)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim_start();
        let indent = body.len() - trimmed.len();
        let header = |key: &str| trimmed.strip_prefix(key).map(|r| r.to_string());
        if let Some(rest) = header("perturbation params:") {
            for n in rest.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                declared.push((n.to_string(), Role::PerturbationParameter));
            }
            continue;
        }
        if let Some(rest) = header("params:") {
            for n in rest.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                if !n.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(SystemError::Syntax { line, col: indent + 1, msg: format!("bad parameter name '{n}'") });
                }
                declared.push((n.to_string(), Role::Parameter));
            }
            continue;
        }
        if let Some(rest) = header("assume:") {
            assume_src.push((rest.trim().to_string(), line, indent + 7));
            continue;
        }
        let mut col = indent;
        for piece in trimmed.split(';') {
            if !piece.trim().is_empty() {
                stmts.push((piece.to_string(), line, col));
            }
            col += piece.chars().count() + 1;
        }
    }

    let mut exprs: Vec<(String, parse::Expr)> = Vec::new();
    let mut symbols = BTreeSet::new();
    for (src, line, col) in &stmts {
        let toks = tokenize(src, *line, *col)?;
        let (name, rest) = match toks.as_slice() {
            [a, b, rest @ ..] if matches!(&a.tok, Tok::Ident(_)) && b.tok == Tok::Op('=') => {
                let Tok::Ident(n) = &a.tok else { unreachable!() };
                (n.clone(), rest)
            }
            _ => return Err(SystemError::Syntax { line: *line, col: col + 1, msg: "expected 'xdot = <expr>' or 'ydot = <expr>'".into() }),
        };
        if name != "xdot" && name != "ydot" {
            return Err(SystemError::Syntax { line: *line, col: col + 1, msg: format!("unknown left-hand side '{name}'") });
        }
        if exprs.iter().any(|(n, _)| *n == name) {
            return Err(SystemError::Syntax { line: *line, col: col + 1, msg: format!("duplicate '{name}'") });
        }
        let mut p = Parser::new(rest, *line, col + src.chars().count() + 1);
        let e = p.expr()?;
        p.expect_end()?;
        e.symbols(&mut symbols);
        exprs.push((name, e));
    }
    let mut assume_exprs = Vec::new();
    for (src, line, col) in &assume_src {
        let toks = tokenize(src, *line, *col)?;
        let idx = toks.iter().position(|t| matches!(t.tok, Tok::Op('>') | Tok::Op('<') | Tok::Op('!')));
        let Some(k) = idx else {
            return Err(SystemError::Syntax { line: *line, col: *col + 1, msg: "expected a relation (>, >=, <, <=, !=)".into() });
        };
        let (rel, skip) = match (&toks[k].tok, toks.get(k + 1).map(|t| &t.tok)) {
            (Tok::Op('>'), Some(Tok::Op('='))) => (Relation::Ge, 2),
            (Tok::Op('<'), Some(Tok::Op('='))) => (Relation::Le, 2),
            (Tok::Op('!'), Some(Tok::Op('='))) => (Relation::Ne, 2),
            (Tok::Op('>'), _) => (Relation::Gt, 1),
            (Tok::Op('<'), _) => (Relation::Lt, 1),
            _ => return Err(SystemError::Syntax { line: *line, col: toks[k].col, msg: "bad relation".into() }),
        };
        let mut pl = Parser::new(&toks[..k], *line, toks[k].col);
        let lhs = pl.expr()?;
        pl.expect_end()?;
        let mut pr = Parser::new(&toks[k + skip..], *line, *col + src.chars().count() + 1);
        let rhs = pr.expr()?;
        pr.expect_end()?;
        lhs.symbols(&mut symbols);
        rhs.symbols(&mut symbols);
        assume_exprs.push((src.clone(), lhs, rhs, rel));
    }
    for s in &symbols {
        if s == "x" || s == "y" || s == "eps" {
            continue;
        }
        if !declared.iter().any(|(n, _)| n == s) {
            declared.push((s.clone(), Role::Parameter));
        }
    }
    let vars = VarTable::with_roles(declared);
    let get = |n: &str| -> Result<MPoly, SystemError> {
        match exprs.iter().find(|(k, _)| k == n) {
            Some((_, e)) => e.eval_poly(&vars),
            None => Err(SystemError::Syntax { line: 1, col: 1, msg: format!("missing '{n} = ...'") }),
        }
    };
    let p = get("xdot")?;
    let q = get("ydot")?;
    let mut assumptions = Vec::new();
    for (text, lhs, rhs, rel) in assume_exprs {
        let e = &lhs.eval_poly(&vars)? - &rhs.eval_poly(&vars)?;
        assumptions.push(Assumption { text, expr: e, rel });
    }
    Ok((p, q, assumptions))
}

/// A planar polynomial field `(P, Q)` seen only through its components.
pub trait VectorField {
    fn p(&self) -> &MPoly;
    fn q(&self) -> &MPoly;

    fn free_symbols(&self) -> Vec<String> {
        let (p, q) = (self.p(), self.q());
        (2..p.vars().len()).filter(|&i| p.uses(i) || q.uses(i)).map(|i| p.vars().name(i).to_string()).collect()
    }
}

impl VectorField for PlaneSystem {
    fn p(&self) -> &MPoly {
        &self.p
    }

    fn q(&self) -> &MPoly {
        &self.q
    }
}

/// `(P, Q)` with a singular origin and no constraint on the linear part.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSystem {
    p: MPoly,
    q: MPoly,
}

impl RawSystem {
    pub fn new(p: MPoly, q: MPoly) -> Result<Self, SystemError> {
        let (p, q) = if **p.vars() == **q.vars() {
            (p, q)
        } else {
            let t = VarTable::union(p.vars(), q.vars());
            (p.lift(&t)?, q.lift(&t)?)
        };
        if p.xy_order() == Some(0) {
            return Err(SystemError::ConstantTerm("xdot"));
        }
        if q.xy_order() == Some(0) {
            return Err(SystemError::ConstantTerm("ydot"));
        }
        Ok(RawSystem { p, q })
    }

    pub fn specialize(&self, values: &[(String, Q)]) -> Result<RawSystem, SystemError> {
        let mut p = self.p.clone();
        let mut q = self.q.clone();
        for (n, v) in values {
            let Some(i) = self.p.vars().index(n) else { continue };
            p = p.substitute_q(i, v);
            q = q.substitute_q(i, v);
        }
        RawSystem::new(p, q)
    }

    /// Classified view, when the linear part is in a normal form.
    pub fn classify(&self) -> Result<PlaneSystem, SystemError> {
        PlaneSystem::new(self.p.clone(), self.q.clone())
    }
}

impl VectorField for RawSystem {
    fn p(&self) -> &MPoly {
        &self.p
    }

    fn q(&self) -> &MPoly {
        &self.q
    }
}

impl From<&PlaneSystem> for RawSystem {
    fn from(s: &PlaneSystem) -> Self {
        RawSystem { p: s.p.clone(), q: s.q.clone() }
    }
}

/// Small constructor used by tests and examples.
pub fn system(text: &str) -> PlaneSystem {
    parse_system(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}
