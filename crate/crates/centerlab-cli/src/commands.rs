use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use centerlab::exactalg::{fmt_q, AlgError, Q};
use centerlab::liapunov::{compute_liapunov_constants, LiapunovError};
use centerlab::numeric::{classify_monodromic_with, return_map_with, NumericError, ReturnMapOptions, Transversal, DEFAULT_X0};
use centerlab::perturb::{build_perturbation, extract_center_conditions, ConditionMode, Orientation, PerturbError, PerturbationKind, PerturbationSpec};
use centerlab::qhomog::{classify_qh_center, detect_quasi_homogeneity, preferred_signature, QHSignature, QhError};
use centerlab::structure::{characteristic_directions, ReversibilityVerdict, is_hamiltonian, parse_darboux, reversibility_conditions, verify_darboux_integral, StructureError};
use centerlab::systems::{parse_raw_system, parse_rational, parse_system, LinearClass, PlaneSystem, RawSystem, SystemError, VectorField};
use centerlab::ExecPolicy;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{terms, AnalysisReport, ConditionEntry, Constant, Input};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CLASS: i32 = 3;
pub const EXIT_ENGINE: i32 = 4;

impl Failure {
    pub fn new(code: i32, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into() }
    }

    pub fn other(msg: impl Into<String>) -> Self {
        Failure::new(EXIT_OTHER, msg)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<SystemError> for Failure {
    fn from(e: SystemError) -> Self {
        let code = match e {
            SystemError::Syntax { .. } | SystemError::UnknownFunction { .. } | SystemError::ConstantTerm(_) | SystemError::UnsupportedLinearPart(_) => EXIT_PARSE,
            SystemError::BindState(_) => EXIT_OTHER,
            SystemError::Alg(_) => EXIT_ENGINE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<AlgError> for Failure {
    fn from(e: AlgError) -> Self {
        Failure::new(EXIT_ENGINE, e.to_string())
    }
}

impl From<LiapunovError> for Failure {
    fn from(e: LiapunovError) -> Self {
        let code = match e {
            LiapunovError::WrongClass(_) => EXIT_CLASS,
            LiapunovError::BadDegree(_) => EXIT_OTHER,
            _ => EXIT_ENGINE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<PerturbError> for Failure {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::ClassMismatch { .. } => Failure::new(EXIT_CLASS, e.to_string()),
            PerturbError::InvalidSpec(_) => Failure::other(e.to_string()),
            PerturbError::System(s) => s.into(),
            PerturbError::Numeric(n) => n.into(),
            PerturbError::Alg(_) => Failure::new(EXIT_ENGINE, e.to_string()),
        }
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        let code = match e {
            NumericError::NotNumeric(_) | NumericError::BadTolerance { .. } | NumericError::BadStart { .. } => EXIT_OTHER,
            _ => EXIT_ENGINE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<StructureError> for Failure {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::BadIntegral(_) => Failure::new(EXIT_PARSE, e.to_string()),
            StructureError::System(s) => s.into(),
            StructureError::Alg(a) => a.into(),
            _ => Failure::other(e.to_string()),
        }
    }
}

impl From<QhError> for Failure {
    fn from(e: QhError) -> Self {
        match e {
            QhError::Numeric(n) => n.into(),
            _ => Failure::other(e.to_string()),
        }
    }
}

pub type Res<T> = Result<T, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

// ---------------------------------------------------------------------------
// shared options

pub struct Common {
    pub file: String,
    pub text: String,
    pub set: Vec<(String, Q)>,
    pub timings: bool,
}

pub fn parse_set(arg: &str) -> Result<(String, Q), String> {
    let (k, v) = arg.split_once('=').ok_or_else(|| format!("expected name=value, got '{arg}'"))?;
    let v = parse_rational(v.trim()).ok_or_else(|| format!("'{v}' is not a rational number"))?;
    Ok((k.trim().to_string(), v))
}

/// `name=start:stop:step`, inclusive of `stop` when it is hit exactly.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<Q>,
}

pub fn parse_sweep(arg: &str) -> Result<Sweep, String> {
    let (k, r) = arg.split_once('=').ok_or_else(|| format!("expected name=start:stop:step, got '{arg}'"))?;
    let parts: Vec<&str> = r.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{r}'"));
    }
    let num = |s: &str| parse_rational(s.trim()).ok_or_else(|| format!("'{s}' is not a rational number"));
    let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if h <= Q::from_integer(0.into()) {
        return Err("sweep step must be positive".into());
    }
    let mut values = Vec::new();
    let mut x = a;
    while x <= b {
        values.push(x.clone());
        if values.len() > 100_000 {
            return Err("sweep has more than 100000 points".into());
        }
        x += &h;
    }
    Ok(Sweep { name: k.trim().to_string(), values })
}

fn input_echo(c: &Common) -> Input {
    Input { file: c.file.clone(), text: c.text.trim_end().to_string(), set: c.set.iter().map(|(k, v)| (k.clone(), fmt_q(v))).collect() }
}

struct Clock {
    start: Instant,
    marks: BTreeMap<String, f64>,
    on: bool,
}

impl Clock {
    fn new(on: bool) -> Self {
        Clock { start: Instant::now(), marks: BTreeMap::new(), on }
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.marks.insert(format!("{name}_s"), t.elapsed().as_secs_f64());
        out
    }

    fn finish(mut self, r: &mut AnalysisReport) {
        if self.on {
            self.marks.insert("total_s".into(), self.start.elapsed().as_secs_f64());
            r.timings = Some(self.marks);
        } else {
            r.timings = None;
        }
    }
}

fn symbolic_system(c: &Common) -> Res<PlaneSystem> {
    let s = parse_system(&c.text)?;
    Ok(if c.set.is_empty() { s } else { s.specialize(&c.set)? })
}

/// Assumption checks for commands that work on raw systems; skipped when the
/// linear part has no normal form.
fn check_raw_assumptions(c: &Common, r: &mut AnalysisReport) {
    if let Ok(s) = symbolic_system(c) {
        check_assumptions(&s, r);
    }
}

fn raw_system(c: &Common) -> Res<RawSystem> {
    let s = parse_raw_system(&c.text)?;
    Ok(if c.set.is_empty() { s } else { s.specialize(&c.set)? })
}

fn check_assumptions(s: &PlaneSystem, r: &mut AnalysisReport) {
    for a in s.assumptions() {
        match a.holds() {
            Some(false) => r.warn(format!("assumption '{}' is violated by the given parameter values", a.text)),
            None => r.warn(format!("side condition assumed: {}", a.text)),
            Some(true) => {}
        }
    }
}

// ---------------------------------------------------------------------------
// liapunov

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbChoice {
    None,
    Minimal,
    General(u32),
    Kind(PerturbationKind),
}

pub fn parse_perturb(arg: &str) -> Result<PerturbChoice, String> {
    match arg {
        "none" => Ok(PerturbChoice::None),
        "minimal" => Ok(PerturbChoice::Minimal),
        "nilpotent" => Ok(PerturbChoice::Kind(PerturbationKind::Nilpotent)),
        "degenerate" => Ok(PerturbChoice::Kind(PerturbationKind::Degenerate)),
        "hamiltonian" => Ok(PerturbChoice::Kind(PerturbationKind::Hamiltonian)),
        _ => match arg.strip_prefix("general:") {
            Some(d) => d.parse().map(PerturbChoice::General).map_err(|_| format!("bad degree in '{arg}'")),
            None if arg == "general" => Ok(PerturbChoice::General(5)),
            None => Err(format!("unknown perturbation '{arg}' (none, minimal, general:d, nilpotent, degenerate, hamiltonian)")),
        },
    }
}

pub struct LiapunovArgs {
    pub perturb: PerturbChoice,
    pub orientation: Orientation,
    pub mode: ConditionMode,
    pub max_degree: u32,
}

fn kind_for(class: LinearClass) -> Res<PerturbationKind> {
    match class {
        LinearClass::Nilpotent => Ok(PerturbationKind::Nilpotent),
        LinearClass::Degenerate => Ok(PerturbationKind::Degenerate),
        c => Err(Failure::new(EXIT_CLASS, format!("perturbation requested but the system is already {c}; use --perturb none"))),
    }
}

pub fn cmd_liapunov(c: &Common, a: &LiapunovArgs) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let base = clock.time("parse", || symbolic_system(c))?;
    r.class = Some(base.linear_class().to_string());
    check_assumptions(&base, &mut r);
    let spec = match a.perturb {
        PerturbChoice::None => None,
        PerturbChoice::Minimal => Some((PerturbationSpec::minimal(kind_for(base.linear_class())?), "minimal", None)),
        PerturbChoice::General(d) => Some((PerturbationSpec::general(kind_for(base.linear_class())?, d, &base), "general", Some(d))),
        PerturbChoice::Kind(k) => Some((PerturbationSpec::minimal(k), "minimal", None)),
    };
    let s = match spec {
        None => base,
        Some((spec, template, d)) => {
            let spec = spec.with_orientation(a.orientation);
            let s = clock.time("perturb", || build_perturbation(&base, &spec))?;
            r.perturbation = Some(json!({
                "kind": spec.kind.as_str(),
                "template": template,
                "degree": d,
                "orientation": spec.orientation,
                "base_class": base.linear_class().as_str(),
                "system": s.to_text(),
            }));
            r.class = Some(s.linear_class().to_string());
            s
        }
    };
    let rep = clock.time("liapunov", || compute_liapunov_constants(&s, a.max_degree))?;
    r.liapunov = rep.constants.iter().map(|k| Constant::new(k.k, k.degree, &k.value)).collect();
    for w in &rep.warnings {
        r.warn(w.clone());
    }
    for sc in &rep.side_conditions {
        r.warn(format!("side condition assumed: {} != 0", sc.to_text()));
    }
    let conds = clock.time("conditions", || extract_center_conditions(&rep, a.mode))?;
    r.conditions = conds
        .conditions
        .iter()
        .map(|k| ConditionEntry {
            eps_order: k.eps_order,
            poly: terms(&k.poly),
            degree: k.degree,
            kind: to_value(&k.kind).as_str().unwrap_or_default().to_string(),
            canonical: k.poly.to_text(),
            solved_for: k.solved_for.clone(),
        })
        .collect();
    for sc in &conds.side_conditions {
        r.warn(format!("side condition assumed: {} != 0", sc.to_text()));
    }
    for w in &conds.warnings {
        r.warn(w.clone());
    }
    clock.finish(&mut r);
    Ok(r)
}

// ---------------------------------------------------------------------------
// verify, reversible

pub fn cmd_verify(c: &Common, integral: &str) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let s = clock.time("parse", || symbolic_system(c))?;
    r.class = Some(s.linear_class().to_string());
    check_assumptions(&s, &mut r);
    let h = parse_darboux(integral, s.vars())?;
    let v = clock.time("verify", || verify_darboux_integral(&s, &h))?;
    if let Some(n) = &v.domain_note {
        r.warn(n.clone());
    }
    r.structure = Some(json!({
        "integral": integral,
        "residual_zero": v.is_zero(),
        "residual": v.residual.to_text(),
        "residual_terms": terms(&v.residual),
        "domain_note": v.domain_note,
    }));
    clock.finish(&mut r);
    Ok(r)
}

pub fn cmd_reversible(c: &Common) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let s = clock.time("parse", || symbolic_system(c))?;
    r.class = Some(s.linear_class().to_string());
    check_assumptions(&s, &mut r);
    let rev = clock.time("reversibility", || reversibility_conditions(&s))?;
    if let ReversibilityVerdict::Undetermined { free_symbols } = &rev.verdict {
        r.warn(format!("conditions involve the free symbols {free_symbols:?}; solvability is not decided"));
    }
    r.structure = Some(json!({
        "hamiltonian": is_hamiltonian(&s),
        "reversibility": {
            "cos": rev.cos_name,
            "sin": rev.sin_name,
            "axis_conditions": rev.axis_conditions.iter().map(|p| json!({"canonical": p.to_text(), "poly": terms(p)})).collect::<Vec<_>>(),
            "verdict": to_value(&rev.verdict),
        },
    }));
    clock.finish(&mut r);
    Ok(r)
}

// ---------------------------------------------------------------------------
// qhcenter, returnmap, classify

const SIGNATURE_BOUND: u32 = 8;

fn qh_value<S: VectorField + ?Sized>(s: &S, sig: Option<(u32, u32)>) -> Res<(Value, Vec<String>)> {
    let found = detect_quasi_homogeneity(s, SIGNATURE_BOUND);
    let chosen = match sig {
        Some((p, q)) => match found.iter().find(|g| g.p == p && g.q == q) {
            Some(g) => Some(*g),
            None => return Err(QhError::WrongSignature { p, q }.into()),
        },
        None => preferred_signature(s, SIGNATURE_BOUND),
    };
    let mut warnings = Vec::new();
    let report = match chosen {
        Some(g) => {
            let rep = classify_qh_center(s, &g)?;
            if rep.numeric {
                warnings.push("condition (ii) decided by numeric quadrature".to_string());
            }
            Some(to_value(&rep))
        }
        None => {
            warnings.push(format!("not quasi-homogeneous for any coprime (p, q) with p, q <= {SIGNATURE_BOUND}"));
            None
        }
    };
    Ok((json!({ "signatures": to_value(&found), "signature": chosen.map(|g: QHSignature| to_value(&g)), "report": report }), warnings))
}

/// Runs `f` at every sweep point, in sweep order, collecting per-point failures.
fn sweep_points(base: &RawSystem, sw: &Sweep, f: impl Fn(&RawSystem) -> Res<(Value, Vec<String>)> + Sync) -> (Value, Vec<String>) {
    let runs = ExecPolicy::default().map(&sw.values, |v| base.specialize(&[(sw.name.clone(), v.clone())]).map_err(Failure::from).and_then(|s| f(&s)));
    let mut warnings = Vec::new();
    let points: Vec<Value> = sw
        .values
        .iter()
        .zip(runs)
        .map(|(v, run)| {
            let mut p = json!({ "value": fmt_q(v), "value_f64": v.to_f64() });
            match run {
                Ok((res, w)) => {
                    p["result"] = res;
                    warnings.extend(w);
                }
                Err(e) => p["error"] = Value::String(e.msg),
            }
            p
        })
        .collect();
    warnings.dedup();
    (json!({ "sweep": { "param": sw.name, "points": points } }), warnings)
}

pub fn cmd_qhcenter(c: &Common, sig: Option<(u32, u32)>, sweep: Option<&Sweep>) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let s = clock.time("parse", || raw_system(c))?;
    check_raw_assumptions(c, &mut r);
    r.class = s.classify().ok().map(|p| p.linear_class().to_string());
    let (v, w) = match sweep {
        Some(sw) => clock.time("qhomog", || sweep_points(&s, sw, |x| qh_value(x, sig))),
        None => clock.time("qhomog", || qh_value(&s, sig))?,
    };
    r.qhomog = Some(v);
    for w in w {
        r.warn(w);
    }
    clock.finish(&mut r);
    Ok(r)
}

pub fn parse_transversal(arg: &str) -> Result<Transversal, String> {
    match arg {
        "x" | "+x" => Ok(Transversal::PositiveX),
        "y" | "+y" => Ok(Transversal::PositiveY),
        _ => arg.parse::<f64>().map(Transversal::Ray).map_err(|_| format!("transversal must be x, y or an angle in radians, got '{arg}'")),
    }
}

pub struct ReturnArgs {
    pub x0: Vec<f64>,
    pub transversal: Transversal,
}

const NUMERIC_NOTE: &str = "numeric evidence only; it does not prove a center";

fn return_value(s: &RawSystem, a: &ReturnArgs) -> Res<(Value, Vec<String>)> {
    let x0 = if a.x0.is_empty() { DEFAULT_X0.to_vec() } else { a.x0.clone() };
    let rm = return_map_with(s, &x0, a.transversal, &ReturnMapOptions::default(), ExecPolicy::default())?;
    Ok((to_value(&rm), vec![NUMERIC_NOTE.to_string()]))
}

pub fn cmd_returnmap(c: &Common, a: &ReturnArgs, sweep: Option<&Sweep>) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let s = clock.time("parse", || raw_system(c))?;
    check_raw_assumptions(c, &mut r);
    r.class = s.classify().ok().map(|p| p.linear_class().to_string());
    let (v, w) = match sweep {
        Some(sw) => clock.time("numeric", || sweep_points(&s, sw, |x| return_value(x, a))),
        None => clock.time("numeric", || return_value(&s, a))?,
    };
    r.numeric = Some(v);
    for w in w {
        r.warn(w);
    }
    clock.finish(&mut r);
    Ok(r)
}

pub fn cmd_classify(c: &Common, a: &ReturnArgs) -> Res<AnalysisReport> {
    let mut clock = Clock::new(c.timings);
    let mut r = AnalysisReport::new(input_echo(c));
    let s = clock.time("parse", || raw_system(c))?;
    check_raw_assumptions(c, &mut r);
    let plane = s.classify().ok();
    r.class = plane.as_ref().map(|p| p.linear_class().to_string());
    if plane.is_none() {
        r.warn("linear part is not in a supported normal form; symbolic engines skipped");
    }
    let free = s.free_symbols();
    if !free.is_empty() {
        return Err(Failure::other(format!("system has free symbols {free:?}; give values with --set")));
    }
    let directions = match characteristic_directions(&s) {
        Ok(d) => json!({ "candidates": d.iter().map(|d| d.to_string()).collect::<Vec<_>>() }),
        Err(StructureError::AllDirections) => json!({ "candidates": Value::Null, "note": "x*Q - y*P vanishes identically" }),
        Err(e) => return Err(e.into()),
    };
    r.structure = Some(json!({
        "hamiltonian": plane.as_ref().map(is_hamiltonian),
        "characteristic_directions": directions,
    }));
    match clock.time("qhomog", || qh_value(&s, None)) {
        Ok((v, w)) => {
            r.qhomog = Some(v);
            for w in w {
                r.warn(w);
            }
        }
        Err(e) => {
            r.qhomog = Some(json!({ "error": e.msg }));
            r.warn(format!("quasi-homogeneous test skipped: {}", e.msg));
        }
    }
    let x0 = if a.x0.is_empty() { DEFAULT_X0.to_vec() } else { a.x0.clone() };
    let mono = clock.time("numeric", || classify_monodromic_with(&s, &x0, a.transversal, &ReturnMapOptions::default(), ExecPolicy::default()))?;
    r.numeric = Some(to_value(&mono));
    r.warn(NUMERIC_NOTE);
    clock.finish(&mut r);
    Ok(r)
}
