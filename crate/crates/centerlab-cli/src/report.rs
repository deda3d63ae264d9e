//! JSON report shape shared by every subcommand.

use std::collections::BTreeMap;

use centerlab::exactalg::{MPoly, RatFunc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One monomial: rational coefficient as decimal strings (arbitrary size) and
/// the nonzero exponents by variable name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff_num: String,
    pub coeff_den: String,
    pub exponents: BTreeMap<String, u32>,
}

pub fn terms(p: &MPoly) -> Vec<Term> {
    let vars = p.vars();
    p.terms()
        .map(|(m, c)| Term {
            coeff_num: c.numer().to_string(),
            coeff_den: c.denom().to_string(),
            exponents: (0..vars.len()).filter(|&i| m.exp(i) > 0).map(|i| (vars.name(i).to_string(), m.exp(i))).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub k: u32,
    pub degree: u32,
    pub num_terms: Vec<Term>,
    pub den_terms: Vec<Term>,
    pub canonical: String,
}

impl Constant {
    pub fn new(k: u32, degree: u32, v: &RatFunc) -> Self {
        Constant { k, degree, num_terms: terms(v.num()), den_terms: terms(v.den()), canonical: v.to_text() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub eps_order: i64,
    pub poly: Vec<Term>,
    pub degree: u32,
    pub kind: String,
    pub canonical: String,
    pub solved_for: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub file: String,
    pub text: String,
    pub set: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input: Input,
    pub class: Option<String>,
    pub perturbation: Option<Value>,
    pub liapunov: Vec<Constant>,
    pub conditions: Vec<ConditionEntry>,
    pub structure: Option<Value>,
    pub qhomog: Option<Value>,
    pub numeric: Option<Value>,
    pub warnings: Vec<String>,
    pub timings: Option<BTreeMap<String, f64>>,
}

impl AnalysisReport {
    pub fn new(input: Input) -> Self {
        AnalysisReport {
            input,
            class: None,
            perturbation: None,
            liapunov: vec![],
            conditions: vec![],
            structure: None,
            qhomog: None,
            numeric: None,
            warnings: vec![],
            timings: Some(BTreeMap::new()),
        }
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }
}

/// Indented text view of the JSON value.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Object(o) if o.is_empty() => Some("{}".into()),
        _ => None,
    }
}

fn walk(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                // term lists are noise in the text view; the canonical strings carry the same content
                if k.ends_with("_terms") || k == "poly" {
                    continue;
                }
                match scalar(x) {
                    Some(s) if s.contains('\n') => {
                        out.push_str(&format!("{pad}{k}: |\n"));
                        for line in s.lines() {
                            out.push_str(&format!("{pad}  {line}\n"));
                        }
                    }
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        walk(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        walk(x, depth + 1, out);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_default())),
    }
}
