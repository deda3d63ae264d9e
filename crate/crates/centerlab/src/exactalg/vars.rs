use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Role a symbol plays in a variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    State,
    Perturbation,
    Parameter,
    PerturbationParameter,
}

/// Ordered symbol list shared by every polynomial built over it.
///
/// The order is always `x, y, eps` followed by the parameters sorted by name,
/// so the derived monomial order is graded lex with x > y > eps > parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarTable {
    names: Vec<String>,
    roles: Vec<Role>,
}

pub type Vars = Arc<VarTable>;

pub const X: usize = 0;
pub const Y: usize = 1;
pub const EPS: usize = 2;

impl VarTable {
    /// Table with the three reserved symbols and the given parameters.
    pub fn new<S: AsRef<str>>(params: &[S]) -> Vars {
        Self::with_roles(params.iter().map(|p| (p.as_ref().to_string(), Role::Parameter)))
    }

    pub fn with_roles<I: IntoIterator<Item = (String, Role)>>(params: I) -> Vars {
        let mut ps: Vec<(String, Role)> = params.into_iter().filter(|(n, _)| !is_reserved(n)).collect();
        ps.sort_by(|a, b| a.0.cmp(&b.0));
        ps.dedup_by(|a, b| {
            if a.0 == b.0 {
                // keep the perturbation role if either copy carries it
                if a.1 == Role::PerturbationParameter {
                    b.1 = Role::PerturbationParameter;
                }
                true
            } else {
                false
            }
        });
        let mut names = vec!["x".to_string(), "y".to_string(), "eps".to_string()];
        let mut roles = vec![Role::State, Role::State, Role::Perturbation];
        for (n, r) in ps {
            names.push(n);
            roles.push(r);
        }
        Arc::new(VarTable { names, roles })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn role(&self, i: usize) -> Role {
        self.roles[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        let name = if name == "ε" { "eps" } else { name };
        self.names.iter().position(|n| n == name)
    }

    /// Parameter names (everything after `eps`).
    pub fn params(&self) -> Vec<String> {
        self.names[3..].to_vec()
    }

    pub fn param_roles(&self) -> Vec<(String, Role)> {
        self.names[3..].iter().cloned().zip(self.roles[3..].iter().copied()).collect()
    }

    /// Smallest table containing both.
    pub fn union(a: &VarTable, b: &VarTable) -> Vars {
        let mut ps = a.param_roles();
        ps.extend(b.param_roles());
        Self::with_roles(ps)
    }

    /// Same table with extra parameters appended (sorted in).
    pub fn extended(&self, extra: &[(String, Role)]) -> Vars {
        let mut ps = self.param_roles();
        ps.extend(extra.iter().cloned());
        Self::with_roles(ps)
    }

    /// Same table without the named parameters.
    pub fn without(&self, drop: &[String]) -> Vars {
        Self::with_roles(self.param_roles().into_iter().filter(|(n, _)| !drop.contains(n)))
    }

    /// Display name: `eps` prints as `ε`.
    pub fn pretty(&self, i: usize) -> &str {
        if i == EPS {
            "ε"
        } else {
            &self.names[i]
        }
    }
}

pub fn is_reserved(name: &str) -> bool {
    matches!(name, "x" | "y" | "eps" | "ε")
}

impl fmt::Display for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.names.join(", "))
    }
}
