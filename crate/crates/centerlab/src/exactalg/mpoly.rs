use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::vars::{Vars, VarTable};
use super::AlgError;
use crate::exec::ExecPolicy;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vector with cached total degree. The derived order is graded lex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    deg: u32,
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { deg: exps.iter().sum(), exps }
    }

    pub fn one(n: usize) -> Self {
        Monomial { deg: 0, exps: vec![0; n] }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn xy_degree(&self) -> u32 {
        self.exps[0] + self.exps[1]
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial {
            deg: self.deg + o.deg,
            exps: self.exps.iter().zip(&o.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.exps.iter().zip(&o.exps).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming `self` divides `o`.
    pub fn quotient_of(&self, o: &Monomial) -> Monomial {
        Monomial {
            deg: o.deg - self.deg,
            exps: o.exps.iter().zip(&self.exps).map(|(a, b)| a - b).collect(),
        }
    }

    fn with_exp(&self, i: usize, e: u32) -> Monomial {
        let mut exps = self.exps.clone();
        let deg = self.deg - exps[i] + e;
        exps[i] = e;
        Monomial { deg, exps }
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    vars: Vars,
    terms: BTreeMap<Monomial, Q>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({})", self.to_text())
    }
}

impl MPoly {
    pub fn zero(vars: &Vars) -> Self {
        MPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn int(vars: &Vars, c: i64) -> Self {
        Self::constant(vars, q(c))
    }

    pub fn one(vars: &Vars) -> Self {
        Self::int(vars, 1)
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, q(1), e)
    }

    /// Variable by name; panics if the name is not in the table.
    pub fn named(vars: &Vars, name: &str) -> Self {
        let i = vars.index(name).unwrap_or_else(|| panic!("unknown symbol {name} in {vars}"));
        Self::var(vars, i)
    }

    pub fn monomial(vars: &Vars, c: Q, exps: Vec<u32>) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent arity");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::new(exps), c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(vars: &Vars, it: I) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.deg == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn coeff(&self, exps: &[u32]) -> Q {
        self.terms.get(&Monomial::new(exps.to_vec())).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn check(&self, o: &MPoly) -> Result<(), AlgError> {
        if self.vars == o.vars || *self.vars == *o.vars {
            Ok(())
        } else {
            Err(AlgError::TableMismatch(self.vars.to_string(), o.vars.to_string()))
        }
    }

    pub fn checked_add(&self, o: &MPoly) -> Result<MPoly, AlgError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn checked_sub(&self, o: &MPoly) -> Result<MPoly, AlgError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c.clone());
        }
        Ok(r)
    }

    pub fn checked_mul(&self, o: &MPoly) -> Result<MPoly, AlgError> {
        self.check(o)?;
        Ok(self.mul_with(o, ExecPolicy::default()))
    }

    /// Product; large products are split across threads under `Parallel`.
    pub fn mul_with(&self, o: &MPoly, policy: ExecPolicy) -> MPoly {
        assert!(self.check(o).is_ok(), "variable-table mismatch");
        if self.is_zero() || o.is_zero() {
            return MPoly::zero(&self.vars);
        }
        let (a, b) = if self.nterms() >= o.nterms() { (self, o) } else { (o, self) };
        let bt: Vec<(&Monomial, &Q)> = b.terms.iter().collect();
        let work = a.nterms() * b.nterms();
        let at: Vec<(&Monomial, &Q)> = a.terms.iter().collect();
        let partial = |chunk: &[(&Monomial, &Q)]| {
            let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(chunk.len() * bt.len());
            for (ma, ca) in chunk {
                for (mb, cb) in &bt {
                    let m = ma.mul(mb);
                    let c = *ca * *cb;
                    match acc.get_mut(&m) {
                        Some(v) => *v += c,
                        None => {
                            acc.insert(m, c);
                        }
                    }
                }
            }
            acc
        };
        let maps: Vec<HashMap<Monomial, Q>> = if work > 40_000 && policy == ExecPolicy::Parallel {
            let chunk = (at.len() / (4 * crate::exec::threads())).max(1);
            let chunks: Vec<&[(&Monomial, &Q)]> = at.chunks(chunk).collect();
            policy.map(&chunks, |c| partial(c))
        } else {
            vec![partial(&at)]
        };
        let mut r = MPoly::zero(&self.vars);
        for m in maps {
            for (k, v) in m {
                r.add_term(k, v);
            }
        }
        r
    }

    pub fn scale(&self, c: &Q) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(&self.vars);
        }
        MPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut result = MPoly::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Power with a signed exponent; negative exponents are rejected.
    pub fn pow_checked(&self, e: i64) -> Result<MPoly, AlgError> {
        if e < 0 {
            return Err(AlgError::NegativePower(e));
        }
        Ok(self.pow(e as u32))
    }

    pub fn partial(&self, i: usize) -> MPoly {
        let mut r = MPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exps[i];
            if e > 0 {
                r.add_term(m.with_exp(i, e - 1), c * q(e as i64));
            }
        }
        r
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.deg).max().unwrap_or(0)
    }

    /// Largest total degree in x, y.
    pub fn xy_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.xy_degree()).max().unwrap_or(0)
    }

    /// Smallest total degree in x, y among the stored terms.
    pub fn xy_order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.xy_degree()).min()
    }

    /// Part homogeneous of degree `d` in (x, y).
    pub fn xy_part(&self, d: u32) -> MPoly {
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.xy_degree() == d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn uses(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exps[i] > 0)
    }

    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.uses(i)).collect()
    }

    pub fn depends_on_xy(&self) -> bool {
        self.uses(0) || self.uses(1)
    }

    /// Coefficients with respect to variable `i`: entry k multiplies `v^k`.
    pub fn coeffs_in(&self, i: usize) -> Vec<MPoly> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![MPoly::zero(&self.vars); d + 1];
        for (m, c) in &self.terms {
            let e = m.exps[i] as usize;
            out[e].terms.insert(m.with_exp(i, 0), c.clone());
        }
        out
    }

    pub fn from_coeffs_in(vars: &Vars, i: usize, cs: &[MPoly]) -> MPoly {
        let mut r = MPoly::zero(vars);
        for (k, c) in cs.iter().enumerate() {
            for (m, v) in &c.terms {
                r.add_term(m.with_exp(i, m.exps[i] + k as u32), v.clone());
            }
        }
        r
    }

    /// Groups terms by their exponents on `mask` variables; the map value is the cofactor.
    pub fn group_by(&self, mask: &[bool]) -> BTreeMap<Vec<u32>, MPoly> {
        let mut out: BTreeMap<Vec<u32>, MPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u32> = m.exps.iter().zip(mask).map(|(e, &b)| if b { *e } else { 0 }).collect();
            let rest: Vec<u32> = m.exps.iter().zip(mask).map(|(e, &b)| if b { 0 } else { *e }).collect();
            out.entry(key).or_insert_with(|| MPoly::zero(&self.vars)).terms.insert(Monomial::new(rest), c.clone());
        }
        out
    }

    /// Replaces variable `i` by `val`.
    pub fn substitute(&self, i: usize, val: &MPoly) -> MPoly {
        if !self.uses(i) {
            return self.clone();
        }
        let cs = self.coeffs_in(i);
        // Horner in v
        let mut r = MPoly::zero(&self.vars);
        for c in cs.iter().rev() {
            r = &(&r * val) + c;
        }
        r
    }

    /// Replaces variable `i` by the rational number `v`.
    pub fn substitute_q(&self, i: usize, v: &Q) -> MPoly {
        let mut r = MPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exps[i];
            let f = if e == 0 { c.clone() } else { c * pow_q(v, e) };
            r.add_term(m.with_exp(i, 0), f);
        }
        r
    }

    /// Re-expresses the polynomial over another table containing every used symbol.
    pub fn lift(&self, to: &Vars) -> Result<MPoly, AlgError> {
        if *self.vars == **to {
            return Ok(MPoly { vars: to.clone(), terms: self.terms.clone() });
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for i in 0..self.vars.len() {
            map.push(to.index(self.vars.name(i)));
        }
        let mut r = MPoly::zero(to);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; to.len()];
            for (i, &k) in m.exps.iter().enumerate() {
                if k > 0 {
                    match map[i] {
                        Some(j) => e[j] = k,
                        None => {
                            return Err(AlgError::TableMismatch(self.vars.to_string(), to.to_string()));
                        }
                    }
                }
            }
            r.terms.insert(Monomial::new(e), c.clone());
        }
        Ok(r)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t *= point[i].powi(e as i32);
                }
            }
            s += t;
        }
        s
    }

    /// Leading term under the graded lex order.
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    /// Splits off a rational content: returns `(c, p)` with `self = c·p`, `p` having
    /// coprime integer coefficients and a positive leading coefficient.
    pub fn primitive(&self) -> (Q, MPoly) {
        if self.is_zero() {
            return (Q::one(), self.clone());
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            let v = (c * Q::from_integer(den.clone())).to_integer();
            num = num.gcd(&v);
        }
        let mut content = Q::new(num, den);
        if self.leading_coeff().is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content, self.scale(&inv))
    }

    pub fn primitive_part(&self) -> MPoly {
        self.primitive().1
    }

    /// Monic version (leading coefficient one); zero stays zero.
    pub fn monic(&self) -> MPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading_coeff().recip())
    }

    /// Exact quotient if `d` divides `self`, else `None`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        assert!(self.check(d).is_ok(), "variable-table mismatch");
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quo = MPoly::zero(&self.vars);
        while let Some((m, c)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = &c / &lc;
            for (dm, dc) in &d.terms {
                rem.add_term(dm.mul(&qm), -(dc * &qc));
            }
            quo.add_term(qm, qc);
        }
        Some(quo)
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let n = self.vars.len();
        let mut e: Option<Vec<u32>> = None;
        for m in self.terms.keys() {
            e = Some(match e {
                None => m.exps.clone(),
                Some(v) => v.iter().zip(&m.exps).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        Monomial::new(e.unwrap_or_else(|| vec![0; n]))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> MPoly {
        MPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect() }
    }

    pub fn with_vars_unchecked(&self, vars: &Vars) -> MPoly {
        MPoly { vars: vars.clone(), terms: self.terms.clone() }
    }

    fn fmt_with(&self, f: &mut impl fmt::Write, pretty: bool) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if pretty { self.vars.pretty(i) } else { self.vars.name(i) };
                factors.push(if e == 1 { name.to_string() } else { format!("{name}^{e}") });
            }
            if factors.is_empty() {
                write!(f, "{}", fmt_q(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", fmt_q(&a))?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }

    /// Text accepted back by the system parser (`eps` spelled out).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.fmt_with(&mut s, false).unwrap();
        s
    }
}

pub fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn pow_q(v: &Q, e: u32) -> Q {
    num_traits::pow(v.clone(), e as usize)
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, true)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&MPoly> for &MPoly {
            type Output = MPoly;
            fn $m(self, o: &MPoly) -> MPoly {
                self.$checked(o).expect("variable-table mismatch")
            }
        }
        impl $tr<MPoly> for MPoly {
            type Output = MPoly;
            fn $m(self, o: MPoly) -> MPoly {
                (&self).$checked(&o).expect("variable-table mismatch")
            }
        }
        impl $tr<&MPoly> for MPoly {
            type Output = MPoly;
            fn $m(self, o: &MPoly) -> MPoly {
                (&self).$checked(o).expect("variable-table mismatch")
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

/// Convenience constructor used throughout the tests: `x`, `y`, `eps` and parameters.
pub fn table(params: &[&str]) -> Vars {
    VarTable::new(params)
}
