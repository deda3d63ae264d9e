//! Dense univariate polynomials over the rationals with Sturm-sequence root
//! isolation. Used for exact sign-definiteness and direction finding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mpoly::{q, MPoly, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    /// Coefficients from the constant term upward, without trailing zeros.
    c: Vec<Q>,
}

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().map(|v| v.is_zero()).unwrap_or(false) {
            c.pop();
        }
        UPoly { c }
    }

    /// Univariate view of `p` in variable `i`; panics if other variables occur.
    pub fn from_mpoly(p: &MPoly, i: usize) -> Self {
        let mut c = vec![Q::zero(); p.degree_in(i) as usize + 1];
        for (m, v) in p.terms() {
            assert!(m.exps().iter().enumerate().all(|(j, &e)| j == i || e == 0), "not univariate");
            c[m.exp(i) as usize] += v;
        }
        UPoly::new(c)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut r = Q::zero();
        for v in self.c.iter().rev() {
            r = r * x + v;
        }
        r
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut r = 0.0;
        for v in self.c.iter().rev() {
            r = r * x + v.to_f64().unwrap_or(f64::NAN);
        }
        r
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.c.iter().enumerate().skip(1).map(|(k, v)| v * q(k as i64)).collect())
    }

    pub fn neg(&self) -> UPoly {
        UPoly { c: self.c.iter().map(|v| -v).collect() }
    }

    /// Remainder of division by a nonzero `d`.
    pub fn rem(&self, d: &UPoly) -> UPoly {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.c.clone();
        let ld = d.lead();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = &r[k] / &ld;
            for (j, dv) in d.c.iter().enumerate() {
                let idx = k - dd + j;
                r[idx] = &r[idx] - &f * dv;
            }
            r.pop();
            while r.last().map(|v| v.is_zero()).unwrap_or(false) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        UPoly { c: self.c.iter().map(|v| v / &l).collect() }
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Exact quotient by a divisor.
    pub fn div_exact(&self, d: &UPoly) -> UPoly {
        let dd = d.degree().expect("division by zero polynomial");
        if self.is_zero() {
            return self.clone();
        }
        let n = self.c.len() - 1;
        if n < dd {
            return UPoly::new(vec![]);
        }
        let mut r = self.c.clone();
        let mut quo = vec![Q::zero(); n - dd + 1];
        let ld = d.lead();
        for k in (dd..=n).rev() {
            let f = &r[k] / &ld;
            for (j, dv) in d.c.iter().enumerate() {
                r[k - dd + j] = &r[k - dd + j] - &f * dv;
            }
            quo[k - dd] = f;
        }
        UPoly::new(quo)
    }

    pub fn squarefree(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_exact(&g).monic()
    }

    fn sturm_chain(&self) -> Vec<UPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        chain
    }

    fn sign_changes(chain: &[UPoly], at: Option<&Q>, plus_inf: bool) -> usize {
        let mut signs = Vec::new();
        for p in chain {
            let s = match at {
                Some(x) => sign(&p.eval(x)),
                None => {
                    let d = p.degree().unwrap_or(0);
                    let l = sign(&p.lead());
                    if plus_inf || d % 2 == 0 {
                        l
                    } else {
                        -l
                    }
                }
            };
            if s != 0 {
                signs.push(s);
            }
        }
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`;
    /// `None` bounds mean ±∞.
    pub fn count_roots(&self, a: Option<&Q>, b: Option<&Q>) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.squarefree().sturm_chain();
        let va = Self::sign_changes(&chain, a, false);
        let vb = Self::sign_changes(&chain, b, true);
        va.saturating_sub(vb)
    }

    pub fn count_real_roots(&self) -> usize {
        self.count_roots(None, None)
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn root_bound(&self) -> Q {
        let l = self.lead().abs();
        let m = self.c.iter().map(|v| v.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a });
        Q::one() + m / l
    }

    /// Disjoint intervals `(a, b]` each containing exactly one real root,
    /// refined until their width is at most `width`.
    pub fn isolate_real_roots(&self, width: &Q) -> Vec<(Q, Q)> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let sf = self.squarefree();
        let chain = sf.sturm_chain();
        let count = |a: &Q, b: &Q| {
            Self::sign_changes(&chain, Some(a), false).saturating_sub(Self::sign_changes(&chain, Some(b), true))
        };
        let bnd = sf.root_bound();
        let mut stack = vec![(-bnd.clone(), bnd)];
        let mut out = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let n = count(&a, &b);
            if n == 0 {
                continue;
            }
            if n == 1 && &b - &a <= *width {
                out.push((a, b));
                continue;
            }
            let mid = (&a + &b) / q(2);
            stack.push((mid.clone(), b));
            stack.push((a, mid));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    /// Rational roots, found by testing rational-root-theorem candidates when the
    /// integer coefficients are small enough to enumerate divisors.
    pub fn rational_roots(&self) -> Vec<Q> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let mut p = self.squarefree();
        if p.c[0].is_zero() {
            out.push(Q::zero());
            p = UPoly::new(p.c[1..].to_vec());
        }
        if p.degree().unwrap_or(0) == 0 {
            return out;
        }
        let den = p.c.iter().fold(BigInt::one(), |a, v| a.lcm(v.denom()));
        let ints: Vec<BigInt> = p.c.iter().map(|v| (v * Q::from_integer(den.clone())).to_integer()).collect();
        let (Some(a0), Some(an)) = (ints[0].abs().to_u64(), ints.last().unwrap().abs().to_u64()) else {
            return out;
        };
        if a0 > 1_000_000_000 || an > 1_000_000_000 {
            return out;
        }
        for n in divisors(a0) {
            for d in divisors(an) {
                for s in [1i64, -1] {
                    let r = Q::new(BigInt::from(s) * BigInt::from(n), BigInt::from(d));
                    if p.eval(&r).is_zero() && !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
        }
        out.sort();
        out
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            v.push(i);
            if i != n / i {
                v.push(n / i);
            }
        }
        i += 1;
    }
    v
}

fn sign(v: &Q) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// Midpoint of an isolating interval refined to `f64` precision.
pub fn refine_root(p: &UPoly, a: &Q, b: &Q) -> f64 {
    let (mut lo, mut hi) = (a.clone(), b.clone());
    let sf = p.squarefree();
    if sf.eval(&hi).is_zero() {
        return hi.to_f64().unwrap_or(f64::NAN);
    }
    let shi = sign(&sf.eval(&hi));
    for _ in 0..200 {
        let mid = (&lo + &hi) / q(2);
        let s = sign(&sf.eval(&mid));
        if s == 0 {
            return mid.to_f64().unwrap_or(f64::NAN);
        }
        if s == shi {
            hi = mid;
        } else {
            lo = mid;
        }
        if (&hi - &lo).to_f64().unwrap_or(0.0).abs() < 1e-18 * (1.0 + hi.to_f64().unwrap_or(0.0).abs()) {
            break;
        }
    }
    ((&lo + &hi) / q(2)).to_f64().unwrap_or(f64::NAN)
}
