use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gcd::gcd;
use super::mpoly::{MPoly, Q};
use super::vars::Vars;
use super::AlgError;

/// Reduced quotient of two polynomials.
///
/// Canonical form: `gcd(num, den)` is a unit, `den` has coprime integer
/// coefficients and a positive leading coefficient, zero is `0/1`.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MPoly,
    den: MPoly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc(({}) / ({}))", self.num.to_text(), self.den.to_text())
    }
}

impl RatFunc {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, AlgError> {
        if den.is_zero() {
            return Err(AlgError::ZeroDenominator);
        }
        if num.vars() != den.vars() && **num.vars() != **den.vars() {
            return Err(AlgError::TableMismatch(num.vars().to_string(), den.vars().to_string()));
        }
        Ok(Self::normalize(num, den))
    }

    pub fn from_poly(p: MPoly) -> Self {
        let den = MPoly::one(p.vars());
        RatFunc { num: p, den }
    }

    pub fn zero(vars: &Vars) -> Self {
        Self::from_poly(MPoly::zero(vars))
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        Self::from_poly(MPoly::constant(vars, c))
    }

    fn normalize(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return Self::zero(num.vars());
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        };
        let (c, den) = den.primitive();
        let num = num.scale(&c.recip());
        RatFunc { num, den }
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn inv(&self) -> Result<Self, AlgError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    /// Equality as formal quotients by cross-multiplication.
    pub fn cross_eq(&self, o: &RatFunc) -> bool {
        (&self.num * &o.den) == (&o.num * &self.den)
    }

    /// `Some(c)` when `self = c · o` for a rational constant `c`.
    pub fn ratio_constant(&self, o: &RatFunc) -> Option<Q> {
        if o.is_zero() {
            return None;
        }
        let r = self / o;
        if r.num.is_constant() && r.den.is_constant() {
            Some(r.num.constant_value().unwrap() / r.den.constant_value().unwrap())
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        if c.is_zero() {
            return Self::zero(self.vars());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &MPoly) -> RatFunc {
        Self::normalize(&self.num * p, self.den.clone())
    }

    pub fn partial(&self, i: usize) -> RatFunc {
        if !self.den.uses(i) {
            return RatFunc { num: self.num.partial(i), den: self.den.clone() };
        }
        let n = &(&self.num.partial(i) * &self.den) - &(&self.num * &self.den.partial(i));
        Self::normalize(n, self.den.pow(2))
    }

    /// Substitutes variable `i` by a rational function.
    pub fn substitute(&self, i: usize, val: &RatFunc) -> RatFunc {
        let n = subst_poly(&self.num, i, val);
        let d = subst_poly(&self.den, i, val);
        &n / &d
    }

    pub fn substitute_q(&self, i: usize, v: &Q) -> Result<RatFunc, AlgError> {
        RatFunc::new(self.num.substitute_q(i, v), self.den.substitute_q(i, v))
    }

    pub fn lift(&self, to: &Vars) -> Result<RatFunc, AlgError> {
        Ok(RatFunc { num: self.num.lift(to)?, den: self.den.lift(to)? })
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn depends_on_xy(&self) -> bool {
        self.num.depends_on_xy() || self.den.depends_on_xy()
    }

    pub fn to_text(&self) -> String {
        if self.den.is_one() {
            self.num.to_text()
        } else {
            format!("({})/({})", self.num.to_text(), self.den.to_text())
        }
    }
}

/// `p(val)` for a polynomial `p` and rational-function value of variable `i`.
fn subst_poly(p: &MPoly, i: usize, val: &RatFunc) -> RatFunc {
    if !p.uses(i) {
        return RatFunc::from_poly(p.clone());
    }
    if val.is_polynomial() {
        let v = val.num.scale(&val.den.constant_value().unwrap().recip());
        return RatFunc::from_poly(p.substitute(i, &v));
    }
    // p = Σ c_k v^k  ->  Σ c_k f^k g^(K-k) / g^K
    let cs = p.coeffs_in(i);
    let k = cs.len() - 1;
    let mut num = MPoly::zero(p.vars());
    let mut fpow = MPoly::one(p.vars());
    let gpows: Vec<MPoly> = (0..=k).map(|e| val.den.pow(e as u32)).collect();
    for (e, c) in cs.iter().enumerate() {
        if !c.is_zero() {
            num = &num + &(&(c * &fpow) * &gpows[k - e]);
        }
        fpow = &fpow * &val.num;
    }
    RatFunc::normalize(num, gpows[k].clone())
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFunc::normalize(&self.num + &o.num, self.den.clone());
        }
        let g = gcd(&self.den, &o.den);
        let da = self.den.div_exact(&g).unwrap();
        let db = o.den.div_exact(&g).unwrap();
        let num = &(&self.num * &db) + &(&o.num * &da);
        RatFunc::normalize(num, &da * &o.den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero(self.vars());
        }
        // cross-cancel before multiplying
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let (c, den) = (&d1 * &d2).primitive();
        RatFunc { num: (&n1 * &n2).scale(&c.recip()), den }
    }
}

impl Div<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &RatFunc) -> RatFunc {
        self * &o.inv().expect("division by zero rational function")
    }
}

macro_rules! owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc {
                (&self).$m(&o)
            }
        }
    };
}
owned!(Add, add);
owned!(Sub, sub);
owned!(Mul, mul);
owned!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl RatFunc {
    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Q> {
        if self.den.is_constant() {
            self.num.constant_value().map(|c| c / self.den.constant_value().unwrap())
        } else {
            None
        }
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Q::one())
    }
}
