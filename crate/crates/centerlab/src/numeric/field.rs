use num_traits::ToPrimitive;

use super::NumericError;
use crate::exactalg::{MPoly, X, Y};
use crate::systems::VectorField;

/// Parameter-free polynomial in x, y as a flat `f64` term list.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    pub terms: Vec<(f64, i32, i32)>,
}

impl Poly2 {
    pub fn from_mpoly(p: &MPoly) -> Result<Self, NumericError> {
        let mut terms = Vec::with_capacity(p.nterms());
        for (m, c) in p.terms() {
            if m.exps().iter().enumerate().any(|(i, &e)| i != X && i != Y && e > 0) {
                let free: Vec<String> = p.used_vars().into_iter().filter(|&i| i != X && i != Y).map(|i| p.vars().name(i).to_string()).collect();
                return Err(NumericError::NotNumeric(free));
            }
            terms.push((c.to_f64().unwrap_or(f64::NAN), m.exp(X) as i32, m.exp(Y) as i32));
        }
        Ok(Poly2 { terms })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(c, i, j)| c * x.powi(i) * y.powi(j)).sum()
    }

    /// Value and gradient.
    pub fn eval_grad(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for &(c, i, j) in &self.terms {
            let xi = x.powi(i);
            let yj = y.powi(j);
            v += c * xi * yj;
            if i > 0 {
                gx += c * i as f64 * x.powi(i - 1) * yj;
            }
            if j > 0 {
                gy += c * j as f64 * xi * y.powi(j - 1);
            }
        }
        (v, gx, gy)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Numeric vector field `(P, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub p: Poly2,
    pub q: Poly2,
}

impl Field {
    pub fn new<S: VectorField + ?Sized>(s: &S) -> Result<Self, NumericError> {
        let p = Poly2::from_mpoly(s.p());
        let q = Poly2::from_mpoly(s.q());
        match (p, q) {
            (Ok(p), Ok(q)) => Ok(Field { p, q }),
            _ => Err(NumericError::NotNumeric(s.free_symbols())),
        }
    }

    #[inline]
    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        [self.p.eval(z[0], z[1]), self.q.eval(z[0], z[1])]
    }

    /// Field value and Jacobian rows.
    pub fn eval_jac(&self, z: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let (p, px, py) = self.p.eval_grad(z[0], z[1]);
        let (q, qx, qy) = self.q.eval_grad(z[0], z[1]);
        ([p, q], [[px, py], [qx, qy]])
    }
}
