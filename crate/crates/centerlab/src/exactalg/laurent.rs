use super::mpoly::MPoly;
use super::ratfunc::RatFunc;
use super::vars::EPS;
use super::AlgError;

/// Laurent coefficients of a rational function at `eps = 0`.
#[derive(Debug, Clone)]
pub struct LaurentExpansion {
    /// `(j, c_j)` for every exponent from the lowest present up to the requested order.
    pub terms: Vec<(i64, RatFunc)>,
    /// `u(0)` when it depends on parameters: the expansion assumes it is nonzero.
    pub side_condition: Option<MPoly>,
}

impl LaurentExpansion {
    pub fn lowest_order(&self) -> Option<i64> {
        self.terms.iter().find(|(_, c)| !c.is_zero()).map(|(j, _)| *j)
    }

    pub fn coefficient(&self, j: i64) -> Option<&RatFunc> {
        self.terms.iter().find(|(k, _)| *k == j).map(|(_, c)| c)
    }

    /// Nonzero coefficients only.
    pub fn nonzero(&self) -> impl Iterator<Item = &(i64, RatFunc)> {
        self.terms.iter().filter(|(_, c)| !c.is_zero())
    }
}

fn eps_valuation(p: &MPoly) -> u32 {
    p.terms().map(|(m, _)| m.exp(EPS)).min().unwrap_or(0)
}

/// Expands `f = Σ c_j eps^j + O(eps^(order+1))`. The denominator is split as
/// `eps^v · u(eps)` with `u(0) ≠ 0`; a parameter-dependent `u(0)` is returned as
/// a side condition and the coefficients carry it in their denominators.
pub fn laurent_expand_eps(f: &RatFunc, order: i64) -> Result<LaurentExpansion, AlgError> {
    if f.depends_on_xy() {
        return Err(AlgError::StateDependent);
    }
    let vars = f.vars().clone();
    if f.is_zero() {
        return Ok(LaurentExpansion { terms: vec![], side_condition: None });
    }
    let v = eps_valuation(f.den()) as i64;
    let w = eps_valuation(f.num()) as i64;
    let u = f.den().coeffs_in(EPS);
    let n = f.num().coeffs_in(EPS);
    let u0 = u[v as usize].clone();
    if u0.is_zero() {
        return Err(AlgError::LaurentUndefined(f.den().to_text()));
    }
    let side_condition = if u0.is_constant() { None } else { Some(u0.primitive_part()) };
    let u0r = RatFunc::from_poly(u0);
    let start = w - v;
    let mut terms = Vec::new();
    let mut cs: Vec<RatFunc> = Vec::new();
    let mut k = 0i64;
    while start + k <= order {
        // n(eps)/u(eps) with both shifted to start at eps^0
        let nk = n.get((w + k) as usize).cloned().unwrap_or_else(|| MPoly::zero(&vars));
        let mut acc = RatFunc::from_poly(nk);
        for j in 1..=k {
            if let Some(uj) = u.get((v + j) as usize) {
                if !uj.is_zero() {
                    acc = &acc - &cs[(k - j) as usize].mul_poly(uj);
                }
            }
        }
        let c = &acc / &u0r;
        terms.push((start + k, c.clone()));
        cs.push(c);
        k += 1;
    }
    Ok(LaurentExpansion { terms, side_condition })
}
