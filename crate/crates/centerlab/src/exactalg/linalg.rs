use super::gcd::lcm;
use super::mpoly::MPoly;
use super::ratfunc::RatFunc;
use super::AlgError;

/// Output of fraction-free Gauss–Jordan on `[A | B]`.
#[derive(Debug, Clone)]
pub struct BareissResult {
    /// Common diagonal left in place of `A`; equals `±det(A)`.
    pub diag: MPoly,
    /// `det(A)`.
    pub det: MPoly,
    /// `diag · A⁻¹ · B`, polynomial.
    pub x: Vec<Vec<MPoly>>,
}

/// Fraction-free Gauss–Jordan elimination. Every intermediate division is exact,
/// so the only rational step left to the caller is the final division by `diag`.
pub fn bareiss_gauss_jordan(a: &[Vec<MPoly>], b: &[Vec<MPoly>]) -> Result<BareissResult, AlgError> {
    let n = a.len();
    if n == 0 {
        return Err(AlgError::Shape("empty matrix".into()));
    }
    if a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(AlgError::Shape(format!("expected {n}x{n} system")));
    }
    let m = b[0].len();
    if b.iter().any(|r| r.len() != m) {
        return Err(AlgError::Shape("ragged right-hand side".into()));
    }
    let vars = a[0][0].vars().clone();
    let mut mat: Vec<Vec<MPoly>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb.iter()).cloned().collect())
        .collect();
    let cols = n + m;
    let mut prev = MPoly::one(&vars);
    let mut negate = false;
    for k in 0..n {
        let pivot = (k..n).filter(|&r| !mat[r][k].is_zero()).min_by_key(|&r| mat[r][k].nterms());
        let Some(r) = pivot else {
            return Err(AlgError::Singular);
        };
        if r != k {
            mat.swap(r, k);
            negate = !negate;
        }
        let pk = mat[k].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let f = row[k].clone();
            for j in 0..cols {
                if j == k {
                    continue;
                }
                let t = &(&pk[k] * &row[j]) - &(&f * &pk[j]);
                row[j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
            row[k] = MPoly::zero(&vars);
        }
        prev = pk[k].clone();
    }
    let diag = mat[n - 1][n - 1].clone();
    let det = if negate { -&diag } else { diag.clone() };
    let x = mat.into_iter().map(|r| r[n..].to_vec()).collect();
    Ok(BareissResult { diag, det, x })
}

/// Determinant of a square polynomial matrix (zero when singular).
pub fn det(a: &[Vec<MPoly>]) -> Result<MPoly, AlgError> {
    let n = a.len();
    let vars = a.first().and_then(|r| r.first()).map(|p| p.vars().clone()).ok_or_else(|| AlgError::Shape("empty matrix".into()))?;
    let b: Vec<Vec<MPoly>> = (0..n).map(|_| vec![MPoly::zero(&vars)]).collect();
    match bareiss_gauss_jordan(a, &b) {
        Ok(r) => Ok(r.det),
        Err(AlgError::Singular) => Ok(MPoly::zero(&vars)),
        Err(e) => Err(e),
    }
}

/// Solves `A·x = rhs` over the field of rational functions.
///
/// Rows are cleared of denominators, eliminated fraction-free, and divided once
/// at the end. A determinant vanishing only at isolated parameter values is not an
/// error; the solution then carries those poles.
pub fn linsolve_fraction_field(a: &[Vec<RatFunc>], rhs: &[RatFunc]) -> Result<Vec<RatFunc>, AlgError> {
    let n = a.len();
    if n == 0 || rhs.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(AlgError::Shape(format!("expected square system with {} right-hand entries", rhs.len())));
    }
    let mut pa = Vec::with_capacity(n);
    let mut pb = Vec::with_capacity(n);
    for (row, r) in a.iter().zip(rhs) {
        let mut l = r.den().clone();
        for e in row {
            l = lcm(&l, e.den());
        }
        let conv = |e: &RatFunc| &e.num().clone() * &l.div_exact(e.den()).expect("lcm divides");
        pa.push(row.iter().map(conv).collect::<Vec<_>>());
        pb.push(vec![conv(r)]);
    }
    let res = bareiss_gauss_jordan(&pa, &pb)?;
    res.x.into_iter().map(|r| RatFunc::new(r[0].clone(), res.diag.clone())).collect()
}
