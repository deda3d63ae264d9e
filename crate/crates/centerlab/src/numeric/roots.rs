use super::field::Field;
use crate::exec::ExecPolicy;

/// Damped Gauss–Newton (Levenberg–Marquardt) on `F(z) = 0`; works on curves of
/// singular points as well as isolated ones.
pub fn newton_lm(f: &Field, z0: [f64; 2], tol: f64, max_iter: usize) -> Option<[f64; 2]> {
    let mut z = z0;
    let mut lambda = 1e-3;
    let norm = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let (mut fz, mut j) = f.eval_jac(z);
    for _ in 0..max_iter {
        let r = norm(fz);
        if r <= tol {
            return Some(z);
        }
        // (JᵀJ + λ diag) δ = −Jᵀ F
        let a11 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
        let a12 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
        let a22 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
        let g1 = j[0][0] * fz[0] + j[1][0] * fz[1];
        let g2 = j[0][1] * fz[0] + j[1][1] * fz[1];
        let scale = a11.max(a22).max(1e-300);
        let m11 = a11 + lambda * scale;
        let m22 = a22 + lambda * scale;
        let det = m11 * m22 - a12 * a12;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d = [-(m22 * g1 - a12 * g2) / det, -(m11 * g2 - a12 * g1) / det];
        let zn = [z[0] + d[0], z[1] + d[1]];
        let (fn_, jn) = f.eval_jac(zn);
        if norm(fn_) < r && norm(fn_).is_finite() {
            z = zn;
            fz = fn_;
            j = jn;
            lambda = (lambda * 0.1).max(1e-15);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                return None;
            }
        }
    }
    (norm(fz) <= tol).then_some(z)
}

/// Singular points found from a grid of starts inside the disk of the given
/// radius, deduplicated to `dedup` distance.
pub fn singular_points(f: &Field, radius: f64, grid: usize, policy: ExecPolicy) -> Vec<[f64; 2]> {
    let mut starts = Vec::new();
    for i in 0..grid {
        for k in 0..grid {
            let x = -radius + 2.0 * radius * (i as f64 + 0.5) / grid as f64;
            let y = -radius + 2.0 * radius * (k as f64 + 0.5) / grid as f64;
            if x * x + y * y <= radius * radius {
                starts.push([x, y]);
            }
        }
    }
    let found = policy.map(&starts, |&z0| newton_lm(f, z0, 1e-13, 200));
    let dedup = 1e-7 * radius.max(1e-300);
    let mut out: Vec<[f64; 2]> = Vec::new();
    for z in found.into_iter().flatten() {
        if z[0].hypot(z[1]) > radius {
            continue;
        }
        if out.iter().all(|w| (w[0] - z[0]).hypot(w[1] - z[1]) > dedup) {
            out.push(z);
        }
    }
    out
}
