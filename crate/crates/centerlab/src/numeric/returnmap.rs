use std::f64::consts::PI;

use serde::Serialize;

use super::field::Field;
use super::ode::{single_step, Dopri5, OdeOptions, OdeStats, Segment, State};
use super::NumericError;
use crate::exec::ExecPolicy;
use crate::structure::{characteristic_directions, Direction, StructureError};
use crate::systems::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "angle", rename_all = "snake_case")]
pub enum Transversal {
    PositiveX,
    PositiveY,
    Ray(f64),
}

impl Transversal {
    pub fn angle(&self) -> f64 {
        match self {
            Transversal::PositiveX => 0.0,
            Transversal::PositiveY => PI / 2.0,
            Transversal::Ray(a) => *a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnClass {
    CenterEvidence,
    StableFocusEvidence,
    UnstableFocusEvidence,
    Inconclusive,
}

impl ReturnClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReturnClass::CenterEvidence => "center_evidence",
            ReturnClass::StableFocusEvidence => "stable_focus_evidence",
            ReturnClass::UnstableFocusEvidence => "unstable_focus_evidence",
            ReturnClass::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnSample {
    pub x0: f64,
    pub image: f64,
    pub displacement: f64,
    pub return_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapOptions {
    pub ode: OdeOptions,
    pub guard_radius: f64,
    pub max_revolutions: f64,
}

impl Default for ReturnMapOptions {
    fn default() -> Self {
        ReturnMapOptions { ode: OdeOptions::default(), guard_radius: 1.0, max_revolutions: 3.0 }
    }
}

impl ReturnMapOptions {
    /// Displacements below `threshold·x₀` count as zero.
    pub fn threshold(&self) -> f64 {
        (1e2 * self.ode.rtol).max(1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnMapResult {
    pub transversal: Transversal,
    pub samples: Vec<ReturnSample>,
    pub classification: ReturnClass,
    pub threshold: f64,
    pub stats: OdeStats,
}

/// Single return from `x0` on the ray at angle `phi`.
fn one_return(f: &Field, x0: f64, phi: f64, opts: &ReturnMapOptions) -> Result<(ReturnSample, OdeStats), NumericError> {
    let (sp, cp) = phi.sin_cos();
    // g: signed distance across the ray, rho: coordinate along it
    let g = |z: &State| -sp * z[0] + cp * z[1];
    let rho = |z: &State| cp * z[0] + sp * z[1];
    let z0 = [x0 * cp, x0 * sp];
    let v0 = f.eval(z0);
    let gdot = -sp * v0[0] + cp * v0[1];
    if gdot == 0.0 || !gdot.is_finite() {
        return Err(NumericError::NonTransversal { x0 });
    }
    let side = gdot.signum();
    let rhs = |_t: f64, z: State| f.eval(z);
    let mut st = Dopri5::new(&rhs, 0.0, z0, 1.0, opts.ode);
    let mut winding = 0.0;
    let mut prev_angle = z0[1].atan2(z0[0]);
    let mut left = false;
    loop {
        let seg = st.step(f64::INFINITY)?;
        let y = seg.y1;
        if y[0].hypot(y[1]) > opts.guard_radius {
            return Err(NumericError::Escaped { x0, t: seg.t1(), radius: opts.guard_radius });
        }
        let a = y[1].atan2(y[0]);
        let mut d = a - prev_angle;
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        winding += d;
        prev_angle = a;
        if winding.abs() > 2.0 * PI * opts.max_revolutions {
            return Err(NumericError::MaxRevolutions { x0, revolutions: opts.max_revolutions });
        }
        let g0 = g(&seg.y0) * side;
        let g1 = g(&y) * side;
        if !left {
            left = g1 > 0.0;
            if !left {
                continue;
            }
            if g0 >= 0.0 {
                continue;
            }
        }
        if g0 < 0.0 && g1 >= 0.0 {
            let tc = refine_crossing(&seg, &g, side);
            let zc = single_step(&rhs, seg.t0, seg.y0, seg.f0, tc - seg.t0);
            // one Newton correction along the flow
            let v = f.eval(zc);
            let gd = -sp * v[0] + cp * v[1];
            let dt = if gd != 0.0 { -g(&zc) / gd } else { 0.0 };
            let zc = [zc[0] + dt * v[0], zc[1] + dt * v[1]];
            let r = rho(&zc);
            if r > 0.0 {
                let sample = ReturnSample { x0, image: r, displacement: r - x0, return_time: tc + dt };
                return Ok((sample, st.stats));
            }
        }
    }
}

/// Root of `g` on the dense output of `seg`, to `1e-12` in the crossing coordinate.
fn refine_crossing(seg: &Segment, g: &impl Fn(&State) -> f64, side: f64) -> f64 {
    let h = |t: f64| g(&seg.eval(t)) * side;
    let (mut a, mut b) = (seg.t0, seg.t1());
    let (mut fa, mut fb) = (g(&seg.y0) * side, g(&seg.y1) * side);
    if fb == 0.0 {
        return b;
    }
    // Illinois regula falsi
    let mut last = 0;
    for _ in 0..200 {
        let c = b - fb * (b - a) / (fb - fa);
        let c = if c.is_finite() && (c - a) * (c - b) < 0.0 { c } else { 0.5 * (a + b) };
        let fc = h(c);
        if fc.abs() <= 1e-12 || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if last == -1 {
                fb *= 0.5;
            }
            last = -1;
        } else {
            b = c;
            fb = fc;
            if last == 1 {
                fa *= 0.5;
            }
            last = 1;
        }
    }
    0.5 * (a + b)
}

fn classify(samples: &[ReturnSample], threshold: f64) -> ReturnClass {
    if samples.is_empty() {
        return ReturnClass::Inconclusive;
    }
    if samples.iter().all(|s| s.displacement.abs() <= threshold * s.x0) {
        return ReturnClass::CenterEvidence;
    }
    if samples.iter().all(|s| s.displacement < -threshold * s.x0) {
        return ReturnClass::StableFocusEvidence;
    }
    if samples.iter().all(|s| s.displacement > threshold * s.x0) {
        return ReturnClass::UnstableFocusEvidence;
    }
    ReturnClass::Inconclusive
}

/// Poincaré map on a ray through the origin.
pub fn return_map<S: VectorField + ?Sized>(s: &S, x0s: &[f64], transversal: Transversal) -> Result<ReturnMapResult, NumericError> {
    return_map_with(s, x0s, transversal, &ReturnMapOptions::default(), ExecPolicy::default())
}

pub fn return_map_with<S: VectorField + ?Sized>(
    s: &S,
    x0s: &[f64],
    transversal: Transversal,
    opts: &ReturnMapOptions,
    policy: ExecPolicy,
) -> Result<ReturnMapResult, NumericError> {
    opts.ode.validate()?;
    let f = Field::new(s)?;
    if let Some(&bad) = x0s.iter().find(|&&x| !(x > 0.0 && x < opts.guard_radius)) {
        return Err(NumericError::BadStart { x0: bad });
    }
    let phi = transversal.angle();
    let runs = policy.map(x0s, |&x0| one_return(&f, x0, phi, opts));
    let mut samples = Vec::with_capacity(runs.len());
    let mut stats = OdeStats::default();
    for r in runs {
        let (smp, st) = r?;
        samples.push(smp);
        stats.merge(&st);
    }
    let threshold = opts.threshold();
    let classification = classify(&samples, threshold);
    Ok(ReturnMapResult { transversal, samples, classification, threshold, stats })
}

/// Candidate characteristic directions next to return-map evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromicReport {
    pub directions: Option<Vec<Direction>>,
    pub direction_note: Option<String>,
    pub return_map: ReturnMapResult,
    pub verdict: ReturnClass,
}

pub const DEFAULT_X0: [f64; 3] = [0.02, 0.05, 0.1];

pub fn classify_monodromic<S: VectorField + ?Sized>(s: &S) -> Result<MonodromicReport, NumericError> {
    classify_monodromic_with(s, &DEFAULT_X0, Transversal::PositiveX, &ReturnMapOptions::default(), ExecPolicy::default())
}

pub fn classify_monodromic_with<S: VectorField + ?Sized>(
    s: &S,
    x0s: &[f64],
    transversal: Transversal,
    opts: &ReturnMapOptions,
    policy: ExecPolicy,
) -> Result<MonodromicReport, NumericError> {
    let (directions, direction_note) = match characteristic_directions(s) {
        Ok(d) => (Some(d), None),
        Err(StructureError::AllDirections) => (None, Some("x*Q - y*P vanishes identically".to_string())),
        Err(e) => (None, Some(e.to_string())),
    };
    let rm = return_map_with(s, x0s, transversal, opts, policy)?;
    Ok(MonodromicReport { directions, direction_note, verdict: rm.classification, return_map: rm })
}
