//! Dormand–Prince 5(4) with the standard continuous extension.

use serde::Serialize;

use super::NumericError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000, h_max: f64::INFINITY }
    }
}

impl OdeOptions {
    pub fn tolerances(rtol: f64, atol: f64) -> Self {
        OdeOptions { rtol, atol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        let ok = |v: f64| v > 0.0 && v <= 1e-4;
        if !ok(self.rtol) || !ok(self.atol) {
            return Err(NumericError::BadTolerance { rtol: self.rtol, atol: self.atol });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn merge(&mut self, o: &OdeStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// One accepted step with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    pub y0: State,
    pub y1: State,
    pub f0: State,
    pub f1: State,
    r: [State; 5],
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Continuous extension, fourth order in `h`.
    pub fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }

    /// Cubic Hermite interpolant from the endpoint values and slopes.
    pub fn hermite(&self, t: f64) -> State {
        let s = (t - self.t0) / self.h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        std::array::from_fn(|i| h00 * self.y0[i] + h10 * self.h * self.f0[i] + h01 * self.y1[i] + h11 * self.h * self.f1[i])
    }
}

/// Stepper holding the first-same-as-last stage.
pub struct Dopri5<F: Fn(f64, State) -> State> {
    f: F,
    opts: OdeOptions,
    t: f64,
    y: State,
    k1: State,
    h: f64,
    dir: f64,
    pub stats: OdeStats,
    closest: f64,
    rejected_last: bool,
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn norm(v: &State) -> f64 {
    v[0].hypot(v[1])
}

impl<F: Fn(f64, State) -> State> Dopri5<F> {
    /// `dir` is the sign of the time direction.
    pub fn new(f: F, t0: f64, y0: State, dir: f64, opts: OdeOptions) -> Self {
        let k1 = f(t0, y0);
        let mut s = Dopri5 { f, opts, t: t0, y: y0, k1, h: 0.0, dir: dir.signum(), stats: OdeStats { evaluations: 1, ..Default::default() }, closest: norm(&y0), rejected_last: false };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> State {
        self.y
    }

    fn scale(&self, a: &State, b: &State, i: usize) -> f64 {
        self.opts.atol + self.opts.rtol * a[i].abs().max(b[i].abs())
    }

    fn initial_step(&mut self) -> f64 {
        let sc: State = std::array::from_fn(|i| self.opts.atol + self.opts.rtol * self.y[i].abs());
        let d0 = ((self.y[0] / sc[0]).powi(2) + (self.y[1] / sc[1]).powi(2)).sqrt() / 2f64.sqrt();
        let d1 = ((self.k1[0] / sc[0]).powi(2) + (self.k1[1] / sc[1]).powi(2)).sqrt() / 2f64.sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.opts.h_max);
        let y1 = axpy(&self.y, self.dir * h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(self.t + self.dir * h0, y1);
        self.stats.evaluations += 1;
        let d2 = (((f1[0] - self.k1[0]) / sc[0]).powi(2) + ((f1[1] - self.k1[1]) / sc[1]).powi(2)).sqrt() / 2f64.sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Advances by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<Segment, NumericError> {
        loop {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(NumericError::MaxSteps { t: self.t, steps: self.opts.max_steps });
            }
            let remaining = (t_end - self.t) * self.dir;
            let mut h = self.h.min(self.opts.h_max);
            let last = remaining <= h * (1.0 + 1e-12);
            if last {
                h = remaining;
            }
            let hmin = 16.0 * f64::EPSILON * self.t.abs().max(1e-300);
            if h.abs() <= hmin {
                return Err(NumericError::StepUnderflow { t: self.t, closest: self.closest });
            }
            let hs = self.dir * h;
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &self.f;
            let k2 = f(t + C2 * hs, axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(t + C3 * hs, axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hs, axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * hs, axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + hs, axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t + hs, y1);
            self.stats.evaluations += 6;
            let errv = axpy(&[0.0; 2], hs, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
            let err = ((0..2).map(|i| (errv[i] / self.scale(&y, &y1, i)).powi(2)).sum::<f64>() / 2.0).sqrt();
            if !err.is_finite() || !y1[0].is_finite() || !y1[1].is_finite() {
                self.stats.rejected += 1;
                self.rejected_last = true;
                self.h *= 0.2;
                continue;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.stats.accepted += 1;
                let ydiff: State = std::array::from_fn(|i| y1[i] - y[i]);
                let bspl: State = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
                let r = [
                    y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                    std::array::from_fn(|i| hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])),
                ];
                let seg = Segment { t0: t, h: hs, y0: y, y1, f0: k1, f1: k7, r };
                self.t = if last { t_end } else { t + hs };
                self.y = y1;
                self.k1 = k7;
                self.closest = self.closest.min(norm(&y1));
                if !last {
                    self.h = h * if self.rejected_last { fac.min(1.0) } else { fac };
                }
                self.rejected_last = false;
                return Ok(seg);
            }
            self.stats.rejected += 1;
            self.rejected_last = true;
            self.h = h * fac.min(1.0);
        }
    }

    pub fn eval_field(&self, t: f64, y: State) -> State {
        (self.f)(t, y)
    }
}

/// One unconditional step of size `hs` from `(t, y)` with `k1 = f(t, y)`, used
/// to land exactly on event times inside an accepted step.
pub fn single_step<F: Fn(f64, State) -> State>(f: &F, t: f64, y: State, k1: State, hs: f64) -> State {
    let k2 = f(t + C2 * hs, axpy(&y, hs, &[(A21, &k1)]));
    let k3 = f(t + C3 * hs, axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * hs, axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * hs, axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + hs, axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)])
}

/// Accepted steps of one integration, with dense evaluation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.segments.first().map(|s| s.t0).unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map(|s| s.t1()).unwrap_or(0.0)
    }

    pub fn end(&self) -> State {
        self.segments.last().map(|s| s.y1).unwrap_or([f64::NAN; 2])
    }

    /// Knot times and states.
    pub fn knots(&self) -> Vec<(f64, State)> {
        let mut out: Vec<(f64, State)> = self.segments.first().map(|s| vec![(s.t0, s.y0)]).unwrap_or_default();
        out.extend(self.segments.iter().map(|s| (s.t1(), s.y1)));
        out
    }

    pub fn eval(&self, t: f64) -> Option<State> {
        let fwd = self.segments.first()?.h > 0.0;
        let i = self.segments.partition_point(|s| if fwd { s.t1() < t } else { s.t1() > t });
        let s = self.segments.get(i.min(self.segments.len() - 1))?;
        let (lo, hi) = if fwd { (s.t0, s.t1()) } else { (s.t1(), s.t0) };
        let eps = 1e-12 * (1.0 + t.abs());
        (t >= lo - eps && t <= hi + eps).then(|| s.eval(t))
    }
}

/// Integrates `f` over `t_span` (either direction).
pub fn integrate<F: Fn(f64, State) -> State>(f: F, y0: State, t_span: (f64, f64), opts: OdeOptions) -> Result<Trajectory, NumericError> {
    opts.validate()?;
    let (t0, t1) = t_span;
    let mut st = Dopri5::new(f, t0, y0, (t1 - t0).signum(), opts);
    let mut segments = Vec::new();
    while st.t() != t1 {
        segments.push(st.step(t1)?);
    }
    Ok(Trajectory { segments, stats: st.stats })
}
