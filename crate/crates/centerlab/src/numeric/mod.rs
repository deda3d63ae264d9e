//! Adaptive integration, singular-point location and Poincaré return maps.

mod field;
mod ode;
mod returnmap;
mod roots;

pub use field::{Field, Poly2};
pub use ode::{integrate, single_step, Dopri5, OdeOptions, OdeStats, Segment, State, Trajectory};
pub use returnmap::{
    classify_monodromic, classify_monodromic_with, return_map, return_map_with, MonodromicReport, ReturnClass, ReturnMapOptions,
    ReturnMapResult, ReturnSample, Transversal, DEFAULT_X0,
};
pub use roots::{newton_lm, singular_points};

use thiserror::Error;

use crate::systems::VectorField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("system is not numeric: free symbols {0:?}")]
    NotNumeric(Vec<String>),
    #[error("tolerances must lie in (0, 1e-4]: rtol={rtol}, atol={atol}")]
    BadTolerance { rtol: f64, atol: f64 },
    #[error("step size underflow at t={t}; closest approach to the origin {closest:e}")]
    StepUnderflow { t: f64, closest: f64 },
    #[error("step budget of {steps} exhausted at t={t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("orbit from x0={x0} left the guard radius {radius} at t={t}")]
    Escaped { x0: f64, t: f64, radius: f64 },
    #[error("orbit from x0={x0} wound {revolutions} times without returning to the transversal")]
    MaxRevolutions { x0: f64, revolutions: f64 },
    #[error("flow is tangent to the transversal at x0={x0}")]
    NonTransversal { x0: f64 },
    #[error("start point x0={x0} must be positive and inside the guard radius")]
    BadStart { x0: f64 },
}

/// Integrates a parameter-free system over `t_span`.
pub fn integrate_adaptive<S: VectorField + ?Sized>(s: &S, state0: State, t_span: (f64, f64), rtol: f64, atol: f64) -> Result<Trajectory, NumericError> {
    let f = Field::new(s)?;
    integrate(|_, z| f.eval(z), state0, t_span, OdeOptions::tolerances(rtol, atol))
}
