//! Center/focus analysis for planar polynomial vector fields.
//!
//! The crate is organised bottom-up: [`exactalg`] provides exact polynomial and
//! rational-function arithmetic, [`systems`] models the vector field, and the
//! remaining modules implement the Liapunov-constant engine, the perturbation
//! families, structural tests, the quasi-homogeneous criteria and a numeric
//! return-map cross-check.

pub mod exactalg;
pub mod exec;
pub mod liapunov;
pub mod numeric;
pub mod perturb;
pub mod qhomog;
pub mod structure;
pub mod systems;

pub use exec::ExecPolicy;
