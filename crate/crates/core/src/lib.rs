//! Transition rates for an Unruh-DeWitt detector whose center of mass is
//! dynamical and whose rest mass depends on its internal state.
//!
//! The detector is a two-level system of ground-state mass `m_g` and internal
//! energy gap `E`; exciting or de-exciting it shifts the rest mass by `E/c²`.
//! This crate evaluates spontaneous-emission and absorption rates for such a
//! detector prepared in a Gaussian center-of-mass wave packet, in four model
//! variants: the semirelativistic model (state-dependent mass), the
//! nonrelativistic model with a single fixed mass `M` (either `m_g` or `m_e`),
//! and the classical fixed-trajectory limit.
//!
//! Modules:
//! - [`model`]: parameter types, validation, and the Gaussian momentum density.
//! - [`template`]: per-momentum template functions `T(p)` whose average
//!   against the momentum density gives the total rate.
//! - [`rates`]: closed-form expanded rates and the general quadrature path.
//! - [`numerics`]: adaptive quadrature, bracketed root finding, and
//!   finite-difference series coefficients.
//! - [`oracle`]: an independent golden-rule construction of the rates from
//!   the energy-mismatch functions, used to cross-check the templates.

pub mod model;
pub mod numerics;
pub mod oracle;
pub mod rates;
pub mod template;

pub use model::{
    DetectorParams, GaussianCoM, MassConvention, Process, RateResult, Scaling, ValidityFlags,
};
