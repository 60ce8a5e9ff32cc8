//! Template functions for emission and absorption.
//!
//! A template `T(p)` is the per-initial-momentum factor whose average
//! against the momentum density `|psi0(p)|²` gives the total transition
//! rate. Both processes share one algebraic kernel,
//!
//! ```text
//! D(p) = ( sqrt(r+(p)) - sqrt(r-(p)) ) / p,
//! r±(p) = (m/n) p² ± 2 m c p + m² c² + 2 g m,
//! ```
//!
//! with `(m, n, g) = (m_g, m_e, +E)` for emission, where
//! `T_em = 2 - D`, and `(m, n, g) = (m_e, m_g, -E)` for absorption, where
//! `T_abs = D`. Since `r+ - r- = 4 m c p`, the difference of roots is
//! evaluated as `4 m c / (sqrt(r+) + sqrt(r-))`, which is stable down to
//! `p = 0`; below the small-momentum threshold the analytic `p -> 0` limit
//! is returned outright.
//!
//! Masses are independent arguments on purpose: the nonrelativistic model
//! needs equal masses with a nonzero gap, and the emission/absorption
//! mapping identity needs a sign-flipped gap.

use thiserror::Error;

use crate::model::{DetectorParams, MassConvention, Process};

/// Fraction of `m_g c` below which exact templates switch to the analytic
/// small-momentum limit.
pub const SMALL_P_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TemplateError {
    #[error("template radicand {radicand} < 0 at p = {p} ({process}); beyond validity boundary")]
    Domain {
        process: Process,
        p: f64,
        radicand: f64,
    },
    #[error("p = {p} below small-momentum threshold {threshold}; use the analytic limit")]
    SmallPUnstable { p: f64, threshold: f64 },
    #[error("invalid template argument {name} = {value}")]
    InvalidArgs { name: &'static str, value: f64 },
}

/// Arguments of a template evaluation.
///
/// `m_g` and `m_e` are deliberately not tied to `energy_gap`: equal masses
/// with `E > 0` express the nonrelativistic model, and a negative gap is
/// used by the mapping-identity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateArgs {
    pub m_g: f64,
    pub m_e: f64,
    pub energy_gap: f64,
    pub c: f64,
}

impl TemplateArgs {
    pub fn new(m_g: f64, m_e: f64, energy_gap: f64, c: f64) -> Result<Self, TemplateError> {
        for (name, value, positive) in [
            ("m_g", m_g, true),
            ("m_e", m_e, true),
            ("c", c, true),
            ("energy_gap", energy_gap, false),
        ] {
            if !value.is_finite() || (positive && value <= 0.0) {
                return Err(TemplateError::InvalidArgs { name, value });
            }
        }
        Ok(Self {
            m_g,
            m_e,
            energy_gap,
            c,
        })
    }

    /// State-dependent masses derived from the detector parameters.
    pub fn semirel(params: &DetectorParams) -> Self {
        Self {
            m_g: params.ground_mass(),
            m_e: params.excited_mass(),
            energy_gap: params.energy_gap(),
            c: params.c(),
        }
    }

    /// Single-mass nonrelativistic model: both mass slots carry `M`.
    pub fn equal_mass(mass: f64, energy_gap: f64, c: f64) -> Result<Self, TemplateError> {
        Self::new(mass, mass, energy_gap, c)
    }

    /// Template arguments for a convention, or `None` for the classical
    /// limit (which has no template).
    pub fn for_convention(params: &DetectorParams, convention: MassConvention) -> Option<Self> {
        match convention {
            MassConvention::SemiRel => Some(Self::semirel(params)),
            MassConvention::NonRelMg | MassConvention::NonRelMe => Some(Self {
                m_g: convention.nonrel_mass(params).expect("nonrel convention"),
                m_e: convention.nonrel_mass(params).expect("nonrel convention"),
                energy_gap: params.energy_gap(),
                c: params.c(),
            }),
            MassConvention::Classical => None,
        }
    }

    /// Same arguments with the mass slots swapped and the gap negated; the
    /// transform underlying the emission/absorption mapping identity.
    pub fn swapped_negated(&self) -> Self {
        Self {
            m_g: self.m_e,
            m_e: self.m_g,
            energy_gap: -self.energy_gap,
            c: self.c,
        }
    }

    pub fn small_p_threshold(&self) -> f64 {
        SMALL_P_FACTOR * self.m_g * self.c
    }

    /// Kernel mass triple `(m, n, g)` for the process: `m` is the mass of
    /// the post-transition state, `n` of the pre-transition state, and `g`
    /// the signed gap entering `2 g m`.
    fn kernel_args(&self, process: Process) -> (f64, f64, f64) {
        match process {
            Process::Emission => (self.m_g, self.m_e, self.energy_gap),
            Process::Absorption => (self.m_e, self.m_g, -self.energy_gap),
        }
    }
}

/// `(sqrt(r+) - sqrt(r-))/p` in its cancellation-free form, or the radicand
/// that went negative.
fn sqrt_diff_over_p(p: f64, m: f64, n: f64, g: f64, c: f64) -> Result<f64, f64> {
    let q = p * p * m / n + m * m * c * c + 2.0 * g * m;
    let s = 2.0 * p * m * c;
    let r_plus = q + s;
    let r_minus = q - s;
    if r_minus < 0.0 {
        return Err(r_minus);
    }
    if r_plus < 0.0 {
        return Err(r_plus);
    }
    Ok(4.0 * m * c / (r_plus.sqrt() + r_minus.sqrt()))
}

fn limit_value(process: Process, args: &TemplateArgs) -> Result<f64, TemplateError> {
    let (m, _, g) = args.kernel_args(process);
    let q0 = m * m * args.c * args.c + 2.0 * g * m;
    if q0 <= 0.0 {
        return Err(TemplateError::Domain {
            process,
            p: 0.0,
            radicand: q0,
        });
    }
    let d = 2.0 * m * args.c / q0.sqrt();
    Ok(match process {
        Process::Emission => 2.0 - d,
        Process::Absorption => d,
    })
}

fn eval(process: Process, p: f64, args: &TemplateArgs, strict: bool) -> Result<f64, TemplateError> {
    if !p.is_finite() || p < 0.0 {
        return Err(TemplateError::InvalidArgs { name: "p", value: p });
    }
    let threshold = args.small_p_threshold();
    if p < threshold {
        if strict {
            return Err(TemplateError::SmallPUnstable { p, threshold });
        }
        return limit_value(process, args);
    }
    let (m, n, g) = args.kernel_args(process);
    let d = sqrt_diff_over_p(p, m, n, g, args.c).map_err(|radicand| TemplateError::Domain {
        process,
        p,
        radicand,
    })?;
    Ok(match process {
        Process::Emission => 2.0 - d,
        Process::Absorption => d,
    })
}

/// Emission template
/// `T_em(p) = 2 - (sqrt(r+) - sqrt(r-))/p` with
/// `r± = p² m_g/m_e ± 2 p m_g c + m_g² c² + 2 E m_g`.
///
/// Below the small-momentum threshold the analytic limit
/// `2 - 2/sqrt(1 + 2E/(m_g c²))` is returned.
pub fn template_emission(p: f64, args: &TemplateArgs) -> Result<f64, TemplateError> {
    eval(Process::Emission, p, args, false)
}

/// Absorption template
/// `T_abs(p) = (sqrt(r+) - sqrt(r-))/p` with
/// `r± = p² m_e/m_g ± 2 p m_e c + m_e² c² - 2 m_e E`.
///
/// Below the small-momentum threshold the analytic limit
/// `2/sqrt(1 - 2E/(m_e c²))` is returned.
pub fn template_absorption(p: f64, args: &TemplateArgs) -> Result<f64, TemplateError> {
    eval(Process::Absorption, p, args, false)
}

/// Exact template evaluation with no small-momentum switch; reports
/// [`TemplateError::SmallPUnstable`] below the threshold instead.
pub fn template_eval_exact(
    process: Process,
    p: f64,
    args: &TemplateArgs,
) -> Result<f64, TemplateError> {
    eval(process, p, args, true)
}

/// Emission template expanded to second order about `p = 0`:
/// `2 - 2/sqrt(1+x) + p² (c²(m_g - m_e) + 2E) / (c⁴ m_g² m_e (1+x)^(5/2))`
/// with `x = 2E/(m_g c²)`.
pub fn template_emission_expanded(p: f64, args: &TemplateArgs) -> f64 {
    let c2 = args.c * args.c;
    let x = 2.0 * args.energy_gap / (args.m_g * c2);
    let onepx = 1.0 + x;
    let leading = 2.0 - 2.0 / onepx.sqrt();
    let coeff = (c2 * (args.m_g - args.m_e) + 2.0 * args.energy_gap)
        / (c2 * c2 * args.m_g * args.m_g * args.m_e * onepx.powf(2.5));
    leading + p * p * coeff
}

/// Absorption template expanded to second order about `p = 0`, obtained from
/// the emission expansion through the mapping identity
/// `T_abs(p; m_g, m_e, E) = 2 - T_em(p; m_e, m_g, -E)`.
pub fn template_absorption_expanded(p: f64, args: &TemplateArgs) -> f64 {
    2.0 - template_emission_expanded(p, &args.swapped_negated())
}

/// Analytic `p -> 0` limit of the templates.
///
/// Emission: `2 - 2/sqrt(1 + 2E/(m_g c²))`.
/// Absorption: `2/sqrt(1 - 2E/(m_e c²))`, requiring `2E < m_e c²`.
pub fn template_small_p_limit(process: Process, args: &TemplateArgs) -> Result<f64, TemplateError> {
    limit_value(process, args)
}

/// Smallest positive momentum at which the minus-branch radicand vanishes,
/// if any; the template is valid on `(0, boundary)` and rates clamp their
/// integration domain here.
pub fn radicand_boundary(process: Process, args: &TemplateArgs) -> Option<f64> {
    let (m, n, g) = args.kernel_args(process);
    // r-(p) = a p² + b p + q0 with a > 0, b < 0.
    let a = m / n;
    let b = -2.0 * m * args.c;
    let q0 = m * m * args.c * args.c + 2.0 * g * m;
    let disc = b * b - 4.0 * a * q0;
    if disc < 0.0 {
        return None;
    }
    let sd = disc.sqrt();
    let root = if q0 > 0.0 {
        // Both roots positive; the smaller one, in cancellation-free form.
        2.0 * q0 / (-b + sd)
    } else if q0 < 0.0 {
        // One positive root.
        (-b + sd) / (2.0 * a)
    } else {
        -b / a
    };
    (root > 0.0).then_some(root)
}
