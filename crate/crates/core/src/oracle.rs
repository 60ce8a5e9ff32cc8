//! First-principles verification of the template functions.
//!
//! The transition amplitudes carry a phase whose argument is an
//! energy-mismatch function `Delta(p, k, cos θ)`; summing over final states
//! under the long-time (golden-rule) limit turns `|amplitude|²` into a
//! constraint `Delta = 0` weighted by the field-mode factor `1/2k` and the
//! inverse Jacobian `|∂Delta/∂k|`. The resulting angular integral
//!
//! ```text
//! S(p) = ∫_{-1}^{1} dcosθ  Σ_{k* > 0, Delta(p, k*, cosθ) = 0}  k* / (2 |∂Delta/∂k|(k*))
//! ```
//!
//! must be proportional to the template `T(p)` with a p-independent
//! constant for each process; that ratio test is the core oracle check.
//! For emission the `p -> 0` ratio is `m_g / 2` (derived analytically
//! below); absorption's constant is measured by the tests.
//!
//! [`finite_time_rate`] avoids the delta-function limit altogether: it
//! integrates the finite-time kernel `[sin(Delta t/2)/(Delta/2)]²` over
//! `(k, cosθ)` and divides by `t`, converging to the golden-rule answer
//! with `O(1/t)` error. It shares no root-finding or delta-constraint
//! machinery with `golden_rule_shape`, giving a second, independent route.

use std::cell::Cell;

use thiserror::Error;

use crate::model::{DetectorParams, Process};
use crate::numerics::{self, find_root_bracketed, QuadratureError};

/// Jacobian threshold `|∂Delta/∂k| < GRAZING_FACTOR * c` below which a root
/// counts as grazing (tangential delta support).
pub const GRAZING_FACTOR: f64 = 1e-8;

/// Fraction of `m_g c` below which the shape integral switches to its
/// analytic `p -> 0` limit.
pub const SMALL_P_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grazing root at p = {p}, cosθ = {cos_theta}: |∂Δ/∂k| = {derivative} at k = {k}")]
    GrazingRoot {
        p: f64,
        cos_theta: f64,
        k: f64,
        derivative: f64,
    },
    #[error("{process} kinematically forbidden at p = {p}: no energy-conserving field momentum")]
    KinematicallyForbidden { process: Process, p: f64 },
    #[error("k-grid spacing {spacing} exceeds the sinc resolution limit {limit}")]
    Resolution { spacing: f64, limit: f64 },
    #[error("invalid oracle input {name} = {value}")]
    InvalidInput { name: &'static str, value: f64 },
    #[error("angular quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
}

/// Energy-conservation mismatch of a process, evaluated on the initial
/// center-of-mass momentum `p`, the field-quantum momentum `k`, and the
/// angle between them.
#[derive(Debug, Clone, Copy)]
pub struct Mismatch {
    pub process: Process,
    pub params: DetectorParams,
}

impl Mismatch {
    pub fn new(process: Process, params: DetectorParams) -> Self {
        Self { process, params }
    }

    /// `Delta(p, k, cosθ)`; zero exactly on energy-conserving final states.
    ///
    /// Emission: `(p² + k² - 2 p k cosθ)/(2 m_g) - p²/(2 m_e) - E + c k`
    /// (the final CoM momentum is `p - k`).
    /// Absorption: `(p² + k² + 2 p k cosθ)/(2 m_e) - p²/(2 m_g) + E - c k`
    /// (the final CoM momentum is `p + k`).
    pub fn eval(&self, p: f64, k: f64, cos_theta: f64) -> f64 {
        let m_g = self.params.ground_mass();
        let m_e = self.params.excited_mass();
        let gap = self.params.energy_gap();
        let c = self.params.c();
        match self.process {
            Process::Emission => {
                (p * p + k * k - 2.0 * p * k * cos_theta) / (2.0 * m_g) - p * p / (2.0 * m_e)
                    - gap
                    + c * k
            }
            Process::Absorption => {
                (p * p + k * k + 2.0 * p * k * cos_theta) / (2.0 * m_e) - p * p / (2.0 * m_g) + gap
                    - c * k
            }
        }
    }

    /// `∂Delta/∂k` at fixed `(p, cosθ)`.
    pub fn k_derivative(&self, p: f64, k: f64, cos_theta: f64) -> f64 {
        let c = self.params.c();
        match self.process {
            Process::Emission => (k - p * cos_theta) / self.params.ground_mass() + c,
            Process::Absorption => (k + p * cos_theta) / self.params.excited_mass() - c,
        }
    }

    /// Coefficients `(B, C)` of the k-quadratic `k² + B k + C = 0`
    /// equivalent to `Delta = 0` (the mismatch scaled by `2 m`).
    fn k_quadratic(&self, p: f64, cos_theta: f64) -> (f64, f64) {
        let m_g = self.params.ground_mass();
        let m_e = self.params.excited_mass();
        let gap = self.params.energy_gap();
        let c = self.params.c();
        match self.process {
            Process::Emission => (
                2.0 * (m_g * c - p * cos_theta),
                p * p * (1.0 - m_g / m_e) - 2.0 * m_g * gap,
            ),
            Process::Absorption => (
                2.0 * (p * cos_theta - m_e * c),
                p * p * (1.0 - m_e / m_g) + 2.0 * m_e * gap,
            ),
        }
    }

    /// Positive simple roots of `Delta(p, ·, cosθ)`, each polished by a
    /// bracketed solve of the mismatch itself. The sign-aware quadratic
    /// formula avoids cancellation for small roots.
    pub fn positive_roots(&self, p: f64, cos_theta: f64) -> Vec<f64> {
        let (b, c0) = self.k_quadratic(p, cos_theta);
        let disc = b * b - 4.0 * c0;
        if disc < 0.0 {
            return Vec::new();
        }
        let sd = disc.sqrt();
        let (r1, r2) = if b == 0.0 {
            (-0.5 * sd, 0.5 * sd)
        } else {
            let q = -0.5 * (b + b.signum() * sd);
            (q, if q != 0.0 { c0 / q } else { 0.0 })
        };

        let floor = 1e-12 * self.params.compton_momentum();
        let mut roots: Vec<f64> = [r1, r2]
            .into_iter()
            .filter(|&r| r.is_finite() && r > floor)
            .collect();
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= floor);

        for root in &mut roots {
            *root = self.polish_root(p, cos_theta, *root);
        }
        roots
    }

    fn polish_root(&self, p: f64, cos_theta: f64, k0: f64) -> f64 {
        let w = (1e-7 * k0).max(1e-12 * self.params.compton_momentum());
        let (lo, hi) = (k0 - w, k0 + w);
        if lo <= 0.0 {
            return k0;
        }
        let f = |k: f64| self.eval(p, k, cos_theta);
        let ftol = 1e-12 * self.params.ground_mass() * self.params.c() * self.params.c();
        match find_root_bracketed(f, lo, hi, 1e-15 * k0.max(1.0), ftol) {
            Ok(out) => out.root,
            // No sign change inside the tight bracket: the closed-form root
            // is already accurate to better than the bracket width.
            Err(_) => k0,
        }
    }
}

/// Free-function form of the mismatch evaluation.
pub fn mismatch(process: Process, p: f64, k: f64, cos_theta: f64, params: &DetectorParams) -> f64 {
    Mismatch::new(process, *params).eval(p, k, cos_theta)
}

/// Per-point contributions to the shape integrand: the weighted sum over
/// non-grazing roots, the number of roots, and the number of grazing roots.
fn point_contributions(mis: &Mismatch, p: f64, cos_theta: f64) -> (f64, usize, usize) {
    let roots = mis.positive_roots(p, cos_theta);
    let eps = GRAZING_FACTOR * mis.params.c();
    let mut sum = 0.0;
    let mut grazing = 0usize;
    let n = roots.len();
    for k in &roots {
        let d = mis.k_derivative(p, *k, cos_theta).abs();
        if d < eps {
            grazing += 1;
        } else {
            sum += k / (2.0 * d);
        }
    }
    (sum, n, grazing)
}

/// Golden-rule integrand at one angle: `Σ k*/(2|∂Δ/∂k|)` over the positive
/// roots. Errors on tangential (grazing) delta support.
pub fn shape_integrand(
    process: Process,
    p: f64,
    cos_theta: f64,
    params: &DetectorParams,
) -> Result<f64, OracleError> {
    let mis = Mismatch::new(process, *params);
    let (sum, _, grazing) = point_contributions(&mis, p, cos_theta);
    if grazing > 0 {
        let roots = mis.positive_roots(p, cos_theta);
        let k = roots
            .iter()
            .copied()
            .min_by(|a, b| {
                mis.k_derivative(p, *a, cos_theta)
                    .abs()
                    .total_cmp(&mis.k_derivative(p, *b, cos_theta).abs())
            })
            .unwrap_or(0.0);
        return Err(OracleError::GrazingRoot {
            p,
            cos_theta,
            k,
            derivative: mis.k_derivative(p, k, cos_theta),
        });
    }
    Ok(sum)
}

/// Result of the golden-rule shape integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOutcome {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    /// Grazing roots excluded from the angular quadrature; when nonzero the
    /// error estimate does not bound their (integrable) neighborhood.
    pub grazing_excluded: usize,
}

/// Analytic `p -> 0` limit of the shape integral.
///
/// Emission: the single root `k* = m_g c (sqrt(1+x) - 1)` with Jacobian
/// `c sqrt(1+x)` gives `S(0) = m_g (1 - 1/sqrt(1+x))`, i.e. `(m_g/2) T_em(0)`.
/// Absorption: the root pair `m_e c (1 ± sqrt(1-y))` shares the Jacobian
/// `c sqrt(1-y)`, summing to `S(0) = 2 m_e / sqrt(1-y)`, i.e. `m_e T_abs(0)`.
pub fn shape_small_p_limit(process: Process, params: &DetectorParams) -> Result<f64, OracleError> {
    let c2 = params.c() * params.c();
    match process {
        Process::Emission => {
            let x = 2.0 * params.energy_gap() / (params.ground_mass() * c2);
            Ok(params.ground_mass() * (1.0 - 1.0 / (1.0 + x).sqrt()))
        }
        Process::Absorption => {
            let y = 2.0 * params.energy_gap() / (params.excited_mass() * c2);
            if y >= 1.0 {
                return Err(OracleError::KinematicallyForbidden { process, p: 0.0 });
            }
            Ok(2.0 * params.excited_mass() / (1.0 - y).sqrt())
        }
    }
}

/// Golden-rule shape `S(p)`: the angular integral over energy-conserving
/// field momenta, root by root, weighted by the inverse Jacobian.
///
/// `S(p)/T(p)` is constant in `p` for each process; grazing roots at
/// isolated angles are excluded from the quadrature and counted in the
/// outcome.
pub fn golden_rule_shape(
    process: Process,
    p: f64,
    params: &DetectorParams,
) -> Result<ShapeOutcome, OracleError> {
    if !p.is_finite() || p < 0.0 {
        return Err(OracleError::InvalidInput { name: "p", value: p });
    }
    if p < SMALL_P_FACTOR * params.compton_momentum() {
        let value = shape_small_p_limit(process, params)?;
        return Ok(ShapeOutcome {
            value,
            abs_error: 0.0,
            evaluations: 0,
            grazing_excluded: 0,
        });
    }

    let mis = Mismatch::new(process, *params);
    let grazing = Cell::new(0usize);
    let any_roots = Cell::new(false);
    let integrand = |cos_theta: f64| -> f64 {
        let (sum, n_roots, n_grazing) = point_contributions(&mis, p, cos_theta);
        if n_roots > 0 {
            any_roots.set(true);
        }
        grazing.set(grazing.get() + n_grazing);
        sum
    };
    let out = numerics::integrate_radial(integrand, -1.0, 1.0, 1e-9, 1e-14)?;
    if !any_roots.get() {
        return Err(OracleError::KinematicallyForbidden { process, p });
    }
    Ok(ShapeOutcome {
        value: out.value,
        abs_error: out.abs_error,
        evaluations: out.evaluations,
        grazing_excluded: grazing.get(),
    })
}

/// Uniform k-grid specification for the finite-time estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGridSpec {
    pub k_max: f64,
    /// Number of Simpson intervals (rounded up to even internally).
    pub points: usize,
}

impl KGridSpec {
    pub fn new(k_max: f64, points: usize) -> Self {
        Self { k_max, points }
    }

    /// Grid on `[0, k_max]` whose spacing resolves the sinc kernel at time
    /// `t` with the given refinement factor (spacing = limit / refinement).
    pub fn with_resolution(
        k_max: f64,
        process: Process,
        p: f64,
        t: f64,
        params: &DetectorParams,
        refinement: f64,
    ) -> Self {
        let limit = resolution_limit(process, p, t, params);
        let points = (k_max / (limit / refinement)).ceil() as usize;
        Self {
            k_max,
            points: points.max(8),
        }
    }
}

/// Largest admissible k-grid spacing near the energy-conserving roots,
/// `π / (2 t max|∂Delta/∂k|)`; coarser grids cannot resolve the sinc lobes.
pub fn resolution_limit(process: Process, p: f64, t: f64, params: &DetectorParams) -> f64 {
    let mis = Mismatch::new(process, *params);
    let mut max_d: f64 = 0.0;
    for ct in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for k in mis.positive_roots(p, ct) {
            max_d = max_d.max(mis.k_derivative(p, k, ct).abs());
        }
    }
    if max_d == 0.0 {
        // No roots: fall back to the field dispersion slope.
        max_d = params.c();
    }
    std::f64::consts::PI / (2.0 * t * max_d)
}

/// Finite-time kernel `[sin(Delta t/2)/(Delta/2)]²`.
fn sinc_kernel(delta: f64, t: f64) -> f64 {
    let x = 0.5 * delta * t;
    if x.abs() < 1e-4 {
        // t² sinc²(x) to O(x⁴).
        t * t * (1.0 - x * x / 3.0)
    } else {
        let s = x.sin() / (0.5 * delta);
        s * s
    }
}

/// Transition probability per unit time at finite interaction time `t`:
///
/// ```text
/// P(p, t)/t = (1/t) ∫ dcosθ ∫ dk  k² (1/2k) [sin(Δ t/2)/(Δ/2)]²
/// ```
///
/// by Simpson integration in `k` on the supplied grid and adaptive
/// quadrature in the angle. The large-`t` limit is `2π S(p)`, approached
/// with `O(1/t)` error, so ratios across `p` converge to golden-rule
/// ratios.
pub fn finite_time_rate(
    process: Process,
    p: f64,
    t: f64,
    params: &DetectorParams,
    grid: &KGridSpec,
) -> Result<f64, OracleError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(OracleError::InvalidInput { name: "t", value: t });
    }
    if !(grid.k_max.is_finite() && grid.k_max > 0.0) {
        return Err(OracleError::InvalidInput {
            name: "k_max",
            value: grid.k_max,
        });
    }
    let n = grid.points.max(2).next_multiple_of(2);
    let h = grid.k_max / n as f64;
    let limit = resolution_limit(process, p, t, params);
    if h > limit {
        return Err(OracleError::Resolution { spacing: h, limit });
    }

    let mis = Mismatch::new(process, *params);
    let inner = |cos_theta: f64| -> f64 {
        // Composite Simpson over the uniform k-grid; f(0) = 0 exactly.
        let f = |i: usize| {
            let k = i as f64 * h;
            0.5 * k * sinc_kernel(mis.eval(p, k, cos_theta), t)
        };
        let mut sum = f(0) + f(n);
        let mut odd = 0.0;
        let mut even = 0.0;
        for i in (1..n).step_by(2) {
            odd += f(i);
        }
        for i in (2..n).step_by(2) {
            even += f(i);
        }
        sum += 4.0 * odd + 2.0 * even;
        sum * h / 3.0
    };

    let out = numerics::integrate_radial(inner, -1.0, 1.0, 1e-8, 1e-16)?;
    Ok(out.value / t)
}
