//! Detector parameters, mass conventions, the Gaussian center-of-mass state,
//! and process validation.
//!
//! Natural units with `hbar = 1` throughout; the speed of light `c` is kept
//! as an explicit parameter (default 1) so that tests can probe `c`-scaling.

use std::fmt;

use thiserror::Error;

/// Errors from constructing domain types with out-of-range parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {name} = {value}: must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}

fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}

/// Transition process of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    /// Excited state decays to the ground state, creating one field quantum.
    Emission,
    /// Ground state absorbs one field quantum.
    Absorption,
}

impl Process {
    pub fn label(self) -> &'static str {
        match self {
            Process::Emission => "emission",
            Process::Absorption => "absorption",
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Physical parameters of the two-level detector.
///
/// The excited-state mass is never stored; it is derived as
/// `m_e = m_g + E/c²` (mass-energy equivalence).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    ground_mass: f64,
    energy_gap: f64,
    c: f64,
    coupling: f64,
}

impl DetectorParams {
    /// Detector with `c = 1` and coupling `lambda = 1`.
    pub fn new(ground_mass: f64, energy_gap: f64) -> Result<Self, ModelError> {
        Self::with_units(ground_mass, energy_gap, 1.0, 1.0)
    }

    pub fn with_units(
        ground_mass: f64,
        energy_gap: f64,
        c: f64,
        coupling: f64,
    ) -> Result<Self, ModelError> {
        require(
            ground_mass.is_finite() && ground_mass > 0.0,
            "ground_mass",
            ground_mass,
            "finite and > 0",
        )?;
        require(
            energy_gap.is_finite() && energy_gap >= 0.0,
            "energy_gap",
            energy_gap,
            "finite and >= 0",
        )?;
        require(c.is_finite() && c > 0.0, "c", c, "finite and > 0")?;
        require(
            coupling.is_finite() && coupling > 0.0,
            "coupling",
            coupling,
            "finite and > 0",
        )?;
        Ok(Self {
            ground_mass,
            energy_gap,
            c,
            coupling,
        })
    }

    pub fn ground_mass(&self) -> f64 {
        self.ground_mass
    }

    /// Derived excited-state mass `m_e = m_g + E/c²`; always `>= m_g`.
    pub fn excited_mass(&self) -> f64 {
        self.ground_mass + self.energy_gap / (self.c * self.c)
    }

    pub fn energy_gap(&self) -> f64 {
        self.energy_gap
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Momentum scale `m_g c` separating the low-energy regime from the
    /// relativistic one.
    pub fn compton_momentum(&self) -> f64 {
        self.ground_mass * self.c
    }

    /// Length scale `1/(m_g c)` below which first quantization breaks down.
    pub fn compton_wavelength(&self) -> f64 {
        1.0 / self.compton_momentum()
    }

    /// Same detector with the ground mass multiplied by `factor`.
    pub fn with_mass_scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::with_units(
            self.ground_mass * factor,
            self.energy_gap,
            self.c,
            self.coupling,
        )
    }
}

/// Which model variant supplies the mass (or masses) entering the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MassConvention {
    /// State-dependent mass: `m_g` for the ground state, `m_e = m_g + E/c²`
    /// for the excited state.
    SemiRel,
    /// Single nonrelativistic mass parameter `M = m_g`.
    NonRelMg,
    /// Single nonrelativistic mass parameter `M = m_e`.
    NonRelMe,
    /// Fixed classical trajectory; the center of mass is ignored entirely.
    Classical,
}

impl MassConvention {
    /// The single mass `M` of the nonrelativistic model, when applicable.
    pub fn nonrel_mass(self, params: &DetectorParams) -> Option<f64> {
        match self {
            MassConvention::NonRelMg => Some(params.ground_mass()),
            MassConvention::NonRelMe => Some(params.excited_mass()),
            MassConvention::SemiRel | MassConvention::Classical => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MassConvention::SemiRel => "semirel",
            MassConvention::NonRelMg => "nonrel-mg",
            MassConvention::NonRelMe => "nonrel-me",
            MassConvention::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "semirel" => Some(MassConvention::SemiRel),
            "nonrel-mg" => Some(MassConvention::NonRelMg),
            "nonrel-me" => Some(MassConvention::NonRelMe),
            "classical" => Some(MassConvention::Classical),
            _ => None,
        }
    }
}

impl fmt::Display for MassConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Isotropic Gaussian center-of-mass wave packet of spatial width `L`.
///
/// The momentum-space modulus squared is
/// `|psi0(p)|² = (L²/2π)^(3/2) · exp(-p² L² / 2)`, normalized so that
/// `∫ 4π p² |psi0(p)|² dp = 1` and `<p²> = 3/L²`. The packet center `x0`
/// is carried for completeness but cannot affect any rate: only
/// `|psi0(p)|²` enters, and the `x0`-dependence of the wave function is a
/// pure momentum-space phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCoM {
    width: f64,
    center: [f64; 3],
}

impl GaussianCoM {
    pub fn new(width: f64) -> Result<Self, ModelError> {
        Self::with_center(width, [0.0; 3])
    }

    pub fn with_center(width: f64, center: [f64; 3]) -> Result<Self, ModelError> {
        require(
            width.is_finite() && width > 0.0,
            "width",
            width,
            "finite and > 0",
        )?;
        Ok(Self { width, center })
    }

    /// Spatial width `L`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Momentum spread `L_p = 1/L`.
    pub fn momentum_spread(&self) -> f64 {
        1.0 / self.width
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    /// Momentum-space density `|psi0(p)|²` at momentum magnitude `p >= 0`.
    pub fn momentum_density(&self, p: f64) -> f64 {
        let l2 = self.width * self.width;
        let norm = (l2 / (2.0 * std::f64::consts::PI)).powf(1.5);
        norm * (-0.5 * p * p * l2).exp()
    }

    /// Whether the packet satisfies the first-quantization bound
    /// `L > 1/(m_g c)`.
    pub fn satisfies_compton_bound(&self, params: &DetectorParams) -> bool {
        self.width > params.compton_wavelength()
    }
}

/// Scaling convention applied to a reported rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scaling {
    /// Rate in the input unit system, unscaled.
    Raw,
    /// Rate divided by the classical emission rate `lambda² E / 2π`, so the
    /// classical rate itself reads exactly 1.
    ClassicalUnit,
    /// Rate in units of the Compton frequency `m_g c²`.
    ComptonUnit,
}

impl Scaling {
    pub fn label(self) -> &'static str {
        match self {
            Scaling::Raw => "raw",
            Scaling::ClassicalUnit => "classical",
            Scaling::ComptonUnit => "compton",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Scaling::Raw),
            "classical" => Some(Scaling::ClassicalUnit),
            "compton" => Some(Scaling::ComptonUnit),
            _ => None,
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Regime-validity flags carried by a [`RateResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidityFlags {
    /// The integration domain was clamped at the template validity boundary
    /// below the requested cutoff.
    pub cutoff_clamped: bool,
    /// Absorption evaluated with `2E` within 5% of the divergence at `m c²`.
    pub near_asymptote: bool,
    /// Wave packet narrower than the Compton wavelength, `L <= 1/(m_g c)`.
    pub compton_violation: bool,
}

impl ValidityFlags {
    pub fn any(&self) -> bool {
        self.cutoff_clamped || self.near_asymptote || self.compton_violation
    }

    /// Fixed-order token list; used for deterministic text output.
    pub fn tokens(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.cutoff_clamped {
            out.push("CutoffClamped");
        }
        if self.near_asymptote {
            out.push("NearAsymptote");
        }
        if self.compton_violation {
            out.push("ComptonViolation");
        }
        out
    }
}

impl fmt::Display for ValidityFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join(";"))
    }
}

/// A computed transition rate with its numerical error estimate, the scaling
/// convention applied to the value, and regime-validity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub scaling: Scaling,
    pub flags: ValidityFlags,
}

impl RateResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error_estimate: 0.0,
            scaling: Scaling::Raw,
            flags: ValidityFlags::default(),
        }
    }

    pub fn with_flags(mut self, flags: ValidityFlags) -> Self {
        self.flags = flags;
        self
    }
}

/// A single violated constraint found by [`validate_process`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationIssue {
    /// `L <= 1/(m_g c)`: packet narrower than the Compton wavelength.
    ComptonViolation,
    /// Absorption with `2E >= m_e c²`: the closed-form denominators are
    /// non-real and the rate diverges.
    AbsorptionAsymptote,
    /// Absorption with cutoff `K` violating `E/(m_g c²) < (K/(m_g c) - 1)²`,
    /// i.e. the template validity boundary lies inside `[0, K]`.
    CutoffConstraint,
}

impl ValidationIssue {
    pub fn message(self) -> &'static str {
        match self {
            ValidationIssue::ComptonViolation => {
                "wave packet width L must exceed the Compton wavelength 1/(m_g c)"
            }
            ValidationIssue::AbsorptionAsymptote => {
                "absorption requires 2E < m_e c^2; the closed-form rate diverges beyond"
            }
            ValidationIssue::CutoffConstraint => {
                "absorption cutoff K requires E/(m_g c^2) < (K/(m_g c) - 1)^2"
            }
        }
    }
}

/// Constraint report for running `process` with the given parameters and
/// packet. Never aborts; callers decide how to act on violations.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, issue: ValidationIssue) -> bool {
        self.issues.contains(&issue)
    }
}

/// Check process-dependent parameter constraints.
///
/// `cutoff` is the momentum cutoff `K` intended for the absorption
/// integral; pass `None` when no quadrature cutoff is in play (the cutoff
/// constraint is then not checked).
pub fn validate_process(
    params: &DetectorParams,
    process: Process,
    dist: &GaussianCoM,
    cutoff: Option<f64>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !dist.satisfies_compton_bound(params) {
        report.issues.push(ValidationIssue::ComptonViolation);
    }
    if process == Process::Absorption {
        let c2 = params.c() * params.c();
        if 2.0 * params.energy_gap() >= params.excited_mass() * c2 {
            report.issues.push(ValidationIssue::AbsorptionAsymptote);
        }
        if let Some(k) = cutoff {
            let ratio = k / params.compton_momentum() - 1.0;
            if params.energy_gap() / (params.ground_mass() * c2) >= ratio * ratio {
                report.issues.push(ValidationIssue::CutoffConstraint);
            }
        }
    }
    report
}
