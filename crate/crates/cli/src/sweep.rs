//! Parameter sweeps over mass, momentum spread, or energy gap, evaluated
//! concurrently with deterministic output order.

use std::io::Write;

use rayon::prelude::*;

use udw_core::model::{DetectorParams, GaussianCoM, MassConvention, Process, Scaling};
use udw_core::rates::{self, Method, MomentumDist, RateError, RateRequest};

use crate::output::{format_optional, join_flags};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Mass,
    MomentumSpread,
    EnergyGap,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Mass => "mass",
            Axis::MomentumSpread => "momentum-spread",
            Axis::EnergyGap => "energy-gap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mass" => Some(Axis::Mass),
            "momentum-spread" => Some(Axis::MomentumSpread),
            "energy-gap" => Some(Axis::EnergyGap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(Spacing::Linear),
            "log" => Some(Spacing::Log),
            _ => None,
        }
    }
}

/// Axis grid: `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(format!("grid requires min < max, got [{}, {}]", self.min, self.max));
        }
        if self.count < 2 {
            return Err(format!("grid requires count >= 2, got {}", self.count));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(format!("log spacing requires min > 0, got {}", self.min));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => {
                        (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

/// Parameters held fixed along the sweep axis.
#[derive(Debug, Clone, Copy)]
pub struct FixedParams {
    pub m_g: f64,
    pub energy_gap: f64,
    pub c: f64,
    pub coupling: f64,
    /// Packet width; unneeded when the axis is the momentum spread or when
    /// only the classical convention is requested.
    pub length: Option<f64>,
    pub cutoff: Option<f64>,
    pub method: Method,
    pub scaling: Scaling,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            m_g: 1.0,
            energy_gap: 0.1,
            c: 1.0,
            coupling: 1.0,
            length: None,
            cutoff: None,
            method: Method::ClosedForm,
            scaling: Scaling::Raw,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: GridSpec,
    pub fixed: FixedParams,
    pub conventions: Vec<MassConvention>,
    pub process: Process,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        self.grid.validate()?;
        if self.conventions.is_empty() {
            return Err("at least one convention is required".into());
        }
        let needs_length = self
            .conventions
            .iter()
            .any(|&c| c != MassConvention::Classical);
        if needs_length && self.axis != Axis::MomentumSpread && self.fixed.length.is_none() {
            return Err("sweep needs a packet width (L or lp) unless the axis is momentum-spread".into());
        }
        if self.axis == Axis::MomentumSpread && self.grid.min <= 0.0 {
            return Err("momentum-spread axis requires positive grid values".into());
        }
        Ok(())
    }
}

/// One sweep record; `value` empty when the point failed, with the failure
/// kind appended to `flags`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub convention: MassConvention,
    pub process: Process,
    pub method: Method,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub flags: Vec<String>,
}

pub const SWEEP_HEADER: &str = "axis,axis_value,convention,process,method,rate,error,flags";

pub fn error_token(e: &RateError) -> &'static str {
    match e {
        RateError::Asymptote { .. } => "AsymptoteError",
        RateError::InvalidConvention { .. } => "InvalidConvention",
        RateError::EmptyDomain { .. } => "EmptyDomain",
        RateError::Template(udw_core::template::TemplateError::Domain { .. }) => "DomainError",
        RateError::Template(_) => "TemplateError",
        RateError::Quadrature(_) => "QuadratureFailure",
        RateError::CutoffRequired => "CutoffRequired",
        RateError::ClosedFormNeedsGaussian => "NeedsGaussian",
        RateError::Scaling { .. } => "ScalingError",
    }
}

/// Evaluate one sweep point; parameter-construction failures and rate
/// failures both land in the flags column rather than aborting the sweep.
fn evaluate_point(spec: &SweepSpec, axis_value: f64, convention: MassConvention) -> SweepRow {
    let mut row = SweepRow {
        axis: spec.axis,
        axis_value,
        convention,
        process: spec.process,
        method: spec.fixed.method,
        value: None,
        error: None,
        flags: Vec::new(),
    };

    let f = &spec.fixed;
    let (m_g, gap, length) = match spec.axis {
        Axis::Mass => (axis_value, f.energy_gap, f.length),
        Axis::EnergyGap => (f.m_g, axis_value, f.length),
        Axis::MomentumSpread => (f.m_g, f.energy_gap, Some(1.0 / axis_value)),
    };

    let params = match DetectorParams::with_units(m_g, gap, f.c, f.coupling) {
        Ok(p) => p,
        Err(e) => {
            row.flags.push(format!("InvalidParams:{e}"));
            return row;
        }
    };

    let result = (|| -> Result<udw_core::model::RateResult, RateError> {
        let raw = if convention == MassConvention::Classical && spec.process == Process::Emission {
            rates::rate_emission_classical(&params)
        } else {
            let length = length.ok_or(RateError::InvalidConvention {
                convention,
                reason: "packet width required",
            })?;
            let gaussian = GaussianCoM::new(length).map_err(|_| RateError::InvalidConvention {
                convention,
                reason: "packet width must be positive",
            })?;
            let mut req =
                RateRequest::new(params, convention, spec.process, MomentumDist::Gaussian(gaussian))
                    .with_method(f.method);
            if let Some(k) = f.cutoff {
                req = req.with_cutoff(k);
            }
            rates::rate(&req)?
        };
        rates::apply_scaling(&raw, f.scaling, &params)
    })();

    match result {
        Ok(r) => {
            row.value = Some(r.value);
            row.error = Some(r.abs_error_estimate);
            row.flags = r.flags.tokens().iter().map(|s| s.to_string()).collect();
        }
        Err(e) => {
            row.flags.push(error_token(&e).to_string());
        }
    }
    row
}

/// Run the sweep: one row per grid point per convention, grid points in
/// ascending order, conventions in declared order. Points are evaluated in
/// parallel; the output order is deterministic.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    spec.validate().map_err(CliError::InvalidParams)?;
    let points: Vec<(f64, MassConvention)> = spec
        .grid
        .values()
        .into_iter()
        .flat_map(|v| spec.conventions.iter().map(move |&c| (v, c)))
        .collect();

    let pool = crate::sweep_thread_pool();
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(v, c)| evaluate_point(spec, v, c))
            .collect()
    });
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.axis.label(),
            crate::output::format_float(r.axis_value),
            r.convention.label(),
            r.process.label(),
            r.method.label(),
            format_optional(r.value),
            format_optional(r.error),
            join_flags(&r.flags),
        )?;
    }
    Ok(())
}
