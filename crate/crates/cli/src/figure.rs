//! Figure-data recipes: mass sweeps and the emission/absorption grids.
//!
//! Each recipe expands into sweep panels (pure composition over the sweep
//! machinery, no private math) and writes one CSV per panel. Grid ranges
//! and the fixed parameter of each panel are repository defaults, recorded
//! in the CSV columns so the files are self-describing; marker columns
//! carry the first-quantization limit `L_p = m_g c` and, for absorption,
//! the per-convention rate asymptotes.

use std::io::Write;
use std::path::{Path, PathBuf};

use udw_core::model::{MassConvention, Process, Scaling};
use udw_core::rates::Method;

use crate::output::{format_float, format_optional, join_flags};
use crate::sweep::{
    run_sweep, Axis, FixedParams, GridSpec, Spacing, SweepRow, SweepSpec,
};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    MassSweep,
    EmissionGrid,
    AbsorptionGrid,
}

impl FigureId {
    pub fn label(self) -> &'static str {
        match self {
            FigureId::MassSweep => "mass-sweep",
            FigureId::EmissionGrid => "emission-grid",
            FigureId::AbsorptionGrid => "absorption-grid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mass-sweep" => Some(FigureId::MassSweep),
            "emission-grid" => Some(FigureId::EmissionGrid),
            "absorption-grid" => Some(FigureId::AbsorptionGrid),
            _ => None,
        }
    }
}

/// Optional overrides of the default grids and fixed panel parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridOverrides {
    pub points: Option<usize>,
    pub mass_min: Option<f64>,
    pub mass_max: Option<f64>,
    pub gap_min: Option<f64>,
    pub gap_max: Option<f64>,
    pub lp_min: Option<f64>,
    pub lp_max: Option<f64>,
    pub fixed_gap: Option<f64>,
    pub fixed_lp: Option<f64>,
}

/// One figure panel: a sweep plus marker metadata.
#[derive(Debug, Clone)]
pub struct PanelPlan {
    pub file_name: String,
    pub spec: SweepSpec,
    /// First-quantization validity marker `L_p = m_g c`, on momentum-spread
    /// panels.
    pub marker_compton_lp: Option<f64>,
    /// Absorption-rate asymptote position per convention, on energy-gap
    /// panels.
    pub asymptotes: Vec<(MassConvention, f64)>,
}

#[derive(Debug, Clone)]
pub struct FigureRecipe {
    pub id: FigureId,
    pub panels: Vec<PanelPlan>,
}

/// Default grid sizes and ranges (all in units of `m_g = c = 1` for the
/// grids, and of the energy gap for the mass sweep).
const DEFAULT_POINTS: usize = 200;
const MASS_RANGE: (f64, f64) = (1.0, 1e4);
const LP_RANGE: (f64, f64) = (0.01, 1.2);
const EMISSION_GAP_RANGE: (f64, f64) = (1e-3, 0.45);
/// Absorption gap range reaches within 0.02 of the `M = m_g` asymptote at
/// `E = 0.5 m_g c²` while keeping every convention finite.
const ABSORPTION_GAP_RANGE: (f64, f64) = (1e-3, 0.48);
const DEFAULT_FIXED_GAP: f64 = 0.1;
const DEFAULT_FIXED_LP: f64 = 0.5;

impl FigureRecipe {
    pub fn new(id: FigureId, overrides: &GridOverrides) -> Self {
        let points = overrides.points.unwrap_or(DEFAULT_POINTS);
        let panels = match id {
            FigureId::MassSweep => mass_sweep_panels(points, overrides),
            FigureId::EmissionGrid => grid_panels(Process::Emission, points, overrides),
            FigureId::AbsorptionGrid => grid_panels(Process::Absorption, points, overrides),
        };
        Self { id, panels }
    }
}

fn log_grid(range: (f64, f64), points: usize) -> GridSpec {
    GridSpec {
        min: range.0,
        max: range.1,
        count: points,
        spacing: Spacing::Log,
    }
}

fn mass_sweep_panels(points: usize, overrides: &GridOverrides) -> Vec<PanelPlan> {
    // All quantities in units of the energy gap: E = 1, and L E = 1 keeps
    // the packet above the Compton wavelength across the whole mass range.
    let grid = log_grid(
        (
            overrides.mass_min.unwrap_or(MASS_RANGE.0),
            overrides.mass_max.unwrap_or(MASS_RANGE.1),
        ),
        points,
    );
    let fixed = FixedParams {
        m_g: 1.0,
        energy_gap: 1.0,
        c: 1.0,
        coupling: 1.0,
        length: Some(1.0),
        cutoff: None,
        method: Method::ClosedForm,
        scaling: Scaling::ClassicalUnit,
    };
    [
        (MassConvention::NonRelMg, "mass_sweep_M_mg.csv"),
        (MassConvention::NonRelMe, "mass_sweep_M_me.csv"),
    ]
    .into_iter()
    .map(|(nonrel, name)| PanelPlan {
        file_name: name.to_string(),
        spec: SweepSpec {
            axis: Axis::Mass,
            grid,
            fixed,
            conventions: vec![MassConvention::Classical, MassConvention::SemiRel, nonrel],
            process: Process::Emission,
        },
        marker_compton_lp: None,
        asymptotes: Vec::new(),
    })
    .collect()
}

fn grid_panels(process: Process, points: usize, overrides: &GridOverrides) -> Vec<PanelPlan> {
    let prefix = process.label();
    let gap_range = match process {
        Process::Emission => EMISSION_GAP_RANGE,
        Process::Absorption => ABSORPTION_GAP_RANGE,
    };
    let lp_grid = log_grid(
        (
            overrides.lp_min.unwrap_or(LP_RANGE.0),
            overrides.lp_max.unwrap_or(LP_RANGE.1),
        ),
        points,
    );
    let gap_grid = log_grid(
        (
            overrides.gap_min.unwrap_or(gap_range.0),
            overrides.gap_max.unwrap_or(gap_range.1),
        ),
        points,
    );
    let fixed_gap = overrides.fixed_gap.unwrap_or(DEFAULT_FIXED_GAP);
    let fixed_lp = overrides.fixed_lp.unwrap_or(DEFAULT_FIXED_LP);

    // Asymptote positions in units of m_g c² for m_g = c = 1: the
    // state-dependent-mass rate diverges at E = m_g c², the single-mass
    // rates at 2E = M c².
    let asymptote = |conv: MassConvention| -> f64 {
        match conv {
            MassConvention::NonRelMg => 0.5,
            _ => 1.0,
        }
    };

    let mut panels = Vec::new();
    for (nonrel, tag) in [
        (MassConvention::NonRelMg, "M_mg"),
        (MassConvention::NonRelMe, "M_me"),
    ] {
        let conventions = vec![MassConvention::SemiRel, nonrel];
        panels.push(PanelPlan {
            file_name: format!("{prefix}_vs_lp_{tag}.csv"),
            spec: SweepSpec {
                axis: Axis::MomentumSpread,
                grid: lp_grid,
                fixed: FixedParams {
                    energy_gap: fixed_gap,
                    scaling: Scaling::ComptonUnit,
                    ..FixedParams::default()
                },
                conventions: conventions.clone(),
                process,
            },
            marker_compton_lp: Some(1.0),
            asymptotes: Vec::new(),
        });
        panels.push(PanelPlan {
            file_name: format!("{prefix}_vs_gap_{tag}.csv"),
            spec: SweepSpec {
                axis: Axis::EnergyGap,
                grid: gap_grid,
                fixed: FixedParams {
                    length: Some(1.0 / fixed_lp),
                    scaling: Scaling::ComptonUnit,
                    ..FixedParams::default()
                },
                conventions: conventions.clone(),
                process,
            },
            marker_compton_lp: None,
            asymptotes: match process {
                Process::Emission => Vec::new(),
                Process::Absorption => conventions
                    .iter()
                    .map(|&c| (c, asymptote(c)))
                    .collect(),
            },
        });
    }
    panels
}

pub const FIGURE_HEADER: &str = "axis,axis_value,convention,process,method,rate,error,flags,\
m_g,energy_gap,lp,c,lambda,scale,marker_compton_lp,marker_asymptote_gap";

/// Resolved per-row parameter values (axis value substituted in its slot).
fn row_parameters(plan: &PanelPlan, row: &SweepRow) -> (f64, f64, Option<f64>) {
    let f = &plan.spec.fixed;
    let m_g = if row.axis == Axis::Mass { row.axis_value } else { f.m_g };
    let gap = if row.axis == Axis::EnergyGap {
        row.axis_value
    } else {
        f.energy_gap
    };
    let lp = if row.axis == Axis::MomentumSpread {
        Some(row.axis_value)
    } else {
        f.length.map(|l| 1.0 / l)
    };
    (m_g, gap, lp)
}

pub fn write_panel_csv<W: Write>(
    plan: &PanelPlan,
    rows: &[SweepRow],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{FIGURE_HEADER}")?;
    for r in rows {
        let (m_g, gap, lp) = row_parameters(plan, r);
        let asymptote = plan
            .asymptotes
            .iter()
            .find(|(c, _)| *c == r.convention)
            .map(|&(_, v)| v);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis.label(),
            format_float(r.axis_value),
            r.convention.label(),
            r.process.label(),
            r.method.label(),
            format_optional(r.value),
            format_optional(r.error),
            join_flags(&r.flags),
            format_float(m_g),
            format_float(gap),
            format_optional(lp),
            format_float(plan.spec.fixed.c),
            format_float(plan.spec.fixed.coupling),
            plan.spec.fixed.scaling.label(),
            format_optional(plan.marker_compton_lp),
            format_optional(asymptote),
        )?;
    }
    Ok(())
}

/// Generate every panel of the recipe into `outdir`; returns the written
/// paths in panel order.
pub fn run_figure(recipe: &FigureRecipe, outdir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(outdir)?;
    let mut paths = Vec::new();
    for plan in &recipe.panels {
        let rows = run_sweep(&plan.spec)?;
        let path = outdir.join(&plan.file_name);
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_panel_csv(plan, &rows, &mut file)?;
        paths.push(path);
    }
    Ok(paths)
}
