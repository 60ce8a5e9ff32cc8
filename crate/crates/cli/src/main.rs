use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use udw_cli::config::Config;
use udw_cli::figure::{run_figure, FigureId, FigureRecipe, GridOverrides};
use udw_cli::output::{format_float, format_optional, join_flags};
use udw_cli::sweep::{run_sweep, write_sweep_csv, Axis, FixedParams, GridSpec, Spacing, SweepSpec};
use udw_cli::verify::{run_and_print, Suite};
use udw_cli::CliError;

use udw_core::model::{
    validate_process, DetectorParams, GaussianCoM, MassConvention, Process, Scaling,
};
use udw_core::rates::{self, Method, MomentumDist, RateError, RateRequest, TemplateKind};

#[derive(Parser)]
#[command(
    name = "udw",
    version,
    about = "Emission and absorption rates for a two-level detector with dynamical center of mass and state-dependent rest mass"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a single rate and print it as a CSV record
    Rate(RateArgs),
    /// Sweep one parameter axis and write a CSV file
    Sweep(SweepArgs),
    /// Generate figure data (one CSV per panel) into a directory
    Figure(FigureArgs),
    /// Run the verification suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DetectorFlags {
    /// Ground-state mass m_g [default 1]
    #[arg(long)]
    mg: Option<f64>,
    /// Internal energy gap E [default 0.1]
    #[arg(long = "E")]
    energy_gap: Option<f64>,
    /// Speed of light [default 1]
    #[arg(long)]
    c: Option<f64>,
    /// Coupling strength lambda [default 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Wave-packet spatial width L
    #[arg(long = "L")]
    length: Option<f64>,
    /// Wave-packet momentum spread L_p = 1/L (alternative to --L)
    #[arg(long)]
    lp: Option<f64>,
    /// Momentum cutoff K for absorption quadrature [default L_p]
    #[arg(long)]
    cutoff: Option<f64>,
}

#[derive(Args)]
struct RateArgs {
    /// emission | absorption [default emission]
    #[arg(long)]
    process: Option<String>,
    /// semirel | nonrel-mg | nonrel-me | classical [default semirel]
    #[arg(long)]
    convention: Option<String>,
    #[command(flatten)]
    detector: DetectorFlags,
    /// closed | quadrature [default closed]
    #[arg(long)]
    method: Option<String>,
    /// exact | expanded template for quadrature [default exact]
    #[arg(long)]
    template: Option<String>,
    /// raw | classical | compton output scaling [default raw]
    #[arg(long)]
    scale: Option<String>,
    /// Compute even when validation reports violated constraints
    #[arg(long)]
    force: bool,
    /// key=value config file (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// mass | momentum-spread | energy-gap
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    /// Number of grid points [default 100]
    #[arg(long)]
    count: Option<usize>,
    /// linear | log [default linear]
    #[arg(long)]
    spacing: Option<String>,
    /// Comma-separated conventions [default semirel]
    #[arg(long)]
    conventions: Option<String>,
    /// emission | absorption [default emission]
    #[arg(long)]
    process: Option<String>,
    #[command(flatten)]
    detector: DetectorFlags,
    /// closed | quadrature [default closed]
    #[arg(long)]
    method: Option<String>,
    /// raw | classical | compton [default raw]
    #[arg(long)]
    scale: Option<String>,
    /// Output CSV path ("-" for standard output)
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// mass-sweep | emission-grid | absorption-grid
    #[arg(long)]
    recipe: Option<String>,
    /// Output directory [default figures]
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Grid points per axis [default 200]
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// identity | oracle | quadrature | limits | all [default all]
    #[arg(long)]
    suite: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rate(args) => cmd_rate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Figure(args) => cmd_figure(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, CliError> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidParams(msg.into())
}

/// flag > config > default resolution for one parameter.
fn resolve_f64(flag: Option<f64>, cfg: &Config, key: &str, default: f64) -> Result<f64, CliError> {
    Ok(flag.or(cfg.get_f64(key)?).unwrap_or(default))
}

fn resolve_parsed<T>(
    flag: &Option<String>,
    cfg: &Config,
    key: &str,
    default: T,
    parse: impl Fn(&str) -> Option<T>,
    expected: &str,
) -> Result<T, CliError> {
    let Some(text) = flag.as_deref().or_else(|| cfg.get(key)) else {
        return Ok(default);
    };
    parse(text).ok_or_else(|| invalid(format!("{key} must be one of {expected}, got {text:?}")))
}

struct ResolvedDetector {
    params: DetectorParams,
    length: Option<f64>,
    cutoff: Option<f64>,
}

fn resolve_detector(flags: &DetectorFlags, cfg: &Config) -> Result<ResolvedDetector, CliError> {
    let m_g = resolve_f64(flags.mg, cfg, "mg", 1.0)?;
    let gap = resolve_f64(flags.energy_gap, cfg, "E", 0.1)?;
    let c = resolve_f64(flags.c, cfg, "c", 1.0)?;
    let lambda = resolve_f64(flags.lambda, cfg, "lambda", 1.0)?;
    let params =
        DetectorParams::with_units(m_g, gap, c, lambda).map_err(|e| invalid(e.to_string()))?;

    let length_flag = flags.length.or(cfg.get_f64("L")?);
    let lp_flag = flags.lp.or(cfg.get_f64("lp")?);
    let length = match (length_flag, lp_flag) {
        (Some(_), Some(_)) => return Err(invalid("give either --L or --lp, not both")),
        (Some(l), None) => Some(l),
        (None, Some(lp)) if lp > 0.0 => Some(1.0 / lp),
        (None, Some(lp)) => return Err(invalid(format!("lp must be > 0, got {lp}"))),
        (None, None) => None,
    };
    let cutoff = flags.cutoff.or(cfg.get_f64("cutoff")?);
    Ok(ResolvedDetector {
        params,
        length,
        cutoff,
    })
}

fn map_rate_error(e: RateError) -> CliError {
    match e {
        RateError::InvalidConvention { .. }
        | RateError::ClosedFormNeedsGaussian
        | RateError::CutoffRequired
        | RateError::Scaling { .. } => invalid(e.to_string()),
        RateError::Asymptote { .. }
        | RateError::EmptyDomain { .. }
        | RateError::Template(_)
        | RateError::Quadrature(_) => CliError::Numerical(e.to_string()),
    }
}

const RATE_HEADER: &str =
    "process,convention,method,m_g,energy_gap,c,lambda,L,cutoff,scale,value,error,flags";

fn cmd_rate(args: RateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let process = resolve_parsed(
        &args.process,
        &cfg,
        "process",
        Process::Emission,
        |s| match s {
            "emission" => Some(Process::Emission),
            "absorption" => Some(Process::Absorption),
            _ => None,
        },
        "emission|absorption",
    )?;
    let convention = resolve_parsed(
        &args.convention,
        &cfg,
        "convention",
        MassConvention::SemiRel,
        MassConvention::parse,
        "semirel|nonrel-mg|nonrel-me|classical",
    )?;
    let method = resolve_parsed(
        &args.method,
        &cfg,
        "method",
        Method::ClosedForm,
        Method::parse,
        "closed|quadrature",
    )?;
    let template = resolve_parsed(
        &args.template,
        &cfg,
        "template",
        TemplateKind::Exact,
        |s| match s {
            "exact" => Some(TemplateKind::Exact),
            "expanded" => Some(TemplateKind::Expanded),
            _ => None,
        },
        "exact|expanded",
    )?;
    let scaling = resolve_parsed(
        &args.scale,
        &cfg,
        "scale",
        Scaling::Raw,
        Scaling::parse,
        "raw|classical|compton",
    )?;
    let det = resolve_detector(&args.detector, &cfg)?;
    let params = det.params;

    if process == Process::Absorption && convention == MassConvention::Classical {
        return Err(invalid("classical absorption rate undefined"));
    }
    let classical_emission =
        process == Process::Emission && convention == MassConvention::Classical;
    if !classical_emission && det.length.is_none() {
        return Err(invalid("--L or --lp required for this convention"));
    }

    // Validation gate: refuse violated constraints unless forced.
    if let Some(length) = det.length {
        let gaussian = GaussianCoM::new(length).map_err(|e| invalid(e.to_string()))?;
        let effective_cutoff = det.cutoff.or_else(|| {
            (process == Process::Absorption && method == Method::Quadrature)
                .then(|| gaussian.momentum_spread())
        });
        let report = validate_process(&params, process, &gaussian, effective_cutoff);
        if !report.is_valid() && !args.force {
            let messages: Vec<&str> = report.issues.iter().map(|i| i.message()).collect();
            return Err(invalid(format!(
                "validation failed (use --force to compute anyway): {}",
                messages.join("; ")
            )));
        }
    }

    let raw = if classical_emission {
        rates::rate_emission_classical(&params)
    } else {
        let gaussian = GaussianCoM::new(det.length.expect("length checked above"))
            .map_err(|e| invalid(e.to_string()))?;
        let mut req =
            RateRequest::new(params, convention, process, MomentumDist::Gaussian(gaussian))
                .with_method(method)
                .with_template(template);
        if let Some(k) = det.cutoff {
            req = req.with_cutoff(k);
        }
        rates::rate(&req).map_err(map_rate_error)?
    };
    let result = rates::apply_scaling(&raw, scaling, &params).map_err(map_rate_error)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{RATE_HEADER}")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        process.label(),
        convention.label(),
        method.label(),
        format_float(params.ground_mass()),
        format_float(params.energy_gap()),
        format_float(params.c()),
        format_float(params.coupling()),
        format_optional(det.length),
        format_optional(det.cutoff),
        scaling.label(),
        format_float(result.value),
        format_float(result.abs_error_estimate),
        join_flags(&result.flags.tokens().iter().map(|s| s.to_string()).collect::<Vec<_>>()),
    )?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let axis = resolve_parsed(
        &args.axis,
        &cfg,
        "axis",
        Axis::Mass,
        Axis::parse,
        "mass|momentum-spread|energy-gap",
    )?;
    let axis_given = args.axis.is_some() || cfg.get("axis").is_some();
    if !axis_given {
        return Err(invalid("--axis is required"));
    }
    let min = args
        .min
        .or(cfg.get_f64("min")?)
        .ok_or_else(|| invalid("--min is required"))?;
    let max = args
        .max
        .or(cfg.get_f64("max")?)
        .ok_or_else(|| invalid("--max is required"))?;
    let count = args.count.or(cfg.get_usize("count")?).unwrap_or(100);
    let spacing = resolve_parsed(
        &args.spacing,
        &cfg,
        "spacing",
        Spacing::Linear,
        Spacing::parse,
        "linear|log",
    )?;
    let process = resolve_parsed(
        &args.process,
        &cfg,
        "process",
        Process::Emission,
        |s| match s {
            "emission" => Some(Process::Emission),
            "absorption" => Some(Process::Absorption),
            _ => None,
        },
        "emission|absorption",
    )?;
    let method = resolve_parsed(
        &args.method,
        &cfg,
        "method",
        Method::ClosedForm,
        Method::parse,
        "closed|quadrature",
    )?;
    let scaling = resolve_parsed(
        &args.scale,
        &cfg,
        "scale",
        Scaling::Raw,
        Scaling::parse,
        "raw|classical|compton",
    )?;
    let conventions_text = args
        .conventions
        .as_deref()
        .or_else(|| cfg.get("conventions"))
        .unwrap_or("semirel");
    let conventions = conventions_text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            MassConvention::parse(s)
                .ok_or_else(|| invalid(format!("unknown convention {s:?} in list")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let det = resolve_detector(&args.detector, &cfg)?;
    let spec = SweepSpec {
        axis,
        grid: GridSpec {
            min,
            max,
            count,
            spacing,
        },
        fixed: FixedParams {
            m_g: det.params.ground_mass(),
            energy_gap: det.params.energy_gap(),
            c: det.params.c(),
            coupling: det.params.coupling(),
            length: det.length,
            cutoff: det.cutoff,
            method,
            scaling,
        },
        conventions,
        process,
    };
    let rows = run_sweep(&spec)?;

    let output = args
        .output
        .clone()
        .or_else(|| cfg.get("output").map(str::to_string))
        .unwrap_or_else(|| "-".to_string());
    if output == "-" {
        let stdout = std::io::stdout();
        write_sweep_csv(&rows, stdout.lock())?;
    } else {
        let file = std::fs::File::create(&output)?;
        write_sweep_csv(&rows, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn cmd_figure(args: FigureArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let recipe_text = args
        .recipe
        .as_deref()
        .or_else(|| cfg.get("recipe"))
        .ok_or_else(|| invalid("--recipe is required"))?;
    let id = FigureId::parse(recipe_text).ok_or_else(|| {
        invalid(format!(
            "recipe must be one of mass-sweep|emission-grid|absorption-grid, got {recipe_text:?}"
        ))
    })?;
    let overrides = GridOverrides {
        points: args.points.or(cfg.get_usize("points")?),
        mass_min: cfg.get_f64("mass_min")?,
        mass_max: cfg.get_f64("mass_max")?,
        gap_min: cfg.get_f64("gap_min")?,
        gap_max: cfg.get_f64("gap_max")?,
        lp_min: cfg.get_f64("lp_min")?,
        lp_max: cfg.get_f64("lp_max")?,
        fixed_gap: cfg.get_f64("fixed_gap")?,
        fixed_lp: cfg.get_f64("fixed_lp")?,
    };
    let outdir = args
        .outdir
        .clone()
        .or_else(|| cfg.get("outdir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("figures"));

    let recipe = FigureRecipe::new(id, &overrides);
    let paths = run_figure(&recipe, &outdir)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let selector = args.suite.as_deref().unwrap_or("all");
    let suites = Suite::parse(selector).ok_or_else(|| {
        invalid(format!(
            "suite must be one of identity|oracle|quadrature|limits|all, got {selector:?}"
        ))
    })?;
    let stdout = std::io::stdout();
    let passed = run_and_print(&suites, stdout.lock())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}
