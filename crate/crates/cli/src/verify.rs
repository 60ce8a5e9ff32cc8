//! Runtime verification suites: template identities, oracle shape
//! equivalence, quadrature-vs-closed-form consistency, and limit
//! convergences. Each check prints its measured deviation and threshold.

use udw_core::model::{DetectorParams, GaussianCoM, MassConvention, Process};
use udw_core::oracle::{golden_rule_shape, shape_small_p_limit};
use udw_core::rates::{
    rate_emission_classical, rate_emission_closed, rate_infinite_mass_limit_check,
    rate_quadrature, Method, MomentumDist, RateRequest, TemplateKind,
};
use udw_core::template::{
    radicand_boundary, template_absorption, template_emission, template_small_p_limit,
    TemplateArgs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identity,
    Oracle,
    Quadrature,
    Limits,
}

impl Suite {
    pub fn label(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Oracle => "oracle",
            Suite::Quadrature => "quadrature",
            Suite::Limits => "limits",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        match s {
            "identity" => Some(vec![Suite::Identity]),
            "oracle" => Some(vec![Suite::Oracle]),
            "quadrature" => Some(vec![Suite::Quadrature]),
            "limits" => Some(vec![Suite::Limits]),
            "all" => Some(Self::all().to_vec()),
            _ => None,
        }
    }

    pub fn all() -> [Suite; 4] {
        [Suite::Identity, Suite::Oracle, Suite::Quadrature, Suite::Limits]
    }
}

/// One check: measured deviation against its threshold.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckLine {
    fn bounded(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            measured,
            threshold,
            passed: measured.is_finite() && measured <= threshold,
        }
    }

    fn condition(name: &'static str, passed: bool) -> Self {
        Self {
            name,
            measured: if passed { 0.0 } else { 1.0 },
            threshold: 0.0,
            passed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn default_params() -> DetectorParams {
    DetectorParams::new(1.0, 0.1).expect("valid defaults")
}

/// Mapping identity T_abs = 2 - T_em(swapped, -E) on a 50 x 50 grid of
/// (p, E) with physical masses, within the shared validity domain.
fn identity_suite() -> SuiteReport {
    let mut max_dev: f64 = 0.0;
    let mut evaluated = 0usize;
    let mut total = 0usize;
    for i in 0..50 {
        let gap = 0.4 * (i as f64 + 0.5) / 50.0;
        let args = TemplateArgs::new(1.0, 1.0 + gap, gap, 1.0).expect("valid args");
        for j in 0..50 {
            let p = 0.65 * (j as f64 + 0.5) / 50.0;
            total += 1;
            let (Ok(abs), Ok(em)) = (
                template_absorption(p, &args),
                template_emission(p, &args.swapped_negated()),
            ) else {
                continue;
            };
            evaluated += 1;
            max_dev = max_dev.max(((abs - (2.0 - em)) / abs.max(1.0)).abs());
        }
    }
    SuiteReport {
        suite: Suite::Identity,
        checks: vec![
            CheckLine::bounded("mapping identity max relative deviation", max_dev, 1e-12),
            CheckLine::condition(
                "shared validity domain covers most of the grid",
                evaluated * 2 > total,
            ),
        ],
    }
}

/// S(p)/T(p) constant in p for both processes; the emission constant is
/// m_g/2 analytically.
fn oracle_suite() -> SuiteReport {
    let params = default_params();
    let args = TemplateArgs::semirel(&params);
    let mut checks = Vec::new();

    for process in [Process::Emission, Process::Absorption] {
        let upper = radicand_boundary(process, &args)
            .unwrap_or(f64::INFINITY)
            .min(0.3 * params.compton_momentum());
        let ratios: Vec<f64> = (1..=8)
            .map(|i| {
                let p = upper * i as f64 / 9.0;
                let s = golden_rule_shape(process, p, &params)
                    .expect("oracle valid in range")
                    .value;
                let t = match process {
                    Process::Emission => template_emission(p, &args),
                    Process::Absorption => template_absorption(p, &args),
                }
                .expect("template valid in range");
                s / t
            })
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        let spread = (hi - lo) / (0.5 * (hi + lo));
        checks.push(CheckLine::bounded(
            match process {
                Process::Emission => "emission shape-ratio spread over 8 momenta",
                Process::Absorption => "absorption shape-ratio spread over 8 momenta",
            },
            spread,
            1e-3,
        ));
    }

    let s0 = shape_small_p_limit(Process::Emission, &params).expect("finite limit");
    let t0 = template_small_p_limit(Process::Emission, &args).expect("finite limit");
    let dev = (s0 / t0 - 0.5 * params.ground_mass()).abs();
    checks.push(CheckLine::bounded(
        "emission small-momentum ratio equals m_g/2",
        dev,
        1e-6,
    ));

    SuiteReport {
        suite: Suite::Oracle,
        checks,
    }
}

/// Expanded-template quadrature reproduces the closed form exactly; the
/// exact-template residual scales as the fourth power of the momentum
/// spread.
fn quadrature_suite() -> SuiteReport {
    let params = default_params();
    let quad = |l: f64, kind: TemplateKind| -> f64 {
        let dist = MomentumDist::Gaussian(GaussianCoM::new(l).expect("positive width"));
        let req = RateRequest::new(params, MassConvention::SemiRel, Process::Emission, dist)
            .with_method(Method::Quadrature)
            .with_template(kind)
            .with_tolerances(1e-13, 1e-17);
        rate_quadrature(&req).expect("quadrature converges").value
    };
    let closed = |l: f64| -> f64 {
        rate_emission_closed(&params, l, MassConvention::SemiRel)
            .expect("closed form total")
            .value
    };

    let expanded_dev = ((quad(10.0, TemplateKind::Expanded) - closed(10.0)) / closed(10.0)).abs();
    let r20 = (quad(20.0, TemplateKind::Exact) - closed(20.0)).abs();
    let r40 = (quad(40.0, TemplateKind::Exact) - closed(40.0)).abs();
    let richardson = r20 / r40;

    SuiteReport {
        suite: Suite::Quadrature,
        checks: vec![
            CheckLine::bounded(
                "expanded-template quadrature vs closed form (relative)",
                expanded_dev,
                1e-12,
            ),
            CheckLine::bounded(
                "exact-template residual Richardson ratio deviation from 16",
                (richardson - 16.0).abs(),
                0.2 * 16.0,
            ),
        ],
    }
}

/// Infinite-mass convergence to the classical rate and the large-gap
/// template limit.
fn limits_suite() -> SuiteReport {
    // Units of the energy gap, L E = 1.
    let params = DetectorParams::new(1.0, 1.0).expect("valid");
    let classical = rate_emission_classical(&params).value;
    let devs: Vec<f64> = rate_infinite_mass_limit_check(&params, 1.0, &[1e2, 1e3, 1e4])
        .iter()
        .map(|r| (r.value / classical - 1.0).abs())
        .collect();
    let monotone = devs[0] > devs[1] && devs[1] > devs[2];

    // Template approaches 2 from below as the gap grows.
    let big_gap_ok = {
        let mut prev = 0.0;
        let mut ok = true;
        for gap in [10.0, 100.0, 1000.0] {
            let args = TemplateArgs::new(1.0, 1.0 + gap, gap, 1.0).expect("valid");
            let v = template_emission(0.2, &args).expect("valid domain");
            ok &= v > 2.0 - 3.0 / (2.0 * gap).sqrt() && v < 2.0 && v > prev;
            prev = v;
        }
        ok
    };

    SuiteReport {
        suite: Suite::Limits,
        checks: vec![
            CheckLine::condition("classical-limit deviation sequence is monotone", monotone),
            CheckLine::bounded(
                "scaled emission rate deviation from 1 at mass 10^4",
                devs[2],
                1e-2,
            ),
            CheckLine::condition("large-gap template approaches 2 monotonically", big_gap_ok),
        ],
    }
}

pub fn run_suite(suite: Suite) -> SuiteReport {
    match suite {
        Suite::Identity => identity_suite(),
        Suite::Oracle => oracle_suite(),
        Suite::Quadrature => quadrature_suite(),
        Suite::Limits => limits_suite(),
    }
}

/// Run the selected suites, printing one line per check; returns overall
/// success.
pub fn run_and_print<W: std::io::Write>(suites: &[Suite], mut out: W) -> std::io::Result<bool> {
    let mut all_passed = true;
    for &suite in suites {
        let report = run_suite(suite);
        for check in &report.checks {
            writeln!(
                out,
                "[{}] {}: {} (measured {:.3e}, threshold {:.3e})",
                if check.passed { "PASS" } else { "FAIL" },
                report.suite.label(),
                check.name,
                check.measured,
                check.threshold,
            )?;
        }
        all_passed &= report.passed();
    }
    Ok(all_passed)
}
