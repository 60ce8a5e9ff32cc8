//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its measured figure and pinned tolerance.

#![allow(clippy::excessive_precision)] // frozen high-precision references

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use udw_cli::figure::{FigureId, FigureRecipe, GridOverrides};
use udw_cli::sweep::{run_sweep, Axis, SweepRow};
use udw_core::model::{DetectorParams, GaussianCoM, MassConvention, Process, Scaling};
use udw_core::oracle::{
    finite_time_rate, golden_rule_shape, shape_small_p_limit, KGridSpec,
};
use udw_core::rates::{
    absorption_closed_nonrel, absorption_closed_semirel_masses, apply_scaling,
    emission_closed_nonrel, emission_closed_semirel_masses, rate_emission_classical,
    rate_emission_closed, rate_infinite_mass_limit_check, rate_quadrature, Method, MomentumDist,
    RateRequest, TemplateKind,
};
use udw_core::template::{
    template_absorption, template_emission, template_small_p_limit, TemplateArgs,
};

fn report(criterion: u32, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion}: {detail}");
}

fn assert_runtime(criterion: u32, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed < limit,
        "criterion {criterion} runtime {elapsed:?} exceeds {limit:?}"
    );
}

/// Criterion 1: the classical emission rate under classical-unit scaling is
/// exactly 1 (to 1e-15) for any coupling and gap; runtime < 1 ms.
#[test]
fn criterion_1_classical_rate_scaled_unity() {
    let cases = [(1.0, 1.0), (0.37, 2.9), (5.0, 1e-3), (2.0, 7.7)];
    let start = Instant::now();
    let mut max_dev: f64 = 0.0;
    for (lambda, gap) in cases {
        let params = DetectorParams::with_units(1.0, gap, 1.0, lambda).unwrap();
        let scaled = apply_scaling(
            &rate_emission_classical(&params),
            Scaling::ClassicalUnit,
            &params,
        )
        .unwrap();
        max_dev = max_dev.max((scaled.value - 1.0).abs());
    }
    let elapsed = start.elapsed();
    assert_runtime(1, elapsed, Duration::from_millis(1));
    report(
        1,
        max_dev <= 1e-15,
        &format!("max |scaled - 1| = {max_dev:.2e} (tolerance 1e-15), runtime {elapsed:?}"),
    );
}

/// Criterion 2: semirelativistic closed forms with the excited mass
/// overridden to m_g match the independently coded nonrelativistic closed
/// forms to relative 1e-14 over 10^4 random parameter draws.
#[test]
fn criterion_2_equal_mass_reduction_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut max_rel: f64 = 0.0;
    for _ in 0..10_000 {
        let m: f64 = (rng.gen_range(0.1_f64.ln()..10.0_f64.ln())).exp();
        let c: f64 = rng.gen_range(0.5..2.0);
        let gap: f64 = rng.gen_range(0.0..0.4) * m * c * c;
        let lambda: f64 = rng.gen_range(0.1..3.0);
        let length: f64 = rng.gen_range(2.0..100.0) / (m * c);

        let em_semi = emission_closed_semirel_masses(m, m, gap, c, lambda, length);
        let em_nonrel = emission_closed_nonrel(m, gap, c, lambda, length);
        if em_nonrel != 0.0 {
            max_rel = max_rel.max(((em_semi - em_nonrel) / em_nonrel).abs());
        } else {
            assert_eq!(em_semi, 0.0);
        }

        let ab_semi = absorption_closed_semirel_masses(m, m, gap, c, lambda, length).unwrap();
        let ab_nonrel = absorption_closed_nonrel(m, gap, c, lambda, length).unwrap();
        max_rel = max_rel.max(((ab_semi - ab_nonrel) / ab_nonrel).abs());
    }
    report(
        2,
        max_rel <= 1e-14,
        &format!("max relative deviation over 10^4 draws = {max_rel:.2e} (tolerance 1e-14)"),
    );
}

/// Criterion 3: mapping identity T_abs(p; m_g, m_e, E) =
/// 2 - T_em(p; masses swapped, E -> -E) to 1e-12 over a 50 x 50 (p, E) grid
/// within the shared validity domain; runtime < 1 s. The emission side is
/// evaluated here through the plain two-square-root formula, independent of
/// the library's shared kernel.
#[test]
fn criterion_3_mapping_identity_grid() {
    // Direct transcription of the emission template for swapped masses and
    // negated gap: an arithmetic route independent of the library kernel.
    fn emission_swapped_direct(p: f64, m_g: f64, m_e: f64, gap: f64) -> Option<f64> {
        let (mg, me, e) = (m_e, m_g, -gap);
        let r_plus = p * p * mg / me + 2.0 * p * mg + mg * mg + 2.0 * e * mg;
        let r_minus = p * p * mg / me - 2.0 * p * mg + mg * mg + 2.0 * e * mg;
        if r_minus < 0.0 || r_plus < 0.0 {
            return None;
        }
        Some(2.0 - (r_plus.sqrt() - r_minus.sqrt()) / p)
    }

    let start = Instant::now();
    let mut max_dev: f64 = 0.0;
    let mut evaluated = 0usize;
    for i in 0..50 {
        let gap = 0.4 * (i as f64 + 0.5) / 50.0;
        let args = TemplateArgs::new(1.0, 1.0 + gap, gap, 1.0).unwrap();
        for j in 0..50 {
            let p = 0.65 * (j as f64 + 0.5) / 50.0;
            let (Ok(abs), Some(em)) = (
                template_absorption(p, &args),
                emission_swapped_direct(p, 1.0, 1.0 + gap, gap),
            ) else {
                continue;
            };
            evaluated += 1;
            max_dev = max_dev.max((abs - (2.0 - em)).abs());
        }
    }
    let elapsed = start.elapsed();
    assert_runtime(3, elapsed, Duration::from_secs(1));
    report(
        3,
        max_dev <= 1e-12 && evaluated > 1250,
        &format!(
            "max deviation = {max_dev:.2e} over {evaluated} valid grid points \
             (tolerance 1e-12), runtime {elapsed:?}"
        ),
    );
}

/// Criterion 4: golden-rule shape over template is constant to relative
/// 1e-3 across 8 momenta for both processes at (m_g = 1, E = 0.1, c = 1),
/// and the emission p -> 0 ratio equals m_g/2 to 1e-6; runtime < 30 s.
#[test]
fn criterion_4_oracle_shape_equivalence() {
    let start = Instant::now();
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let args = TemplateArgs::semirel(&params);

    let mut worst_spread: f64 = 0.0;
    for process in [Process::Emission, Process::Absorption] {
        let upper = 0.3 * params.compton_momentum();
        let ratios: Vec<f64> = (1..=8)
            .map(|i| {
                let p = upper * i as f64 / 9.0;
                let s = golden_rule_shape(process, p, &params).unwrap().value;
                let t = match process {
                    Process::Emission => template_emission(p, &args),
                    Process::Absorption => template_absorption(p, &args),
                }
                .unwrap();
                s / t
            })
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        worst_spread = worst_spread.max((hi - lo) / (0.5 * (hi + lo)));
    }

    // Numeric small-momentum ratio through the quadrature path (p above the
    // analytic-limit switch), plus the in-module analytic limit.
    let p_small = 1e-5;
    let ratio_numeric = golden_rule_shape(Process::Emission, p_small, &params)
        .unwrap()
        .value
        / template_emission(p_small, &args).unwrap();
    let ratio_analytic = shape_small_p_limit(Process::Emission, &params).unwrap()
        / template_small_p_limit(Process::Emission, &args).unwrap();
    let dev_half_mg = (ratio_numeric - 0.5 * params.ground_mass())
        .abs()
        .max((ratio_analytic - 0.5 * params.ground_mass()).abs());

    let elapsed = start.elapsed();
    assert_runtime(4, elapsed, Duration::from_secs(30));
    report(
        4,
        worst_spread <= 1e-3 && dev_half_mg <= 1e-6,
        &format!(
            "ratio spread = {worst_spread:.2e} (tolerance 1e-3), \
             |p->0 ratio - m_g/2| = {dev_half_mg:.2e} (tolerance 1e-6), runtime {elapsed:?}"
        ),
    );
}

/// Criterion 5: Gaussian quadrature of the expanded emission template
/// equals the closed-form rate to relative 1e-12; the exact-template
/// residual shrinks 16 ± 20% per halving of the momentum spread;
/// runtime < 10 s.
#[test]
fn criterion_5_quadrature_consistency() {
    let start = Instant::now();
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let quad = |l: f64, kind: TemplateKind| -> f64 {
        let dist = MomentumDist::Gaussian(GaussianCoM::new(l).unwrap());
        let req = RateRequest::new(params, MassConvention::SemiRel, Process::Emission, dist)
            .with_method(Method::Quadrature)
            .with_template(kind)
            .with_tolerances(1e-13, 1e-17);
        rate_quadrature(&req).unwrap().value
    };
    let closed = |l: f64| -> f64 {
        rate_emission_closed(&params, l, MassConvention::SemiRel)
            .unwrap()
            .value
    };

    let expanded_rel = ((quad(10.0, TemplateKind::Expanded) - closed(10.0)) / closed(10.0)).abs();
    let residual_20 = (quad(20.0, TemplateKind::Exact) - closed(20.0)).abs();
    let residual_40 = (quad(40.0, TemplateKind::Exact) - closed(40.0)).abs();
    let richardson = residual_20 / residual_40;

    let elapsed = start.elapsed();
    assert_runtime(5, elapsed, Duration::from_secs(10));
    report(
        5,
        expanded_rel <= 1e-12 && (12.8..=19.2).contains(&richardson),
        &format!(
            "expanded-vs-closed = {expanded_rel:.2e} (tolerance 1e-12), \
             residual Richardson ratio = {richardson:.3} (16 ± 20%), runtime {elapsed:?}"
        ),
    );
}

/// Criterion 6: |scaled semirelativistic emission rate - 1| at
/// m_g/E in {10², 10³, 10⁴} decreases monotonically and is below 1e-2 at
/// 10⁴ (with L E = 1); runtime < 1 s.
#[test]
fn criterion_6_infinite_mass_convergence() {
    let start = Instant::now();
    let params = DetectorParams::new(1.0, 1.0).unwrap();
    let classical = rate_emission_classical(&params).value;
    let devs: Vec<f64> = rate_infinite_mass_limit_check(&params, 1.0, &[1e2, 1e3, 1e4])
        .iter()
        .map(|r| (r.value / classical - 1.0).abs())
        .collect();
    let elapsed = start.elapsed();
    assert_runtime(6, elapsed, Duration::from_secs(1));
    report(
        6,
        devs[0] > devs[1] && devs[1] > devs[2] && devs[2] < 1e-2,
        &format!(
            "deviations [{:.2e}, {:.2e}, {:.2e}] monotone, final < 1e-2, runtime {elapsed:?}",
            devs[0], devs[1], devs[2]
        ),
    );
}

/// Criterion 7: the numerically estimated 1/L² correction coefficient of
/// the emission rate equals (3/2)/(m_g c)² for the semirelativistic model
/// and 3/(m_g c)² for the nonrelativistic one (both mass choices) to
/// relative 1e-3 at E/(m_g c²) = 1e-4. The absorption first-order-in-E
/// coefficients are measured and reported against their documented values.
#[test]
fn criterion_7_lowest_order_coefficients() {
    let gap = 1e-4;
    let params = DetectorParams::new(1.0, gap).unwrap();

    // The closed forms are exactly A + B/L²; two widths isolate B/A.
    let correction_coefficient = |conv: MassConvention| -> f64 {
        let (l1, l2) = (10.0, 20.0);
        let r1 = rate_emission_closed(&params, l1, conv).unwrap().value;
        let r2 = rate_emission_closed(&params, l2, conv).unwrap().value;
        let b = (r1 - r2) / (1.0 / (l1 * l1) - 1.0 / (l2 * l2));
        let a = r1 - b / (l1 * l1);
        b / a
    };
    let mut max_rel: f64 = 0.0;
    for (conv, expected) in [
        (MassConvention::SemiRel, 1.5),
        (MassConvention::NonRelMg, 3.0),
        (MassConvention::NonRelMe, 3.0),
    ] {
        let measured = correction_coefficient(conv);
        max_rel = max_rel.max(((measured - expected) / expected).abs());
    }

    // Absorption analog: measured d/dE of the closed forms at E = 0 against
    // the documented lowest-order coefficients with overall scale
    // lambda² c² m_g / π and e = E/(m_g c²):
    //   state-dependent masses: 1 + 2e (1 + (3/4)/(L m_g c)²)
    //   M = m_e:                1 + 2e (1 + (3/2)/(L m_g c)²)
    //   M = m_g:                1 + e (1 + 3/(L m_g c)²)
    let length = 5.0;
    let scale = 1.0 / std::f64::consts::PI;
    let h = 1e-7;
    let derivative = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / (2.0 * h) / scale;
    let semi = derivative(&|e| {
        absorption_closed_semirel_masses(1.0, 1.0 + e, e, 1.0, 1.0, length).unwrap()
    });
    let nonrel_me =
        derivative(&|e| absorption_closed_nonrel(1.0 + e, e, 1.0, 1.0, length).unwrap());
    let nonrel_mg = derivative(&|e| absorption_closed_nonrel(1.0, e, 1.0, 1.0, length).unwrap());
    let inv_l2 = 1.0 / (length * length);
    let documented = [
        2.0 * (1.0 + 0.75 * inv_l2),
        2.0 * (1.0 + 1.5 * inv_l2),
        1.0 + 3.0 * inv_l2,
    ];
    let mut abs_max_rel: f64 = 0.0;
    for (measured, doc) in [semi, nonrel_me, nonrel_mg].iter().zip(documented) {
        abs_max_rel = abs_max_rel.max(((measured - doc) / doc).abs());
    }

    report(
        7,
        max_rel <= 1e-3 && abs_max_rel <= 1e-3,
        &format!(
            "emission correction coefficients within {max_rel:.2e} of (3/2, 3, 3)/(m_g c)²; \
             absorption first-order coefficients measured (semirel {semi:.6}, M=m_e {nonrel_me:.6}, \
             M=m_g {nonrel_mg:.6}) agree with documented values to {abs_max_rel:.2e} \
             — no discrepancy once the overall scale is read as lambda² c² m_g/π"
        ),
    );
}

fn rows_by_convention(rows: &[SweepRow], conv: MassConvention) -> Vec<&SweepRow> {
    rows.iter().filter(|r| r.convention == conv).collect()
}

/// Criterion 8: on the default emission grid the semirelativistic rate lies
/// at or below the nonrelativistic one pointwise (both mass choices); on
/// the default absorption grid the energy-gap curves increase monotonically
/// toward the marked asymptote and exceed 10x their small-gap value within
/// 0.02 m_g c² of it; runtime < 60 s.
#[test]
fn criterion_8_figure_ordering() {
    let start = Instant::now();
    let overrides = GridOverrides::default();

    let emission = FigureRecipe::new(FigureId::EmissionGrid, &overrides);
    let mut suppression_ok = true;
    for panel in &emission.panels {
        let rows = run_sweep(&panel.spec).unwrap();
        let semi = rows_by_convention(&rows, MassConvention::SemiRel);
        let nonrel_conv = *panel
            .spec
            .conventions
            .iter()
            .find(|&&c| c != MassConvention::SemiRel)
            .unwrap();
        let nonrel = rows_by_convention(&rows, nonrel_conv);
        for (s, n) in semi.iter().zip(&nonrel) {
            assert_eq!(s.axis_value, n.axis_value);
            let (Some(sv), Some(nv)) = (s.value, n.value) else {
                suppression_ok = false;
                continue;
            };
            suppression_ok &= sv <= nv;
        }
    }

    let absorption = FigureRecipe::new(FigureId::AbsorptionGrid, &overrides);
    let mut monotone_ok = true;
    let mut blowup_ok = true;
    let mut blowup_checked = 0usize;
    for panel in absorption
        .panels
        .iter()
        .filter(|p| p.spec.axis == Axis::EnergyGap)
    {
        let rows = run_sweep(&panel.spec).unwrap();
        for &conv in &panel.spec.conventions {
            let curve = rows_by_convention(&rows, conv);
            let values: Vec<f64> = curve.iter().map(|r| r.value.unwrap()).collect();
            monotone_ok &= values.windows(2).all(|w| w[1] > w[0]);

            let asymptote = panel
                .asymptotes
                .iter()
                .find(|(c, _)| *c == conv)
                .map(|&(_, v)| v)
                .unwrap();
            let near: Vec<f64> = curve
                .iter()
                .filter(|r| r.axis_value >= asymptote - 0.02)
                .map(|r| r.value.unwrap())
                .collect();
            if !near.is_empty() {
                blowup_checked += 1;
                blowup_ok &= near.iter().all(|v| *v >= 10.0 * values[0]);
            }
        }
    }

    let elapsed = start.elapsed();
    assert_runtime(8, elapsed, Duration::from_secs(60));
    report(
        8,
        suppression_ok && monotone_ok && blowup_ok && blowup_checked > 0,
        &format!(
            "emission suppression pointwise: {suppression_ok}; absorption monotone toward \
             asymptote: {monotone_ok}; >10x blow-up within 0.02 of the asymptote \
             ({blowup_checked} curves in range): {blowup_ok}; runtime {elapsed:?}"
        ),
    );
}

/// Criterion 9: finite-time oracle ratios at t c k* = 200 drift by at most
/// 2% under t -> 2t, and the drift halves (±30%) at the next doubling;
/// runtime < 120 s.
#[test]
fn criterion_9_finite_time_convergence() {
    let start = Instant::now();
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let (p0, p1) = (0.05, 0.25);
    let k_star = 0.095445115010332226914; // emission root at p = 0
    let t1 = 200.0 / (params.c() * k_star);
    let k_max = 0.5;

    let ratio_at = |t: f64| -> f64 {
        let points = [p0, p1]
            .iter()
            .map(|&p| {
                KGridSpec::with_resolution(k_max, Process::Emission, p, t, &params, 8.0).points
            })
            .max()
            .unwrap();
        let grid = KGridSpec::new(k_max, points);
        let f1 = finite_time_rate(Process::Emission, p1, t, &params, &grid).unwrap();
        let f0 = finite_time_rate(Process::Emission, p0, t, &params, &grid).unwrap();
        f1 / f0
    };

    let r1 = ratio_at(t1);
    let r2 = ratio_at(2.0 * t1);
    let r4 = ratio_at(4.0 * t1);
    let drift1 = ((r2 - r1) / r2).abs();
    let drift2 = ((r4 - r2) / r4).abs();
    let halving = drift2 / drift1;

    let elapsed = start.elapsed();
    assert_runtime(9, elapsed, Duration::from_secs(120));
    report(
        9,
        drift1 <= 0.02 && (0.35..=0.65).contains(&halving),
        &format!(
            "drift(t -> 2t) = {drift1:.3e} (tolerance 2e-2), halving ratio = {halving:.3} \
             (0.5 ± 30%), runtime {elapsed:?}"
        ),
    );
}
