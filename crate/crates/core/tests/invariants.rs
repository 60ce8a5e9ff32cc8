//! Cross-module invariants: mapping identity, expansion orders, reduction
//! and suppression properties, moment checks, and oracle/template
//! consistency.

#![allow(clippy::excessive_precision)] // frozen high-precision references

use approx::assert_relative_eq;
use proptest::prelude::*;

use udw_core::model::{DetectorParams, GaussianCoM, MassConvention, Process};
use udw_core::numerics::{integrate_radial, series_coefficient_estimate};
use udw_core::oracle::{golden_rule_shape, shape_small_p_limit};
use udw_core::rates::{
    rate_absorption_closed, rate_emission_closed, rate_quadrature, Method, MomentumDist,
    RateRequest, TemplateKind,
};
use udw_core::template::{
    radicand_boundary, template_absorption, template_emission, template_emission_expanded,
    template_small_p_limit, TemplateArgs,
};

proptest! {
    /// T_abs(p; m_g, m_e, E) = 2 - T_em(p; masses swapped, E -> -E)
    /// wherever both sides are real.
    #[test]
    fn mapping_identity(
        m_g in 0.3_f64..3.0,
        m_e in 0.3_f64..3.0,
        gap in 0.0_f64..0.4,
        p in 1e-4_f64..1.5,
    ) {
        let args = TemplateArgs::new(m_g, m_e, gap, 1.0).unwrap();
        let lhs = template_absorption(p, &args);
        let rhs = template_emission(p, &args.swapped_negated());
        match (lhs, rhs) {
            (Ok(a), Ok(e)) => {
                let b = 2.0 - e;
                prop_assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "p={p} args={args:?}: {a} vs {b}"
                );
            }
            // Shared validity domain: both sides must agree on realness.
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one-sided domain failure: {a:?} vs {b:?}"),
        }
    }

    /// All rates scale exactly as coupling² under power-of-two rescaling.
    #[test]
    fn coupling_quadratic_scaling(
        gap in 0.01_f64..0.4,
        length in 2.0_f64..50.0,
    ) {
        let p1 = DetectorParams::with_units(1.0, gap, 1.0, 1.0).unwrap();
        let p2 = DetectorParams::with_units(1.0, gap, 1.0, 4.0).unwrap();
        for conv in [MassConvention::SemiRel, MassConvention::NonRelMg, MassConvention::NonRelMe] {
            let a = rate_emission_closed(&p1, length, conv).unwrap().value;
            let b = rate_emission_closed(&p2, length, conv).unwrap().value;
            prop_assert_eq!(16.0 * a, b);
            let a = rate_absorption_closed(&p1, length, conv).unwrap().value;
            let b = rate_absorption_closed(&p2, length, conv).unwrap().value;
            prop_assert_eq!(16.0 * a, b);
        }
    }

    /// Gaussian momentum density: radial normalization and second moment,
    /// to quadrature tolerance 1e-10 across the full width range.
    #[test]
    fn gaussian_moments(l in 0.1_f64..100.0) {
        let g = GaussianCoM::new(l).unwrap();
        let norm = integrate_radial(
            |p| 4.0 * std::f64::consts::PI * p * p * g.momentum_density(p),
            0.0,
            12.0 / l,
            1e-12,
            1e-15,
        )
        .unwrap();
        prop_assert!((norm.value - 1.0).abs() < 1e-10, "norm {}", norm.value);
        let second = integrate_radial(
            |p| 4.0 * std::f64::consts::PI * p.powi(4) * g.momentum_density(p),
            0.0,
            12.0 / l,
            1e-12,
            1e-15,
        )
        .unwrap();
        prop_assert!(
            (second.value - 3.0 / (l * l)).abs() <= 1e-10 * (3.0 / (l * l)),
            "second moment {} vs {}",
            second.value,
            3.0 / (l * l)
        );
    }
}

/// Both templates are nonnegative across their validity domains.
#[test]
fn template_positivity_grid() {
    for i in 0..9 {
        let gap = 0.05 * (i as f64 + 0.1); // E/m_g c² in (0, 0.45]
        let params = DetectorParams::new(1.0, gap).unwrap();
        let args = TemplateArgs::semirel(&params);
        for process in [Process::Emission, Process::Absorption] {
            let upper = radicand_boundary(process, &args).unwrap_or(2.0) * (1.0 - 1e-9);
            for j in 1..40 {
                let p = upper * j as f64 / 40.0;
                let t = match process {
                    Process::Emission => template_emission(p, &args),
                    Process::Absorption => template_absorption(p, &args),
                }
                .unwrap();
                assert!(t >= 0.0, "{process} gap={gap} p={p}: {t}");
            }
        }
    }
}

/// |T_exact - T_expanded| scales as p⁴: halving p shrinks the difference by
/// 16 within 10% (Richardson ratio).
#[test]
fn expansion_consistency_fourth_order() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let args = TemplateArgs::semirel(&params);
    let diff = |p: f64| template_emission(p, &args).unwrap() - template_emission_expanded(p, &args);
    for p in [0.1, 0.05] {
        let ratio = diff(p) / diff(p / 2.0);
        assert!(
            (ratio - 16.0).abs() <= 1.6,
            "fourth-order ratio at p={p}: {ratio}"
        );
    }
    // And the difference is bounded by C p⁴ with a stable constant.
    let c_est = diff(0.05) / 0.05_f64.powi(4);
    for p in [0.02, 0.05, 0.1, 0.2] {
        assert!(
            diff(p).abs() <= 1.5 * c_est.abs() * p.powi(4),
            "p={p}: diff {} vs bound",
            diff(p)
        );
    }
}

/// Setting m_e = m_g reproduces the equal-mass template up to O(E/m_g c²),
/// uniformly on p in (0, 0.3 m_g c]; the sup difference scales linearly in E.
#[test]
fn nonrel_reduction_linear_in_gap() {
    let sup_diff = |gap: f64| -> f64 {
        let semirel = TemplateArgs::new(1.0, 1.0 + gap, gap, 1.0).unwrap();
        let eqmass = TemplateArgs::equal_mass(1.0, gap, 1.0).unwrap();
        (1..=30)
            .map(|i| {
                let p = 0.3 * i as f64 / 30.0;
                (template_emission(p, &semirel).unwrap()
                    - template_emission(p, &eqmass).unwrap())
                .abs()
            })
            .fold(0.0, f64::max)
    };
    let d1 = sup_diff(0.01);
    let d2 = sup_diff(0.001);
    let ratio = d1 / d2;
    assert!(
        (ratio - 10.0).abs() <= 3.0,
        "sup-difference should scale linearly in the gap; ratio {ratio}"
    );
}

/// Emission suppression: semirelativistic rate below both nonrelativistic
/// rates across the parameter grid.
#[test]
fn emission_suppression_grid() {
    for i in 0..8 {
        let gap = 0.01 + 0.07 * i as f64; // up to 0.5
        for lmc in [2.0, 5.0, 10.0, 30.0, 100.0] {
            let params = DetectorParams::new(1.0, gap).unwrap();
            let semi = rate_emission_closed(&params, lmc, MassConvention::SemiRel)
                .unwrap()
                .value;
            for conv in [MassConvention::NonRelMg, MassConvention::NonRelMe] {
                let nr = rate_emission_closed(&params, lmc, conv).unwrap().value;
                assert!(
                    semi <= nr,
                    "E={gap} Lmc={lmc} {conv:?}: semi {semi} > nonrel {nr}"
                );
            }
        }
    }
}

/// Small-momentum-spread convergence: for emission the M = m_g choice
/// converges to the semirelativistic rate as L_p -> 0 (relative gap shrinks
/// as L_p²), while M = m_e does not; for absorption it is M = m_e that
/// converges.
#[test]
fn convention_convergence_small_momentum_spread() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let rel_gap = |conv: MassConvention, process: Process, l: f64| -> f64 {
        let (semi, other) = match process {
            Process::Emission => (
                rate_emission_closed(&params, l, MassConvention::SemiRel).unwrap(),
                rate_emission_closed(&params, l, conv).unwrap(),
            ),
            Process::Absorption => (
                rate_absorption_closed(&params, l, MassConvention::SemiRel).unwrap(),
                rate_absorption_closed(&params, l, conv).unwrap(),
            ),
        };
        ((semi.value - other.value) / semi.value).abs()
    };

    // Emission: NonRelMg gap scales as L_p² = 1/L².
    let g1 = rel_gap(MassConvention::NonRelMg, Process::Emission, 10.0);
    let g2 = rel_gap(MassConvention::NonRelMg, Process::Emission, 20.0);
    let ratio = g1 / g2;
    assert!((ratio - 4.0).abs() <= 0.4, "L_p² scaling ratio: {ratio}");
    // NonRelMe saturates at an E²-sized offset instead; at matched small
    // L_p the M = m_g choice is decisively the better approximation.
    let e1 = rel_gap(MassConvention::NonRelMe, Process::Emission, 100.0);
    let e2 = rel_gap(MassConvention::NonRelMe, Process::Emission, 200.0);
    assert_relative_eq!(e1, e2, max_relative = 1e-2);
    let g_small = rel_gap(MassConvention::NonRelMg, Process::Emission, 200.0);
    assert!(
        e2 > 100.0 * g_small,
        "NonRelMe gap {e2} should dwarf NonRelMg gap {g_small} at small L_p"
    );

    // Absorption: M = m_e is the convention that converges.
    let a_me_1 = rel_gap(MassConvention::NonRelMe, Process::Absorption, 10.0);
    let a_me_2 = rel_gap(MassConvention::NonRelMe, Process::Absorption, 20.0);
    let a_mg = rel_gap(MassConvention::NonRelMg, Process::Absorption, 20.0);
    assert!((a_me_1 / a_me_2 - 4.0).abs() <= 0.4);
    assert!(a_me_2 < a_mg, "M=m_e gap {a_me_2} should be smallest, M=m_g gap {a_mg}");
}

/// Quadrature-vs-closed-form residual scales as L_p⁴: halving L_p shrinks
/// it by about 16.
#[test]
fn quadrature_residual_fourth_order_in_spread() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let residual = |l: f64| -> f64 {
        let dist = MomentumDist::Gaussian(GaussianCoM::new(l).unwrap());
        let req = RateRequest::new(params, MassConvention::SemiRel, Process::Emission, dist)
            .with_method(Method::Quadrature)
            .with_tolerances(1e-12, 1e-16);
        let quad = rate_quadrature(&req).unwrap().value;
        let closed = rate_emission_closed(&params, l, MassConvention::SemiRel)
            .unwrap()
            .value;
        (quad - closed).abs()
    };
    let r1 = residual(20.0);
    let r2 = residual(40.0);
    let ratio = r1 / r2;
    assert!(
        (ratio - 16.0).abs() <= 3.2,
        "L_p⁴ Richardson ratio: {ratio} (residuals {r1}, {r2})"
    );
}

/// Oracle constancy for absorption, including the measured p -> 0 constant:
/// S(p)/T(p) = m_e across the validity range.
#[test]
fn oracle_absorption_ratio_constant() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let args = TemplateArgs::semirel(&params);
    let limit_ratio = shape_small_p_limit(Process::Absorption, &params).unwrap()
        / template_small_p_limit(Process::Absorption, &args).unwrap();
    assert_relative_eq!(limit_ratio, params.excited_mass(), max_relative = 1e-12);
    for p in [0.02, 0.1, 0.3, 0.6] {
        let s = golden_rule_shape(Process::Absorption, p, &params).unwrap();
        let t = template_absorption(p, &args).unwrap();
        assert_relative_eq!(s.value / t, limit_ratio, max_relative = 1e-6);
    }
}

/// The expanded-template quadrature reproduces closed forms for absorption
/// as well (the Gaussian averages are exact).
#[test]
fn absorption_expanded_quadrature_matches_closed() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let dist = MomentumDist::Gaussian(GaussianCoM::new(10.0).unwrap());
    // Integrate the full Gaussian, not just up to the default cutoff, to
    // compare against the closed form.
    let req = RateRequest::new(params, MassConvention::SemiRel, Process::Absorption, dist)
        .with_method(Method::Quadrature)
        .with_template(TemplateKind::Expanded)
        .with_cutoff(0.68) // just inside the validity boundary 0.6838
        .with_tolerances(1e-13, 1e-16);
    let quad = rate_quadrature(&req).unwrap();
    let closed = rate_absorption_closed(&params, 10.0, MassConvention::SemiRel).unwrap();
    // The Gaussian tail beyond the cutoff carries ~1e-11 relative mass at
    // L_p = 0.1, 6.8 sigma.
    assert_relative_eq!(quad.value, closed.value, max_relative = 1e-9);
}

/// Series estimation reproduces the p² coefficient of the expanded template
/// and the energy-derivative of the closed-form rate.
#[test]
fn series_estimates_match_expansions() {
    let params = DetectorParams::new(1.0, 0.1).unwrap();
    let args = TemplateArgs::semirel(&params);
    // Templates are even in p, so the second-order Taylor coefficient about
    // zero can be probed through |x|.
    let f = |x: f64| template_emission(x.abs(), &args).unwrap();
    let c2 = series_coefficient_estimate(f, 0.0, 2, 0.02).unwrap();
    assert_relative_eq!(c2.value, 0.057630740478237175237, max_relative = 1e-6);

    // d/dE of the semirelativistic emission rate at E = 0 equals
    // (lambda²/2π)(1 + (3/2)/(L m_g c)²).
    let length = 10.0;
    let g = |gap: f64| {
        udw_core::rates::emission_closed_semirel_masses(1.0, 1.0 + gap, gap, 1.0, 1.0, length)
    };
    let c1 = series_coefficient_estimate(g, 0.0, 1, 1e-3).unwrap();
    let expected = (1.0 + 1.5 / (length * length)) / (2.0 * std::f64::consts::PI);
    assert_relative_eq!(c1.value, expected, max_relative = 1e-8);
}
