//! Self-contained numerical kernels: adaptive radial quadrature, bracketed
//! root finding, and finite-difference Taylor-coefficient estimation.

#![allow(clippy::excessive_precision)] // full-precision rule tables and references

use thiserror::Error;

/// Default relative tolerance for [`integrate_radial`] callers.
pub const DEFAULT_RTOL: f64 = 1e-9;
/// Default absolute tolerance for [`integrate_radial`] callers.
pub const DEFAULT_ATOL: f64 = 1e-12;
/// Integrand-evaluation budget before an unconverged integral fails.
pub const EVALUATION_BUDGET: usize = 1_000_000;

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature failed to converge: {reason} (value {}, error estimate {}, {} evaluations)",
        .best.evaluations, .best.value, .best.abs_error
    )]
    Failure {
        reason: &'static str,
        best: QuadratureOutcome,
    },
    #[error("invalid integration interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
}

// 21-point Kronrod rule with embedded 10-point Gauss rule (QUADPACK qk21
// constants). Abscissae are for the positive half of [-1, 1]; none lies at
// an endpoint, so integrands may be singular at the interval boundary as
// long as the integral exists.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Gauss-Kronrod 21-point panel: returns (kronrod value, error estimate).
fn qk21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut samples = [0.0_f64; 21];
    samples[10] = f_center;

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        samples[j] = f1;
        samples[20 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((samples[j] - mean).abs() + (samples[20 - j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0_f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// Adaptive quadrature of `f` over `[lo, hi]`.
///
/// Panels are subdivided worst-error-first until the summed error estimate
/// satisfies `max(atol, rtol * |value|)`. The rule never evaluates the
/// endpoints, so integrable endpoint behavior (such as the removable
/// `1/p`-type structure of templates at `p = 0` under the `p²` measure)
/// needs no special casing.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rtol: f64,
    atol: f64,
) -> Result<QuadratureOutcome, QuadratureError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadratureError::BadInterval { lo, hi });
    }

    let (value, error) = qk21(&f, lo, hi);
    let mut panels = vec![Panel {
        lo,
        hi,
        value,
        error,
    }];
    // Panels narrowed to floating-point resolution; no longer splittable but
    // still counted in the value and error totals.
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 21usize;

    loop {
        let total: f64 = panels.iter().chain(&frozen).map(|p| p.value).sum();
        let total_err: f64 = panels.iter().chain(&frozen).map(|p| p.error).sum();
        let best = QuadratureOutcome {
            value: total,
            abs_error: total_err,
            evaluations,
            converged: false,
        };
        if !(total.is_finite() && total_err.is_finite()) {
            return Err(QuadratureError::Failure {
                reason: "non-finite integrand value encountered",
                best,
            });
        }
        let target = atol.max(rtol * total.abs());
        if total_err <= target {
            return Ok(QuadratureOutcome {
                converged: true,
                ..best
            });
        }
        if panels.is_empty() {
            return Err(QuadratureError::Failure {
                reason: "all panels at floating-point resolution",
                best,
            });
        }
        if evaluations + 42 > EVALUATION_BUDGET {
            return Err(QuadratureError::Failure {
                reason: "evaluation budget exhausted",
                best,
            });
        }

        // Split the panel with the largest error estimate.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("panel list is never empty");
        let panel = panels.swap_remove(worst);
        let mid = 0.5 * (panel.lo + panel.hi);
        if mid <= panel.lo || mid >= panel.hi {
            frozen.push(panel);
            continue;
        }
        for (a, b) in [(panel.lo, mid), (mid, panel.hi)] {
            let (value, error) = qk21(&f, a, b);
            panels.push(Panel {
                lo: a,
                hi: b,
                value,
                error,
            });
        }
        evaluations += 42;
    }
}

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOutcome {
    pub root: f64,
    pub residual: f64,
    pub bracket_width: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on bracket: f({a}) = {fa}, f({b}) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
}

/// Hybrid secant/bisection root finder on a sign-changing bracket.
///
/// A secant step is taken whenever it lands inside the current bracket and
/// shrinks it adequately; otherwise the step falls back to bisection, which
/// guarantees termination. Iterates until the bracket is narrower than
/// `xtol` and the residual is within `ftol`.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    xtol: f64,
    ftol: f64,
) -> Result<RootOutcome, RootError> {
    let mut lo = a.min(b);
    let mut hi = a.max(b);
    let mut flo = f(lo);
    let mut fhi = f(hi);

    if flo == 0.0 {
        return Ok(RootOutcome {
            root: lo,
            residual: 0.0,
            bracket_width: hi - lo,
        });
    }
    if fhi == 0.0 {
        return Ok(RootOutcome {
            root: hi,
            residual: 0.0,
            bracket_width: hi - lo,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoSignChange {
            a: lo,
            b: hi,
            fa: flo,
            fb: fhi,
        });
    }

    let mut best = if flo.abs() <= fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };

    for _ in 0..200 {
        let width = hi - lo;
        if width <= xtol && best.1.abs() <= ftol {
            break;
        }

        // Secant candidate from the bracket endpoints.
        let mut x = lo - flo * (hi - lo) / (fhi - flo);
        let margin = 0.01 * width;
        if !x.is_finite() || x <= lo + margin || x >= hi - margin {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(RootOutcome {
                root: x,
                residual: 0.0,
                bracket_width: hi - lo,
            });
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo <= f64::EPSILON * (lo.abs().max(hi.abs()).max(1.0)) {
            break;
        }
    }

    Ok(RootOutcome {
        root: best.0,
        residual: best.1,
        bracket_width: hi - lo,
    })
}

/// A Taylor coefficient estimated by finite differences, with the spread of
/// the last Richardson levels as its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCoefficient {
    pub value: f64,
    pub uncertainty: f64,
    pub levels_used: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("Richardson levels disagree: best estimate {value} with uncertainty {uncertainty}")]
    UnstableEstimate { value: f64, uncertainty: f64 },
    #[error("unsupported Taylor order {order}; only 0, 1, 2 are implemented")]
    UnsupportedOrder { order: usize },
}

const RICHARDSON_LEVELS: usize = 7;

/// Taylor coefficient of `f` about `x0` at the given `order` (0, 1, or 2).
///
/// Central differences with step `scale / 2^k` are combined by Richardson
/// extrapolation (error series in `h²`); the returned uncertainty is the
/// disagreement of the two best diagonal entries. Polynomials up to degree 4
/// are reproduced to near machine precision.
pub fn series_coefficient_estimate<F: Fn(f64) -> f64>(
    f: F,
    x0: f64,
    order: usize,
    scale: f64,
) -> Result<SeriesCoefficient, SeriesError> {
    match order {
        0 => Ok(SeriesCoefficient {
            value: f(x0),
            uncertainty: 0.0,
            levels_used: 1,
        }),
        1 | 2 => {
            let f0 = if order == 2 { f(x0) } else { 0.0 };
            let mut fscale = f0.abs();
            let base: Vec<f64> = (0..RICHARDSON_LEVELS)
                .map(|k| {
                    let h = scale / (1u64 << k) as f64;
                    let fp = f(x0 + h);
                    let fm = f(x0 - h);
                    fscale = fscale.max(fp.abs()).max(fm.abs());
                    if order == 1 {
                        (fp - fm) / (2.0 * h)
                    } else {
                        // Second derivative over 2! gives the Taylor coefficient.
                        (fp - 2.0 * f0 + fm) / (h * h) / 2.0
                    }
                })
                .collect();

            // Richardson table; rows[j] eliminates the h^(2j) error term and
            // diag[k] = rows[k][0] is the best estimate using steps down to
            // scale / 2^k.
            let n = base.len();
            let mut rows: Vec<Vec<f64>> = vec![base];
            for j in 1..n {
                let prev = &rows[j - 1];
                let factor = 4.0_f64.powi(j as i32);
                let row: Vec<f64> = (0..prev.len() - 1)
                    .map(|k| (factor * prev[k + 1] - prev[k]) / (factor - 1.0))
                    .collect();
                rows.push(row);
            }
            let diag: Vec<f64> = (0..n).map(|k| rows[k][0]).collect();

            // Spread between successive diagonal entries; the smallest marks
            // the sweet spot before roundoff takes over.
            let mut best_k = 1;
            let mut best_u = f64::INFINITY;
            for k in 1..n {
                let u = (diag[k] - diag[k - 1]).abs();
                if u < best_u {
                    best_u = u;
                    best_k = k;
                }
            }
            let value = diag[best_k];
            let floor = 1e-9 * fscale / scale.powi(order as i32) + f64::MIN_POSITIVE;
            if best_u > (1e-2 * value.abs()).max(floor) {
                return Err(SeriesError::UnstableEstimate {
                    value,
                    uncertainty: best_u,
                });
            }
            Ok(SeriesCoefficient {
                value,
                uncertainty: best_u,
                levels_used: best_k + 1,
            })
        }
        _ => Err(SeriesError::UnsupportedOrder { order }),
    }
}
