use rayon::prelude::*;

use super::gauge::{Gauge, SampledGauge};
use super::probe::DirectionGrid;
use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, norm_inf};
use crate::potentials::{HorizonRate, ScalarPotential, VectorPotential};
use crate::scalar::Scalar;

/// Controls the `η = 2⁻ᵏ` schedule of [`horizon_separable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableOptions<T> {
    /// Relative change between successive halvings for exact and geometric limits.
    pub tol: T,
    /// Relative change between successive extrapolations for logarithmic limits.
    pub log_tol: T,
    /// Fewest halvings before a logarithmically converging limit is accepted.
    pub min_halvings: usize,
    pub max_halvings: usize,
    /// Samples in the `a + b / ln(1/η)` fit.
    pub fit_window: usize,
}

impl<T: Scalar> Default for SeparableOptions<T> {
    fn default() -> Self {
        SeparableOptions {
            tol: T::lit(1e-9).max(T::epsilon() * T::lit(64.0)),
            log_tol: T::lit(1e-4),
            min_halvings: 40,
            max_halvings: 400,
            fit_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonEstimate<T> {
    pub value: T,
    /// The two estimates compared by the acceptance test.
    pub last: T,
    pub previous: T,
    pub halvings: usize,
    /// Whether `value` comes from the `a + b / ln(1/η)` extrapolation.
    pub extrapolated: bool,
}

/// `h_η(β̄) = η ϕ⁻¹(Σᵢ ϕ(β̄ᵢ/η))`, computed through `ln ϕ` so that cosh-type
/// potentials do not overflow.
fn h_eta<T: Scalar>(phi: &ScalarPotential<T>, beta: &[T], eta: T) -> Result<T> {
    let logs: Vec<T> = beta.iter().map(|&b| phi.log_value(b / eta)).collect();
    let log_sum = log_sum_exp(&logs);
    if !log_sum.is_finite() {
        return Err(Error::Numeric {
            what: "ϕ overflow in horizon limit".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(eta * phi.inverse_value_log(log_sum)?)
}

/// Least-squares intercept of `h = a + b x`.
fn intercept<T: Scalar>(xs: &[T], hs: &[T]) -> T {
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let mh = hs.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxh: T = xs.iter().zip(hs).map(|(&x, &h)| (x - mx) * (h - mh)).sum();
    mh - sxh / sxx * mx
}

/// Limit of `η ϕ⁻¹(Σᵢ ϕ(β̄ᵢ/η))` as `η → 0` for a separable even potential,
/// the horizon function up to its free positive scale.
///
/// Homogeneous potentials are exact at any `η`; cosh-type potentials converge
/// geometrically and are accepted once successive halvings agree to `tol`;
/// the rest converge like `1/ln(1/η)` and are extrapolated from an
/// `a + b / ln(1/η)` fit over the last `fit_window` samples.
pub fn horizon_separable<T: Scalar>(
    p: &VectorPotential<T>,
    beta: &[T],
    opts: &SeparableOptions<T>,
) -> Result<HorizonEstimate<T>> {
    let phi = p.as_separable().ok_or_else(|| {
        Error::Contract(format!(
            "{} is not separable with a shared scalar potential",
            p.name()
        ))
    })?;
    crate::error::check_dim(p.dim(), beta.len())?;
    let m = norm_inf(beta);
    if m == T::zero() {
        return Err(Error::Contract("horizon of the zero vector".into()));
    }
    // homogeneous in the limit, so evaluate on max|β̄ᵢ| = 1
    let unit: Vec<T> = beta.iter().map(|&b| b / m).collect();
    let half = T::lit(0.5);
    let done =
        |value: T, last: T, previous: T, halvings: usize, extrapolated: bool| HorizonEstimate {
            value: value * m,
            last: last * m,
            previous: previous * m,
            halvings,
            extrapolated,
        };

    match phi.horizon_rate() {
        HorizonRate::Exact => {
            let a = h_eta(phi, &unit, T::one())?;
            let b = h_eta(phi, &unit, half)?;
            Ok(done(b, b, a, 1, false))
        }
        HorizonRate::Geometric => {
            let mut eta = T::one();
            let mut prev = h_eta(phi, &unit, eta)?;
            for k in 1..=opts.max_halvings {
                eta = eta * half;
                let h = match h_eta(phi, &unit, eta) {
                    Ok(h) => h,
                    Err(_) => {
                        return Err(Error::LimitFailure {
                            last: (prev * m).as_f64(),
                            previous: (prev * m).as_f64(),
                        })
                    }
                };
                if (h - prev).abs() < opts.tol * h.abs() {
                    return Ok(done(h, h, prev, k, false));
                }
                prev = h;
            }
            Err(Error::LimitFailure {
                last: (prev * m).as_f64(),
                previous: (prev * m).as_f64(),
            })
        }
        HorizonRate::Logarithmic => {
            let w = opts.fit_window.max(3);
            let ln2 = T::lit(std::f64::consts::LN_2);
            let mut xs: Vec<T> = Vec::new();
            let mut hs: Vec<T> = Vec::new();
            let mut prev_fit: Option<T> = None;
            let mut eta = T::one();
            for k in 1..=opts.max_halvings {
                eta = eta * half;
                let h = match h_eta(phi, &unit, eta) {
                    Ok(h) => h,
                    Err(_) => break,
                };
                xs.push((T::from_count(k) * ln2).recip());
                hs.push(h);
                if xs.len() < w {
                    continue;
                }
                let a = intercept(&xs[xs.len() - w..], &hs[hs.len() - w..]);
                if let Some(pa) = prev_fit {
                    if k >= opts.min_halvings && (a - pa).abs() < opts.log_tol * a.abs() {
                        return Ok(done(a, a, pa, k, true));
                    }
                }
                prev_fit = Some(a);
            }
            let last = prev_fit.unwrap_or(T::nan()) * m;
            let previous = hs.last().copied().unwrap_or(T::nan()) * m;
            Err(Error::LimitFailure {
                last: last.as_f64(),
                previous: previous.as_f64(),
            })
        }
    }
}

/// Sampled gauge of a separable potential's horizon function, built from
/// [`horizon_separable`] along each grid direction and canonicalized.
pub fn gauge_from_separable<T: Scalar>(
    p: &VectorPotential<T>,
    grid: &DirectionGrid<T>,
    opts: &SeparableOptions<T>,
) -> Result<Gauge<T>> {
    let radial: Vec<T> = grid
        .directions()
        .par_iter()
        .map(|u| horizon_separable(p, u, opts).map(|h| h.value.recip()))
        .collect::<Result<_>>()?;
    let rmax = radial.iter().copied().fold(T::zero(), T::max);
    let radial = radial.into_iter().map(|r| r / rmax).collect();
    let shape = SampledGauge::new(grid.directions().to_vec(), radial)?;
    Ok(Gauge::sampled(shape).canonicalized(p.dim()))
}
