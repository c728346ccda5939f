use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::horizon::Gauge;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `g(u) / minᵢ⟨zᵢ, u⟩` at `u = (cos θ, sin θ)`, `+∞` where the margin is not positive.
fn ratio<T: Scalar>(gauge: &Gauge<T>, z: &Matrix<T>, theta: T) -> T {
    let u = [theta.cos(), theta.sin()];
    let m = z
        .iter_rows()
        .map(|zi| zi[0] * u[0] + zi[1] * u[1])
        .fold(T::infinity(), T::min);
    if m > T::zero() {
        gauge.eval(&u).map_or(T::infinity(), |g| g / m)
    } else {
        T::infinity()
    }
}

/// Planar max-margin by brute force: scan `resolution` angles for the
/// smallest `g(u) / minᵢ⟨zᵢ, u⟩`, refine by golden-section search between the
/// neighbours of the best angle, return `u / minᵢ⟨zᵢ, u⟩`.
///
/// The ratio is quasiconvex along arcs shorter than π (its sublevel sets are
/// convex cones), so the refinement converges to the global minimizer once
/// the grid has isolated its basin.
pub fn angular_sweep_oracle<T: Scalar>(
    gauge: &Gauge<T>,
    z: &Matrix<T>,
    resolution: usize,
) -> Result<Vec<T>> {
    check_dim(2, z.cols())?;
    if resolution < 8 {
        return Err(Error::Contract(
            "angular sweep needs at least 8 angles".into(),
        ));
    }
    let step = T::lit(std::f64::consts::TAU) / T::from_count(resolution);
    let (best_k, best) = (0..resolution)
        .into_par_iter()
        .map(|k| (k, ratio(gauge, z, step * T::from_count(k))))
        .reduce(
            || (usize::MAX, T::infinity()),
            |a, b| {
                if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    if !best.is_finite() {
        return Err(Error::Infeasible(
            "no direction with positive margin".into(),
        ));
    }
    let phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut a = step * (T::from_count(best_k) - T::one());
    let mut b = step * (T::from_count(best_k) + T::one());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (ratio(gauge, z, c), ratio(gauge, z, d));
    for _ in 0..200 {
        if b - a <= T::epsilon() * T::lit(8.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ratio(gauge, z, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ratio(gauge, z, d);
        }
    }
    let theta = if fc <= fd { c } else { d };
    let theta = if ratio(gauge, z, theta) <= best {
        theta
    } else {
        step * T::from_count(best_k)
    };
    let u = [theta.cos(), theta.sin()];
    let m = z
        .iter_rows()
        .map(|zi| zi[0] * u[0] + zi[1] * u[1])
        .fold(T::infinity(), T::min);
    Ok(vec![u[0] / m, u[1] / m])
}
