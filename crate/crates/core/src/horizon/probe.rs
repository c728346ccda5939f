use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::gauge::{Gauge, SampledGauge};
use crate::error::{Error, Result};
use crate::linalg::normalized;
use crate::potentials::VectorPotential;
use crate::scalar::Scalar;

pub const DEFAULT_GAP_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 0.05;

/// Unit directions on which radial functions are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionGrid<T> {
    dim: usize,
    directions: Vec<Vec<T>>,
}

impl<T: Scalar> DirectionGrid<T> {
    /// `n` equally spaced angles on the circle, starting at angle 0.
    pub fn circle(n: usize) -> Self {
        let directions = (0..n)
            .map(|k| {
                let t = T::lit(std::f64::consts::TAU) * T::from_count(k) / T::from_count(n);
                vec![t.cos(), t.sin()]
            })
            .collect();
        DirectionGrid { dim: 2, directions }
    }

    /// Fibonacci lattice on the 2-sphere.
    pub fn fibonacci_sphere(n: usize) -> Self {
        let golden = T::lit(std::f64::consts::PI * (3.0 - 5f64.sqrt()));
        let directions = (0..n)
            .map(|k| {
                let z =
                    T::one() - T::lit(2.0) * (T::from_count(k) + T::lit(0.5)) / T::from_count(n);
                let r = (T::one() - z * z).sqrt();
                let t = golden * T::from_count(k);
                vec![r * t.cos(), r * t.sin(), z]
            })
            .collect();
        DirectionGrid { dim: 3, directions }
    }

    /// Seeded Gaussian directions together with the `2d` signed coordinate axes.
    pub fn random_sphere(dim: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut directions = Vec::with_capacity(n + 2 * dim);
        for k in 0..dim {
            for s in [T::one(), -T::one()] {
                let mut e = vec![T::zero(); dim];
                e[k] = s;
                directions.push(e);
            }
        }
        while directions.len() < n + 2 * dim {
            let v: Vec<T> = (0..dim)
                .map(|_| T::lit(StandardNormal.sample(&mut rng)))
                .collect();
            if let Some(u) = normalized(&v) {
                directions.push(u);
            }
        }
        DirectionGrid { dim, directions }
    }

    /// 720 angles in the plane, a 2000-point Fibonacci lattice on the 2-sphere,
    /// seeded random directions beyond.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            0 | 1 => Err(Error::Contract(format!(
                "direction grids need d ≥ 2, got {dim}"
            ))),
            2 => Ok(Self::circle(720)),
            3 => Ok(Self::fibonacci_sphere(2000)),
            d => Ok(Self::random_sphere(d, 4000, 0)),
        }
    }

    pub fn from_directions(directions: Vec<Vec<T>>) -> Result<Self> {
        let dim = directions.first().map_or(0, Vec::len);
        let directions = directions
            .iter()
            .map(|u| {
                crate::error::check_dim(dim, u.len())?;
                normalized(u).ok_or_else(|| Error::Contract("zero grid direction".into()))
            })
            .collect::<Result<_>>()?;
        Ok(DirectionGrid { dim, directions })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec<T>] {
        &self.directions
    }
}

/// Normalized sublevel sets `S̄_c = S_c / R_c` sampled on a direction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonShapeProbe<T> {
    pub potential: String,
    pub levels: Vec<T>,
    pub grid: DirectionGrid<T>,
    /// `R_c = max ‖β‖₂` over `S_c`, per level.
    pub outer_radius: Vec<T>,
    /// `r_c(u) = ρ_c(u) / R_c` per level, per direction.
    pub radial: Vec<Vec<T>>,
    /// `sup_u |r_{c_k}(u) − r_{c_{k+1}}(u)|`
    pub hausdorff_gaps: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub potential: String,
    pub levels: Vec<f64>,
    pub hausdorff_gaps: Vec<f64>,
    pub final_gap: Option<f64>,
    pub min_final_radial: f64,
    pub degenerate: bool,
    pub degeneracy_threshold: f64,
}

impl<T: Scalar> HorizonShapeProbe<T> {
    pub fn final_radial(&self) -> &[T] {
        self.radial.last().map_or(&[], Vec::as_slice)
    }

    pub fn last_gap(&self) -> Option<T> {
        self.hausdorff_gaps.last().copied()
    }

    pub fn min_final_radial(&self) -> T {
        self.final_radial()
            .iter()
            .copied()
            .fold(T::infinity(), T::min)
    }

    pub fn is_degenerate(&self, threshold: T) -> bool {
        self.min_final_radial() < threshold
    }

    pub fn summary(&self, degeneracy_threshold: f64) -> ProbeSummary {
        ProbeSummary {
            potential: self.potential.clone(),
            levels: self.levels.iter().map(|c| c.as_f64()).collect(),
            hausdorff_gaps: self.hausdorff_gaps.iter().map(|g| g.as_f64()).collect(),
            final_gap: self.last_gap().map(|g| g.as_f64()),
            min_final_radial: self.min_final_radial().as_f64(),
            degenerate: self.is_degenerate(T::lit(degeneracy_threshold)),
            degeneracy_threshold,
        }
    }

    /// Rows `level,angle,radial` in the plane; `level,direction,radial` otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let planar = self.grid.dim() == 2;
        out.push_str(if planar {
            "level,angle,radial\n"
        } else {
            "level,direction,radial\n"
        });
        for (c, rs) in self.levels.iter().zip(&self.radial) {
            for (k, (u, r)) in self.grid.directions().iter().zip(rs).enumerate() {
                if planar {
                    let _ = writeln!(
                        out,
                        "{:e},{},{}",
                        c.as_f64(),
                        u[1].atan2(u[0]).as_f64(),
                        r.as_f64()
                    );
                } else {
                    let _ = writeln!(out, "{:e},{},{}", c.as_f64(), k, r.as_f64());
                }
            }
        }
        out
    }
}

/// Largest `t` with `φ(t u) ≤ c`, found on the log scale: bracket by
/// doubling, then bisect until the bracket is at machine precision.
fn radial_crossing<T: Scalar>(p: &VectorPotential<T>, u: &[T], log_c: T) -> Result<T> {
    let f = |t: T| -> Result<T> {
        let beta: Vec<T> = u.iter().map(|&x| x * t).collect();
        p.log_value(&beta)
    };
    let geometry = || Error::Geometry {
        direction: u.iter().map(|x| x.as_f64()).collect(),
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    while f(hi)? < log_c {
        lo = hi;
        hi = hi * T::lit(2.0);
        if !hi.is_finite() || hi > T::max_value() / T::lit(4.0) {
            return Err(geometry());
        }
    }
    if lo == T::zero() {
        while f(hi * T::lit(0.5))? >= log_c && hi > T::min_positive_value() {
            hi = hi * T::lit(0.5);
        }
        lo = hi * T::lit(0.5);
    }
    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < log_c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Samples the normalized sublevel sets of `p` at each level along each
/// grid direction. Directions are processed in parallel; the result does not
/// depend on the schedule.
pub fn horizon_shape_numeric<T: Scalar>(
    p: &VectorPotential<T>,
    levels: &[T],
    grid: &DirectionGrid<T>,
) -> Result<HorizonShapeProbe<T>> {
    crate::error::check_dim(p.dim(), grid.dim())?;
    if levels.is_empty()
        || levels.iter().any(|&c| !(c > T::zero()))
        || levels.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Contract(
            "levels must be positive and strictly increasing".into(),
        ));
    }
    let mut outer_radius = Vec::with_capacity(levels.len());
    let mut radial = Vec::with_capacity(levels.len());
    for &c in levels {
        let log_c = c.ln();
        let rho: Vec<T> = grid
            .directions()
            .par_iter()
            .map(|u| radial_crossing(p, u, log_c))
            .collect::<Result<_>>()?;
        let big_r = rho.iter().copied().fold(T::zero(), T::max);
        outer_radius.push(big_r);
        radial.push(rho.into_iter().map(|r| r / big_r).collect::<Vec<_>>());
    }
    let hausdorff_gaps = radial
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(&a, &b)| (a - b).abs())
                .fold(T::zero(), T::max)
        })
        .collect();
    Ok(HorizonShapeProbe {
        potential: p.name(),
        levels: levels.to_vec(),
        grid: grid.clone(),
        outer_radius,
        radial,
        hausdorff_gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions<T> {
    pub gap_tolerance: T,
    pub degeneracy_threshold: T,
}

impl<T: Scalar> Default for ProbeOptions<T> {
    fn default() -> Self {
        ProbeOptions {
            gap_tolerance: T::lit(DEFAULT_GAP_TOLERANCE),
            degeneracy_threshold: T::lit(DEFAULT_DEGENERACY_THRESHOLD),
        }
    }
}

/// Canonicalized sampled gauge of the final normalized sublevel set.
///
/// Refuses degenerate shapes (some radius below the threshold) and probes
/// whose last Hausdorff gap is above tolerance.
pub fn gauge_from_probe<T: Scalar>(
    probe: &HorizonShapeProbe<T>,
    opts: &ProbeOptions<T>,
) -> Result<Gauge<T>> {
    let min_r = probe.min_final_radial();
    if !(min_r >= opts.degeneracy_threshold) {
        return Err(Error::DegenerateShape {
            min_radial: min_r.as_f64(),
            threshold: opts.degeneracy_threshold.as_f64(),
        });
    }
    if let Some(gap) = probe.last_gap() {
        if !(gap <= opts.gap_tolerance) {
            return Err(Error::NotConverged {
                gap: gap.as_f64(),
                tolerance: opts.gap_tolerance.as_f64(),
            });
        }
    }
    let shape = SampledGauge::new(
        probe.grid.directions().to_vec(),
        probe.final_radial().to_vec(),
    )?;
    Ok(Gauge::sampled(shape).canonicalized(probe.grid.dim()))
}
