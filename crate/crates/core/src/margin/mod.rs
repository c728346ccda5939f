//! The gauge max-margin problem `min g(β) s.t. Zβ ≥ 1`, its optimality
//! conditions and a brute-force planar oracle.
//!
//! At a solution there are multipliers `q ≥ 0` with `Zᵀq ∈ ∂g(β)` and
//! `qᵢ((Zβ)ᵢ − 1) = 0`; every solver returns such a `q` in `dual`.

mod generic;
mod kkt;
mod l2;
mod lp;
mod oracle;

use serde::Serialize;

pub use generic::GenericOptions;
pub use kkt::{kkt_verify, KktReport};
pub use oracle::angular_sweep_oracle;

use crate::data::separability;
use crate::error::{check_dim, Error, Result};
use crate::horizon::{Gauge, GaugeKind};
use crate::linalg::{cosine, norm_inf, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginProblem<T> {
    pub gauge: Gauge<T>,
    pub z: Matrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals<T> {
    pub stationarity: T,
    pub slackness: T,
    pub feasibility: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Uniqueness<T> {
    Unique,
    /// A second optimal point that differs from `beta`.
    PossiblyNonUnique {
        other: Vec<T>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginSolution<T> {
    pub beta: Vec<T>,
    pub objective: T,
    pub dual: Vec<T>,
    pub residuals: KktResiduals<T>,
    pub uniqueness: Uniqueness<T>,
    pub method: String,
    /// False when an iterative path stopped on its iteration cap.
    pub converged: bool,
    /// `‖Zᵀα‖² − Σα` for the ℓ2 dual, when that path ran.
    pub duality_gap: Option<T>,
}

impl<T: Scalar> MarginProblem<T> {
    pub fn new(gauge: Gauge<T>, z: Matrix<T>) -> Result<Self> {
        if let Some(d) = gauge.dim() {
            check_dim(d, z.cols())?;
        }
        if z.rows() == 0 || z.cols() == 0 {
            return Err(Error::Contract("empty margin problem".into()));
        }
        Ok(MarginProblem { gauge, z })
    }
}

/// Whether two solver outputs name different points, relative to their size.
pub(crate) fn differ<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let scale = norm_inf(a).max(norm_inf(b)).max(T::one());
    a.iter()
        .zip(b)
        .any(|(&x, &y)| (x - y).abs() > T::lit(1e-7) * scale)
}

/// Solves `min g(β) s.t. Zβ ≥ 1`, dispatching on the gauge:
/// ℓ1, ℓ∞ and planar sampled gauges by linear programming, ℓ2 by dual
/// coordinate descent, everything else by the generic penalty path.
///
/// Solvers work on the gauge at unit scale; `objective` and `dual` are then
/// rescaled, so `beta` does not depend on the gauge's scale.
pub fn solve_max_margin<T: Scalar>(prob: &MarginProblem<T>) -> Result<MarginSolution<T>> {
    solve_with(prob, &GenericOptions::default())
}

pub fn solve_with<T: Scalar>(
    prob: &MarginProblem<T>,
    opts: &GenericOptions<T>,
) -> Result<MarginSolution<T>> {
    let sep = separability(&prob.z)?;
    if !sep.separable {
        return Err(Error::Infeasible(format!(
            "constraints Zβ ≥ 1 are infeasible (LP margin {})",
            sep.margin
        )));
    }
    let unit = prob.gauge.with_scale(T::one())?;
    let mut sol = match unit.kind() {
        GaugeKind::L1 => lp::solve_l1(&prob.z)?,
        GaugeKind::Linf => lp::solve_linf(&prob.z)?,
        GaugeKind::Sampled(s) if s.dim() == 2 => lp::solve_polygon(s.facets(), &prob.z)?,
        GaugeKind::L2 => l2::solve(&prob.z)?,
        _ => generic::solve(&unit, &prob.z, opts)?,
    };
    let s = prob.gauge.scale();
    sol.objective = sol.objective * s;
    for q in &mut sol.dual {
        *q = *q * s;
    }
    sol.residuals = kkt::residuals(&prob.gauge, &prob.z, &sol.beta, &sol.dual)?;
    Ok(sol)
}

/// `1 − cos(direction, sol.beta)`: 0 for aligned, 2 for opposite.
pub fn directional_gap<T: Scalar>(direction: &[T], sol: &MarginSolution<T>) -> Result<T> {
    Ok(T::one() - cosine(direction, &sol.beta)?)
}
