use serde::Serialize;

use super::{KktResiduals, MarginSolution};
use crate::error::{check_dim, Error, Result};
use crate::horizon::Gauge;
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Residuals of `(β, q)` for `min g(β) s.t. Zβ ≥ 1`.
///
/// * stationarity: with `w = Zᵀq` and `λ = ⟨w, β⟩ / g(β)`, how far `w / λ`
///   is from `∂g(β)` (see [`Gauge::subgradient_residual`]); 1 when `λ ≤ 0`.
/// * slackness: `maxᵢ qᵢ ((Zβ)ᵢ − 1) / Σq`.
/// * feasibility: `max(0, 1 − minᵢ (Zβ)ᵢ)`.
pub(crate) fn residuals<T: Scalar>(
    gauge: &Gauge<T>,
    z: &Matrix<T>,
    beta: &[T],
    q: &[T],
) -> Result<KktResiduals<T>> {
    check_dim(z.cols(), beta.len())?;
    check_dim(z.rows(), q.len())?;
    let m = z.mul_vec(beta)?;
    let feasibility = (T::one() - m.iter().copied().fold(T::infinity(), T::min)).max(T::zero());
    let total: T = q.iter().copied().sum();
    let slackness = if total > T::zero() {
        q.iter()
            .zip(&m)
            .map(|(&qi, &mi)| qi * (mi - T::one()))
            .fold(T::zero(), T::max)
            / total
    } else {
        T::infinity()
    };
    let w = z.tr_mul_vec(q)?;
    let g = gauge.eval(beta)?;
    let lambda = dot(&w, beta) / g;
    let stationarity = if lambda > T::zero() && g > T::zero() {
        let v: Vec<T> = w.iter().map(|&x| x / lambda).collect();
        gauge.subgradient_residual(beta, &v)?
    } else {
        T::one()
    };
    Ok(KktResiduals {
        stationarity,
        slackness,
        feasibility,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktReport<T> {
    pub residuals: KktResiduals<T>,
    pub tol: T,
    pub stationarity_ok: bool,
    pub slackness_ok: bool,
    pub feasibility_ok: bool,
}

impl<T: Scalar> KktReport<T> {
    pub fn passed(&self) -> bool {
        self.stationarity_ok && self.slackness_ok && self.feasibility_ok
    }
}

/// Checks the optimality conditions of `(sol.beta, sol.dual)` for `gauge`
/// at tolerance `tol`.
pub fn kkt_verify<T: Scalar>(
    sol: &MarginSolution<T>,
    gauge: &Gauge<T>,
    z: &Matrix<T>,
    tol: T,
) -> Result<KktReport<T>> {
    let residuals = residuals(gauge, z, &sol.beta, &sol.dual)?;
    Ok(KktReport {
        residuals,
        tol,
        stationarity_ok: residuals.stationarity <= tol,
        slackness_ok: residuals.slackness <= tol,
        feasibility_ok: residuals.feasibility <= tol,
    })
}

impl<T: Scalar> MarginSolution<T> {
    /// A candidate built from a direction and weights, e.g. a flow's final
    /// direction and averaged `q`. The direction is scaled to `minᵢ (Zβ)ᵢ = 1`.
    pub fn candidate(direction: &[T], q: &[T], gauge: &Gauge<T>, z: &Matrix<T>) -> Result<Self> {
        check_dim(z.cols(), direction.len())?;
        let m = z
            .mul_vec(direction)?
            .into_iter()
            .fold(T::infinity(), T::min);
        if !(m > T::zero()) {
            return Err(Error::Contract(
                "direction does not separate the data".into(),
            ));
        }
        let beta: Vec<T> = direction.iter().map(|&b| b / m).collect();
        let objective = gauge.eval(&beta)?;
        let dual = q.to_vec();
        let residuals = residuals(gauge, z, &beta, &dual)?;
        Ok(MarginSolution {
            beta,
            objective,
            dual,
            residuals,
            uniqueness: super::Uniqueness::Unique,
            method: "candidate".into(),
            converged: true,
            duality_gap: None,
        })
    }
}
