//! Hard-margin SVM through its dual `min_{α ≥ 0} ½‖Zᵀα‖² − Σα`.

use super::{KktResiduals, MarginSolution, Uniqueness};
use crate::error::Result;
use crate::linalg::{dot, norm2, solve_dense, Matrix};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 200_000;

/// Largest violation of the dual optimality conditions.
fn violation<T: Scalar>(z: &Matrix<T>, alpha: &[T], w: &[T]) -> T {
    z.iter_rows()
        .zip(alpha)
        .map(|(zi, &a)| {
            let g = dot(zi, w) - T::one();
            if a > T::zero() {
                g.abs()
            } else {
                (-g).max(T::zero())
            }
        })
        .fold(T::zero(), T::max)
}

/// Re-solves `Z_A Z_Aᵀ α_A = 1` on the support of `α`; kept only if it stays
/// nonnegative and does not increase the violation.
fn polish<T: Scalar>(z: &Matrix<T>, alpha: &mut [T], w: &mut Vec<T>) {
    let active: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > T::zero()).collect();
    if active.is_empty() {
        return;
    }
    let za = z.select_rows(&active);
    let k = active.len();
    let mut g = Matrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            g.set(a, b, dot(za.row(a), za.row(b)));
        }
    }
    let Some(sol) = solve_dense(&g, &vec![T::one(); k]) else {
        return;
    };
    if sol.iter().any(|&v| v < T::zero()) {
        return;
    }
    let mut cand = vec![T::zero(); alpha.len()];
    for (&i, &v) in active.iter().zip(&sol) {
        cand[i] = v;
    }
    let Ok(cw) = z.tr_mul_vec(&cand) else { return };
    if violation(z, &cand, &cw) <= violation(z, alpha, w) {
        alpha.copy_from_slice(&cand);
        *w = cw;
    }
}

/// Projected coordinate descent on the dual; `β = Zᵀα`, `q = α / ‖β‖₂`.
pub(super) fn solve<T: Scalar>(z: &Matrix<T>) -> Result<MarginSolution<T>> {
    let n = z.rows();
    let sq: Vec<T> = z.iter_rows().map(|zi| dot(zi, zi)).collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); z.cols()];
    let tol = T::lit(1e-13).max(T::epsilon() * T::lit(64.0));
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        for i in 0..n {
            if sq[i] == T::zero() {
                continue;
            }
            let zi = z.row(i);
            let next = (alpha[i] - (dot(zi, &w) - T::one()) / sq[i]).max(T::zero());
            let delta = next - alpha[i];
            if delta != T::zero() {
                for (wj, &zij) in w.iter_mut().zip(zi) {
                    *wj = *wj + delta * zij;
                }
                alpha[i] = next;
            }
        }
        if sweep % 16 == 15 {
            polish(z, &mut alpha, &mut w);
            w = z.tr_mul_vec(&alpha)?;
            if violation(z, &alpha, &w) <= tol {
                converged = true;
                break;
            }
        }
    }
    let norm = norm2(&w);
    let sum_alpha: T = alpha.iter().copied().sum();
    let gap = norm * norm - sum_alpha;
    Ok(MarginSolution {
        dual: alpha.iter().map(|&a| a / norm).collect(),
        objective: norm,
        beta: w,
        residuals: KktResiduals {
            stationarity: T::nan(),
            slackness: T::nan(),
            feasibility: T::nan(),
        },
        uniqueness: Uniqueness::Unique,
        method: "l2-dual-cd".into(),
        converged,
        duality_gap: Some(gap),
    })
}
