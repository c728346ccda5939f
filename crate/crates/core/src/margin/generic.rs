//! Gauges without a dedicated solver: ℓp and sampled gauges in d ≥ 3.
//!
//! Exterior-penalty subgradient descent from the ℓ2 solution, an augmented
//! Lagrangian polish (BFGS inner solves), scaling onto the feasible set, and
//! a nonnegative least-squares fit of the multipliers on the active constraints.

use super::{kkt, l2, lp, KktResiduals, MarginSolution, Uniqueness};
use crate::error::Result;
use crate::horizon::{Gauge, GaugeKind};
use crate::linalg::{dot, nnls, norm2, norm_inf, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericOptions<T> {
    pub penalty_iterations: usize,
    pub alm_rounds: usize,
    pub inner_iterations: usize,
    /// Stationarity residual below which the solve counts as converged.
    pub tol: T,
    /// Relative slack defining the active constraints for the dual fit.
    pub active_tol: T,
}

impl<T: Scalar> Default for GenericOptions<T> {
    fn default() -> Self {
        GenericOptions {
            penalty_iterations: 2000,
            alm_rounds: 200,
            inner_iterations: 400,
            tol: T::lit(1e-6),
            active_tol: T::lit(1e-6),
        }
    }
}

fn min_margin<T: Scalar>(z: &Matrix<T>, beta: &[T]) -> T {
    z.iter_rows()
        .map(|zi| dot(zi, beta))
        .fold(T::infinity(), T::min)
}

fn scaled_feasible<T: Scalar>(z: &Matrix<T>, beta: &[T]) -> Option<Vec<T>> {
    let m = min_margin(z, beta);
    (m > T::zero()).then(|| beta.iter().map(|&b| b / m).collect())
}

/// `min g(β) + μ Σ max(0, 1 − (Zβ)ᵢ)` with growing `μ` and `1/√k` steps,
/// keeping the best feasible rescaling seen.
fn penalty_phase<T: Scalar>(
    g: &Gauge<T>,
    z: &Matrix<T>,
    start: Vec<T>,
    iters: usize,
) -> Result<Vec<T>> {
    let mut best = start.clone();
    let mut best_val = g.eval(&best)?;
    let mut beta = start;
    let base_step = norm2(&beta) * T::lit(0.05);
    for k in 0..iters {
        let mu = best_val * (T::one() + T::from_count(k) / T::lit(50.0));
        let mut s = g.subgradient(&beta)?;
        for zi in z.iter_rows() {
            if dot(zi, &beta) < T::one() {
                for (sj, &zij) in s.iter_mut().zip(zi) {
                    *sj = *sj - mu * zij;
                }
            }
        }
        let ns = norm2(&s);
        if ns == T::zero() {
            break;
        }
        let step = base_step / (T::from_count(k) + T::one()).sqrt();
        for (b, &sj) in beta.iter_mut().zip(&s) {
            *b = *b - step * sj / ns;
        }
        if let Some(f) = scaled_feasible(z, &beta) {
            let v = g.eval(&f)?;
            if v < best_val {
                best_val = v;
                best = f;
            }
        }
    }
    Ok(best)
}

/// Augmented Lagrangian `g(β) + (1/2ρ) Σ [max(0, λᵢ − ρ((Zβ)ᵢ − 1))² − λᵢ²]`.
struct Alm<'a, T> {
    g: &'a Gauge<T>,
    z: &'a Matrix<T>,
    lambda: Vec<T>,
    rho: T,
}

impl<T: Scalar> Alm<'_, T> {
    fn shifted(&self, beta: &[T]) -> Vec<T> {
        self.z
            .iter_rows()
            .zip(&self.lambda)
            .map(|(zi, &l)| (l - self.rho * (dot(zi, beta) - T::one())).max(T::zero()))
            .collect()
    }

    fn value(&self, beta: &[T]) -> Result<T> {
        let s = self.shifted(beta);
        let pen: T = s
            .iter()
            .zip(&self.lambda)
            .map(|(&si, &l)| si * si - l * l)
            .sum();
        Ok(self.g.eval(beta)? + pen / (T::lit(2.0) * self.rho))
    }

    fn gradient(&self, beta: &[T]) -> Result<Vec<T>> {
        let mut grad = self.g.subgradient(beta)?;
        let s = self.shifted(beta);
        for (zi, &si) in self.z.iter_rows().zip(&s) {
            for (gj, &zij) in grad.iter_mut().zip(zi) {
                *gj = *gj - si * zij;
            }
        }
        Ok(grad)
    }

    /// BFGS with Armijo backtracking.
    fn minimize(&self, mut x: Vec<T>, iters: usize) -> Result<Vec<T>> {
        let d = x.len();
        let mut h = vec![T::zero(); d * d];
        for i in 0..d {
            h[i * d + i] = T::one() / self.rho;
        }
        let mut f = self.value(&x)?;
        let mut gr = self.gradient(&x)?;
        for _ in 0..iters {
            if norm_inf(&gr) <= T::epsilon() * T::lit(16.0) * (T::one() + f.abs()) {
                break;
            }
            let p: Vec<T> = (0..d)
                .map(|i| -(0..d).map(|j| h[i * d + j] * gr[j]).sum::<T>())
                .collect();
            let slope = dot(&p, &gr);
            let p = if slope < T::zero() {
                p
            } else {
                gr.iter().map(|&v| -v / self.rho).collect()
            };
            let slope = dot(&p, &gr);
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..60 {
                let xn: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a + t * b).collect();
                let fnew = self.value(&xn)?;
                if fnew <= f + T::lit(1e-4) * t * slope {
                    accepted = Some((xn, fnew));
                    break;
                }
                t = t * T::lit(0.5);
            }
            let Some((xn, fnew)) = accepted else { break };
            let gn = self.gradient(&xn)?;
            let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
            let y: Vec<T> = gn.iter().zip(&gr).map(|(&a, &b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > T::epsilon() * norm2(&s) * norm2(&y) {
                let hy: Vec<T> = (0..d)
                    .map(|i| (0..d).map(|j| h[i * d + j] * y[j]).sum())
                    .collect();
                let yhy = dot(&y, &hy);
                let r = sy.recip();
                for i in 0..d {
                    for j in 0..d {
                        h[i * d + j] = h[i * d + j] - r * (hy[i] * s[j] + s[i] * hy[j])
                            + (r * r * yhy + r) * s[i] * s[j];
                    }
                }
            }
            let done = (f - fnew).abs() <= T::epsilon() * (T::one() + f.abs());
            x = xn;
            f = fnew;
            gr = gn;
            if done {
                break;
            }
        }
        Ok(x)
    }
}

/// Multipliers on the active constraints from `min ‖Z_Aᵀ q − s‖, q ≥ 0`.
fn fit_dual<T: Scalar>(g: &Gauge<T>, z: &Matrix<T>, beta: &[T], active_tol: T) -> Result<Vec<T>> {
    let m = z.mul_vec(beta)?;
    let active: Vec<usize> = (0..m.len())
        .filter(|&i| m[i] - T::one() <= active_tol)
        .collect();
    let s = g.subgradient(beta)?;
    let za = z.select_rows(&active);
    let q_active = nnls(&za.transpose(), &s);
    let mut q = vec![T::zero(); z.rows()];
    for (&i, &v) in active.iter().zip(&q_active) {
        q[i] = v;
    }
    Ok(q)
}

fn run<T: Scalar>(
    g: &Gauge<T>,
    z: &Matrix<T>,
    start: Vec<T>,
    opts: &GenericOptions<T>,
) -> Result<(Vec<T>, Vec<T>, KktResiduals<T>)> {
    let beta = penalty_phase(g, z, start, opts.penalty_iterations)?;
    let rho = g.eval(&beta)?.max(T::one()) * T::lit(10.0);
    let mut alm = Alm {
        g,
        z,
        lambda: vec![T::zero(); z.rows()],
        rho,
    };
    let mut x = beta;
    for _ in 0..opts.alm_rounds {
        x = alm.minimize(x, opts.inner_iterations)?;
        let next = alm.shifted(&x);
        let change = next
            .iter()
            .zip(&alm.lambda)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        alm.lambda = next;
        if change <= T::epsilon() * T::lit(64.0) * (T::one() + norm_inf(&alm.lambda)) {
            break;
        }
    }
    let beta = scaled_feasible(z, &x).unwrap_or(x);
    let fitted = fit_dual(g, z, &beta, opts.active_tol)?;
    let r_fit = kkt::residuals(g, z, &beta, &fitted)?;
    let r_alm = kkt::residuals(g, z, &beta, &alm.lambda)?;
    Ok(
        if r_alm.stationarity.max(r_alm.slackness) < r_fit.stationarity.max(r_fit.slackness) {
            (beta, alm.lambda, r_alm)
        } else {
            (beta, fitted, r_fit)
        },
    )
}

pub(super) fn solve<T: Scalar>(
    g: &Gauge<T>,
    z: &Matrix<T>,
    opts: &GenericOptions<T>,
) -> Result<MarginSolution<T>> {
    let start = l2::solve(z)?.beta;
    let (beta, dual, residuals) = run(g, z, start, opts)?;
    let strictly_convex =
        matches!(g.kind(), GaugeKind::Lp(p) if *p > T::one()) || matches!(g.kind(), GaugeKind::L2);
    let uniqueness = if strictly_convex {
        Uniqueness::Unique
    } else {
        let (other, _, _) = run(g, z, lp::solve_linf(z)?.beta, opts)?;
        let scale = norm_inf(&beta).max(T::one());
        if beta
            .iter()
            .zip(&other)
            .any(|(&a, &b)| (a - b).abs() > T::lit(1e-5) * scale)
        {
            Uniqueness::PossiblyNonUnique { other }
        } else {
            Uniqueness::Unique
        }
    };
    Ok(MarginSolution {
        objective: g.eval(&beta)?,
        converged: residuals.stationarity <= opts.tol && residuals.slackness <= opts.tol,
        beta,
        dual,
        residuals,
        uniqueness,
        method: "penalty-alm".into(),
        duality_gap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_path_reproduces_l2() {
        let z = Matrix::from_rows(&[vec![2.0, 0.3], vec![0.2, 1.5], vec![1.0, 1.0]]).unwrap();
        let exact = l2::solve(&z).unwrap();
        let g = Gauge::<f64>::lp(2.0).unwrap();
        let s = solve(&g, &z, &GenericOptions::default()).unwrap();
        for (a, b) in s.beta.iter().zip(&exact.beta) {
            assert!((a - b).abs() < 1e-6, "{:?} vs {:?}", s.beta, exact.beta);
        }
        assert!(s.residuals.stationarity < 1e-6, "{:?}", s.residuals);
    }
}
