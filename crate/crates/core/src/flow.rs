//! Mirror descent as a discretization of the mirror flow
//! `d∇φ(βₜ) = −∇L(βₜ) dt`.
//!
//! The iteration runs in the dual: `uₖ₊₁ = uₖ − γ gₖ`, `βₖ₊₁ = ∇φ*(uₖ₊₁)`.
//! In rescaled mode `gₖ = −Zᵀq(βₖ)`, the time-changed flow in which the
//! clock `θ` advances by `γ` per step; in plain mode `gₖ = ∇L(βₖ)` and
//! `θ` advances by `γ aₖ`. Either way `uₖ = u₀ + Zᵀ Wₖ` with `Wₖ = Σ dθ q`,
//! and `Wₖ / θₖ` is the Cesàro average of `q`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::losses::{Loss, LossState};
use crate::potentials::VectorPotential;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<T> {
    Fixed(T),
    /// `γₖ = γ₀ / (1 + ‖Zᵀq(βₖ)‖₂)`
    Adaptive(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig<T> {
    pub step: StepRule<T>,
    pub max_steps: usize,
    pub rescaled: bool,
    pub record_every: usize,
    /// Halt once `‖∇φ(βₖ)‖₂` exceeds this.
    pub stop_norm: Option<T>,
    /// Starting point; zero when absent.
    pub beta0: Option<Vec<T>>,
    /// Skip the separability check.
    pub allow_non_separable: bool,
}

impl<T: Scalar> Default for FlowConfig<T> {
    fn default() -> Self {
        FlowConfig {
            step: StepRule::Fixed(T::lit(1e-2)),
            max_steps: 100_000,
            rescaled: true,
            record_every: 100,
            stop_norm: None,
            beta0: None,
            allow_non_separable: false,
        }
    }
}

impl<T: Scalar> FlowConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let g = match self.step {
            StepRule::Fixed(g) | StepRule::Adaptive(g) => g,
        };
        if !(g > T::zero()) || !g.is_finite() {
            return Err(Error::Contract(format!(
                "step size must be positive, got {g}"
            )));
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return Err(Error::Contract(
                "max_steps and record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxSteps,
    StopNorm,
    /// The dual iterate reached the range where `∇φ*` overflows.
    DualLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub potential: String,
    pub loss: String,
    pub rescaled: bool,
    /// Step index of each record.
    pub steps: Vec<usize>,
    /// Clock of the integrated dynamics: `θ` in rescaled mode, `t` otherwise.
    pub times: Vec<T>,
    /// `θ = Σ dθ` in both modes.
    pub theta: Vec<T>,
    pub iterates: Vec<Vec<T>>,
    pub duals: Vec<Vec<T>>,
    pub losses: Vec<T>,
    pub log_losses: Vec<T>,
    pub directions: Vec<Vec<T>>,
    pub q_history: Vec<Vec<T>>,
    /// `Wₖ = Σ dθ q` at each record.
    pub weights: Vec<Vec<T>>,
    /// `W / θ` at the last step.
    pub q_running_average: Vec<T>,
    /// Largest one-step increase of `L`, relative to `L₀`, over every step taken.
    pub max_loss_increase: T,
    /// Largest one-step increase of `ln L` over every step taken.
    pub max_log_loss_increase: T,
    pub steps_taken: usize,
    pub stop_reason: StopReason,
}

fn direction<T: Scalar>(beta: &[T]) -> Vec<T> {
    let n = norm2(beta);
    if n > T::zero() {
        beta.iter().map(|&b| b / n).collect()
    } else {
        vec![T::zero(); beta.len()]
    }
}

/// `dθ`-weighted dual increment, `dθ` and `γ` for one step at `β`.
fn increment<T: Scalar>(
    state: &LossState<T>,
    z: &Matrix<T>,
    cfg: &FlowConfig<T>,
) -> Result<(Vec<T>, T, T)> {
    let zq = z.tr_mul_vec(&state.q)?;
    let gamma = match cfg.step {
        StepRule::Fixed(g) => g,
        StepRule::Adaptive(g0) => g0 / (T::one() + norm2(&zq)),
    };
    let dtheta = if cfg.rescaled {
        gamma
    } else {
        gamma * state.a()
    };
    if !dtheta.is_finite() || zq.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            what: "non-finite gradient".into(),
            residual: f64::INFINITY,
        });
    }
    Ok((state.q.iter().map(|&q| q * dtheta).collect(), dtheta, gamma))
}

/// One mirror descent step from `β`.
pub fn step<T: Scalar>(
    p: &VectorPotential<T>,
    loss: &Loss<T>,
    z: &Matrix<T>,
    beta: &[T],
    cfg: &FlowConfig<T>,
) -> Result<Vec<T>> {
    check_dim(p.dim(), beta.len())?;
    check_dim(z.cols(), beta.len())?;
    let (dw, _, _) = increment(&loss.state(&z.mul_vec(beta)?), z, cfg)?;
    let mut u = p.mirror_map(beta)?;
    for (ui, gi) in u.iter_mut().zip(z.tr_mul_vec(&dw)?) {
        *ui = *ui + gi;
    }
    p.inverse_mirror_map(&u)
}

/// Runs mirror descent on `ds` and records every `record_every`-th step,
/// plus the first and the last.
pub fn run<T: Scalar>(
    p: &VectorPotential<T>,
    loss: &Loss<T>,
    ds: &Dataset<T>,
    cfg: &FlowConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_dim(p.dim(), ds.d())?;
    if !cfg.allow_non_separable {
        let sep = ds.check_separable()?;
        if !sep.separable {
            return Err(Error::NotSeparable {
                margin: sep.margin.as_f64(),
            });
        }
    }
    let z = ds.z();
    let n = ds.n();
    let mut beta = match &cfg.beta0 {
        Some(b) => {
            check_dim(p.dim(), b.len())?;
            b.clone()
        }
        None => vec![T::zero(); p.dim()],
    };
    let u0 = p.mirror_map(&beta)?;
    let mut u = u0.clone();
    let mut w = vec![T::zero(); n];
    let mut theta = T::zero();
    let dual_cap = p.max_dual() * T::lit(0.98);

    let mut tr = Trajectory {
        potential: p.name(),
        loss: loss.name(),
        rescaled: cfg.rescaled,
        steps: Vec::new(),
        times: Vec::new(),
        theta: Vec::new(),
        iterates: Vec::new(),
        duals: Vec::new(),
        losses: Vec::new(),
        log_losses: Vec::new(),
        directions: Vec::new(),
        q_history: Vec::new(),
        weights: Vec::new(),
        q_running_average: vec![T::zero(); n],
        max_loss_increase: T::neg_infinity(),
        max_log_loss_increase: T::neg_infinity(),
        steps_taken: 0,
        stop_reason: StopReason::MaxSteps,
    };

    let mut state = loss.state(&z.mul_vec(&beta)?);
    let l0 = state.risk();
    let mut clock = T::zero();
    let record = |tr: &mut Trajectory<T>,
                  k: usize,
                  clock: T,
                  theta: T,
                  beta: &[T],
                  u: &[T],
                  st: &LossState<T>,
                  w: &[T]| {
        tr.steps.push(k);
        tr.times.push(clock);
        tr.theta.push(theta);
        tr.iterates.push(beta.to_vec());
        tr.duals.push(u.to_vec());
        tr.losses.push(st.risk());
        tr.log_losses.push(st.log_risk);
        tr.directions.push(direction(beta));
        tr.q_history.push(st.q.clone());
        tr.weights.push(w.to_vec());
    };
    record(&mut tr, 0, clock, theta, &beta, &u, &state, &w);

    let mut k = 0;
    while k < cfg.max_steps {
        if let Some(limit) = cfg.stop_norm {
            if norm2(&u) > limit {
                tr.stop_reason = StopReason::StopNorm;
                break;
            }
        }
        let (dw, dtheta, gamma) = increment(&state, z, cfg)?;
        let du = z.tr_mul_vec(&dw)?;
        let next_u: Vec<T> = u.iter().zip(&du).map(|(&a, &b)| a + b).collect();
        if next_u.iter().any(|v| v.abs() > dual_cap) {
            tr.stop_reason = StopReason::DualLimit;
            break;
        }
        let next_beta = p.inverse_mirror_map(&next_u)?;
        let next_state = loss.state(&z.mul_vec(&next_beta)?);

        let rise = (next_state.risk() - state.risk()) / l0;
        tr.max_loss_increase = tr.max_loss_increase.max(rise);
        tr.max_log_loss_increase = tr
            .max_log_loss_increase
            .max(next_state.log_risk - state.log_risk);

        u = next_u;
        beta = next_beta;
        state = next_state;
        for (wi, d) in w.iter_mut().zip(&dw) {
            *wi = *wi + *d;
        }
        theta = theta + dtheta;
        clock = clock + gamma;
        k += 1;
        if k % cfg.record_every == 0 {
            record(&mut tr, k, clock, theta, &beta, &u, &state, &w);
        }
    }
    if tr.steps.last() != Some(&k) {
        record(&mut tr, k, clock, theta, &beta, &u, &state, &w);
    }
    tr.steps_taken = k;
    if theta > T::zero() {
        tr.q_running_average = w.iter().map(|&x| x / theta).collect();
    }
    Ok(tr)
}

/// Limit quantities at the end of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiagnostics<T> {
    /// `β / ‖β‖₂`
    pub direction: Vec<T>,
    /// Average of `q` over the second half of the `θ` range.
    pub q_limit: Vec<T>,
    /// `∇φ(β) / ‖∇φ(β)‖₂`
    pub dual_direction: Vec<T>,
    /// `‖∇φ(β)/θ − Zᵀ q̄_θ‖₂` with `q̄_θ` the Cesàro average.
    pub dual_residual: T,
    pub final_norm: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_beta(&self) -> &[T] {
        self.iterates.last().map_or(&[], Vec::as_slice)
    }

    pub fn final_direction(&self) -> &[T] {
        self.directions.last().map_or(&[], Vec::as_slice)
    }

    pub fn final_q(&self) -> &[T] {
        self.q_history.last().map_or(&[], Vec::as_slice)
    }

    /// `u₀ + Zᵀ Wₖ` for record `k`; equals `duals[k]` up to rounding.
    pub fn reconstruct_dual(&self, z: &Matrix<T>, k: usize) -> Result<Vec<T>> {
        let zw = z.tr_mul_vec(&self.weights[k])?;
        Ok(self.duals[0].iter().zip(zw).map(|(&a, b)| a + b).collect())
    }

    /// Refuses unless `‖β‖₂ ≥ 10 (‖β₀‖₂ + 1)`.
    pub fn limit_diagnostics(&self, z: &Matrix<T>) -> Result<LimitDiagnostics<T>> {
        let (Some(first), Some(last)) = (self.iterates.first(), self.iterates.last()) else {
            return Err(Error::TrajectoryTooShort {
                achieved: 0.0,
                required: 10.0,
            });
        };
        let required = T::lit(10.0) * (norm2(first) + T::one());
        let final_norm = norm2(last);
        if final_norm < required {
            return Err(Error::TrajectoryTooShort {
                achieved: final_norm.as_f64(),
                required: required.as_f64(),
            });
        }
        let k_end = self.len() - 1;
        let theta_end = self.theta[k_end];
        let half = theta_end * T::lit(0.5);
        let k_mid = self
            .theta
            .iter()
            .position(|&t| t >= half)
            .unwrap_or(0)
            .min(k_end.saturating_sub(1));
        let span = theta_end - self.theta[k_mid];
        let q_limit = self.weights[k_end]
            .iter()
            .zip(&self.weights[k_mid])
            .map(|(&a, &b)| (a - b) / span)
            .collect();
        let u = &self.duals[k_end];
        let zq = z.tr_mul_vec(&self.q_running_average)?;
        let dual_residual = norm2(
            &u.iter()
                .zip(&zq)
                .map(|(&a, &b)| a / theta_end - b)
                .collect::<Vec<_>>(),
        );
        Ok(LimitDiagnostics {
            direction: direction(last),
            q_limit,
            dual_direction: direction(u),
            dual_residual,
            final_norm,
        })
    }

    /// Columns `t,loss,beta_1..beta_d,dir_1..dir_d,q_1..q_n`, one row per record.
    pub fn to_csv(&self) -> String {
        let d = self.iterates.first().map_or(0, Vec::len);
        let n = self.q_history.first().map_or(0, Vec::len);
        let mut out = String::from("t,loss");
        for prefix in ["beta", "dir"] {
            for j in 1..=d {
                let _ = write!(out, ",{prefix}_{j}");
            }
        }
        for i in 1..=n {
            let _ = write!(out, ",q_{i}");
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(
                out,
                "{},{:e}",
                self.times[k].as_f64(),
                self.losses[k].as_f64()
            );
            for v in self.iterates[k]
                .iter()
                .chain(&self.directions[k])
                .chain(&self.q_history[k])
            {
                let _ = write!(out, ",{:e}", v.as_f64());
            }
            out.push('\n');
        }
        out
    }
}
