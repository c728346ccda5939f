//! Exponential-tailed classification losses and the empirical risk
//! `L(β) = Σᵢ ℓ((Zβ)ᵢ)` together with the normalized weights
//! `q(β) = ℓ'(Zβ) / ℓ'(ℓ⁻¹(L(β)))` and the scalar `a(β) = −ℓ'(ℓ⁻¹(L(β)))`,
//! so that `∇L(β) = −a(β) Zᵀ q(β)`.
//!
//! Exponential-loss quantities are carried in the log domain: `ln L` stays
//! finite for margins in the thousands, where `L` itself underflows to zero.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{log_sum_exp, Matrix};
use crate::scalar::Scalar;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Points at which the exponential tail `ℓ(z) ~ −ℓ'(z) ~ e^{−z}` is probed.
pub const TAIL_PROBES: [f64; 3] = [10.0, 20.0, 30.0];
/// Relative tolerance of the tail probe.
pub const TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Clone)]
pub struct CustomLoss<T> {
    name: String,
    value: ScalarFn<T>,
    deriv: ScalarFn<T>,
    inverse: ScalarFn<T>,
}

impl<T> fmt::Debug for CustomLoss<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Loss<T> {
    /// `ℓ(z) = e^{−z}`
    Exponential,
    /// `ℓ(z) = ln(1 + e^{−z})`
    Logistic,
    Custom(CustomLoss<T>),
}

/// One probe of the exponential-tail condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProbe {
    pub z: f64,
    /// `ℓ(z) e^{z}`
    pub value_ratio: f64,
    /// `−ℓ'(z) e^{z}`
    pub deriv_ratio: f64,
}

impl TailProbe {
    pub fn passes(&self) -> bool {
        (self.value_ratio - 1.0).abs() <= TAIL_TOLERANCE
            && (self.deriv_ratio - 1.0).abs() <= TAIL_TOLERANCE
    }
}

/// Risk in linear and log domain. `value` underflows to zero before `log_value` stops being finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Risk<T> {
    pub value: T,
    pub log_value: T,
}

/// Everything the dynamics needs from the loss at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossState<T> {
    pub log_risk: T,
    /// `ln a(β)`
    pub log_a: T,
    pub q: Vec<T>,
}

impl<T: Scalar> LossState<T> {
    pub fn risk(&self) -> T {
        self.log_risk.exp()
    }

    pub fn a(&self) -> T {
        self.log_a.exp()
    }
}

fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// `ln(softplus(x))`, accurate when `softplus(x)` underflows.
fn log_softplus<T: Scalar>(x: T) -> T {
    if x < T::lit(-30.0) {
        let t = x.exp();
        x + (-t * T::lit(0.5) + t * t / T::lit(3.0)).ln_1p()
    } else {
        softplus(x).ln()
    }
}

impl<T: Scalar> Loss<T> {
    pub fn exponential() -> Self {
        Loss::Exponential
    }

    pub fn logistic() -> Self {
        Loss::Logistic
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "exponential" => Ok(Loss::Exponential),
            "logistic" => Ok(Loss::Logistic),
            other => Err(Error::Contract(format!(
                "unknown loss {other:?}; expected \"exponential\" or \"logistic\""
            ))),
        }
    }

    /// A user-supplied loss; rejected unless it is positive, decreasing,
    /// convex on a probe grid and has an exponential tail.
    pub fn custom<V, D, I>(name: impl Into<String>, value: V, deriv: D, inverse: I) -> Result<Self>
    where
        V: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
        I: Fn(T) -> T + Send + Sync + 'static,
    {
        let loss = Loss::Custom(CustomLoss {
            name: name.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            inverse: Arc::new(inverse),
        });
        let grid: Vec<T> = [-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0]
            .iter()
            .map(|&x| T::lit(x))
            .collect();
        let mut last = T::neg_infinity();
        for &z in &grid {
            let (v, d) = (loss.value(z), loss.deriv(z));
            if !(v > T::zero()) || !(d < T::zero()) || !(d > last) {
                return Err(Error::Assumption(format!(
                    "{}: loss must be positive, decreasing and convex (z = {z})",
                    loss.name()
                )));
            }
            last = d;
        }
        if let Some(bad) = loss.tail_probes().into_iter().find(|p| !p.passes()) {
            return Err(Error::Assumption(format!(
                "{}: no exponential tail (ℓ(z)e^z = {:.3e}, −ℓ'(z)e^z = {:.3e} at z = {})",
                loss.name(),
                bad.value_ratio,
                bad.deriv_ratio,
                bad.z
            )));
        }
        Ok(loss)
    }

    pub fn name(&self) -> String {
        match self {
            Loss::Exponential => "exponential".into(),
            Loss::Logistic => "logistic".into(),
            Loss::Custom(c) => c.name.clone(),
        }
    }

    pub fn value(&self, z: T) -> T {
        match self {
            Loss::Exponential => (-z).exp(),
            Loss::Logistic => softplus(-z),
            Loss::Custom(c) => (c.value)(z),
        }
    }

    pub fn deriv(&self, z: T) -> T {
        match self {
            Loss::Exponential => -(-z).exp(),
            Loss::Logistic => -(T::one() + z.exp()).recip(),
            Loss::Custom(c) => (c.deriv)(z),
        }
    }

    /// `ℓ⁻¹(v)` for `v > 0`.
    pub fn inverse(&self, v: T) -> T {
        match self {
            Loss::Exponential => -v.ln(),
            Loss::Logistic => -v.exp_m1().ln(),
            Loss::Custom(c) => (c.inverse)(v),
        }
    }

    pub fn log_value(&self, z: T) -> T {
        match self {
            Loss::Exponential => -z,
            Loss::Logistic => log_softplus(-z),
            Loss::Custom(_) => self.value(z).ln(),
        }
    }

    /// `ln(−ℓ'(z))`
    fn log_neg_deriv(&self, z: T) -> T {
        match self {
            Loss::Exponential => -z,
            Loss::Logistic => -softplus(z),
            Loss::Custom(_) => (-self.deriv(z)).ln(),
        }
    }

    /// Evidence for the exponential-tail condition at [`TAIL_PROBES`].
    pub fn tail_probes(&self) -> Vec<TailProbe> {
        TAIL_PROBES
            .iter()
            .map(|&z| {
                let zt = T::lit(z);
                TailProbe {
                    z,
                    value_ratio: (self.log_value(zt) + zt).exp().as_f64(),
                    deriv_ratio: (self.log_neg_deriv(zt) + zt).exp().as_f64(),
                }
            })
            .collect()
    }

    /// `ln L`, `ln a` and `q` from the margins `m = Zβ`.
    pub fn state(&self, margins: &[T]) -> LossState<T> {
        let logs: Vec<T> = margins.iter().map(|&m| self.log_value(m)).collect();
        let log_risk = log_sum_exp(&logs);
        let log_a = match self {
            Loss::Exponential => log_risk,
            Loss::Logistic => {
                // a = −ℓ'(ℓ⁻¹(L)) = 1 − e^{−L}
                if log_risk < T::lit(-30.0) {
                    let l = log_risk.exp();
                    log_risk + (-l * T::lit(0.5)).ln_1p()
                } else {
                    (-(-log_risk.exp()).exp_m1()).ln()
                }
            }
            Loss::Custom(_) => self.log_neg_deriv(self.inverse(log_risk.exp())),
        };
        let q = margins
            .iter()
            .map(|&m| (self.log_neg_deriv(m) - log_a).exp())
            .collect();
        LossState { log_risk, log_a, q }
    }
}

fn margins<T: Scalar>(z: &Matrix<T>, beta: &[T]) -> Result<Vec<T>> {
    check_dim(z.cols(), beta.len())?;
    z.mul_vec(beta)
}

/// `L(β) = Σᵢ ℓ((Zβ)ᵢ)` in linear and log domain.
pub fn risk<T: Scalar>(loss: &Loss<T>, z: &Matrix<T>, beta: &[T]) -> Result<Risk<T>> {
    let m = margins(z, beta)?;
    let logs: Vec<T> = m.iter().map(|&mi| loss.log_value(mi)).collect();
    let log_value = log_sum_exp(&logs);
    let value = match loss {
        Loss::Exponential => log_value.exp(),
        _ => m.iter().map(|&mi| loss.value(mi)).sum(),
    };
    Ok(Risk { value, log_value })
}

/// `∇L(β) = Zᵀ ℓ'(Zβ)`
pub fn risk_gradient<T: Scalar>(loss: &Loss<T>, z: &Matrix<T>, beta: &[T]) -> Result<Vec<T>> {
    let m = margins(z, beta)?;
    let d: Vec<T> = m.iter().map(|&mi| loss.deriv(mi)).collect();
    z.tr_mul_vec(&d)
}

/// `q(β) ∈ (0, 1]ⁿ`; equals `softmax(−Zβ)` for the exponential loss.
pub fn q_vector<T: Scalar>(loss: &Loss<T>, z: &Matrix<T>, beta: &[T]) -> Result<Vec<T>> {
    Ok(loss.state(&margins(z, beta)?).q)
}

/// `a(β) = −ℓ'(ℓ⁻¹(L(β))) > 0`; equals `L(β)` for the exponential loss.
pub fn a_scalar<T: Scalar>(loss: &Loss<T>, z: &Matrix<T>, beta: &[T]) -> Result<T> {
    Ok(loss.state(&margins(z, beta)?).a())
}
