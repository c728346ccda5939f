//! Mirror potentials: values, mirror maps `∇φ`, Hessian diagonals and the
//! inverse mirror maps `∇φ* = (∇φ)⁻¹`.
//!
//! Separable potentials are sums `φ(β) = Σ ϕ(βₖ)` of a [`ScalarPotential`];
//! every shipped scalar is even, strictly convex, vanishes at zero and has an
//! unbounded derivative. Non-separable potentials plug in through
//! [`SmoothPotential`].

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, log_sum_exp, norm2, solve_dense, Matrix};
use crate::scalar::Scalar;

/// Iteration cap for the safeguarded Newton inversions.
pub const MAX_NEWTON_ITERATIONS: usize = 200;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A user-supplied scalar potential given by `ϕ`, `ϕ'` and `ϕ''`.
#[derive(Clone)]
pub struct CustomScalar<T> {
    name: String,
    value: ScalarFn<T>,
    deriv: ScalarFn<T>,
    second: ScalarFn<T>,
}

impl<T> fmt::Debug for CustomScalar<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomScalar")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum ScalarKind<T> {
    /// `ϕ(x) = x²/2`
    Quadratic,
    /// `ϕ(x) = |x|ᵖ`, `p > 1`
    Power {
        p: T,
    },
    /// `ϕ(x) = cosh(x) − 1`
    CoshEntropy,
    /// `ϕ(x) = x·asinh(x) − √(x²+1) + 1`
    HypEntropy,
    Custom(CustomScalar<T>),
}

/// How fast `η·ϕ⁻¹(Σϕ(β/η))` approaches its limit as `η → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonRate {
    /// Homogeneous potential: the expression does not depend on `η`.
    Exact,
    /// Error shrinks at least linearly in `η`.
    Geometric,
    /// Error decays like `1 / ln(1/η)`; needs extrapolation.
    Logarithmic,
}

/// An even, strictly convex scalar potential `ϕ : ℝ → ℝ≥0` with `ϕ(0) = 0`.
#[derive(Debug, Clone)]
pub struct ScalarPotential<T> {
    kind: ScalarKind<T>,
}

impl<T: Scalar> ScalarPotential<T> {
    pub fn quadratic() -> Self {
        Self {
            kind: ScalarKind::Quadratic,
        }
    }

    pub fn power(p: T) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::Assumption(format!(
                "power potential needs p > 1, got {p}"
            )));
        }
        Ok(Self {
            kind: ScalarKind::Power { p },
        })
    }

    pub fn cosh_entropy() -> Self {
        Self {
            kind: ScalarKind::CoshEntropy,
        }
    }

    pub fn hyperbolic_entropy() -> Self {
        Self {
            kind: ScalarKind::HypEntropy,
        }
    }

    /// Wraps user-supplied `ϕ, ϕ', ϕ''`, validating `ϕ(0) = 0`, evenness,
    /// positivity of `ϕ''` and monotonicity of `ϕ'` on a probe grid.
    pub fn custom<V, D, S>(name: impl Into<String>, value: V, deriv: D, second: S) -> Result<Self>
    where
        V: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
        S: Fn(T) -> T + Send + Sync + 'static,
    {
        let custom = CustomScalar {
            name: name.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            second: Arc::new(second),
        };
        let zero = (custom.value)(T::zero());
        if zero.abs() > T::lit(1e-12) {
            return Err(Error::Assumption(format!(
                "{}: ϕ(0) = {zero}, expected 0",
                custom.name
            )));
        }
        let grid: Vec<T> = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|&x| T::lit(x))
            .collect();
        let mut last_deriv = (custom.deriv)(T::zero());
        for &x in &grid {
            let (vp, vm) = ((custom.value)(x), (custom.value)(-x));
            if vp < T::zero() || (vp - vm).abs() > T::lit(1e-9) * (T::one() + vp.abs()) {
                return Err(Error::Assumption(format!(
                    "{}: ϕ must be even and non-negative (ϕ({x}) = {vp}, ϕ(-{x}) = {vm})",
                    custom.name
                )));
            }
            if !((custom.second)(x) > T::zero()) || !((custom.second)(-x) > T::zero()) {
                return Err(Error::Assumption(format!(
                    "{}: ϕ'' must be positive at ±{x}",
                    custom.name
                )));
            }
            let d = (custom.deriv)(x);
            if !(d > last_deriv)
                || ((custom.deriv)(-x) + d).abs() > T::lit(1e-9) * (T::one() + d.abs())
            {
                return Err(Error::Assumption(format!(
                    "{}: ϕ' must be odd and strictly increasing (at {x})",
                    custom.name
                )));
            }
            last_deriv = d;
        }
        Ok(Self {
            kind: ScalarKind::Custom(custom),
        })
    }

    pub fn kind(&self) -> &ScalarKind<T> {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ScalarKind::Quadratic => "quadratic".into(),
            ScalarKind::Power { p } => format!("power_p(p={p})"),
            ScalarKind::CoshEntropy => "cosh_entropy".into(),
            ScalarKind::HypEntropy => "hyperbolic_entropy".into(),
            ScalarKind::Custom(c) => c.name.clone(),
        }
    }

    /// Whether two scalar potentials are the same function.
    pub fn same_as(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ScalarKind::Quadratic, ScalarKind::Quadratic)
            | (ScalarKind::CoshEntropy, ScalarKind::CoshEntropy)
            | (ScalarKind::HypEntropy, ScalarKind::HypEntropy) => true,
            (ScalarKind::Power { p }, ScalarKind::Power { p: q }) => p == q,
            (ScalarKind::Custom(a), ScalarKind::Custom(b)) => Arc::ptr_eq(&a.value, &b.value),
            _ => false,
        }
    }

    pub fn value(&self, x: T) -> T {
        match &self.kind {
            ScalarKind::Quadratic => T::lit(0.5) * x * x,
            ScalarKind::Power { p } => x.abs().powf(*p),
            ScalarKind::CoshEntropy => {
                let s = (x * T::lit(0.5)).sinh();
                T::lit(2.0) * s * s
            }
            ScalarKind::HypEntropy => {
                let x2 = x * x;
                if x.abs() < T::lit(1e-3) {
                    return x2 * (T::lit(0.5) - x2 * (T::lit(1.0 / 24.0) - x2 / T::lit(80.0)));
                }
                x * x.asinh() - x * (x / (x.hypot(T::one()) + T::one()))
            }
            ScalarKind::Custom(c) => (c.value)(x),
        }
    }

    pub fn deriv(&self, x: T) -> T {
        match &self.kind {
            ScalarKind::Quadratic => x,
            ScalarKind::Power { p } => *p * x.signum() * x.abs().powf(*p - T::one()),
            ScalarKind::CoshEntropy => x.sinh(),
            ScalarKind::HypEntropy => x.asinh(),
            ScalarKind::Custom(c) => (c.deriv)(x),
        }
    }

    pub fn second(&self, x: T) -> T {
        match &self.kind {
            ScalarKind::Quadratic => T::one(),
            ScalarKind::Power { p } => *p * (*p - T::one()) * x.abs().powf(*p - T::lit(2.0)),
            ScalarKind::CoshEntropy => x.cosh(),
            ScalarKind::HypEntropy => (x * x + T::one()).sqrt().recip(),
            ScalarKind::Custom(c) => (c.second)(x),
        }
    }

    /// `ln ϕ(x)`, finite far beyond the range where `ϕ(x)` itself overflows
    /// for the exponential-type potentials. `-∞` at zero.
    pub fn log_value(&self, x: T) -> T {
        let a = x.abs();
        if a == T::zero() {
            return T::neg_infinity();
        }
        match &self.kind {
            ScalarKind::Quadratic => T::lit(2.0) * a.ln() - T::lit(2.0).ln(),
            ScalarKind::Power { p } => *p * a.ln(),
            ScalarKind::CoshEntropy => {
                if a < T::lit(20.0) {
                    T::lit(2.0).ln() + T::lit(2.0) * (a * T::lit(0.5)).sinh().ln()
                } else {
                    a + T::lit(2.0) * (-(-a).exp()).ln_1p() - T::lit(2.0).ln()
                }
            }
            ScalarKind::HypEntropy if a > T::lit(1e8) => {
                a.ln() + (a.asinh() - a / (a.hypot(T::one()) + T::one())).ln()
            }
            _ => self.value(x).ln(),
        }
    }

    /// `ϕ'(x) / ϕ(x)` for `x > 0`: derivative of [`Self::log_value`].
    fn log_value_slope(&self, x: T) -> T {
        match &self.kind {
            ScalarKind::Quadratic => T::lit(2.0) / x,
            ScalarKind::Power { p } => *p / x,
            ScalarKind::CoshEntropy => (x * T::lit(0.5)).tanh().recip(),
            _ => self.deriv(x) / self.value(x),
        }
    }

    /// `(ϕ')⁻¹(u)`: closed forms for the shipped kinds, safeguarded Newton otherwise.
    pub fn inverse_deriv(&self, u: T) -> Result<T> {
        match &self.kind {
            ScalarKind::Quadratic => Ok(u),
            ScalarKind::Power { p } => {
                if u == T::zero() {
                    return Ok(T::zero());
                }
                Ok((u.abs() / *p).powf((*p - T::one()).recip()).copysign(u))
            }
            ScalarKind::CoshEntropy => Ok(u.asinh()),
            ScalarKind::HypEntropy => Ok(u.sinh()),
            ScalarKind::Custom(_) => self.inverse_deriv_newton(u),
        }
    }

    /// Safeguarded Newton inversion of the strictly increasing odd map `ϕ'`,
    /// available for every kind so the closed forms can be cross-checked.
    pub fn inverse_deriv_newton(&self, u: T) -> Result<T> {
        if u == T::zero() {
            return Ok(T::zero());
        }
        let target = u.abs();
        let x = solve_increasing(
            |x| self.deriv(x),
            |x| self.second(x),
            target,
            target,
            "inverse mirror map",
        )?;
        Ok(x.copysign(u))
    }

    /// `ϕ⁻¹(v)` on `ℝ≥0`: the unique `x ≥ 0` with `ϕ(x) = v`.
    pub fn inverse_value(&self, v: T) -> Result<T> {
        if v < T::zero() {
            return Err(Error::Contract(format!("ϕ⁻¹ is defined on ℝ≥0, got {v}")));
        }
        if v == T::zero() {
            return Ok(T::zero());
        }
        match &self.kind {
            ScalarKind::Quadratic => Ok((T::lit(2.0) * v).sqrt()),
            ScalarKind::Power { p } => Ok(v.powf(p.recip())),
            ScalarKind::CoshEntropy => Ok(T::lit(2.0) * (v * T::lit(0.5)).sqrt().asinh()),
            _ => solve_increasing(|x| self.value(x), |x| self.deriv(x), v, T::one(), "ϕ⁻¹"),
        }
    }

    /// `ϕ⁻¹(exp(log_v))`, usable when `exp(log_v)` itself would overflow.
    pub fn inverse_value_log(&self, log_v: T) -> Result<T> {
        if log_v == T::neg_infinity() {
            return Ok(T::zero());
        }
        if log_v < T::ln_max() - T::lit(2.0) {
            return self.inverse_value(log_v.exp());
        }
        match &self.kind {
            ScalarKind::Quadratic => Ok(T::lit(2.0).sqrt() * (log_v * T::lit(0.5)).exp()),
            ScalarKind::Power { p } => Ok((log_v / *p).exp()),
            _ => {
                let start = (log_v + T::lit(2.0).ln()).max(T::one());
                solve_increasing(
                    |x| self.log_value(x),
                    |x| self.log_value_slope(x),
                    log_v,
                    start,
                    "log-domain ϕ⁻¹",
                )
            }
        }
    }

    /// Largest `|u|` whose preimage under `ϕ'` is finite.
    pub fn max_dual(&self) -> T {
        match &self.kind {
            ScalarKind::HypEntropy => T::max_value().asinh(),
            _ => T::infinity(),
        }
    }

    pub fn horizon_rate(&self) -> HorizonRate {
        match &self.kind {
            ScalarKind::Quadratic | ScalarKind::Power { .. } => HorizonRate::Exact,
            ScalarKind::CoshEntropy => HorizonRate::Geometric,
            ScalarKind::HypEntropy | ScalarKind::Custom(_) => HorizonRate::Logarithmic,
        }
    }
}

/// Solves `f(x) = target` over `x ≥ 0` for a continuous strictly increasing
/// `f` with `f(0) ≤ target`: geometric bracket growth, then Newton steps that
/// fall back to bisection whenever they leave the bracket.
pub(crate) fn solve_increasing<T: Scalar>(
    f: impl Fn(T) -> T,
    df: impl Fn(T) -> T,
    target: T,
    start: T,
    what: &str,
) -> Result<T> {
    let two = T::lit(2.0);
    let mut lo = T::zero();
    let mut hi = start.abs().max(T::one());
    while f(hi) < target {
        lo = hi;
        hi = hi * two;
        if !hi.is_finite() {
            return Err(Error::Numeric {
                what: format!("{what}: no bracket"),
                residual: f64::INFINITY,
            });
        }
    }
    let mut x = start.abs().max(lo).min(hi);
    let eps = T::epsilon();
    let mut residual = T::infinity();
    let mut width = hi - lo;
    for k in 0..MAX_NEWTON_ITERATIONS {
        let r = f(x) - target;
        residual = r;
        if r == T::zero() || hi - lo <= T::lit(4.0) * eps * hi {
            return Ok(x);
        }
        if r < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        // bisect when Newton stalls, geometrically across wide brackets
        let stalled = k % 2 == 1 && hi - lo > T::lit(0.5) * width;
        if k % 2 == 1 {
            width = hi - lo;
        }
        let mut next = x - r / df(x);
        if stalled || !next.is_finite() || next <= lo || next >= hi {
            next = if lo > T::zero() && hi > T::lit(4.0) * lo {
                (lo * hi).sqrt()
            } else {
                lo + (hi - lo) * T::lit(0.5)
            };
        }
        if (next - x).abs() <= two * eps * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    let tol = T::lit(1e-12) * target.abs().max(T::one());
    if residual.abs() <= tol {
        return Ok(x);
    }
    Err(Error::Numeric {
        what: what.to_string(),
        residual: residual.as_f64(),
    })
}

/// A non-separable potential supplied through its value and gradient.
pub trait SmoothPotential<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, beta: &[T]) -> T;
    fn gradient(&self, beta: &[T]) -> Vec<T>;
    fn name(&self) -> String {
        "general".into()
    }
}

#[derive(Clone)]
enum Repr<T> {
    Separable {
        scalar: ScalarPotential<T>,
        dim: usize,
    },
    Coordinatewise(Vec<ScalarPotential<T>>),
    General(Arc<dyn SmoothPotential<T>>),
}

/// A mirror potential `φ : ℝᵈ → ℝ`.
#[derive(Clone)]
pub struct VectorPotential<T> {
    repr: Repr<T>,
}

impl<T: Scalar> fmt::Debug for VectorPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorPotential({}, d={})", self.name(), self.dim())
    }
}

impl<T: Scalar> VectorPotential<T> {
    /// `φ(β) = Σₖ ϕ(βₖ)` in dimension `dim`.
    pub fn separable(scalar: ScalarPotential<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract(
                "potential dimension must be positive".into(),
            ));
        }
        Ok(Self {
            repr: Repr::Separable { scalar, dim },
        })
    }

    /// `φ(β) = Σₖ ϕₖ(βₖ)` with a different scalar per coordinate.
    pub fn coordinatewise(scalars: Vec<ScalarPotential<T>>) -> Result<Self> {
        if scalars.is_empty() {
            return Err(Error::Contract(
                "potential dimension must be positive".into(),
            ));
        }
        if scalars.iter().all(|s| s.same_as(&scalars[0])) {
            let dim = scalars.len();
            return Self::separable(scalars.into_iter().next().expect("nonempty"), dim);
        }
        Ok(Self {
            repr: Repr::Coordinatewise(scalars),
        })
    }

    pub fn general(potential: Arc<dyn SmoothPotential<T>>) -> Result<Self> {
        if potential.dim() == 0 {
            return Err(Error::Contract(
                "potential dimension must be positive".into(),
            ));
        }
        Ok(Self {
            repr: Repr::General(potential),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Separable { dim, .. } => *dim,
            Repr::Coordinatewise(s) => s.len(),
            Repr::General(g) => g.dim(),
        }
    }

    pub fn name(&self) -> String {
        match &self.repr {
            Repr::Separable { scalar, .. } => scalar.name(),
            Repr::Coordinatewise(s) => {
                let names: Vec<String> = s.iter().map(ScalarPotential::name).collect();
                format!("coordinatewise[{}]", names.join(", "))
            }
            Repr::General(g) => g.name(),
        }
    }

    /// The common scalar potential when `φ = Σ ϕ(βₖ)` with a single `ϕ`.
    pub fn as_separable(&self) -> Option<&ScalarPotential<T>> {
        match &self.repr {
            Repr::Separable { scalar, .. } => Some(scalar),
            _ => None,
        }
    }

    /// Scalar potential of coordinate `k`, if the potential is coordinate-wise.
    pub fn coordinate(&self, k: usize) -> Option<&ScalarPotential<T>> {
        match &self.repr {
            Repr::Separable { scalar, dim } => (k < *dim).then_some(scalar),
            Repr::Coordinatewise(s) => s.get(k),
            Repr::General(_) => None,
        }
    }

    pub fn value(&self, beta: &[T]) -> Result<T> {
        check_dim(self.dim(), beta.len())?;
        Ok(match &self.repr {
            Repr::General(g) => g.value(beta),
            _ => beta
                .iter()
                .enumerate()
                .map(|(k, &b)| self.coordinate(k).expect("k < d").value(b))
                .sum(),
        })
    }

    /// `ln φ(β)`, computed from per-coordinate log values when available so
    /// that it stays finite where `φ(β)` overflows.
    pub fn log_value(&self, beta: &[T]) -> Result<T> {
        check_dim(self.dim(), beta.len())?;
        Ok(match &self.repr {
            Repr::General(g) => g.value(beta).ln(),
            _ => {
                let logs: Vec<T> = beta
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| self.coordinate(k).expect("k < d").log_value(b))
                    .collect();
                log_sum_exp(&logs)
            }
        })
    }

    /// `∇φ(β)`
    pub fn mirror_map(&self, beta: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), beta.len())?;
        Ok(match &self.repr {
            Repr::General(g) => g.gradient(beta),
            _ => beta
                .iter()
                .enumerate()
                .map(|(k, &b)| self.coordinate(k).expect("k < d").deriv(b))
                .collect(),
        })
    }

    /// Diagonal of `∇²φ(β)` (finite differences of the gradient for general potentials).
    pub fn hessian_diag(&self, beta: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), beta.len())?;
        Ok(match &self.repr {
            Repr::General(g) => {
                let h = fd_hessian(g.as_ref(), beta);
                (0..beta.len()).map(|k| h.get(k, k)).collect()
            }
            _ => beta
                .iter()
                .enumerate()
                .map(|(k, &b)| self.coordinate(k).expect("k < d").second(b))
                .collect(),
        })
    }

    /// `∇φ*(u) = (∇φ)⁻¹(u)`.
    pub fn inverse_mirror_map(&self, u: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), u.len())?;
        match &self.repr {
            Repr::General(g) => inverse_general(g.as_ref(), u),
            _ => u
                .iter()
                .enumerate()
                .map(|(k, &v)| self.coordinate(k).expect("k < d").inverse_deriv(v))
                .collect(),
        }
    }

    /// `D_φ(β, β₀) = φ(β) − φ(β₀) − ⟨∇φ(β₀), β − β₀⟩`
    pub fn bregman(&self, beta: &[T], beta0: &[T]) -> Result<T> {
        check_dim(self.dim(), beta.len())?;
        check_dim(self.dim(), beta0.len())?;
        let g0 = self.mirror_map(beta0)?;
        let diff: Vec<T> = beta.iter().zip(beta0).map(|(&a, &b)| a - b).collect();
        let d = self.value(beta)? - self.value(beta0)? - dot(&g0, &diff);
        Ok(d.max(T::zero()))
    }

    /// Largest dual-coordinate magnitude the inverse mirror map can represent.
    pub fn max_dual(&self) -> T {
        match &self.repr {
            Repr::Separable { scalar, .. } => scalar.max_dual(),
            Repr::Coordinatewise(s) => s
                .iter()
                .map(ScalarPotential::max_dual)
                .fold(T::infinity(), T::min),
            Repr::General(_) => T::infinity(),
        }
    }
}

fn fd_hessian<T: Scalar>(g: &dyn SmoothPotential<T>, beta: &[T]) -> Matrix<T> {
    let d = beta.len();
    let mut h = Matrix::zeros(d, d);
    let mut probe = beta.to_vec();
    for j in 0..d {
        let step = T::lit(1e-6) * (T::one() + beta[j].abs());
        probe[j] = beta[j] + step;
        let gp = g.gradient(&probe);
        probe[j] = beta[j] - step;
        let gm = g.gradient(&probe);
        probe[j] = beta[j];
        for i in 0..d {
            h.set(i, j, (gp[i] - gm[i]) / (step + step));
        }
    }
    for i in 0..d {
        for j in 0..i {
            let s = (h.get(i, j) + h.get(j, i)) * T::lit(0.5);
            h.set(i, j, s);
            h.set(j, i, s);
        }
    }
    h
}

/// Damped Newton on the strictly convex `ψ(β) = φ(β) − ⟨u, β⟩`.
fn inverse_general<T: Scalar>(g: &dyn SmoothPotential<T>, u: &[T]) -> Result<Vec<T>> {
    let tol = T::lit(1e-12) * norm2(u).max(T::one());
    let psi = |b: &[T]| g.value(b) - dot(u, b);
    let mut beta = vec![T::zero(); u.len()];
    let mut residual = T::infinity();
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let r: Vec<T> = g
            .gradient(&beta)
            .iter()
            .zip(u)
            .map(|(&a, &b)| a - b)
            .collect();
        residual = norm2(&r);
        if residual <= tol {
            return Ok(beta);
        }
        let h = fd_hessian(g, &beta);
        let neg: Vec<T> = r.iter().map(|&x| -x).collect();
        let dir = solve_dense(&h, &neg)
            .filter(|p| dot(p, &r) < T::zero())
            .unwrap_or(neg);
        let base = psi(&beta);
        let slope = dot(&dir, &r);
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<T> = beta.iter().zip(&dir).map(|(&b, &p)| b + t * p).collect();
            let val = psi(&cand);
            if val.is_finite() && val <= base + T::lit(1e-4) * t * slope {
                beta = cand;
                accepted = true;
                break;
            }
            t = t * T::lit(0.5);
        }
        if !accepted {
            // Rounding floor of ψ reached; accept if the gradient residual is already tiny.
            break;
        }
    }
    if residual <= T::lit(1e-9) * norm2(u).max(T::one()) {
        return Ok(beta);
    }
    Err(Error::Numeric {
        what: "inverse mirror map (general potential)".into(),
        residual: residual.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sep(s: ScalarPotential<f64>, d: usize) -> VectorPotential<f64> {
        VectorPotential::separable(s, d).unwrap()
    }

    #[test]
    fn value_examples() {
        assert_eq!(
            sep(ScalarPotential::quadratic(), 2)
                .value(&[0.0, 0.0])
                .unwrap(),
            0.0
        );
        let c = sep(ScalarPotential::cosh_entropy(), 1)
            .value(&[1.0])
            .unwrap();
        assert!((c - 0.543_080_634_815_243_8).abs() < 1e-15);
        assert_eq!(
            sep(ScalarPotential::hyperbolic_entropy(), 1)
                .value(&[0.0])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn mirror_map_examples() {
        let q = sep(ScalarPotential::quadratic(), 2);
        assert_eq!(q.mirror_map(&[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
        let c = sep(ScalarPotential::cosh_entropy(), 1)
            .mirror_map(&[1.0])
            .unwrap()[0];
        assert!((c - 1.175_201_193_643_801_4).abs() < 1e-15);
        let h = sep(ScalarPotential::hyperbolic_entropy(), 1)
            .mirror_map(&[1.0])
            .unwrap()[0];
        assert!((h - 0.881_373_587_019_543).abs() < 1e-15);
    }

    #[test]
    fn inverse_mirror_map_examples() {
        let q = sep(ScalarPotential::quadratic(), 2);
        assert_eq!(q.inverse_mirror_map(&[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
        let c = sep(ScalarPotential::cosh_entropy(), 1);
        assert!((c.inverse_mirror_map(&[1.175_201_193_643_801_4]).unwrap()[0] - 1.0).abs() < 1e-9);
        // The rounded input 1.1752012 maps to asinh(1.1752012) = 1.0000000041191616.
        assert!(
            (c.inverse_mirror_map(&[1.1752012]).unwrap()[0] - 1.000_000_004_119_161_6).abs()
                < 1e-12
        );
        let p3 = sep(ScalarPotential::power(3.0).unwrap(), 1);
        assert!((p3.inverse_mirror_map(&[0.75]).unwrap()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn newton_path_matches_closed_forms() {
        let kinds = [
            ScalarPotential::quadratic(),
            ScalarPotential::power(3.0).unwrap(),
            ScalarPotential::power(1.5).unwrap(),
            ScalarPotential::cosh_entropy(),
            ScalarPotential::hyperbolic_entropy(),
        ];
        for s in &kinds {
            for &u in &[-50.0, -3.0, -0.2, 0.0, 1e-8, 0.75, 4.0, 300.0] {
                let a: f64 = s.inverse_deriv(u).unwrap();
                let b = s.inverse_deriv_newton(u).unwrap();
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "{}: u={u} {a} vs {b}",
                    s.name()
                );
            }
        }
    }

    #[test]
    fn bregman_examples() {
        let q = sep(ScalarPotential::quadratic(), 2);
        assert_eq!(q.bregman(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(q.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let c = sep(ScalarPotential::cosh_entropy(), 1);
        assert!((c.bregman(&[1.0], &[0.0]).unwrap() - 0.543_080_634_815_243_8).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let q = sep(ScalarPotential::quadratic(), 2);
        assert!(matches!(
            q.value(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(q.inverse_mirror_map(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn log_value_extends_past_overflow() {
        let c = ScalarPotential::<f64>::cosh_entropy();
        for &x in &[0.5, 3.0, 19.9, 20.1, 100.0] {
            assert!((c.log_value(x) - c.value(x).ln()).abs() < 1e-13, "x={x}");
        }
        assert!(c.value(800.0).is_infinite());
        assert!((c.log_value(800.0) - (800.0 - 2f64.ln())).abs() < 1e-12);
        let x = c.inverse_value_log(c.log_value(800.0)).unwrap();
        assert!((x - 800.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_value_round_trips() {
        let kinds = [
            ScalarPotential::<f64>::quadratic(),
            ScalarPotential::power(3.0).unwrap(),
            ScalarPotential::cosh_entropy(),
            ScalarPotential::hyperbolic_entropy(),
        ];
        for s in &kinds {
            for &x in &[1e-6, 0.3, 1.0, 7.0, 1e3] {
                let v = s.value(x);
                if v.is_finite() {
                    let back = s.inverse_value(v).unwrap();
                    assert!(
                        (back - x).abs() < 1e-9 * x.max(1.0),
                        "{}: {x} -> {back}",
                        s.name()
                    );
                }
                let back = s.inverse_value_log(s.log_value(x)).unwrap();
                assert!(
                    (back - x).abs() < 1e-9 * x.max(1.0),
                    "{} (log): {x} -> {back}",
                    s.name()
                );
            }
        }
    }

    #[test]
    fn custom_potential_is_validated() {
        let ok = ScalarPotential::<f64>::custom(
            "quartic+quadratic",
            |x| x * x + x.powi(4),
            |x| 2.0 * x + 4.0 * x.powi(3),
            |x| 2.0 + 12.0 * x * x,
        );
        let ok = ok.unwrap();
        let u = ok.deriv(1.3);
        assert!((ok.inverse_deriv(u).unwrap() - 1.3).abs() < 1e-12);

        let odd =
            ScalarPotential::<f64>::custom("odd", |x| x * x * x, |x| 3.0 * x * x, |x| 6.0 * x);
        assert!(matches!(odd, Err(Error::Assumption(_))));
        let shifted =
            ScalarPotential::<f64>::custom("shifted", |x| x * x + 1.0, |x| 2.0 * x, |_| 2.0);
        assert!(matches!(shifted, Err(Error::Assumption(_))));
        let concave = ScalarPotential::<f64>::custom(
            "concave",
            |x: f64| x.abs().sqrt(),
            |x: f64| 0.5 * x.signum() / x.abs().sqrt(),
            |x: f64| -0.25 * x.abs().powf(-1.5),
        );
        assert!(concave.is_err());
    }

    #[test]
    fn power_rejects_p_at_most_one() {
        assert!(ScalarPotential::<f64>::power(1.0).is_err());
        assert!(ScalarPotential::<f64>::power(0.5).is_err());
    }

    struct Coupled;
    impl SmoothPotential<f64> for Coupled {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, b: &[f64]) -> f64 {
            b[0] * b[0] + b[0] * b[1] + b[1] * b[1] + (b[0].cosh() - 1.0)
        }
        fn gradient(&self, b: &[f64]) -> Vec<f64> {
            vec![2.0 * b[0] + b[1] + b[0].sinh(), b[0] + 2.0 * b[1]]
        }
    }

    #[test]
    fn general_potential_inverse() {
        let p = VectorPotential::general(Arc::new(Coupled)).unwrap();
        let beta = [1.7, -0.4];
        let u = p.mirror_map(&beta).unwrap();
        let back = p.inverse_mirror_map(&u).unwrap();
        assert!(
            (back[0] - beta[0]).abs() < 1e-9 && (back[1] - beta[1]).abs() < 1e-9,
            "{back:?}"
        );
        let h = p.hessian_diag(&beta).unwrap();
        assert!((h[0] - (2.0 + beta[0].cosh())).abs() < 1e-5);
    }

    #[test]
    fn coordinatewise_collapses_when_uniform() {
        let p = VectorPotential::<f64>::coordinatewise(vec![
            ScalarPotential::cosh_entropy(),
            ScalarPotential::cosh_entropy(),
        ])
        .unwrap();
        assert!(p.as_separable().is_some());
        let q = VectorPotential::<f64>::coordinatewise(vec![
            ScalarPotential::power(2.0).unwrap(),
            ScalarPotential::power(4.0).unwrap(),
        ])
        .unwrap();
        assert!(q.as_separable().is_none());
        assert_eq!(q.value(&[2.0, 2.0]).unwrap(), 20.0);
    }

    #[test]
    fn hyperbolic_entropy_is_accurate_near_zero() {
        let h = ScalarPotential::<f64>::hyperbolic_entropy();
        // ϕ(x) = x²/2 − x⁴/24 + O(x⁶)
        let x: f64 = 1e-4;
        let series = x * x / 2.0 - x.powi(4) / 24.0;
        assert!((h.value(x) - series).abs() < 1e-15 * series);
    }

    #[test]
    fn works_in_single_precision() {
        let c = VectorPotential::<f32>::separable(ScalarPotential::cosh_entropy(), 2).unwrap();
        let u = c.mirror_map(&[0.5, -1.5]).unwrap();
        let b = c.inverse_mirror_map(&u).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-5 && (b[1] + 1.5).abs() < 1e-5);
    }
}
