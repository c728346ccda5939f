use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_inf, norm_p, normalized};
use crate::scalar::Scalar;

/// A gauge sampled from a star-shaped body given by its radial function.
///
/// In two dimensions the boundary samples are joined into a polygon and the
/// gauge is the max over its facets, which keeps it exactly convex. In higher
/// dimensions the radial function is averaged over the nearest sample directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGauge<T> {
    dim: usize,
    directions: Vec<Vec<T>>,
    radial: Vec<T>,
    /// `rⱼ uⱼ`
    points: Vec<Vec<T>>,
    /// Facet normals `a` with `⟨a, x⟩ = 1` on each polygon edge (d = 2 only).
    facets: Vec<Vec<T>>,
}

const NEIGHBOURS: usize = 6;

impl<T: Scalar> SampledGauge<T> {
    pub fn new(directions: Vec<Vec<T>>, radial: Vec<T>) -> Result<Self> {
        check_dim(directions.len(), radial.len())?;
        let dim = directions.first().map_or(0, Vec::len);
        if dim == 0 || directions.len() < dim + 1 {
            return Err(Error::Contract(
                "sampled gauge needs at least d + 1 directions".into(),
            ));
        }
        let mut pairs = Vec::with_capacity(radial.len());
        for (u, &r) in directions.iter().zip(&radial) {
            check_dim(dim, u.len())?;
            if !(r > T::zero()) || !r.is_finite() {
                return Err(Error::Contract(format!(
                    "radial samples must be positive and finite, got {r}"
                )));
            }
            let u = normalized(u).ok_or_else(|| Error::Contract("zero sample direction".into()))?;
            pairs.push((u, r));
        }
        if dim == 2 {
            pairs.sort_by(|a, b| {
                let ta = a.0[1].atan2(a.0[0]);
                let tb = b.0[1].atan2(b.0[0]);
                ta.partial_cmp(&tb).unwrap_or(std::cmp::Ordering::Equal)
            });
        }
        let (directions, radial): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let points: Vec<Vec<T>> = directions
            .iter()
            .zip(&radial)
            .map(|(u, &r)| u.iter().map(|&x| x * r).collect())
            .collect();
        let mut facets = Vec::new();
        if dim == 2 {
            let k = points.len();
            for j in 0..k {
                let (p, q) = (&points[j], &points[(j + 1) % k]);
                let det = p[0] * q[1] - p[1] * q[0];
                if !(det > T::zero()) {
                    return Err(Error::Contract(
                        "sample directions must wrap around the origin with gaps below π".into(),
                    ));
                }
                facets.push(vec![(q[1] - p[1]) / det, (p[0] - q[0]) / det]);
            }
        }
        Ok(SampledGauge {
            dim,
            directions,
            radial,
            points,
            facets,
        })
    }

    /// The polygon with the given vertices, listed around the origin (d = 2).
    pub fn polygon(vertices: &[Vec<T>]) -> Result<Self> {
        let mut dirs = Vec::with_capacity(vertices.len());
        let mut radial = Vec::with_capacity(vertices.len());
        for v in vertices {
            check_dim(2, v.len())?;
            let r = norm2(v);
            dirs.push(v.iter().map(|&x| x / r).collect());
            radial.push(r);
        }
        Self::new(dirs, radial)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Vec<T>] {
        &self.directions
    }

    pub fn radial(&self) -> &[T] {
        &self.radial
    }

    pub fn boundary_points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn facets(&self) -> &[Vec<T>] {
        &self.facets
    }

    fn eval(&self, beta: &[T]) -> T {
        if self.dim == 2 {
            return self
                .facets
                .iter()
                .map(|a| dot(a, beta))
                .fold(T::neg_infinity(), T::max)
                .max(T::zero());
        }
        let n = norm2(beta);
        if n == T::zero() {
            return T::zero();
        }
        let u: Vec<T> = beta.iter().map(|&x| x / n).collect();
        let mut near: Vec<(T, T)> = self
            .directions
            .iter()
            .zip(&self.radial)
            .map(|(d, &r)| (dot(d, &u), r))
            .collect();
        near.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let (mut wsum, mut rsum) = (T::zero(), T::zero());
        for &(c, r) in near.iter().take(NEIGHBOURS) {
            let dist = (T::lit(2.0) * (T::one() - c)).max(T::zero()).sqrt();
            if dist < T::lit(1e-12) {
                return n / r;
            }
            let w = dist.recip();
            wsum = wsum + w;
            rsum = rsum + w * r;
        }
        n * wsum / rsum
    }

    fn dual(&self, v: &[T]) -> T {
        self.points
            .iter()
            .map(|p| dot(p, v))
            .fold(T::neg_infinity(), T::max)
            .max(T::zero())
    }

    fn sphere_max(&self) -> T {
        if self.dim == 2 {
            self.facets.iter().map(|a| norm2(a)).fold(T::zero(), T::max)
        } else {
            self.radial
                .iter()
                .fold(T::infinity(), |a, &r| a.min(r))
                .recip()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeKind<T> {
    L1,
    L2,
    Linf,
    Lp(T),
    Sampled(SampledGauge<T>),
}

/// A positively homogeneous convex function, positive off the origin:
/// `gauge(β) = scale · base(β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge<T> {
    kind: GaugeKind<T>,
    scale: T,
}

/// Exact description of `∂gauge(β)` where one is available.
#[derive(Debug, Clone, PartialEq)]
pub enum Subdifferential<T> {
    Singleton(Vec<T>),
    /// Coordinatewise box `[lower, upper]` (ℓ1 faces).
    Box {
        lower: Vec<T>,
        upper: Vec<T>,
    },
    /// Convex hull of `scale · sign(βᵢ) eᵢ` over the tied coordinates (ℓ∞ faces).
    LinfFace {
        ties: Vec<(usize, T)>,
        scale: T,
        dim: usize,
    },
    /// `v ∈ ∂g(β)` iff `⟨v, β⟩ = g(β)` and `g°(v) ≤ 1`.
    Membership {
        gauge: Gauge<T>,
        beta: Vec<T>,
    },
}

impl<T: Scalar> Subdifferential<T> {
    pub fn contains(&self, v: &[T], tol: T) -> bool {
        match self {
            Subdifferential::Singleton(g) => {
                g.len() == v.len() && g.iter().zip(v).all(|(&a, &b)| (a - b).abs() <= tol)
            }
            Subdifferential::Box { lower, upper } => {
                lower.len() == v.len()
                    && v.iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(&x, (&l, &u))| x >= l - tol && x <= u + tol)
            }
            Subdifferential::LinfFace { ties, scale, dim } => {
                if v.len() != *dim {
                    return false;
                }
                let mut total = T::zero();
                for (j, &x) in v.iter().enumerate() {
                    match ties.iter().find(|(i, _)| *i == j) {
                        Some(&(_, s)) => {
                            if x * s < -tol {
                                return false;
                            }
                            total = total + x.abs();
                        }
                        None if x.abs() > tol => return false,
                        None => {}
                    }
                }
                (total - *scale).abs() <= tol
            }
            Subdifferential::Membership { gauge, beta } => {
                gauge.subgradient_residual(beta, v).is_ok_and(|r| r <= tol)
            }
        }
    }
}

impl<T: Scalar> Gauge<T> {
    pub fn l1() -> Self {
        Gauge {
            kind: GaugeKind::L1,
            scale: T::one(),
        }
    }

    pub fn l2() -> Self {
        Gauge {
            kind: GaugeKind::L2,
            scale: T::one(),
        }
    }

    pub fn linf() -> Self {
        Gauge {
            kind: GaugeKind::Linf,
            scale: T::one(),
        }
    }

    pub fn lp(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::Contract(format!(
                "ℓp gauge needs 1 ≤ p < ∞, got {p}"
            )));
        }
        Ok(Gauge {
            kind: GaugeKind::Lp(p),
            scale: T::one(),
        })
    }

    pub fn sampled(shape: SampledGauge<T>) -> Self {
        Gauge {
            kind: GaugeKind::Sampled(shape),
            scale: T::one(),
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "l1" => Ok(Self::l1()),
            "l2" => Ok(Self::l2()),
            "linf" => Ok(Self::linf()),
            other => Err(Error::Contract(format!(
                "unknown gauge {other:?}; expected l1, l2, linf or lp"
            ))),
        }
    }

    pub fn kind(&self) -> &GaugeKind<T> {
        &self.kind
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GaugeKind::L1 => "l1".into(),
            GaugeKind::L2 => "l2".into(),
            GaugeKind::Linf => "linf".into(),
            GaugeKind::Lp(p) => format!("l{p}"),
            GaugeKind::Sampled(s) => format!("sampled{}d", s.dim),
        }
    }

    /// Fixed dimension for sampled gauges; named norms work in any dimension.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            GaugeKind::Sampled(s) => Some(s.dim),
            _ => None,
        }
    }

    /// Whether `gauge(−β) = gauge(β)` holds by construction.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, GaugeKind::Sampled(_))
    }

    pub fn with_scale(&self, scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::Contract(format!(
                "gauge scale must be positive, got {scale}"
            )));
        }
        Ok(Gauge {
            kind: self.kind.clone(),
            scale,
        })
    }

    /// Multiplies the gauge by `c > 0`.
    pub fn scaled_by(&self, c: T) -> Result<Self> {
        self.with_scale(self.scale * c)
    }

    fn check(&self, beta: &[T]) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, beta.len()),
            None if beta.is_empty() => Err(Error::Contract("empty vector".into())),
            None => Ok(()),
        }
    }

    fn base(&self, beta: &[T]) -> T {
        match &self.kind {
            GaugeKind::L1 => norm1(beta),
            GaugeKind::L2 => norm2(beta),
            GaugeKind::Linf => norm_inf(beta),
            GaugeKind::Lp(p) => norm_p(beta, *p),
            GaugeKind::Sampled(s) => s.eval(beta),
        }
    }

    pub fn eval(&self, beta: &[T]) -> Result<T> {
        self.check(beta)?;
        Ok(self.scale * self.base(beta))
    }

    /// Dual gauge `g°(v) = sup{⟨v, β⟩ : g(β) ≤ 1}`.
    pub fn dual(&self, v: &[T]) -> Result<T> {
        self.check(v)?;
        let base = match &self.kind {
            GaugeKind::L1 => norm_inf(v),
            GaugeKind::L2 => norm2(v),
            GaugeKind::Linf => norm1(v),
            GaugeKind::Lp(p) => {
                if *p == T::one() {
                    norm_inf(v)
                } else {
                    norm_p(v, *p / (*p - T::one()))
                }
            }
            GaugeKind::Sampled(s) => s.dual(v),
        };
        Ok(base / self.scale)
    }

    /// `max{gauge(u) : ‖u‖₂ = 1}` in dimension `dim`.
    pub fn sphere_max(&self, dim: usize) -> T {
        let d = T::from_count(dim);
        let base = match &self.kind {
            GaugeKind::L1 => d.sqrt(),
            GaugeKind::L2 | GaugeKind::Linf => T::one(),
            GaugeKind::Lp(p) => {
                if *p >= T::lit(2.0) {
                    T::one()
                } else {
                    d.powf(p.recip() - T::lit(0.5))
                }
            }
            GaugeKind::Sampled(s) => s.sphere_max(),
        };
        self.scale * base
    }

    /// Rescaled so that its maximum over the Euclidean unit sphere is 1.
    pub fn canonicalized(&self, dim: usize) -> Self {
        Gauge {
            kind: self.kind.clone(),
            scale: self.scale / self.sphere_max(dim),
        }
    }

    /// How far `v` is from `∂gauge(β)`: the larger of the relative mismatch of
    /// `⟨v, β⟩` against `gauge(β)` and the excess `g°(v) − 1`.
    pub fn subgradient_residual(&self, beta: &[T], v: &[T]) -> Result<T> {
        check_dim(beta.len(), v.len())?;
        let g = self.eval(beta)?;
        let align = (dot(v, beta) - g).abs() / g.max(T::min_positive_value());
        let excess = (self.dual(v)? - T::one()).max(T::zero());
        Ok(align.max(excess))
    }

    /// `∂gauge(β)` for `β ≠ 0`; coordinates within `tol` (relative) of a tie
    /// or of zero are treated as tied or zero.
    pub fn subdifferential(&self, beta: &[T], tol: T) -> Result<Subdifferential<T>> {
        self.check(beta)?;
        let m = norm_inf(beta);
        if m == T::zero() {
            return Err(Error::Contract(
                "subdifferential requested at the origin".into(),
            ));
        }
        let s = self.scale;
        Ok(match &self.kind {
            GaugeKind::L1 => {
                let mut lower = Vec::with_capacity(beta.len());
                let mut upper = Vec::with_capacity(beta.len());
                for &b in beta {
                    if b.abs() <= tol * m {
                        lower.push(-s);
                        upper.push(s);
                    } else {
                        lower.push(s * b.signum());
                        upper.push(s * b.signum());
                    }
                }
                Subdifferential::Box { lower, upper }
            }
            GaugeKind::L2 => {
                Subdifferential::Singleton(beta.iter().map(|&b| s * b / norm2(beta)).collect())
            }
            GaugeKind::Linf => {
                let ties = beta
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.abs() >= m * (T::one() - tol))
                    .map(|(i, b)| (i, b.signum()))
                    .collect();
                Subdifferential::LinfFace {
                    ties,
                    scale: s,
                    dim: beta.len(),
                }
            }
            GaugeKind::Lp(p) if *p > T::one() => {
                let n = norm_p(beta, *p);
                Subdifferential::Singleton(
                    beta.iter()
                        .map(|&b| s * b.signum() * (b.abs() / n).powf(*p - T::one()))
                        .collect(),
                )
            }
            _ => Subdifferential::Membership {
                gauge: self.clone(),
                beta: beta.to_vec(),
            },
        })
    }

    /// A subgradient at `β ≠ 0`.
    pub fn subgradient(&self, beta: &[T]) -> Result<Vec<T>> {
        self.check(beta)?;
        let s = self.scale;
        Ok(match &self.kind {
            GaugeKind::L1 => beta
                .iter()
                .map(|&b| {
                    if b == T::zero() {
                        T::zero()
                    } else {
                        s * b.signum()
                    }
                })
                .collect(),
            GaugeKind::Linf => {
                let m = norm_inf(beta);
                let k = beta.iter().position(|b| b.abs() == m).unwrap_or(0);
                let mut g = vec![T::zero(); beta.len()];
                g[k] = s * beta[k].signum();
                g
            }
            GaugeKind::Sampled(sg) if sg.dim == 2 => {
                let a = sg.facets.iter().max_by(|a, b| {
                    dot(a, beta)
                        .partial_cmp(&dot(b, beta))
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                a.map_or_else(
                    || vec![T::zero(); 2],
                    |a| a.iter().map(|&x| s * x).collect(),
                )
            }
            GaugeKind::Sampled(_) => {
                // central difference of the interpolated gauge
                let h = T::lit(1e-6) * norm2(beta).max(T::one());
                (0..beta.len())
                    .map(|k| {
                        let mut up = beta.to_vec();
                        let mut dn = beta.to_vec();
                        up[k] = up[k] + h;
                        dn[k] = dn[k] - h;
                        s * (self.base(&up) - self.base(&dn)) / (h + h)
                    })
                    .collect()
            }
            _ => match self.subdifferential(beta, T::zero())? {
                Subdifferential::Singleton(g) => g,
                _ => unreachable!("smooth gauges have singleton subdifferentials"),
            },
        })
    }

    /// Boundary of the unit ball `{β : gauge(β) = 1}` along `n` equally spaced angles (d = 2).
    pub fn unit_ball_2d(&self, n: usize) -> Result<Vec<[T; 2]>> {
        if let Some(d) = self.dim() {
            check_dim(2, d)?;
        }
        (0..n)
            .map(|k| {
                let t = T::lit(std::f64::consts::TAU) * T::from_count(k) / T::from_count(n);
                let u = [t.cos(), t.sin()];
                let g = self.eval(&u)?;
                Ok([u[0] / g, u[1] / g])
            })
            .collect()
    }

    pub fn summary(&self) -> GaugeSummary {
        GaugeSummary {
            kind: self.name(),
            scale: self.scale.as_f64(),
            p: match self.kind {
                GaugeKind::Lp(p) => Some(p.as_f64()),
                _ => None,
            },
            samples: match &self.kind {
                GaugeKind::Sampled(s) => Some(s.radial.len()),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeSummary {
    pub kind: String,
    pub scale: f64,
    pub p: Option<f64>,
    pub samples: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SampledGauge<f64> {
        SampledGauge::polygon(&[
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap()
    }

    #[test]
    fn named_values() {
        let b = [3.0, -4.0];
        assert_eq!(Gauge::l1().eval(&b).unwrap(), 7.0);
        assert_eq!(Gauge::l2().eval(&b).unwrap(), 5.0);
        assert_eq!(Gauge::linf().eval(&b).unwrap(), 4.0);
        assert!((Gauge::lp(3.0).unwrap().eval(&b).unwrap() - 91f64.cbrt()).abs() < 1e-12);
        assert_eq!(Gauge::<f64>::l2().eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn polygon_square_is_linf() {
        let g = Gauge::sampled(square());
        for &(x, y) in &[(0.3, -2.0), (1.0, 1.0), (-5.0, 0.2), (0.0, 0.0)] {
            assert!((g.eval(&[x, y]).unwrap() - f64::max(f64::abs(x), f64::abs(y))).abs() < 1e-12);
            assert!((g.dual(&[x, y]).unwrap() - (x.abs() + y.abs())).abs() < 1e-12);
        }
        assert!((g.sphere_max(2) - 1.0).abs() < 1e-12);
        assert!((g.canonicalized(2).sphere_max(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_scales() {
        assert!((Gauge::<f64>::l1().canonicalized(4).scale() - 0.5).abs() < 1e-15);
        assert_eq!(Gauge::<f64>::linf().canonicalized(4).scale(), 1.0);
        assert!(
            (Gauge::lp(1.5)
                .unwrap()
                .canonicalized(2)
                .eval(&[1.0, 1.0])
                .unwrap()
                - 2f64.sqrt())
            .abs()
                < 1e-12
        );
    }

    #[test]
    fn subdifferential_examples() {
        let s = Gauge::l2().subdifferential(&[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(s, Subdifferential::Singleton(vec![0.6, 0.8]));

        let s = Gauge::l1().subdifferential(&[1.0, 0.0], 1e-12).unwrap();
        assert!(s.contains(&[1.0, 0.7], 1e-12) && s.contains(&[1.0, -1.0], 1e-12));
        assert!(!s.contains(&[0.9, 0.0], 1e-12) && !s.contains(&[1.0, 1.1], 1e-12));

        let s = Gauge::linf().subdifferential(&[2.0, 2.0], 1e-12).unwrap();
        assert!(
            s.contains(&[1.0, 0.0], 1e-12)
                && s.contains(&[0.0, 1.0], 1e-12)
                && s.contains(&[0.25, 0.75], 1e-12)
        );
        assert!(!s.contains(&[0.5, 0.4], 1e-12) && !s.contains(&[1.2, -0.2], 1e-12));
    }

    #[test]
    fn membership_matches_exact_sets() {
        let g = Gauge::sampled(square());
        let s = g.subdifferential(&[2.0, 2.0], 1e-9).unwrap();
        assert!(s.contains(&[0.5, 0.5], 1e-9) && s.contains(&[1.0, 0.0], 1e-9));
        assert!(!s.contains(&[0.5, 0.4], 1e-9));
    }

    #[test]
    fn residual_of_true_subgradients_is_zero() {
        for g in [
            Gauge::l1(),
            Gauge::l2(),
            Gauge::linf(),
            Gauge::lp(3.0).unwrap(),
            Gauge::sampled(square()),
        ] {
            let beta = [0.7, -1.3];
            let v = g.subgradient(&beta).unwrap();
            assert!(
                g.subgradient_residual(&beta, &v).unwrap() < 1e-12,
                "{}",
                g.name()
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Gauge::<f64>::lp(0.5).is_err());
        assert!(Gauge::<f64>::l2().with_scale(0.0).is_err());
        assert!(Gauge::<f64>::l2()
            .subdifferential(&[0.0, 0.0], 1e-9)
            .is_err());
        assert!(SampledGauge::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]).is_err());
        assert!(Gauge::sampled(square()).eval(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn unit_ball_points_have_gauge_one() {
        let g = Gauge::<f64>::l1();
        for p in g.unit_ball_2d(16).unwrap() {
            assert!((g.eval(&p).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
