//! Labelled datasets, the signed feature matrix `Z` (rows `yᵢxᵢ`),
//! separability certificates and the two-blob generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::horizon::Gauge;
use crate::linalg::{norm1, Matrix};
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, Relation};

/// Separability threshold on the LP margin, relative to `maxᵢ ‖zᵢ‖₁`.
pub const SEPARABILITY_TOLERANCE: f64 = 1e-9;
/// Relative slack within which a point counts as a support vector.
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Matrix<T>,
    y: Vec<T>,
    z: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separability<T> {
    pub separable: bool,
    /// Optimal `δ` of `max δ s.t. Zβ ≥ δ1, ‖β‖∞ ≤ 1`.
    pub margin: T,
    pub witness: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport<T> {
    pub margin: T,
    pub support_indices: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Matrix<T>, y: Vec<T>) -> Result<Self> {
        check_dim(x.rows(), y.len())?;
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Contract(
                "a dataset needs n ≥ 1 points in d ≥ 1 dimensions".into(),
            ));
        }
        if let Some(bad) = y.iter().find(|&&l| l != T::one() && l != -T::one()) {
            return Err(Error::Contract(format!("labels must be ±1, got {bad}")));
        }
        let mut z = x.clone();
        for (i, &l) in y.iter().enumerate() {
            for v in z.row_mut(i) {
                *v = *v * l;
            }
        }
        Ok(Dataset { x, y, z })
    }

    pub fn from_points(points: &[(Vec<T>, T)]) -> Result<Self> {
        let rows: Vec<Vec<T>> = points.iter().map(|(p, _)| p.clone()).collect();
        let y = points.iter().map(|(_, l)| *l).collect();
        Self::new(Matrix::from_rows(&rows)?, y)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn z(&self) -> &Matrix<T> {
        &self.z
    }

    /// Same dataset with every point mapped through `f`.
    pub fn map_points(&self, f: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        let rows: Vec<Vec<T>> = self.x.iter_rows().map(f).collect();
        Self::new(Matrix::from_rows(&rows)?, self.y.clone())
    }

    /// CSV with header `x1,...,xd,y`.
    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (1..=self.d()).map(|k| format!("x{k}")).collect();
        out.push("y".into());
        let mut s = out.join(",");
        s.push('\n');
        for (row, &l) in self.x.iter_rows().zip(&self.y) {
            let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            cells.push(if l > T::zero() {
                "1".into()
            } else {
                "-1".into()
            });
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Decides separability through the LP `max δ s.t. Zβ ≥ δ1, ‖β‖∞ ≤ 1`.
    /// Separable when `δ > 1e-9 · maxᵢ ‖zᵢ‖₁`.
    pub fn check_separable(&self) -> Result<Separability<T>> {
        separability(&self.z)
    }

    /// Margin of `β / gauge(β)` and the points within relative `1e-6` of it.
    pub fn margin_of(&self, beta: &[T], gauge: &Gauge<T>) -> Result<MarginReport<T>> {
        self.margin_of_with(beta, gauge, T::lit(SUPPORT_TOLERANCE))
    }

    pub fn margin_of_with(&self, beta: &[T], gauge: &Gauge<T>, tau: T) -> Result<MarginReport<T>> {
        check_dim(self.d(), beta.len())?;
        let g = gauge.eval(beta)?;
        if !(g > T::zero()) {
            return Err(Error::Contract("margin of the zero vector".into()));
        }
        let unit: Vec<T> = beta.iter().map(|&b| b / g).collect();
        let m = self.z.mul_vec(&unit)?;
        let margin = m.iter().copied().fold(T::infinity(), T::min);
        let slack = tau * margin.abs().max(T::min_positive_value());
        let support_indices = m
            .iter()
            .enumerate()
            .filter(|(_, &v)| v - margin <= slack)
            .map(|(i, _)| i)
            .collect();
        Ok(MarginReport {
            margin,
            support_indices,
        })
    }
}

/// Separability of the rows of `Z`; see [`Dataset::check_separable`].
pub fn separability<T: Scalar>(z: &Matrix<T>) -> Result<Separability<T>> {
    let (n, d) = (z.rows(), z.cols());
    // variables: β⁺ (d), β⁻ (d), δ
    let nv = 2 * d + 1;
    let mut cost = vec![T::zero(); nv];
    cost[2 * d] = -T::one();
    let mut lp = LinearProgram::minimize(cost);
    for i in 0..n {
        let zi = z.row(i);
        let mut row = vec![T::zero(); nv];
        for j in 0..d {
            row[j] = zi[j];
            row[d + j] = -zi[j];
        }
        row[2 * d] = -T::one();
        lp.constraint(row, Relation::Ge, T::zero())?;
    }
    for j in 0..d {
        let mut row = vec![T::zero(); nv];
        row[j] = T::one();
        row[d + j] = -T::one();
        lp.constraint(row.clone(), Relation::Le, T::one())?;
        for v in &mut row {
            *v = -*v;
        }
        lp.constraint(row, Relation::Le, T::one())?;
    }
    let sol = lp.solve().map_err(|e| match e {
        Error::Numeric { .. } => e,
        other => Error::Numeric {
            what: format!("separability LP: {other}"),
            residual: f64::NAN,
        },
    })?;
    let delta = sol.x[2 * d];
    let beta: Vec<T> = (0..d).map(|j| sol.x[j] - sol.x[d + j]).collect();
    let scale = z.iter_rows().map(norm1).fold(T::zero(), T::max);
    let separable = delta > T::lit(SEPARABILITY_TOLERANCE) * scale;
    Ok(Separability {
        separable,
        margin: delta,
        witness: separable.then_some(beta),
    })
}

/// Two Gaussian clouds, positives first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec<T> {
    pub n_pos: usize,
    pub n_neg: usize,
    pub center_pos: Vec<T>,
    pub center_neg: Vec<T>,
    pub spread: T,
    pub seed: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_attempts() -> usize {
    100
}

impl<T: Scalar> BlobSpec<T> {
    pub fn new(
        n_pos: usize,
        n_neg: usize,
        center_pos: Vec<T>,
        center_neg: Vec<T>,
        spread: T,
        seed: u64,
    ) -> Self {
        BlobSpec {
            n_pos,
            n_neg,
            center_pos,
            center_neg,
            spread,
            seed,
            max_attempts: default_attempts(),
        }
    }
}

/// Draws `center ± spread · N(0, I)` clouds from a ChaCha8 stream seeded by
/// `seed`, redrawing until the sample is separable.
pub fn generate_blobs<T: Scalar>(spec: &BlobSpec<T>) -> Result<Dataset<T>> {
    if spec.n_pos == 0 || spec.n_neg == 0 {
        return Err(Error::Contract(
            "both classes need at least one point".into(),
        ));
    }
    check_dim(spec.center_pos.len(), spec.center_neg.len())?;
    if !(spec.spread >= T::zero()) {
        return Err(Error::Contract(format!(
            "spread must be nonnegative, got {}",
            spec.spread
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |c: &[T]| -> Vec<T> {
        c.iter()
            .map(|&ci| {
                let g: f64 = StandardNormal.sample(&mut rng);
                ci + spec.spread * T::lit(g)
            })
            .collect()
    };
    for _ in 0..spec.max_attempts.max(1) {
        let mut points = Vec::with_capacity(spec.n_pos + spec.n_neg);
        for _ in 0..spec.n_pos {
            points.push((draw(&spec.center_pos), T::one()));
        }
        for _ in 0..spec.n_neg {
            points.push((draw(&spec.center_neg), -T::one()));
        }
        let ds = Dataset::from_points(&points)?;
        if ds.check_separable()?.separable {
            return Ok(ds);
        }
    }
    Err(Error::Generation {
        attempts: spec.max_attempts.max(1),
    })
}
