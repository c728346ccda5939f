//! Small dense linear algebra: a row-major matrix and vector helpers.
//!
//! Problem sizes here are desk scale (n ≤ 10³, d ≤ 10²), so everything is
//! plain `Vec` storage without blocking or sparsity.

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// `A v`
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, v.len())?;
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    /// `Aᵀ w`
    pub fn tr_mul_vec(&self, w: &[T]) -> Result<Vec<T>> {
        check_dim(self.rows, w.len())?;
        let mut out = vec![T::zero(); self.cols];
        for (r, &wi) in self.iter_rows().zip(w) {
            if wi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(r) {
                *o = *o + a * wi;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm, scaled to avoid overflow for very large entries.
pub fn norm2<T: Scalar>(v: &[T]) -> T {
    let m = norm_inf(v);
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / m;
        acc + y * y
    });
    m * s.sqrt()
}

pub fn norm1<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x.abs())
}

pub fn norm_inf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// `‖v‖_p` for `1 ≤ p < ∞`, scaled by the max entry.
pub fn norm_p<T: Scalar>(v: &[T], p: T) -> T {
    let m = norm_inf(v);
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s = v
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x.abs() / m).powf(p));
    m * s.powf(T::one() / p)
}

/// `v / ‖v‖₂`, or `None` for the zero vector.
pub fn normalized<T: Scalar>(v: &[T]) -> Option<Vec<T>> {
    let n = norm2(v);
    if n == T::zero() || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|&x| x / n).collect())
}

/// Cosine of the angle between two nonzero vectors.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    check_dim(a.len(), b.len())?;
    let ua = normalized(a).ok_or_else(|| Error::Contract("zero vector has no direction".into()))?;
    let ub = normalized(b).ok_or_else(|| Error::Contract("zero vector has no direction".into()))?;
    Ok(dot(&ua, &ub).max(-T::one()).min(T::one()))
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scaled<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += a x`
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Numerically stable `ln Σ exp(vᵢ)`; `-∞` for an empty slice.
pub fn log_sum_exp<T: Scalar>(v: &[T]) -> T {
    let m = v.iter().fold(T::neg_infinity(), |acc, &x| acc.max(x));
    if !m.is_finite() {
        return m;
    }
    let s = v.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-14 · max|A|`.
pub fn solve_dense<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let scale = m
        .as_slice()
        .iter()
        .fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if scale == T::zero() {
        return None;
    }
    let tiny = scale * T::lit(1e-14);
    for k in 0..n {
        let (p, pv) =
            (k..n)
                .map(|i| (i, m.get(i, k).abs()))
                .fold((k, T::neg_infinity()), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        if pv <= tiny {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(p, j));
                m.set(p, j, t);
            }
            rhs.swap(k, p);
        }
        let piv = m.get(k, k);
        for i in k + 1..n {
            let f = m.get(i, k) / piv;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                m.set(i, j, m.get(i, j) - f * m.get(k, j));
            }
            rhs[i] = rhs[i] - f * rhs[k];
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s = (k + 1..n).fold(rhs[k], |acc, j| acc - m.get(k, j) * x[j]);
        x[k] = s / m.get(k, k);
    }
    Some(x)
}

/// Non-negative least squares `min ‖A x − b‖₂, x ≥ 0` (Lawson–Hanson active set).
pub fn nnls<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Vec<T> {
    let (m, n) = (a.rows(), a.cols());
    let mut x = vec![T::zero(); n];
    if n == 0 || m != b.len() {
        return x;
    }
    let at = a.transpose();
    let mut passive = vec![false; n];
    let tol = T::lit(1e-12) * (norm_inf(a.as_slice()) * norm_inf(b)).max(T::min_positive_value());
    let residual = |x: &[T]| -> Vec<T> {
        let ax = a.mul_vec(x).expect("shapes checked");
        sub(b, &ax)
    };
    for _outer in 0..3 * n + 10 {
        let w = at.mul_vec(&residual(&x)).expect("shapes checked");
        let cand = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = cand else { break };
        passive[j] = true;
        for _inner in 0..3 * n + 10 {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub_a = at.select_rows(&idx).transpose();
            let z = least_squares(&sub_a, b);
            if z.iter().all(|&v| v > T::zero()) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            let mut alpha = T::one();
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= T::zero() {
                    let denom = x[i] - z[k];
                    if denom > T::zero() {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] = x[i] + alpha * (z[k] - x[i]);
                if x[i] <= tol {
                    x[i] = T::zero();
                    passive[i] = false;
                }
            }
            if idx.iter().all(|&i| !passive[i]) {
                break;
            }
        }
    }
    x
}

/// Least squares through the regularized normal equations; adequate for the
/// tiny, well-scaled systems solved in this crate.
pub fn least_squares<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Vec<T> {
    let at = a.transpose();
    let k = a.cols();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g.set(i, j, dot(at.row(i), at.row(j)));
        }
    }
    let trace = (0..k).fold(T::zero(), |acc, i| acc + g.get(i, i));
    let ridge = trace * T::lit(1e-13) + T::min_positive_value();
    for i in 0..k {
        g.set(i, i, g.get(i, i) + ridge);
    }
    let rhs = at.mul_vec(b).expect("shapes checked");
    solve_dense(&g, &rhs).unwrap_or_else(|| vec![T::zero(); k])
}
