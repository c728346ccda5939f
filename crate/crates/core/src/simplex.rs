//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `min cᵀx` subject to rows `aᵢᵀx (≤ | ≥ | =) bᵢ` and `x ≥ 0`.
//! Sized for desk-scale problems (a few thousand rows at most).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    n_vars: usize,
    cost: Vec<T>,
    rows: Vec<(Vec<T>, Relation, T)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// One multiplier per constraint, in insertion order. With a minimization
    /// objective, `≥` rows get nonnegative multipliers and `≤` rows nonpositive ones.
    pub duals: Vec<T>,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200_000;

impl<T: Scalar> LinearProgram<T> {
    /// Minimize `costᵀx` over `x ≥ 0`.
    pub fn minimize(cost: Vec<T>) -> Self {
        LinearProgram {
            n_vars: cost.len(),
            cost,
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn constraint(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) -> Result<&mut Self> {
        if coeffs.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: coeffs.len(),
            });
        }
        self.rows.push((coeffs, rel, rhs));
        Ok(self)
    }

    pub fn solve(&self) -> Result<LpSolution<T>> {
        Tableau::build(self).run()
    }
}

fn tolerance<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(100.0))
}

struct Tableau<T> {
    m: usize,
    /// Structural, then slack/surplus, then artificial columns, then rhs.
    width: usize,
    n_struct: usize,
    n_art: usize,
    art_start: usize,
    data: Vec<T>,
    basis: Vec<usize>,
    /// Column holding the initial identity for each row and whether the row was negated.
    identity_col: Vec<usize>,
    negated: Vec<bool>,
    cost: Vec<T>,
    iterations: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.rows.len();
        let n = lp.n_vars;
        let mut negated = vec![false; m];
        let mut rels = Vec::with_capacity(m);
        for (i, (_, rel, rhs)) in lp.rows.iter().enumerate() {
            let flip = *rhs < T::zero();
            negated[i] = flip;
            rels.push(match (rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            });
        }
        let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = rels.iter().filter(|r| **r != Relation::Le).count();
        let art_start = n + n_slack;
        let width = art_start + n_art + 1;
        let mut data = vec![T::zero(); m * width];
        let mut basis = vec![0; m];
        let mut identity_col = vec![0; m];
        let (mut s, mut a) = (n, art_start);
        for (i, (coeffs, _, rhs)) in lp.rows.iter().enumerate() {
            let sign = if negated[i] { -T::one() } else { T::one() };
            let row = &mut data[i * width..(i + 1) * width];
            for (dst, &c) in row.iter_mut().zip(coeffs) {
                *dst = sign * c;
            }
            row[width - 1] = sign * *rhs;
            match rels[i] {
                Relation::Le => {
                    row[s] = T::one();
                    basis[i] = s;
                    identity_col[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -T::one();
                    s += 1;
                    row[a] = T::one();
                    basis[i] = a;
                    identity_col[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = T::one();
                    basis[i] = a;
                    identity_col[i] = a;
                    a += 1;
                }
            }
        }
        Tableau {
            m,
            width,
            n_struct: n,
            n_art,
            art_start,
            data,
            basis,
            identity_col,
            negated,
            cost: lp.cost.clone(),
            iterations: 0,
        }
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> T {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] = self.data[r * w + j] / p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == T::zero() {
                continue;
            }
            for j in 0..w {
                let v = self.data[r * w + j];
                self.data[i * w + j] = self.data[i * w + j] - f * v;
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn reduced_costs(&self, costs: &[T]) -> Vec<T> {
        let mut rc = costs.to_vec();
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb == T::zero() {
                continue;
            }
            for (j, r) in rc.iter_mut().enumerate() {
                *r = *r - cb * self.at(i, j);
            }
        }
        rc
    }

    /// Bland's rule iterations on `costs` over the allowed entering columns.
    fn optimize(&mut self, costs: &[T], allowed: usize) -> Result<()> {
        let eps = tolerance::<T>();
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::Numeric {
                    what: "simplex iteration limit".into(),
                    residual: f64::NAN,
                });
            }
            let rc = self.reduced_costs(costs);
            let Some(enter) = (0..allowed).find(|&j| rc[j] < -eps) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                let a = self.at(i, enter);
                if a > eps {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - eps
                                || ((ratio - best).abs() <= eps && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, enter);
        }
    }

    fn run(mut self) -> Result<LpSolution<T>> {
        let eps = tolerance::<T>();
        let total = self.width - 1;
        if self.n_art > 0 {
            let mut phase1 = vec![T::zero(); total];
            for c in phase1.iter_mut().skip(self.art_start) {
                *c = T::one();
            }
            self.optimize(&phase1, total)?;
            let infeas: T = (0..self.m)
                .filter(|&i| self.basis[i] >= self.art_start)
                .map(|i| self.rhs(i))
                .sum();
            let scale = (0..self.m)
                .map(|i| self.rhs(i).abs())
                .fold(T::one(), T::max);
            if infeas > eps * scale {
                return Err(Error::Infeasible(format!(
                    "phase one ended with infeasibility {infeas}"
                )));
            }
            // Drive zero-level artificials out of the basis where possible.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    if let Some(j) = (0..self.art_start).find(|&j| self.at(i, j).abs() > eps) {
                        self.pivot(i, j);
                    }
                }
            }
        }
        let mut phase2 = vec![T::zero(); total];
        phase2[..self.n_struct].copy_from_slice(&self.cost);
        self.optimize(&phase2, self.art_start)?;

        let mut x = vec![T::zero(); self.n_struct];
        for i in 0..self.m {
            if self.basis[i] < self.n_struct {
                x[self.basis[i]] = self.rhs(i);
            }
        }
        let objective = x.iter().zip(&self.cost).map(|(&a, &b)| a * b).sum();
        let rc = self.reduced_costs(&phase2);
        let duals = (0..self.m)
            .map(|i| {
                let y = -rc[self.identity_col[i]];
                if self.negated[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(LpSolution {
            x,
            objective,
            duals,
            iterations: self.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36
        let mut lp = LinearProgram::<f64>::minimize(vec![-3.0, -5.0]);
        lp.constraint(vec![1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.constraint(vec![0.0, 2.0], Relation::Le, 12.0).unwrap();
        lp.constraint(vec![3.0, 2.0], Relation::Le, 18.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!((s.objective + 36.0).abs() < 1e-12);
        // Duals of the maximization are (0, 1.5, 1); ours are negated.
        let expected = [0.0, -1.5, -1.0];
        for (d, e) in s.duals.iter().zip(expected) {
            assert!((d - e).abs() < 1e-12, "{:?}", s.duals);
        }
    }

    #[test]
    fn phase_one_with_ge_and_eq() {
        // min x + y s.t. x + y ≥ 2, x − y = 0 → (1, 1)
        let mut lp = LinearProgram::<f64>::minimize(vec![1.0, 1.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Ge, 2.0).unwrap();
        lp.constraint(vec![1.0, -1.0], Relation::Eq, 0.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // min x s.t. −x ≤ −3 → x = 3, multiplier of the ≤ row is −1
        let mut lp = LinearProgram::<f64>::minimize(vec![1.0]);
        lp.constraint(vec![-1.0], Relation::Le, -3.0).unwrap();
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<f64>::minimize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Le, 1.0).unwrap();
        lp.constraint(vec![1.0], Relation::Ge, 2.0).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));

        let mut lp = LinearProgram::<f64>::minimize(vec![-1.0, 0.0]);
        lp.constraint(vec![1.0, -1.0], Relation::Le, 1.0).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::<f64>::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .unwrap();
        lp.constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .unwrap();
        lp.constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        let s = lp.solve().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-12);
    }

    #[test]
    fn strong_duality() {
        let mut lp = LinearProgram::<f64>::minimize(vec![2.0, 3.0, 1.0]);
        lp.constraint(vec![1.0, 1.0, 1.0], Relation::Ge, 4.0)
            .unwrap();
        lp.constraint(vec![1.0, 2.0, 0.0], Relation::Ge, 3.0)
            .unwrap();
        lp.constraint(vec![0.0, 0.0, 1.0], Relation::Le, 2.0)
            .unwrap();
        let s = lp.solve().unwrap();
        let dual_obj = 4.0 * s.duals[0] + 3.0 * s.duals[1] + 2.0 * s.duals[2];
        assert!((s.objective - dual_obj).abs() < 1e-12);
    }

    #[test]
    fn wrong_width() {
        let mut lp = LinearProgram::<f64>::minimize(vec![1.0, 1.0]);
        assert!(lp.constraint(vec![1.0], Relation::Le, 1.0).is_err());
    }
}
