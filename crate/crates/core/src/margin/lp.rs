//! Polyhedral gauges as linear programs over `β = β⁺ − β⁻`.

use super::{differ, KktResiduals, MarginSolution, Uniqueness};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, Relation};

/// Variables `[β⁺ (d), β⁻ (d), extra...]` with their costs; `rows` are the
/// constraints beyond `Zβ ≥ 1`.
struct Layout<T> {
    d: usize,
    cost: Vec<T>,
    rows: Vec<(Vec<T>, Relation, T)>,
}

fn margin_rows<T: Scalar>(z: &Matrix<T>, width: usize) -> Vec<Vec<T>> {
    let d = z.cols();
    z.iter_rows()
        .map(|zi| {
            let mut row = vec![T::zero(); width];
            for j in 0..d {
                row[j] = zi[j];
                row[d + j] = -zi[j];
            }
            row
        })
        .collect()
}

/// Solves once in the given order and once with margin rows and
/// coordinates reversed; differing vertices flag possible non-uniqueness.
fn solve_layout<T: Scalar>(
    z: &Matrix<T>,
    layout: Layout<T>,
    method: &str,
) -> Result<MarginSolution<T>> {
    let (n, d) = (z.rows(), layout.d);
    let width = layout.cost.len();
    let margins = margin_rows(z, width);

    let build = |reverse: bool| -> Result<LinearProgram<T>> {
        // reverse the coordinate order inside the β⁺ and β⁻ blocks
        let perm: Vec<usize> = if reverse {
            (0..d)
                .rev()
                .chain((d..2 * d).rev())
                .chain(2 * d..width)
                .collect()
        } else {
            (0..width).collect()
        };
        let permute = |row: &[T]| perm.iter().map(|&j| row[j]).collect::<Vec<_>>();
        let mut lp = LinearProgram::minimize(permute(&layout.cost));
        let order: Vec<usize> = if reverse {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        for &i in &order {
            lp.constraint(permute(&margins[i]), Relation::Ge, T::one())?;
        }
        for (row, rel, rhs) in &layout.rows {
            lp.constraint(permute(row), *rel, *rhs)?;
        }
        Ok(lp)
    };
    let unpermute = |x: &[T], reverse: bool| -> Vec<T> {
        (0..d)
            .map(|j| {
                let k = if reverse { d - 1 - j } else { j };
                x[k] - x[d + k]
            })
            .collect()
    };

    let first = build(false)?.solve()?;
    let beta = unpermute(&first.x, false);
    let dual = first.duals[..n].iter().map(|&y| y.max(T::zero())).collect();

    let second = build(true)?.solve()?;
    let other = unpermute(&second.x, true);
    let uniqueness = if differ(&beta, &other) {
        Uniqueness::PossiblyNonUnique { other }
    } else {
        Uniqueness::Unique
    };

    Ok(MarginSolution {
        beta,
        objective: first.objective,
        dual,
        residuals: KktResiduals {
            stationarity: T::nan(),
            slackness: T::nan(),
            feasibility: T::nan(),
        },
        uniqueness,
        method: method.into(),
        converged: true,
        duality_gap: None,
    })
}

/// `min Σ(β⁺ + β⁻) s.t. Z(β⁺ − β⁻) ≥ 1`
pub(super) fn solve_l1<T: Scalar>(z: &Matrix<T>) -> Result<MarginSolution<T>> {
    let d = z.cols();
    solve_layout(
        z,
        Layout {
            d,
            cost: vec![T::one(); 2 * d],
            rows: Vec::new(),
        },
        "lp-l1",
    )
}

/// `min t s.t. Zβ ≥ 1, t ± βⱼ ≥ 0`
pub(super) fn solve_linf<T: Scalar>(z: &Matrix<T>) -> Result<MarginSolution<T>> {
    let d = z.cols();
    let width = 2 * d + 1;
    let mut cost = vec![T::zero(); width];
    cost[2 * d] = T::one();
    let mut rows = Vec::with_capacity(2 * d);
    for j in 0..d {
        for s in [T::one(), -T::one()] {
            let mut row = vec![T::zero(); width];
            row[j] = s;
            row[d + j] = -s;
            row[2 * d] = T::one();
            rows.push((row, Relation::Ge, T::zero()));
        }
    }
    solve_layout(z, Layout { d, cost, rows }, "lp-linf")
}

/// `min t s.t. Zβ ≥ 1, t − ⟨aₖ, β⟩ ≥ 0` for the facet normals `aₖ` of a polygon.
pub(super) fn solve_polygon<T: Scalar>(
    facets: &[Vec<T>],
    z: &Matrix<T>,
) -> Result<MarginSolution<T>> {
    let d = z.cols();
    let width = 2 * d + 1;
    let mut cost = vec![T::zero(); width];
    cost[2 * d] = T::one();
    let rows = facets
        .iter()
        .map(|a| {
            let mut row = vec![T::zero(); width];
            for j in 0..d {
                row[j] = -a[j];
                row[d + j] = a[j];
            }
            row[2 * d] = T::one();
            (row, Relation::Ge, T::zero())
        })
        .collect();
    solve_layout(z, Layout { d, cost, rows }, "lp-polygon")
}
