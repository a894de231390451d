//! Exact rational simplex for equality-form linear programs.
//!
//! Solves min cᵀx subject to Ax = b, x ≥ 0 with arbitrary-precision
//! rationals: two phases, dense tableau, Bland's rule throughout, so no
//! cycling and no tolerance anywhere. Optimality of a solution is certified
//! separately by [`certify_optimal`], which recomputes a dual vector from
//! the original data and checks weak duality from scratch.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// min cᵀx, Ax = b, x ≥ 0, dense.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
    pub c: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    /// Cannot occur for ℓ¹-filling objectives (cost ≥ 0 on the feasible
    /// cone) but reported honestly if an input LP is unbounded.
    Unbounded,
}

#[derive(Debug)]
pub struct SimplexSolution {
    pub status: SimplexStatus,
    pub x: Vec<BigRational>,
    pub objective: BigRational,
    /// Column indices of the final basis, parallel to `kept_rows`.
    pub basis: Vec<usize>,
    /// Rows that survived redundancy elimination after phase one.
    pub kept_rows: Vec<usize>,
    /// On infeasibility: a Farkas vector y with yᵀA ≤ 0 and yᵀb > 0,
    /// indexed by original rows.
    pub farkas: Option<Vec<BigRational>>,
}

struct Tableau {
    /// rows × (n_total + 1); last column is the rhs.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &BigRational {
        &self.rows[i][self.n_total]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col].clone();
        debug_assert!(!piv.is_zero());
        for v in self.rows[row].iter_mut() {
            *v /= &piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// One phase of Bland-rule simplex against the given cost vector
    /// (length n_total). Returns false if an unbounded ray was found.
    fn run(&mut self, cost: &[BigRational], allow: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // Reduced costs: c_j − c_B ᵀ (column j in the current tableau).
            let mut entering = None;
            'cols: for j in 0..self.n_total {
                if !allow(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for (i, &bj) in self.basis.iter().enumerate() {
                    if !cost[bj].is_zero() && !self.rows[i][j].is_zero() {
                        red -= &cost[bj] * &self.rows[i][j];
                    }
                }
                if red.is_negative() {
                    entering = Some(j);
                    break 'cols;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = self.rhs(i) / &self.rows[i][col];
                    let better = match &leaving {
                        None => true,
                        Some((best_i, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*best_i])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Two-phase exact simplex.
pub fn solve(lp: &StandardLp) -> Result<SimplexSolution> {
    let m = lp.b.len();
    let n = lp.c.len();
    if lp.a.len() != m || lp.a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("LP dimensions disagree".into()));
    }

    // Orient rows so the rhs is non-negative; remember the flips for the
    // Farkas vector.
    let mut signs = vec![BigRational::one(); m];
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: (n..n + m).collect(),
        n_struct: n,
        n_total: n + m,
    };
    for i in 0..m {
        let flip = lp.b[i].is_negative();
        if flip {
            signs[i] = -BigRational::one();
        }
        let mut row: Vec<BigRational> = Vec::with_capacity(n + m + 1);
        for j in 0..n {
            row.push(if flip { -&lp.a[i][j] } else { lp.a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i {
                BigRational::one()
            } else {
                BigRational::zero()
            });
        }
        row.push(if flip { -&lp.b[i] } else { lp.b[i].clone() });
        tab.rows.push(row);
    }

    // Phase one: minimize the artificial mass.
    let mut phase1_cost = vec![BigRational::zero(); n + m];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = BigRational::one();
    }
    if !tab.run(&phase1_cost, &|_| true) {
        return Err(Error::Precondition("phase-one LP cannot be unbounded".into()));
    }
    let phase1_obj: BigRational = (0..m)
        .map(|i| {
            if tab.basis[i] >= n {
                tab.rhs(i).clone()
            } else {
                BigRational::zero()
            }
        })
        .sum();
    if phase1_obj.is_positive() {
        // Farkas certificate from the phase-one duals: y_i = (phase-one
        // reduced cost of slack i) − its cost, recovered via the artificial
        // columns, then un-flipped.
        let mut farkas = Vec::with_capacity(m);
        for orig in 0..m {
            let j = n + orig;
            let mut red = phase1_cost[j].clone();
            for (i, &bj) in tab.basis.iter().enumerate() {
                if !phase1_cost[bj].is_zero() && !tab.rows[i][j].is_zero() {
                    red -= &phase1_cost[bj] * &tab.rows[i][j];
                }
            }
            // y_i = c_art − reduced cost; flip back to original row sign.
            farkas.push((phase1_cost[j].clone() - red) * &signs[orig]);
        }
        return Ok(SimplexSolution {
            status: SimplexStatus::Infeasible,
            x: vec![BigRational::zero(); n],
            objective: BigRational::zero(),
            basis: Vec::new(),
            kept_rows: (0..m).collect(),
            farkas: Some(farkas),
        });
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant and get dropped.
    let mut drop_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        let col = (0..n).find(|&j| !tab.rows[i][j].is_zero());
        match col {
            Some(j) => tab.pivot(i, j),
            None => drop_rows.push(i),
        }
    }
    let kept_rows: Vec<usize> = (0..m).filter(|i| !drop_rows.contains(i)).collect();
    if !drop_rows.is_empty() {
        for &i in drop_rows.iter().rev() {
            tab.rows.remove(i);
            tab.basis.remove(i);
        }
    }

    // Phase two on structural columns only.
    let mut phase2_cost = lp.c.clone();
    phase2_cost.extend(std::iter::repeat_with(BigRational::zero).take(m));
    let n_struct = tab.n_struct;
    if !tab.run(&phase2_cost, &|j| j < n_struct) {
        return Ok(SimplexSolution {
            status: SimplexStatus::Unbounded,
            x: vec![BigRational::zero(); n],
            objective: BigRational::zero(),
            basis: tab.basis.clone(),
            kept_rows,
            farkas: None,
        });
    }

    let mut x = vec![BigRational::zero(); n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab.rhs(i).clone();
        }
    }
    let objective: BigRational = (0..n).map(|j| &lp.c[j] * &x[j]).sum();
    Ok(SimplexSolution {
        status: SimplexStatus::Optimal,
        x,
        objective,
        basis: tab.basis.clone(),
        kept_rows,
        farkas: None,
    })
}

/// Exact Gaussian solve of yᵀB = c for square B given by columns.
fn solve_transposed(columns: &[Vec<BigRational>], rhs: &[BigRational]) -> Result<Vec<BigRational>> {
    let m = rhs.len();
    // yᵀB = cᵀ ⇔ Bᵀy = c; build the augmented matrix of Bᵀ.
    let mut aug: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..m).map(|j| columns[i][j].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for col in 0..m {
        let piv_row = (col..m)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or_else(|| Error::Precondition("singular basis matrix".into()))?;
        aug.swap(col, piv_row);
        let piv = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v /= &piv;
        }
        let base = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, b) in row.iter_mut().zip(&base) {
                *v -= &f * b;
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[row.len() - 1].clone()).collect())
}

/// Re-derives a dual vector from the original data and verifies the full
/// optimality certificate: primal feasibility, dual feasibility, and equal
/// objectives. Returns y (indexed by original rows, zero on dropped rows).
pub fn certify_optimal(lp: &StandardLp, sol: &SimplexSolution) -> Result<Vec<BigRational>> {
    if sol.status != SimplexStatus::Optimal {
        return Err(Error::Precondition("certificate wanted for a non-optimal solve".into()));
    }
    let m = lp.b.len();
    let n = lp.c.len();
    if sol.x.len() != n || sol.x.iter().any(|v| v.is_negative()) {
        return Err(Error::Precondition("primal solution is not non-negative".into()));
    }
    for i in 0..m {
        let lhs: BigRational = (0..n).map(|j| &lp.a[i][j] * &sol.x[j]).sum();
        if lhs != lp.b[i] {
            return Err(Error::Precondition(format!("primal residual in row {i}")));
        }
    }
    let objective: BigRational = (0..n).map(|j| &lp.c[j] * &sol.x[j]).sum();
    if objective != sol.objective {
        return Err(Error::Precondition("objective mismatch".into()));
    }

    // Basis columns restricted to kept rows; artificial basis columns are
    // unit vectors on their dropped-row-free index.
    let k = sol.kept_rows.len();
    if sol.basis.len() != k {
        return Err(Error::Precondition("basis size disagrees with kept rows".into()));
    }
    let column = |j: usize| -> Vec<BigRational> {
        sol.kept_rows
            .iter()
            .map(|&i| {
                if j < n {
                    lp.a[i][j].clone()
                } else if j - n == i {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect()
    };
    let cost = |j: usize| -> BigRational {
        if j < n {
            lp.c[j].clone()
        } else {
            BigRational::zero()
        }
    };
    let cols: Vec<Vec<BigRational>> = sol.basis.iter().map(|&j| column(j)).collect();
    let c_b: Vec<BigRational> = sol.basis.iter().map(|&j| cost(j)).collect();
    // Transpose: columns[i][j] should be B[i][j] with i the row index.
    let b_rows: Vec<Vec<BigRational>> = (0..k)
        .map(|i| (0..k).map(|j| cols[j][i].clone()).collect())
        .collect();
    let y_kept = solve_transposed(&b_rows, &c_b)?;

    let mut y = vec![BigRational::zero(); m];
    for (t, &i) in sol.kept_rows.iter().enumerate() {
        y[i] = y_kept[t].clone();
    }
    // Dual feasibility on every structural column.
    for j in 0..n {
        let yta: BigRational = (0..m).map(|i| &y[i] * &lp.a[i][j]).sum();
        if yta > lp.c[j] {
            return Err(Error::Precondition(format!("dual infeasible at column {j}")));
        }
    }
    let ytb: BigRational = (0..m).map(|i| &y[i] * &lp.b[i]).sum();
    if ytb != objective {
        return Err(Error::Precondition("strong duality fails".into()));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn tiny_equality_lp() {
        // min x0 + x1 s.t. x0 − x1 = 2 → x = (2, 0), value 2.
        let lp = StandardLp {
            a: vec![vec![r(1), r(-1)]],
            b: vec![r(2)],
            c: vec![r(1), r(1)],
        };
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective, r(2));
        assert_eq!(sol.x, vec![r(2), r(0)]);
        let y = certify_optimal(&lp, &sol).unwrap();
        assert_eq!(y, vec![r(1)]);
    }

    #[test]
    fn negative_rhs_and_fractions() {
        // min x0 + x1 + x2 s.t. x0 − x1 = −3/2, x1 + x2 = 2.
        // x1 ranges over [3/2, 2]; the objective is x1 + 1/2, so the optimum
        // sits at x = (0, 3/2, 1/2) with value 2.
        let lp = StandardLp {
            a: vec![vec![r(1), r(-1), r(0)], vec![r(0), r(1), r(1)]],
            b: vec![rq(-3, 2), r(2)],
            c: vec![r(1), r(1), r(1)],
        };
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective, r(2));
        assert_eq!(sol.x, vec![r(0), rq(3, 2), rq(1, 2)]);
        certify_optimal(&lp, &sol).unwrap();
    }

    #[test]
    fn infeasible_lp_has_farkas_vector() {
        // x0 = 1 and x0 = 2 cannot both hold.
        let lp = StandardLp {
            a: vec![vec![r(1)], vec![r(1)]],
            b: vec![r(1), r(2)],
            c: vec![r(1)],
        };
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, SimplexStatus::Infeasible);
        let y = sol.farkas.unwrap();
        let yta: BigRational = &y[0] * &lp.a[0][0] + &y[1] * &lp.a[1][0];
        let ytb: BigRational = &y[0] * &lp.b[0] + &y[1] * &lp.b[1];
        assert!(yta <= r(0));
        assert!(ytb.is_positive());
    }

    #[test]
    fn redundant_rows_are_dropped() {
        // Second row is the double of the first.
        let lp = StandardLp {
            a: vec![vec![r(1), r(1)], vec![r(2), r(2)]],
            b: vec![r(1), r(2)],
            c: vec![r(3), r(1)],
        };
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective, r(1));
        assert_eq!(sol.x, vec![r(0), r(1)]);
        assert_eq!(sol.kept_rows.len(), 1);
        certify_optimal(&lp, &sol).unwrap();
    }

    #[test]
    fn degenerate_cycling_guard() {
        // A classic degenerate instance; Bland's rule must terminate.
        let lp = StandardLp {
            a: vec![
                vec![rq(1, 4), r(-8), r(-1), r(9), r(1), r(0), r(0)],
                vec![rq(1, 2), r(-12), rq(-1, 2), r(3), r(0), r(1), r(0)],
                vec![r(0), r(0), r(1), r(0), r(0), r(0), r(1)],
            ],
            b: vec![r(0), r(0), r(1)],
            c: vec![rq(-3, 4), r(150), rq(-1, 50), r(6), r(0), r(0), r(0)],
        };
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective, rq(-1, 20));
        certify_optimal(&lp, &sol).unwrap();
    }
}
