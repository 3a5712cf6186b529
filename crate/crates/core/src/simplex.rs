//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `min c^T x` subject to `A x = b`, `x >= 0`. Only meant for the
//! handful of rows produced by the local exactness constraints.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
        iterations: usize,
    },
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    // rows x (cols + 1), last column is the right-hand side
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.cols + 1;
        let p = self.at(row, col);
        for k in 0..w {
            self.data[row * w + k] /= p;
        }
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let f = self.at(r, col);
            if f != 0.0 {
                for k in 0..w {
                    self.data[r * w + k] -= f * self.data[row * w + k];
                }
            }
        }
        self.basis[row] = col;
    }

    fn remove_row(&mut self, row: usize) {
        let w = self.cols + 1;
        self.data.drain(row * w..(row + 1) * w);
        self.basis.remove(row);
        self.rows -= 1;
    }

    /// Runs simplex iterations for `cost` over the columns `0..active`.
    /// Returns `Err(outcome)` on unboundedness or when the cap is hit.
    fn optimize(
        &mut self,
        cost: &[f64],
        active: usize,
        iterations: &mut usize,
        cap: usize,
    ) -> Result<(), LpOutcome> {
        loop {
            // Bland: lowest-index column with negative reduced cost
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - (0..self.rows)
                        .map(|r| cost[self.basis[r]] * self.at(r, j))
                        .sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((best, br)) => {
                            if ratio < br - PIVOT_TOL
                                || (ratio <= br + PIVOT_TOL && self.basis[r] < self.basis[best])
                            {
                                Some((r, ratio))
                            } else {
                                Some((best, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Err(LpOutcome::Unbounded);
            };
            if *iterations >= cap {
                return Err(LpOutcome::IterationLimit);
            }
            self.pivot(row, col);
            *iterations += 1;
        }
    }
}

/// `a` is row-major `rows x cols`.
pub(crate) fn minimize(
    rows: usize,
    cols: usize,
    a: &[f64],
    b: &[f64],
    c: &[f64],
    cap: usize,
) -> LpOutcome {
    let total = cols + rows;
    let w = total + 1;
    let mut data = vec![0.0; rows * w];
    for r in 0..rows {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..cols {
            data[r * w + j] = sign * a[r * cols + j];
        }
        data[r * w + cols + r] = 1.0;
        data[r * w + total] = sign * b[r];
    }
    let mut tab = Tableau {
        data,
        rows,
        cols: total,
        basis: (cols..total).collect(),
    };
    let mut iterations = 0;

    let mut phase_one = vec![0.0; total];
    phase_one[cols..].iter_mut().for_each(|v| *v = 1.0);
    if let Err(outcome) = tab.optimize(&phase_one, total, &mut iterations, cap) {
        return match outcome {
            // phase one is bounded below by zero
            LpOutcome::Unbounded => LpOutcome::Infeasible,
            other => other,
        };
    }
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let infeasibility: f64 = (0..tab.rows)
        .filter(|&r| tab.basis[r] >= cols)
        .map(|r| tab.rhs(r))
        .sum();
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificials out of the basis, dropping redundant rows.
    let mut r = 0;
    while r < tab.rows {
        if tab.basis[r] >= cols {
            match (0..cols).find(|&j| tab.at(r, j).abs() > PIVOT_TOL) {
                Some(j) => {
                    tab.pivot(r, j);
                    r += 1;
                }
                None => tab.remove_row(r),
            }
        } else {
            r += 1;
        }
    }

    let mut phase_two = vec![0.0; total];
    phase_two[..cols].copy_from_slice(c);
    if let Err(outcome) = tab.optimize(&phase_two, cols, &mut iterations, cap) {
        return outcome;
    }
    let mut x = vec![0.0; cols];
    for r in 0..tab.rows {
        if tab.basis[r] < cols {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    let value = x.iter().zip(c).map(|(x, c)| x * c).sum();
    LpOutcome::Optimal {
        x,
        value,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min x + y  s.t.  x + 2y = 4, x - y = 1
        let out = minimize(2, 2, &[1.0, 2.0, 1.0, -1.0], &[4.0, 1.0], &[1.0, 1.0], 50);
        match out {
            LpOutcome::Optimal { x, value, .. } => {
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
                assert!((value - 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_lp() {
        // x = -1 with x >= 0
        assert_eq!(
            minimize(1, 1, &[1.0], &[-1.0], &[1.0], 10),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn unbounded_lp() {
        // min -y s.t. x - y = 0
        assert_eq!(
            minimize(1, 2, &[1.0, -1.0], &[0.0], &[0.0, -1.0], 10),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn redundant_rows() {
        // duplicated constraint
        let out = minimize(2, 2, &[1.0, 1.0, 2.0, 2.0], &[1.0, 2.0], &[1.0, 2.0], 50);
        match out {
            LpOutcome::Optimal { x, value, .. } => {
                assert!((x[0] - 1.0).abs() < 1e-12);
                assert!((value - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
