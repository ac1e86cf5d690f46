//! Dense two-phase simplex method with Bland's rule.
//!
//! Only meant for the small programs that appear here (convex-combination
//! feasibility and "maximize the smallest weight"), a few hundred rows at
//! most.

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { residual: f64 },
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-11;

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: DMatrix<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[(i, self.cols)]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        let width = self.cols + 1;
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(r, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over columns flagged in `allowed`.
    /// Returns `false` when unbounded.
    fn run(&mut self, cost: &[f64], allowed: &[bool], live: &[bool]) -> bool {
        let rows = self.t.nrows();
        let max_pivots = 50 * (rows + self.cols) + 1000;
        for _ in 0..max_pivots {
            // Bland: first improving column.
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = -cost[j];
                for i in 0..rows {
                    if live[i] {
                        reduced += cost[self.basis[i]] * self.t[(i, j)];
                    }
                }
                if reduced < -1e-10 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..rows {
                if !live[i] {
                    continue;
                }
                let a = self.t[(i, c)];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
        true
    }
}

/// Maximizes `c·x` subject to `A x = b`, `x ≥ 0`.
///
/// Phase one is declared infeasible when the remaining artificial mass
/// exceeds `feas_tol · (1 + ‖b‖∞)`.
pub fn maximize(c: &[f64], a: &DMatrix<f64>, b: &[f64], feas_tol: f64) -> LpOutcome {
    let m = a.nrows();
    let n = a.ncols();
    assert_eq!(c.len(), n);
    assert_eq!(b.len(), m);
    let cols = n + m;
    let mut t = DMatrix::zeros(m, cols + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, cols)] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        cols,
    };
    let mut live = vec![true; m];

    // Phase one: maximize -Σ artificials.
    let mut cost1 = vec![0.0; cols];
    cost1[n..].iter_mut().for_each(|v| *v = -1.0);
    let all = vec![true; cols];
    tab.run(&cost1, &all, &live);
    let residual: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.rhs(i).abs())
        .sum();
    let b_scale = 1.0 + b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if residual > feas_tol * b_scale {
        return LpOutcome::Infeasible { residual };
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        let col = (0..n)
            .filter(|j| !tab.basis.contains(j))
            .max_by(|&x, &y| tab.t[(i, x)].abs().total_cmp(&tab.t[(i, y)].abs()));
        match col {
            Some(j) if tab.t[(i, j)].abs() > 1e-9 => tab.pivot(i, j),
            _ => live[i] = false,
        }
    }

    let mut cost2 = vec![0.0; cols];
    cost2[..n].copy_from_slice(c);
    let mut allowed = vec![false; cols];
    allowed[..n].iter_mut().for_each(|v| *v = true);
    if !tab.run(&cost2, &allowed, &live) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if live[i] && tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        match maximize(&[1.0, 1.0, 0.0, 0.0], &a, &[4.0, 6.0], 1e-9) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 2.8).abs() < 1e-12);
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(
            maximize(&[0.0, 0.0], &a, &[-1.0], 1e-9),
            LpOutcome::Infeasible { .. }
        ));
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert_eq!(maximize(&[1.0, 0.0], &a, &[1.0], 1e-9), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        match maximize(&[1.0, 0.0], &a, &[1.0, 2.0], 1e-9) {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
