//! Dense two-phase primal simplex over any [`Scalar`].
//!
//! Problems are given in standard form `min c^T x` subject to `A x = b`,
//! `x >= 0`. Pivoting starts with the most-negative reduced cost and switches
//! permanently to Bland's rule after a run of degenerate pivots, so the method
//! terminates in exact arithmetic. Artificial columns are never stored: once an
//! artificial leaves the basis it cannot re-enter.

use crate::scalar::Scalar;

/// Consecutive degenerate pivots tolerated before Bland's rule takes over.
const DEGENERATE_RUN_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    obj: Vec<S>,
    basis: Vec<usize>,
    n: usize,
    bland: bool,
    degenerate_run: usize,
    pivots: usize,
}

impl<S: Scalar> Tableau<S> {
    fn new(a: Vec<Vec<S>>, b: Vec<S>, n: usize) -> Self {
        let m = a.len();
        let rows: Vec<Vec<S>> = a
            .into_iter()
            .zip(b)
            .map(|(mut row, rhs)| {
                debug_assert_eq!(row.len(), n);
                row.push(rhs);
                if row[n].is_negative() {
                    for v in &mut row {
                        *v = -std::mem::replace(v, S::zero());
                    }
                }
                row
            })
            .collect();
        let mut obj = vec![S::zero(); n + 1];
        for row in &rows {
            for (o, v) in obj.iter_mut().zip(row) {
                *o -= v;
            }
        }
        Self {
            rows,
            obj,
            basis: (n..n + m).collect(),
            n,
            bland: false,
            degenerate_run: 0,
            pivots: 0,
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let n = self.n;
        let piv = self.rows[r][e].clone();
        let nonzero: Vec<usize> = (0..=n).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nonzero {
            self.rows[r][j] /= &piv;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<S>| {
            if row[e].is_zero() {
                return;
            }
            let factor = row[e].clone();
            for &j in &nonzero {
                row[j] -= factor.clone() * &pivot_row[j];
            }
            row[e] = S::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn entering(&self) -> Option<usize> {
        let candidates = (0..self.n).filter(|&j| self.obj[j].is_negative_strict());
        if self.bland {
            return candidates.into_iter().next();
        }
        candidates.fold(None, |best: Option<usize>, j| match best {
            Some(b) if self.obj[b] <= self.obj[j] => Some(b),
            _ => Some(j),
        })
    }

    fn leaving(&self, e: usize) -> Option<usize> {
        let n = self.n;
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[e].is_positive_strict() {
                continue;
            }
            let ratio = row[n].clone() / &row[e];
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    /// Runs pivots until optimal; `false` means unbounded.
    fn optimize(&mut self) -> bool {
        while let Some(e) = self.entering() {
            let Some(r) = self.leaving(e) else {
                return false;
            };
            if self.rows[r][self.n].is_negligible() {
                self.degenerate_run += 1;
                if self.degenerate_run >= DEGENERATE_RUN_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, e);
        }
        true
    }

    /// Phase one; on success every artificial has left the basis or its row
    /// has been dropped as redundant.
    fn phase_one(&mut self) -> bool {
        self.optimize();
        if self.obj[self.n].is_negative_strict() {
            return false;
        }
        let n = self.n;
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < n {
                i += 1;
                continue;
            }
            let col = (0..n)
                .filter(|&j| !self.rows[i][j].is_negligible())
                .fold(None, |best: Option<usize>, j| match best {
                    Some(b) if self.rows[i][b].abs() >= self.rows[i][j].abs() => Some(b),
                    _ => Some(j),
                });
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.swap_remove(i);
                    self.basis.swap_remove(i);
                }
            }
        }
        true
    }

    fn set_objective(&mut self, c: &[S]) {
        let n = self.n;
        self.obj = c.iter().cloned().chain(std::iter::once(S::zero())).collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=n {
                if !row[j].is_zero() {
                    self.obj[j] -= cb.clone() * &row[j];
                }
            }
        }
        self.bland = false;
        self.degenerate_run = 0;
    }

    fn solution(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[self.n].clone();
            }
        }
        x
    }
}

fn validate<S>(a: &[Vec<S>], b: &[S]) -> usize {
    assert_eq!(a.len(), b.len(), "one right-hand side per constraint row");
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");
    n
}

/// Minimizes `c^T x` over `{x >= 0 : A x = b}`.
pub fn minimize<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>, c: &[S]) -> LpOutcome<S> {
    let n = if a.is_empty() { c.len() } else { validate(&a, &b) };
    assert_eq!(c.len(), n, "objective length must match column count");
    let mut t = Tableau::new(a, b, n);
    if !t.phase_one() {
        return LpOutcome::Infeasible;
    }
    t.set_objective(c);
    if !t.optimize() {
        return LpOutcome::Unbounded;
    }
    let value = -t.obj[n].clone();
    LpOutcome::Optimal { x: t.solution(), value }
}

/// Some `x >= 0` with `A x = b`, if one exists.
pub fn feasible_point<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>) -> Option<Vec<S>> {
    let n = validate(&a, &b);
    let mut t = Tableau::new(a, b, n);
    t.phase_one().then(|| t.solution())
}

/// Like [`feasible_point`], but an infeasible system yields a Farkas vector
/// instead: the values `z^T A_j >= 0` over the columns, for a `z` with
/// `z^T b < 0` (rows whose right-hand side is negative count as negated).
pub fn feasible_point_or_farkas<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>) -> Result<Vec<S>, Vec<S>> {
    let n = validate(&a, &b);
    let mut t = Tableau::new(a, b, n);
    if t.phase_one() {
        Ok(t.solution())
    } else {
        Err(t.obj[..n].to_vec())
    }
}

/// Some unrestricted `x` with `row . x >= 1` for every row, if one exists.
///
/// Strict homogeneous systems `row . x > 0` are feasible exactly when this one
/// is, since the solution set is a cone.
pub fn solve_geq_one<S: Scalar>(rows: &[Vec<S>]) -> Option<Vec<S>> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 {
        return Some(vec![S::zero(); n]);
    }
    // x = x_plus - x_minus, surplus s >= 0: R x_plus - R x_minus - s = 1.
    let a: Vec<Vec<S>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = Vec::with_capacity(2 * n + m);
            row.extend(r.iter().cloned());
            row.extend(r.iter().map(|v| -v.clone()));
            row.extend((0..m).map(|k| if k == i { -S::one() } else { S::zero() }));
            row
        })
        .collect();
    let z = feasible_point(a, vec![S::one(); m])?;
    Some((0..n).map(|j| z[j].clone() - &z[n + j]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_ratio(n, 1)
    }

    fn qm(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = qm(&[&[1, 2, 1, 0], &[3, 1, 0, 1]]);
        let out = minimize(a, vec![q(4), q(6)], &[q(-1), q(-1), q(0), q(0)]);
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, Rational::from_ratio(-14, 5));
                assert_eq!(x[0], Rational::from_ratio(8, 5));
                assert_eq!(x[1], Rational::from_ratio(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x + y = -1 with x, y >= 0
        let out = minimize(qm(&[&[1, 1]]), vec![q(-1)], &[q(0), q(0)]);
        assert_eq!(out, LpOutcome::Infeasible);
        // min -x s.t. x - y = 1
        let out = minimize(qm(&[&[1, -1]]), vec![q(1)], &[q(-1), q(0)]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = qm(&[&[1, 1, 0], &[2, 2, 0], &[0, 1, 1]]);
        let x = feasible_point(a, vec![q(2), q(4), q(3)]).unwrap();
        assert_eq!(x[0].clone() + &x[1], q(2));
        assert_eq!(x[1].clone() + &x[2], q(3));
    }

    #[test]
    fn strict_cone_feasibility() {
        // x > 0, y > 0, -x - y > 0 is infeasible; dropping the last row is not.
        let rows = qm(&[&[1, 0], &[0, 1], &[-1, -1]]);
        assert!(solve_geq_one(&rows).is_none());
        let x = solve_geq_one(&rows[..2]).unwrap();
        assert!(x[0] >= q(1) && x[1] >= q(1));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example for Dantzig's rule.
        let r = |n, d| Rational::from_ratio(n, d);
        let a = vec![
            vec![r(1, 4), r(-8, 1), r(-1, 1), r(9, 1), q(1), q(0), q(0)],
            vec![r(1, 2), r(-12, 1), r(-1, 2), r(3, 1), q(0), q(1), q(0)],
            vec![q(0), q(0), q(1), q(0), q(0), q(0), q(1)],
        ];
        let c = [r(-3, 4), r(20, 1), r(-1, 2), r(6, 1), q(0), q(0), q(0)];
        match minimize(a, vec![q(0), q(0), q(1)], &c) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(-5, 4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn float_mode_agrees() {
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        match minimize(a, vec![4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]) {
            LpOutcome::Optimal { value, .. } => assert!((value + 2.8f64).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
