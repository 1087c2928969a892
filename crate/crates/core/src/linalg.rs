//! Row reduction over exact scalars and a cyclic Jacobi eigensolver.

use num_traits::Float;

use crate::scalar::Scalar;

/// Reduced row-echelon basis of a row space.
#[derive(Debug, Clone, PartialEq)]
pub struct RowEchelon<S> {
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
    width: usize,
}

impl<S: Scalar> RowEchelon<S> {
    pub fn empty(width: usize) -> Self {
        Self {
            rows: Vec::new(),
            pivots: Vec::new(),
            width,
        }
    }

    pub fn from_rows<'a, I>(width: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [S]>,
    {
        let mut e = Self::empty(width);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Canonical basis rows, sorted by pivot column.
    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residual of `v` after elimination against the current basis.
    fn reduce(&self, v: &[S]) -> Vec<S> {
        let mut v = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if v[pc].is_negligible() {
                continue;
            }
            let factor = v[pc].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= factor.clone() * r;
                }
            }
            v[pc] = S::zero();
        }
        v
    }

    pub fn contains(&self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.width);
        self.reduce(v).iter().all(|x| x.is_negligible())
    }

    /// Adds `v` to the spanning set; returns whether the rank grew.
    pub fn insert(&mut self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.width);
        let mut r = self.reduce(v);
        let Some(pc) = (0..self.width).find(|&j| !r[j].is_negligible()) else {
            return false;
        };
        let piv = r[pc].clone();
        for x in &mut r {
            *x /= &piv;
        }
        // Clear the new pivot column from the existing rows.
        for row in &mut self.rows {
            if row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x -= factor.clone() * y;
                }
            }
            row[pc] = S::zero();
        }
        let pos = self.pivots.partition_point(|&p| p < pc);
        self.pivots.insert(pos, pc);
        self.rows.insert(pos, r);
        true
    }
}

pub fn rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    RowEchelon::from_rows(width, rows.iter().map(Vec::as_slice)).rank()
}

/// Basis of `{ b : M b = 0 }` where `M` has the given rows and `width` columns.
pub fn nullspace<S: Scalar>(rows: &[Vec<S>], width: usize) -> Vec<Vec<S>> {
    nullspace_with_free(rows, width).1
}

/// [`nullspace`] together with the free column of each basis vector: basis
/// vector `i` is 1 at `free[i]` and 0 at every other free column.
pub fn nullspace_with_free<S: Scalar>(rows: &[Vec<S>], width: usize) -> (Vec<usize>, Vec<Vec<S>>) {
    let e = RowEchelon::from_rows(width, rows.iter().map(Vec::as_slice));
    let free: Vec<usize> = (0..width).filter(|c| !e.pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&fc| {
            let mut b = vec![S::zero(); width];
            b[fc] = S::one();
            for (row, &pc) in e.rows.iter().zip(&e.pivots) {
                b[pc] = -row[fc].clone();
            }
            b
        })
        .collect();
    (free, basis)
}

#[derive(Debug, Clone)]
pub struct JacobiResult<F> {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<F>,
    pub sweeps: usize,
    pub converged: bool,
}

fn off_diagonal_norm<F: Float>(a: &[Vec<F>]) -> F {
    let mut s = F::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j {
                s = s + v * v;
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below `tol * k`.
pub fn jacobi_eigenvalues<F: Float>(matrix: &[Vec<F>], tol: F, max_sweeps: usize) -> JacobiResult<F> {
    let k = matrix.len();
    let mut a: Vec<Vec<F>> = matrix.to_vec();
    assert!(a.iter().all(|r| r.len() == k), "matrix must be square");
    let threshold = tol * F::from(k.max(1)).unwrap();
    let two = F::one() + F::one();
    let mut sweeps = 0;
    let mut converged = off_diagonal_norm(&a) <= threshold;
    while !converged && sweeps < max_sweeps {
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p][q];
                if apq == F::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p][r];
                    let aqr = a[q][r];
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }
    let mut eigenvalues: Vec<F> = (0..k).map(|i| a[i][i]).collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    JacobiResult {
        eigenvalues,
        sweeps,
        converged,
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn operator_norm<F: Float>(matrix: &[Vec<F>], tol: F) -> F {
    let r = jacobi_eigenvalues(matrix, tol, 100);
    r.eigenvalues.iter().fold(F::zero(), |m, v| m.max(v.abs()))
}
