//! Non-uniqueness witnesses: `h` in `H` with `f h > 0` pointwise, the
//! certificate `f' = f - eps h`, and the distribution-level problems built on
//! the same linear programs.

use std::fmt;

use serde::Serialize;

use crate::cube::{
    check_degree, low_degree_masks, marginal, project_h, walsh_sign, wht_full, FunctionTable,
};
use crate::error::{Error, Result};
use crate::linalg::nullspace_with_free;
use crate::lp::{self, LpOutcome};
use crate::scalar::{Mode, Scalar};

/// Iteration budget of the alternating-projection fast path.
pub const PROJECTION_ITERATIONS: usize = 400;

/// Grid used to round a floating-point witness before exact certification.
const CERTIFY_GRID_BITS: i32 = 16;
/// Relative size below which `f q` counts as zero when certifying an obstruction.
const OBSTRUCTION_ZERO_TOL: f64 = 1e-9;
/// Right-hand-side perturbation of the double-precision guess.
const GUESS_PERTURBATION: f64 = 1e-7;

/// Searches for `h` with `<h, w_J> = 0` for `degree(J) <= d` and `f h >= 1`.
///
/// Writing `h = f (1 + u)` with `u >= 0` turns the search into a standard-form
/// feasibility problem with one equality row per low-degree Walsh function.
/// In exact mode the system is first solved in double precision. A solution
/// is rounded, projected onto `H` in exact arithmetic and accepted only if the
/// exact margin is positive. An infeasible outcome yields a low-degree `q` with
/// `f q >= 0`, which is accepted as a proof of infeasibility only after an
/// exact check. When neither certificate survives, the phase-one simplex runs
/// in the scalar type of `f`. Every answer is therefore decided exactly.
pub fn find_sign_witness<S: Scalar>(f: &FunctionTable<S>, d: usize) -> Result<Option<FunctionTable<S>>> {
    let signs = f.require_signs()?;
    check_degree(f.p(), d)?;
    if d == f.p() {
        return Ok(None);
    }
    if S::MODE == Mode::Exact {
        let (rows, mut rhs) = sign_system::<f64>(&signs, f.p(), d);
        // Most right-hand sides are zero, so the float simplex stalls on
        // degenerate pivots. Its answer is only a guess, so it may solve a
        // slightly perturbed system instead.
        for (i, b) in rhs.iter_mut().enumerate() {
            *b += GUESS_PERTURBATION * (1.0 + (i as f64 * 0.618_033_988_75).fract());
        }
        match lp::feasible_point_or_farkas(rows, rhs) {
            Ok(u) => {
                let guess: Vec<f64> = signs.iter().zip(&u).map(|(&s, v)| s as f64 * (1.0 + v)).collect();
                if let Some(h) = certify_float_witness::<S>(&signs, f.p(), &guess, d) {
                    return Ok(Some(h));
                }
            }
            Err(fq) => {
                if certify_obstruction::<S>(&signs, f.p(), d, &fq) {
                    return Ok(None);
                }
            }
        }
        log::debug!("double-precision guess not certified at p={}, d={d}; running the exact simplex", f.p());
    }
    find_sign_witness_simplex(f, d)
}

/// [`find_sign_witness`] without the floating-point shortcut.
pub fn find_sign_witness_simplex<S: Scalar>(f: &FunctionTable<S>, d: usize) -> Result<Option<FunctionTable<S>>> {
    let signs = f.require_signs()?;
    let p = f.p();
    check_degree(p, d)?;
    if d == p {
        return Ok(None);
    }
    let Some(u) = solve_sign_system::<S>(&signs, p, d) else {
        return Ok(None);
    };
    let h = FunctionTable::from_fn(p, |t| {
        let g = S::one() + &u[t];
        if signs[t] < 0 {
            -g
        } else {
            g
        }
    })?;
    Ok(normalize_witness(&signs, h, d))
}

/// Rows and right-hand side of the system
/// `sum_t u_t f_t w_J(t) = -sum_t f_t w_J(t)` for every low `J`, in `u >= 0`.
///
/// When it is infeasible, a Farkas vector for it is `f q` over the cube for
/// some low-degree `q` with `f q >= 0` and `sum_t f_t q_t > 0`.
fn sign_system<T: Scalar>(signs: &[i8], p: usize, d: usize) -> (Vec<Vec<T>>, Vec<T>) {
    let masks = low_degree_masks(p, d);
    let mut rows = Vec::with_capacity(masks.len());
    let mut rhs = Vec::with_capacity(masks.len());
    for &m in &masks {
        let mut total = 0i64;
        let row: Vec<T> = signs
            .iter()
            .enumerate()
            .map(|(t, &s)| {
                let v = s * walsh_sign(m, t);
                total += v as i64;
                T::from_sign(v)
            })
            .collect();
        rows.push(row);
        rhs.push(T::from_ratio(-total, 1));
    }
    (rows, rhs)
}

fn solve_sign_system<T: Scalar>(signs: &[i8], p: usize, d: usize) -> Option<Vec<T>> {
    let (rows, rhs) = sign_system(signs, p, d);
    lp::feasible_point(rows, rhs)
}

/// Checks an approximate obstruction, given as the values of `f q`, exactly.
/// The points where `f q` is
/// numerically zero are forced to zero exactly by moving to the nullspace of
/// their Walsh rows; coordinates of that nullspace basis are read off the free
/// columns of `y` and rounded.
fn certify_obstruction<S: Scalar>(signs: &[i8], p: usize, d: usize, values: &[f64]) -> bool {
    let masks = low_degree_masks(p, d);
    // Low-degree coefficients of q = f * values.
    let scale_p = (-(p as f64)).exp2();
    let y: Vec<f64> = masks
        .iter()
        .map(|&m| {
            let sum: f64 = signs
                .iter()
                .zip(values)
                .enumerate()
                .map(|(t, (&s, v))| f64::from(s * walsh_sign(m, t)) * v)
                .sum();
            sum * scale_p
        })
        .collect();
    let top = values.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0 && top.is_finite()) {
        return false;
    }
    let zero_rows: Vec<Vec<S>> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= top * OBSTRUCTION_ZERO_TOL)
        .map(|(t, _)| masks.iter().map(|&m| S::from_sign(walsh_sign(m, t))).collect())
        .collect();
    let (free_cols, basis) = nullspace_with_free(&zero_rows, masks.len());
    if basis.is_empty() {
        return false;
    }
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let grid = (CERTIFY_GRID_BITS as f64).exp2();
    let mut coeffs = vec![S::zero(); masks.len()];
    for (&free, b) in free_cols.iter().zip(&basis) {
        let a = S::approx_f64((y[free] / scale * grid).round() / grid);
        if a.is_zero() {
            continue;
        }
        for (c, v) in coeffs.iter_mut().zip(b) {
            *c += a.clone() * v;
        }
    }
    let mut total = S::zero();
    for (t, &s) in signs.iter().enumerate() {
        let mut q = S::zero();
        for (&m, c) in masks.iter().zip(&coeffs) {
            if walsh_sign(m, t) < 0 {
                q -= c;
            } else {
                q += c;
            }
        }
        let fq = if s < 0 { -q } else { q };
        if fq.is_negative_strict() {
            return false;
        }
        total += fq;
    }
    total.is_positive_strict()
}

/// Exact witness from an approximate one, or `None` if rounding destroyed it.
fn certify_float_witness<S: Scalar>(signs: &[i8], p: usize, guess: &[f64], d: usize) -> Option<FunctionTable<S>> {
    let margin = signs
        .iter()
        .zip(guess)
        .map(|(&s, v)| s as f64 * v)
        .fold(f64::INFINITY, f64::min);
    if !(margin > 0.0 && margin.is_finite()) {
        return None;
    }
    let grid = (CERTIFY_GRID_BITS as f64).exp2();
    let rounded = FunctionTable::from_fn(p, |t| S::approx_f64((guess[t] / margin * grid).round() / grid)).ok()?;
    let h = project_h(&rounded, d).ok()?;
    normalize_witness(signs, h, d)
}

/// Re-projects onto `H` (a no-op in exact mode) and rescales so that
/// `min f h = 1`; `None` if the margin does not survive.
fn normalize_witness<S: Scalar>(signs: &[i8], h: FunctionTable<S>, d: usize) -> Option<FunctionTable<S>> {
    let h = if S::MODE == Mode::Exact {
        h
    } else {
        project_h(&h, d).ok()?
    };
    let m = margin(signs, &h);
    if !m.is_positive_strict() {
        return None;
    }
    Some(h.scaled(&(S::one() / m)))
}

fn margin<S: Scalar>(signs: &[i8], h: &FunctionTable<S>) -> S {
    signs
        .iter()
        .zip(h.values())
        .map(|(&s, v)| if s < 0 { -v.clone() } else { v.clone() })
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap_or_else(S::zero)
}

/// Alternating projections between `H` and `{h : f h >= 1}`.
///
/// Only affirmative answers are conclusive; the returned `h` lies in `H` up to
/// rounding and has `min f h = 1`.
pub fn find_sign_witness_projected(f: &FunctionTable<f64>, d: usize, iterations: usize) -> Result<Option<FunctionTable<f64>>> {
    let signs = f.require_signs()?;
    check_degree(f.p(), d)?;
    if d == f.p() {
        return Ok(None);
    }
    let mut x = f.clone();
    for _ in 0..iterations {
        let y = project_h(&x, d)?;
        let scale = y.max_abs();
        if scale > 0.0 && margin(&signs, &y) > 1e-9 * scale {
            return Ok(normalize_witness(&signs, y, d));
        }
        x = FunctionTable::from_fn(f.p(), |t| {
            let s = signs[t] as f64;
            s * (s * y.values()[t]).max(1.0)
        })?;
    }
    Ok(None)
}

/// Double-precision decision: projection fast path, then the simplex.
pub fn find_sign_witness_fast(f: &FunctionTable<f64>, d: usize) -> Result<Option<FunctionTable<f64>>> {
    if let Some(h) = find_sign_witness_projected(f, d, PROJECTION_ITERATIONS)? {
        return Ok(Some(h));
    }
    find_sign_witness(f, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCertificate<S> {
    pub p: usize,
    pub d: usize,
    pub h: FunctionTable<S>,
    pub epsilon: S,
    pub fprime: FunctionTable<S>,
    /// `min_theta f(theta) h(theta)`.
    pub margin: S,
    /// `max_{degree(J) <= d} |<h, w_J>|`.
    pub low_freq_residual: S,
}

/// Builds `f' = f - eps h` with `eps = 1 / max|h|`.
pub fn build_fprime<S: Scalar>(f: &FunctionTable<S>, h: &FunctionTable<S>, d: usize) -> Result<WitnessCertificate<S>> {
    let signs = f.require_signs()?;
    if h.p() != f.p() {
        return Err(Error::DimensionMismatch {
            expected: f.p(),
            found: h.p(),
        });
    }
    check_degree(f.p(), d)?;
    let m = margin(&signs, h);
    if !m.is_positive_strict() {
        return Err(Error::InvalidWitness(format!("margin {m} is not positive")));
    }
    let residual = wht_full(h).max_low_degree(d);
    if !residual.is_negligible() {
        return Err(Error::InvalidWitness(format!(
            "h is not in H: low-frequency residual {residual}"
        )));
    }
    let epsilon = S::one() / h.max_abs();
    let fprime = f.sub(&h.scaled(&epsilon))?;
    Ok(WitnessCertificate {
        p: f.p(),
        d,
        h: h.clone(),
        epsilon,
        fprime,
        margin: m,
        low_freq_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CertificateFailure {
    DimensionMismatch,
    NonPositiveEpsilon,
    NonPositiveMargin,
    LowFrequencyResidual,
    FprimeMismatch { index: usize },
    FprimeOutOfRange { index: usize },
}

impl fmt::Display for CertificateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch => f.write_str("certificate dimensions do not match f"),
            Self::NonPositiveEpsilon => f.write_str("epsilon is not positive"),
            Self::NonPositiveMargin => f.write_str("min f*h is not positive"),
            Self::LowFrequencyResidual => f.write_str("h has a nonzero low-degree Walsh coefficient"),
            Self::FprimeMismatch { index } => write!(f, "f' differs from f - eps*h at index {index}"),
            Self::FprimeOutOfRange { index } => write!(f, "f' leaves (-1, 1) at index {index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<S> {
    pub accepted: bool,
    pub margin: S,
    pub low_freq_residual: S,
    pub failures: Vec<CertificateFailure>,
}

/// Re-derives every certificate invariant from `f`, `h`, `eps` and `f'`.
///
/// Low-degree coefficients are summed directly rather than through the fast
/// transform, so this check does not share a code path with [`build_fprime`].
pub fn verify_certificate<S: Scalar>(
    f: &FunctionTable<S>,
    cert: &WitnessCertificate<S>,
    d: usize,
    tol: &S,
) -> Result<VerificationReport<S>> {
    let signs = f.require_signs()?;
    check_degree(f.p(), d)?;
    let mut failures = Vec::new();
    let p = f.p();
    if cert.h.p() != p || cert.fprime.p() != p || cert.p != p {
        return Ok(VerificationReport {
            accepted: false,
            margin: S::zero(),
            low_freq_residual: S::zero(),
            failures: vec![CertificateFailure::DimensionMismatch],
        });
    }
    if cert.epsilon <= S::zero() {
        failures.push(CertificateFailure::NonPositiveEpsilon);
    }

    let mut margin: Option<S> = None;
    for (&s, v) in signs.iter().zip(cert.h.values()) {
        let prod = if s < 0 { -v.clone() } else { v.clone() };
        margin = Some(match margin {
            Some(m) if m <= prod => m,
            _ => prod,
        });
    }
    let margin = margin.unwrap_or_else(S::zero);
    if margin <= *tol {
        failures.push(CertificateFailure::NonPositiveMargin);
    }

    let scale = S::pow2_recip(p);
    let mut residual = S::zero();
    for mask in (0..1usize << p).filter(|m| m.count_ones() as usize <= d) {
        let mut acc = S::zero();
        for (t, v) in cert.h.values().iter().enumerate() {
            if walsh_sign(mask, t) < 0 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        let c = (acc * &scale).abs();
        if c > residual {
            residual = c;
        }
    }
    if residual > *tol {
        failures.push(CertificateFailure::LowFrequencyResidual);
    }

    let one = S::one();
    for (t, ((&s, hv), fp)) in signs.iter().zip(cert.h.values()).zip(cert.fprime.values()).enumerate() {
        let expected = S::from_sign(s) - cert.epsilon.clone() * hv;
        if (expected - fp).abs() > *tol {
            failures.push(CertificateFailure::FprimeMismatch { index: t });
            break;
        }
    }
    for (t, fp) in cert.fprime.values().iter().enumerate() {
        if fp.abs() >= one {
            failures.push(CertificateFailure::FprimeOutOfRange { index: t });
            break;
        }
    }
    Ok(VerificationReport {
        accepted: failures.is_empty(),
        margin,
        low_freq_residual: residual,
        failures,
    })
}

/// A probability distribution on the cube, indexed like [`FunctionTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<S> {
    table: FunctionTable<S>,
}

impl<S: Scalar> DistributionTable<S> {
    pub fn new(p: usize, probs: Vec<S>) -> Result<Self> {
        let table = FunctionTable::new(p, probs)?;
        Self::from_table(table)
    }

    pub fn from_table(table: FunctionTable<S>) -> Result<Self> {
        if let Some(i) = table.values().iter().position(|v| v.is_negative_strict()) {
            return Err(Error::InvalidInput(format!(
                "negative probability {} at index {i}",
                table.values()[i]
            )));
        }
        let total = table.values().iter().fold(S::zero(), |a, v| a + v);
        if !(total.clone() - S::one()).is_negligible() {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { table })
    }

    /// Uniform distribution on the given point indices.
    pub fn uniform_on(p: usize, support: &[usize]) -> Result<Self> {
        let members = support_mask(p, support)?;
        let w = S::from_ratio(1, support.len() as i64);
        Self::new(p, members.iter().map(|&b| if b { w.clone() } else { S::zero() }).collect())
    }

    pub fn p(&self) -> usize {
        self.table.p()
    }

    pub fn probs(&self) -> &[S] {
        self.table.values()
    }

    pub fn as_table(&self) -> &FunctionTable<S> {
        &self.table
    }
}

fn support_mask(p: usize, support: &[usize]) -> Result<Vec<bool>> {
    if p == 0 || p > crate::MAX_DIM {
        return Err(Error::out_of_range("dimension p", p, "1..=24"));
    }
    if support.is_empty() {
        return Err(Error::InvalidInput("support set is empty".into()));
    }
    let mut members = vec![false; 1 << p];
    for &t in support {
        if t >= members.len() {
            return Err(Error::out_of_range("cube point index", t, format!("0..{}", members.len())));
        }
        if std::mem::replace(&mut members[t], true) {
            return Err(Error::InvalidInput(format!("point {t} listed twice")));
        }
    }
    Ok(members)
}

/// Range of `Pr{Y = theta0}` over all `Y` sharing the marginals of `x` up to
/// dimension `d`.
pub fn marginal_polytope_range<S: Scalar>(x: &DistributionTable<S>, d: usize, theta0: usize) -> Result<(S, S)> {
    let p = x.p();
    check_degree(p, d)?;
    let n = 1usize << p;
    if theta0 >= n {
        return Err(Error::out_of_range("cube point index", theta0, format!("0..{n}")));
    }
    let masks = low_degree_masks(p, d);
    let rows: Vec<Vec<S>> = masks
        .iter()
        .map(|&m| (0..n).map(|t| S::from_sign(walsh_sign(m, t))).collect())
        .collect();
    let rhs: Vec<S> = masks
        .iter()
        .map(|&m| {
            x.probs().iter().enumerate().fold(S::zero(), |acc, (t, v)| {
                if walsh_sign(m, t) < 0 {
                    acc - v
                } else {
                    acc + v
                }
            })
        })
        .collect();
    let mut c = vec![S::zero(); n];
    c[theta0] = S::one();
    let lo = match lp::minimize(rows.clone(), rhs.clone(), &c) {
        LpOutcome::Optimal { value, .. } => value,
        other => return Err(Error::InvalidInput(format!("marginal polytope LP failed: {other:?}"))),
    };
    c[theta0] = -S::one();
    let hi = match lp::minimize(rows, rhs, &c) {
        LpOutcome::Optimal { value, .. } => -value,
        other => return Err(Error::InvalidInput(format!("marginal polytope LP failed: {other:?}"))),
    };
    Ok((lo, hi))
}

/// `Y` with the marginals of the uniform distribution on `support` up to
/// dimension `d` and `0 < Pr{Y = theta} < 1/|support|` everywhere.
pub fn distribution_witness<S: Scalar>(p: usize, support: &[usize], d: usize) -> Result<Option<DistributionTable<S>>> {
    let members = support_mask(p, support)?;
    check_degree(p, d)?;
    let f = FunctionTable::from_fn(p, |t| if members[t] { S::one() } else { -S::one() })?;
    let Some(h) = find_sign_witness(&f, d)? else {
        return Ok(None);
    };
    let cert = build_fprime(&f, &h, d)?;
    // 0/1 form: g' = (f' + 1) / 2, Pr{Y = theta} = g'(theta) / |S|.
    let scale = S::from_ratio(1, 2 * support.len() as i64);
    let probs = cert
        .fprime
        .values()
        .iter()
        .map(|v| (v.clone() + S::one()) * &scale)
        .collect();
    DistributionTable::new(p, probs).map(Some)
}

/// Largest absolute gap between marginals of `x` and `y` over every
/// coordinate set of size at most `d` and every sign assignment.
pub fn marginal_gap<S: Scalar>(x: &FunctionTable<S>, y: &FunctionTable<S>, d: usize) -> Result<S> {
    let p = x.p();
    check_degree(p, d)?;
    let mut gap = S::zero();
    for set in (0..1usize << p).filter(|m| m.count_ones() as usize <= d) {
        let coords: Vec<usize> = (1..=p).filter(|j| set >> (j - 1) & 1 == 1).collect();
        for assign in 0..1usize << coords.len() {
            let taus: Vec<i8> = (0..coords.len()).map(|l| if assign >> l & 1 == 1 { -1 } else { 1 }).collect();
            let g = (marginal(x, &coords, &taus)? - marginal(y, &coords, &taus)?).abs();
            if g > gap {
                gap = g;
            }
        }
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{frequencies_equal, SubsetMask};
    use crate::scalar::Rational;
    use num_traits::{One, Signed, Zero};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn parity(p: usize) -> FunctionTable<Rational> {
        FunctionTable::walsh(SubsetMask::full(p).unwrap())
    }

    #[test]
    fn obstructions_certify_every_infeasible_small_table() {
        for (p, d) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
            for bits in (0..1u64 << (1 << p)).step_by(7) {
                let f = FunctionTable::<Rational>::from_sign_bits(p, bits).unwrap();
                let signs = f.signs().unwrap();
                let (rows, rhs) = sign_system::<f64>(&signs, p, d);
                let float = lp::feasible_point_or_farkas(rows, rhs);
                if find_sign_witness_simplex(&f, d).unwrap().is_none() {
                    let fq = float.expect_err("float system is infeasible");
                    assert!(fq.iter().all(|&v| v >= -1e-9));
                    assert!(certify_obstruction::<Rational>(&signs, p, d, &fq), "p={p} d={d} bits={bits}");
                } else {
                    assert!(float.is_ok());
                }
            }
        }
    }

    #[test]
    fn constant_is_infeasible_for_every_degree() {
        for p in 1..=4 {
            let f = FunctionTable::constant(p, Rational::one()).unwrap();
            for d in 0..=p {
                assert!(find_sign_witness(&f, d).unwrap().is_none());
            }
        }
    }

    #[test]
    fn parity_certificate() {
        for p in 1..=5 {
            let f = parity(p);
            for d in 0..p {
                let h = find_sign_witness(&f, d).unwrap().expect("parity is feasible");
                let cert = build_fprime(&f, &f, d).unwrap();
                assert_eq!(cert.epsilon, Rational::one());
                assert!(cert.fprime.values().iter().all(|v| v.is_zero()));
                let c2 = build_fprime(&f, &h, d).unwrap();
                assert!(verify_certificate(&f, &c2, d, &Rational::zero()).unwrap().accepted);
            }
            assert!(find_sign_witness(&f, p).unwrap().is_none());
        }
    }

    #[test]
    fn rejects_non_sign_input_and_bad_degree() {
        let f = FunctionTable::constant(3, q(1, 2)).unwrap();
        assert!(matches!(find_sign_witness(&f, 1), Err(Error::NotSignTable { .. })));
        assert!(find_sign_witness(&parity(3), 4).is_err());
    }

    #[test]
    fn argmax_of_h_maps_to_zero() {
        let mut feasible = 0;
        for bits in 0..256u64 {
            let f = FunctionTable::<Rational>::from_sign_bits(3, bits).unwrap();
            let Some(h) = find_sign_witness(&f, 1).unwrap() else {
                continue;
            };
            feasible += 1;
            let cert = build_fprime(&f, &h, 1).unwrap();
            let hmax = h.max_abs();
            for (t, v) in h.values().iter().enumerate() {
                if v.abs() == hmax {
                    assert!(cert.fprime.values()[t].is_zero());
                }
            }
            assert!(frequencies_equal(&f, &cert.fprime, 1, &Rational::zero()).unwrap());
        }
        assert_eq!(feasible, 104);
    }

    #[test]
    fn verification_rejects_tampering() {
        let f = parity(4);
        let cert = build_fprime(&f, &f, 2).unwrap();
        let zero = Rational::zero();
        assert!(verify_certificate(&f, &cert, 2, &zero).unwrap().accepted);

        let mut big = cert.clone();
        big.epsilon = q(3, 1) / cert.h.max_abs();
        big.fprime = f.sub(&cert.h.scaled(&big.epsilon)).unwrap();
        let report = verify_certificate(&f, &big, 2, &zero).unwrap();
        assert!(!report.accepted);
        assert!(matches!(report.failures[0], CertificateFailure::FprimeOutOfRange { .. }));
        assert_eq!(big.fprime.values()[0], q(-2, 1));

        let mut shifted = cert.clone();
        shifted.h = cert.h.add(&FunctionTable::constant(4, Rational::one()).unwrap()).unwrap();
        let report = verify_certificate(&f, &shifted, 2, &zero).unwrap();
        assert!(report.failures.contains(&CertificateFailure::LowFrequencyResidual));
        assert_eq!(report.low_freq_residual, Rational::one());
    }

    #[test]
    fn build_fprime_rejects_invalid_h() {
        let f = parity(3);
        let low = FunctionTable::<Rational>::walsh(SubsetMask::new(3, 1).unwrap());
        assert!(matches!(build_fprime(&f, &low, 1), Err(Error::InvalidWitness(_))));
        assert!(matches!(build_fprime(&f, &f.neg(), 1), Err(Error::InvalidWitness(_))));
    }

    #[test]
    fn polytope_range_with_only_mass_constraint() {
        let x = DistributionTable::<Rational>::uniform_on(3, &(0..8).collect::<Vec<_>>()).unwrap();
        for t in 0..8 {
            assert_eq!(marginal_polytope_range(&x, 0, t).unwrap(), (q(0, 1), q(1, 1)));
        }
    }

    #[test]
    fn full_cube_support_has_no_witness() {
        for d in 0..=3 {
            let all: Vec<usize> = (0..8).collect();
            assert!(distribution_witness::<Rational>(3, &all, d).unwrap().is_none());
        }
        assert!(distribution_witness::<Rational>(3, &[], 1).is_err());
        assert!(distribution_witness::<Rational>(3, &[1, 1], 1).is_err());
    }

    #[test]
    fn projected_fast_path_finds_parity() {
        let f = parity(6).to_f64();
        let h = find_sign_witness_projected(&f, 3, 10).unwrap().unwrap();
        assert!(wht_full(&h).max_low_degree(3) < 1e-12);
        assert!(find_sign_witness_projected(&FunctionTable::constant(6, 1.0).unwrap(), 2, 50).unwrap().is_none());
    }

    #[test]
    fn float_guided_and_pure_simplex_agree_at_p3() {
        for bits in 0..256u64 {
            let f = FunctionTable::<Rational>::from_sign_bits(3, bits).unwrap();
            for d in 0..=3 {
                let guided = find_sign_witness(&f, d).unwrap();
                let pure = find_sign_witness_simplex(&f, d).unwrap();
                assert_eq!(guided.is_some(), pure.is_some(), "bits={bits} d={d}");
                if let Some(h) = pure {
                    let cert = build_fprime(&f, &h, d).unwrap();
                    assert!(verify_certificate(&f, &cert, d, &Rational::zero()).unwrap().accepted);
                }
            }
        }
    }

    #[test]
    fn double_mode_decision_matches_exact_at_p3() {
        for bits in 0..256u64 {
            let fe = FunctionTable::<Rational>::from_sign_bits(3, bits).unwrap();
            let ff = fe.to_f64();
            for d in 0..=3 {
                let exact = find_sign_witness(&fe, d).unwrap().is_some();
                assert_eq!(find_sign_witness_fast(&ff, d).unwrap().is_some(), exact, "bits={bits} d={d}");
            }
        }
    }
}
