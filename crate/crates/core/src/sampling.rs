//! Spectral sampling experiments on low-degree Walsh vectors.
//!
//! For a point set `Theta` the averaged Gram matrix
//! `A = |Theta|^{-1} sum_{theta in Theta} w(theta) w(theta)^T` has unit
//! diagonal, so its trace is exactly `k`. Over the whole cube it is the
//! identity. The experiments here measure how far random subsets stray from
//! that, and compare selector-model deviations against the matrix Bernstein
//! tail bound.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{binomial_prefix_sum, check_degree, low_degree_masks, walsh_sign, CubePoint};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigenvalues, operator_norm};
use crate::scalar::Scalar;

/// Largest Gram dimension handled by the dense eigensolver.
pub const MAX_GRAM_DIM: usize = 256;
/// Jacobi stopping rule: off-diagonal Frobenius norm below `JACOBI_TOL * k`.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

pub const LOWER_SPECTRAL_BOUND: f64 = 0.9;
pub const UPPER_SPECTRAL_BOUND: f64 = 1.1;

/// Generator for one trial: a ChaCha stream selected by the trial index, so
/// trials are independent of each other and of execution order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `(w_J(theta_t))_{degree(J) <= d}` ordered by mask.
pub fn w_vector<S: Scalar>(p: usize, d: usize, t: usize) -> Result<Vec<S>> {
    CubePoint::new(p, t)?;
    check_degree(p, d)?;
    Ok(low_degree_masks(p, d)
        .into_iter()
        .map(|m| S::from_sign(walsh_sign(m, t)))
        .collect())
}

/// Uniform `n`-subset of `0..k` by a partial Fisher-Yates shuffle.
pub fn sample_subset<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n > k {
        return Err(Error::out_of_range("subset size", n, format!("0..={k}")));
    }
    let mut pool: Vec<usize> = (0..k).collect();
    for i in 0..n {
        let j = rng.gen_range(i..k);
        pool.swap(i, j);
    }
    pool.truncate(n);
    Ok(pool)
}

/// Each index of `0..k` kept independently with probability `delta`.
pub fn sample_selectors<R: Rng + ?Sized>(k: usize, delta: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidInput(format!("selector probability {delta} outside [0, 1]")));
    }
    Ok((0..k).filter(|_| rng.gen_bool(delta)).collect())
}

/// `sum_{theta in Theta} w(theta) w(theta)^T` as exact integers.
fn gram_counts(masks: &[usize], points: &[usize]) -> Vec<Vec<i64>> {
    let k = masks.len();
    let mut g = vec![vec![0i64; k]; k];
    for &t in points {
        let w: Vec<i64> = masks.iter().map(|&m| walsh_sign(m, t) as i64).collect();
        for i in 0..k {
            let wi = w[i];
            for j in i..k {
                g[i][j] += wi * w[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    g
}

/// Averaged Gram matrix of the low-degree Walsh vectors over `points`.
pub fn gram_matrix(p: usize, d: usize, points: &[usize]) -> Result<Vec<Vec<f64>>> {
    let masks = validated_masks(p, d, points)?;
    let n = points.len() as f64;
    Ok(gram_counts(&masks, points)
        .into_iter()
        .map(|row| row.into_iter().map(|v| v as f64 / n).collect())
        .collect())
}

fn validated_masks(p: usize, d: usize, points: &[usize]) -> Result<Vec<usize>> {
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    let k = binomial_prefix_sum(p, d);
    if k > MAX_GRAM_DIM {
        return Err(Error::ScaleLimit(format!("Gram dimension {k} exceeds {MAX_GRAM_DIM}")));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("the point set must be nonempty".into()));
    }
    let mut seen = vec![false; 1 << p];
    for &t in points {
        CubePoint::new(p, t)?;
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidInput(format!("point {t} listed twice")));
        }
    }
    Ok(low_degree_masks(p, d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramStatistics {
    pub p: usize,
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Trace of the averaged Gram matrix divided by `k`.
    pub trace_over_k: f64,
    pub seed: Option<u64>,
}

impl GramStatistics {
    pub fn within(&self, lower: f64, upper: f64) -> bool {
        self.lambda_min >= lower && self.lambda_max <= upper
    }
}

pub fn gram_extremes(p: usize, d: usize, points: &[usize]) -> Result<GramStatistics> {
    let masks = validated_masks(p, d, points)?;
    let k = masks.len();
    let counts = gram_counts(&masks, points);
    let n = points.len();
    let trace: i64 = (0..k).map(|i| counts[i][i]).sum();
    let a: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&v| v as f64 / n as f64).collect())
        .collect();
    let eig = jacobi_eigenvalues(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS);
    Ok(GramStatistics {
        p,
        d,
        k,
        n,
        lambda_min: eig.eigenvalues[0],
        lambda_max: eig.eigenvalues[k - 1],
        trace_over_k: trace as f64 / (n as f64 * k as f64),
        seed: None,
    })
}

/// `round(0.1 * 2^p)` with halves rounded up.
pub fn tenth_of_cube(p: usize) -> usize {
    ((1usize << p) + 5) / 10
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub p: usize,
    pub d: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub pass: bool,
    #[serde(skip)]
    pub trace_over_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundParams {
    pub p: usize,
    pub d: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub params: LowerBoundParams,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundSummary {
    /// `None` when no trials ran.
    pub failure_rate: Option<f64>,
    pub failures: usize,
    pub trials: usize,
    pub parameters: LowerBoundParams,
}

impl LowerBoundReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }

    pub fn failure_rate(&self) -> Option<f64> {
        (!self.records.is_empty()).then(|| self.failures() as f64 / self.records.len() as f64)
    }

    pub fn summary(&self) -> LowerBoundSummary {
        LowerBoundSummary {
            failure_rate: self.failure_rate(),
            failures: self.failures(),
            trials: self.records.len(),
            parameters: self.params.clone(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        write_csv(&self.records)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }
}

pub(crate) fn write_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Draws `trials` uniform subsets of size `round(0.1 * 2^p)` and records the
/// extreme eigenvalues of each averaged Gram matrix.
pub fn monte_carlo_lower_bound(p: usize, d: usize, trials: u64, seed: u64) -> Result<LowerBoundReport> {
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    let k = binomial_prefix_sum(p, d);
    let n = tenth_of_cube(p);
    if n < k {
        return Err(Error::InvalidInput(format!(
            "sample size {n} is smaller than the Gram dimension {k}"
        )));
    }
    if k > MAX_GRAM_DIM {
        return Err(Error::ScaleLimit(format!("Gram dimension {k} exceeds {MAX_GRAM_DIM}")));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let points = sample_subset(1 << p, n, &mut rng)?;
            let g = gram_extremes(p, d, &points)?;
            Ok(TrialRecord {
                trial,
                seed,
                p,
                d,
                k,
                n,
                lambda_min: g.lambda_min,
                lambda_max: g.lambda_max,
                pass: g.within(LOWER_SPECTRAL_BOUND, UPPER_SPECTRAL_BOUND),
                trace_over_k: g.trace_over_k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LowerBoundReport {
        params: LowerBoundParams {
            p,
            d,
            k,
            n,
            seed,
            lower: LOWER_SPECTRAL_BOUND,
            upper: UPPER_SPECTRAL_BOUND,
        },
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinParams {
    pub k: usize,
    /// Almost-sure bound on each summand's operator norm.
    pub m: f64,
    pub sigma2: f64,
    pub t: f64,
}

impl BernsteinParams {
    pub fn new(k: usize, m: f64, sigma2: f64, t: f64) -> Result<Self> {
        for (name, v) in [("M", m), ("sigma^2", sigma2), ("t", t)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(Self { k, m, sigma2, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub raw: f64,
    pub clamped: f64,
}

/// `2k exp(-(t^2/2) / (sigma^2 + M t / 3))`, also reported clamped to `[0, 1]`.
pub fn bernstein_tail_bound(params: &BernsteinParams) -> TailBound {
    let BernsteinParams { k, m, sigma2, t } = *params;
    let prefactor = 2.0 * k as f64;
    let raw = if t == 0.0 {
        prefactor
    } else {
        let denom = sigma2 + m * t / 3.0;
        if denom == 0.0 {
            0.0
        } else {
            prefactor * (-(t * t / 2.0) / denom).exp()
        }
    };
    TailBound {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    pub bound_clamped: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorExperiment {
    pub k: usize,
    pub delta: f64,
    pub m: f64,
    pub sigma2: f64,
    /// `||sum_i Z_i||` for every trial.
    pub norms: Vec<f64>,
    pub points: Vec<TailPoint>,
}

impl SelectorExperiment {
    /// True when no empirical tail frequency exceeds the raw bound.
    pub fn bound_holds(&self) -> bool {
        self.points.iter().all(|pt| pt.empirical <= pt.bound)
    }
}

/// Selector model with `x_i = w(theta_i)` over the whole cube:
/// `Z_i = (delta_i - delta) x_i x_i^T`, `delta = n / 2^p`.
///
/// `M` and `sigma^2` are computed from the vectors rather than from closed
/// forms. When `t_grid` is `None`, ten points `j * sigma / 2`, `j = 0..10`,
/// are used.
pub fn selector_tail_experiment(
    p: usize,
    d: usize,
    n: usize,
    trials: u64,
    seed: u64,
    t_grid: Option<&[f64]>,
) -> Result<SelectorExperiment> {
    let all: Vec<usize> = (0..1usize << p).collect();
    let masks = validated_masks(p, d, &all)?;
    let big_k = all.len();
    if n > big_k {
        return Err(Error::out_of_range("expected sample size", n, format!("0..={big_k}")));
    }
    let k = masks.len();
    let delta = n as f64 / big_k as f64;
    let vectors: Vec<Vec<f64>> = all
        .iter()
        .map(|&t| masks.iter().map(|&m| walsh_sign(m, t) as f64).collect())
        .collect();
    let m_bound = vectors
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let full: Vec<Vec<f64>> = gram_counts(&masks, &all)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v as f64).collect())
        .collect();
    // sum_i E Z_i^2 = delta (1 - delta) sum_i ||x_i||^2 x_i x_i^T
    let mut second = vec![vec![0.0; k]; k];
    for x in &vectors {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        for i in 0..k {
            for j in 0..k {
                second[i][j] += delta * (1.0 - delta) * norm2 * x[i] * x[j];
            }
        }
    }
    let sigma2 = operator_norm(&second, JACOBI_TOL);

    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let chosen = sample_selectors(big_k, delta, &mut rng)?;
            let counts = gram_counts(&masks, &chosen);
            let sum: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| counts[i][j] as f64 - delta * full[i][j]).collect())
                .collect();
            Ok(operator_norm(&sum, JACOBI_TOL))
        })
        .collect::<Result<Vec<_>>>()?;

    let default_grid: Vec<f64> = (0..10).map(|j| j as f64 * sigma2.sqrt() / 2.0).collect();
    let grid = t_grid.unwrap_or(&default_grid);
    let points = grid
        .iter()
        .map(|&t| {
            let bound = bernstein_tail_bound(&BernsteinParams::new(k, m_bound, sigma2, t)?);
            let hits = norms.iter().filter(|&&v| v >= t).count();
            Ok(TailPoint {
                t,
                empirical: if norms.is_empty() { 0.0 } else { hits as f64 / norms.len() as f64 },
                bound: bound.raw,
                bound_clamped: bound.clamped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectorExperiment {
        k,
        delta,
        m: m_bound,
        sigma2,
        norms,
        points,
    })
}

/// Largest `d` with `sum_{i <= d} C(p, i) < 0.09 * 2^p`, evaluated exactly as
/// `100 * sum < 9 * 2^p`; `None` when even `d = 0` fails.
pub fn threshold_d(p: usize) -> Option<usize> {
    let limit = BigUint::from(9u32) << p;
    let mut sum = BigUint::zero();
    let mut binom = BigUint::one();
    let mut best = None;
    for d in 0..=p {
        sum += &binom;
        if &sum * 100u32 >= limit {
            break;
        }
        best = Some(d);
        binom = binom * (p - d) / (d + 1);
    }
    best
}
