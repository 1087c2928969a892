//! Counting experiments over sign tables: how often a table shares all of
//! its low-degree frequencies with some other function in `(-1, 1)`, and how
//! often two sign tables share them exactly.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{check_degree, low_degree_masks, walsh_sign, CubePoint, FunctionTable};
use crate::error::{Error, Result};
use crate::sampling::{trial_rng, write_csv};
use crate::scalar::{Mode, Rational};
use crate::witness::{find_sign_witness, find_sign_witness_fast};

/// Largest `p` for exhaustive enumeration (`2^16` tables).
pub const MAX_EXACT_P: usize = 4;
/// Largest `p` for sampled estimates.
pub const MAX_MONTE_CARLO_P: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionRow {
    pub p: usize,
    pub d: usize,
    /// `exhaustive` or `monte_carlo`.
    pub method: &'static str,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub tables: u64,
    pub non_unique: u64,
    pub fraction: f64,
    /// Binomial standard error; zero for exhaustive counts.
    pub std_error: f64,
}

impl FractionRow {
    fn new(p: usize, d: usize, method: &'static str, mode: Mode, seed: Option<u64>, tables: u64, hits: u64) -> Self {
        let fraction = if tables == 0 { f64::NAN } else { hits as f64 / tables as f64 };
        let std_error = if method == "monte_carlo" && tables > 0 {
            (fraction * (1.0 - fraction) / tables as f64).sqrt()
        } else {
            0.0
        };
        Self {
            p,
            d,
            method,
            mode,
            seed,
            tables,
            non_unique: hits,
            fraction,
            std_error,
        }
    }
}

pub fn fraction_rows_csv(rows: &[FractionRow]) -> Result<String> {
    write_csv(rows)
}

fn table_from_bits(p: usize, bits: u64) -> Result<FunctionTable<Rational>> {
    FunctionTable::from_sign_bits(p, bits)
}

fn has_witness(signs: &[i8], p: usize, d: usize, mode: Mode) -> Result<bool> {
    Ok(match mode {
        Mode::Exact => find_sign_witness(&FunctionTable::<Rational>::from_signs(p, signs)?, d)?.is_some(),
        Mode::Double => find_sign_witness_fast(&FunctionTable::<f64>::from_signs(p, signs)?, d)?.is_some(),
    })
}

/// Exact fraction of the `2^{2^p}` sign tables admitting a witness.
pub fn fraction_exact(p: usize, d: usize) -> Result<FractionRow> {
    if p > MAX_EXACT_P {
        return Err(Error::ScaleLimit(format!(
            "exhaustive enumeration needs p <= {MAX_EXACT_P}, got {p}"
        )));
    }
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    let total = 1u64 << (1u64 << p);
    let hits = (0..total)
        .into_par_iter()
        .map(|bits| Ok(u64::from(find_sign_witness(&table_from_bits(p, bits)?, d)?.is_some())))
        .sum::<Result<u64>>()?;
    Ok(FractionRow::new(p, d, "exhaustive", Mode::Exact, None, total, hits))
}

/// Estimated fraction over `trials` uniform sign tables; trial `i` draws its
/// table from stream `i` of `seed`.
pub fn fraction_monte_carlo(p: usize, d: usize, trials: u64, seed: u64, mode: Mode) -> Result<FractionRow> {
    if p > MAX_MONTE_CARLO_P {
        return Err(Error::ScaleLimit(format!(
            "sampled estimates need p <= {MAX_MONTE_CARLO_P}, got {p}"
        )));
    }
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let signs = random_signs(p, &mut trial_rng(seed, trial));
            Ok(u64::from(has_witness(&signs, p, d, mode)?))
        })
        .sum::<Result<u64>>()?;
    Ok(FractionRow::new(p, d, "monte_carlo", mode, Some(seed), trials, hits))
}

pub fn random_signs<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<i8> {
    (0..1usize << p).map(|_| if rng.gen::<bool>() { -1 } else { 1 }).collect()
}

/// How many sign tables share their full low-degree spectrum with another
/// sign table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedSpectrumCount {
    pub p: usize,
    pub d: usize,
    pub tables: u64,
    pub classes: u64,
    /// Tables whose class has at least two members.
    pub shared_tables: u64,
    pub largest_class: u64,
}

/// Exhaustive for `p <= 4`: groups sign tables by their unnormalized
/// low-degree Walsh sums, which are integers.
pub fn shared_low_spectrum(p: usize, d: usize) -> Result<SharedSpectrumCount> {
    if p > MAX_EXACT_P {
        return Err(Error::ScaleLimit(format!(
            "exhaustive enumeration needs p <= {MAX_EXACT_P}, got {p}"
        )));
    }
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    let masks = low_degree_masks(p, d);
    let n = 1usize << p;
    let total = 1u64 << n;
    let mut classes: HashMap<Vec<i32>, u64> = HashMap::new();
    for bits in 0..total {
        let key: Vec<i32> = masks
            .iter()
            .map(|&m| {
                (0..n)
                    .map(|t| {
                        let f = if bits >> t & 1 == 1 { -1 } else { 1 };
                        f * i32::from(walsh_sign(m, t))
                    })
                    .sum()
            })
            .collect();
        *classes.entry(key).or_default() += 1;
    }
    Ok(SharedSpectrumCount {
        p,
        d,
        tables: total,
        classes: classes.len() as u64,
        shared_tables: classes.values().filter(|&&c| c > 1).sum(),
        largest_class: classes.values().copied().max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_small_cases() {
        let r = fraction_exact(2, 1).unwrap();
        assert_eq!((r.non_unique, r.tables), (2, 16));
        assert_eq!(r.std_error, 0.0);
        let counts: Vec<u64> = (0..=3).map(|d| fraction_exact(3, d).unwrap().non_unique).collect();
        assert_eq!(counts, vec![254, 104, 2, 0]);
        assert!(fraction_exact(5, 1).unwrap_err().is_scale_limit());
    }

    #[test]
    fn sampled_estimates_are_deterministic() {
        let a = fraction_monte_carlo(6, 2, 40, 11, Mode::Double).unwrap();
        let b = fraction_monte_carlo(6, 2, 40, 11, Mode::Double).unwrap();
        assert_eq!(a, b);
        let e = fraction_monte_carlo(6, 2, 40, 11, Mode::Exact).unwrap();
        assert_eq!(a.non_unique, e.non_unique);
        assert!(a.std_error > 0.0 || a.fraction == 0.0 || a.fraction == 1.0);
        assert!(fraction_monte_carlo(15, 2, 1, 0, Mode::Double).unwrap_err().is_scale_limit());
    }

    #[test]
    fn shared_spectrum_small_cases() {
        // d = p: the spectrum determines the table.
        let full = shared_low_spectrum(3, 3).unwrap();
        assert_eq!((full.classes, full.shared_tables), (256, 0));
        // d = 0: classes are the possible sums, sizes C(4, j).
        let zero = shared_low_spectrum(2, 0).unwrap();
        assert_eq!((zero.classes, zero.largest_class, zero.shared_tables), (5, 6, 14));
    }
}
