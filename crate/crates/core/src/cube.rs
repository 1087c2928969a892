//! The discrete cube `{-1,1}^p`, Walsh functions and the fast transform.
//!
//! Point encoding: index `t` in `[0, 2^p)` denotes the point whose coordinate
//! `j` (1-based) is `+1` when bit `j-1` of `t` is clear and `-1` when it is set.
//! With this encoding `w_J(theta_t) = (-1)^{popcount(J & t)}`.


use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// Largest supported cube dimension.
pub const MAX_DIM: usize = 24;

pub(crate) fn check_dim(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::out_of_range("dimension p", p, "1..=24"));
    }
    if p > MAX_DIM {
        return Err(Error::ScaleLimit(format!("p = {p} exceeds the maximum of {MAX_DIM}")));
    }
    Ok(())
}

pub(crate) fn check_degree(p: usize, d: usize) -> Result<()> {
    if d > p {
        return Err(Error::out_of_range("degree bound d", d, format!("0..={p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubePoint {
    index: usize,
    p: usize,
}

impl CubePoint {
    pub fn new(p: usize, index: usize) -> Result<Self> {
        check_dim(p)?;
        if index >= 1 << p {
            return Err(Error::out_of_range("cube point index", index, format!("0..{}", 1usize << p)));
        }
        Ok(Self { index, p })
    }

    /// Point with the given `±1` coordinates, listed from coordinate 1.
    pub fn from_coords(coords: &[i8]) -> Result<Self> {
        let mut index = 0;
        for (j, &c) in coords.iter().enumerate() {
            match c {
                1 => {}
                -1 => index |= 1 << j,
                other => return Err(Error::InvalidInput(format!("coordinate {other} is not ±1"))),
            }
        }
        Self::new(coords.len(), index)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Coordinate `j` (1-based).
    pub fn coord(&self, j: usize) -> i8 {
        debug_assert!((1..=self.p).contains(&j));
        if self.index >> (j - 1) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn coords(&self) -> Vec<i8> {
        (1..=self.p).map(|j| self.coord(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    mask: usize,
    p: usize,
}

impl SubsetMask {
    pub fn new(p: usize, mask: usize) -> Result<Self> {
        check_dim(p)?;
        if mask >= 1 << p {
            return Err(Error::out_of_range("subset mask", mask, format!("0..{}", 1usize << p)));
        }
        Ok(Self { mask, p })
    }

    /// Subset from 1-based coordinate indices.
    pub fn from_coords(p: usize, coords: &[usize]) -> Result<Self> {
        let mut mask = 0;
        for &j in coords {
            if j == 0 || j > p {
                return Err(Error::out_of_range("coordinate index", j, format!("1..={p}")));
            }
            mask |= 1 << (j - 1);
        }
        Self::new(p, mask)
    }

    pub fn full(p: usize) -> Result<Self> {
        check_dim(p)?;
        Self::new(p, (1 << p) - 1)
    }

    pub fn mask(&self) -> usize {
        self.mask
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.mask.count_ones() as usize
    }
}

/// `w_J(theta_t)` on raw bit patterns.
#[inline]
pub fn walsh_sign(mask: usize, index: usize) -> i8 {
    if (mask & index).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

pub fn walsh_eval(j: SubsetMask, t: CubePoint) -> Result<i8> {
    if j.p != t.p {
        return Err(Error::DimensionMismatch {
            expected: j.p,
            found: t.p,
        });
    }
    Ok(walsh_sign(j.mask, t.index))
}

/// Masks of degree at most `d`, in increasing mask order.
pub fn low_degree_masks(p: usize, d: usize) -> Vec<usize> {
    (0..1usize << p).filter(|m| m.count_ones() as usize <= d).collect()
}

/// Masks of degree strictly greater than `d`, in increasing mask order.
pub fn high_degree_masks(p: usize, d: usize) -> Vec<usize> {
    (0..1usize << p).filter(|m| m.count_ones() as usize > d).collect()
}

/// `sum_{i <= d} C(p, i)` as a machine integer (valid for `p <= 24`).
pub fn binomial_prefix_sum(p: usize, d: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for i in 0..=d.min(p) {
        total += c;
        c = c * (p - i) / (i + 1);
    }
    total
}

/// A real-valued function on the cube, stored as `2^p` values in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable<S> {
    p: usize,
    values: Vec<S>,
}

impl<S: Scalar> FunctionTable<S> {
    pub fn new(p: usize, values: Vec<S>) -> Result<Self> {
        check_dim(p)?;
        if values.len() != 1 << p {
            return Err(Error::DimensionMismatch {
                expected: 1 << p,
                found: values.len(),
            });
        }
        Ok(Self { p, values })
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(usize) -> S) -> Result<Self> {
        check_dim(p)?;
        Ok(Self {
            p,
            values: (0..1usize << p).map(&mut f).collect(),
        })
    }

    pub fn constant(p: usize, c: S) -> Result<Self> {
        Self::from_fn(p, |_| c.clone())
    }

    pub fn from_signs(p: usize, signs: &[i8]) -> Result<Self> {
        if signs.len() != 1 << p {
            return Err(Error::DimensionMismatch {
                expected: 1 << p,
                found: signs.len(),
            });
        }
        if let Some(i) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::NotSignTable {
                index: i,
                value: signs[i].to_string(),
            });
        }
        Self::from_fn(p, |t| S::from_sign(signs[t]))
    }

    /// Sign table from a bit pattern: bit `t` set means `f(theta_t) = -1`.
    pub fn from_sign_bits(p: usize, bits: u64) -> Result<Self> {
        if p > 6 {
            return Err(Error::ScaleLimit(format!("a u64 bit pattern holds at most p = 6, got {p}")));
        }
        Self::from_fn(p, |t| S::from_sign(if bits >> t & 1 == 1 { -1 } else { 1 }))
    }

    pub fn walsh(j: SubsetMask) -> Self {
        Self {
            p: j.p,
            values: (0..1usize << j.p).map(|t| S::from_sign(walsh_sign(j.mask, t))).collect(),
        }
    }

    /// Indicator of a single point.
    pub fn point_mass(t: CubePoint) -> Self {
        Self {
            p: t.p,
            values: (0..1usize << t.p)
                .map(|i| if i == t.index { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> Mode {
        S::MODE
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, t: usize) -> &S {
        &self.values[t]
    }

    /// Values as signs when every entry is exactly `±1`.
    pub fn signs(&self) -> Option<Vec<i8>> {
        let one = S::one();
        let minus = -S::one();
        self.values
            .iter()
            .map(|v| {
                if *v == one {
                    Some(1)
                } else if *v == minus {
                    Some(-1)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn is_sign_table(&self) -> bool {
        self.signs().is_some()
    }

    pub fn require_signs(&self) -> Result<Vec<i8>> {
        self.signs().ok_or_else(|| {
            let one = S::one();
            let i = self
                .values
                .iter()
                .position(|v| v.abs() != one)
                .unwrap_or_default();
            Error::NotSignTable {
                index: i,
                value: self.values[i].to_string(),
            }
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FunctionTable<T> {
        FunctionTable {
            p: self.p,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> FunctionTable<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn scaled(&self, c: &S) -> Self {
        Self {
            p: self.p,
            values: self.values.iter().map(|v| v.clone() * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            p: self.p,
            values: self.values.iter().map(|v| -v.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        same_dim(self.p, other.p)?;
        Ok(Self {
            p: self.p,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn max_abs(&self) -> S {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |m, v| if v > m { v } else { m })
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Walsh coefficients `<f, w_J>` indexed by subset mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpectrum<S> {
    p: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> FrequencySpectrum<S> {
    pub fn new(p: usize, coeffs: Vec<S>) -> Result<Self> {
        check_dim(p)?;
        if coeffs.len() != 1 << p {
            return Err(Error::DimensionMismatch {
                expected: 1 << p,
                found: coeffs.len(),
            });
        }
        Ok(Self { p, coeffs })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> &S {
        &self.coeffs[mask]
    }

    pub fn sum_of_squares(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |acc, c| acc + c.clone() * c)
    }

    /// Largest `|<f, w_J>|` over `degree(J) <= d`.
    pub fn max_low_degree(&self, d: usize) -> S {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| m.count_ones() as usize <= d)
            .map(|(_, c)| c.abs())
            .fold(S::zero(), |m, v| if v > m { v } else { m })
    }
}

/// `2^{-p} sum_theta f(theta) g(theta)`.
pub fn inner_product<S: Scalar>(f: &FunctionTable<S>, g: &FunctionTable<S>) -> Result<S> {
    same_dim(f.p, g.p)?;
    let sum = f
        .values
        .iter()
        .zip(&g.values)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b);
    Ok(sum * S::pow2_recip(f.p))
}

/// In-place unnormalized butterfly: `v[J] <- sum_t v[t] w_J(t)`.
fn butterfly<S: Scalar>(v: &mut [S]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = v[i].clone();
                let b = std::mem::replace(&mut v[i + h], S::zero());
                v[i + h] = a.clone() - &b;
                v[i] = a + b;
            }
        }
        h *= 2;
    }
}

/// All Walsh coefficients in `O(p 2^p)`.
pub fn wht_full<S: Scalar>(f: &FunctionTable<S>) -> FrequencySpectrum<S> {
    let mut v = f.values.clone();
    butterfly(&mut v);
    let scale = S::pow2_recip(f.p);
    for c in &mut v {
        *c *= &scale;
    }
    FrequencySpectrum { p: f.p, coeffs: v }
}

/// Inverse of [`wht_full`]: `f = sum_J <f, w_J> w_J`.
pub fn inverse_wht<S: Scalar>(spec: &FrequencySpectrum<S>) -> FunctionTable<S> {
    let mut v = spec.coeffs.clone();
    butterfly(&mut v);
    FunctionTable { p: spec.p, values: v }
}

/// Orthogonal projection onto `H = { h : <h, w_J> = 0 for degree(J) <= d }`.
pub fn project_h<S: Scalar>(f: &FunctionTable<S>, d: usize) -> Result<FunctionTable<S>> {
    check_degree(f.p, d)?;
    let mut spec = wht_full(f);
    for (mask, c) in spec.coeffs.iter_mut().enumerate() {
        if mask.count_ones() as usize <= d {
            *c = S::zero();
        }
    }
    Ok(inverse_wht(&spec))
}

fn check_conditioning(p: usize, coords: &[usize], taus: &[i8]) -> Result<usize> {
    if coords.len() != taus.len() {
        return Err(Error::DimensionMismatch {
            expected: coords.len(),
            found: taus.len(),
        });
    }
    let mut seen = 0usize;
    for &j in coords {
        if j == 0 || j > p {
            return Err(Error::out_of_range("coordinate index", j, format!("1..={p}")));
        }
        let bit = 1 << (j - 1);
        if seen & bit != 0 {
            return Err(Error::InvalidInput(format!("coordinate {j} repeated")));
        }
        seen |= bit;
    }
    if let Some(&t) = taus.iter().find(|&&t| t != 1 && t != -1) {
        return Err(Error::InvalidInput(format!("conditioning value {t} is not ±1")));
    }
    Ok(seen)
}

/// `2^{-p} sum_{theta : theta_{i_l} = tau_l} f(theta)` for 1-based coordinates.
pub fn marginal<S: Scalar>(f: &FunctionTable<S>, coords: &[usize], taus: &[i8]) -> Result<S> {
    let fixed = check_conditioning(f.p, coords, taus)?;
    let mut target = 0usize;
    for (&j, &tau) in coords.iter().zip(taus) {
        if tau < 0 {
            target |= 1 << (j - 1);
        }
    }
    let sum = f
        .values
        .iter()
        .enumerate()
        .filter(|(t, _)| t & fixed == target)
        .fold(S::zero(), |acc, (_, v)| acc + v);
    Ok(sum * S::pow2_recip(f.p))
}

/// The same marginal expanded over the coefficients of degree `<= |coords|`.
pub fn marginal_from_spectrum<S: Scalar>(spec: &FrequencySpectrum<S>, coords: &[usize], taus: &[i8]) -> Result<S> {
    let fixed = check_conditioning(spec.p, coords, taus)?;
    let mut negative = 0usize;
    for (&j, &tau) in coords.iter().zip(taus) {
        if tau < 0 {
            negative |= 1 << (j - 1);
        }
    }
    // Enumerate subsets L of the fixed coordinates.
    let mut sum = S::zero();
    let mut sub = fixed;
    loop {
        let c = spec.coeffs[sub].clone();
        if walsh_sign(sub, negative) < 0 {
            sum -= c;
        } else {
            sum += c;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & fixed;
    }
    Ok(sum * S::pow2_recip(coords.len()))
}

/// True iff `|<f - g, w_J>| <= tol` for every `degree(J) <= d`.
pub fn frequencies_equal<S: Scalar>(f: &FunctionTable<S>, g: &FunctionTable<S>, d: usize, tol: &S) -> Result<bool> {
    same_dim(f.p, g.p)?;
    check_degree(f.p, d)?;
    let diff = f.sub(g)?;
    let spec = wht_full(&diff);
    Ok(spec.max_low_degree(d) <= *tol)
}

/// Reference transform by direct summation, `O(4^p)`.
pub fn naive_wht<S: Scalar>(f: &FunctionTable<S>) -> FrequencySpectrum<S> {
    let n = f.len();
    let scale = S::pow2_recip(f.p);
    let coeffs = (0..n)
        .map(|j| {
            let mut acc = S::zero();
            for (t, v) in f.values.iter().enumerate() {
                if walsh_sign(j, t) < 0 {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
            acc * &scale
        })
        .collect();
    FrequencySpectrum { p: f.p, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn coordinate_rule() {
        let t = CubePoint::new(3, 0b101).unwrap();
        assert_eq!(t.coords(), vec![-1, 1, -1]);
        assert_eq!(CubePoint::from_coords(&[-1, 1, -1]).unwrap(), t);
    }

    #[test]
    fn walsh_eval_examples() {
        let p = 4;
        let empty = SubsetMask::new(p, 0).unwrap();
        for t in 0..16 {
            assert_eq!(walsh_eval(empty, CubePoint::new(p, t).unwrap()).unwrap(), 1);
        }
        let j1 = SubsetMask::from_coords(p, &[1]).unwrap();
        assert_eq!(walsh_eval(j1, CubePoint::new(p, 0).unwrap()).unwrap(), 1);
        let j12 = SubsetMask::from_coords(p, &[1, 2]).unwrap();
        assert_eq!(walsh_eval(j12, CubePoint::new(p, 3).unwrap()).unwrap(), 1);
        assert_eq!(walsh_eval(j12, CubePoint::new(p, 1).unwrap()).unwrap(), -1);
    }

    #[test]
    fn walsh_eval_rejects_mismatched_dimensions() {
        let j = SubsetMask::new(3, 1).unwrap();
        let t = CubePoint::new(4, 1).unwrap();
        assert!(matches!(walsh_eval(j, t), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn walsh_matches_coordinate_product() {
        let p = 5;
        for mask in 0..32 {
            for idx in 0..32 {
                let t = CubePoint::new(p, idx).unwrap();
                let prod: i8 = (1..=p).filter(|j| mask >> (j - 1) & 1 == 1).map(|j| t.coord(j)).product();
                assert_eq!(walsh_sign(mask, idx), prod);
            }
        }
    }

    #[test]
    fn dimension_limits() {
        assert!(CubePoint::new(0, 0).is_err());
        assert!(matches!(CubePoint::new(25, 0), Err(Error::ScaleLimit(_))));
        assert!(CubePoint::new(3, 8).is_err());
        assert!(SubsetMask::from_coords(3, &[4]).is_err());
        assert!(FunctionTable::<f64>::new(3, vec![0.0; 7]).is_err());
    }

    #[test]
    fn inner_product_of_constants() {
        let one = FunctionTable::constant(4, Rational::one()).unwrap();
        assert_eq!(inner_product(&one, &one).unwrap(), Rational::one());
    }

    #[test]
    fn transform_of_walsh_function_is_delta() {
        let j = SubsetMask::new(4, 0b1010).unwrap();
        let spec = wht_full(&FunctionTable::<Rational>::walsh(j));
        for (m, c) in spec.coeffs().iter().enumerate() {
            assert_eq!(*c, if m == 0b1010 { Rational::one() } else { Rational::zero() });
        }
    }

    #[test]
    fn transform_of_point_mass() {
        let t0 = CubePoint::new(3, 6).unwrap();
        let spec = wht_full(&FunctionTable::<Rational>::point_mass(t0));
        for (m, c) in spec.coeffs().iter().enumerate() {
            assert_eq!(*c, q(walsh_sign(m, 6) as i64, 8));
        }
    }

    #[test]
    fn transform_matches_naive_at_p3() {
        let signs = [1, -1, -1, 1, 1, 1, -1, 1];
        let f = FunctionTable::<Rational>::from_signs(3, &signs).unwrap();
        assert_eq!(wht_full(&f), naive_wht(&f));
        assert_eq!(inverse_wht(&wht_full(&f)), f);
    }

    #[test]
    fn projection_examples() {
        let p = 4;
        let low = FunctionTable::<Rational>::walsh(SubsetMask::new(p, 0b0011).unwrap());
        let out = project_h(&low, 2).unwrap();
        assert!(out.values().iter().all(|v| v.is_zero()));
        let high = FunctionTable::<Rational>::walsh(SubsetMask::new(p, 0b0111).unwrap());
        assert_eq!(project_h(&high, 2).unwrap(), high);
        assert!(project_h(&high, 5).is_err());
    }

    #[test]
    fn projected_point_mass_matches_direct_formula() {
        let p = 4;
        let d = 1;
        let t0 = 9;
        let out = project_h(&FunctionTable::<Rational>::point_mass(CubePoint::new(p, t0).unwrap()), d).unwrap();
        // 2^{-p} sum_{deg J > d} w_J(t0) w_J(t), summed directly.
        for t in 0..16 {
            let mut acc = 0i64;
            for m in high_degree_masks(p, d) {
                acc += (walsh_sign(m, t0) * walsh_sign(m, t)) as i64;
            }
            assert_eq!(out.values()[t], q(acc, 16));
        }
        for m in low_degree_masks(p, d) {
            let w = FunctionTable::walsh(SubsetMask::new(p, m).unwrap());
            assert!(inner_product(&out, &w).unwrap().is_zero());
        }
    }

    #[test]
    fn marginal_examples() {
        let one = FunctionTable::constant(5, Rational::one()).unwrap();
        assert_eq!(marginal(&one, &[1], &[1]).unwrap(), q(1, 2));
        let r1 = FunctionTable::<Rational>::walsh(SubsetMask::from_coords(5, &[1]).unwrap());
        assert_eq!(marginal(&r1, &[1], &[1]).unwrap(), q(1, 2));
        assert!(marginal(&r1, &[1, 1], &[1, 1]).is_err());
        assert!(marginal(&r1, &[6], &[1]).is_err());
        assert!(marginal(&r1, &[1], &[0]).is_err());
    }

    #[test]
    fn marginal_from_spectrum_examples() {
        let p = 5;
        let w12 = FunctionTable::<Rational>::walsh(SubsetMask::from_coords(p, &[1, 2]).unwrap());
        let spec = wht_full(&w12);
        // Direct count: theta_1 = 1, theta_2 = -1 gives w_{12} = -1 on 8 of 32 points.
        assert_eq!(marginal(&w12, &[1, 2], &[1, -1]).unwrap(), q(-1, 4));
        assert_eq!(marginal_from_spectrum(&spec, &[1, 2], &[1, -1]).unwrap(), q(-1, 4));
        let f = FunctionTable::<Rational>::from_fn(p, |t| q((t * 7 % 5) as i64, 3)).unwrap();
        let spec = wht_full(&f);
        assert_eq!(marginal_from_spectrum(&spec, &[], &[]).unwrap(), spec.coeff(0).clone());
    }

    #[test]
    fn frequencies_equal_examples() {
        let plus = FunctionTable::constant(3, Rational::one()).unwrap();
        let minus = plus.neg();
        let zero = Rational::zero();
        assert!(frequencies_equal(&plus, &plus, 3, &zero).unwrap());
        assert!(!frequencies_equal(&plus, &minus, 0, &zero).unwrap());
        let f = FunctionTable::<Rational>::from_signs(3, &[1, 1, -1, 1, -1, -1, 1, 1]).unwrap();
        let h = project_h(&f, 1).unwrap();
        let g = f.sub(&h.scaled(&q(3, 7))).unwrap();
        assert!(frequencies_equal(&f, &g, 1, &zero).unwrap());
    }

    #[test]
    fn binomial_prefix_sums() {
        assert_eq!(binomial_prefix_sum(10, 2), 56);
        assert_eq!(binomial_prefix_sum(12, 1), 13);
        assert_eq!(binomial_prefix_sum(8, 3), 93);
        assert_eq!(binomial_prefix_sum(4, 4), 16);
        assert_eq!(low_degree_masks(8, 3).len(), 93);
    }
}
