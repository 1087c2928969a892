//! Central hyperplane arrangements `{x_1^perp, ..., x_N^perp}` and the
//! cube-specific arrangement of projected point evaluations in `H`.
//!
//! All decisions here are discrete (ranks, region counts), so callers use
//! exact scalars; the code is generic only so that the same routines can be
//! exercised on floats in experiments.

use std::collections::HashSet;

use log::warn;

use crate::cube::{check_degree, high_degree_masks, low_degree_masks, walsh_sign, CubePoint, FunctionTable};
use crate::error::{Error, Result};
use crate::linalg::{nullspace, RowEchelon};
use crate::lp::solve_geq_one;
use crate::scalar::Scalar;
use crate::witness::find_sign_witness;

/// Desk-scale limits for user-supplied arrangements.
pub const MAX_NORMALS: usize = 20;
pub const MAX_AMBIENT: usize = 8;
/// Largest cube dimension for exact projected evaluations.
pub const MAX_PROJECTED_DIM: usize = 12;
/// Largest cube dimension for exhaustive sign-pattern counting.
pub const MAX_PATTERN_DIM: usize = 4;
/// Cubes up to this size decide complement resilience in the full `H` coordinates.
const DIRECT_RESILIENCE_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement<S> {
    m: usize,
    normals: Vec<Vec<S>>,
}

impl<S: Scalar> Arrangement<S> {
    pub fn new(m: usize, normals: Vec<Vec<S>>) -> Result<Self> {
        for (i, v) in normals.iter().enumerate() {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.len(),
                });
            }
            if v.iter().all(|x| x.is_zero()) {
                return Err(Error::InvalidInput(format!("normal {i} is the zero vector")));
            }
        }
        Ok(Self { m, normals })
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[Vec<S>] {
        &self.normals
    }

    fn check_desk_scale(&self) -> Result<()> {
        if self.len() > MAX_NORMALS {
            return Err(Error::ScaleLimit(format!(
                "{} hyperplanes exceed the limit of {MAX_NORMALS}",
                self.len()
            )));
        }
        if self.m > MAX_AMBIENT {
            return Err(Error::ScaleLimit(format!(
                "ambient dimension {} exceeds the limit of {MAX_AMBIENT}",
                self.m
            )));
        }
        Ok(())
    }

    fn echelon_of(&self, subset: u64) -> RowEchelon<S> {
        let mut e = RowEchelon::empty(self.m);
        for (i, v) in self.normals.iter().enumerate() {
            if subset >> i & 1 == 1 {
                e.insert(v);
            }
        }
        e
    }

    /// For each normal, the first earlier normal it is a multiple of and the
    /// sign of the multiplier.
    fn parallel_classes(&self) -> Vec<Option<(usize, i8)>> {
        let mut out: Vec<Option<(usize, i8)>> = Vec::with_capacity(self.len());
        let mut duplicates = 0;
        for i in 0..self.len() {
            let found = (0..i).find_map(|j| {
                if out[j].is_some() {
                    return None;
                }
                parallel_sign(&self.normals[i], &self.normals[j]).map(|s| (j, s))
            });
            if found.is_some() {
                duplicates += 1;
            }
            out.push(found);
        }
        if duplicates > 0 {
            warn!("{duplicates} normal(s) define a hyperplane already present; counted once");
        }
        out
    }
}

/// Sign of `c` when `a = c b` for some nonzero `c`.
fn parallel_sign<S: Scalar>(a: &[S], b: &[S]) -> Option<i8> {
    let k = b.iter().position(|x| !x.is_zero())?;
    if a[k].is_zero() {
        return None;
    }
    let c = a[k].clone() / &b[k];
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.clone() - c.clone() * y).is_negligible())
        .then(|| if c.is_negative() { -1 } else { 1 })
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y)
}

fn sign_of<S: Scalar>(v: &S) -> i8 {
    if v.is_positive_strict() {
        1
    } else if v.is_negative_strict() {
        -1
    } else {
        0
    }
}

struct RegionSearch<'a, S> {
    arr: &'a Arrangement<S>,
    parallel: Vec<Option<(usize, i8)>>,
    regions: Vec<Vec<i8>>,
}

impl<S: Scalar> RegionSearch<'_, S> {
    fn feasible(&self, prefix: &[i8]) -> Option<Vec<S>> {
        let rows: Vec<Vec<S>> = prefix
            .iter()
            .enumerate()
            .filter(|(i, _)| self.parallel[*i].is_none())
            .map(|(i, &s)| {
                let v = &self.arr.normals[i];
                if s < 0 {
                    v.iter().map(|x| -x.clone()).collect()
                } else {
                    v.clone()
                }
            })
            .collect();
        if rows.is_empty() {
            return Some(vec![S::zero(); self.arr.m]);
        }
        solve_geq_one(&rows)
    }

    /// `x` strictly satisfies every sign in `prefix`.
    fn extend(&mut self, prefix: &mut Vec<i8>, x: &[S]) {
        let i = prefix.len();
        if i == self.arr.len() {
            self.regions.push(prefix.clone());
            return;
        }
        if let Some((j, s)) = self.parallel[i] {
            prefix.push(s * prefix[j]);
            self.extend(prefix, x);
            prefix.pop();
            return;
        }
        let here = sign_of(&dot(&self.arr.normals[i], x));
        for s in [1i8, -1] {
            prefix.push(s);
            if s == here {
                self.extend(prefix, x);
            } else if let Some(y) = self.feasible(prefix) {
                self.extend(prefix, &y);
            }
            prefix.pop();
        }
    }
}

/// Sign vectors of all regions, hyperplanes processed in input order.
pub fn enumerate_regions<S: Scalar>(arr: &Arrangement<S>) -> Vec<Vec<i8>> {
    let mut search = RegionSearch {
        arr,
        parallel: arr.parallel_classes(),
        regions: Vec::new(),
    };
    let origin = vec![S::zero(); arr.m];
    search.extend(&mut Vec::with_capacity(arr.len()), &origin);
    search.regions
}

pub fn count_regions<S: Scalar>(arr: &Arrangement<S>) -> Result<u64> {
    arr.check_desk_scale()?;
    Ok(enumerate_regions(arr).len() as u64)
}

/// Closed index sets (flats), each identifying one intersection subspace.
pub fn intersection_flats<S: Scalar>(arr: &Arrangement<S>) -> Vec<u64> {
    let closure = |e: &RowEchelon<S>| -> u64 {
        arr.normals
            .iter()
            .enumerate()
            .filter(|(_, v)| e.contains(v))
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    };
    let empty = RowEchelon::empty(arr.m);
    let mut seen: HashSet<u64> = HashSet::new();
    let start = closure(&empty);
    seen.insert(start);
    let mut frontier = vec![(start, empty)];
    while let Some((flat, echelon)) = frontier.pop() {
        for (i, v) in arr.normals.iter().enumerate() {
            if flat >> i & 1 == 1 {
                continue;
            }
            let mut next = echelon.clone();
            next.insert(v);
            let key = closure(&next);
            if seen.insert(key) {
                frontier.push((key, next));
            }
        }
    }
    let mut flats: Vec<u64> = seen.into_iter().collect();
    flats.sort_unstable();
    flats
}

/// Number of distinct subspaces `cap_{i in I} x_i^perp`, including the whole
/// space (empty `I`).
pub fn count_intersection_subspaces<S: Scalar>(arr: &Arrangement<S>) -> Result<u64> {
    if arr.len() > MAX_NORMALS {
        return Err(Error::ScaleLimit(format!(
            "{} hyperplanes exceed the limit of {MAX_NORMALS}",
            arr.len()
        )));
    }
    Ok(intersection_flats(arr).len() as u64)
}

fn subset_mask(n: usize, subset: &[usize]) -> Result<u64> {
    let mut mask = 0u64;
    for &i in subset {
        if i >= n {
            return Err(Error::out_of_range("hyperplane index", i, format!("0..{n}")));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// True iff the span of `{x_i}_{i in I}` contains no `x_j` with `j` outside `I`.
pub fn is_resilient<S: Scalar>(arr: &Arrangement<S>, subset: &[usize]) -> Result<bool> {
    if arr.len() > 64 {
        return Err(Error::ScaleLimit(format!("{} hyperplanes exceed 64", arr.len())));
    }
    let mask = subset_mask(arr.len(), subset)?;
    Ok(resilient_mask(arr, mask))
}

fn resilient_mask<S: Scalar>(arr: &Arrangement<S>, mask: u64) -> bool {
    let e = arr.echelon_of(mask);
    outside_avoids_span(arr, mask, &e)
}

fn outside_avoids_span<S: Scalar>(arr: &Arrangement<S>, mask: u64, e: &RowEchelon<S>) -> bool {
    arr.normals
        .iter()
        .enumerate()
        .all(|(i, v)| mask >> i & 1 == 1 || !e.contains(v))
}

/// Counts resilient subsets by walking every subset in index order.
///
/// Subtrees whose span is already the whole space are skipped: none of their
/// members is resilient except the full index set, which is counted once.
pub fn count_resilient_subsets<S: Scalar>(arr: &Arrangement<S>) -> Result<u64> {
    if arr.len() > MAX_NORMALS {
        return Err(Error::ScaleLimit(format!(
            "{} hyperplanes exceed the limit of {MAX_NORMALS}",
            arr.len()
        )));
    }
    let n = arr.len();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut count = 0u64;
    let mut full_counted = false;
    // (mask, echelon, next index to consider)
    let mut stack = vec![(0u64, RowEchelon::empty(arr.m), 0usize)];
    while let Some((mask, e, next)) = stack.pop() {
        if e.rank() == arr.m && mask != full {
            continue;
        }
        if mask == full {
            full_counted = true;
        }
        if outside_avoids_span(arr, mask, &e) {
            count += 1;
        }
        for i in next..n {
            let mut child = e.clone();
            child.insert(&arr.normals[i]);
            stack.push((mask | 1 << i, child, i + 1));
        }
    }
    if !full_counted {
        count += 1;
    }
    Ok(count)
}

/// `sum_{i <= m} C(N, i)`, the maximum number of regions of `N` hyperplanes
/// in `m`-space.
pub fn buck_bound(n: usize, m: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for i in 0..=m.min(n) {
        total += c;
        c = c * (n - i) as u64 / (i + 1) as u64;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ChainCounts {
    pub regions: u64,
    pub intersection_subspaces: u64,
    pub resilient_subsets: u64,
    pub buck_bound: u64,
}

impl ChainCounts {
    /// `regions >= subspaces >= resilient` and `regions <= buck bound`.
    pub fn chain_holds(&self) -> bool {
        self.regions >= self.intersection_subspaces
            && self.intersection_subspaces >= self.resilient_subsets
            && self.regions <= self.buck_bound
    }
}

pub fn chain_counts<S: Scalar>(arr: &Arrangement<S>) -> Result<ChainCounts> {
    let regions = count_regions(arr)?;
    let distinct = arr.parallel_classes().iter().filter(|c| c.is_none()).count();
    Ok(ChainCounts {
        regions,
        intersection_subspaces: count_intersection_subspaces(arr)?,
        resilient_subsets: count_resilient_subsets(arr)?,
        buck_bound: buck_bound(distinct, arr.m),
    })
}

fn check_points(p: usize, points: &[usize]) -> Result<()> {
    for &t in points {
        CubePoint::new(p, t)?;
    }
    Ok(())
}

/// Coordinates of `P_H e_theta` in the Walsh basis of `H`: entries
/// `2^{-p} w_J(theta)` for `degree(J) > d`, ordered by mask.
pub fn projected_evaluations<S: Scalar>(p: usize, d: usize, points: &[usize]) -> Result<Arrangement<S>> {
    if p > MAX_PROJECTED_DIM {
        return Err(Error::ScaleLimit(format!(
            "projected evaluations need p <= {MAX_PROJECTED_DIM}, got {p}"
        )));
    }
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    check_points(p, points)?;
    if d == p {
        return Err(Error::InvalidInput("d = p leaves H = {0}; every projection vanishes".into()));
    }
    let masks = high_degree_masks(p, d);
    let scale = S::pow2_recip(p);
    let normals = points
        .iter()
        .map(|&t| {
            masks
                .iter()
                .map(|&m| if walsh_sign(m, t) < 0 { -scale.clone() } else { scale.clone() })
                .collect()
        })
        .collect();
    Arrangement::new(masks.len(), normals)
}

/// Low-degree Walsh vector `w(theta) = (w_J(theta))_{degree(J) <= d}` as scalars.
fn w_row<S: Scalar>(masks: &[usize], t: usize) -> Vec<S> {
    masks.iter().map(|&m| S::from_sign(walsh_sign(m, t))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceCertificate<S> {
    pub theta0: CubePoint,
    pub b: Vec<S>,
}

impl<S: Scalar> NullspaceCertificate<S> {
    /// `b != 0` and `<w(theta), b> = 0` for every `theta` in `points` other than `theta0`.
    pub fn holds(&self, d: usize, points: &[usize]) -> bool {
        let p = self.theta0.dim();
        let masks = low_degree_masks(p, d);
        self.b.len() == masks.len()
            && self.b.iter().any(|x| !x.is_zero())
            && points
                .iter()
                .filter(|&&t| t != self.theta0.index())
                .all(|&t| dot(&w_row::<S>(&masks, t), &self.b).is_negligible())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResilienceReport<S> {
    pub resilient: bool,
    pub certificate: Option<NullspaceCertificate<S>>,
}

fn validate_theta(p: usize, d: usize, points: &[usize]) -> Result<Vec<bool>> {
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    if points.is_empty() {
        return Err(Error::InvalidInput("the point set must be nonempty".into()));
    }
    let mut members = vec![false; 1 << p];
    for &t in points {
        CubePoint::new(p, t)?;
        if std::mem::replace(&mut members[t], true) {
            return Err(Error::InvalidInput(format!("point {t} listed twice")));
        }
    }
    Ok(members)
}

/// Resilience of the complement of `points` for `{P_H e_theta}` decided in
/// the coordinates of `H`.
pub fn complement_resilient_direct<S: Scalar>(p: usize, d: usize, points: &[usize]) -> Result<bool> {
    let members = validate_theta(p, d, points)?;
    if d == p {
        // Every projection is zero and lies in any span.
        return Ok(false);
    }
    let all: Vec<usize> = (0..1 << p).collect();
    let arr = projected_evaluations::<S>(p, d, &all)?;
    let mut e = RowEchelon::empty(arr.ambient_dim());
    for (t, v) in arr.normals().iter().enumerate() {
        if !members[t] {
            e.insert(v);
        }
    }
    Ok(points.iter().all(|&t| !e.contains(&arr.normals()[t])))
}

/// The same decision on the `|Theta| x k` matrix of low-degree Walsh vectors:
/// `P_H e_theta0` lies in the span of `{P_H e_theta}_{theta not in Theta}`
/// iff the restriction of `e_theta0` to `Theta` lies in the column space of
/// `(w_J(theta))_{theta in Theta, degree(J) <= d}`.
pub fn complement_resilient_reduced<S: Scalar>(p: usize, d: usize, points: &[usize]) -> Result<bool> {
    validate_theta(p, d, points)?;
    let masks = low_degree_masks(p, d);
    let columns: Vec<Vec<S>> = masks
        .iter()
        .map(|&m| points.iter().map(|&t| S::from_sign(walsh_sign(m, t))).collect())
        .collect();
    let e = RowEchelon::from_rows(points.len(), columns.iter().map(Vec::as_slice));
    Ok((0..points.len()).all(|i| {
        let unit: Vec<S> = (0..points.len()).map(|j| if i == j { S::one() } else { S::zero() }).collect();
        !e.contains(&unit)
    }))
}

/// Searches `theta0` in `points` and `b != 0` with `<w(theta), b> = 0` on the
/// remaining points.
pub fn find_nullspace_certificate<S: Scalar>(p: usize, d: usize, points: &[usize]) -> Result<Option<NullspaceCertificate<S>>> {
    validate_theta(p, d, points)?;
    let masks = low_degree_masks(p, d);
    for &t0 in points {
        let rows: Vec<Vec<S>> = points.iter().filter(|&&t| t != t0).map(|&t| w_row(&masks, t)).collect();
        if let Some(b) = nullspace(&rows, masks.len()).into_iter().next() {
            return Ok(Some(NullspaceCertificate {
                theta0: CubePoint::new(p, t0)?,
                b,
            }));
        }
    }
    Ok(None)
}

/// Decides whether the complement of `points` is resilient and, when it is
/// not, produces the nullspace certificate that non-resilience guarantees.
pub fn complement_resilient<S: Scalar>(p: usize, d: usize, points: &[usize]) -> Result<ResilienceReport<S>> {
    let resilient = if (1usize << p) <= DIRECT_RESILIENCE_POINTS {
        complement_resilient_direct::<S>(p, d, points)?
    } else {
        complement_resilient_reduced::<S>(p, d, points)?
    };
    let certificate = if resilient {
        None
    } else {
        find_nullspace_certificate(p, d, points)?
    };
    Ok(ResilienceReport { resilient, certificate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SignPatternCount {
    /// Regions of the arrangement `{e_theta^perp cap H}` inside `H`.
    pub regions: u64,
    /// Sign tables for which the witness search succeeds.
    pub feasible_tables: u64,
}

impl SignPatternCount {
    pub fn agree(&self) -> bool {
        self.regions == self.feasible_tables
    }
}

/// Strict sign tables `sign h`, `h in H`, one per region, as `±1` vectors
/// indexed by cube point.
pub fn strict_sign_patterns<S: Scalar>(p: usize, d: usize) -> Result<Vec<Vec<i8>>> {
    CubePoint::new(p, 0)?;
    check_degree(p, d)?;
    if p > MAX_PATTERN_DIM {
        return Err(Error::ScaleLimit(format!(
            "sign pattern enumeration needs p <= {MAX_PATTERN_DIM}, got {p}"
        )));
    }
    if d == p {
        return Ok(Vec::new());
    }
    let all: Vec<usize> = (0..1 << p).collect();
    let arr = projected_evaluations::<S>(p, d, &all)?;
    Ok(enumerate_regions(&arr))
}

pub fn sign_pattern_count<S: Scalar>(p: usize, d: usize) -> Result<SignPatternCount> {
    let regions = strict_sign_patterns::<S>(p, d)?.len() as u64;
    let mut feasible = 0u64;
    for bits in 0..1u64 << (1 << p) {
        let f = FunctionTable::<S>::from_sign_bits(p, bits)?;
        if find_sign_witness(&f, d)?.is_some() {
            feasible += 1;
        }
    }
    Ok(SignPatternCount {
        regions,
        feasible_tables: feasible,
    })
}
