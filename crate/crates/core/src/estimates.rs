//! Interval multiset estimates over an ordinal scale.
//!
//! An estimate assigns `eta` elements to the levels `1..=l` of an ordinal
//! scale (level 1 is best) and is stored in position form: the count of
//! elements sitting at each level. Estimates whose occupied levels form a
//! contiguous range are *interval* estimates; the set of all interval
//! estimates for a given `(l, eta)` is the assessment scale `P{l},{eta}`.
//!
//! Ordering and proximity are both computed on the cumulative profile
//! `c[k] = counts[0] + .. + counts[k]` for `k < l - 1`. One element moving
//! one level up raises exactly one profile entry by one, so the minimal
//! number of one-level moves between two estimates is the L1 distance of
//! their profiles, and `a` dominates `b` exactly when `a`'s profile is
//! component-wise at least `b`'s.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("invalid scale: levels and cardinality must both be at least 1 (got l={levels}, eta={cardinality})")]
    InvalidScale { levels: usize, cardinality: usize },
    #[error("estimate has {found} levels, scale expects {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("estimate counts sum to {found}, scale cardinality is {expected}")]
    CardinalityMismatch { expected: usize, found: usize },
    #[error("estimates are on different scales ({left} vs {right})")]
    ScaleMismatch { left: Scale, right: Scale },
    #[error("operation needs at least one estimate")]
    EmptyInput,
    #[error("multiset coefficient for l={levels}, eta={cardinality} does not fit in 64 bits")]
    Overflow { levels: usize, cardinality: usize },
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

impl EstimateError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidScale { .. } => "InvalidScale",
            Self::WrongLength { .. } => "WrongLength",
            Self::CardinalityMismatch { .. } => "CardinalityMismatch",
            Self::ScaleMismatch { .. } => "ScaleMismatch",
            Self::EmptyInput => "EmptyInput",
            Self::Overflow { .. } => "Overflow",
            Self::Parse { .. } => "Parse",
        }
    }

    fn parse(input: &str, reason: impl Into<String>) -> Self {
        Self::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// An assessment scale: `levels` ordinal levels, estimates of `cardinality`
/// elements. Serialized as `{"l": .., "eta": ..}`, displayed as `P4,3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ScaleDoc", into = "ScaleDoc")]
pub struct Scale {
    levels: usize,
    cardinality: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleDoc {
    l: usize,
    eta: usize,
}

impl TryFrom<ScaleDoc> for Scale {
    type Error = EstimateError;

    fn try_from(doc: ScaleDoc) -> Result<Self, Self::Error> {
        Scale::new(doc.l, doc.eta)
    }
}

impl From<Scale> for ScaleDoc {
    fn from(scale: Scale) -> Self {
        ScaleDoc {
            l: scale.levels,
            eta: scale.cardinality,
        }
    }
}

impl Scale {
    pub fn new(levels: usize, cardinality: usize) -> Result<Self, EstimateError> {
        if levels == 0 || cardinality == 0 {
            return Err(EstimateError::InvalidScale { levels, cardinality });
        }
        Ok(Self { levels, cardinality })
    }

    /// Number of ordinal levels `l`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of elements `eta` in every estimate on this scale.
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// The best estimate `(eta, 0, .., 0)`.
    pub fn ideal(&self) -> MultisetEstimate {
        let mut counts = vec![0; self.levels];
        counts[0] = self.cardinality as u32;
        MultisetEstimate::with_scale(*self, counts)
    }

    /// The worst estimate `(0, .., 0, eta)`.
    pub fn worst(&self) -> MultisetEstimate {
        let mut counts = vec![0; self.levels];
        counts[self.levels - 1] = self.cardinality as u32;
        MultisetEstimate::with_scale(*self, counts)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{},{}", self.levels, self.cardinality)
    }
}

impl FromStr for Scale {
    type Err = EstimateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .trim()
            .strip_prefix('P')
            .ok_or_else(|| EstimateError::parse(s, "scale must start with 'P'"))?;
        let (l, eta) = body
            .split_once(',')
            .ok_or_else(|| EstimateError::parse(s, "expected P<l>,<eta>"))?;
        let l = l
            .trim()
            .parse()
            .map_err(|_| EstimateError::parse(s, "level count is not an integer"))?;
        let eta = eta
            .trim()
            .parse()
            .map_err(|_| EstimateError::parse(s, "cardinality is not an integer"))?;
        Scale::new(l, eta)
    }
}

/// Running sums of an estimate's counts over the first `l - 1` levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CumulativeProfile(Vec<u32>);

impl CumulativeProfile {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// L1 distance between two profiles of equal length.
    pub fn distance(&self, other: &CumulativeProfile) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| u64::from(a.abs_diff(b)))
            .sum()
    }

    /// `true` if every entry is at least the matching entry of `other`.
    pub fn covers(&self, other: &CumulativeProfile) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

/// A multiset estimate in position form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultisetEstimate {
    scale: Scale,
    counts: Vec<u32>,
}

impl TryFrom<Vec<u32>> for MultisetEstimate {
    type Error = EstimateError;

    fn try_from(counts: Vec<u32>) -> Result<Self, Self::Error> {
        MultisetEstimate::from_counts(counts)
    }
}

impl From<MultisetEstimate> for Vec<u32> {
    fn from(e: MultisetEstimate) -> Self {
        e.counts
    }
}

/// Builds an estimate on `scale`, checking length and cardinality.
/// Non-contiguous support is accepted; see [`MultisetEstimate::is_interval`].
pub fn make_estimate(scale: Scale, counts: &[u32]) -> Result<MultisetEstimate, EstimateError> {
    MultisetEstimate::new(scale, counts.to_vec())
}

impl MultisetEstimate {
    pub fn new(scale: Scale, counts: Vec<u32>) -> Result<Self, EstimateError> {
        if counts.len() != scale.levels {
            return Err(EstimateError::WrongLength {
                expected: scale.levels,
                found: counts.len(),
            });
        }
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total != scale.cardinality {
            return Err(EstimateError::CardinalityMismatch {
                expected: scale.cardinality,
                found: total,
            });
        }
        Ok(Self { scale, counts })
    }

    /// Builds an estimate whose scale is inferred from the counts: `l` is the
    /// vector length and `eta` the sum.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self, EstimateError> {
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        let scale = Scale::new(counts.len(), total)?;
        Ok(Self { scale, counts })
    }

    fn with_scale(scale: Scale, counts: Vec<u32>) -> Self {
        debug_assert_eq!(counts.len(), scale.levels);
        Self { scale, counts }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Whether the occupied levels form one contiguous range.
    pub fn is_interval(&self) -> bool {
        let first = self.counts.iter().position(|&c| c > 0);
        let last = self.counts.iter().rposition(|&c| c > 0);
        match (first, last) {
            (Some(a), Some(b)) => self.counts[a..=b].iter().all(|&c| c > 0),
            _ => false,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.counts[0] as usize == self.scale.cardinality
    }

    pub fn profile(&self) -> CumulativeProfile {
        let mut acc = 0;
        let c = self.counts[..self.counts.len() - 1]
            .iter()
            .map(|&n| {
                acc += n;
                acc
            })
            .collect();
        CumulativeProfile(c)
    }

    fn check_comparable(&self, other: &Self) -> Result<(), EstimateError> {
        if self.scale != other.scale {
            return Err(EstimateError::ScaleMismatch {
                left: self.scale,
                right: other.scale,
            });
        }
        Ok(())
    }
}

impl fmt::Display for MultisetEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for MultisetEstimate {
    type Err = EstimateError;

    /// Parses `(2,1,0,0)`. The scale is inferred from the vector.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| EstimateError::parse(s, "expected a parenthesized count vector"))?;
        let counts = body
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| EstimateError::parse(s, format!("{:?} is not a count", p.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        MultisetEstimate::from_counts(counts)
    }
}

/// Parses a `;`-separated list of estimates, e.g. `(2,1,0,0);(0,2,1,0)`.
pub fn parse_estimate_list(s: &str) -> Result<Vec<MultisetEstimate>, EstimateError> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// Vector-like proximity: how many one-level moves improve (`minus`) and
/// degrade (`plus`) elements when turning one estimate into another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProximityVector {
    pub minus: u64,
    pub plus: u64,
}

impl ProximityVector {
    pub fn magnitude(&self) -> u64 {
        self.minus + self.plus
    }
}

/// Outcome of comparing two estimates in the estimate poset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Better,
    Worse,
    Equal,
    Incomparable,
}

/// Number of multisets of cardinality `eta` over `l` levels, `C(l+eta-1, eta)`.
pub fn multiset_coefficient(levels: usize, cardinality: usize) -> Result<u64, EstimateError> {
    if levels == 0 || cardinality == 0 {
        return Err(EstimateError::InvalidScale { levels, cardinality });
    }
    let overflow = EstimateError::Overflow { levels, cardinality };
    // C(n, k) with k = min(eta, l - 1); each partial product is itself a
    // binomial coefficient, so the division is exact.
    let n = (levels - 1).checked_add(cardinality).ok_or_else(|| overflow.clone())? as u128;
    let k = cardinality.min(levels - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i).ok_or_else(|| overflow.clone())? / (i + 1);
        if acc > u64::MAX as u128 {
            return Err(overflow);
        }
    }
    Ok(acc as u64)
}

/// All interval estimates of the scale, best first: sorted by cumulative
/// profile in descending lexicographic order.
pub fn enumerate_scale(scale: Scale) -> Vec<MultisetEstimate> {
    let l = scale.levels;
    let eta = scale.cardinality;
    let mut out = Vec::new();
    let mut parts = Vec::with_capacity(l);
    for width in 1..=l.min(eta) {
        for start in 0..=(l - width) {
            compositions(eta as u32, width, &mut parts, &mut |parts| {
                let mut counts = vec![0; l];
                counts[start..start + width].copy_from_slice(parts);
                out.push(MultisetEstimate::with_scale(scale, counts));
            });
        }
    }
    out.sort_by_cached_key(|e| std::cmp::Reverse(e.profile()));
    out
}

/// Calls `emit` with every composition of `total` into `width` positive parts.
fn compositions(total: u32, width: usize, parts: &mut Vec<u32>, emit: &mut dyn FnMut(&[u32])) {
    if width == 1 {
        parts.push(total);
        emit(parts);
        parts.pop();
        return;
    }
    for first in 1..=(total - (width as u32 - 1)) {
        parts.push(first);
        compositions(total - first, width - 1, parts, emit);
        parts.pop();
    }
}

/// Closed-form size of [`enumerate_scale`]: `sum_k (l-k+1) * C(eta-1, k-1)`.
pub fn scale_size(scale: Scale) -> u128 {
    let (l, eta) = (scale.levels as u128, scale.cardinality as u128);
    (1..=l.min(eta)).map(|k| (l - k + 1) * binomial(eta - 1, k - 1)).sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn dominates(a: &MultisetEstimate, b: &MultisetEstimate) -> Result<Dominance, EstimateError> {
    a.check_comparable(b)?;
    Ok(compare_profiles(&a.profile(), &b.profile()))
}

pub(crate) fn compare_profiles(a: &CumulativeProfile, b: &CumulativeProfile) -> Dominance {
    let mut ge = true;
    let mut le = true;
    for (x, y) in a.0.iter().zip(&b.0) {
        match x.cmp(y) {
            Ordering::Greater => le = false,
            Ordering::Less => ge = false,
            Ordering::Equal => {}
        }
    }
    match (ge, le) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Better,
        (false, true) => Dominance::Worse,
        (false, false) => Dominance::Incomparable,
    }
}

/// `true` if `a` is strictly better than `b`. Both must share a scale.
pub(crate) fn strictly_dominates(a: &MultisetEstimate, b: &MultisetEstimate) -> bool {
    compare_profiles(&a.profile(), &b.profile()) == Dominance::Better
}

/// Component-wise sum of estimates over the same number of levels. The
/// result's cardinality is the sum of the inputs' and it may not be an
/// interval estimate.
pub fn integrate(estimates: &[MultisetEstimate]) -> Result<MultisetEstimate, EstimateError> {
    let (first, rest) = estimates.split_first().ok_or(EstimateError::EmptyInput)?;
    let mut counts = first.counts.clone();
    let mut cardinality = first.scale.cardinality;
    for e in rest {
        if e.scale.levels != first.scale.levels {
            return Err(EstimateError::ScaleMismatch {
                left: first.scale,
                right: e.scale,
            });
        }
        for (acc, c) in counts.iter_mut().zip(&e.counts) {
            *acc += c;
        }
        cardinality += e.scale.cardinality;
    }
    let scale = Scale::new(first.scale.levels, cardinality)?;
    Ok(MultisetEstimate::with_scale(scale, counts))
}

/// Moves needed to turn `from` into `to`, split into improvements and
/// degradations.
pub fn proximity(from: &MultisetEstimate, to: &MultisetEstimate) -> Result<ProximityVector, EstimateError> {
    from.check_comparable(to)?;
    let (a, b) = (from.profile(), to.profile());
    let mut v = ProximityVector { minus: 0, plus: 0 };
    for (&x, &y) in a.0.iter().zip(&b.0) {
        if y > x {
            v.minus += u64::from(y - x);
        } else {
            v.plus += u64::from(x - y);
        }
    }
    Ok(v)
}

/// Minimizers of the total proximity magnitude, with the minimal sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianResult {
    /// All minimizers, in scale enumeration order (or input order for set
    /// medians).
    pub medians: Vec<MultisetEstimate>,
    pub deviation: u64,
}

impl MedianResult {
    /// A single deterministic pick among tied medians: poset-maximal, then the
    /// lexicographically largest cumulative profile.
    pub fn representative(&self) -> &MultisetEstimate {
        representative(&self.medians)
    }
}

pub(crate) fn representative(medians: &[MultisetEstimate]) -> &MultisetEstimate {
    let profiles: Vec<_> = medians.iter().map(MultisetEstimate::profile).collect();
    (0..medians.len())
        .filter(|&i| {
            !profiles
                .iter()
                .any(|p| compare_profiles(p, &profiles[i]) == Dominance::Better)
        })
        .max_by(|&i, &j| profiles[i].cmp(&profiles[j]))
        .map(|i| &medians[i])
        .expect("median set is never empty")
}

fn check_all_on(scale: Scale, estimates: &[MultisetEstimate]) -> Result<(), EstimateError> {
    if estimates.is_empty() {
        return Err(EstimateError::EmptyInput);
    }
    for e in estimates {
        if e.scale != scale {
            return Err(EstimateError::ScaleMismatch {
                left: scale,
                right: e.scale,
            });
        }
    }
    Ok(())
}

/// Generalized median: the interval estimates of `scale` minimizing the sum
/// of proximity magnitudes to `estimates`.
pub fn generalized_median(estimates: &[MultisetEstimate], scale: Scale) -> Result<MedianResult, EstimateError> {
    check_all_on(scale, estimates)?;
    Ok(MedianSolver::new(scale).median(estimates.iter()))
}

/// Set median: the members of `estimates` minimizing the sum of proximity
/// magnitudes to all of `estimates`. Duplicates are reported once.
pub fn set_median(estimates: &[MultisetEstimate]) -> Result<MedianResult, EstimateError> {
    let scale = estimates.first().ok_or(EstimateError::EmptyInput)?.scale;
    check_all_on(scale, estimates)?;
    let profiles: Vec<_> = estimates.iter().map(MultisetEstimate::profile).collect();
    let mut best = u64::MAX;
    let mut medians: Vec<MultisetEstimate> = Vec::new();
    for (cand, cp) in estimates.iter().zip(&profiles) {
        let d: u64 = profiles.iter().map(|p| cp.distance(p)).sum();
        match d.cmp(&best) {
            Ordering::Less => {
                best = d;
                medians = vec![cand.clone()];
            }
            Ordering::Equal if !medians.contains(cand) => medians.push(cand.clone()),
            _ => {}
        }
    }
    Ok(MedianResult {
        medians,
        deviation: best,
    })
}

/// Generalized-median evaluator with the candidate scale precomputed.
///
/// Callers scoring many selections on one scale (synthesis, the choice
/// solver) keep one of these around instead of re-enumerating the scale.
#[derive(Debug, Clone)]
pub struct MedianSolver {
    scale: Scale,
    candidates: Vec<MultisetEstimate>,
    profiles: Vec<CumulativeProfile>,
}

impl MedianSolver {
    pub fn new(scale: Scale) -> Self {
        let candidates = enumerate_scale(scale);
        let profiles = candidates.iter().map(MultisetEstimate::profile).collect();
        Self {
            scale,
            candidates,
            profiles,
        }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn candidates(&self) -> &[MultisetEstimate] {
        &self.candidates
    }

    /// Distance from every candidate to `e`, in candidate order.
    pub fn distances_to(&self, e: &MultisetEstimate) -> Vec<u64> {
        let p = e.profile();
        self.profiles.iter().map(|c| c.distance(&p)).collect()
    }

    /// Median from per-candidate deviation sums (as accumulated from
    /// [`MedianSolver::distances_to`]).
    pub fn median_from_sums(&self, sums: &[u64]) -> MedianResult {
        let deviation = *sums.iter().min().expect("scale is never empty");
        let medians = sums
            .iter()
            .zip(&self.candidates)
            .filter(|(&s, _)| s == deviation)
            .map(|(_, c)| c.clone())
            .collect();
        MedianResult { medians, deviation }
    }

    /// Median of estimates assumed to lie on this solver's scale.
    pub fn median<'a>(&self, estimates: impl IntoIterator<Item = &'a MultisetEstimate>) -> MedianResult {
        let mut sums = vec![0u64; self.candidates.len()];
        for e in estimates {
            debug_assert_eq!(e.scale, self.scale);
            for (s, d) in sums.iter_mut().zip(self.distances_to(e)) {
                *s += d;
            }
        }
        self.median_from_sums(&sums)
    }
}

/// Covering pairs `(upper, lower)` of the scale poset as indices into
/// [`enumerate_scale`]: `upper` strictly dominates `lower` with nothing in
/// between.
pub fn covering_relations(scale: Scale) -> Vec<(usize, usize)> {
    let items = enumerate_scale(scale);
    let profiles: Vec<_> = items.iter().map(MultisetEstimate::profile).collect();
    let better = |i: usize, j: usize| compare_profiles(&profiles[i], &profiles[j]) == Dominance::Better;
    let n = items.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if better(i, j) && !(0..n).any(|k| better(i, k) && better(k, j)) {
                out.push((i, j));
            }
        }
    }
    out
}
