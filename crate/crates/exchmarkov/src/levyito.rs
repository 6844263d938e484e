//! Locality analysis of kernels: which multisets of coordinates a kernel
//! actually touches.
//!
//! For a kernel `F` and a multiset `s`, the functional `L̂(s)` estimates the
//! fraction of tuples carrying `s` (with exact multiplicity, completed by
//! distinct fresh coordinates) whose relation entry `F` can change. The
//! core `Δ_F` is the multiset meet over all `s` with `L̂(s)` above a
//! threshold; a kernel with no core acts globally. Rate measures are
//! classified atom by atom into the global component or a component indexed
//! by the integer-partition type of the core.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::classes::FiniteClass;
use crate::ctprocess::RateMeasure;
use crate::kernels::{CheckRegime, Kernel, KernelSampler};
use crate::structures::all_tuples;
use crate::{seed, Error, Result};

/// A finite multiset of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    counts: BTreeMap<u32, u32>,
}

impl Multiset {
    /// The empty multiset.
    pub fn new() -> Multiset {
        Multiset::default()
    }

    /// Multiset of the elements of a tuple, with multiplicities.
    pub fn from_elements(elems: &[u32]) -> Multiset {
        let mut counts = BTreeMap::new();
        for &e in elems {
            *counts.entry(e).or_insert(0) += 1;
        }
        Multiset { counts }
    }

    /// Builds from (element, multiplicity) pairs; zero counts are dropped.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Multiset {
        let mut counts = BTreeMap::new();
        for &(e, c) in pairs {
            if c > 0 {
                *counts.entry(e).or_insert(0) += c;
            }
        }
        Multiset { counts }
    }

    /// Multiplicity of an element (0 if absent).
    pub fn count(&self, e: u32) -> u32 {
        self.counts.get(&e).copied().unwrap_or(0)
    }

    /// (element, multiplicity) pairs in increasing element order.
    pub fn multiplicities(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts.iter().map(|(&e, &c)| (e, c))
    }

    /// Total size (sum of multiplicities).
    pub fn total(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    /// Number of distinct elements.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Whether no element is present.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Multiset inclusion: every multiplicity bounded by the other's.
    pub fn subset_of(&self, other: &Multiset) -> bool {
        self.counts.iter().all(|(&e, &c)| other.count(e) >= c)
    }

    /// Elementwise minimum of multiplicities.
    pub fn meet(&self, other: &Multiset) -> Multiset {
        let mut counts = BTreeMap::new();
        for (&e, &c) in &self.counts {
            let m = c.min(other.count(e));
            if m > 0 {
                counts.insert(e, m);
            }
        }
        Multiset { counts }
    }

    /// Elementwise maximum of multiplicities.
    pub fn join(&self, other: &Multiset) -> Multiset {
        let mut counts = self.counts.clone();
        for (&e, &c) in &other.counts {
            let entry = counts.entry(e).or_insert(0);
            *entry = (*entry).max(c);
        }
        Multiset { counts }
    }

    /// Elementwise sum of multiplicities.
    pub fn oplus(&self, other: &Multiset) -> Multiset {
        let mut counts = self.counts.clone();
        for (&e, &c) in &other.counts {
            *counts.entry(e).or_insert(0) += c;
        }
        Multiset { counts }
    }

    /// Multiplicities sorted nonincreasingly: the integer-partition type.
    pub fn ranked_type(&self) -> IntegerPartition {
        let mut parts: Vec<u32> = self.counts.values().copied().collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    /// Elements ordered by decreasing multiplicity, ties broken by the
    /// larger element first.
    pub fn ranked_order(&self) -> Vec<(u32, u32)> {
        let mut pairs: Vec<(u32, u32)> = self.multiplicities().collect();
        pairs.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
        pairs
    }

    /// The canonical multiset of a type: element `i` with multiplicity
    /// `alpha_i`.
    pub fn canonical(alpha: &IntegerPartition) -> Multiset {
        let mut counts = BTreeMap::new();
        for (i, &p) in alpha.parts().iter().enumerate() {
            counts.insert((i + 1) as u32, p);
        }
        Multiset { counts }
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let body = self
            .multiplicities()
            .map(|(e, c)| {
                if c == 1 {
                    format!("{e}")
                } else {
                    format!("{e}^{c}")
                }
            })
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "{{{body}}}")
    }
}

/// A partition of an integer: nonincreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPartition {
    parts: Vec<u32>,
}

impl IntegerPartition {
    /// Validates nonincreasing positive parts.
    pub fn new(parts: Vec<u32>) -> Result<IntegerPartition> {
        if parts.contains(&0) {
            return Err(Error::Validation("parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation("parts must be nonincreasing".into()));
        }
        Ok(IntegerPartition { parts })
    }

    /// The parts, largest first.
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// The partitioned integer (sum of parts).
    pub fn k(&self) -> u32 {
        self.parts.iter().sum()
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "({body})")
    }
}

/// The permutation of `{1..n}` sending position `i` to the `i`-th element
/// of the ranked order of `s`, extended increasingly on the rest.
pub fn phi_s_alpha(s: &Multiset, n: usize) -> Result<Vec<u32>> {
    if s.multiplicities().any(|(e, _)| e == 0 || e as usize > n) {
        return Err(Error::Validation(format!(
            "multiset support must lie in 1..={n}"
        )));
    }
    let ranked = s.ranked_order();
    let mut used = vec![false; n + 1];
    let mut perm = Vec::with_capacity(n);
    for &(e, _) in &ranked {
        perm.push(e);
        used[e as usize] = true;
    }
    let mut rest: Vec<u32> = (1..=n as u32).filter(|&v| !used[v as usize]).collect();
    perm.append(&mut rest);
    Ok(perm)
}

/// Verdict of a tuple-level locality query.
#[derive(Clone, Debug)]
pub struct NontrivialVerdict {
    /// Whether some probed input's entry at the tuple changes.
    pub nontrivial: bool,
    /// Exploration regime used.
    pub regime: CheckRegime,
}

const EXHAUSTIVE_LIMIT: u128 = 10_000;
const SAMPLED_PROBES: usize = 200;
const PROBE_SEED: u64 = 0x10CA11;

/// Visits the probe set for a class at size `n` one structure at a time:
/// every member when the class is small enough to enumerate, otherwise
/// seeded draws from the class limit law. Streaming keeps memory flat at
/// large sizes. The visitor returns false to stop early.
fn for_each_probe<F>(
    class: &FiniteClass,
    n: usize,
    label: &str,
    mut visit: F,
) -> Result<CheckRegime>
where
    F: FnMut(&crate::structures::FiniteStructure) -> Result<bool>,
{
    let exhaustive = class
        .count(n)
        .map(|c| c <= EXHAUSTIVE_LIMIT)
        .unwrap_or(false)
        && n <= class.enum_bound();
    if exhaustive {
        for probe in class.enumerate(n)? {
            if !visit(&probe)? {
                break;
            }
        }
        Ok(CheckRegime::Exhaustive)
    } else {
        for i in 0..SAMPLED_PROBES as u64 {
            let probe = class.sample_limit(n, seed::derive(PROBE_SEED, label, &[i]))?;
            if !visit(&probe)? {
                break;
            }
        }
        Ok(CheckRegime::Sampled {
            trials: SAMPLED_PROBES,
        })
    }
}

/// Whether the kernel can change relation `j`'s entry at tuple `x`: true
/// iff some probed input over `{1..max(x)}` has its entry rewritten.
pub fn acts_nontrivially(f: &Kernel, j: usize, x: &[u32]) -> Result<NontrivialVerdict> {
    let sig = f.class().signature().clone();
    if j >= sig.len() {
        return Err(Error::Domain(format!("no relation with index {j}")));
    }
    if x.len() != sig.arity(j) {
        return Err(Error::Domain(format!(
            "tuple length {} does not match arity {}",
            x.len(),
            sig.arity(j)
        )));
    }
    let m = *x.iter().max().ok_or_else(|| {
        Error::Domain("nullary tuples are not supported".into())
    })? as usize;
    let mut nontrivial = false;
    let regime = for_each_probe(f.class(), m, "nontrivial", |probe| {
        let out = f.apply(probe)?;
        if out.contains(j, x) != probe.contains(j, x) {
            nontrivial = true;
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(NontrivialVerdict { nontrivial, regime })
}

type CellKey = (usize, Multiset, u32);

/// Aggregated locality statistics of a kernel at one size: for every
/// relation `j`, anchor multiset `s`, and excess multiplicity `i`, the
/// number of eligible tuples and the number among them the kernel can
/// rewrite.
#[derive(Clone, Debug)]
pub struct LocalityProfile {
    n: usize,
    regime: CheckRegime,
    eligible: HashMap<CellKey, u64>,
    nontrivial: HashMap<CellKey, u64>,
    arities: Vec<usize>,
}

impl LocalityProfile {
    /// The truncation size profiled.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Exploration regime used for the probe set.
    pub fn regime(&self) -> &CheckRegime {
        &self.regime
    }

    /// The locality fraction for relation `j`, excess `i`, anchor `s`:
    /// rewritable eligible tuples over all eligible tuples (0 when none are
    /// eligible). A tuple is eligible when it carries every element of `s`
    /// at exactly its multiplicity and its remaining coordinates avoid `s`,
    /// with total excess multiplicity `i` among them.
    pub fn l_hat(&self, j: usize, i: u32, s: &Multiset) -> Result<f64> {
        let ar = *self
            .arities
            .get(j)
            .ok_or_else(|| Error::Domain(format!("no relation with index {j}")))?;
        let size = s.total();
        if size > ar {
            return Err(Error::Validation(format!(
                "anchor size {size} exceeds arity {ar}"
            )));
        }
        let i = if size == ar { 0 } else { i };
        if size < ar && i as usize >= ar - size {
            return Err(Error::Validation(format!(
                "excess {i} out of range for arity {ar} and anchor size {size}"
            )));
        }
        let key = (j, s.clone(), i);
        let elig = self.eligible.get(&key).copied().unwrap_or(0);
        if elig == 0 {
            return Ok(0.0);
        }
        let non = self.nontrivial.get(&key).copied().unwrap_or(0);
        Ok(non as f64 / elig as f64)
    }

    /// The maximum of [`LocalityProfile::l_hat`] over relations and excess
    /// values for a given anchor.
    pub fn l_hat_max(&self, s: &Multiset) -> f64 {
        let mut best: f64 = 0.0;
        for (key, &elig) in &self.eligible {
            if key.1 == *s && elig > 0 {
                let non = self.nontrivial.get(key).copied().unwrap_or(0);
                best = best.max(non as f64 / elig as f64);
            }
        }
        best
    }

    /// All anchors whose maximal locality fraction exceeds the threshold,
    /// with that fraction, sorted by anchor.
    pub fn family(&self, eps: f64) -> Vec<(Multiset, f64)> {
        let mut best: BTreeMap<Multiset, f64> = BTreeMap::new();
        for (key, &elig) in &self.eligible {
            if elig == 0 {
                continue;
            }
            let non = self.nontrivial.get(key).copied().unwrap_or(0);
            let v = non as f64 / elig as f64;
            let entry = best.entry(key.1.clone()).or_insert(0.0);
            if v > *entry {
                *entry = v;
            }
        }
        best.into_iter().filter(|&(_, v)| v > eps).collect()
    }
}

/// Builds the locality profile of a kernel at size `n` by probing inputs
/// and recording which relation entries ever change.
pub fn locality_profile(f: &Kernel, n: usize) -> Result<LocalityProfile> {
    if n > f.n_max() {
        return Err(Error::Capacity(format!(
            "size {n} above the kernel bound"
        )));
    }
    let sig = f.class().signature().clone();
    let arities: Vec<usize> = (0..sig.len()).map(|j| sig.arity(j)).collect();
    // Change bitmap per relation, indexed by mixed-radix tuple rank.
    let mut changed: Vec<Vec<bool>> = arities
        .iter()
        .map(|&ar| vec![false; n.pow(ar as u32)])
        .collect();
    let regime = for_each_probe(f.class(), n, "profile", |probe| {
        let out = f.apply(probe)?;
        for (j, ch) in changed.iter_mut().enumerate() {
            for t in probe.tuples(j).symmetric_difference(out.tuples(j)) {
                ch[tuple_rank(t, n)] = true;
            }
        }
        Ok(true)
    })?;
    let mut eligible: HashMap<CellKey, u64> = HashMap::new();
    let mut nontrivial: HashMap<CellKey, u64> = HashMap::new();
    for (j, &ar) in arities.iter().enumerate() {
        for x in all_tuples(n, ar) {
            let was_changed = changed[j][tuple_rank(&x, n)];
            let entries: Vec<(u32, u32)> = Multiset::from_elements(&x)
                .multiplicities()
                .collect();
            let d = entries.len();
            for mask in 0u32..(1 << d) {
                let mut skey = BTreeMap::new();
                let mut excess = 0u32;
                for (b, &(e, c)) in entries.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        skey.insert(e, c);
                    } else {
                        excess += c - 1;
                    }
                }
                let key = (j, Multiset { counts: skey }, excess);
                *eligible.entry(key.clone()).or_insert(0) += 1;
                if was_changed {
                    *nontrivial.entry(key).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(LocalityProfile {
        n,
        regime,
        eligible,
        nontrivial,
        arities,
    })
}

fn tuple_rank(t: &[u32], n: usize) -> usize {
    let mut rank = 0usize;
    for &v in t {
        rank = rank * n + (v as usize - 1);
    }
    rank
}

/// Convenience wrapper: the locality fraction computed from a fresh profile.
pub fn l_hat(f: &Kernel, j: usize, i: u32, s: &Multiset, n: usize) -> Result<f64> {
    locality_profile(f, n)?.l_hat(j, i, s)
}

/// The core of a kernel: either a common anchor multiset or none (global
/// action).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaF {
    /// No anchor: the kernel rewrites entries not tied to any coordinate
    /// multiset (or rewrites nothing at all).
    Global,
    /// The meet of all anchors with locality fraction above the threshold.
    Core(Multiset),
}

impl fmt::Display for DeltaF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaF::Global => write!(f, "global"),
            DeltaF::Core(s) => write!(f, "{s}"),
        }
    }
}

/// Core extraction report.
#[derive(Clone, Debug)]
pub struct DeltaReport {
    /// The extracted core.
    pub delta: DeltaF,
    /// Anchors above threshold with their locality fractions.
    pub family: Vec<(Multiset, f64)>,
    /// Exploration regime of the underlying profile.
    pub regime: CheckRegime,
    /// Truncation size used.
    pub n: usize,
    /// Threshold used.
    pub eps: f64,
}

/// Extracts the core of a kernel at size `n` with threshold `eps`: the
/// multiset meet of every anchor whose locality fraction exceeds `eps`.
/// An empty family, or a family meeting in the empty multiset, yields
/// [`DeltaF::Global`].
pub fn delta_f(f: &Kernel, n: usize, eps: f64) -> Result<DeltaReport> {
    if eps <= 0.0 {
        return Err(Error::Validation("threshold must be positive".into()));
    }
    let profile = locality_profile(f, n)?;
    let family = profile.family(eps);
    let delta = match family.split_first() {
        None => DeltaF::Global,
        Some(((first, _), rest)) => {
            let core = rest.iter().fold(first.clone(), |acc, (s, _)| acc.meet(s));
            if core.is_empty() {
                DeltaF::Global
            } else {
                DeltaF::Core(core)
            }
        }
    };
    Ok(DeltaReport {
        delta,
        family,
        regime: profile.regime,
        n,
        eps,
    })
}

/// Verifies that a sampler's kernels only rewrite entries at tuples
/// carrying the anchor multiset, by exhaustive cell inspection at a small
/// size.
pub fn verify_anchored(
    sampler: &KernelSampler,
    anchor: &Multiset,
    kernel_samples: usize,
    seed_value: u64,
) -> Result<()> {
    let top = anchor
        .multiplicities()
        .map(|(e, _)| e)
        .max()
        .ok_or_else(|| Error::Validation("anchor must be nonempty".into()))?;
    let m = (top as usize + 2).max(3);
    for ks in 0..kernel_samples {
        let f = sampler.sample(seed::derive(seed_value, "anchor-kernel", &[ks as u64]))?;
        // Every changed cell's element multiset must contain the anchor.
        for_each_probe(f.class(), m, "anchor-probe", |probe| {
            let out = f.apply(probe)?;
            for j in 0..f.class().signature().len() {
                for t in probe.tuples(j).symmetric_difference(out.tuples(j)) {
                    if !anchor.subset_of(&Multiset::from_elements(t)) {
                        return Err(Error::Validation(format!(
                            "sampler {} rewrites cell {t:?}, which does not carry {anchor}",
                            sampler.tag()
                        )));
                    }
                }
            }
            Ok(true)
        })?;
    }
    Ok(())
}

/// Lévy–Itô component of one atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomType {
    /// Global component: no common anchor.
    Global,
    /// Anchored component indexed by the type of the core.
    Alpha(IntegerPartition),
}

impl fmt::Display for AtomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomType::Global => write!(f, "global"),
            AtomType::Alpha(a) => write!(f, "{a}"),
        }
    }
}

/// Classification of one atom or family of a rate measure.
#[derive(Clone, Debug)]
pub struct AtomClassification {
    /// Human-readable atom label.
    pub label: String,
    /// Majority type over the sampled kernels.
    pub majority: AtomType,
    /// Per-sample types.
    pub samples: Vec<AtomType>,
    /// Number of samples disagreeing with the majority.
    pub disagreements: usize,
}

/// Classification report for a rate measure.
#[derive(Clone, Debug)]
pub struct MeasureClassification {
    /// One entry per atom and per family of the measure.
    pub atoms: Vec<AtomClassification>,
    /// Set when the class could not be confirmed to amalgamate over
    /// hyperplanes, which the decomposition theory assumes.
    pub ndap_warning: Option<String>,
}

/// Classifies every atom and family of a rate measure by sampling kernels
/// and extracting their cores at size `n` with threshold `eps`.
pub fn classify_measure(
    measure: &RateMeasure,
    n: usize,
    eps: f64,
    samples: usize,
    seed_value: u64,
) -> Result<MeasureClassification> {
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let ndap_warning = ndap_caveat(measure.class(), n)?;
    let mut atoms = Vec::new();
    for (idx, (rate, sampler)) in measure.event_samplers(n)?.into_iter().enumerate() {
        let mut types = Vec::with_capacity(samples);
        for k in 0..samples {
            let kernel =
                sampler.sample(seed::derive(seed_value, "classify", &[idx as u64, k as u64]))?;
            let report = delta_f(&kernel, n, eps)?;
            types.push(match report.delta {
                DeltaF::Global => AtomType::Global,
                DeltaF::Core(s) => AtomType::Alpha(s.ranked_type()),
            });
        }
        let mut tally: Vec<(AtomType, usize)> = Vec::new();
        for t in &types {
            match tally.iter_mut().find(|(u, _)| u == t) {
                Some((_, c)) => *c += 1,
                None => tally.push((t.clone(), 1)),
            }
        }
        tally.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        let (majority, hits) = tally[0].clone();
        atoms.push(AtomClassification {
            label: format!("{} (rate {rate})", sampler.tag()),
            majority,
            samples: types,
            disagreements: samples - hits,
        });
    }
    Ok(MeasureClassification {
        atoms,
        ndap_warning,
    })
}

fn ndap_caveat(class: &FiniteClass, n: usize) -> Result<Option<String>> {
    let cap = n.clamp(2, 4);
    for k in 2..=cap {
        if class.count(k).map(|c| c > EXHAUSTIVE_LIMIT).unwrap_or(true)
            || k > class.enum_bound()
        {
            return Ok(Some(format!(
                "hyperplane amalgamation unverified beyond size {k}",
            )));
        }
        if let crate::classes::NdapReport::Fail { .. } = crate::classes::check_ndap(class, k)? {
            return Ok(Some(format!(
                "class {} fails hyperplane amalgamation at size {k}; the type decomposition may not apply",
                class.id()
            )));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::ClassKind;
    use crate::kernels::{cutpaste_kernel, identity_kernel, single_site_resampler, SiteVariant};

    #[test]
    fn multiset_calculus_worked_examples() {
        let s = Multiset::from_pairs(&[(1, 3), (2, 2), (4, 1)]);
        let t = Multiset::from_pairs(&[(1, 2), (2, 3), (3, 2), (5, 3)]);
        assert_eq!(s.meet(&t), Multiset::from_pairs(&[(1, 2), (2, 2)]));
        assert_eq!(
            s.join(&t),
            Multiset::from_pairs(&[(1, 3), (2, 3), (3, 2), (4, 1), (5, 3)])
        );
        let u = Multiset::from_pairs(&[(1, 2), (2, 3), (4, 1), (5, 3)]);
        assert_eq!(u.ranked_type(), IntegerPartition::new(vec![3, 3, 2, 1]).unwrap());
        assert_eq!(u.ranked_order(), vec![(5, 3), (2, 3), (1, 2), (4, 1)]);
        assert_eq!(u.ranked_type().k(), 9);
        let alpha = IntegerPartition::new(vec![2, 1]).unwrap();
        let canon = Multiset::canonical(&alpha);
        assert_eq!(canon, Multiset::from_pairs(&[(1, 2), (2, 1)]));
        assert_eq!(canon.ranked_type(), alpha);
    }

    #[test]
    fn multiset_lattice_laws() {
        let a = Multiset::from_pairs(&[(1, 2), (3, 1)]);
        let b = Multiset::from_pairs(&[(1, 1), (2, 4)]);
        assert_eq!(a.meet(&b), b.meet(&a));
        assert_eq!(a.join(&b), b.join(&a));
        assert_eq!(a.meet(&a.join(&b)), a);
        assert_eq!(a.join(&a.meet(&b)), a);
        assert_eq!(
            a.oplus(&b),
            Multiset::from_pairs(&[(1, 3), (2, 4), (3, 1)])
        );
    }

    #[test]
    fn phi_examples() {
        let s = Multiset::from_elements(&[3]);
        assert_eq!(phi_s_alpha(&s, 3).unwrap(), vec![3, 1, 2]);
        let s = Multiset::from_pairs(&[(2, 3), (5, 3), (1, 2)]);
        let perm = phi_s_alpha(&s, 5).unwrap();
        assert_eq!(perm[0], 5);
        assert_eq!(perm[1], 2);
        assert_eq!(perm[2], 1);
        assert_eq!(&perm[3..], &[3, 4]);
        let alpha = IntegerPartition::new(vec![2]).unwrap();
        let canon = Multiset::canonical(&alpha);
        assert_eq!(phi_s_alpha(&canon, 4).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn nontrivial_cells_of_site_resamplers() {
        let anchor = Multiset::from_elements(&[1]);
        let f = single_site_resampler(&anchor, SiteVariant::Ex1, 5).unwrap();
        assert!(acts_nontrivially(&f, 0, &[1, 2, 3]).unwrap().nontrivial);
        assert!(!acts_nontrivially(&f, 0, &[2, 1, 3]).unwrap().nontrivial);
        let anchor2 = Multiset::from_elements(&[1, 1]);
        let g = single_site_resampler(&anchor2, SiteVariant::Ex2, 5).unwrap();
        assert!(!acts_nontrivially(&g, 0, &[1, 2, 3]).unwrap().nontrivial);
        assert!(acts_nontrivially(&g, 0, &[1, 1, 2]).unwrap().nontrivial);
        let id = identity_kernel(f.class().clone());
        assert!(!acts_nontrivially(&id, 0, &[1, 2, 3]).unwrap().nontrivial);
    }

    #[test]
    fn core_extraction_small_scale() {
        // Size 20 keeps this test quick; the acceptance suite runs n=60.
        let anchor = Multiset::from_elements(&[1]);
        let f = single_site_resampler(&anchor, SiteVariant::Ex1, 9).unwrap();
        let report = delta_f(&f, 20, 0.1).unwrap();
        assert_eq!(report.delta, DeltaF::Core(Multiset::from_elements(&[1])));

        let anchor2 = Multiset::from_elements(&[1, 1]);
        let g = single_site_resampler(&anchor2, SiteVariant::Ex2, 9).unwrap();
        let report = delta_f(&g, 20, 0.1).unwrap();
        assert_eq!(
            report.delta,
            DeltaF::Core(Multiset::from_elements(&[1, 1]))
        );

        let h = single_site_resampler(&anchor, SiteVariant::Ex3, 9).unwrap();
        let report = delta_f(&h, 20, 0.1).unwrap();
        assert_eq!(report.delta, DeltaF::Core(Multiset::from_elements(&[1])));
    }

    #[test]
    fn global_kernels_have_no_core() {
        let cp = cutpaste_kernel(0.4, 0.7, 3).unwrap();
        let report = delta_f(&cp, 30, 0.1).unwrap();
        assert_eq!(report.delta, DeltaF::Global);
        let id = identity_kernel(FiniteClass::builtin(ClassKind::Sets).unwrap());
        let report = delta_f(&id, 30, 0.1).unwrap();
        assert_eq!(report.delta, DeltaF::Global);
        assert!(report.family.is_empty());
    }

    #[test]
    fn single_coordinate_flipper_is_type_one() {
        let class = FiniteClass::builtin(ClassKind::Sets).unwrap();
        let f = crate::kernels::Kernel::from_rule(class, usize::MAX, "flip5", |m| {
            let mut out = m.clone();
            if m.n() >= 5 {
                out.set(0, &[5], !m.contains(0, &[5]))?;
            }
            Ok(out)
        });
        let report = delta_f(&f, 30, 0.1).unwrap();
        assert_eq!(report.delta, DeltaF::Core(Multiset::from_elements(&[5])));
        assert_eq!(
            match report.delta {
                DeltaF::Core(s) => s.ranked_type(),
                DeltaF::Global => panic!(),
            },
            IntegerPartition::new(vec![1]).unwrap()
        );
    }

    #[test]
    fn anchored_locality_accepts_and_rejects() {
        let anchor = Multiset::from_elements(&[1]);
        let sampler = KernelSampler::from_fn(
            FiniteClass::full(crate::kernels::ternary_signature()),
            "anchored-ex1",
            {
                let anchor = anchor.clone();
                move |s| single_site_resampler(&anchor, SiteVariant::Ex1, s)
            },
        );
        verify_anchored(&sampler, &anchor, 3, 7).unwrap();

        let bad = KernelSampler::cutpaste(0.3, 0.3).unwrap();
        assert!(verify_anchored(&bad, &anchor, 2, 7).is_err());
    }
}
