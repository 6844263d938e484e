//! Transition kernels on finite structures.
//!
//! A [`Kernel`] is a coherent family of deterministic maps, one per domain
//! size: restricting the output to `{1..n}` depends only on the input
//! restricted to `{1..n}`. [`check_consistency`] verifies that contract,
//! [`check_conjugation_invariance`] the stronger labeled-subset locality.
//! The concrete constructions: block coagulation and fragmentation of
//! partitions, coordinatewise cut-and-paste resampling of sets, single-site
//! resamplers on a ternary relation, and kernels read off a target
//! structure through greedy embeddings.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::Rng;

use crate::classes::{
    blocks_of_partition, canonical_embedding, partition_from_blocks, ClassKind, FiniteClass,
};
use crate::levyito::Multiset;
use crate::structures::{FiniteStructure, Signature};
use crate::{seed, Error, Result};

/// Size bound for kernels defined at every truncation.
pub const UNBOUNDED: usize = usize::MAX;

type Rule = Arc<dyn Fn(&FiniteStructure) -> Result<FiniteStructure> + Send + Sync>;

/// A size-coherent deterministic transition map.
#[derive(Clone)]
pub struct Kernel {
    class: FiniteClass,
    n_max: usize,
    tag: String,
    rule: Rule,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("class", &self.class.id())
            .field("n_max", &self.n_max)
            .field("tag", &self.tag)
            .finish()
    }
}

impl Kernel {
    /// A kernel from an arbitrary rule. The rule must preserve the domain
    /// size and signature; coherence is the caller's responsibility and can
    /// be audited with [`check_consistency`].
    pub fn from_rule<F>(class: FiniteClass, n_max: usize, tag: &str, rule: F) -> Kernel
    where
        F: Fn(&FiniteStructure) -> Result<FiniteStructure> + Send + Sync + 'static,
    {
        Kernel {
            class,
            n_max,
            tag: tag.to_string(),
            rule: Arc::new(rule),
        }
    }

    /// The class this kernel acts on.
    pub fn class(&self) -> &FiniteClass {
        &self.class
    }

    /// Largest domain size the kernel accepts.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Metadata tag describing the construction.
    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Applies the kernel to a structure over `{1..n}`.
    pub fn apply(&self, m: &FiniteStructure) -> Result<FiniteStructure> {
        if m.n() > self.n_max {
            return Err(Error::Capacity(format!(
                "kernel {} accepts sizes up to {}, got {}",
                self.tag, self.n_max, m.n()
            )));
        }
        if !self.class.contains(m) {
            return Err(Error::Domain(format!(
                "input is not a member of {}",
                self.class.id()
            )));
        }
        let out = (self.rule)(m)?;
        if out.n() != m.n() || out.signature() != m.signature() {
            return Err(Error::Domain(format!(
                "kernel {} changed the domain or signature",
                self.tag
            )));
        }
        Ok(out)
    }
}

/// The identity kernel.
pub fn identity_kernel(class: FiniteClass) -> Kernel {
    Kernel::from_rule(class, UNBOUNDED, "identity", |m| Ok(m.clone()))
}

/// The kernel flipping every possible tuple of every relation. Class-valid
/// on sets and on full classes.
pub fn complement_kernel(class: FiniteClass) -> Kernel {
    Kernel::from_rule(class, UNBOUNDED, "complement", |m| {
        let mut out = FiniteStructure::empty(m.signature().clone(), m.n());
        for rel in 0..m.signature().len() {
            for t in crate::structures::all_tuples(m.n(), m.signature().arity(rel)) {
                if !m.contains(rel, &t) {
                    out.insert(rel, &t)?;
                }
            }
        }
        Ok(out)
    })
}

/// Block coagulation by a fixed partition of block indices.
///
/// The input's blocks are ordered by least element; output block `j` is the
/// union of input blocks whose index lies in block `j` of `pi`. Indices
/// beyond the domain of `pi` are treated as singletons of `pi`, so the
/// kernel is defined at every size.
pub fn coag_kernel(pi: &FiniteStructure) -> Result<Kernel> {
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    if !class.contains(pi) {
        return Err(Error::Validation(
            "coagulation pattern is not a partition".into(),
        ));
    }
    let pi_blocks = blocks_of_partition(pi)?;
    let tag = format!("coag:{:?}", pi_blocks);
    Ok(Kernel::from_rule(class, UNBOUNDED, &tag, move |m| {
        let in_blocks = blocks_of_partition(m)?;
        let b = in_blocks.len() as u32;
        let mut out_blocks: Vec<Vec<u32>> = Vec::new();
        let mut grouped = vec![false; in_blocks.len() + 1];
        for index_block in &pi_blocks {
            let mut merged: Vec<u32> = Vec::new();
            for &i in index_block {
                if i <= b {
                    merged.extend(&in_blocks[(i - 1) as usize]);
                    grouped[i as usize] = true;
                }
            }
            if !merged.is_empty() {
                merged.sort_unstable();
                out_blocks.push(merged);
            }
        }
        for i in 1..=b {
            if !grouped[i as usize] {
                out_blocks.push(in_blocks[(i - 1) as usize].clone());
            }
        }
        let refs: Vec<&[u32]> = out_blocks.iter().map(|v| v.as_slice()).collect();
        partition_from_blocks(m.n(), &refs)
    }))
}

/// Fragmentation of the `k`-th block (blocks ordered by least element) by a
/// fixed partition. Inputs with fewer than `k` blocks pass through
/// unchanged. Elements beyond the domain of `pi2` fragment into singletons.
pub fn frag_kernel(pi2: &FiniteStructure, k: usize) -> Result<Kernel> {
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    if !class.contains(pi2) {
        return Err(Error::Validation(
            "fragmentation pattern is not a partition".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Validation("block indices start at 1".into()));
    }
    let frag_blocks = blocks_of_partition(pi2)?;
    let cover = pi2.n() as u32;
    let tag = format!("frag:{:?}:{k}", frag_blocks);
    Ok(Kernel::from_rule(class, UNBOUNDED, &tag, move |m| {
        let in_blocks = blocks_of_partition(m)?;
        if k > in_blocks.len() {
            return Ok(m.clone());
        }
        let target = &in_blocks[k - 1];
        let mut out_blocks: Vec<Vec<u32>> = Vec::new();
        for (i, block) in in_blocks.iter().enumerate() {
            if i != k - 1 {
                out_blocks.push(block.clone());
            }
        }
        for fb in &frag_blocks {
            let piece: Vec<u32> = target.iter().copied().filter(|v| fb.contains(v)).collect();
            if !piece.is_empty() {
                out_blocks.push(piece);
            }
        }
        for &v in target.iter().filter(|&&v| v > cover) {
            out_blocks.push(vec![v]);
        }
        let refs: Vec<&[u32]> = out_blocks.iter().map(|v| v.as_slice()).collect();
        partition_from_blocks(m.n(), &refs)
    }))
}

/// Coordinatewise cut-and-paste resampling on the sets class: coordinate
/// `i` of the output reads a fixed Bernoulli(`theta0`) array where the
/// input is 0 and a fixed Bernoulli(`theta1`) array where it is 1. The
/// arrays are derived from the seed, so the kernel is deterministic and
/// coherent at every size.
pub fn cutpaste_kernel(theta0: f64, theta1: f64, seed_value: u64) -> Result<Kernel> {
    if !(0.0..=1.0).contains(&theta0) || !(0.0..=1.0).contains(&theta1) {
        return Err(Error::Validation("probabilities must lie in [0,1]".into()));
    }
    let class = FiniteClass::builtin(ClassKind::Sets)?;
    let tag = format!("cutpaste:{theta0}:{theta1}:{seed_value}");
    Ok(Kernel::from_rule(class, UNBOUNDED, &tag, move |m| {
        let mut out = FiniteStructure::empty(m.signature().clone(), m.n());
        for i in 1..=m.n() as u32 {
            let present = if m.contains(0, &[i]) {
                seed::unit(seed_value, "y1", &[i as u64]) < theta1
            } else {
                seed::unit(seed_value, "y0", &[i as u64]) < theta0
            };
            if present {
                out.insert(0, &[i])?;
            }
        }
        Ok(out)
    }))
}

/// Variants of the single-site resampler on a ternary relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteVariant {
    /// Entries `(a, b, c)` with `a` at the anchor are replaced by a fixed
    /// random array indexed by `(b, c)`.
    Ex1,
    /// Only entries with both `a` and `b` at the anchor are replaced, by an
    /// array indexed by `c`.
    Ex2,
    /// Only entries with `a` at the anchor and `b = c` are replaced, by an
    /// array indexed by `b`.
    Ex3,
}

impl SiteVariant {
    /// Anchor multiset the variant expects: one element once (ex1, ex3) or
    /// one element twice (ex2).
    pub fn expected_anchor_type(&self) -> Vec<u32> {
        match self {
            SiteVariant::Ex1 | SiteVariant::Ex3 => vec![1],
            SiteVariant::Ex2 => vec![2],
        }
    }
}

/// The ternary ambient signature used by the single-site resamplers.
pub fn ternary_signature() -> Arc<Signature> {
    Arc::new(Signature::new(vec![("R".into(), 3)]).unwrap())
}

/// A single-site resampler on the full ternary class, anchored at a
/// multiset `s` (an element used once for ex1/ex3, twice for ex2). The
/// replacement arrays are fair coins derived from the seed.
pub fn single_site_resampler(s: &Multiset, variant: SiteVariant, seed_value: u64) -> Result<Kernel> {
    let mut counts: Vec<u32> = s.multiplicities().map(|(_, c)| c).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    if counts != variant.expected_anchor_type() {
        return Err(Error::Validation(format!(
            "variant {variant:?} needs an anchor of multiplicity type {:?}, got {:?}",
            variant.expected_anchor_type(),
            counts
        )));
    }
    let a = s.multiplicities().next().unwrap().0;
    let class = FiniteClass::full(ternary_signature());
    let tag = format!("single-site:{variant:?}:{a}:{seed_value}");
    Ok(Kernel::from_rule(class, UNBOUNDED, &tag, move |m| {
        let n = m.n() as u32;
        let mut out = m.clone();
        if a > n {
            return Ok(out);
        }
        match variant {
            SiteVariant::Ex1 => {
                for b in 1..=n {
                    for c in 1..=n {
                        let val = seed::bit(seed_value, "A", &[b as u64, c as u64]);
                        out.set(0, &[a, b, c], val)?;
                    }
                }
            }
            SiteVariant::Ex2 => {
                for c in 1..=n {
                    let val = seed::bit(seed_value, "A", &[c as u64]);
                    out.set(0, &[a, a, c], val)?;
                }
            }
            SiteVariant::Ex3 => {
                for b in 1..=n {
                    let val = seed::bit(seed_value, "A", &[b as u64]);
                    out.set(0, &[a, b, b], val)?;
                }
            }
        }
        Ok(out)
    }))
}

/// A kernel that locates its input inside `mtrunc` by greedy embedding and
/// reads the output off `ytrunc` at the found positions.
///
/// `n_max` is the largest size at which every class member embeds greedily
/// into `mtrunc` (capped by the class enumeration bound). Applying beyond
/// guaranteed sizes may fail with a not-found error when an embedding does
/// not exist at this truncation.
pub fn kernel_from_target(
    class: FiniteClass,
    mtrunc: &FiniteStructure,
    ytrunc: &FiniteStructure,
) -> Result<Kernel> {
    if mtrunc.n() != ytrunc.n() || mtrunc.signature() != ytrunc.signature() {
        return Err(Error::Validation(
            "target structures must share domain and signature".into(),
        ));
    }
    if mtrunc.signature() != class.signature() {
        return Err(Error::Validation(
            "target signature differs from the class signature".into(),
        ));
    }
    let mut n_max = 0;
    for n in 1..=class.enum_bound().min(mtrunc.n()) {
        let all_embed = class
            .enumerate(n)?
            .iter()
            .all(|s| canonical_embedding(s, mtrunc).is_ok());
        if all_embed {
            n_max = n;
        } else {
            break;
        }
    }
    let mtrunc = mtrunc.clone();
    let ytrunc = ytrunc.clone();
    let tag = format!("from-target:{}", mtrunc.n());
    Ok(Kernel::from_rule(class, n_max, &tag, move |m| {
        let rho = canonical_embedding(m, &mtrunc)?;
        ytrunc.apply_injection(&rho)
    }))
}

/// Composition `F` after `G`.
pub fn compose(f: &Kernel, g: &Kernel) -> Result<Kernel> {
    if f.class != g.class {
        return Err(Error::Domain(
            "composed kernels must share a class".into(),
        ));
    }
    let tag = format!("compose({},{})", f.tag, g.tag);
    let f2 = f.clone();
    let g2 = g.clone();
    Ok(Kernel::from_rule(
        f.class.clone(),
        f.n_max.min(g.n_max),
        &tag,
        move |m| f2.apply(&g2.apply(m)?),
    ))
}

/// The conjugated kernel `sigma F sigma^{-1}`: relabel the input by
/// `sigma`, apply `F`, relabel back.
///
/// `sigma` is a permutation of `{1..k}`, extended by the identity at larger
/// sizes. Inputs smaller than `k` are accepted only when `sigma` fixes
/// `{1..n}` setwise. Conjugation preserves coherence only for
/// conjugation-invariant kernels; audit with [`check_consistency`].
pub fn conjugate(f: &Kernel, sigma: &[u32]) -> Result<Kernel> {
    let k = sigma.len();
    let mut inverse = vec![0u32; k];
    let mut seen = vec![false; k];
    for (i, &v) in sigma.iter().enumerate() {
        if v == 0 || v as usize > k || seen[(v - 1) as usize] {
            return Err(Error::Validation("not a permutation".into()));
        }
        seen[(v - 1) as usize] = true;
        inverse[(v - 1) as usize] = (i + 1) as u32;
    }
    let tag = format!("conj({:?},{})", sigma, f.tag);
    let f2 = f.clone();
    let sigma = sigma.to_vec();
    Ok(Kernel::from_rule(
        f.class.clone(),
        f.n_max,
        &tag,
        move |m| {
            let n = m.n();
            let sig_n: Vec<u32> = (1..=n as u32)
                .map(|i| {
                    if (i as usize) <= sigma.len() {
                        sigma[(i - 1) as usize]
                    } else {
                        i
                    }
                })
                .collect();
            if sig_n.iter().any(|&v| v as usize > n) {
                return Err(Error::Domain(format!(
                    "conjugating permutation moves {{1..{n}}} outside itself"
                )));
            }
            let inv_n: Vec<u32> = (1..=n as u32)
                .map(|i| {
                    if (i as usize) <= inverse.len() {
                        inverse[(i - 1) as usize]
                    } else {
                        i
                    }
                })
                .collect();
            let relabeled = m.apply_injection(&sig_n)?;
            let image = f2.apply(&relabeled)?;
            image.apply_injection(&inv_n)
        },
    ))
}

/// Tabulates a kernel at one size: every member paired with its image.
pub fn tabulate(f: &Kernel, n: usize) -> Result<Vec<(FiniteStructure, FiniteStructure)>> {
    f.class
        .enumerate(n)?
        .into_iter()
        .map(|m| {
            let out = f.apply(&m)?;
            Ok((m, out))
        })
        .collect()
}

/// A kernel backed by explicit lookup tables per size, for test fixtures.
/// Sizes without a table are rejected at apply time.
pub fn from_tables(
    class: FiniteClass,
    tables: HashMap<usize, HashMap<FiniteStructure, FiniteStructure>>,
    tag: &str,
) -> Kernel {
    let n_max = tables.keys().max().copied().unwrap_or(0);
    Kernel::from_rule(class, n_max, tag, move |m| {
        tables
            .get(&m.n())
            .and_then(|t| t.get(m))
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("no table entry at size {}", m.n())))
    })
}

/// How a check explored the input space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckRegime {
    /// Every relevant input was tested.
    Exhaustive,
    /// A seeded sample of inputs was tested.
    Sampled {
        /// Number of sampled inputs.
        trials: usize,
    },
}

/// Outcome of a coherence check.
#[derive(Clone, Debug)]
pub enum ConsistencyReport {
    /// Restriction commutes with the kernel on every tested input.
    Pass {
        /// Exploration regime used.
        regime: CheckRegime,
    },
    /// A size-`n+1` input whose image restricts differently.
    Fail {
        /// The violating input.
        witness: FiniteStructure,
    },
}

const EXHAUSTIVE_LIMIT: u128 = 10_000;
const SAMPLED_TRIALS: usize = 1_000;

/// Checks coherence at size `n`: for inputs over `{1..n+1}`, applying the
/// kernel and restricting to `{1..n}` equals restricting first and applying
/// the kernel. Exhaustive when the class is small enough to enumerate,
/// otherwise sampled from the class limit law.
pub fn check_consistency(f: &Kernel, n: usize) -> Result<ConsistencyReport> {
    if n >= f.n_max {
        return Err(Error::Capacity(format!(
            "coherence at {n} needs inputs of size {} beyond n_max {}",
            n + 1,
            f.n_max
        )));
    }
    let class = &f.class;
    let exhaustive = class
        .count(n + 1)
        .map(|c| c <= EXHAUSTIVE_LIMIT)
        .unwrap_or(false)
        && n < class.enum_bound();
    let inputs: Vec<FiniteStructure> = if exhaustive {
        class.enumerate(n + 1)?
    } else {
        (0..SAMPLED_TRIALS as u64)
            .map(|i| class.sample_limit(n + 1, seed::derive(0xC0FFEE, "consistency", &[i])))
            .collect::<Result<Vec<_>>>()?
    };
    for big in inputs {
        let left = f.apply(&big)?.restrict(n)?;
        let right = f.apply(&big.restrict(n)?)?;
        if left != right {
            return Ok(ConsistencyReport::Fail { witness: big });
        }
    }
    Ok(ConsistencyReport::Pass {
        regime: if exhaustive {
            CheckRegime::Exhaustive
        } else {
            CheckRegime::Sampled {
                trials: SAMPLED_TRIALS,
            }
        },
    })
}

/// A labeled subset on which two inputs agree but their images differ.
#[derive(Clone, Debug)]
pub struct ConjInvWitness {
    /// The labeled subset of `{1..n}`.
    pub subset: Vec<u32>,
    /// First input.
    pub left: FiniteStructure,
    /// Second input.
    pub right: FiniteStructure,
}

/// Outcome of a conjugation-invariance check.
#[derive(Clone, Debug)]
pub enum ConjInvReport {
    /// The kernel's output on every labeled subset depends only on the
    /// input on that subset.
    Pass {
        /// Exploration regime used.
        regime: CheckRegime,
    },
    /// Violations found, one witness per violating subset.
    Fail {
        /// Exploration regime used.
        regime: CheckRegime,
        /// One witness per violating subset, in subset order.
        witnesses: Vec<ConjInvWitness>,
    },
}

fn trace_within(m: &FiniteStructure, subset: &[u32]) -> Vec<Vec<u32>> {
    let inside = |t: &Vec<u32>| t.iter().all(|v| subset.contains(v));
    let mut out = Vec::new();
    for rel in 0..m.signature().len() {
        for t in m.tuples(rel) {
            if inside(t) {
                let mut tagged = vec![rel as u32];
                tagged.extend_from_slice(t);
                out.push(tagged);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Checks conjugation invariance at size `n`: for every labeled subset `S`
/// of `{1..n}` and inputs agreeing on `S`, the images agree on `S`.
/// Exhaustive over all member pairs when the class at `n` is small enough,
/// otherwise sampled: random members paired with images under random
/// permutations fixing `S` pointwise.
pub fn check_conjugation_invariance(f: &Kernel, n: usize) -> Result<ConjInvReport> {
    if n > f.n_max {
        return Err(Error::Capacity(format!("size {n} above n_max",)));
    }
    let class = &f.class;
    let exhaustive = class
        .count(n)
        .map(|c| c <= EXHAUSTIVE_LIMIT)
        .unwrap_or(false)
        && n <= class.enum_bound();
    let mut witnesses: Vec<ConjInvWitness> = Vec::new();
    let subsets: Vec<Vec<u32>> = (1..=n as u32)
        .powerset()
        .filter(|s| !s.is_empty())
        .collect();
    if exhaustive {
        let members = class.enumerate(n)?;
        let images: Vec<FiniteStructure> = members
            .iter()
            .map(|m| f.apply(m))
            .collect::<Result<Vec<_>>>()?;
        for subset in &subsets {
            let mut groups: HashMap<Vec<Vec<u32>>, usize> = HashMap::new();
            let mut found = false;
            for (i, m) in members.iter().enumerate() {
                let key = trace_within(m, subset);
                match groups.entry(key) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(i);
                    }
                    std::collections::hash_map::Entry::Occupied(e) => {
                        let j = *e.get();
                        if trace_within(&images[i], subset) != trace_within(&images[j], subset) {
                            witnesses.push(ConjInvWitness {
                                subset: subset.clone(),
                                left: members[j].clone(),
                                right: m.clone(),
                            });
                            found = true;
                        }
                    }
                }
                if found {
                    break;
                }
            }
        }
        let regime = CheckRegime::Exhaustive;
        if witnesses.is_empty() {
            return Ok(ConjInvReport::Pass { regime });
        }
        return Ok(ConjInvReport::Fail { regime, witnesses });
    }
    let trials = 100_000;
    let mut rng = seed::rng(0xC0FFEE, "conjinv", &[n as u64]);
    let mut seen_subsets: HashMap<Vec<u32>, ()> = HashMap::new();
    for trial in 0..trials {
        let subset = &subsets[rng.gen_range(0..subsets.len())];
        if seen_subsets.contains_key(subset) {
            continue;
        }
        let m = class.sample_limit(n, seed::derive(0xC0FFEE, "conjinv-m", &[trial as u64]))?;
        // A random permutation fixing the subset pointwise.
        let mut outside: Vec<u32> = (1..=n as u32).filter(|v| !subset.contains(v)).collect();
        for i in (1..outside.len()).rev() {
            outside.swap(i, rng.gen_range(0..=i));
        }
        let mut perm: Vec<u32> = (1..=n as u32).collect();
        let mut it = outside.iter();
        for v in perm.iter_mut() {
            if !subset.contains(v) {
                *v = *it.next().unwrap();
            }
        }
        let m2 = m.apply_injection(&perm)?;
        if trace_within(&f.apply(&m)?, subset) != trace_within(&f.apply(&m2)?, subset) {
            seen_subsets.insert(subset.clone(), ());
            witnesses.push(ConjInvWitness {
                subset: subset.clone(),
                left: m,
                right: m2,
            });
        }
    }
    witnesses.sort_by(|a, b| a.subset.cmp(&b.subset));
    let regime = CheckRegime::Sampled { trials };
    if witnesses.is_empty() {
        Ok(ConjInvReport::Pass { regime })
    } else {
        Ok(ConjInvReport::Fail { regime, witnesses })
    }
}

/// Whether two specific inputs witness a conjugation-invariance violation
/// on the labeled subset: they agree on it, their images do not.
pub fn violates_on_subset(
    f: &Kernel,
    subset: &[u32],
    left: &FiniteStructure,
    right: &FiniteStructure,
) -> Result<bool> {
    if trace_within(left, subset) != trace_within(right, subset) {
        return Err(Error::Domain(
            "inputs differ on the subset; not a valid probe".into(),
        ));
    }
    Ok(trace_within(&f.apply(left)?, subset) != trace_within(&f.apply(right)?, subset))
}

/// A seeded generator of kernels, representing a probability measure on
/// kernel space.
#[derive(Clone)]
pub struct KernelSampler {
    class: FiniteClass,
    tag: String,
    make: Arc<dyn Fn(u64) -> Result<Kernel> + Send + Sync>,
}

impl fmt::Debug for KernelSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSampler")
            .field("class", &self.class.id())
            .field("tag", &self.tag)
            .finish()
    }
}

impl KernelSampler {
    /// A sampler from an arbitrary seeded constructor.
    pub fn from_fn<F>(class: FiniteClass, tag: &str, make: F) -> KernelSampler
    where
        F: Fn(u64) -> Result<Kernel> + Send + Sync + 'static,
    {
        KernelSampler {
            class,
            tag: tag.to_string(),
            make: Arc::new(make),
        }
    }

    /// The point mass at a fixed kernel.
    pub fn point_mass(kernel: Kernel) -> KernelSampler {
        let tag = format!("point:{}", kernel.tag());
        let class = kernel.class().clone();
        KernelSampler::from_fn(class, &tag, move |_| Ok(kernel.clone()))
    }

    /// Cut-and-paste kernels with fresh coin arrays per draw.
    pub fn cutpaste(theta0: f64, theta1: f64) -> Result<KernelSampler> {
        cutpaste_kernel(theta0, theta1, 0)?;
        let class = FiniteClass::builtin(ClassKind::Sets)?;
        let tag = format!("cutpaste:{theta0}:{theta1}");
        Ok(KernelSampler::from_fn(class, &tag, move |s| {
            cutpaste_kernel(theta0, theta1, s)
        }))
    }

    /// One coagulation event of the pairwise-merger dynamics: a uniformly
    /// random pair of block indices from `{1..m}` merged.
    pub fn kingman_step(m: usize) -> Result<KernelSampler> {
        if m < 2 {
            return Err(Error::Domain("need at least two indices to merge".into()));
        }
        let class = FiniteClass::builtin(ClassKind::Partitions)?;
        let tag = format!("kingman-step:{m}");
        Ok(KernelSampler::from_fn(class, &tag, move |s| {
            let mut rng = seed::rng(s, "pair", &[]);
            let i = rng.gen_range(1..=m as u32);
            let j = loop {
                let j = rng.gen_range(1..=m as u32);
                if j != i {
                    break j;
                }
            };
            let (i, j) = (i.min(j), i.max(j));
            let pattern = partition_from_blocks(m, &[&[i, j]])?;
            coag_kernel(&pattern)
        }))
    }

    /// A deliberately non-exchangeable kernel: element 1 is always added to
    /// the unary relation, everything else passes through.
    pub fn pin_first_element() -> Result<KernelSampler> {
        let class = FiniteClass::builtin(ClassKind::Sets)?;
        let rule_class = class.clone();
        let kernel = Kernel::from_rule(rule_class, UNBOUNDED, "pin-first", |m| {
            let mut out = m.clone();
            if m.n() >= 1 {
                out.insert(0, &[1])?;
            }
            Ok(out)
        });
        Ok(KernelSampler::point_mass(kernel))
    }

    /// A deliberately size-reading kernel: complements when the domain size
    /// is even, identity when odd. Breaks coherence across sizes.
    pub fn size_parity() -> Result<KernelSampler> {
        let class = FiniteClass::builtin(ClassKind::Sets)?;
        let comp = complement_kernel(class.clone());
        let kernel = Kernel::from_rule(class, UNBOUNDED, "size-parity", move |m| {
            if m.n() % 2 == 0 {
                comp.apply(m)
            } else {
                Ok(m.clone())
            }
        });
        Ok(KernelSampler::point_mass(kernel))
    }

    /// The class the emitted kernels act on.
    pub fn class(&self) -> &FiniteClass {
        &self.class
    }

    /// Metadata tag.
    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Whether this sampler is the point mass at the identity kernel.
    pub fn is_identity_point_mass(&self) -> bool {
        self.tag == "point:identity"
    }

    /// Draws the kernel for a seed.
    pub fn sample(&self, seed_value: u64) -> Result<Kernel> {
        (self.make)(seed_value)
    }
}
