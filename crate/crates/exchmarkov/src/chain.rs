//! Discrete-time dynamics: starting from a structure, repeatedly draw a
//! random kernel and apply it.
//!
//! The chain law is determined by a [`KernelSampler`]; every run is
//! reproducible from a single seed. Diagnostics compare empirical one-step
//! and multi-step laws: exchangeability (relabeling the input relabels the
//! output law) and projectivity (restricting the chain gives the chain of
//! the restriction).

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;

use crate::kernels::KernelSampler;
use crate::structures::FiniteStructure;
use crate::{seed, Error, Result};

/// A realized discrete-time path. `states[0]` is the initial structure and
/// `states[m]` the state after `m` steps, all over the same domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    /// Domain size of every state.
    pub n: usize,
    /// The visited states, initial state first.
    pub states: Vec<FiniteStructure>,
}

impl Trajectory {
    /// Number of transitions taken.
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }
}

/// Runs `steps` transitions from `m0`, drawing an independent kernel per
/// step from the sampler. Step `m` uses the seed derived from
/// `(seed, "step", m)`, so prefixes of a longer run coincide with shorter
/// runs.
pub fn run_chain(
    sampler: &KernelSampler,
    m0: &FiniteStructure,
    steps: usize,
    seed_value: u64,
) -> Result<Trajectory> {
    let n = m0.n();
    if !sampler.class().contains(m0) {
        return Err(Error::Validation(
            "initial structure is not in the sampler's class".into(),
        ));
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(m0.clone());
    for m in 0..steps {
        let kernel = sampler
            .sample(seed::derive(seed_value, "step", &[m as u64]))
            .map_err(|e| e.with_context(&format!("step {m}")))?;
        let next = kernel
            .apply(states.last().expect("nonempty"))
            .map_err(|e| e.with_context(&format!("step {m}")))?;
        states.push(next);
    }
    Ok(Trajectory { n, states })
}

/// Empirical law of the state after `steps` transitions from `m0`.
#[derive(Clone, Debug)]
pub struct TransitionEstimate {
    /// Outcomes with relative frequency and its binomial standard error,
    /// most frequent first.
    pub outcomes: Vec<(FiniteStructure, f64, f64)>,
    /// Number of independent replicas used.
    pub replicas: usize,
}

impl TransitionEstimate {
    /// Frequency of one outcome (0 if never seen).
    pub fn frequency(&self, m: &FiniteStructure) -> f64 {
        self.outcomes
            .iter()
            .find(|(s, _, _)| s == m)
            .map(|&(_, f, _)| f)
            .unwrap_or(0.0)
    }
}

/// Estimates the `steps`-step transition law from `m0` over independent
/// replicas. Replica `r` runs with the seed derived from
/// `(seed, "replica", r)`.
pub fn estimate_transition(
    sampler: &KernelSampler,
    m0: &FiniteStructure,
    steps: usize,
    replicas: usize,
    seed_value: u64,
) -> Result<TransitionEstimate> {
    if replicas == 0 {
        return Err(Error::Validation("need at least one replica".into()));
    }
    let mut counts: HashMap<FiniteStructure, u64> = HashMap::new();
    for r in 0..replicas {
        let traj = run_chain(
            sampler,
            m0,
            steps,
            seed::derive(seed_value, "replica", &[r as u64]),
        )
        .map_err(|e| e.with_context(&format!("replica {r}")))?;
        *counts
            .entry(traj.states.into_iter().last().expect("nonempty"))
            .or_insert(0) += 1;
    }
    let total = replicas as f64;
    let mut outcomes: Vec<(FiniteStructure, f64, f64)> = counts
        .into_iter()
        .map(|(s, c)| {
            let p = c as f64 / total;
            (s, p, (p * (1.0 - p) / total).sqrt())
        })
        .collect();
    outcomes.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(TransitionEstimate { outcomes, replicas })
}

fn total_variation(
    a: &HashMap<FiniteStructure, u64>,
    b: &HashMap<FiniteStructure, u64>,
    trials: f64,
) -> f64 {
    // Summing in sorted key order keeps the float result independent of
    // hash-map iteration order, so repeated runs print identical values.
    let keys: std::collections::BTreeSet<&FiniteStructure> =
        a.keys().chain(b.keys()).collect();
    let mut tv = 0.0;
    for k in keys {
        let pa = a.get(k).copied().unwrap_or(0) as f64 / trials;
        let pb = b.get(k).copied().unwrap_or(0) as f64 / trials;
        tv += (pa - pb).abs();
    }
    tv / 2.0
}

/// Two-sample threshold for comparing empirical laws: the requested
/// tolerance plus the expected bias and fluctuation of the empirical total
/// variation between two histograms of `replicas` draws over `categories`
/// outcomes.
pub fn tv_threshold(tol: f64, categories: u128, replicas: usize) -> f64 {
    let r = replicas as f64;
    tol + (categories as f64 / (2.0 * r)).sqrt() + 2.12 / r.sqrt()
}

/// One exchangeability comparison: input structure, relabeling, distance.
#[derive(Clone, Debug)]
pub struct ExchCase {
    /// Input structure the kernels were applied to.
    pub input: FiniteStructure,
    /// The relabeling tested.
    pub sigma: Vec<u32>,
    /// Empirical total variation between the two one-step laws.
    pub tv: f64,
}

/// Exchangeability check result.
#[derive(Clone, Debug)]
pub struct ExchReport {
    /// Whether every comparison stayed below the threshold.
    pub pass: bool,
    /// The threshold every comparison was held to.
    pub threshold: f64,
    /// The largest observed distance and where it happened.
    pub worst: ExchCase,
    /// Number of replicas per histogram.
    pub replicas: usize,
    /// Number of (input, relabeling) pairs compared.
    pub comparisons: usize,
}

/// Checks one-step exchangeability of a sampler on the whole class at size
/// `n`: for every member `S` and every permutation `sigma`, the law of
/// `F(S^sigma)` must match the law of `F(S)^sigma`. The two laws are
/// estimated from independent histograms; the threshold is
/// [`tv_threshold`] with the class count at `n` as category count.
pub fn check_exchangeability(
    sampler: &KernelSampler,
    n: usize,
    replicas: usize,
    tol: f64,
    seed_value: u64,
) -> Result<ExchReport> {
    let class = sampler.class();
    let count = class
        .count(n)
        .filter(|&c| c <= 10_000)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "class too large at size {n} for exhaustive exchangeability checking"
            ))
        })?;
    if n > class.enum_bound() {
        return Err(Error::Capacity(format!(
            "size {n} is above the enumeration bound"
        )));
    }
    if replicas == 0 {
        return Err(Error::Validation("need at least one replica".into()));
    }
    let members = class.enumerate(n)?;
    let threshold = tv_threshold(tol, count, replicas);
    let mut worst: Option<ExchCase> = None;
    let mut comparisons = 0usize;
    for (si, s) in members.iter().enumerate() {
        // One base histogram of F(S) per input, permuted per sigma; the
        // relabeled side is sampled fresh for each sigma, so each
        // comparison is still between independent histograms.
        let mut base: HashMap<FiniteStructure, u64> = HashMap::new();
        for r in 0..replicas {
            let f = sampler.sample(seed::derive(seed_value, "exchB", &[si as u64, r as u64]))?;
            *base.entry(f.apply(s)?).or_insert(0) += 1;
        }
        for (pi, perm) in (1..=n as u32).permutations(n).enumerate() {
            let s_perm = s.apply_injection(&perm)?;
            let mut lhs: HashMap<FiniteStructure, u64> = HashMap::new();
            for r in 0..replicas {
                let f = sampler.sample(seed::derive(
                    seed_value,
                    "exchA",
                    &[si as u64, pi as u64, r as u64],
                ))?;
                *lhs.entry(f.apply(&s_perm)?).or_insert(0) += 1;
            }
            let mut rhs: HashMap<FiniteStructure, u64> = HashMap::new();
            for (m, c) in &base {
                *rhs.entry(m.apply_injection(&perm)?).or_insert(0) += c;
            }
            let tv = total_variation(&lhs, &rhs, replicas as f64);
            comparisons += 1;
            if worst.as_ref().map(|w| tv > w.tv).unwrap_or(true) {
                worst = Some(ExchCase {
                    input: s.clone(),
                    sigma: perm.clone(),
                    tv,
                });
            }
        }
    }
    let worst = worst.ok_or_else(|| Error::Domain("no comparisons made".into()))?;
    Ok(ExchReport {
        pass: worst.tv <= threshold,
        threshold,
        worst,
        replicas,
        comparisons,
    })
}

/// Projectivity check result.
#[derive(Clone, Debug)]
pub struct ProjReport {
    /// Whether every step's comparison stayed below the threshold.
    pub pass: bool,
    /// The threshold every comparison was held to.
    pub threshold: f64,
    /// Distance between the restricted law and the small-domain law at
    /// each step (step index starts at 1).
    pub per_step: Vec<(usize, f64)>,
    /// Step with the largest distance.
    pub worst_step: usize,
    /// Number of replicas per histogram.
    pub replicas: usize,
}

/// Checks projectivity of a sampler: the chain started at `m0` over
/// `{1..n+1}`, restricted to `{1..n}`, must agree in law at every step
/// with the chain started at the restriction of `m0`. Laws are compared
/// stepwise over independent replica sets.
pub fn check_projectivity(
    sampler: &KernelSampler,
    m0: &FiniteStructure,
    steps: usize,
    replicas: usize,
    tol: f64,
    seed_value: u64,
) -> Result<ProjReport> {
    let big = m0.n();
    if big < 2 {
        return Err(Error::Validation(
            "initial structure must have at least two elements".into(),
        ));
    }
    if steps == 0 || replicas == 0 {
        return Err(Error::Validation(
            "need at least one step and one replica".into(),
        ));
    }
    let n = big - 1;
    let count = sampler
        .class()
        .count(n)
        .filter(|&c| c <= 10_000)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "class too large at size {n} for projectivity histograms"
            ))
        })?;
    if n > sampler.class().enum_bound() {
        return Err(Error::Capacity(format!(
            "size {n} is above the enumeration bound"
        )));
    }
    let small0 = m0.restrict(n)?;
    let mut big_hists: Vec<HashMap<FiniteStructure, u64>> = vec![HashMap::new(); steps];
    for r in 0..replicas {
        let traj = run_chain(
            sampler,
            m0,
            steps,
            seed::derive(seed_value, "projbig", &[r as u64]),
        )?;
        for (k, hist) in big_hists.iter_mut().enumerate() {
            *hist.entry(traj.states[k + 1].restrict(n)?).or_insert(0) += 1;
        }
    }
    let mut small_hists: Vec<HashMap<FiniteStructure, u64>> = vec![HashMap::new(); steps];
    for r in 0..replicas {
        let traj = run_chain(
            sampler,
            &small0,
            steps,
            seed::derive(seed_value, "projsmall", &[r as u64]),
        )?;
        for (k, hist) in small_hists.iter_mut().enumerate() {
            *hist.entry(traj.states[k + 1].clone()).or_insert(0) += 1;
        }
    }
    let threshold = tv_threshold(tol, count, replicas);
    let mut per_step = Vec::with_capacity(steps);
    let mut worst_step = 1;
    let mut worst_tv = -1.0;
    for k in 0..steps {
        let tv = total_variation(&big_hists[k], &small_hists[k], replicas as f64);
        if tv > worst_tv {
            worst_tv = tv;
            worst_step = k + 1;
        }
        per_step.push((k + 1, tv));
    }
    Ok(ProjReport {
        pass: worst_tv <= threshold,
        threshold,
        per_step,
        worst_step,
        replicas,
    })
}

/// Collects state frequencies of many one-step draws, keyed by outcome.
/// Convenience for tests and the acceptance suite.
pub fn one_step_histogram(
    sampler: &KernelSampler,
    m0: &FiniteStructure,
    replicas: usize,
    seed_value: u64,
) -> Result<BTreeMap<FiniteStructure, u64>> {
    let mut hist = BTreeMap::new();
    for r in 0..replicas {
        let f = sampler.sample(seed::derive(seed_value, "onestep", &[r as u64]))?;
        *hist.entry(f.apply(m0)?).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ClassKind, FiniteClass};
    use crate::kernels::KernelSampler;
    use crate::structures::FiniteStructure;

    fn sets_class() -> FiniteClass {
        FiniteClass::builtin(ClassKind::Sets).unwrap()
    }

    fn set_of(n: usize, elems: &[u32]) -> FiniteStructure {
        let mut m = FiniteStructure::empty(sets_class().signature().clone(), n);
        for &e in elems {
            m.insert(0, &[e]).unwrap();
        }
        m
    }

    #[test]
    fn chain_is_reproducible_and_prefix_stable() {
        let sampler = KernelSampler::cutpaste(0.3, 0.6).unwrap();
        let m0 = set_of(4, &[1, 3]);
        let a = run_chain(&sampler, &m0, 10, 99).unwrap();
        let b = run_chain(&sampler, &m0, 10, 99).unwrap();
        assert_eq!(a, b);
        let shorter = run_chain(&sampler, &m0, 4, 99).unwrap();
        assert_eq!(&a.states[..5], &shorter.states[..]);
        assert_eq!(a.steps(), 10);
        assert_eq!(a.n, 4);
    }

    #[test]
    fn transition_estimate_matches_bernoulli_law() {
        // One cut-and-paste step from the empty set resamples each element
        // independently: an absent element becomes present with probability
        // theta0 under a freshly drawn kernel.
        let sampler = KernelSampler::cutpaste(0.25, 0.25).unwrap();
        let m0 = set_of(1, &[]);
        let est = estimate_transition(&sampler, &m0, 1, 20_000, 5).unwrap();
        let on = set_of(1, &[1]);
        assert!((est.frequency(&on) - 0.25).abs() < 0.01);
        let total: f64 = est.outcomes.iter().map(|(_, p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exchangeability_passes_for_cutpaste_and_fails_for_pinning() {
        let good = KernelSampler::cutpaste(0.2, 0.7).unwrap();
        let report = check_exchangeability(&good, 3, 2_000, 0.05, 11).unwrap();
        assert!(report.pass, "worst tv {} at threshold {}", report.worst.tv, report.threshold);
        assert_eq!(report.comparisons, 8 * 6);

        let bad = KernelSampler::pin_first_element().unwrap();
        let report = check_exchangeability(&bad, 3, 2_000, 0.05, 11).unwrap();
        assert!(!report.pass);
        // The violating relabeling must move element 1.
        assert_ne!(report.worst.sigma[0], 1);
    }

    #[test]
    fn projectivity_passes_for_cutpaste_and_fails_for_parity() {
        let good = KernelSampler::cutpaste(0.4, 0.4).unwrap();
        let m0 = set_of(4, &[2, 4]);
        let report = check_projectivity(&good, &m0, 3, 4_000, 0.05, 21).unwrap();
        assert!(report.pass);
        assert_eq!(report.per_step.len(), 3);

        let bad = KernelSampler::size_parity().unwrap();
        let report = check_projectivity(&bad, &m0, 1, 4_000, 0.05, 21).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn chain_rejects_foreign_initial_state() {
        let sampler = KernelSampler::cutpaste(0.5, 0.5).unwrap();
        let graphs = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let g = FiniteStructure::empty(graphs.signature().clone(), 3);
        assert!(matches!(
            run_chain(&sampler, &g, 1, 0),
            Err(crate::Error::Validation(_))
        ));
    }
}
