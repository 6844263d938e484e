//! Densities and combinatorial limits: how often a small structure appears
//! inside a large one, and what a trajectory looks like after projecting
//! every state to such densities.
//!
//! The density of `S` over `{1..m}` in `M` over `{1..n}` is the fraction of
//! the `n(n-1)...(n-m+1)` injections under which the image of `M` equals
//! `S`. Densities over all of `X_[m]` sum to 1, so the family of densities
//! of a growing structure behaves like a probability law on small
//! structures; the metric [`rho_hat`] compares two empirical samples of
//! structures through those laws.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chain::Trajectory;
use crate::ctprocess::CTTrajectory;
use crate::structures::FiniteStructure;
use crate::{exec, seed, Error, Result};

/// An exactly computed density: a rational number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactDensity {
    /// Injections inducing the pattern.
    pub hits: u64,
    /// All injections.
    pub injections: u64,
}

impl ExactDensity {
    /// The density as a float.
    pub fn value(&self) -> f64 {
        if self.injections == 0 {
            0.0
        } else {
            self.hits as f64 / self.injections as f64
        }
    }
}

/// The exact density of `pattern` in `host`: the fraction of injections
/// from the pattern's domain into the host's under which the host pulls
/// back to the pattern. Zero when the pattern is larger than the host.
pub fn density_exact(pattern: &FiniteStructure, host: &FiniteStructure) -> Result<ExactDensity> {
    if pattern.signature() != host.signature() {
        return Err(Error::Domain("signatures differ".into()));
    }
    let m = pattern.n();
    let n = host.n();
    if m > n {
        return Ok(ExactDensity {
            hits: 0,
            injections: 0,
        });
    }
    if m == 0 {
        return Ok(ExactDensity {
            hits: 1,
            injections: 1,
        });
    }
    let mut hits = 0u64;
    let mut injections = 0u64;
    for phi in (1..=n as u32).permutations(m) {
        injections += 1;
        if host.apply_injection(&phi)? == *pattern {
            hits += 1;
        }
    }
    Ok(ExactDensity { hits, injections })
}

/// A sampled density estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityEstimate {
    /// Fraction of sampled injections inducing the pattern.
    pub value: f64,
    /// Binomial standard error of the estimate.
    pub stderr: f64,
    /// Number of injections sampled.
    pub samples: usize,
}

fn random_injection<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<u32> {
    let mut phi: Vec<u32> = Vec::with_capacity(m);
    while phi.len() < m {
        let v = rng.gen_range(1..=n as u32);
        if !phi.contains(&v) {
            phi.push(v);
        }
    }
    phi
}

/// Estimates the density of `pattern` in `host` from uniformly random
/// injections. Unbiased for [`density_exact`].
pub fn density_sampled(
    pattern: &FiniteStructure,
    host: &FiniteStructure,
    samples: usize,
    seed_value: u64,
) -> Result<DensityEstimate> {
    if pattern.signature() != host.signature() {
        return Err(Error::Domain("signatures differ".into()));
    }
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let m = pattern.n();
    let n = host.n();
    if m > n {
        return Ok(DensityEstimate {
            value: 0.0,
            stderr: 0.0,
            samples,
        });
    }
    let hits: Vec<u64> = exec::par_map(samples, |i| {
        let mut rng = seed::rng(seed_value, "inj", &[i as u64]);
        let phi = random_injection(&mut rng, m, n);
        match host.apply_injection(&phi) {
            Ok(image) if image == *pattern => 1,
            _ => 0,
        }
    });
    let h: u64 = hits.iter().sum();
    let p = h as f64 / samples as f64;
    Ok(DensityEstimate {
        value: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// How to evaluate a density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMethod {
    /// Enumerate every injection.
    Exact,
    /// Sample this many random injections.
    Sampled(usize),
    /// Exact for hosts of at most 12 elements and patterns of at most 3;
    /// otherwise sampled with this many injections.
    Auto(usize),
}

/// A density by the requested method: the estimate's `stderr` is 0 when
/// the computation was exact.
pub fn density(
    pattern: &FiniteStructure,
    host: &FiniteStructure,
    method: DensityMethod,
    seed_value: u64,
) -> Result<DensityEstimate> {
    let exact = match method {
        DensityMethod::Exact => true,
        DensityMethod::Sampled(_) => false,
        DensityMethod::Auto(_) => host.n() <= 12 && pattern.n() <= 3,
    };
    if exact {
        let d = density_exact(pattern, host)?;
        Ok(DensityEstimate {
            value: d.value(),
            stderr: 0.0,
            samples: 0,
        })
    } else {
        let samples = match method {
            DensityMethod::Sampled(s) | DensityMethod::Auto(s) => s,
            DensityMethod::Exact => unreachable!(),
        };
        density_sampled(pattern, host, samples, seed_value)
    }
}

/// Densities of one representative per isomorphism class, grouped by
/// pattern size. Per size the values sum to 1.
#[derive(Clone, Debug)]
pub struct DensityVector {
    /// Representatives with their isomorphism-class densities, by size.
    pub by_size: BTreeMap<usize, Vec<(FiniteStructure, f64)>>,
}

impl DensityVector {
    /// Density of the isomorphism class of `pattern` (0 when absent).
    pub fn value(&self, pattern: &FiniteStructure) -> Result<f64> {
        let Some(entries) = self.by_size.get(&pattern.n()) else {
            return Ok(0.0);
        };
        for (rep, v) in entries {
            if rep.is_isomorphic(pattern)? {
                return Ok(*v);
            }
        }
        Ok(0.0)
    }
}

/// The combinatorial limit vector of a structure: for every pattern size
/// up to `size_cap`, the frequency of each isomorphism class among induced
/// substructures. Exact by enumeration for hosts of at most 12 elements
/// and patterns of at most 3 elements, sampled otherwise.
pub fn limit_vector(
    host: &FiniteStructure,
    size_cap: usize,
    samples: usize,
    seed_value: u64,
) -> Result<DensityVector> {
    if size_cap > 5 {
        return Err(Error::Capacity(
            "limit vectors are capped at pattern size 5".into(),
        ));
    }
    if size_cap == 0 || samples == 0 {
        return Err(Error::Validation(
            "need a positive size cap and sample count".into(),
        ));
    }
    let n = host.n();
    let mut by_size = BTreeMap::new();
    for k in 1..=size_cap.min(n) {
        let mut reps: Vec<(FiniteStructure, u64)> = Vec::new();
        let mut total = 0u64;
        let mut record = |image: FiniteStructure| -> Result<()> {
            total += 1;
            for (rep, c) in reps.iter_mut() {
                if rep.is_isomorphic(&image)? {
                    *c += 1;
                    return Ok(());
                }
            }
            reps.push((image, 1));
            Ok(())
        };
        if n <= 12 && k <= 3 {
            for phi in (1..=n as u32).permutations(k) {
                record(host.apply_injection(&phi)?)?;
            }
        } else {
            for i in 0..samples {
                let mut rng = seed::rng(seed_value, "vec", &[k as u64, i as u64]);
                let phi = random_injection(&mut rng, k, n);
                record(host.apply_injection(&phi)?)?;
            }
        }
        let entries = reps
            .into_iter()
            .map(|(rep, c)| (rep, c as f64 / total as f64))
            .collect();
        by_size.insert(k, entries);
    }
    Ok(DensityVector { by_size })
}

/// A truncated distance between two empirical sample sets of structures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoReport {
    /// Truncated distance value.
    pub value: f64,
    /// Upper bound on the truncated-away tail.
    pub tail_bound: f64,
    /// Truncation size used.
    pub n_cap: usize,
}

/// Compares two sample sets of structures through their restriction laws:
/// the sum over sizes `k <= n_cap` of `2^-k` times the absolute difference
/// of empirical restriction frequencies over `{1..k}`. The discarded tail
/// is at most `2^(1-n_cap)`, reported alongside. Symmetric and triangle,
/// but identical laws at finite sample size give small positive values.
pub fn rho_hat(
    a: &[FiniteStructure],
    b: &[FiniteStructure],
    n_cap: usize,
) -> Result<RhoReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Validation("both sample sets must be nonempty".into()));
    }
    if n_cap == 0 {
        return Err(Error::Validation("truncation size must be positive".into()));
    }
    if n_cap > 16 {
        return Err(Error::Capacity(
            "restriction histograms are capped at size 16".into(),
        ));
    }
    for m in a.iter().chain(b) {
        if m.n() < n_cap {
            return Err(Error::Domain(format!(
                "sample over {} elements cannot be restricted to {n_cap}",
                m.n()
            )));
        }
    }
    let mut value = 0.0;
    for k in 1..=n_cap {
        // Integer counts in ordered maps keep the float summation order
        // canonical, so the result is symmetric and run-deterministic.
        let mut count_a: BTreeMap<FiniteStructure, u64> = BTreeMap::new();
        for m in a {
            *count_a.entry(m.restrict(k)?).or_insert(0) += 1;
        }
        let mut count_b: BTreeMap<FiniteStructure, u64> = BTreeMap::new();
        for m in b {
            *count_b.entry(m.restrict(k)?).or_insert(0) += 1;
        }
        let mut diff = 0.0;
        let keys: std::collections::BTreeSet<&FiniteStructure> =
            count_a.keys().chain(count_b.keys()).collect();
        for s in keys {
            let pa = count_a.get(s).copied().unwrap_or(0) as f64 / a.len() as f64;
            let pb = count_b.get(s).copied().unwrap_or(0) as f64 / b.len() as f64;
            diff += (pa - pb).abs();
        }
        value += diff / (1u64 << k) as f64;
    }
    Ok(RhoReport {
        value,
        tail_bound: 2.0 / (1u64 << n_cap) as f64,
        n_cap,
    })
}

/// One point of a projected trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjRecord {
    /// Jump time (continuous) or step index as a float (discrete).
    pub time: f64,
    /// Index into the probe list.
    pub probe: usize,
    /// Sampled density of the probe in the state at that time.
    pub estimate: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
}

fn project_states(
    states: &[(f64, &FiniteStructure)],
    probes: &[FiniteStructure],
    samples: usize,
    seed_value: u64,
) -> Result<Vec<ProjRecord>> {
    if probes.is_empty() {
        return Err(Error::Validation("need at least one probe".into()));
    }
    for p in probes {
        if p.n() > 5 {
            return Err(Error::Capacity(
                "probe structures are capped at 5 elements".into(),
            ));
        }
    }
    let tasks: Vec<(usize, usize)> = (0..states.len())
        .cartesian_product(0..probes.len())
        .collect();
    let results: Vec<Result<ProjRecord>> = exec::par_map(tasks.len(), |t| {
        let (si, pi) = tasks[t];
        let (time, state) = states[si];
        let est = density_sampled(
            &probes[pi],
            state,
            samples,
            seed::derive(seed_value, "proj", &[si as u64, pi as u64]),
        )?;
        Ok(ProjRecord {
            time,
            probe: pi,
            estimate: est.value,
            stderr: est.stderr,
        })
    });
    results.into_iter().collect()
}

/// Projects a continuous-time path to probe densities: one record per
/// probe at time 0 and after every jump.
pub fn project_ct(
    traj: &CTTrajectory,
    probes: &[FiniteStructure],
    samples: usize,
    seed_value: u64,
) -> Result<Vec<ProjRecord>> {
    let mut states: Vec<(f64, &FiniteStructure)> = vec![(0.0, &traj.initial)];
    for (t, s) in &traj.jumps {
        states.push((*t, s));
    }
    project_states(&states, probes, samples, seed_value)
}

/// Projects a discrete-time path to probe densities: one record per probe
/// per state, timed by step index.
pub fn project_chain(
    traj: &Trajectory,
    probes: &[FiniteStructure],
    samples: usize,
    seed_value: u64,
) -> Result<Vec<ProjRecord>> {
    let states: Vec<(f64, &FiniteStructure)> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (i as f64, s))
        .collect();
    project_states(&states, probes, samples, seed_value)
}

/// One checkpoint of a reverse-martingale diagnostic.
#[derive(Clone, Debug)]
pub struct MartingalePoint {
    /// Restriction size.
    pub k: usize,
    /// Density of the pattern in the restriction to `{1..k}`.
    pub estimate: f64,
    /// Standard error (0 for exact evaluations).
    pub stderr: f64,
}

/// Reverse-martingale diagnostic report.
#[derive(Clone, Debug)]
pub struct MartingaleReport {
    /// Estimates at the requested restriction sizes.
    pub points: Vec<MartingalePoint>,
    /// Absolute successive differences of the estimates.
    pub diffs: Vec<f64>,
}

/// Tracks the density of `pattern` in the restrictions `M|{1..k}` across
/// increasing checkpoints. For a structure sampled from an exchangeable
/// law this sequence converges backwards, so successive differences
/// shrink.
pub fn reverse_martingale_check(
    host: &FiniteStructure,
    pattern: &FiniteStructure,
    checkpoints: &[usize],
    samples: usize,
    seed_value: u64,
) -> Result<MartingaleReport> {
    if checkpoints.is_empty() {
        return Err(Error::Validation("need at least one checkpoint".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("checkpoints must be increasing".into()));
    }
    if *checkpoints.last().expect("nonempty") > host.n() {
        return Err(Error::Domain(
            "checkpoints cannot exceed the host size".into(),
        ));
    }
    let mut points = Vec::with_capacity(checkpoints.len());
    for (i, &k) in checkpoints.iter().enumerate() {
        let restricted = host.restrict(k)?;
        let est = density(
            pattern,
            &restricted,
            DensityMethod::Auto(samples),
            seed::derive(seed_value, "mart", &[i as u64]),
        )?;
        points.push(MartingalePoint {
            k,
            estimate: est.value,
            stderr: est.stderr,
        });
    }
    let diffs = points
        .windows(2)
        .map(|w| (w[1].estimate - w[0].estimate).abs())
        .collect();
    Ok(MartingaleReport { points, diffs })
}

/// Dissociation check result.
#[derive(Clone, Debug)]
pub struct DissociationReport {
    /// Whether independence was not rejected (p > 0.01).
    pub pass: bool,
    /// Pearson chi-square statistic of the 2x2 indicator table.
    pub statistic: f64,
    /// Its p-value with one degree of freedom.
    pub p_value: f64,
    /// Joint counts of (front matches `s`, back matches `t`).
    pub table: [[u64; 2]; 2],
}

/// Tests whether a structure generator's restrictions to the disjoint
/// windows `{1..a}` and `{a+1..a+b}` are independent, through the
/// indicators of inducing `s` and `t` respectively. Pearson chi-square on
/// the 2x2 indicator table; pass when p > 0.01. Degenerate indicators
/// (one margin empty) carry no evidence of dependence and pass.
pub fn check_dissociation<G>(
    generate: G,
    s: &FiniteStructure,
    t: &FiniteStructure,
    samples: usize,
    seed_value: u64,
) -> Result<DissociationReport>
where
    G: Fn(u64) -> Result<FiniteStructure>,
{
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let a = s.n();
    let b = t.n();
    if a == 0 || b == 0 {
        return Err(Error::Validation("windows must be nonempty".into()));
    }
    let back: Vec<u32> = ((a + 1) as u32..=(a + b) as u32).collect();
    let mut table = [[0u64; 2]; 2];
    for i in 0..samples {
        let x = generate(seed::derive(seed_value, "dissoc", &[i as u64]))?;
        if x.n() < a + b {
            return Err(Error::Domain(format!(
                "generated structure over {} elements is smaller than the windows {a}+{b}",
                x.n()
            )));
        }
        let front_hit = x.restrict(a)? == *s;
        let back_hit = x.restrict_to(&back)? == *t;
        table[usize::from(front_hit)][usize::from(back_hit)] += 1;
    }
    let row: [f64; 2] = [
        (table[0][0] + table[0][1]) as f64,
        (table[1][0] + table[1][1]) as f64,
    ];
    let col: [f64; 2] = [
        (table[0][0] + table[1][0]) as f64,
        (table[0][1] + table[1][1]) as f64,
    ];
    let total = samples as f64;
    if row.contains(&0.0) || col.contains(&0.0) {
        return Ok(DissociationReport {
            pass: true,
            statistic: 0.0,
            p_value: 1.0,
            table,
        });
    }
    let mut statistic = 0.0;
    for (i, r) in row.iter().enumerate() {
        for (j, c) in col.iter().enumerate() {
            let expected = r * c / total;
            let observed = table[i][j] as f64;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let chi = ChiSquared::new(1.0)
        .map_err(|e| Error::Domain(format!("chi-square setup: {e}")))?;
    let p_value = 1.0 - chi.cdf(statistic);
    Ok(DissociationReport {
        pass: p_value > 0.01,
        statistic,
        p_value,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{graph_structure, set_structure, ClassKind, FiniteClass};

    #[test]
    fn edge_density_in_small_hosts() {
        let edge = graph_structure(2, &[(1, 2)]).unwrap();
        let triangle = graph_structure(3, &[(1, 2), (1, 3), (2, 3)]).unwrap();
        let d = density_exact(&edge, &triangle).unwrap();
        assert_eq!((d.hits, d.injections), (6, 6));
        let path = graph_structure(3, &[(1, 2), (2, 3)]).unwrap();
        let d = density_exact(&edge, &path).unwrap();
        assert_eq!((d.hits, d.injections), (4, 6));
        let big = graph_structure(2, &[(1, 2)]).unwrap();
        let small = graph_structure(1, &[]).unwrap();
        assert_eq!(density_exact(&big, &small).unwrap().value(), 0.0);
    }

    #[test]
    fn densities_over_a_size_sum_to_one() {
        let class = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let host = class.sample_limit(7, 99).unwrap();
        let mut total = 0.0;
        for pattern in class.enumerate(2).unwrap() {
            total += density_exact(&pattern, &host).unwrap().value();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_tracks_the_exact_value() {
        let edge = graph_structure(2, &[(1, 2)]).unwrap();
        let class = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let host = class.sample_limit(8, 4).unwrap();
        let exact = density_exact(&edge, &host).unwrap().value();
        let est = density_sampled(&edge, &host, 20_000, 8).unwrap();
        assert!((est.value - exact).abs() < 3.0 * est.stderr.max(1e-3));
    }

    #[test]
    fn restriction_consistency_of_exact_densities() {
        // Summing densities of all extensions of a pattern reproduces the
        // pattern's density.
        let class = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let host = class.sample_limit(6, 17).unwrap();
        let pattern = graph_structure(2, &[(1, 2)]).unwrap();
        let base = density_exact(&pattern, &host).unwrap().value();
        let mut total = 0.0;
        for ext in class.enumerate(3).unwrap() {
            if ext.restrict(2).unwrap() == pattern {
                total += density_exact(&ext, &host).unwrap().value();
            }
        }
        assert!((total - base).abs() < 1e-12);
    }

    #[test]
    fn limit_vector_normalizes_per_size() {
        let class = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let host = class.sample_limit(9, 2).unwrap();
        let vector = limit_vector(&host, 3, 2_000, 5).unwrap();
        for entries in vector.by_size.values() {
            let sum: f64 = entries.iter().map(|(_, v)| v).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        // The complete host has a single class per size with density 1.
        let complete = graph_structure(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
            .unwrap();
        let vector = limit_vector(&complete, 3, 100, 5).unwrap();
        let edge = graph_structure(2, &[(1, 2)]).unwrap();
        assert_eq!(vector.value(&edge).unwrap(), 1.0);
        let nonedge = graph_structure(2, &[]).unwrap();
        assert_eq!(vector.value(&nonedge).unwrap(), 0.0);
    }

    #[test]
    fn rho_hat_separates_and_vanishes() {
        let a = vec![set_structure(3, &[1, 2]).unwrap(); 5];
        assert_eq!(rho_hat(&a, &a, 3).unwrap().value, 0.0);
        let b = vec![set_structure(3, &[2]).unwrap(); 5];
        let report = rho_hat(&a, &b, 3).unwrap();
        // The two point masses differ already on {1}: contribution
        // 2^-1 * (1 + 1) = 1 at size 1.
        assert!(report.value >= 1.0);
        assert!((report.tail_bound - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rho_hat_is_symmetric_and_triangular() {
        let class = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let a: Vec<_> = (0..40).map(|i| class.sample_limit(4, i).unwrap()).collect();
        let b: Vec<_> = (100..140).map(|i| class.sample_limit(4, i).unwrap()).collect();
        let c: Vec<_> = (200..240).map(|i| class.sample_limit(4, i).unwrap()).collect();
        let ab = rho_hat(&a, &b, 3).unwrap().value;
        let ba = rho_hat(&b, &a, 3).unwrap().value;
        assert!((ab - ba).abs() < 1e-12);
        let ac = rho_hat(&a, &c, 3).unwrap().value;
        let cb = rho_hat(&c, &b, 3).unwrap().value;
        assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn projection_of_a_constant_path_is_flat() {
        let m = set_structure(6, &[1, 2, 3]).unwrap();
        let traj = Trajectory {
            n: 6,
            states: vec![m.clone(), m.clone(), m],
        };
        let probe = set_structure(1, &[1]).unwrap();
        let records = project_chain(&traj, &[probe], 4_000, 3).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!((r.estimate - 0.5).abs() < 4.0 * r.stderr);
        }
    }

    #[test]
    fn martingale_checkpoints_report_diffs() {
        let complete = graph_structure(6, &[(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (2, 6), (3, 4), (3, 5), (3, 6), (4, 5), (4, 6), (5, 6)]).unwrap();
        let edge = graph_structure(2, &[(1, 2)]).unwrap();
        let report = reverse_martingale_check(&complete, &edge, &[2, 4, 6], 1_000, 0).unwrap();
        for p in &report.points {
            assert_eq!(p.estimate, 1.0);
        }
        for d in &report.diffs {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn dissociation_passes_independent_and_fails_coupled() {
        let graphs = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let edge = graph_structure(2, &[(1, 2)]).unwrap();
        let gen_er = |sd: u64| graphs.sample_limit(5, sd);
        let report = check_dissociation(gen_er, &edge, &edge, 4_000, 12).unwrap();
        assert!(report.pass, "p = {}", report.p_value);

        let complete4 = graph_structure(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
            .unwrap();
        let empty4 = graph_structure(4, &[]).unwrap();
        let gen_coupled = move |sd: u64| {
            if seed::bit(sd, "coin", &[]) {
                Ok(complete4.clone())
            } else {
                Ok(empty4.clone())
            }
        };
        let report = check_dissociation(&gen_coupled, &edge, &edge, 2_000, 12).unwrap();
        assert!(!report.pass);
    }
}
