//! Randomized structural invariants: identities that must hold for every
//! input, checked over generated structures, injections, and multisets.

use proptest::prelude::*;

use exchmarkov::classes::{canonical_embedding, set_structure, ClassKind, FiniteClass};
use exchmarkov::kernels::{check_consistency, cutpaste_kernel, ConsistencyReport};
use exchmarkov::levyito::Multiset;
use exchmarkov::limits::{density_exact, rho_hat};
use exchmarkov::seed;
use exchmarkov::structures::FiniteStructure;
use rand::seq::index::sample as index_sample;
use rand::Rng;

fn random_graph(n: usize, seed_value: u64) -> FiniteStructure {
    FiniteClass::builtin(ClassKind::Graphs)
        .expect("graphs class")
        .sample_limit(n, seed_value)
        .expect("graph sample")
}

fn random_injection(m: usize, n: usize, seed_value: u64) -> Vec<u32> {
    let mut rng = seed::rng(seed_value, "inj", &[m as u64, n as u64]);
    let mut phi: Vec<u32> = index_sample(&mut rng, n, m)
        .into_iter()
        .map(|i| i as u32 + 1)
        .collect();
    // index_sample returns distinct positions in an arbitrary order, which
    // is exactly what an injection needs; shuffle-free is fine.
    if rng.gen::<bool>() {
        phi.reverse();
    }
    phi
}

proptest! {
    /// Pulling back along phi then psi equals pulling back along their
    /// composite in one step.
    #[test]
    fn injection_pullbacks_compose(
        host_seed in any::<u64>(),
        phi_seed in any::<u64>(),
        psi_seed in any::<u64>(),
        n in 3usize..7,
        m in 2usize..5,
        k in 1usize..4,
    ) {
        prop_assume!(m <= n && k <= m);
        let host = random_graph(n, host_seed);
        let phi = random_injection(m, n, phi_seed);
        let psi = random_injection(k, m, psi_seed);
        let two_step = host
            .apply_injection(&phi)
            .unwrap()
            .apply_injection(&psi)
            .unwrap();
        let composite: Vec<u32> = psi.iter().map(|&j| phi[j as usize - 1]).collect();
        let one_step = host.apply_injection(&composite).unwrap();
        prop_assert_eq!(two_step, one_step);
    }

    /// Restricting to an initial segment and then a shorter one equals
    /// restricting to the shorter one directly.
    #[test]
    fn restriction_is_projective(
        host_seed in any::<u64>(),
        n in 2usize..8,
        m in 1usize..7,
        k in 1usize..7,
    ) {
        prop_assume!(k <= m && m <= n);
        let host = random_graph(n, host_seed);
        let stepwise = host.restrict(m).unwrap().restrict(k).unwrap();
        let direct = host.restrict(k).unwrap();
        prop_assert_eq!(stepwise, direct);
    }

    /// The truncation distance is a genuine ultrametric on structures of a
    /// common size: zero exactly on equal structures, symmetric, and
    /// bounded by the larger of the two legs.
    #[test]
    fn truncation_distance_is_an_ultrametric(
        sa in any::<u64>(),
        sb in any::<u64>(),
        sc in any::<u64>(),
        n in 1usize..7,
    ) {
        let a = random_graph(n, sa);
        let b = random_graph(n, sb);
        let c = random_graph(n, sc);
        let ab = a.ultrametric(&b).unwrap();
        let ba = b.ultrametric(&a).unwrap();
        let bc = b.ultrametric(&c).unwrap();
        let ac = a.ultrametric(&c).unwrap();
        let floor = 1.0 / (1.0 + n as f64);
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab.max(bc));
        prop_assert_eq!(a.ultrametric(&a).unwrap(), floor);
        prop_assert_eq!(ab == floor, a == b);
    }

    /// Meet and join of multisets form a lattice, and disjoint union adds
    /// totals.
    #[test]
    fn multiset_lattice_laws(
        pa in proptest::collection::vec((1u32..6, 0u32..4), 0..6),
        pb in proptest::collection::vec((1u32..6, 0u32..4), 0..6),
    ) {
        let a = Multiset::from_pairs(&pa);
        let b = Multiset::from_pairs(&pb);
        prop_assert_eq!(a.meet(&b), b.meet(&a));
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert!(a.meet(&b).subset_of(&a));
        prop_assert!(a.subset_of(&a.join(&b)));
        prop_assert_eq!(a.meet(&a.join(&b)), a.clone());
        prop_assert_eq!(a.join(&a.meet(&b)), a.clone());
        prop_assert_eq!(a.oplus(&b).total(), a.total() + b.total());
    }

    /// Exact densities are consistent across sizes at the integer level:
    /// the extension counts of a pattern sum to its own count scaled by the
    /// number of ways to extend an injection, and the counts over all
    /// patterns of one size exhaust the injections.
    #[test]
    fn exact_densities_are_consistent_across_sizes(
        host_seed in any::<u64>(),
        n in 3usize..7,
        k in 1usize..3,
    ) {
        prop_assume!(k < n);
        let graphs = FiniteClass::builtin(ClassKind::Graphs).unwrap();
        let host = random_graph(n, host_seed);

        let mut size_hits = 0u64;
        let mut injections = 0u64;
        for pattern in graphs.enumerate(k).unwrap() {
            let d = density_exact(&pattern, &host).unwrap();
            size_hits += d.hits;
            injections = d.injections;
        }
        prop_assert_eq!(size_hits, injections);

        for pattern in graphs.enumerate(k).unwrap() {
            let own = density_exact(&pattern, &host).unwrap();
            let mut extension_hits = 0u64;
            for ext in graphs.enumerate(k + 1).unwrap() {
                if ext.restrict(k).unwrap() == pattern {
                    extension_hits += density_exact(&ext, &host).unwrap().hits;
                }
            }
            prop_assert_eq!(extension_hits, own.hits * (n - k) as u64);
        }
    }

    /// The truncated sample distance is a pseudometric: symmetric, zero on
    /// identical sample sets, and triangle up to rounding.
    #[test]
    fn truncated_sample_distance_is_a_pseudometric(
        seeds_a in proptest::collection::vec(any::<u64>(), 1..5),
        seeds_b in proptest::collection::vec(any::<u64>(), 1..5),
        seeds_c in proptest::collection::vec(any::<u64>(), 1..5),
    ) {
        let draw = |seeds: &[u64]| -> Vec<FiniteStructure> {
            seeds.iter().map(|&s| random_graph(3, s)).collect()
        };
        let a = draw(&seeds_a);
        let b = draw(&seeds_b);
        let c = draw(&seeds_c);
        let ab = rho_hat(&a, &b, 3).unwrap().value;
        let ba = rho_hat(&b, &a, 3).unwrap().value;
        let bc = rho_hat(&b, &c, 3).unwrap().value;
        let ac = rho_hat(&a, &c, 3).unwrap().value;
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert_eq!(rho_hat(&a, &a, 3).unwrap().value, 0.0);
    }

    /// Cut-and-paste kernels commute with restriction for every parameter
    /// choice, not just the shipped defaults.
    #[test]
    fn cutpaste_is_coherent_for_random_parameters(
        theta0 in 0.0f64..=1.0,
        theta1 in 0.0f64..=1.0,
        kernel_seed in any::<u64>(),
    ) {
        let f = cutpaste_kernel(theta0, theta1, kernel_seed).unwrap();
        for n in 1..=3 {
            let report = check_consistency(&f, n).unwrap();
            let coherent = matches!(report, ConsistencyReport::Pass { .. });
            prop_assert!(coherent);
        }
    }

    /// The canonical embedding really embeds: pulling the target back along
    /// it reproduces the pattern.
    #[test]
    fn canonical_embedding_induces_the_pattern(
        pattern_seed in any::<u64>(),
        k in 1usize..8,
    ) {
        let sets = FiniteClass::builtin(ClassKind::Sets).unwrap();
        let pattern = sets.sample_limit(k, pattern_seed).unwrap();
        let universal = set_structure(14, &[1, 3, 5, 7, 9, 11, 13]).unwrap();
        let rho = canonical_embedding(&pattern, &universal).unwrap();
        prop_assert!(rho.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(universal.apply_injection(&rho).unwrap(), pattern);
    }
}
