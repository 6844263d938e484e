//! Combinatorial classes of finite structures.
//!
//! A [`FiniteClass`] bundles a signature, a membership predicate, exhaustive
//! enumeration up to a size bound, and (for the builtin classes) a seeded
//! exchangeable sampler that is restriction-consistent: sampling at size
//! `n+1` and restricting to `{1..n}` gives exactly the size-`n` sample for
//! the same seed.
//!
//! The module also hosts the structural property checkers: hereditary
//! closure, joint embedding, disjoint amalgamation, and the `n`-ary
//! strengthening of disjoint amalgamation over the coordinate hyperplanes
//! of `{1..n}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use itertools::Itertools;

use crate::structures::{count_all, enumerate_all, FiniteStructure, Signature};
use crate::{seed, Error, Result};

/// Identifier of a builtin or user-supplied class.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassKind {
    /// Unary predicate, unconstrained.
    Sets,
    /// `k` unary predicates, each element in exactly one.
    Colorings(usize),
    /// Symmetric irreflexive binary relation.
    Graphs,
    /// Irreflexive binary relation.
    Digraphs,
    /// Exactly one orientation per unordered pair.
    Tournaments,
    /// Same-block relation of a set partition (symmetric, irreflexive,
    /// transitive across distinct elements).
    Partitions,
    /// Partitions with at most two blocks.
    PartitionsMax2,
    /// Symmetric `r`-ary relation on distinct entries.
    Hypergraphs(usize),
    /// Graph plus `k` exclusive unary color predicates.
    ColoredGraphs(usize),
    /// Strict total order.
    Orders,
    /// Unary predicate holding at no more than one element.
    SingletonOrEmpty,
    /// Every structure over the ambient signature.
    Full,
    /// Explicit structure lists per size.
    User(Arc<UserClass>),
}

/// A user-supplied class given by explicit members per size.
#[derive(Debug, PartialEq)]
pub struct UserClass {
    sig: Arc<Signature>,
    sizes: BTreeMap<usize, Vec<FiniteStructure>>,
}

/// A class of finite structures with enumeration and sampling support.
#[derive(Clone, Debug)]
pub struct FiniteClass {
    kind: ClassKind,
    sig: Arc<Signature>,
    enum_bound: usize,
}

impl PartialEq for FiniteClass {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.sig == other.sig
    }
}

fn unary_sig(names: &[String]) -> Arc<Signature> {
    Arc::new(Signature::new(names.iter().map(|n| (n.clone(), 1)).collect()).unwrap())
}

fn color_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("C{i}")).collect()
}

const ENUM_BUDGET: u128 = 100_000;
const ABSOLUTE_BOUND: usize = 24;

impl FiniteClass {
    /// A builtin class with its default enumeration bound (the largest size
    /// whose member count stays within 100 000).
    pub fn builtin(kind: ClassKind) -> Result<Self> {
        let sig = match &kind {
            ClassKind::Sets | ClassKind::SingletonOrEmpty => {
                unary_sig(&["R".to_string()])
            }
            ClassKind::Colorings(k) => {
                if *k == 0 {
                    return Err(Error::Validation("colorings need at least one color".into()));
                }
                unary_sig(&color_names(*k))
            }
            ClassKind::Graphs => Arc::new(Signature::new(vec![("E".into(), 2)])?),
            ClassKind::Digraphs | ClassKind::Tournaments => {
                Arc::new(Signature::new(vec![("A".into(), 2)])?)
            }
            ClassKind::Partitions | ClassKind::PartitionsMax2 => {
                Arc::new(Signature::new(vec![("E".into(), 2)])?)
            }
            ClassKind::Hypergraphs(r) => {
                if *r < 2 {
                    return Err(Error::Validation("hyperedges need arity at least 2".into()));
                }
                Arc::new(Signature::new(vec![("H".into(), *r)])?)
            }
            ClassKind::ColoredGraphs(k) => {
                if *k == 0 {
                    return Err(Error::Validation("colored graphs need at least one color".into()));
                }
                let mut rels = vec![("E".to_string(), 2)];
                rels.extend(color_names(*k).into_iter().map(|n| (n, 1)));
                Arc::new(Signature::new(rels)?)
            }
            ClassKind::Orders => Arc::new(Signature::new(vec![("L".into(), 2)])?),
            ClassKind::Full => {
                return Err(Error::Validation(
                    "the full class needs a signature; use FiniteClass::full".into(),
                ))
            }
            ClassKind::User(u) => u.sig.clone(),
        };
        let mut class = FiniteClass {
            kind,
            sig,
            enum_bound: 0,
        };
        class.enum_bound = class.default_bound();
        Ok(class)
    }

    /// The class of all structures over `sig`.
    pub fn full(sig: Arc<Signature>) -> Self {
        let mut class = FiniteClass {
            kind: ClassKind::Full,
            sig,
            enum_bound: 0,
        };
        class.enum_bound = class.default_bound();
        class
    }

    /// A user class from explicit per-size member lists.
    pub fn user(sig: Arc<Signature>, sizes: BTreeMap<usize, Vec<FiniteStructure>>) -> Result<Self> {
        for (&n, members) in &sizes {
            for m in members {
                if m.signature() != &sig {
                    return Err(Error::Validation(format!(
                        "user class member at size {n} has a different signature"
                    )));
                }
                if m.n() != n {
                    return Err(Error::Validation(format!(
                        "user class member listed at size {n} has domain size {}",
                        m.n()
                    )));
                }
            }
        }
        let enum_bound = sizes.keys().max().copied().unwrap_or(0);
        Ok(FiniteClass {
            kind: ClassKind::User(Arc::new(UserClass { sig: sig.clone(), sizes })),
            sig,
            enum_bound,
        })
    }

    fn default_bound(&self) -> usize {
        let mut bound = 1;
        for n in 1..=ABSOLUTE_BOUND {
            match self.count(n) {
                Some(c) if c <= ENUM_BUDGET => bound = n,
                _ => break,
            }
        }
        bound
    }

    /// Same class with an explicit enumeration bound.
    pub fn with_enum_bound(mut self, bound: usize) -> Self {
        self.enum_bound = bound;
        self
    }

    /// Parses a class identifier: `sets`, `colorings:K`, `graphs`,
    /// `digraphs`, `tournaments`, `partitions`, `partitions-max2`,
    /// `hypergraphs:R`, `colored-graphs:K`, `orders`, `singleton-or-empty`,
    /// or `full:NAME:ARITY[,NAME:ARITY...]`.
    pub fn from_id(id: &str) -> Result<Self> {
        let parse_param = |tail: Option<&str>, what: &str| -> Result<usize> {
            tail.and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::MalformedInput(format!("{what} needs a numeric parameter")))
        };
        let (head, tail) = match id.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (id, None),
        };
        match head {
            "sets" => FiniteClass::builtin(ClassKind::Sets),
            "colorings" => FiniteClass::builtin(ClassKind::Colorings(parse_param(tail, id)?)),
            "graphs" => FiniteClass::builtin(ClassKind::Graphs),
            "digraphs" => FiniteClass::builtin(ClassKind::Digraphs),
            "tournaments" => FiniteClass::builtin(ClassKind::Tournaments),
            "partitions" => FiniteClass::builtin(ClassKind::Partitions),
            "partitions-max2" => FiniteClass::builtin(ClassKind::PartitionsMax2),
            "hypergraphs" => FiniteClass::builtin(ClassKind::Hypergraphs(parse_param(tail, id)?)),
            "colored-graphs" => {
                FiniteClass::builtin(ClassKind::ColoredGraphs(parse_param(tail, id)?))
            }
            "orders" => FiniteClass::builtin(ClassKind::Orders),
            "singleton-or-empty" => FiniteClass::builtin(ClassKind::SingletonOrEmpty),
            "full" => {
                let spec = tail.ok_or_else(|| {
                    Error::MalformedInput("full class needs NAME:ARITY entries".into())
                })?;
                let mut rels = Vec::new();
                for entry in spec.split(',') {
                    let (name, arity) = entry.split_once(':').ok_or_else(|| {
                        Error::MalformedInput(format!("bad relation spec {entry}"))
                    })?;
                    let arity: usize = arity.parse().map_err(|_| {
                        Error::MalformedInput(format!("bad arity in {entry}"))
                    })?;
                    rels.push((name.to_string(), arity));
                }
                Ok(FiniteClass::full(Arc::new(Signature::new(rels)?)))
            }
            other => Err(Error::UnsupportedClass(other.to_string())),
        }
    }

    /// The identifier this class parses from.
    pub fn id(&self) -> String {
        match &self.kind {
            ClassKind::Sets => "sets".into(),
            ClassKind::Colorings(k) => format!("colorings:{k}"),
            ClassKind::Graphs => "graphs".into(),
            ClassKind::Digraphs => "digraphs".into(),
            ClassKind::Tournaments => "tournaments".into(),
            ClassKind::Partitions => "partitions".into(),
            ClassKind::PartitionsMax2 => "partitions-max2".into(),
            ClassKind::Hypergraphs(r) => format!("hypergraphs:{r}"),
            ClassKind::ColoredGraphs(k) => format!("colored-graphs:{k}"),
            ClassKind::Orders => "orders".into(),
            ClassKind::SingletonOrEmpty => "singleton-or-empty".into(),
            ClassKind::Full => {
                let rels = self
                    .sig
                    .relations()
                    .iter()
                    .map(|(n, a)| format!("{n}:{a}"))
                    .join(",");
                format!("full:{rels}")
            }
            ClassKind::User(_) => "user".into(),
        }
    }

    /// The class kind.
    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    /// The ambient signature.
    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    /// Largest size accepted by [`FiniteClass::enumerate`].
    pub fn enum_bound(&self) -> usize {
        self.enum_bound
    }

    /// Number of members over `{1..n}`, when known and within `u128`.
    pub fn count(&self, n: usize) -> Option<u128> {
        fn pow2(e: u128) -> Option<u128> {
            if e >= 127 {
                None
            } else {
                Some(1u128 << e)
            }
        }
        let n128 = n as u128;
        match &self.kind {
            ClassKind::Sets => pow2(n128),
            ClassKind::Colorings(k) => (*k as u128).checked_pow(u32::try_from(n).ok()?),
            ClassKind::Graphs | ClassKind::Tournaments => pow2(n128 * (n128.saturating_sub(1)) / 2),
            ClassKind::Digraphs => pow2(n128 * n128.saturating_sub(1)),
            ClassKind::Partitions => bell(n),
            ClassKind::PartitionsMax2 => {
                if n == 0 {
                    Some(1)
                } else {
                    pow2(n128 - 1)
                }
            }
            ClassKind::Hypergraphs(r) => pow2(binomial(n, *r)?),
            ClassKind::ColoredGraphs(k) => {
                let graphs = pow2(n128 * n128.saturating_sub(1) / 2)?;
                let colors = (*k as u128).checked_pow(u32::try_from(n).ok()?)?;
                graphs.checked_mul(colors)
            }
            ClassKind::Orders => factorial(n),
            ClassKind::SingletonOrEmpty => Some(n128 + 1),
            ClassKind::Full => count_all(&self.sig, n),
            ClassKind::User(u) => Some(u.sizes.get(&n)?.len() as u128),
        }
    }

    /// Membership test. Structures over a different signature never belong.
    pub fn contains(&self, m: &FiniteStructure) -> bool {
        if m.signature() != &self.sig {
            return false;
        }
        let n = m.n() as u32;
        match &self.kind {
            ClassKind::Sets | ClassKind::Full => true,
            ClassKind::SingletonOrEmpty => m.tuples(0).len() <= 1,
            ClassKind::Colorings(k) => exclusive_unary(m, 0, *k),
            ClassKind::Graphs => symmetric_irreflexive(m, 0),
            ClassKind::Digraphs => irreflexive(m, 0),
            ClassKind::Tournaments => {
                if !irreflexive(m, 0) {
                    return false;
                }
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        let ab = m.contains(0, &[a, b]);
                        let ba = m.contains(0, &[b, a]);
                        if ab == ba {
                            return false;
                        }
                    }
                }
                true
            }
            ClassKind::Partitions => is_partition(m),
            ClassKind::PartitionsMax2 => {
                is_partition(m)
                    && blocks_of_partition(m).map(|b| b.len() <= 2).unwrap_or(false)
            }
            ClassKind::Hypergraphs(_) => {
                for t in m.tuples(0) {
                    if t.iter().duplicates().next().is_some() {
                        return false;
                    }
                }
                m.is_symmetric()
            }
            ClassKind::ColoredGraphs(k) => {
                symmetric_irreflexive(m, 0) && exclusive_unary(m, 1, *k)
            }
            ClassKind::Orders => {
                if !irreflexive(m, 0) {
                    return false;
                }
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        if m.contains(0, &[a, b]) == m.contains(0, &[b, a]) {
                            return false;
                        }
                    }
                }
                for a in 1..=n {
                    for b in 1..=n {
                        for c in 1..=n {
                            if m.contains(0, &[a, b])
                                && m.contains(0, &[b, c])
                                && !m.contains(0, &[a, c])
                            {
                                return false;
                            }
                        }
                    }
                }
                true
            }
            ClassKind::User(u) => u
                .sizes
                .get(&m.n())
                .map(|list| list.contains(m))
                .unwrap_or(false),
        }
    }

    /// Every member over `{1..n}`, in a fixed deterministic order.
    pub fn enumerate(&self, n: usize) -> Result<Vec<FiniteStructure>> {
        if n == 0 {
            return Err(Error::Domain("sizes start at 1".into()));
        }
        if n > self.enum_bound {
            return Err(Error::Capacity(format!(
                "size {n} above the enumeration bound {} for {}",
                self.enum_bound,
                self.id()
            )));
        }
        let sig = self.sig.clone();
        let nn = n as u32;
        let out = match &self.kind {
            ClassKind::Sets => {
                let mut out = Vec::with_capacity(1 << n);
                for mask in 0u64..(1 << n) {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for i in 1..=nn {
                        if mask >> (i - 1) & 1 == 1 {
                            s.insert(0, &[i])?;
                        }
                    }
                    out.push(s);
                }
                out
            }
            ClassKind::SingletonOrEmpty => {
                let mut out = vec![FiniteStructure::empty(sig.clone(), n)];
                for i in 1..=nn {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    s.insert(0, &[i])?;
                    out.push(s);
                }
                out
            }
            ClassKind::Colorings(k) => {
                let mut out = Vec::new();
                let mut digits = vec![0usize; n];
                loop {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for (i, &d) in digits.iter().enumerate() {
                        s.insert(d, &[(i + 1) as u32])?;
                    }
                    out.push(s);
                    if !increment(&mut digits, *k) {
                        break;
                    }
                }
                out
            }
            ClassKind::Graphs => {
                let pairs: Vec<(u32, u32)> = unordered_pairs(nn);
                masks_over(pairs.len(), |mask| {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for (b, &(x, y)) in pairs.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            s.insert(0, &[x, y])?;
                            s.insert(0, &[y, x])?;
                        }
                    }
                    Ok(s)
                })?
            }
            ClassKind::Digraphs => {
                let arcs: Vec<(u32, u32)> = ordered_pairs(nn);
                masks_over(arcs.len(), |mask| {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for (b, &(x, y)) in arcs.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            s.insert(0, &[x, y])?;
                        }
                    }
                    Ok(s)
                })?
            }
            ClassKind::Tournaments => {
                let pairs: Vec<(u32, u32)> = unordered_pairs(nn);
                masks_over(pairs.len(), |mask| {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for (b, &(x, y)) in pairs.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            s.insert(0, &[x, y])?;
                        } else {
                            s.insert(0, &[y, x])?;
                        }
                    }
                    Ok(s)
                })?
            }
            ClassKind::Partitions => enumerate_rgs(n, usize::MAX)
                .into_iter()
                .map(|labels| partition_from_labels(&sig, &labels))
                .collect::<Result<Vec<_>>>()?,
            ClassKind::PartitionsMax2 => enumerate_rgs(n, 2)
                .into_iter()
                .map(|labels| partition_from_labels(&sig, &labels))
                .collect::<Result<Vec<_>>>()?,
            ClassKind::Hypergraphs(r) => {
                let edges: Vec<Vec<u32>> = (1..=nn).combinations(*r).collect();
                masks_over(edges.len(), |mask| {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for (b, edge) in edges.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            for perm in edge.iter().copied().permutations(edge.len()) {
                                s.insert(0, &perm)?;
                            }
                        }
                    }
                    Ok(s)
                })?
            }
            ClassKind::ColoredGraphs(k) => {
                let graphs = FiniteClass::builtin(ClassKind::Graphs)?
                    .with_enum_bound(n)
                    .enumerate(n)?;
                let colorings = FiniteClass::builtin(ClassKind::Colorings(*k))?
                    .with_enum_bound(n)
                    .enumerate(n)?;
                let mut out = Vec::with_capacity(graphs.len() * colorings.len());
                for g in &graphs {
                    for c in &colorings {
                        let mut s = FiniteStructure::empty(sig.clone(), n);
                        for t in g.tuples(0) {
                            s.insert(0, t)?;
                        }
                        for rel in 0..c.signature().len() {
                            for t in c.tuples(rel) {
                                s.insert(rel + 1, t)?;
                            }
                        }
                        out.push(s);
                    }
                }
                out
            }
            ClassKind::Orders => {
                let mut out = Vec::new();
                for perm in (1..=nn).permutations(n) {
                    let mut s = FiniteStructure::empty(sig.clone(), n);
                    for i in 0..n {
                        for j in (i + 1)..n {
                            s.insert(0, &[perm[i], perm[j]])?;
                        }
                    }
                    out.push(s);
                }
                out
            }
            ClassKind::Full => enumerate_all(&self.sig, n)?,
            ClassKind::User(u) => u
                .sizes
                .get(&n)
                .cloned()
                .ok_or_else(|| Error::NotFound(format!("user class has no size-{n} list")))?,
        };
        Ok(out)
    }

    /// Draws from the exchangeable limit law of the class, projectively in
    /// the seed: restricting the size-`n+1` sample to `{1..n}` yields the
    /// size-`n` sample.
    ///
    /// Schemes: independent fair bits per element (sets), per unordered pair
    /// (graphs, tournament orientations, hyperedges), per ordered pair
    /// (digraphs), geometric block labels (partitions), fair two-block
    /// labels (partitions-max2), uniform colors (colorings), ranks of
    /// independent uniforms (orders), independent cells (full). Errors for
    /// classes without an exchangeable sampler.
    pub fn sample_limit(&self, n: usize, seed_value: u64) -> Result<FiniteStructure> {
        if n == 0 {
            return Err(Error::Domain("sizes start at 1".into()));
        }
        let sig = self.sig.clone();
        let nn = n as u32;
        let mut s = FiniteStructure::empty(sig, n);
        match &self.kind {
            ClassKind::Sets => {
                for i in 1..=nn {
                    if seed::bit(seed_value, "set", &[i as u64]) {
                        s.insert(0, &[i])?;
                    }
                }
            }
            ClassKind::Colorings(k) => {
                for i in 1..=nn {
                    let c = (seed::derive(seed_value, "color", &[i as u64]) % *k as u64) as usize;
                    s.insert(c, &[i])?;
                }
            }
            ClassKind::Graphs => {
                for (a, b) in unordered_pairs(nn) {
                    if seed::bit(seed_value, "edge", &[a as u64, b as u64]) {
                        s.insert(0, &[a, b])?;
                        s.insert(0, &[b, a])?;
                    }
                }
            }
            ClassKind::Digraphs => {
                for (a, b) in ordered_pairs(nn) {
                    if seed::bit(seed_value, "arc", &[a as u64, b as u64]) {
                        s.insert(0, &[a, b])?;
                    }
                }
            }
            ClassKind::Tournaments => {
                for (a, b) in unordered_pairs(nn) {
                    if seed::bit(seed_value, "orient", &[a as u64, b as u64]) {
                        s.insert(0, &[a, b])?;
                    } else {
                        s.insert(0, &[b, a])?;
                    }
                }
            }
            ClassKind::Partitions => {
                let labels: Vec<u64> = (1..=nn)
                    .map(|i| {
                        seed::derive(seed_value, "block", &[i as u64]).leading_zeros() as u64
                    })
                    .collect();
                insert_same_label_pairs(&mut s, &labels)?;
            }
            ClassKind::PartitionsMax2 => {
                let labels: Vec<u64> = (1..=nn)
                    .map(|i| seed::bit(seed_value, "half", &[i as u64]) as u64)
                    .collect();
                insert_same_label_pairs(&mut s, &labels)?;
            }
            ClassKind::Hypergraphs(r) => {
                for edge in (1..=nn).combinations(*r) {
                    let key: Vec<u64> = edge.iter().map(|&v| v as u64).collect();
                    if seed::bit(seed_value, "hyperedge", &key) {
                        for perm in edge.iter().copied().permutations(edge.len()) {
                            s.insert(0, &perm)?;
                        }
                    }
                }
            }
            ClassKind::ColoredGraphs(k) => {
                for (a, b) in unordered_pairs(nn) {
                    if seed::bit(seed_value, "edge", &[a as u64, b as u64]) {
                        s.insert(0, &[a, b])?;
                        s.insert(0, &[b, a])?;
                    }
                }
                for i in 1..=nn {
                    let c = (seed::derive(seed_value, "color", &[i as u64]) % *k as u64) as usize;
                    s.insert(c + 1, &[i])?;
                }
            }
            ClassKind::Orders => {
                let key = |i: u32| (seed::derive(seed_value, "rank", &[i as u64]), i);
                for (a, b) in ordered_pairs(nn) {
                    if key(a) < key(b) {
                        s.insert(0, &[a, b])?;
                    }
                }
            }
            ClassKind::Full => {
                for rel in 0..s.signature().len() {
                    let arity = s.signature().arity(rel);
                    let label = format!("cell:{}", s.signature().name(rel));
                    for t in crate::structures::all_tuples(n, arity) {
                        let key: Vec<u64> = t.iter().map(|&v| v as u64).collect();
                        if seed::bit(seed_value, &label, &key) {
                            s.insert(rel, &t)?;
                        }
                    }
                }
            }
            ClassKind::SingletonOrEmpty | ClassKind::User(_) => {
                return Err(Error::UnsupportedClass(format!(
                    "{} has no exchangeable limit sampler",
                    self.id()
                )))
            }
        }
        Ok(s)
    }
}

/// A seeded generator of exchangeable samples from a class limit.
#[derive(Clone, Debug)]
pub struct LimitSampler {
    class: FiniteClass,
}

impl LimitSampler {
    /// Wraps a class; fails immediately for classes without a sampler.
    pub fn new(class: FiniteClass) -> Result<Self> {
        class.sample_limit(1, 0)?;
        Ok(LimitSampler { class })
    }

    /// The underlying class.
    pub fn class(&self) -> &FiniteClass {
        &self.class
    }

    /// A sample over `{1..n}`.
    pub fn sample(&self, n: usize, seed_value: u64) -> Result<FiniteStructure> {
        self.class.sample_limit(n, seed_value)
    }
}

fn increment(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn masks_over<F>(bits: usize, mut build: F) -> Result<Vec<FiniteStructure>>
where
    F: FnMut(u64) -> Result<FiniteStructure>,
{
    if bits > 20 {
        return Err(Error::Capacity(format!(
            "2^{bits} members exceeds the enumeration budget"
        )));
    }
    (0u64..(1 << bits)).map(&mut build).collect()
}

fn unordered_pairs(n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 1..=n {
        for b in (a + 1)..=n {
            out.push((a, b));
        }
    }
    out
}

fn ordered_pairs(n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            if a != b {
                out.push((a, b));
            }
        }
    }
    out
}

fn exclusive_unary(m: &FiniteStructure, first_rel: usize, k: usize) -> bool {
    for v in 1..=m.n() as u32 {
        let mut hits = 0;
        for rel in first_rel..first_rel + k {
            if m.contains(rel, &[v]) {
                hits += 1;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    true
}

fn irreflexive(m: &FiniteStructure, rel: usize) -> bool {
    m.tuples(rel).iter().all(|t| t[0] != t[1])
}

fn symmetric_irreflexive(m: &FiniteStructure, rel: usize) -> bool {
    irreflexive(m, rel)
        && m.tuples(rel)
            .iter()
            .all(|t| m.contains(rel, &[t[1], t[0]]))
}

pub(crate) fn is_partition(m: &FiniteStructure) -> bool {
    if !symmetric_irreflexive(m, 0) {
        return false;
    }
    // The relation is a same-block relation iff it coincides with equality
    // of least-related representatives.
    let n = m.n() as u32;
    let mut rep = vec![0u32; m.n() + 1];
    for i in 1..=n {
        rep[i as usize] = (1..i)
            .find(|&j| m.contains(0, &[j, i]))
            .unwrap_or(i);
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            if m.contains(0, &[i, j]) != (rep[i as usize] == rep[j as usize]) {
                return false;
            }
        }
    }
    true
}

fn insert_same_label_pairs(s: &mut FiniteStructure, labels: &[u64]) -> Result<()> {
    let n = labels.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                s.insert(0, &[(i + 1) as u32, (j + 1) as u32])?;
                s.insert(0, &[(j + 1) as u32, (i + 1) as u32])?;
            }
        }
    }
    Ok(())
}

fn enumerate_rgs(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(labels: &mut Vec<usize>, pos: usize, max_used: usize, max_blocks: usize, out: &mut Vec<Vec<usize>>) {
        if pos == labels.len() {
            out.push(labels.clone());
            return;
        }
        let top = (max_used + 1).min(max_blocks - 1);
        for label in 0..=top {
            labels[pos] = label;
            rec(labels, pos + 1, max_used.max(label), max_blocks, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    labels[0] = 0;
    rec(&mut labels, 1, 0, max_blocks, &mut out);
    out
}

fn partition_from_labels(sig: &Arc<Signature>, labels: &[usize]) -> Result<FiniteStructure> {
    let mut s = FiniteStructure::empty(sig.clone(), labels.len());
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if labels[i] == labels[j] {
                s.insert(0, &[(i + 1) as u32, (j + 1) as u32])?;
                s.insert(0, &[(j + 1) as u32, (i + 1) as u32])?;
            }
        }
    }
    Ok(s)
}

fn bell(n: usize) -> Option<u128> {
    // Bell triangle with overflow checks.
    let mut row = vec![1u128];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last.checked_add(v)?);
        }
        row = next;
    }
    Some(row[0])
}

fn factorial(n: usize) -> Option<u128> {
    let mut acc = 1u128;
    for i in 2..=n as u128 {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// The blocks of a partition structure, each sorted, ordered by least
/// element.
pub fn blocks_of_partition(m: &FiniteStructure) -> Result<Vec<Vec<u32>>> {
    if !is_partition(m) {
        return Err(Error::Validation("structure is not a partition".into()));
    }
    let n = m.n() as u32;
    let mut seen = vec![false; m.n() + 1];
    let mut blocks = Vec::new();
    for i in 1..=n {
        if seen[i as usize] {
            continue;
        }
        let mut block = vec![i];
        seen[i as usize] = true;
        for j in (i + 1)..=n {
            if m.contains(0, &[i, j]) {
                block.push(j);
                seen[j as usize] = true;
            }
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// The partition structure over `{1..n}` with the given blocks; elements
/// not mentioned become singletons.
pub fn partition_from_blocks(n: usize, blocks: &[&[u32]]) -> Result<FiniteStructure> {
    let sig = FiniteClass::builtin(ClassKind::Partitions)?.sig;
    let mut covered = vec![false; n + 1];
    for block in blocks {
        for &v in *block {
            if v == 0 || v as usize > n {
                return Err(Error::Validation(format!("element {v} outside 1..={n}")));
            }
            if covered[v as usize] {
                return Err(Error::Validation(format!("element {v} in two blocks")));
            }
            covered[v as usize] = true;
        }
    }
    let mut s = FiniteStructure::empty(sig, n);
    for block in blocks {
        for (i, &a) in block.iter().enumerate() {
            for &b in block.iter().skip(i + 1) {
                s.insert(0, &[a, b])?;
                s.insert(0, &[b, a])?;
            }
        }
    }
    Ok(s)
}

/// The set structure over `{1..n}` with the given members.
pub fn set_structure(n: usize, members: &[u32]) -> Result<FiniteStructure> {
    let sig = FiniteClass::builtin(ClassKind::Sets)?.sig;
    let mut s = FiniteStructure::empty(sig, n);
    for &v in members {
        s.insert(0, &[v])?;
    }
    Ok(s)
}

/// The graph structure over `{1..n}` with the given undirected edges.
pub fn graph_structure(n: usize, edges: &[(u32, u32)]) -> Result<FiniteStructure> {
    let sig = FiniteClass::builtin(ClassKind::Graphs)?.sig;
    let mut s = FiniteStructure::empty(sig, n);
    for &(a, b) in edges {
        if a == b {
            return Err(Error::Validation(format!("loop at {a}")));
        }
        s.insert(0, &[a, b])?;
        s.insert(0, &[b, a])?;
    }
    Ok(s)
}

/// Greedy minimal increasing embedding of `pattern` into `target`.
///
/// Coordinates are chosen left to right, each one the smallest value above
/// the previous that keeps the prefix an exact embedding. Prefixes of the
/// result embed the corresponding restrictions of the pattern, so the map
/// extends as the pattern grows.
pub fn canonical_embedding(
    pattern: &FiniteStructure,
    target: &FiniteStructure,
) -> Result<Vec<u32>> {
    if pattern.signature() != target.signature() {
        return Err(Error::Domain("signatures differ".into()));
    }
    let m = pattern.n();
    let big_n = target.n() as u32;
    let mut rho: Vec<u32> = Vec::with_capacity(m);
    for k in 1..=m {
        let want = pattern.restrict(k)?;
        let start = rho.last().map(|&v| v + 1).unwrap_or(1);
        let mut found = None;
        for v in start..=big_n {
            rho.push(v);
            if target.apply_injection(&rho)? == want {
                found = Some(v);
                break;
            }
            rho.pop();
        }
        if found.is_none() {
            return Err(Error::NotFound(format!(
                "no greedy embedding: stuck extending at coordinate {k}"
            )));
        }
    }
    Ok(rho)
}

/// Outcome of a hereditary-closure check.
#[derive(Clone, Debug)]
pub enum HpReport {
    /// All injection images of all members up to the bound are members.
    Pass,
    /// A member with an injection whose image leaves the class.
    Fail {
        /// The offending member.
        member: FiniteStructure,
        /// The injection applied.
        injection: Vec<u32>,
        /// The image that escaped the class.
        image: FiniteStructure,
    },
}

/// Checks hereditary closure: every injection image of every member of size
/// at most `n_max` is again a member.
pub fn check_hp(class: &FiniteClass, n_max: usize) -> Result<HpReport> {
    for n in 1..=n_max {
        for member in class.enumerate(n)? {
            for m in 1..=n {
                for phi in (1..=n as u32).permutations(m) {
                    let image = member.apply_injection(&phi)?;
                    if !class.contains(&image) {
                        return Ok(HpReport::Fail {
                            member,
                            injection: phi,
                            image,
                        });
                    }
                }
            }
        }
    }
    Ok(HpReport::Pass)
}

/// Outcome of a joint-embedding check.
#[derive(Clone, Debug)]
pub enum JepReport {
    /// Every pair up to the bound embeds jointly.
    Pass,
    /// A pair with no joint host after exhaustive search at the canonical
    /// host size.
    Fail {
        /// First structure of the unjoinable pair.
        left: FiniteStructure,
        /// Second structure of the unjoinable pair.
        right: FiniteStructure,
    },
    /// The search bound was too small to decide this pair.
    Unknown {
        /// First structure of the undecided pair.
        left: FiniteStructure,
        /// Second structure of the undecided pair.
        right: FiniteStructure,
    },
}

struct PrefixIndex {
    cache: HashMap<(usize, usize), HashMap<FiniteStructure, Vec<usize>>>,
    members: HashMap<usize, Vec<FiniteStructure>>,
}

impl PrefixIndex {
    fn new() -> Self {
        PrefixIndex {
            cache: HashMap::new(),
            members: HashMap::new(),
        }
    }

    fn members(&mut self, class: &FiniteClass, u: usize) -> Result<&Vec<FiniteStructure>> {
        if let std::collections::hash_map::Entry::Vacant(slot) = self.members.entry(u) {
            slot.insert(class.enumerate(u)?);
        }
        Ok(&self.members[&u])
    }

    fn by_prefix(
        &mut self,
        class: &FiniteClass,
        u: usize,
        t: usize,
    ) -> Result<&HashMap<FiniteStructure, Vec<usize>>> {
        if !self.cache.contains_key(&(u, t)) {
            let mut map: HashMap<FiniteStructure, Vec<usize>> = HashMap::new();
            let members = self.members(class, u)?.clone();
            for (i, m) in members.iter().enumerate() {
                map.entry(m.restrict(t)?).or_default().push(i);
            }
            self.cache.insert((u, t), map);
        }
        Ok(&self.cache[&(u, t)])
    }
}

fn user_class_relabel_closed(class: &FiniteClass) -> Result<bool> {
    if let ClassKind::User(u) = &class.kind {
        for members in u.sizes.values() {
            let set: HashSet<&FiniteStructure> = members.iter().collect();
            for m in members {
                let n = m.n() as u32;
                for perm in (1..=n).permutations(n as usize) {
                    if !set.contains(&m.apply_injection(&perm)?) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Checks joint embedding for all pairs of members of size at most `n_max`,
/// searching hosts up to `search_bound`.
pub fn check_jep(class: &FiniteClass, n_max: usize, search_bound: usize) -> Result<JepReport> {
    if !user_class_relabel_closed(class)? {
        return Err(Error::Validation(
            "user class is not closed under relabeling; embedding searches would be unsound"
                .into(),
        ));
    }
    let mut index = PrefixIndex::new();
    for s in 1..=n_max {
        for t in s..=n_max {
            let lefts = class.enumerate(s)?;
            let rights = class.enumerate(t)?;
            for left in &lefts {
                for right in &rights {
                    let canonical = s + t;
                    let top = search_bound.min(class.enum_bound);
                    let mut found = false;
                    for u in t..=top {
                        // Hosts with `left` as prefix; `right` embedded anywhere.
                        let candidates = index
                            .by_prefix(class, u, s)?
                            .get(left)
                            .cloned()
                            .unwrap_or_default();
                        for ci in candidates {
                            let host = &index.members(class, u)?[ci];
                            if !right.enumerate_embeddings(host)?.is_empty() {
                                found = true;
                                break;
                            }
                        }
                        if found {
                            break;
                        }
                    }
                    if !found {
                        if canonical <= top {
                            return Ok(JepReport::Fail {
                                left: left.clone(),
                                right: right.clone(),
                            });
                        }
                        return Ok(JepReport::Unknown {
                            left: left.clone(),
                            right: right.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(JepReport::Pass)
}

/// A disjoint-amalgamation instance: `left` and `right` both extend `base`
/// through the recorded embeddings.
#[derive(Clone, Debug)]
pub struct DapCase {
    /// The shared substructure.
    pub base: FiniteStructure,
    /// First extension.
    pub left: FiniteStructure,
    /// Second extension.
    pub right: FiniteStructure,
    /// Embedding of `base` into `left`.
    pub phi_left: Vec<u32>,
    /// Embedding of `base` into `right`.
    pub phi_right: Vec<u32>,
}

/// Outcome of a disjoint-amalgamation check.
#[derive(Clone, Debug)]
pub enum DapReport {
    /// Every instance up to the bounds amalgamates disjointly.
    Pass,
    /// An instance with no disjoint amalgam after exhaustive search at the
    /// canonical amalgam size.
    Fail(DapCase),
    /// The search bound was too small to decide this instance.
    Unknown(DapCase),
}

/// Checks disjoint amalgamation over all bases and extension pairs of size
/// at most `n_max`, searching amalgams up to `search_bound`.
///
/// An amalgam must agree with both extensions and overlap exactly on the
/// image of the base: the two extension images intersect precisely in the
/// embedded base.
pub fn check_dap(class: &FiniteClass, n_max: usize, search_bound: usize) -> Result<DapReport> {
    if !user_class_relabel_closed(class)? {
        return Err(Error::Validation(
            "user class is not closed under relabeling; embedding searches would be unsound"
                .into(),
        ));
    }
    let mut index = PrefixIndex::new();
    for s in 1..=n_max {
        let bases = class.enumerate(s)?;
        for base in &bases {
            for t in s..=n_max {
                let lefts = class.enumerate(t)?;
                for left in &lefts {
                    let phis_left = base.enumerate_embeddings(left)?;
                    if phis_left.is_empty() {
                        continue;
                    }
                    for t2 in s..=n_max {
                        let rights = class.enumerate(t2)?;
                        for right in &rights {
                            let phis_right = base.enumerate_embeddings(right)?;
                            for phi_left in &phis_left {
                                for phi_right in &phis_right {
                                    let case = DapCase {
                                        base: base.clone(),
                                        left: left.clone(),
                                        right: right.clone(),
                                        phi_left: phi_left.clone(),
                                        phi_right: phi_right.clone(),
                                    };
                                    match amalgamates(class, &mut index, &case, search_bound)? {
                                        Amalgam::Found => {}
                                        Amalgam::None => return Ok(DapReport::Fail(case)),
                                        Amalgam::BoundTooSmall => {
                                            return Ok(DapReport::Unknown(case))
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(DapReport::Pass)
}

enum Amalgam {
    Found,
    None,
    BoundTooSmall,
}

fn amalgamates(
    class: &FiniteClass,
    index: &mut PrefixIndex,
    case: &DapCase,
    search_bound: usize,
) -> Result<Amalgam> {
    let s = case.base.n();
    let t = case.left.n();
    let t2 = case.right.n();
    let canonical = t + t2 - s;
    let top = search_bound.min(class.enum_bound);
    // Relabeling freedom puts `left` on the prefix {1..t} of the amalgam.
    for u in canonical..=top {
        let candidates = index
            .by_prefix(class, u, t)?
            .get(&case.left)
            .cloned()
            .unwrap_or_default();
        if candidates.is_empty() {
            continue;
        }
        // The right embedding is pinned on the base image and must send the
        // rest of `right` outside {1..t}.
        let mut pinned: Vec<Option<u32>> = vec![None; t2];
        for (i, &b) in case.phi_right.iter().enumerate() {
            pinned[(b - 1) as usize] = Some(case.phi_left[i]);
        }
        let free_positions: Vec<usize> =
            (0..t2).filter(|&p| pinned[p].is_none()).collect();
        let outside: Vec<u32> = ((t as u32 + 1)..=(u as u32)).collect();
        for assignment in outside.iter().copied().permutations(free_positions.len()) {
            let mut psi = vec![0u32; t2];
            for (p, v) in pinned.iter().enumerate() {
                if let Some(v) = v {
                    psi[p] = *v;
                }
            }
            for (slot, &p) in free_positions.iter().enumerate() {
                psi[p] = assignment[slot];
            }
            for &ci in &candidates {
                let host = &index.members(class, u)?[ci];
                if host.apply_injection(&psi)? == case.right {
                    return Ok(Amalgam::Found);
                }
            }
        }
    }
    if canonical <= top {
        Ok(Amalgam::None)
    } else {
        Ok(Amalgam::BoundTooSmall)
    }
}

/// Outcome of the hyperplane amalgamation check at size `n`.
#[derive(Clone, Debug)]
pub enum NdapReport {
    /// Every pairwise-compatible hyperplane family extends to a member.
    Pass,
    /// A pairwise-compatible family with no common extension. Entry `i`
    /// (0-based) lives on the labeled domain `{1..n} \ {i+1}`, stored over
    /// `{1..n-1}` by the increasing relabeling.
    Fail {
        /// The unextendable family.
        family: Vec<FiniteStructure>,
    },
}

/// Position of label `j` within the increasingly relabeled `{1..n} \ {i}`.
fn dropped_position(i: u32, j: u32) -> u32 {
    if j < i {
        j
    } else {
        j - 1
    }
}

fn delete_injection(len: usize, pos: u32) -> Vec<u32> {
    (1..=len as u32 + 1).filter(|&v| v != pos).collect()
}

/// Checks the hyperplane amalgamation property at size `n`: every family
/// `(S_1, ..., S_n)` of members on the domains `{1..n} \ {i}` that agree
/// pairwise on overlaps extends to a member over `{1..n}`.
pub fn check_ndap(class: &FiniteClass, n: usize) -> Result<NdapReport> {
    if n < 2 {
        return Err(Error::Domain("hyperplane families need n >= 2".into()));
    }
    let small = class.enumerate(n - 1)?;
    let big = class.enumerate(n)?;
    let mut extendable: HashSet<Vec<FiniteStructure>> = HashSet::new();
    for member in &big {
        extendable.insert(restriction_family(member, n)?);
    }
    // Overlap projections: member index -> dropped position -> projection.
    let mut proj: Vec<Vec<FiniteStructure>> = Vec::with_capacity(small.len());
    for m in &small {
        let mut per_pos = Vec::with_capacity(n - 1);
        for pos in 1..=(n - 1) as u32 {
            per_pos.push(m.apply_injection(&delete_injection(n - 2, pos))?);
        }
        proj.push(per_pos);
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    if let Some(family) = ndap_search(&small, &proj, n, &mut chosen, &extendable) {
        return Ok(NdapReport::Fail {
            family: family.iter().map(|&i| small[i].clone()).collect(),
        });
    }
    Ok(NdapReport::Pass)
}

fn ndap_search(
    small: &[FiniteStructure],
    proj: &[Vec<FiniteStructure>],
    n: usize,
    chosen: &mut Vec<usize>,
    extendable: &HashSet<Vec<FiniteStructure>>,
) -> Option<Vec<usize>> {
    if chosen.len() == n {
        let family: Vec<FiniteStructure> =
            chosen.iter().map(|&i| small[i].clone()).collect();
        if !extendable.contains(&family) {
            return Some(chosen.clone());
        }
        return None;
    }
    let j = chosen.len() as u32 + 1;
    'next: for cand in 0..small.len() {
        for (prev_idx, &prev) in chosen.iter().enumerate() {
            let i = prev_idx as u32 + 1;
            // S_i restricted away from j must match S_j restricted away from i.
            let pi = dropped_position(i, j) - 1;
            let pj = dropped_position(j, i) - 1;
            if proj[prev][pi as usize] != proj[cand][pj as usize] {
                continue 'next;
            }
        }
        chosen.push(cand);
        if let Some(hit) = ndap_search(small, proj, n, chosen, extendable) {
            return Some(hit);
        }
        chosen.pop();
    }
    None
}

/// The hyperplane restriction family of a member over `{1..n}`.
pub fn restriction_family(member: &FiniteStructure, n: usize) -> Result<Vec<FiniteStructure>> {
    let mut family = Vec::with_capacity(n);
    for i in 1..=n as u32 {
        family.push(member.apply_injection(&delete_injection(n - 1, i))?);
    }
    Ok(family)
}

/// Whether a hyperplane family is pairwise compatible and extends to a
/// member over `{1..n}`. The family is given as in [`NdapReport::Fail`].
pub fn family_extends(
    class: &FiniteClass,
    family: &[FiniteStructure],
    n: usize,
) -> Result<FamilyExtension> {
    if family.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} hyperplane structures, got {}",
            family.len()
        )));
    }
    for (a, sa) in family.iter().enumerate() {
        for (b, sb) in family.iter().enumerate().skip(a + 1) {
            let i = a as u32 + 1;
            let j = b as u32 + 1;
            let pa = dropped_position(i, j);
            let pb = dropped_position(j, i);
            let left = sa.apply_injection(&delete_injection(n - 2, pa))?;
            let right = sb.apply_injection(&delete_injection(n - 2, pb))?;
            if left != right {
                return Ok(FamilyExtension::Incompatible { i, j });
            }
        }
    }
    for member in class.enumerate(n)? {
        if restriction_family(&member, n)? == family {
            return Ok(FamilyExtension::Extends(member));
        }
    }
    Ok(FamilyExtension::NoExtension)
}

/// Result of [`family_extends`].
#[derive(Clone, Debug)]
pub enum FamilyExtension {
    /// The family extends; a witness extension is attached.
    Extends(FiniteStructure),
    /// Pairwise compatible but with no common extension in the class.
    NoExtension,
    /// Entries `i` and `j` disagree on their overlap.
    Incompatible {
        /// First hyperplane index (1-based).
        i: u32,
        /// Second hyperplane index (1-based).
        j: u32,
    },
}
