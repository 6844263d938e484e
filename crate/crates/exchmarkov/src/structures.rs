//! Finite relational structures over `{1..n}`.
//!
//! A [`Signature`] fixes relation names and arities; a [`FiniteStructure`]
//! stores, for each relation, the set of tuples (1-indexed, entries in
//! `1..=n`) at which it holds. Structures compare, hash and order by value,
//! so they can key histograms and sets directly.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;

use crate::{Error, Result};

/// Relation names with arities. Names are unique; arities are at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    rels: Vec<(String, usize)>,
}

impl Signature {
    /// Builds a signature from `(name, arity)` pairs.
    pub fn new(rels: Vec<(String, usize)>) -> Result<Self> {
        if rels.is_empty() {
            return Err(Error::Validation("signature has no relations".into()));
        }
        for (name, arity) in &rels {
            if name.is_empty() {
                return Err(Error::Validation("empty relation name".into()));
            }
            if *arity == 0 {
                return Err(Error::Validation(format!("relation {name} has arity 0")));
            }
        }
        let mut names: Vec<&str> = rels.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate relation name".into()));
        }
        Ok(Signature { rels })
    }

    /// The `(name, arity)` pairs in declaration order.
    pub fn relations(&self) -> &[(String, usize)] {
        &self.rels
    }

    /// Number of relations.
    pub fn len(&self) -> usize {
        self.rels.len()
    }

    /// True when the signature has no relations (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    /// Index of a relation by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.rels.iter().position(|(n, _)| n == name)
    }

    /// Arity of relation `idx`.
    pub fn arity(&self, idx: usize) -> usize {
        self.rels[idx].1
    }

    /// Name of relation `idx`.
    pub fn name(&self, idx: usize) -> &str {
        &self.rels[idx].0
    }

    /// Largest arity in the signature.
    pub fn max_arity(&self) -> usize {
        self.rels.iter().map(|(_, a)| *a).max().unwrap_or(0)
    }
}

/// A finite structure: a domain size `n` and one tuple set per relation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteStructure {
    sig: Arc<Signature>,
    n: usize,
    rels: Vec<BTreeSet<Vec<u32>>>,
}

impl fmt::Debug for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.n)?;
        for (i, set) in self.rels.iter().enumerate() {
            write!(f, " {}={{", self.sig.name(i))?;
            for (j, t) in set.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "({})", t.iter().map(|v| v.to_string()).join(","))?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

impl FiniteStructure {
    /// An empty structure (no tuples) over `{1..n}`.
    pub fn empty(sig: Arc<Signature>, n: usize) -> Self {
        let rels = vec![BTreeSet::new(); sig.len()];
        FiniteStructure { sig, n, rels }
    }

    /// Domain size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The signature.
    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    fn check_tuple(&self, rel: usize, tuple: &[u32]) -> Result<()> {
        if rel >= self.sig.len() {
            return Err(Error::Domain(format!("no relation with index {rel}")));
        }
        let arity = self.sig.arity(rel);
        if tuple.len() != arity {
            return Err(Error::Validation(format!(
                "relation {} expects arity {arity}, got tuple of length {}",
                self.sig.name(rel),
                tuple.len()
            )));
        }
        for &v in tuple {
            if v == 0 || v as usize > self.n {
                return Err(Error::Validation(format!(
                    "relation {}: entry {v} outside 1..={}",
                    self.sig.name(rel),
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Adds a tuple to relation `rel`. Idempotent.
    pub fn insert(&mut self, rel: usize, tuple: &[u32]) -> Result<()> {
        self.check_tuple(rel, tuple)?;
        self.rels[rel].insert(tuple.to_vec());
        Ok(())
    }

    /// Adds a tuple to the relation named `name`.
    pub fn insert_named(&mut self, name: &str, tuple: &[u32]) -> Result<()> {
        let rel = self
            .sig
            .index_of(name)
            .ok_or_else(|| Error::Domain(format!("no relation named {name}")))?;
        self.insert(rel, tuple)
    }

    /// Removes a tuple from relation `rel`.
    pub fn remove(&mut self, rel: usize, tuple: &[u32]) -> Result<bool> {
        self.check_tuple(rel, tuple)?;
        Ok(self.rels[rel].remove(tuple))
    }

    /// Sets membership of `tuple` in relation `rel`.
    pub fn set(&mut self, rel: usize, tuple: &[u32], present: bool) -> Result<()> {
        self.check_tuple(rel, tuple)?;
        if present {
            self.rels[rel].insert(tuple.to_vec());
        } else {
            self.rels[rel].remove(tuple);
        }
        Ok(())
    }

    /// Whether `tuple` is in relation `rel`.
    pub fn contains(&self, rel: usize, tuple: &[u32]) -> bool {
        self.rels[rel].contains(tuple)
    }

    /// The tuple set of relation `rel`.
    pub fn tuples(&self, rel: usize) -> &BTreeSet<Vec<u32>> {
        &self.rels[rel]
    }

    /// Total number of tuples across relations.
    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(|s| s.len()).sum()
    }

    /// The image structure under an injection `phi: {1..m} -> {1..n}`.
    ///
    /// The result `M'` over `{1..m}` holds a tuple `x` exactly when `M` holds
    /// the entrywise image `phi(x)`.
    pub fn apply_injection(&self, phi: &[u32]) -> Result<FiniteStructure> {
        let m = phi.len();
        let mut inverse = vec![0u32; self.n + 1];
        for (i, &v) in phi.iter().enumerate() {
            if v == 0 || v as usize > self.n {
                return Err(Error::Domain(format!(
                    "injection value {v} outside 1..={}",
                    self.n
                )));
            }
            if inverse[v as usize] != 0 {
                return Err(Error::Domain(format!("injection repeats value {v}")));
            }
            inverse[v as usize] = (i + 1) as u32;
        }
        let mut out = FiniteStructure::empty(self.sig.clone(), m);
        for (rel, set) in self.rels.iter().enumerate() {
            for tuple in set {
                let mut pulled = Vec::with_capacity(tuple.len());
                let mut ok = true;
                for &v in tuple {
                    let p = inverse[v as usize];
                    if p == 0 {
                        ok = false;
                        break;
                    }
                    pulled.push(p);
                }
                if ok {
                    out.rels[rel].insert(pulled);
                }
            }
        }
        Ok(out)
    }

    /// Restriction to the initial segment `{1..m}`.
    pub fn restrict(&self, m: usize) -> Result<FiniteStructure> {
        if m > self.n {
            return Err(Error::Domain(format!(
                "cannot restrict a structure over {} elements to {m}",
                self.n
            )));
        }
        let phi: Vec<u32> = (1..=m as u32).collect();
        self.apply_injection(&phi)
    }

    /// Restriction to an arbitrary labeled subset, relabeled increasingly.
    ///
    /// `subset` must be strictly increasing; element `subset[k]` becomes
    /// `k+1` in the result.
    pub fn restrict_to(&self, subset: &[u32]) -> Result<FiniteStructure> {
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("subset must be strictly increasing".into()));
        }
        self.apply_injection(subset)
    }

    /// Truncation distance `1/(1+k)` where `k` is the largest `m` such that
    /// both structures restrict identically to `{1..m}`.
    ///
    /// Structures that already differ over `{1}` are at distance 1; equal
    /// structures over `{1..n}` are at `1/(1+n)`.
    pub fn ultrametric(&self, other: &FiniteStructure) -> Result<f64> {
        if self.sig != other.sig {
            return Err(Error::Domain("signatures differ".into()));
        }
        if self.n != other.n {
            return Err(Error::Domain(format!(
                "domain sizes differ: {} vs {}",
                self.n, other.n
            )));
        }
        let mut k = 0usize;
        for m in (1..=self.n).rev() {
            if self.restrict(m)? == other.restrict(m)? {
                k = m;
                break;
            }
        }
        Ok(1.0 / (1.0 + k as f64))
    }

    /// Whether some permutation of `{1..n}` maps `self` onto `other`.
    pub fn is_isomorphic(&self, other: &FiniteStructure) -> Result<bool> {
        if self.sig != other.sig {
            return Err(Error::Domain("signatures differ".into()));
        }
        if self.n != other.n {
            return Ok(false);
        }
        for rel in 0..self.sig.len() {
            if self.rels[rel].len() != other.rels[rel].len() {
                return Ok(false);
            }
        }
        if self.n > 10 {
            return Err(Error::Capacity(format!(
                "isomorphism search over {} elements exceeds the permutation budget",
                self.n
            )));
        }
        let n = self.n as u32;
        let mut perm: Vec<u32> = Vec::with_capacity(self.n);
        let mut used = vec![false; self.n + 1];
        self.iso_search(other, n, &mut perm, &mut used)
    }

    fn iso_search(
        &self,
        other: &FiniteStructure,
        n: u32,
        perm: &mut Vec<u32>,
        used: &mut Vec<bool>,
    ) -> Result<bool> {
        let k = perm.len();
        if k == n as usize {
            return Ok(other.apply_injection(perm)? == *self);
        }
        for v in 1..=n {
            if used[v as usize] {
                continue;
            }
            perm.push(v);
            used[v as usize] = true;
            // Prune: tuples of `self` fully inside {1..k+1} must match
            // `other` pulled back through the partial map.
            if self.partial_consistent(other, perm) && self.iso_search(other, n, perm, used)? {
                return Ok(true);
            }
            perm.pop();
            used[v as usize] = false;
        }
        Ok(false)
    }

    fn partial_consistent(&self, other: &FiniteStructure, perm: &[u32]) -> bool {
        let k = perm.len() as u32;
        for rel in 0..self.sig.len() {
            for tuple in &self.rels[rel] {
                if tuple.iter().all(|&v| v <= k) {
                    let image: Vec<u32> =
                        tuple.iter().map(|&v| perm[(v - 1) as usize]).collect();
                    if !other.rels[rel].contains(&image) {
                        return false;
                    }
                }
            }
            for tuple in &other.rels[rel] {
                if tuple.iter().all(|&v| perm.contains(&v)) {
                    let pre: Vec<u32> = tuple
                        .iter()
                        .map(|&v| perm.iter().position(|&p| p == v).unwrap() as u32 + 1)
                        .collect();
                    if !self.rels[rel].contains(&pre) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All injections `phi: {1..m} -> {1..n}` with `target^phi = self`.
    pub fn enumerate_embeddings(&self, target: &FiniteStructure) -> Result<Vec<Vec<u32>>> {
        if self.sig != target.sig {
            return Err(Error::Domain("signatures differ".into()));
        }
        let m = self.n;
        let n = target.n;
        if m > n {
            return Ok(Vec::new());
        }
        let mut found = Vec::new();
        for phi in (1..=n as u32).permutations(m) {
            if target.apply_injection(&phi)? == *self {
                found.push(phi);
            }
        }
        Ok(found)
    }

    /// Whether every relation is closed under permuting tuple coordinates.
    pub fn is_symmetric(&self) -> bool {
        for set in &self.rels {
            for tuple in set {
                for perm in tuple.iter().copied().permutations(tuple.len()) {
                    if !set.contains(&perm) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Enumerates every structure over `{1..n}` for `sig`, in a fixed order.
///
/// The count is `prod_rel 2^(n^arity)`; callers should bound it first via
/// [`count_all`]. Errors above `10^6`.
pub fn enumerate_all(sig: &Arc<Signature>, n: usize) -> Result<Vec<FiniteStructure>> {
    let count = count_all(sig, n)
        .ok_or_else(|| Error::Capacity("structure count overflows".into()))?;
    if count > 1_000_000 {
        return Err(Error::Capacity(format!(
            "{count} structures over {n} elements exceeds the enumeration budget"
        )));
    }
    let mut slots: Vec<(usize, Vec<u32>)> = Vec::new();
    for rel in 0..sig.len() {
        for tuple in all_tuples(n, sig.arity(rel)) {
            slots.push((rel, tuple));
        }
    }
    let mut out = Vec::with_capacity(count as usize);
    for mask in 0..count {
        let mut s = FiniteStructure::empty(sig.clone(), n);
        for (bit, (rel, tuple)) in slots.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                s.rels[*rel].insert(tuple.clone());
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Number of structures over `{1..n}` for `sig`, if it fits in `u128`.
pub fn count_all(sig: &Arc<Signature>, n: usize) -> Option<u128> {
    let mut bits: u32 = 0;
    for rel in 0..sig.len() {
        let cells = (n as u128).checked_pow(sig.arity(rel) as u32)?;
        bits = bits.checked_add(u32::try_from(cells).ok()?)?;
    }
    if bits >= 127 {
        return None;
    }
    Some(1u128 << bits)
}

/// All tuples in `{1..n}^arity` in lexicographic order.
pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![1u32; arity];
    if n == 0 {
        return out;
    }
    loop {
        out.push(current.clone());
        let mut pos = arity;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < n as u32 {
                current[pos] += 1;
                for c in current.iter_mut().skip(pos + 1) {
                    *c = 1;
                }
                break;
            }
        }
    }
}

/// The increasing injection enumerating a subset of `{1..n}`.
pub fn inclusion_of(subset: &[u32]) -> Vec<u32> {
    subset.to_vec()
}

/// Falling factorial `n (n-1) ... (n-m+1)` as `f64`.
pub fn falling(n: usize, m: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..m {
        acc *= (n - i) as f64;
    }
    acc
}
