//! Continuous-time dynamics driven by a rate measure over kernels.
//!
//! A [`RateMeasure`] combines generic kernel atoms with the standard
//! partition-valued event families: pairwise block merges with a ranked
//! simplex paintbox available for both coagulation and fragmentation, plus
//! single-element erosion. Simulation uses proposal thinning: every family
//! proposes events at a constant rate bounding its true rate, and proposals
//! that do not change the state are discarded, which preserves the law of
//! the jump process.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::classes::{blocks_of_partition, partition_from_blocks, ClassKind, FiniteClass};
use crate::kernels::{coag_kernel, frag_kernel, Kernel, KernelSampler, UNBOUNDED};
use crate::levyito::{phi_s_alpha, IntegerPartition, Multiset};
use crate::structures::FiniteStructure;
use crate::{seed, Error, Result};

/// A point of the ranked simplex: nonincreasing entries in `[0,1]` with sum
/// at most 1. The deficit is dust mass.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedSimplexPoint {
    entries: Vec<f64>,
}

impl RankedSimplexPoint {
    /// Validates and normalizes (trailing zero entries are dropped).
    pub fn new(entries: Vec<f64>) -> Result<RankedSimplexPoint> {
        for &e in &entries {
            if !e.is_finite() || !(0.0..=1.0).contains(&e) {
                return Err(Error::Validation(format!(
                    "simplex entry {e} outside [0,1]"
                )));
            }
        }
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "simplex entries must be nonincreasing".into(),
            ));
        }
        let sum: f64 = entries.iter().sum();
        if sum > 1.0 + 1e-9 {
            return Err(Error::Validation(format!(
                "simplex entries sum to {sum} > 1"
            )));
        }
        let mut entries = entries;
        while entries.last() == Some(&0.0) {
            entries.pop();
        }
        Ok(RankedSimplexPoint { entries })
    }

    /// The positive box masses, largest first.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Total box mass.
    pub fn mass(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Dust mass (deficit to 1).
    pub fn dust(&self) -> f64 {
        (1.0 - self.mass()).max(0.0)
    }

    /// Box index for a uniform draw, or `None` for dust.
    fn draw_box(&self, u: f64) -> Option<usize> {
        let mut acc = 0.0;
        for (j, &e) in self.entries.iter().enumerate() {
            acc += e;
            if u < acc {
                return Some(j);
            }
        }
        None
    }
}

impl fmt::Display for RankedSimplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .entries
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "({body})")
    }
}

/// How a paintbox acts: gluing blocks or splitting one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaintboxMode {
    /// Blocks sharing a box merge; dust blocks stay separate.
    Coagulation,
    /// One block's elements are distributed over boxes; dust elements
    /// become singletons.
    Fragmentation,
}

/// A finite-activity rate measure over kernels: generic atoms plus the
/// builtin partition event families.
#[derive(Clone, Debug)]
pub struct RateMeasure {
    class: FiniteClass,
    kingman: f64,
    erosion: f64,
    paintbox: Vec<(f64, RankedSimplexPoint, PaintboxMode)>,
    atoms: Vec<(f64, KernelSampler)>,
}

fn check_rate(rate: f64) -> Result<f64> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::Validation(format!(
            "rate {rate} must be positive and finite"
        )));
    }
    Ok(rate)
}

impl RateMeasure {
    /// The zero measure on a class.
    pub fn empty(class: FiniteClass) -> RateMeasure {
        RateMeasure {
            class,
            kingman: 0.0,
            erosion: 0.0,
            paintbox: Vec::new(),
            atoms: Vec::new(),
        }
    }

    /// Pairwise block merges: every pair of blocks merges at rate `c`.
    pub fn kingman_measure(c: f64) -> Result<RateMeasure> {
        let mut m = RateMeasure::empty(FiniteClass::builtin(ClassKind::Partitions)?);
        m.kingman = check_rate(c)?;
        Ok(m)
    }

    /// Single-element erosion: every element of a non-singleton block
    /// detaches into its own singleton at rate `c`.
    pub fn erosion_measure(c: f64) -> Result<RateMeasure> {
        let mut m = RateMeasure::empty(FiniteClass::builtin(ClassKind::Partitions)?);
        m.erosion = check_rate(c)?;
        Ok(m)
    }

    /// A paintbox family at rate `w`. In coagulation mode the whole
    /// configuration reshuffles at rate `w`: every block picks a box and
    /// blocks sharing one merge. In fragmentation mode every block
    /// independently shatters at rate `w`: its elements pick boxes, dust
    /// elements becoming singletons.
    pub fn paintbox_measure(
        w: f64,
        point: RankedSimplexPoint,
        mode: PaintboxMode,
    ) -> Result<RateMeasure> {
        let w = check_rate(w)?;
        match mode {
            PaintboxMode::Coagulation => {
                if point.entries.is_empty() {
                    return Err(Error::Validation(
                        "a pure-dust paintbox never coagulates anything".into(),
                    ));
                }
            }
            PaintboxMode::Fragmentation => {
                if point.entries == [1.0] {
                    return Err(Error::Validation(
                        "the one-box paintbox never fragments anything".into(),
                    ));
                }
            }
        }
        let mut m = RateMeasure::empty(FiniteClass::builtin(ClassKind::Partitions)?);
        m.paintbox.push((w, point, mode));
        Ok(m)
    }

    /// Adds a generic atom: kernels drawn from `sampler` fire at rate
    /// `rate`. The identity point mass is rejected, as are samplers on a
    /// different class.
    pub fn with_atom(mut self, rate: f64, sampler: KernelSampler) -> Result<RateMeasure> {
        let rate = check_rate(rate)?;
        if sampler.is_identity_point_mass() {
            return Err(Error::Validation(
                "the identity kernel generates no jumps; it cannot be an atom".into(),
            ));
        }
        if *sampler.class() != self.class {
            return Err(Error::Validation(format!(
                "atom class {} does not match measure class {}",
                sampler.class().id(),
                self.class.id()
            )));
        }
        self.atoms.push((rate, sampler));
        Ok(self)
    }

    /// Superposition of two measures on the same class.
    pub fn combined(mut self, other: RateMeasure) -> Result<RateMeasure> {
        if other.class != self.class {
            return Err(Error::Validation(format!(
                "cannot combine measures on {} and {}",
                self.class.id(),
                other.class.id()
            )));
        }
        self.kingman += other.kingman;
        self.erosion += other.erosion;
        self.paintbox.extend(other.paintbox);
        self.atoms.extend(other.atoms);
        Ok(self)
    }

    /// The class the measure's kernels act on.
    pub fn class(&self) -> &FiniteClass {
        &self.class
    }

    /// Rate of the pairwise-merge family.
    pub fn kingman_rate(&self) -> f64 {
        self.kingman
    }

    /// Rate of the erosion family.
    pub fn erosion_rate(&self) -> f64 {
        self.erosion
    }

    /// The paintbox families.
    pub fn paintboxes(&self) -> &[(f64, RankedSimplexPoint, PaintboxMode)] {
        &self.paintbox
    }

    /// The generic atoms.
    pub fn atoms(&self) -> &[(f64, KernelSampler)] {
        &self.atoms
    }

    fn has_partition_families(&self) -> bool {
        self.kingman > 0.0 || self.erosion > 0.0 || !self.paintbox.is_empty()
    }

    /// The measure expressed as proposal samplers at truncation size `n`:
    /// each entry is a proposal rate and a sampler of the kernel applied
    /// per proposal. Proposals may be null (identity on the current state);
    /// the rates bound the true jump rates accordingly.
    pub fn event_samplers(&self, n: usize) -> Result<Vec<(f64, KernelSampler)>> {
        let mut out = Vec::new();
        if self.kingman > 0.0 {
            let rate = self.kingman * (n * n.saturating_sub(1)) as f64 / 2.0;
            if rate > 0.0 {
                out.push((rate, KernelSampler::kingman_step(n)?));
            }
        }
        if self.erosion > 0.0 {
            out.push((self.erosion * n as f64, erosion_step_sampler(n)?));
        }
        for (w, point, mode) in &self.paintbox {
            match mode {
                PaintboxMode::Coagulation => {
                    out.push((*w, paintbox_coag_sampler(point.clone(), n)?));
                }
                PaintboxMode::Fragmentation => {
                    out.push((*w * n as f64, paintbox_frag_sampler(point.clone(), n)?));
                }
            }
        }
        for (rate, sampler) in &self.atoms {
            out.push((*rate, sampler.clone()));
        }
        Ok(out)
    }
}

/// The kernel detaching element `k` into its own singleton block (identity
/// on structures with fewer than `k` elements or with `k` already alone).
pub fn erosion_kernel(k: u32) -> Result<Kernel> {
    if k == 0 {
        return Err(Error::Domain("elements are numbered from 1".into()));
    }
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    Ok(Kernel::from_rule(
        class,
        UNBOUNDED,
        &format!("erode:{k}"),
        move |m| {
            if k as usize > m.n() {
                return Ok(m.clone());
            }
            let blocks = blocks_of_partition(m)?;
            let mut out: Vec<Vec<u32>> = Vec::with_capacity(blocks.len() + 1);
            for block in blocks {
                if block.contains(&k) && block.len() > 1 {
                    out.push(block.into_iter().filter(|&v| v != k).collect());
                    out.push(vec![k]);
                } else {
                    out.push(block);
                }
            }
            let refs: Vec<&[u32]> = out.iter().map(|b| b.as_slice()).collect();
            partition_from_blocks(m.n(), &refs)
        },
    ))
}

/// One erosion proposal: a uniformly random element of `{1..n}` detached.
pub fn erosion_step_sampler(n: usize) -> Result<KernelSampler> {
    if n == 0 {
        return Err(Error::Domain("need a nonempty domain".into()));
    }
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    Ok(KernelSampler::from_fn(
        class,
        &format!("erosion-step:{n}"),
        move |s| {
            let mut rng = seed::rng(s, "element", &[]);
            erosion_kernel(rng.gen_range(1..=n as u32))
        },
    ))
}

/// One coagulation proposal from a paintbox: block indices `{1..n}` pick
/// boxes, indices sharing a box merge, dust indices stay separate.
pub fn paintbox_coag_sampler(point: RankedSimplexPoint, n: usize) -> Result<KernelSampler> {
    if n == 0 {
        return Err(Error::Domain("need a nonempty domain".into()));
    }
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    let tag = format!("paintbox-coag:{point}:{n}");
    Ok(KernelSampler::from_fn(class, &tag, move |s| {
        let mut rng = seed::rng(s, "boxes", &[]);
        let k = point.entries.len();
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); k];
        let mut pattern: Vec<Vec<u32>> = Vec::new();
        for idx in 1..=n as u32 {
            match point.draw_box(rng.gen::<f64>()) {
                Some(j) => groups[j].push(idx),
                None => pattern.push(vec![idx]),
            }
        }
        pattern.extend(groups.into_iter().filter(|g| !g.is_empty()));
        let refs: Vec<&[u32]> = pattern.iter().map(|b| b.as_slice()).collect();
        coag_kernel(&partition_from_blocks(n, &refs)?)
    }))
}

/// One fragmentation proposal from a paintbox: a uniformly random block
/// index, whose block's elements pick boxes; dust elements become
/// singletons. Proposals naming a missing block are null.
pub fn paintbox_frag_sampler(point: RankedSimplexPoint, n: usize) -> Result<KernelSampler> {
    if n == 0 {
        return Err(Error::Domain("need a nonempty domain".into()));
    }
    let class = FiniteClass::builtin(ClassKind::Partitions)?;
    let tag = format!("paintbox-frag:{point}:{n}");
    Ok(KernelSampler::from_fn(class, &tag, move |s| {
        let mut rng = seed::rng(s, "boxes", &[]);
        let target = rng.gen_range(1..=n);
        let k = point.entries.len();
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); k];
        let mut pattern: Vec<Vec<u32>> = Vec::new();
        for idx in 1..=n as u32 {
            match point.draw_box(rng.gen::<f64>()) {
                Some(j) => groups[j].push(idx),
                None => pattern.push(vec![idx]),
            }
        }
        pattern.extend(groups.into_iter().filter(|g| !g.is_empty()));
        let refs: Vec<&[u32]> = pattern.iter().map(|b| b.as_slice()).collect();
        frag_kernel(&partition_from_blocks(n, &refs)?, target)
    }))
}

/// A realized continuous-time path: the initial state and the recorded
/// jumps `(time, new state)` in increasing time order.
#[derive(Clone, Debug)]
pub struct CTTrajectory {
    /// Domain size of every state.
    pub n: usize,
    /// State at time 0.
    pub initial: FiniteStructure,
    /// Actual state changes; null proposals are not recorded.
    pub jumps: Vec<(f64, FiniteStructure)>,
}

impl CTTrajectory {
    /// The state at time `t` (right-continuous: at a jump time, the
    /// post-jump state).
    pub fn state_at(&self, t: f64) -> &FiniteStructure {
        let idx = self.jumps.partition_point(|&(jt, _)| jt <= t);
        if idx == 0 {
            &self.initial
        } else {
            &self.jumps[idx - 1].1
        }
    }

    /// Number of recorded state changes.
    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }
}

/// Canonical block labels of a partition: element `e` gets the index of
/// its block, blocks numbered by first occurrence (least element).
fn labels_of_partition(m: &FiniteStructure) -> Result<Vec<u32>> {
    let blocks = blocks_of_partition(m)?;
    let mut labels = vec![0u32; m.n()];
    for (b, block) in blocks.iter().enumerate() {
        for &e in block {
            labels[e as usize - 1] = b as u32;
        }
    }
    Ok(labels)
}

fn canonicalize_labels(labels: &mut [u32]) {
    let mut map: Vec<u32> = vec![u32::MAX; labels.len()];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        let slot = &mut map[*l as usize];
        if *slot == u32::MAX {
            *slot = next;
            next += 1;
        }
        *l = *slot;
    }
}

fn structure_of_labels(labels: &[u32]) -> Result<FiniteStructure> {
    let b = labels.iter().max().map(|&m| m as usize + 1).unwrap_or(0);
    let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); b];
    for (e, &l) in labels.iter().enumerate() {
        blocks[l as usize].push(e as u32 + 1);
    }
    let refs: Vec<&[u32]> = blocks.iter().map(|v| v.as_slice()).collect();
    partition_from_blocks(labels.len(), &refs)
}

/// Simulates the jump process of a rate measure from `m0` up to `t_max`.
///
/// Proposal clocks: pairwise merges at `c * n(n-1)/2` (a uniform index
/// pair, null when the larger index names no block), erosion at `c * n`
/// (a uniform element, null when already a singleton), each coagulation
/// paintbox at its rate `w` (all blocks reassigned at once), each
/// fragmentation paintbox at `w * n` (a uniform block index), each atom at
/// its rate with a freshly drawn kernel. Equal seeds give equal paths.
pub fn simulate_ct(
    measure: &RateMeasure,
    m0: &FiniteStructure,
    t_max: f64,
    seed_value: u64,
) -> Result<CTTrajectory> {
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::Validation(format!(
            "time horizon {t_max} must be positive and finite"
        )));
    }
    if !measure.class.contains(m0) {
        return Err(Error::Validation(
            "initial structure is not in the measure's class".into(),
        ));
    }
    let n = m0.n();
    if n == 0 {
        return Err(Error::Validation("need a nonempty domain".into()));
    }

    enum Event<'a> {
        Kingman,
        Erosion,
        Paintbox(&'a RankedSimplexPoint, PaintboxMode),
        Atom(&'a KernelSampler),
    }
    let mut events: Vec<(f64, Event)> = Vec::new();
    if measure.kingman > 0.0 && n >= 2 {
        events.push((
            measure.kingman * (n * (n - 1)) as f64 / 2.0,
            Event::Kingman,
        ));
    }
    if measure.erosion > 0.0 {
        events.push((measure.erosion * n as f64, Event::Erosion));
    }
    for (w, point, mode) in &measure.paintbox {
        let rate = match mode {
            PaintboxMode::Coagulation => *w,
            PaintboxMode::Fragmentation => *w * n as f64,
        };
        events.push((rate, Event::Paintbox(point, *mode)));
    }
    for (rate, sampler) in &measure.atoms {
        events.push((*rate, Event::Atom(sampler)));
    }
    let total: f64 = events.iter().map(|(r, _)| r).sum();

    let mut jumps: Vec<(f64, FiniteStructure)> = Vec::new();
    if total == 0.0 {
        return Ok(CTTrajectory {
            n,
            initial: m0.clone(),
            jumps,
        });
    }

    // Partition family events run on block labels; structures materialize
    // only at recorded jumps and around generic atoms.
    let native = measure.has_partition_families();
    let mut labels: Vec<u32> = if native {
        labels_of_partition(m0)?
    } else {
        Vec::new()
    };
    let mut state: FiniteStructure = m0.clone();

    let mut rng = seed::rng(seed_value, "ct", &[n as u64]);
    let mut t = 0.0f64;
    loop {
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / total;
        if t > t_max || !t.is_finite() {
            break;
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = None;
        for (rate, ev) in &events {
            if pick < *rate {
                chosen = Some(ev);
                break;
            }
            pick -= rate;
        }
        let Some(ev) = chosen else { continue };
        let mut changed = false;
        match ev {
            Event::Kingman => {
                let i = rng.gen_range(0..n as u32);
                let j = {
                    let j = rng.gen_range(0..n as u32 - 1);
                    if j >= i {
                        j + 1
                    } else {
                        j
                    }
                };
                let (a, b) = (i.min(j), i.max(j));
                let blocks = labels.iter().max().copied().unwrap_or(0) + 1;
                if b < blocks {
                    for l in labels.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                    canonicalize_labels(&mut labels);
                    changed = true;
                }
            }
            Event::Erosion => {
                let e = rng.gen_range(0..n);
                let mine = labels[e];
                if labels.iter().filter(|&&l| l == mine).count() > 1 {
                    let fresh = labels.iter().max().copied().unwrap_or(0) + 1;
                    labels[e] = fresh;
                    canonicalize_labels(&mut labels);
                    changed = true;
                }
            }
            Event::Paintbox(point, PaintboxMode::Coagulation) => {
                let blocks = labels.iter().max().copied().unwrap_or(0) + 1;
                let k = point.entries.len() as u32;
                let mut box_of: Vec<u32> = Vec::with_capacity(blocks as usize);
                for l in 0..blocks {
                    box_of.push(match point.draw_box(rng.gen::<f64>()) {
                        Some(j) => j as u32,
                        None => k + l,
                    });
                }
                let mut next: Vec<u32> = labels.iter().map(|&l| box_of[l as usize]).collect();
                canonicalize_labels(&mut next);
                if next != labels {
                    labels = next;
                    changed = true;
                }
            }
            Event::Paintbox(point, PaintboxMode::Fragmentation) => {
                let blocks = labels.iter().max().copied().unwrap_or(0) + 1;
                let target = rng.gen_range(0..n as u32);
                if target < blocks {
                    let k = point.entries.len() as u32;
                    let base = blocks;
                    let mut next = labels.clone();
                    let mut dust = 0u32;
                    for l in next.iter_mut().filter(|l| **l == target) {
                        *l = match point.draw_box(rng.gen::<f64>()) {
                            Some(j) => base + j as u32,
                            None => {
                                dust += 1;
                                base + k + dust
                            }
                        };
                    }
                    canonicalize_labels(&mut next);
                    if next != labels {
                        labels = next;
                        changed = true;
                    }
                }
            }
            Event::Atom(sampler) => {
                let kernel = sampler
                    .sample(rng.gen::<u64>())
                    .map_err(|e| e.with_context(&format!("atom at time {t}")))?;
                if native {
                    state = structure_of_labels(&labels)?;
                }
                let next = kernel
                    .apply(&state)
                    .map_err(|e| e.with_context(&format!("atom at time {t}")))?;
                if next != state {
                    state = next;
                    if native {
                        labels = labels_of_partition(&state)?;
                    }
                    changed = true;
                }
            }
        }
        if changed {
            if native {
                state = structure_of_labels(&labels)?;
            }
            jumps.push((t, state.clone()));
        }
    }
    Ok(CTTrajectory {
        n,
        initial: m0.clone(),
        jumps,
    })
}

/// One component's contribution to the jump rate out of a state.
#[derive(Clone, Debug)]
pub struct RateComponent {
    /// Which family or atom the rate belongs to.
    pub label: String,
    /// Rate of actual state changes.
    pub rate: f64,
    /// Standard error when the rate was estimated by sampling kernels.
    pub stderr: Option<f64>,
}

/// Jump rates out of one state, per component and in total.
#[derive(Clone, Debug)]
pub struct JumpRates {
    /// Per-family and per-atom rates.
    pub components: Vec<RateComponent>,
    /// Sum of component rates.
    pub total: f64,
    /// Error of the total when any component was estimated.
    pub total_stderr: Option<f64>,
}

/// Probability that independently assigning `b` blocks to boxes (box `j`
/// with mass `s[j]`, rest dust) produces no collision, computed exactly
/// through elementary symmetric polynomials.
fn no_collision_prob(b: usize, s: &[f64]) -> f64 {
    let k = s.len();
    let dust: f64 = (1.0 - s.iter().sum::<f64>()).max(0.0);
    // e[m] holds the elementary symmetric polynomial of degree m; the
    // in-place recurrence must walk downward so e[m-1] still belongs to
    // the previous round.
    let mut e = vec![0.0f64; k + 1];
    e[0] = 1.0;
    for &sj in s {
        #[allow(clippy::needless_range_loop)]
        for m in (1..=k).rev() {
            e[m] += e[m - 1] * sj;
        }
    }
    let mut prob = 0.0f64;
    let top = b.min(k);
    for (m, &em) in e.iter().enumerate().take(top + 1) {
        // binom(b, m) * m! * e_m * dust^(b-m), built incrementally to stay
        // in range: falling factorial b(b-1)...(b-m+1) times e_m.
        let mut falling = 1.0f64;
        for i in 0..m {
            falling *= (b - i) as f64;
        }
        if dust == 0.0 && b > m {
            continue;
        }
        prob += falling * em * dust.powi((b - m) as i32);
    }
    prob.clamp(0.0, 1.0)
}

/// Computes the rate of actual state changes out of `m` under a measure.
/// Family rates are exact: pairwise merges count block pairs, erosion
/// counts elements in non-singleton blocks, paintbox rates use closed-form
/// collision and splitting probabilities. Point-mass atoms are evaluated
/// exactly; random atoms are estimated from `samples` kernel draws with a
/// reported standard error.
pub fn jump_rates(
    measure: &RateMeasure,
    m: &FiniteStructure,
    samples: usize,
    seed_value: u64,
) -> Result<JumpRates> {
    if !measure.class.contains(m) {
        return Err(Error::Validation(
            "structure is not in the measure's class".into(),
        ));
    }
    let mut components = Vec::new();
    if measure.has_partition_families() {
        let blocks = blocks_of_partition(m)?;
        let b = blocks.len();
        if measure.kingman > 0.0 {
            components.push(RateComponent {
                label: "kingman".into(),
                rate: measure.kingman * (b * b.saturating_sub(1)) as f64 / 2.0,
                stderr: None,
            });
        }
        if measure.erosion > 0.0 {
            let loose: usize = blocks.iter().map(|bl| bl.len()).filter(|&z| z > 1).sum();
            components.push(RateComponent {
                label: "erosion".into(),
                rate: measure.erosion * loose as f64,
                stderr: None,
            });
        }
        for (i, (w, point, mode)) in measure.paintbox.iter().enumerate() {
            match mode {
                PaintboxMode::Coagulation => {
                    components.push(RateComponent {
                        label: format!("paintbox-coag[{i}]"),
                        rate: w * (1.0 - no_collision_prob(b, &point.entries)),
                        stderr: None,
                    });
                }
                PaintboxMode::Fragmentation => {
                    let mut rate = 0.0;
                    for bl in &blocks {
                        let z = bl.len();
                        if z >= 2 {
                            let stay: f64 =
                                point.entries.iter().map(|s| s.powi(z as i32)).sum();
                            rate += w * (1.0 - stay);
                        }
                    }
                    components.push(RateComponent {
                        label: format!("paintbox-frag[{i}]"),
                        rate,
                        stderr: None,
                    });
                }
            }
        }
    }
    for (idx, (rate, sampler)) in measure.atoms.iter().enumerate() {
        if sampler.tag().starts_with("point:") {
            let kernel = sampler.sample(0)?;
            let moved = kernel.apply(m)? != *m;
            components.push(RateComponent {
                label: sampler.tag().to_string(),
                rate: if moved { *rate } else { 0.0 },
                stderr: None,
            });
        } else {
            if samples == 0 {
                return Err(Error::Validation(
                    "need at least one sample for random atoms".into(),
                ));
            }
            let mut moved = 0usize;
            for k in 0..samples {
                let kernel = sampler.sample(seed::derive(
                    seed_value,
                    "rate",
                    &[idx as u64, k as u64],
                ))?;
                if kernel.apply(m)? != *m {
                    moved += 1;
                }
            }
            let p = moved as f64 / samples as f64;
            components.push(RateComponent {
                label: sampler.tag().to_string(),
                rate: rate * p,
                stderr: Some(rate * (p * (1.0 - p) / samples as f64).sqrt()),
            });
        }
    }
    let total = components.iter().map(|c| c.rate).sum();
    let var: f64 = components
        .iter()
        .filter_map(|c| c.stderr.map(|e| e * e))
        .sum();
    let total_stderr = if var > 0.0 { Some(var.sqrt()) } else { None };
    Ok(JumpRates {
        components,
        total,
        total_stderr,
    })
}

/// Spreads an anchored kernel measure over a domain: for every multiset
/// `s` of `{1..n}` with the given type, one atom at `rate` whose kernels
/// are the base kernels conjugated to act at `s` instead of the canonical
/// anchor. The base sampler must be anchored: its kernels may only rewrite
/// entries at tuples carrying the canonical multiset of `alpha`; this is
/// verified on sample kernels before lifting.
pub fn lift_alpha_measure(
    base: &KernelSampler,
    alpha: &IntegerPartition,
    rate: f64,
    n: usize,
    seed_value: u64,
) -> Result<RateMeasure> {
    let rate = check_rate(rate)?;
    if alpha.k() as usize > n {
        return Err(Error::Validation(format!(
            "type {alpha} needs more than {n} elements"
        )));
    }
    let anchor = Multiset::canonical(alpha);
    crate::levyito::verify_anchored(base, &anchor, 2, seed_value)
        .map_err(|e| e.with_context("lift"))?;
    let sites = multisets_of_type(alpha, n, 100_000)?;
    let mut measure = RateMeasure::empty(base.class().clone());
    for s in sites {
        let perm = Arc::new(phi_s_alpha(&s, n)?);
        let inner = base.clone();
        let tag = format!("lift:{s}:{}", base.tag());
        let sampler = KernelSampler::from_fn(base.class().clone(), &tag, move |sd| {
            crate::kernels::conjugate(&inner.sample(sd)?, &perm)
        });
        measure = measure.with_atom(rate, sampler)?;
    }
    Ok(measure)
}

/// All multisets over `{1..n}` whose ranked multiplicities equal `alpha`.
fn multisets_of_type(
    alpha: &IntegerPartition,
    n: usize,
    cap: usize,
) -> Result<Vec<Multiset>> {
    // Group equal parts: elements within a group are interchangeable, so
    // each group picks an unordered combination of fresh elements.
    let mut groups: Vec<(u32, usize)> = Vec::new();
    for &p in alpha.parts() {
        match groups.last_mut() {
            Some((v, c)) if *v == p => *c += 1,
            _ => groups.push((p, 1)),
        }
    }
    if groups.iter().map(|&(_, c)| c).sum::<usize>() > n {
        return Ok(Vec::new());
    }
    let mut expected = 1u128;
    let mut left = n as u128;
    for &(_, c) in &groups {
        let mut ways = 1u128;
        for i in 0..c as u128 {
            ways = ways.saturating_mul(left - i);
        }
        for i in 1..=c as u128 {
            ways /= i;
        }
        expected = expected.saturating_mul(ways);
        left -= c as u128;
        if expected > cap as u128 {
            return Err(Error::Capacity(format!(
                "lifting type {alpha} over {n} elements needs more than {cap} atoms"
            )));
        }
    }
    let mut out = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    fn rec(
        groups: &[(u32, usize)],
        from: &[u32],
        pairs: &mut Vec<(u32, u32)>,
        out: &mut Vec<Multiset>,
    ) {
        let Some(&(value, count)) = groups.first() else {
            out.push(Multiset::from_pairs(pairs));
            return;
        };
        if count > from.len() {
            return;
        }
        // Choose `count` elements from `from` by index combinations.
        let mut idx: Vec<usize> = (0..count).collect();
        loop {
            let chosen: Vec<u32> = idx.iter().map(|&i| from[i]).collect();
            let rest: Vec<u32> = from
                .iter()
                .copied()
                .filter(|v| !chosen.contains(v))
                .collect();
            let depth = pairs.len();
            for &e in &chosen {
                pairs.push((e, value));
            }
            rec(&groups[1..], &rest, pairs, out);
            pairs.truncate(depth);
            // Advance the combination.
            let k = idx.len();
            let mut i = k;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if idx[i] != i + from.len() - k {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    let all: Vec<u32> = (1..=n as u32).collect();
    rec(&groups, &all, &mut pairs, &mut out);
    Ok(out)
}
