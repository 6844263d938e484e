//! JSON descriptions of structures, kernels, kernel samplers, rate
//! measures, and user-supplied classes.
//!
//! These types are the file formats of the command-line tool. Structure
//! files restate their signature, tuples are 1-indexed arrays, and
//! malformed entries are rejected with the relation and tuple named.
//! Symmetric relations list every orientation explicitly, so a graph edge
//! appears as both `[1,2]` and `[2,1]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::FiniteClass;
use crate::ctprocess::{erosion_kernel, PaintboxMode, RankedSimplexPoint, RateMeasure};
use crate::kernels::{
    coag_kernel, complement_kernel, cutpaste_kernel, frag_kernel, identity_kernel,
    single_site_resampler, Kernel, KernelSampler, SiteVariant,
};
use crate::levyito::Multiset;
use crate::structures::{FiniteStructure, Signature};
use crate::{Error, Result};

/// One relation symbol of a signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDecl {
    /// Symbol name.
    pub name: String,
    /// Coordinates per tuple.
    pub arity: usize,
}

fn signature_of(decls: &[RelationDecl]) -> Result<Arc<Signature>> {
    let rels = decls.iter().map(|d| (d.name.clone(), d.arity)).collect();
    Ok(Arc::new(Signature::new(rels)?))
}

fn decls_of(sig: &Signature) -> Vec<RelationDecl> {
    sig.relations()
        .iter()
        .map(|(name, arity)| RelationDecl {
            name: name.clone(),
            arity: *arity,
        })
        .collect()
}

fn fill_relation(m: &mut FiniteStructure, name: &str, tuples: &[Vec<u32>]) -> Result<()> {
    let sig = m.signature().clone();
    let rel = sig
        .index_of(name)
        .ok_or_else(|| Error::MalformedInput(format!("unknown relation {name}")))?;
    let arity = sig.arity(rel);
    let n = m.n() as u32;
    for t in tuples {
        if t.len() != arity {
            return Err(Error::MalformedInput(format!(
                "relation {name}: tuple {t:?} has {} coordinates, expected {arity}",
                t.len()
            )));
        }
        if let Some(&c) = t.iter().find(|&&c| c == 0 || c > n) {
            return Err(Error::MalformedInput(format!(
                "relation {name}: tuple {t:?} coordinate {c} is outside 1..={n}"
            )));
        }
        if m.contains(rel, t) {
            return Err(Error::MalformedInput(format!(
                "relation {name}: duplicate tuple {t:?}"
            )));
        }
        m.insert(rel, t)?;
    }
    Ok(())
}

/// JSON form of a finite structure.
///
/// ```json
/// {"signature":[{"name":"R","arity":2}],"n":3,"relations":{"R":[[1,2],[2,1]]}}
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    /// Relation symbols with arities.
    pub signature: Vec<RelationDecl>,
    /// Base set size; elements are `1..=n`.
    pub n: usize,
    /// Tuple lists per relation name. Missing relations are empty.
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<u32>>>,
}

impl StructureFile {
    /// Validates and builds the structure.
    pub fn to_structure(&self) -> Result<FiniteStructure> {
        let sig = signature_of(&self.signature)?;
        let mut m = FiniteStructure::empty(sig, self.n);
        for (name, tuples) in &self.relations {
            fill_relation(&mut m, name, tuples)?;
        }
        Ok(m)
    }

    /// The JSON form of a structure.
    pub fn from_structure(m: &FiniteStructure) -> StructureFile {
        let sig = m.signature();
        let mut relations = BTreeMap::new();
        for rel in 0..sig.len() {
            let tuples: Vec<Vec<u32>> = m.tuples(rel).iter().cloned().collect();
            if !tuples.is_empty() {
                relations.insert(sig.name(rel).to_string(), tuples);
            }
        }
        StructureFile {
            signature: decls_of(sig),
            n: m.n(),
            relations,
        }
    }
}

/// Parses a structure from JSON text.
pub fn parse_structure(json: &str) -> Result<FiniteStructure> {
    let file: StructureFile =
        serde_json::from_str(json).map_err(|e| Error::MalformedInput(format!("structure: {e}")))?;
    file.to_structure()
}

/// Renders a structure as pretty JSON text.
pub fn structure_json(m: &FiniteStructure) -> String {
    serde_json::to_string_pretty(&StructureFile::from_structure(m)).expect("plain data serializes")
}

/// JSON description of a deterministic kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelDesc {
    /// The identity on a class named by id.
    Identity {
        /// Class identifier, e.g. `"sets"` or `"full:R:3"`.
        class: String,
    },
    /// Flip every tuple of every relation.
    Complement {
        /// Class identifier.
        class: String,
    },
    /// Coagulate partition blocks by the index partition `pi`.
    Coag {
        /// The index partition.
        pi: StructureFile,
    },
    /// Fragment the `k`-th block by the partition `pi`.
    Frag {
        /// The fragmenting partition.
        pi: StructureFile,
        /// Index of the block to fragment, from 1.
        k: usize,
    },
    /// Coordinatewise cut-and-paste resampling on sets.
    Cutpaste {
        /// Probability an absent coordinate turns present.
        theta0: f64,
        /// Probability a present coordinate stays present.
        theta1: f64,
        /// Seed of the fixed Bernoulli arrays.
        seed: u64,
    },
    /// Detach one element of a partition into its own block.
    Erosion {
        /// The element to detach.
        k: u32,
    },
    /// Single-site resampler on the ternary full class.
    Site {
        /// Anchor multiset as an element list, e.g. `[1]` or `[1,1]`.
        anchor: Vec<u32>,
        /// `"ex1"`, `"ex2"`, or `"ex3"`.
        variant: String,
        /// Seed of the replacement arrays.
        seed: u64,
    },
}

fn site_variant(name: &str) -> Result<SiteVariant> {
    match name {
        "ex1" => Ok(SiteVariant::Ex1),
        "ex2" => Ok(SiteVariant::Ex2),
        "ex3" => Ok(SiteVariant::Ex3),
        other => Err(Error::MalformedInput(format!(
            "unknown site variant {other}; expected ex1, ex2, or ex3"
        ))),
    }
}

/// Builds the kernel a description names.
pub fn build_kernel(desc: &KernelDesc) -> Result<Kernel> {
    match desc {
        KernelDesc::Identity { class } => Ok(identity_kernel(FiniteClass::from_id(class)?)),
        KernelDesc::Complement { class } => Ok(complement_kernel(FiniteClass::from_id(class)?)),
        KernelDesc::Coag { pi } => coag_kernel(&pi.to_structure()?),
        KernelDesc::Frag { pi, k } => frag_kernel(&pi.to_structure()?, *k),
        KernelDesc::Cutpaste {
            theta0,
            theta1,
            seed,
        } => cutpaste_kernel(*theta0, *theta1, *seed),
        KernelDesc::Erosion { k } => erosion_kernel(*k),
        KernelDesc::Site {
            anchor,
            variant,
            seed,
        } => single_site_resampler(&Multiset::from_elements(anchor), site_variant(variant)?, *seed),
    }
}

/// JSON description of a kernel sampler (a probability measure on
/// kernels).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplerDesc {
    /// Point mass at one deterministic kernel.
    Point {
        /// The kernel.
        kernel: KernelDesc,
    },
    /// Cut-and-paste kernels with freshly drawn Bernoulli arrays.
    Cutpaste {
        /// Probability an absent coordinate turns present.
        theta0: f64,
        /// Probability a present coordinate stays present.
        theta1: f64,
    },
    /// One uniformly random pairwise block merge over `{1..m}`.
    KingmanStep {
        /// Size the merging pair is drawn from.
        m: usize,
    },
    /// Sets kernel pinning element 1 present; not exchangeable.
    PinFirst,
    /// Sets kernel reading off the parity of the set size; not coherent.
    SizeParity,
}

/// Builds the sampler a description names.
pub fn build_sampler(desc: &SamplerDesc) -> Result<KernelSampler> {
    match desc {
        SamplerDesc::Point { kernel } => Ok(KernelSampler::point_mass(build_kernel(kernel)?)),
        SamplerDesc::Cutpaste { theta0, theta1 } => KernelSampler::cutpaste(*theta0, *theta1),
        SamplerDesc::KingmanStep { m } => KernelSampler::kingman_step(*m),
        SamplerDesc::PinFirst => KernelSampler::pin_first_element(),
        SamplerDesc::SizeParity => KernelSampler::size_parity(),
    }
}

/// Resolves a command-line `--mu` argument that is a bare name rather
/// than a descriptor file. `sig` supplies the ambient signature for the
/// class-agnostic names `identity` and `complement`; the remaining names
/// fix their own class.
pub fn sampler_shorthand(name: &str, sig: Option<&Arc<Signature>>) -> Option<Result<KernelSampler>> {
    let full = |sig: Option<&Arc<Signature>>| {
        sig.map(|s| FiniteClass::full(s.clone())).ok_or_else(|| {
            Error::MalformedInput(format!(
                "sampler {name} needs a structure to take its signature from"
            ))
        })
    };
    match name {
        "identity" => Some(full(sig).map(|c| KernelSampler::point_mass(identity_kernel(c)))),
        "complement" => Some(full(sig).map(|c| KernelSampler::point_mass(complement_kernel(c)))),
        "pin-first" => Some(KernelSampler::pin_first_element()),
        "size-parity" => Some(KernelSampler::size_parity()),
        _ => None,
    }
}

/// One paintbox family of a rate-measure description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaintboxDesc {
    /// Family rate.
    pub w: f64,
    /// Ranked simplex point, nonincreasing with sum at most 1.
    pub s: Vec<f64>,
    /// `"coag"` or `"frag"`.
    pub mode: String,
}

/// One kernel atom of a rate-measure description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDesc {
    /// Atom rate.
    pub rate: f64,
    /// The kernel distribution fired at that rate.
    pub sampler: SamplerDesc,
}

/// JSON description of a continuous-time rate measure: optional Kingman,
/// erosion, and paintbox families on partitions plus arbitrary kernel
/// atoms.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDesc {
    /// Class identifier; defaults to `partitions` when any partition
    /// family is present, otherwise the first atom's class.
    #[serde(default)]
    pub class: Option<String>,
    /// Kingman pairwise-merge rate.
    #[serde(default)]
    pub kingman: f64,
    /// Erosion singleton-detachment rate.
    #[serde(default)]
    pub erosion: f64,
    /// Paintbox families.
    #[serde(default)]
    pub paintbox: Vec<PaintboxDesc>,
    /// Kernel atoms.
    #[serde(default)]
    pub atoms: Vec<AtomDesc>,
}

/// Builds the rate measure a description names.
pub fn build_measure(desc: &MeasureDesc) -> Result<RateMeasure> {
    let has_partition_family =
        desc.kingman > 0.0 || desc.erosion > 0.0 || !desc.paintbox.is_empty();
    let atoms: Vec<(f64, KernelSampler)> = desc
        .atoms
        .iter()
        .map(|a| Ok((a.rate, build_sampler(&a.sampler)?)))
        .collect::<Result<_>>()?;
    let class = match &desc.class {
        Some(id) => FiniteClass::from_id(id)?,
        None if has_partition_family => FiniteClass::from_id("partitions")?,
        None => match atoms.first() {
            Some((_, sampler)) => sampler.class().clone(),
            None => {
                return Err(Error::MalformedInput(
                    "empty measure: name a class or add a family".into(),
                ))
            }
        },
    };
    let mut measure = RateMeasure::empty(class);
    if desc.kingman > 0.0 {
        measure = measure.combined(RateMeasure::kingman_measure(desc.kingman)?)?;
    }
    if desc.erosion > 0.0 {
        measure = measure.combined(RateMeasure::erosion_measure(desc.erosion)?)?;
    }
    for pb in &desc.paintbox {
        let mode = match pb.mode.as_str() {
            "coag" => PaintboxMode::Coagulation,
            "frag" => PaintboxMode::Fragmentation,
            other => {
                return Err(Error::MalformedInput(format!(
                    "unknown paintbox mode {other}; expected coag or frag"
                )))
            }
        };
        let point = RankedSimplexPoint::new(pb.s.clone())?;
        measure = measure.combined(RateMeasure::paintbox_measure(pb.w, point, mode)?)?;
    }
    for (rate, sampler) in atoms {
        measure = measure.with_atom(rate, sampler)?;
    }
    Ok(measure)
}

/// One member of a user-class file: relations over `{1..n}` under the
/// file's shared signature.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDecl {
    /// Base set size.
    pub n: usize,
    /// Tuple lists per relation name.
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<u32>>>,
}

/// JSON description of a user class: an explicit list of members per
/// size.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserClassFile {
    /// Relation symbols shared by every member.
    pub signature: Vec<RelationDecl>,
    /// The members.
    pub members: Vec<MemberDecl>,
}

impl UserClassFile {
    /// Validates and builds the class.
    pub fn to_class(&self) -> Result<FiniteClass> {
        let sig = signature_of(&self.signature)?;
        let mut sizes: BTreeMap<usize, Vec<FiniteStructure>> = BTreeMap::new();
        for member in &self.members {
            let mut m = FiniteStructure::empty(sig.clone(), member.n);
            for (name, tuples) in &member.relations {
                fill_relation(&mut m, name, tuples)?;
            }
            sizes.entry(member.n).or_default().push(m);
        }
        FiniteClass::user(sig, sizes)
    }
}

/// Resolves a `--class` argument: a builtin identifier, or a path to a
/// user-class file when the argument names a readable file.
pub fn class_from_arg(arg: &str, file_contents: Option<&str>) -> Result<FiniteClass> {
    match file_contents {
        Some(json) => {
            let file: UserClassFile = serde_json::from_str(json)
                .map_err(|e| Error::MalformedInput(format!("class file: {e}")))?;
            file.to_class()
        }
        None => FiniteClass::from_id(arg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{graph_structure, partition_from_blocks};

    #[test]
    fn structure_files_round_trip() {
        let g = graph_structure(3, &[(1, 2), (2, 3)]).unwrap();
        let json = structure_json(&g);
        let back = parse_structure(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn structure_files_reject_bad_tuples() {
        let base = r#"{"signature":[{"name":"R","arity":2}],"n":3,"relations":{"R":TUPLES}}"#;
        let err = parse_structure(&base.replace("TUPLES", "[[0,2]]")).unwrap_err();
        assert!(err.to_string().contains("coordinate 0"), "{err}");
        let err = parse_structure(&base.replace("TUPLES", "[[1,2,3]]")).unwrap_err();
        assert!(err.to_string().contains("expected 2"), "{err}");
        let err = parse_structure(&base.replace("TUPLES", "[[1,2],[1,2]]")).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = parse_structure(
            r#"{"signature":[{"name":"R","arity":2}],"n":3,"relations":{"S":[[1,2]]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown relation S"), "{err}");
    }

    #[test]
    fn kernel_descriptors_build_and_apply() {
        let pi = partition_from_blocks(3, &[&[1, 2], &[3]]).unwrap();
        let desc = KernelDesc::Coag {
            pi: StructureFile::from_structure(&pi),
        };
        let kernel = build_kernel(&desc).unwrap();
        let input = partition_from_blocks(5, &[&[1, 4], &[2, 3, 5]]).unwrap();
        let merged = partition_from_blocks(5, &[&[1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(kernel.apply(&input).unwrap(), merged);

        let round: KernelDesc =
            serde_json::from_str(&serde_json::to_string(&desc).unwrap()).unwrap();
        assert_eq!(build_kernel(&round).unwrap().tag(), kernel.tag());
    }

    #[test]
    fn descriptor_json_matches_the_documented_shape() {
        let desc: KernelDesc = serde_json::from_str(
            r#"{"kind":"cutpaste","theta0":0.25,"theta1":0.75,"seed":7}"#,
        )
        .unwrap();
        let kernel = build_kernel(&desc).unwrap();
        assert!(kernel.tag().starts_with("cutpaste:0.25:0.75"));

        let sampler: SamplerDesc =
            serde_json::from_str(r#"{"kind":"kingman-step","m":4}"#).unwrap();
        assert_eq!(build_sampler(&sampler).unwrap().tag(), "kingman-step:4");
    }

    #[test]
    fn measure_descriptors_cover_families_and_atoms() {
        let desc: MeasureDesc = serde_json::from_str(
            r#"{"kingman":1.0,"paintbox":[{"w":0.5,"s":[0.6,0.4],"mode":"coag"}]}"#,
        )
        .unwrap();
        let measure = build_measure(&desc).unwrap();
        assert_eq!(measure.kingman_rate(), 1.0);
        assert_eq!(measure.paintboxes().len(), 1);
        assert_eq!(measure.class().id(), "partitions");

        let desc: MeasureDesc = serde_json::from_str(
            r#"{"atoms":[{"rate":2.0,"sampler":{"kind":"cutpaste","theta0":0.5,"theta1":0.5}}]}"#,
        )
        .unwrap();
        let measure = build_measure(&desc).unwrap();
        assert_eq!(measure.class().id(), "sets");
        assert_eq!(measure.atoms().len(), 1);

        let err = build_measure(&serde_json::from_str::<MeasureDesc>("{}").unwrap()).unwrap_err();
        assert!(err.to_string().contains("empty measure"), "{err}");
    }

    #[test]
    fn user_class_files_build_checkable_classes() {
        let json = r#"{
            "signature": [{"name": "E", "arity": 1}],
            "members": [
                {"n": 1},
                {"n": 1, "relations": {"E": [[1]]}},
                {"n": 2},
                {"n": 2, "relations": {"E": [[1]]}},
                {"n": 2, "relations": {"E": [[2]]}},
                {"n": 2, "relations": {"E": [[1], [2]]}}
            ]
        }"#;
        let class = class_from_arg("ignored", Some(json)).unwrap();
        assert_eq!(class.count(2), Some(4));
        assert!(class_from_arg("sets", None).is_ok());
        assert!(class_from_arg("no-such-class", None).is_err());
    }
}
