//! Effectivity certificates and section-count bookkeeping.
//!
//! Nothing here computes cohomology. Each operation applies one rule whose
//! hypotheses can be checked on the lattice, and records the application so
//! that a final section count is always backed by a chain of rules.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::constructions::MorphismMap;
use crate::error::{Error, Result};
use crate::lattice::{DivisorClass, SurfaceKind, SurfaceModel};
use crate::linalg::{self, Solution};

pub const CITE_ABELIAN_NEF: &str = "an abelian surface has no curves of negative square, so every \
     effective class is nef; a negative pairing with a curve rules out effectivity";
pub const CITE_PROJECTION_FORMULA: &str =
    "projection formula for a double cover with f_* O = O + O(-R): H0(f^* M) = H0(M) + H0(M - R)";
pub const CITE_BLOWUP_TRANSFER: &str = "sections of pi^* M - sum k_i e_i are the sections of M \
     vanishing to order k_i at the blown-up points";
pub const CITE_FIXED_COMPONENT: &str = "an irreducible curve meeting a class negatively is a \
     component of every member of its linear system";
pub const CITE_UNIQUE_MEMBER: &str = "a linear system with exactly one member has h0 = 1";
pub const CITE_TRIVIAL_CLASS: &str = "the trivial class has only constant sections, h0 = 1";

/// Proof that a class on an abelian surface is not effective: a registered
/// curve of non-negative square meets it negatively.
///
/// The only constructor is [`certify_not_effective`], so `pairing_value` is
/// always negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonEffectivityCertificate {
    target: DivisorClass,
    witness_label: String,
    witness: DivisorClass,
    pairing_value: BigInt,
    citation: &'static str,
}

impl NonEffectivityCertificate {
    pub fn target(&self) -> &DivisorClass {
        &self.target
    }

    pub fn witness_label(&self) -> &str {
        &self.witness_label
    }

    pub fn witness(&self) -> &DivisorClass {
        &self.witness
    }

    pub fn pairing_value(&self) -> &BigInt {
        &self.pairing_value
    }

    pub fn citation(&self) -> &str {
        self.citation
    }
}

pub fn certify_not_effective(
    model: &SurfaceModel,
    d: &DivisorClass,
    witness: &str,
) -> Result<NonEffectivityCertificate> {
    if model.kind() != SurfaceKind::Abelian {
        return Err(Error::WrongSurfaceKind {
            model: model.name().to_string(),
            kind: model.kind(),
        });
    }
    let curve = model
        .curve(witness)
        .ok_or_else(|| Error::UnknownCurve(witness.to_string()))?;
    if model.self_int(&curve.class)?.is_negative() {
        return Err(Error::InvalidModel(format!(
            "witness `{witness}` has negative square on an abelian surface"
        )));
    }
    let pairing = model.pair(d, &curve.class)?;
    if !pairing.is_negative() {
        return Err(Error::NotCertified {
            witness: witness.to_string(),
            pairing,
        });
    }
    Ok(NonEffectivityCertificate {
        target: d.clone(),
        witness_label: witness.to_string(),
        witness: curve.class.clone(),
        pairing_value: pairing,
        citation: CITE_ABELIAN_NEF,
    })
}

/// `(M, M - R)`: the two base classes whose sections make up the sections
/// of `f^* M`.
pub fn cover_section_split(
    map: &MorphismMap,
    m: &DivisorClass,
) -> Result<(DivisorClass, DivisorClass)> {
    let r = map.branch_half()?;
    let rest = m.sub(r)?;
    Ok((m.clone(), rest))
}

/// Write `d = pullback(M) - sum k_i e_i` and return `(M, [k_i])`.
pub fn blowup_section_transfer(
    map: &MorphismMap,
    model: &SurfaceModel,
    d: &DivisorClass,
) -> Result<(DivisorClass, Vec<BigInt>)> {
    let exceptionals = map.exceptionals()?;
    if model.id() != map.source_model() {
        return Err(Error::MismatchedModel {
            expected: map.source_model(),
            found: model.id(),
        });
    }
    model.owns(d)?;
    // e_i . e_j = -delta_ij and pullbacks are orthogonal to e_i, so k_i = d . e_i
    let orders: Vec<BigInt> = exceptionals
        .iter()
        .map(|e| model.pair(d, e))
        .collect::<Result<_>>()?;
    if let Some(k) = orders.iter().find(|k| k.is_negative()) {
        return Err(Error::NotAStrictTransformShape(format!(
            "negative vanishing order {k} in {}",
            model.render(d)
        )));
    }
    let mut lifted = d.clone();
    for (k, e) in orders.iter().zip(exceptionals) {
        lifted = lifted.add(&e.scale(k.clone()))?;
    }
    let cols: Vec<&[BigInt]> = map.pullback_matrix().iter().map(Vec::as_slice).collect();
    let Solution::Integral(base) = linalg::solve(&cols, lifted.coeffs()) else {
        return Err(Error::NotAStrictTransformShape(format!(
            "{} is not a pullback plus exceptional classes",
            model.render(d)
        )));
    };
    let rank = map.pullback_matrix().len();
    let downstairs = DivisorClass::from_parts(map.target_model(), base);
    debug_assert_eq!(downstairs.coeffs().len(), rank);
    Ok((downstairs, orders))
}

/// Why forcing stopped without a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusiveReason {
    NoForcingCurve,
    OutsideRegistryCone { curve: String },
    Cap,
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InconclusiveReason::NoForcingCurve => f.write_str("no forcing curve"),
            InconclusiveReason::OutsideRegistryCone { curve } => {
                write!(f, "outside registry cone ({curve})")
            }
            InconclusiveReason::Cap => f.write_str("cap"),
        }
    }
}

/// Multiset of registry curves, keyed by label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Decomposition(pub BTreeMap<String, u64>);

impl Decomposition {
    pub fn get(&self, label: &str) -> u64 {
        self.0.get(label).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u64)>) -> Self {
        Decomposition(
            pairs
                .into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(l, c)| (l.into(), c))
                .collect(),
        )
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.0.iter().map(|(l, c)| format!("{l}: {c}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForcingConclusion {
    UniqueMember(Decomposition),
    Inconclusive(InconclusiveReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcingStep {
    pub curve: String,
    /// Pairing of the residual before subtraction with `curve`; always negative.
    pub pairing: BigInt,
    pub residual_after: DivisorClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcingTrace {
    pub start: DivisorClass,
    pub steps: Vec<ForcingStep>,
    pub conclusion: ForcingConclusion,
}

impl ForcingTrace {
    pub fn decomposition(&self) -> Option<&Decomposition> {
        match &self.conclusion {
            ForcingConclusion::UniqueMember(d) => Some(d),
            ForcingConclusion::Inconclusive(_) => None,
        }
    }
}

/// Cap used when none is given: ten times the initial registry measure plus ten.
pub fn default_step_cap(model: &SurfaceModel, l: &DivisorClass) -> Result<u64> {
    let measure = model.registry_measure(l)?.unwrap_or_default();
    let cap = measure * 10u32 + 10u32;
    Ok(u64::try_from(cap.max(BigInt::from(10))).unwrap_or(u64::MAX))
}

/// Peel off registry curves that meet the residual negatively.
///
/// The registry is scanned cyclically, starting just after the curve
/// subtracted last (at the first curve for the first step), and the first
/// curve meeting the residual negatively is taken. A curve is only
/// subtracted when the residual has a positive coordinate on it in the frame
/// of registered curves plus exceptional classes; otherwise the trace stops
/// as `OutsideRegistryCone`.
pub fn fixed_part_forcing(
    model: &SurfaceModel,
    l: &DivisorClass,
    step_cap: Option<u64>,
) -> Result<ForcingTrace> {
    let order: Vec<usize> = (0..model.curves().len()).collect();
    force_in_order(model, l, &order, step_cap)
}

/// Forcing with the registry scanned cyclically in the given order of curve
/// indices.
pub fn force_in_order(
    model: &SurfaceModel,
    l: &DivisorClass,
    order: &[usize],
    step_cap: Option<u64>,
) -> Result<ForcingTrace> {
    model.owns(l)?;
    let cap = match step_cap {
        Some(c) => c,
        None => default_step_cap(model, l)?,
    };
    let curves = model.curves();
    let mut residual = l.clone();
    let mut coords = model.frame_coordinates(l)?;
    let mut counts = vec![0u64; curves.len()];
    let mut pairings = curves
        .iter()
        .map(|c| model.pair(&residual, &c.class))
        .collect::<Result<Vec<_>>>()?;
    let curve_gram = curves
        .iter()
        .map(|a| {
            curves
                .iter()
                .map(|b| model.pair(&a.class, &b.class))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let mut steps = Vec::new();
    let mut start = 0;

    let conclusion = loop {
        if residual.is_zero() {
            let decomposition =
                Decomposition::from_pairs(curves.iter().map(|c| c.label.as_str()).zip(counts));
            break ForcingConclusion::UniqueMember(decomposition);
        }
        if steps.len() as u64 >= cap {
            break ForcingConclusion::Inconclusive(InconclusiveReason::Cap);
        }
        let mut forcing = None;
        for offset in 0..order.len() {
            let pos = (start + offset) % order.len();
            let i = order[pos];
            if pairings[i].is_negative() {
                forcing = Some((pos, i, pairings[i].clone()));
                break;
            }
        }
        let Some((pos, i, pairing)) = forcing else {
            break ForcingConclusion::Inconclusive(InconclusiveReason::NoForcingCurve);
        };
        let available = coords.as_ref().map(|x| x[i].clone());
        if !available.is_some_and(|c| c.is_positive()) {
            break ForcingConclusion::Inconclusive(InconclusiveReason::OutsideRegistryCone {
                curve: curves[i].label.clone(),
            });
        }
        residual = residual.sub(&curves[i].class)?;
        if let Some(x) = coords.as_mut() {
            x[i] -= 1;
        }
        for (p, g) in pairings.iter_mut().zip(&curve_gram[i]) {
            *p -= g;
        }
        counts[i] += 1;
        start = (pos + 1) % order.len();
        steps.push(ForcingStep {
            curve: curves[i].label.clone(),
            pairing,
            residual_after: residual.clone(),
        });
    };
    Ok(ForcingTrace {
        start: l.clone(),
        steps,
        conclusion,
    })
}

/// One rule application in a certificate chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleApplication {
    pub rule: Rule,
    pub citation: String,
    pub values: BTreeMap<String, ChainValue>,
}

impl RuleApplication {
    pub fn new(rule: Rule, citation: impl Into<String>) -> Self {
        RuleApplication {
            rule,
            citation: citation.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<ChainValue>) -> Self {
        self.values.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    BlowupSectionTransfer,
    CoverSectionSplit,
    AbelianNonEffectivity,
    FixedPartForcing,
    UniqueMember,
    TrivialClass,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::BlowupSectionTransfer => "blowup-section-transfer",
            Rule::CoverSectionSplit => "cover-section-split",
            Rule::AbelianNonEffectivity => "abelian-non-effectivity",
            Rule::FixedPartForcing => "fixed-part-forcing",
            Rule::UniqueMember => "unique-member",
            Rule::TrivialClass => "trivial-class",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainValue {
    Int(BigInt),
    Ints(Vec<BigInt>),
    Text(String),
}

impl From<BigInt> for ChainValue {
    fn from(v: BigInt) -> Self {
        ChainValue::Int(v)
    }
}

impl From<&BigInt> for ChainValue {
    fn from(v: &BigInt) -> Self {
        ChainValue::Int(v.clone())
    }
}

impl From<u64> for ChainValue {
    fn from(v: u64) -> Self {
        ChainValue::Int(BigInt::from(v))
    }
}

impl From<Vec<BigInt>> for ChainValue {
    fn from(v: Vec<BigInt>) -> Self {
        ChainValue::Ints(v)
    }
}

impl From<String> for ChainValue {
    fn from(v: String) -> Self {
        ChainValue::Text(v)
    }
}

impl From<&str> for ChainValue {
    fn from(v: &str) -> Self {
        ChainValue::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionCount {
    Exactly(u64),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionCountResult {
    value: SectionCount,
    certificate_chain: Vec<RuleApplication>,
}

impl SectionCountResult {
    pub fn unknown(chain: Vec<RuleApplication>) -> Self {
        SectionCountResult {
            value: SectionCount::Unknown,
            certificate_chain: chain,
        }
    }

    pub fn value(&self) -> SectionCount {
        self.value
    }

    pub fn certificate_chain(&self) -> &[RuleApplication] {
        &self.certificate_chain
    }

    /// Prepend earlier rule applications, e.g. the transfers that reduce a
    /// count on one surface to a count on another.
    pub fn preceded_by(mut self, mut earlier: Vec<RuleApplication>) -> Self {
        earlier.append(&mut self.certificate_chain);
        self.certificate_chain = earlier;
        self
    }
}

/// Fold a forcing trace into a section count.
pub fn h0_unique_member(model: &SurfaceModel, trace: &ForcingTrace) -> SectionCountResult {
    if trace.start.is_zero() {
        return SectionCountResult {
            value: SectionCount::Exactly(1),
            certificate_chain: vec![RuleApplication::new(Rule::TrivialClass, CITE_TRIVIAL_CLASS)],
        };
    }
    match &trace.conclusion {
        ForcingConclusion::UniqueMember(decomposition) => {
            let pairings: Vec<BigInt> = trace.steps.iter().map(|s| s.pairing.clone()).collect();
            let curves: Vec<&str> = trace.steps.iter().map(|s| s.curve.as_str()).collect();
            let forcing = RuleApplication::new(Rule::FixedPartForcing, CITE_FIXED_COMPONENT)
                .with("class", model.render(&trace.start))
                .with("steps", trace.steps.len() as u64)
                .with("step_curves", curves.join(" "))
                .with("step_pairings", pairings);
            let unique = RuleApplication::new(Rule::UniqueMember, CITE_UNIQUE_MEMBER)
                .with("member", decomposition.to_string())
                .with("h0", 1u64);
            SectionCountResult {
                value: SectionCount::Exactly(1),
                certificate_chain: vec![forcing, unique],
            }
        }
        ForcingConclusion::Inconclusive(_) => SectionCountResult::unknown(Vec::new()),
    }
}
