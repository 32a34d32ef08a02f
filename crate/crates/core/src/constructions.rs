//! Builders for concrete surface models and for the two constructions used
//! on them: blowing up points and taking a double cover.
//!
//! Each construction returns the new model together with a [`MorphismMap`]
//! recording how classes pull back. Geometric input that a lattice cannot
//! see (multiplicities of curves at points, irreducibility of strict
//! transforms) is declared through [`PointSpec`] and carried as provenance.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{DivisorClass, ModelId, SurfaceKind, SurfaceModel};

/// A point to be blown up, together with the declared multiplicity of each
/// registry curve passing through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSpec {
    pub label: String,
    pub exceptional_label: String,
    pub multiplicities: BTreeMap<String, u32>,
    pub citation: String,
}

impl PointSpec {
    pub fn new(label: impl Into<String>, exceptional_label: impl Into<String>) -> Self {
        PointSpec {
            label: label.into(),
            exceptional_label: exceptional_label.into(),
            multiplicities: BTreeMap::new(),
            citation: String::new(),
        }
    }

    pub fn with_multiplicity(mut self, curve: impl Into<String>, mult: u32) -> Self {
        self.multiplicities.insert(curve.into(), mult);
        self
    }

    pub fn cited(mut self, citation: impl Into<String>) -> Self {
        self.citation = citation.into();
        self
    }

    pub fn multiplicity(&self, curve: &str) -> u32 {
        self.multiplicities.get(curve).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapKind {
    BlowUp {
        points: Vec<PointSpec>,
        exceptionals: Vec<DivisorClass>,
    },
    DoubleCover {
        /// Half of the branch class, living on the base.
        branch_half: DivisorClass,
    },
    Composite,
}

/// Pullback data for a morphism `source -> target`.
///
/// Row `i` of `pullback_matrix` is the pullback of the `i`-th target basis
/// element, written in the source basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismMap {
    name: String,
    source: ModelId,
    target: ModelId,
    pullback_matrix: Vec<Vec<BigInt>>,
    pairing_scale: u32,
    kind: MapKind,
}

impl MorphismMap {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source_model(&self) -> ModelId {
        self.source
    }

    pub fn target_model(&self) -> ModelId {
        self.target
    }

    pub fn pullback_matrix(&self) -> &[Vec<BigInt>] {
        &self.pullback_matrix
    }

    pub fn pairing_scale(&self) -> u32 {
        self.pairing_scale
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self.kind, MapKind::BlowUp { .. })
    }

    pub fn exceptionals(&self) -> Result<&[DivisorClass]> {
        match &self.kind {
            MapKind::BlowUp { exceptionals, .. } => Ok(exceptionals),
            _ => Err(Error::NotABlowUp(self.name.clone())),
        }
    }

    pub fn branch_half(&self) -> Result<&DivisorClass> {
        match &self.kind {
            MapKind::DoubleCover { branch_half } => Ok(branch_half),
            _ => Err(Error::NotACover(self.name.clone())),
        }
    }

    /// Linear image of a target class under the pullback matrix.
    pub fn pullback(&self, d: &DivisorClass) -> Result<DivisorClass> {
        if d.model() != self.target {
            return Err(Error::MismatchedModel {
                expected: self.target,
                found: d.model(),
            });
        }
        Ok(DivisorClass::from_parts(
            self.source,
            self.apply(d.coeffs()),
        ))
    }

    fn apply(&self, coeffs: &[BigInt]) -> Vec<BigInt> {
        let width = self.pullback_matrix.first().map_or(0, Vec::len);
        let mut out = vec![BigInt::zero(); width];
        for (c, row) in coeffs.iter().zip(&self.pullback_matrix) {
            if c.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        out
    }

    /// The composite `inner ∘ self`, where `self: A -> B` and `inner: B -> C`.
    /// Its pullback matrix is the product of the two.
    pub fn compose(&self, inner: &MorphismMap) -> Result<MorphismMap> {
        if inner.source != self.target {
            return Err(Error::MismatchedModel {
                expected: self.target,
                found: inner.source,
            });
        }
        let pullback_matrix = inner
            .pullback_matrix
            .iter()
            .map(|row| self.apply(row))
            .collect();
        Ok(MorphismMap {
            name: format!("{}∘{}", inner.name, self.name),
            source: self.source,
            target: inner.target,
            pullback_matrix,
            pairing_scale: self.pairing_scale * inner.pairing_scale,
            kind: MapKind::Composite,
        })
    }
}

/// Odd `n >= 3`, else `InvalidParameter`.
pub fn check_odd_parameter(n: u64) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "n must be an odd integer >= 3, got {n}"
        )));
    }
    Ok(())
}

/// The product `E x E` with the curves `F = {0} x E`, `G = E x {0}` and the
/// kernel curve `G_n` of `(x, y) -> n x + 2 y`.
///
/// Basis `(F, G, G_n)`; Gram `[[0, 1, 4], [1, 0, n^2], [4, n^2, 0]]`.
pub fn build_abelian_surface(n: u64) -> Result<SurfaceModel> {
    check_odd_parameter(n)?;
    let n2 = BigInt::from(n) * BigInt::from(n);
    let i = |x: i64| BigInt::from(x);
    let unit = |k: usize| -> Vec<BigInt> {
        (0..3)
            .map(|j| {
                if j == k {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            })
            .collect()
    };
    SurfaceModel::builder("Y", SurfaceKind::Abelian)
        .basis(["F", "G", "G_n"])
        .gram(vec![
            vec![i(0), i(1), i(4)],
            vec![i(1), i(0), n2.clone()],
            vec![i(4), n2, i(0)],
        ])
        .curve("F", unit(0), "F = {0} x E, a fibre of the first projection")
        .curve(
            "G",
            unit(1),
            "G = E x {0}, a fibre of the second projection",
        )
        .curve(
            "G_n",
            unit(2),
            format!(
                "G_n = ker((x, y) -> {n}x + 2y); connected and smooth of genus one \
                 (declared: an automorphism of E x E carries it to a coordinate curve)"
            ),
        )
        .provenance(format!(
            "Y = E x E for an elliptic curve E, parameter n = {n}"
        ))
        .provenance("F^2 = G^2 = 0: fibres of the projections")
        .provenance("G_n^2 = 0: adjunction for a smooth genus-one curve on an abelian surface")
        .provenance("F.G_n = 4: F meets G_n in {0} x E[2], reduced since [2] is etale")
        .provenance(format!(
            "G.G_n = {n}^2: G meets G_n in E[{n}] x {{0}}, reduced since [{n}] is etale"
        ))
        .provenance("F.G = 1: implementer-supplied; F and G meet transversally at the origin only")
        .build()
}

/// Blow up the given points. The new basis is the pullback of the old basis
/// (labels `map_name^label`) followed by one exceptional class per point.
/// Every registry curve is replaced by its strict transform (label
/// `label'`), computed from the declared multiplicities.
pub fn blow_up(
    model: &SurfaceModel,
    map_name: &str,
    points: &[PointSpec],
) -> Result<(SurfaceModel, MorphismMap)> {
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "blow-up needs at least one point".into(),
        ));
    }
    for p in points {
        for label in p.multiplicities.keys() {
            if model.curve(label).is_none() {
                return Err(Error::UnknownCurve(label.clone()));
            }
        }
    }
    let old = model.rank();
    let k = points.len();
    let dim = old + k;

    let mut gram = vec![vec![BigInt::zero(); dim]; dim];
    for (i, row) in model.gram().rows().enumerate() {
        gram[i][..old].clone_from_slice(row);
    }
    for e in 0..k {
        gram[old + e][old + e] = BigInt::from(-1);
    }

    let basis: Vec<String> = model
        .basis()
        .iter()
        .map(|l| format!("{map_name}^{l}"))
        .chain(points.iter().map(|p| p.exceptional_label.clone()))
        .collect();

    let mut builder = SurfaceModel::builder(format!("Bl({})", model.name()), SurfaceKind::Blowup)
        .basis(basis)
        .gram(gram);

    for curve in model.curves() {
        let mut coeffs: Vec<BigInt> = curve.class.coeffs().to_vec();
        coeffs.extend(
            points
                .iter()
                .map(|p| -BigInt::from(p.multiplicity(&curve.label))),
        );
        let mults: Vec<String> = points
            .iter()
            .map(|p| format!("{}:{}", p.label, p.multiplicity(&curve.label)))
            .collect();
        builder = builder.curve(
            format!("{}'", curve.label),
            coeffs,
            format!(
                "strict transform of {} under {map_name}, multiplicities [{}]; irreducible by declaration",
                curve.label,
                mults.join(", ")
            ),
        );
    }
    for label in model.exceptional_labels() {
        builder = builder.exceptional(format!("{map_name}^{label}"));
    }
    for p in points {
        builder = builder.exceptional(p.exceptional_label.clone());
    }
    for note in model.provenance() {
        builder = builder.provenance(note.clone());
    }
    for p in points {
        let mults: Vec<String> = p
            .multiplicities
            .iter()
            .map(|(c, m)| format!("mult_{}({c}) = {m}", p.label))
            .collect();
        let mut note = format!(
            "{map_name} blows up {}, exceptional curve {}",
            p.label, p.exceptional_label
        );
        if !mults.is_empty() {
            note.push_str(&format!("; {}", mults.join(", ")));
        }
        if !p.citation.is_empty() {
            note.push_str(&format!(" ({})", p.citation));
        }
        builder = builder.provenance(note);
    }
    let blown = builder.build()?;

    let pullback_matrix = (0..old)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let exceptionals = points
        .iter()
        .map(|p| {
            blown
                .basis_class(&p.exceptional_label)
                .expect("exceptional is in the basis")
        })
        .collect();
    let map = MorphismMap {
        name: map_name.to_string(),
        source: blown.id(),
        target: model.id(),
        pullback_matrix,
        pairing_scale: 1,
        kind: MapKind::BlowUp {
            points: points.to_vec(),
            exceptionals,
        },
    };
    Ok((blown, map))
}

/// `pullback(d) - sum_i mults[i] * e_i` for a blow-up map.
pub fn strict_transform(
    map: &MorphismMap,
    d: &DivisorClass,
    mults: &[BigInt],
) -> Result<DivisorClass> {
    let exceptionals = map.exceptionals()?;
    if mults.len() != exceptionals.len() {
        return Err(Error::ArityMismatch {
            expected: exceptionals.len(),
            found: mults.len(),
        });
    }
    let mut out = map.pullback(d)?;
    for (k, e) in mults.iter().zip(exceptionals) {
        out = out.sub(&e.scale(k.clone()))?;
    }
    Ok(out)
}

/// The double cover branched along a smooth member of `|2 branch_half|`.
///
/// Only pulled-back classes are represented: the new basis is the pullback
/// of the old one (labels `map_name^label`) and the Gram matrix is doubled.
pub fn double_cover(
    model: &SurfaceModel,
    map_name: &str,
    branch_half: &DivisorClass,
) -> Result<(SurfaceModel, MorphismMap)> {
    model.owns(branch_half)?;
    let rank = model.rank();
    let gram = model
        .gram()
        .rows()
        .map(|row| row.iter().map(|x| x * 2).collect())
        .collect();
    let mut builder = SurfaceModel::builder(format!("Cov({})", model.name()), SurfaceKind::Cover)
        .basis(model.basis().iter().map(|l| format!("{map_name}^{l}")))
        .gram(gram);
    for curve in model.curves() {
        builder = builder.curve(
            format!("{map_name}^{}", curve.label),
            curve.class.coeffs().to_vec(),
            format!(
                "preimage of {} under {map_name}, branched so irreducible (declared)",
                curve.label
            ),
        );
    }
    for label in model.exceptional_labels() {
        builder = builder.exceptional(format!("{map_name}^{label}"));
    }
    for note in model.provenance() {
        builder = builder.provenance(note.clone());
    }
    builder = builder
        .provenance(format!(
            "{map_name}: double cover branched along a smooth B in |2R|, R = {}",
            model.render(branch_half)
        ))
        .provenance(format!(
            "{map_name}_* O = O + O(-R); pairings of pulled-back classes scale by 2"
        ));
    let cover = builder.build()?;

    let pullback_matrix = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let map = MorphismMap {
        name: map_name.to_string(),
        source: cover.id(),
        target: model.id(),
        pullback_matrix,
        pairing_scale: 2,
        kind: MapKind::DoubleCover {
            branch_half: branch_half.clone(),
        },
    };
    Ok((cover, map))
}
