//! Divisor classes over a finitely generated lattice with an integral
//! symmetric pairing.
//!
//! A [`SurfaceModel`] is declared, never derived: a list of basis labels, a
//! symmetric Gram matrix, a registry of classes declared to be irreducible
//! curves, and free-text provenance. Every [`DivisorClass`] remembers which
//! model it belongs to, and mixing classes from two models is an error.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Solution};

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a constructed model. Fresh for every build, never persisted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(u64);

impl ModelId {
    fn fresh() -> Self {
        ModelId(NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed))
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Abelian,
    Blowup,
    Cover,
    Other,
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceKind::Abelian => "abelian",
            SurfaceKind::Blowup => "blowup",
            SurfaceKind::Cover => "cover",
            SurfaceKind::Other => "other",
        })
    }
}

/// An integer coefficient vector over the basis of one model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisorClass {
    model: ModelId,
    coeffs: Vec<BigInt>,
}

impl DivisorClass {
    pub(crate) fn from_parts(model: ModelId, coeffs: Vec<BigInt>) -> Self {
        DivisorClass { model, coeffs }
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &DivisorClass) -> Result<()> {
        if self.model != other.model {
            return Err(Error::MismatchedModel {
                expected: self.model,
                found: other.model,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check_same(other)?;
        Ok(DivisorClass {
            model: self.model,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check_same(other)?;
        Ok(DivisorClass {
            model: self.model,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, k: impl Into<BigInt>) -> DivisorClass {
        let k = k.into();
        DivisorClass {
            model: self.model,
            coeffs: self.coeffs.iter().map(|c| c * &k).collect(),
        }
    }

    pub fn neg(&self) -> DivisorClass {
        DivisorClass {
            model: self.model,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// A class registered as an irreducible curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub label: String,
    pub class: DivisorClass,
    pub citation: String,
}

/// Symmetric integer matrix, stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gram {
    dim: usize,
    entries: Vec<BigInt>,
}

impl Gram {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Gram> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::InvalidModel(format!(
                "gram row {i} has {} entries, expected {dim}",
                r.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidModel(format!(
                        "gram is not symmetric at ({i}, {j}): {} vs {}",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        Ok(Gram {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigInt]> {
        self.entries.chunks(self.dim.max(1)).take(self.dim)
    }

    /// `a^T G b`.
    pub fn eval(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        let mut total = BigInt::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            total += ai * linalg::dot(self.row(i), b);
        }
        total
    }
}

/// A declared surface: basis labels, intersection form, curve registry.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    id: ModelId,
    name: String,
    kind: SurfaceKind,
    basis: Vec<String>,
    gram: Gram,
    curves: Vec<Curve>,
    exceptionals: Vec<String>,
    provenance: Vec<String>,
}

impl SurfaceModel {
    pub fn builder(name: impl Into<String>, kind: SurfaceKind) -> ModelBuilder {
        ModelBuilder {
            name: name.into(),
            kind,
            basis: Vec::new(),
            gram: Vec::new(),
            curves: Vec::new(),
            exceptionals: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same model under a different display name. The id is kept, so
    /// classes built against `self` remain valid.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn gram(&self) -> &Gram {
        &self.gram
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    /// Labels of basis elements that are exceptional curves of a blow-up.
    pub fn exceptional_labels(&self) -> &[String] {
        &self.exceptionals
    }

    pub fn exceptional_classes(&self) -> Vec<DivisorClass> {
        self.exceptionals
            .iter()
            .map(|l| {
                self.basis_class(l)
                    .expect("exceptional label is a basis label")
            })
            .collect()
    }

    pub fn curve(&self, label: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label)
    }

    pub fn basis_index(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b == label)
    }

    pub fn basis_class(&self, label: &str) -> Option<DivisorClass> {
        let i = self.basis_index(label)?;
        let mut coeffs = vec![BigInt::zero(); self.rank()];
        coeffs[i] = BigInt::from(1);
        Some(DivisorClass {
            model: self.id,
            coeffs,
        })
    }

    /// A basis label or a registry label, in that order.
    pub fn lookup(&self, label: &str) -> Option<DivisorClass> {
        self.basis_class(label)
            .or_else(|| self.curve(label).map(|c| c.class.clone()))
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass {
            model: self.id,
            coeffs: vec![BigInt::zero(); self.rank()],
        }
    }

    pub fn class_from(&self, coeffs: Vec<BigInt>) -> Result<DivisorClass> {
        if coeffs.len() != self.rank() {
            return Err(Error::InvalidParameter(format!(
                "class has {} coefficients, model `{}` has rank {}",
                coeffs.len(),
                self.name,
                self.rank()
            )));
        }
        Ok(DivisorClass {
            model: self.id,
            coeffs,
        })
    }

    pub fn class_from_i64(&self, coeffs: &[i64]) -> Result<DivisorClass> {
        self.class_from(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn owns(&self, d: &DivisorClass) -> Result<()> {
        if d.model != self.id {
            return Err(Error::MismatchedModel {
                expected: self.id,
                found: d.model,
            });
        }
        Ok(())
    }

    /// The intersection number `d1 . d2`.
    pub fn pair(&self, d1: &DivisorClass, d2: &DivisorClass) -> Result<BigInt> {
        self.owns(d1)?;
        self.owns(d2)?;
        Ok(self.gram.eval(&d1.coeffs, &d2.coeffs))
    }

    pub fn self_int(&self, d: &DivisorClass) -> Result<BigInt> {
        self.pair(d, d)
    }

    /// Coordinates of `d` over the frame of registered curves followed by
    /// exceptional classes, when that frame is independent and `d` has
    /// integral coordinates in it.
    pub fn frame_coordinates(&self, d: &DivisorClass) -> Result<Option<Vec<BigInt>>> {
        self.owns(d)?;
        let frame = self.frame();
        let cols: Vec<&[BigInt]> = frame.iter().map(|c| c.coeffs()).collect();
        Ok(match linalg::solve(&cols, d.coeffs()) {
            Solution::Integral(x) => Some(x),
            _ => None,
        })
    }

    fn frame(&self) -> Vec<DivisorClass> {
        self.curves
            .iter()
            .map(|c| c.class.clone())
            .chain(self.exceptional_classes())
            .collect()
    }

    /// Coefficient sum of `d` over the registered-curve part of the frame.
    pub fn registry_measure(&self, d: &DivisorClass) -> Result<Option<BigInt>> {
        Ok(self
            .frame_coordinates(d)?
            .map(|x| x[..self.curves.len()].iter().sum()))
    }

    /// `2*F + G_n - e1`, in basis labels.
    pub fn render(&self, d: &DivisorClass) -> String {
        render_terms(self.basis.iter().map(String::as_str).zip(d.coeffs()))
    }
}

pub(crate) fn render_terms<'a>(terms: impl Iterator<Item = (&'a str, &'a BigInt)>) -> String {
    let mut out = String::new();
    for (label, c) in terms {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if mag != BigInt::from(1) {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(label);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Staged construction of a [`SurfaceModel`]; `build` checks every invariant.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    name: String,
    kind: SurfaceKind,
    basis: Vec<String>,
    gram: Vec<Vec<BigInt>>,
    curves: Vec<(String, Vec<BigInt>, String)>,
    exceptionals: Vec<String>,
    provenance: Vec<String>,
}

impl ModelBuilder {
    pub fn basis<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        self.basis = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn gram(mut self, rows: Vec<Vec<BigInt>>) -> Self {
        self.gram = rows;
        self
    }

    pub fn gram_i64(self, rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        self.gram(rows)
    }

    pub fn curve(
        mut self,
        label: impl Into<String>,
        coeffs: Vec<BigInt>,
        citation: impl Into<String>,
    ) -> Self {
        self.curves.push((label.into(), coeffs, citation.into()));
        self
    }

    pub fn exceptional(mut self, label: impl Into<String>) -> Self {
        self.exceptionals.push(label.into());
        self
    }

    pub fn provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance.push(note.into());
        self
    }

    pub fn build(self) -> Result<SurfaceModel> {
        let gram = Gram::from_rows(self.gram)?;
        if gram.dim() != self.basis.len() {
            return Err(Error::InvalidModel(format!(
                "gram has dimension {}, basis has {} labels",
                gram.dim(),
                self.basis.len()
            )));
        }
        for (i, l) in self.basis.iter().enumerate() {
            if self.basis[..i].contains(l) {
                return Err(Error::InvalidModel(format!("duplicate basis label `{l}`")));
            }
        }
        for e in &self.exceptionals {
            if !self.basis.contains(e) {
                return Err(Error::InvalidModel(format!(
                    "exceptional `{e}` is not a basis label"
                )));
            }
        }
        let id = ModelId::fresh();
        let mut curves: Vec<Curve> = Vec::with_capacity(self.curves.len());
        for (label, coeffs, citation) in self.curves {
            if coeffs.len() != self.basis.len() {
                return Err(Error::InvalidModel(format!(
                    "curve `{label}` has {} coefficients, basis has {}",
                    coeffs.len(),
                    self.basis.len()
                )));
            }
            if curves.iter().any(|c| c.label == label) {
                return Err(Error::InvalidModel(format!(
                    "duplicate curve label `{label}`"
                )));
            }
            if self.kind == SurfaceKind::Abelian {
                let sq = gram.eval(&coeffs, &coeffs);
                if sq.is_negative() {
                    return Err(Error::InvalidModel(format!(
                        "curve `{label}` has square {sq} on an abelian surface"
                    )));
                }
            }
            curves.push(Curve {
                label,
                class: DivisorClass { model: id, coeffs },
                citation,
            });
        }
        Ok(SurfaceModel {
            id,
            name: self.name,
            kind: self.kind,
            basis: self.basis,
            gram,
            curves,
            exceptionals: self.exceptionals,
            provenance: self.provenance,
        })
    }
}
