//! JSON description of a [`SurfaceModel`].
//!
//! ```json
//! {
//!   "schema": "dlv.model", "schema_version": 1,
//!   "name": "Y", "kind": "abelian",
//!   "basis": ["F", "G", "G_n"],
//!   "gram": [[0, 1, 4], [1, 0, 9], [4, 9, 0]],
//!   "curves": [{"label": "F", "coeffs": [1, 0, 0], "citation": "..."}],
//!   "exceptionals": [],
//!   "provenance": ["..."]
//! }
//! ```
//!
//! Loading goes through [`SurfaceModel::builder`], so every model invariant
//! is checked again. Model ids are not stored; a loaded model is new.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SurfaceKind, SurfaceModel};
use crate::report::{JsonInt, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub label: String,
    pub coeffs: Vec<JsonInt>,
    #[serde(default)]
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub schema_version: u32,
    pub name: String,
    pub kind: SurfaceKind,
    pub basis: Vec<String>,
    pub gram: Vec<Vec<JsonInt>>,
    #[serde(default)]
    pub curves: Vec<CurveEntry>,
    #[serde(default)]
    pub exceptionals: Vec<String>,
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl ModelFile {
    pub fn from_model(model: &SurfaceModel) -> Self {
        ModelFile {
            schema: "dlv.model".into(),
            schema_version: SCHEMA_VERSION,
            name: model.name().to_string(),
            kind: model.kind(),
            basis: model.basis().to_vec(),
            gram: model
                .gram()
                .rows()
                .map(|r| r.iter().map(JsonInt::from).collect())
                .collect(),
            curves: model
                .curves()
                .iter()
                .map(|c| CurveEntry {
                    label: c.label.clone(),
                    coeffs: c.class.coeffs().iter().map(JsonInt::from).collect(),
                    citation: c.citation.clone(),
                })
                .collect(),
            exceptionals: model.exceptional_labels().to_vec(),
            provenance: model.provenance().to_vec(),
        }
    }

    pub fn into_model(self) -> Result<SurfaceModel> {
        if self.schema != "dlv.model" || self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported model file {} v{}",
                self.schema, self.schema_version
            )));
        }
        let mut b = SurfaceModel::builder(self.name, self.kind)
            .basis(self.basis)
            .gram(
                self.gram
                    .into_iter()
                    .map(|r| r.into_iter().map(|x| x.0).collect())
                    .collect(),
            );
        for c in self.curves {
            b = b.curve(
                c.label,
                c.coeffs.into_iter().map(|x| x.0).collect(),
                c.citation,
            );
        }
        for e in self.exceptionals {
            b = b.exceptional(e);
        }
        for p in self.provenance {
            b = b.provenance(p);
        }
        b.build()
    }
}

pub fn model_to_json(model: &SurfaceModel) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ModelFile::from_model(model))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<SurfaceModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model()
}

pub fn save_model(model: &SurfaceModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SurfaceModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}
