//! JSON documents and text tables for verification and oracle reports.
//!
//! Every integer is written in full as a JSON number, however large. The
//! documents share one envelope (`schema`, `schema_version`,
//! `tool_version`) and are checked against the schema embedded in
//! [`REPORT_SCHEMA`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linsys::{ChainValue, ForcingConclusion, RuleApplication, SectionCount};
use crate::oracle::OracleReport;
use crate::pipeline::{InstanceResult, InstanceStatus, VerificationReport, TOOL_VERSION};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// An arbitrary-precision integer that serializes as a bare JSON number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n: serde_json::Number =
            serde_json::from_str(&self.0.to_string()).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = serde_json::Number::deserialize(d)?;
        let text = n.to_string();
        text.parse::<BigInt>()
            .map(JsonInt)
            .map_err(|_| serde::de::Error::custom(format!("expected an integer, got {text}")))
    }
}

impl From<&BigInt> for JsonInt {
    fn from(v: &BigInt) -> Self {
        JsonInt(v.clone())
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Int(JsonInt),
    Ints(Vec<JsonInt>),
    Text(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDoc {
    pub rule: &'static str,
    pub citation: String,
    pub values: BTreeMap<String, ValueDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceDoc {
    pub m: u64,
    pub a_n_squared: JsonInt,
    pub d_n_squared: JsonInt,
    pub certificate_value: JsonInt,
    pub h0: Option<u64>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<BTreeMap<String, u64>>,
    pub certificate_chain: Vec<ChainDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct YPrimeDoc {
    pub m: u64,
    pub scope: &'static str,
    pub h0: Option<u64>,
    pub decomposition: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: String,
    pub n: u64,
    pub threshold: u64,
    pub m_max: u64,
    pub instances: Vec<InstanceDoc>,
    pub y_prime_only: Vec<YPrimeDoc>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: String,
    pub reports: Vec<ReportDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDoc {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: String,
    pub suite: String,
    pub trials: u64,
    pub seed: u64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRunDoc {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: String,
    pub reports: Vec<OracleDoc>,
}

fn value_doc(v: &ChainValue) -> ValueDoc {
    match v {
        ChainValue::Int(i) => ValueDoc::Int(i.into()),
        ChainValue::Ints(is) => ValueDoc::Ints(is.iter().map(JsonInt::from).collect()),
        ChainValue::Text(t) => ValueDoc::Text(t.clone()),
    }
}

fn chain_doc(step: &RuleApplication) -> ChainDoc {
    ChainDoc {
        rule: step.rule.as_str(),
        citation: step.citation.clone(),
        values: step
            .values
            .iter()
            .map(|(k, v)| (k.clone(), value_doc(v)))
            .collect(),
    }
}

fn h0_doc(v: SectionCount) -> Option<u64> {
    match v {
        SectionCount::Exactly(k) => Some(k),
        SectionCount::Unknown => None,
    }
}

fn decomposition_doc(c: &ForcingConclusion) -> Option<BTreeMap<String, u64>> {
    match c {
        ForcingConclusion::UniqueMember(d) => Some(d.0.clone()),
        ForcingConclusion::Inconclusive(_) => None,
    }
}

pub fn instance_doc(r: &InstanceResult) -> InstanceDoc {
    InstanceDoc {
        m: r.m,
        a_n_squared: (&r.a_n_squared).into(),
        d_n_squared: (&r.d_n_squared).into(),
        certificate_value: (&r.certificate_value).into(),
        h0: h0_doc(r.h0.value()),
        status: r.status.label(),
        detail: match &r.status {
            InstanceStatus::Failed(d) => Some(d.clone()),
            _ => None,
        },
        decomposition: r
            .forcing
            .as_ref()
            .and_then(|t| decomposition_doc(&t.conclusion)),
        certificate_chain: r.h0.certificate_chain().iter().map(chain_doc).collect(),
    }
}

pub fn report_doc(r: &VerificationReport) -> ReportDoc {
    ReportDoc {
        schema: "dlv.verification",
        schema_version: SCHEMA_VERSION,
        tool_version: r.tool_version.clone(),
        n: r.n,
        threshold: r.threshold,
        m_max: r.m_max,
        instances: r.instances.iter().map(instance_doc).collect(),
        y_prime_only: r
            .y_prime_only
            .iter()
            .map(|c| YPrimeDoc {
                m: c.m,
                scope: "Y'-only",
                h0: h0_doc(c.h0),
                decomposition: decomposition_doc(&c.trace.conclusion),
            })
            .collect(),
        summary: r.summary.clone(),
    }
}

pub fn sweep_doc(reports: &[VerificationReport]) -> SweepDoc {
    SweepDoc {
        schema: "dlv.sweep",
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        reports: reports.iter().map(report_doc).collect(),
    }
}

pub fn oracle_doc(r: &OracleReport) -> OracleDoc {
    OracleDoc {
        schema: "dlv.oracle",
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        suite: r.suite.clone(),
        trials: r.trials,
        seed: r.seed,
        failures: r.failures.clone(),
    }
}

pub fn oracle_run_doc(reports: &[OracleReport]) -> OracleRunDoc {
    OracleRunDoc {
        schema: "dlv.oracle-run",
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        reports: reports.iter().map(oracle_doc).collect(),
    }
}

/// Pretty JSON followed by a newline.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

/// Check a document against the embedded schema; returns every violation.
pub fn validate(doc: &serde_json::Value) -> std::result::Result<(), Vec<String>> {
    let schema: serde_json::Value =
        serde_json::from_str(REPORT_SCHEMA).expect("embedded schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("embedded schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{}: {}", e.instance_path(), e))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

pub fn validate_str(json: &str) -> Result<()> {
    let v: serde_json::Value = serde_json::from_str(json)?;
    validate(&v).map_err(|errs| Error::Json(format!("schema violation: {}", errs.join("; "))))
}

fn h0_text(v: Option<u64>) -> String {
    v.map_or_else(|| "unknown".to_string(), |k| k.to_string())
}

pub fn render_text(r: &VerificationReport) -> String {
    let mut out = String::new();
    let first = r.instances.first();
    let _ = writeln!(
        out,
        "n = {}    threshold m <= {}    A_n^2 = {}    D_n^2 = {}",
        r.n,
        r.threshold,
        first.map_or_else(String::new, |i| i.a_n_squared.to_string()),
        first.map_or_else(String::new, |i| i.d_n_squared.to_string()),
    );
    let _ = writeln!(
        out,
        "{:>6}  {:>16}  {:>9}  {:<16}  Y' member",
        "m", "(mA_n-R).G_n", "h0(mD_n)", "status"
    );
    for i in &r.instances {
        let doc = instance_doc(i);
        let member = doc.decomposition.as_ref().map_or_else(String::new, |d| {
            d.iter()
                .map(|(l, c)| format!("{c}*{l}"))
                .collect::<Vec<_>>()
                .join(" + ")
        });
        let _ = writeln!(
            out,
            "{:>6}  {:>16}  {:>9}  {:<16}  {}",
            i.m,
            i.certificate_value.to_string(),
            h0_text(doc.h0),
            i.status.label(),
            member
        );
        if let InstanceStatus::Failed(detail) = &i.status {
            let _ = writeln!(out, "        failure: {detail}");
        }
    }
    for c in &r.y_prime_only {
        let _ = writeln!(
            out,
            "Y'-only: h0(Y', {} L_n) = {}",
            c.m,
            h0_text(h0_doc(c.h0))
        );
    }
    let _ = writeln!(out, "{}", r.summary);
    out
}

pub fn render_oracle_text(r: &OracleReport) -> String {
    let mut out = format!(
        "{:<16} trials {:>8}  seed {:>6}  failures {}\n",
        r.suite,
        r.trials,
        r.seed,
        r.failures.len()
    );
    for f in r.failures.iter().take(20) {
        let _ = writeln!(out, "  {f}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::verify_all;

    #[test]
    fn big_integers_print_in_full() {
        let big: BigInt = "-123456789012345678901234567890123".parse().unwrap();
        let s = serde_json::to_string(&JsonInt(big.clone())).unwrap();
        assert_eq!(s, "-123456789012345678901234567890123");
        let back: JsonInt = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, big);
        assert!(serde_json::from_str::<JsonInt>("1.5").is_err());
    }

    #[test]
    fn report_validates_against_schema() {
        let rep = verify_all(5).unwrap();
        let json = to_json(&report_doc(&rep)).unwrap();
        validate_str(&json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["instances"].as_array().unwrap().len(), 8);
        assert_eq!(
            v["instances"][2]["certificate_value"],
            serde_json::json!(-17)
        );
        validate_str(&to_json(&sweep_doc(&[rep])).unwrap()).unwrap();
    }

    #[test]
    fn schema_rejects_malformed_report() {
        let bad = serde_json::json!({"schema": "dlv.verification", "n": 3});
        assert!(validate(&bad).is_err());
        let mut doc = serde_json::to_value(report_doc(&verify_all(3).unwrap())).unwrap();
        doc["instances"][0]["status"] = serde_json::json!("Maybe");
        assert!(validate(&doc).is_err());
    }

    #[test]
    fn text_table_rows() {
        let text = render_text(&verify_all(5).unwrap());
        assert_eq!(text.matches("Verified").count(), 7);
        assert_eq!(text.matches("BeyondThreshold").count(), 1);
        assert!(text.contains("D_n^2 = 4"));
    }
}
