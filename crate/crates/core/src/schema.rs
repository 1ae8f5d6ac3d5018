//! Versioned JSON documents exchanged between pipeline stages.
//!
//! Every document carries `schema_version` and `kind`; readers reject
//! anything else before looking at the payload.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::signal::RepDaySet;
use crate::sizing::SizingSolution;

pub const SCHEMA_VERSION: u32 = 1;

/// Digest of one input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Deterministic part of the run manifest, embedded in every output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    /// File name of the full manifest written next to the output.
    pub manifest: String,
}

pub trait Document: Serialize + DeserializeOwned {
    const KIND: &'static str;

    /// Payload checks beyond what the types enforce.
    fn check(&self) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDaysDoc {
    pub schema_version: u32,
    pub kind: String,
    pub provenance: Provenance,
    /// Regularization weight used per participant, in `repdays` order.
    pub lambdas: Vec<f64>,
    pub repdays: RepDaySet,
}

impl Document for RepDaysDoc {
    const KIND: &'static str = "repdays";

    fn check(&self) -> Result<()> {
        if self.lambdas.len() != self.repdays.demand.len() {
            return Err(Error::Structure(
                "one lambda per participant expected".into(),
            ));
        }
        self.repdays.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub schema_version: u32,
    pub kind: String,
    pub provenance: Provenance,
    pub config_hash: String,
    /// `bnb` or `oracle`.
    pub method: String,
    pub repdays: RepDaySet,
    pub solution: SizingSolution,
}

impl Document for SolutionDoc {
    const KIND: &'static str = "solution";

    fn check(&self) -> Result<()> {
        self.repdays.validate()?;
        let s = &self.solution;
        let n = s.ids.len();
        if s.n_pv.len() != n || s.n_bess.len() != n || s.dispatch.participants.len() != n {
            return Err(Error::Structure(
                "solution vectors disagree on participant count".into(),
            ));
        }
        let t = s.dispatch.hours();
        for p in &s.dispatch.participants {
            let lens = [
                p.p_self.len(),
                p.p_sell.len(),
                p.p_charge.len(),
                p.p_discharge.len(),
                p.b_charge.len(),
                p.b_discharge.len(),
            ];
            if lens.iter().any(|&l| l != t) || p.soc.len() != t + 1 {
                return Err(Error::Structure(
                    "dispatch series disagree on length".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub kind: String,
    pub provenance: Provenance,
    pub config_hash: String,
    pub report: Report,
}

impl Document for ReportDoc {
    const KIND: &'static str = "report";

    fn check(&self) -> Result<()> {
        self.report.validate()
    }
}

#[derive(Deserialize)]
struct Header {
    schema_version: Option<u32>,
    kind: Option<String>,
}

/// Parses and checks a document of type `D`.
pub fn from_json<D: Document>(text: &str) -> Result<D> {
    let header: Header = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    match header.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::parse(format!(
                "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
            )))
        }
        None => return Err(Error::parse("missing schema_version")),
    }
    if header.kind.as_deref() != Some(D::KIND) {
        return Err(Error::parse(format!(
            "expected a '{}' document, found {:?}",
            D::KIND,
            header.kind.unwrap_or_default()
        )));
    }
    let doc: D = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    doc.check()?;
    Ok(doc)
}

pub fn to_json<D: Document>(doc: &D) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}
