//! Pass/fail reports with exact, re-evaluable witnesses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A side condition or hypothesis of the check is not satisfied;
    /// neither a pass nor a genuine violation.
    Unmet,
}

/// The exact inputs and both sides of a violated (in)equality.
///
/// Values are serialized canonically: rationals as `p/q`, propositions as
/// sorted label arrays, unknowns as label -> value maps. A witness must be
/// re-evaluable: recomputing both sides from `inputs` reproduces the
/// violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub lhs: String,
    pub rhs: String,
    pub relation: String,
}

impl Witness {
    pub fn new(relation: &str, lhs: String, rhs: String) -> Self {
        Witness {
            inputs: BTreeMap::new(),
            lhs,
            rhs,
            relation: relation.to_string(),
        }
    }

    pub fn with_input(mut self, key: &str, value: serde_json::Value) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub subject: String,
    pub verdict: Verdict,
    pub cases_checked: u64,
    pub cases_skipped: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Report {
    pub fn pass(subject: impl Into<String>, cases_checked: u64, cases_skipped: u64) -> Self {
        Report {
            subject: subject.into(),
            verdict: Verdict::Pass,
            cases_checked,
            cases_skipped,
            witness: None,
            note: None,
        }
    }

    pub fn fail(
        subject: impl Into<String>,
        cases_checked: u64,
        cases_skipped: u64,
        witness: Witness,
    ) -> Self {
        Report {
            subject: subject.into(),
            verdict: Verdict::Fail,
            cases_checked,
            cases_skipped,
            witness: Some(witness),
            note: None,
        }
    }

    pub fn unmet(subject: impl Into<String>, note: impl Into<String>) -> Self {
        Report {
            subject: subject.into(),
            verdict: Verdict::Unmet,
            cases_checked: 0,
            cases_skipped: 0,
            witness: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
