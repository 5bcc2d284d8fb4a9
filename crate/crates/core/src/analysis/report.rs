use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyStatus {
    Pass,
    Fail,
    /// Preconditions not met; nothing was claimed.
    Skipped,
    /// Evaluated, but outside the regime where the property is claimed.
    Informational,
}

/// Where a property was violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// One-based hour, absent for horizon-level violations.
    pub hour: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub id: String,
    pub status: PropertyStatus,
    pub holds: bool,
    /// Size of the quantity the property bounds (0 when exact).
    pub residual: f64,
    pub witness: Option<Witness>,
    pub detail: String,
}

/// Identifiers of every checked property, in report order.
pub const PROPERTY_IDS: [&str; 10] = [
    "prop1", "prop2", "prop3", "prop4", "lemma1", "lemma2", "cor1", "cor2", "cor3", "envelope",
];

impl PropertyReport {
    fn new(
        id: &str,
        status: PropertyStatus,
        residual: f64,
        witness: Option<Witness>,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            id: id.to_string(),
            status,
            holds: status != PropertyStatus::Fail,
            residual,
            witness,
            detail: detail.into(),
        }
    }

    pub fn pass(id: &str, residual: f64, detail: impl Into<String>) -> Self {
        Self::new(id, PropertyStatus::Pass, residual, None, detail)
    }

    pub fn fail(id: &str, residual: f64, witness: Witness, detail: impl Into<String>) -> Self {
        Self::new(id, PropertyStatus::Fail, residual, Some(witness), detail)
    }

    pub fn skipped(id: &str, detail: impl Into<String>) -> Self {
        Self::new(id, PropertyStatus::Skipped, 0.0, None, detail)
    }

    pub fn informational(
        id: &str,
        residual: f64,
        witness: Option<Witness>,
        detail: impl Into<String>,
    ) -> Self {
        Self::new(id, PropertyStatus::Informational, residual, witness, detail)
    }

    /// Pass or fail depending on `ok`.
    pub fn check(
        id: &str,
        ok: bool,
        residual: f64,
        witness: Witness,
        detail: impl Into<String>,
    ) -> Self {
        if ok {
            Self::pass(id, residual, detail)
        } else {
            Self::fail(id, residual, witness, detail)
        }
    }
}
