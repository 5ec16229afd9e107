//! Check and verification reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::measures::MeasureEstimate;

/// Standard errors below zero before a gap counts as a violation.
pub const VIOLATION_SIGMAS: f64 = 5.0;

/// Slack for deterministic (zero standard error) gaps.
pub const DETERMINISTIC_TOL: f64 = 1e-12;

/// Outcome of a probabilistic property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Number of points or pairs examined.
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    /// Image of the witness under the checked map, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckReport {
    pub fn pass(name: impl Into<String>, samples: usize) -> Self {
        Self {
            name: name.into(),
            passed: true,
            samples,
            witness: None,
            image: None,
            detail: String::new(),
        }
    }

    pub fn fail(name: impl Into<String>, samples: usize, witness: Vec<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            samples,
            witness: Some(witness),
            image: None,
            detail: detail.into(),
        }
    }

    /// Failure of a deterministic hypothesis with no point witness.
    pub fn rejected(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            samples: 0,
            witness: None,
            image: None,
            detail: detail.into(),
        }
    }

    pub fn with_image(mut self, image: Vec<f64>) -> Self {
        self.image = Some(image);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Confirmed,
    Inconclusive,
    Violated,
    InapplicableHypothesis,
}

impl Verdict {
    /// Classifies a gap estimate `lhs - rhs` with standard error `se`.
    pub fn from_gap(gap: f64, se: f64) -> Self {
        if gap >= 0.0 {
            Verdict::Confirmed
        } else if gap < -(VIOLATION_SIGMAS * se + DETERMINISTIC_TOL) {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
            Verdict::InapplicableHypothesis => "inapplicable-hypothesis",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Convex `A` containing the origin, centered ball `B`, radial measure.
    #[serde(rename = "1.1")]
    BallRadial,
    /// Projection-closed `A`, ellipsoid or generalized ball `B`, product measure.
    #[serde(rename = "1.2")]
    EllipsoidProduct,
    /// Functional form over balls for functions with convex superlevel sets.
    #[serde(rename = "2.1")]
    FunctionalBall,
    /// Functional form over ellipsoids for functions convex-unimodal along axes.
    #[serde(rename = "3.1")]
    FunctionalEllipsoid,
    /// Log-concave symmetric `f` against a decreasing function of a quadratic form.
    #[serde(rename = "4.1")]
    QuadraticForm,
    /// Symmetric convex `A` against a centered ellipsoid.
    #[serde(rename = "corollary")]
    SymmetricEllipsoid,
}

impl Theorem {
    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::BallRadial => "1.1",
            Theorem::EllipsoidProduct => "1.2",
            Theorem::FunctionalBall => "2.1",
            Theorem::FunctionalEllipsoid => "3.1",
            Theorem::QuadraticForm => "4.1",
            Theorem::SymmetricEllipsoid => "corollary",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        match tag {
            "1.1" => Some(Theorem::BallRadial),
            "1.2" => Some(Theorem::EllipsoidProduct),
            "2.1" => Some(Theorem::FunctionalBall),
            "3.1" => Some(Theorem::FunctionalEllipsoid),
            "4.1" => Some(Theorem::QuadraticForm),
            "corollary" => Some(Theorem::SymmetricEllipsoid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples: usize,
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: u64, samples: usize, methods: &[&str]) -> Self {
        Self {
            seed,
            samples,
            methods: methods.iter().map(|m| m.to_string()).collect(),
            config_hash: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// One rung of an approximation ladder (`f_n`, `phi_n`) toward indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationStep {
    pub index: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub se: f64,
    /// Estimated distance from the indicator-level quantity (mu(f_n) - mu(A) etc).
    pub excess: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub hypotheses: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<MeasureEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_factors: Option<(MeasureEstimate, MeasureEstimate)>,
    pub gap: f64,
    pub se: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub approximation: Vec<ApproximationStep>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cross_checks: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn inapplicable(theorem: Theorem, hypotheses: Vec<CheckReport>, provenance: Provenance) -> Self {
        Self {
            theorem,
            hypotheses,
            lhs: None,
            rhs_factors: None,
            gap: f64::NAN,
            se: f64::NAN,
            verdict: Verdict::InapplicableHypothesis,
            approximation: Vec::new(),
            cross_checks: BTreeMap::new(),
            provenance,
        }
    }

    pub fn failed_hypotheses(&self) -> impl Iterator<Item = &CheckReport> {
        self.hypotheses.iter().filter(|h| !h.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_gap(0.1, 0.01), Verdict::Confirmed);
        assert_eq!(Verdict::from_gap(0.0, 0.0), Verdict::Confirmed);
        assert_eq!(Verdict::from_gap(-0.04, 0.01), Verdict::Inconclusive);
        assert_eq!(Verdict::from_gap(-0.051, 0.01), Verdict::Violated);
        assert_eq!(Verdict::from_gap(-1e-13, 0.0), Verdict::Inconclusive);
        assert_eq!(Verdict::from_gap(-1e-9, 0.0), Verdict::Violated);
    }

    #[test]
    fn theorem_tags_round_trip() {
        for t in [
            Theorem::BallRadial,
            Theorem::EllipsoidProduct,
            Theorem::FunctionalBall,
            Theorem::FunctionalEllipsoid,
            Theorem::QuadraticForm,
            Theorem::SymmetricEllipsoid,
        ] {
            assert_eq!(Theorem::parse(t.tag()), Some(t));
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.tag()));
        }
        assert_eq!(Theorem::parse("3.2"), None);
    }
}
