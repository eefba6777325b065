//! Serializable end-to-end run report. Timings are quarantined in their
//! own field so two runs with the same seed differ in nothing else.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::action::ConditionACertificate;
use crate::dynamics::{ContinuationReport, CriticalFamily, IsolationAudit, TruncationLevel};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    /// Wall-clock seconds per pipeline stage.
    pub seconds: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub level: TruncationLevel,
    pub eps: f64,
    pub radius: f64,
    pub certificate: ConditionACertificate,
    /// Audit of the unperturbed flow used to fix the radius (present
    /// when the radius was chosen automatically).
    pub reference_audit: Option<IsolationAudit>,
    pub continuation: ContinuationReport,
    pub families: Vec<CriticalFamily>,
    pub family_count: usize,
    /// Set when the clustering suggests a continuum of rest points
    /// (an unperturbed or otherwise degenerate run): the family count is
    /// then sampling-dependent and not a meaningful lower-bound witness.
    pub continuum_suspected: bool,
    pub cohomology_lower_bound: usize,
    /// Certificate and continuation both passed, so the lower bound
    /// applies to this run.
    pub hypotheses_met: bool,
    /// family_count >= cohomology_lower_bound under met hypotheses.
    pub verdict: bool,
    pub timings: Timings,
}
