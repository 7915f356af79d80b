//! Result document written by `solve`.

use std::collections::BTreeMap;

use ncsolve_core::{Instance, OracleResult, Stats, Status, Verdict};
use serde::Serialize;

#[derive(Serialize)]
pub struct ResultDocument {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub profile: String,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

#[derive(Serialize)]
pub struct OracleReport {
    pub bound: usize,
    pub result: &'static str,
    pub agrees: bool,
}

impl ResultDocument {
    pub fn new(inst: &Instance, verdict: &Verdict, profile: String) -> Self {
        let model = verdict
            .model
            .as_ref()
            .map(|m| m.iter().map(|(x, w)| (x.clone(), inst.alphabet.render(w))).collect());
        ResultDocument {
            status: verdict.status,
            model,
            reason: verdict.reason.clone(),
            profile,
            stats: verdict.stats.clone(),
            oracle: None,
        }
    }
}

/// Compare a verdict with the brute-force oracle at `bound`. Unknown never
/// disagrees; a Sat model longer than the bound is not contradicted by
/// `NoneAtBound`.
pub fn oracle_report(verdict: &Verdict, oracle: &OracleResult, bound: usize) -> OracleReport {
    let (result, agrees) = match oracle {
        OracleResult::Sat(_) => ("sat", verdict.status != Status::Unsat),
        OracleResult::NoneAtBound => {
            let longest = verdict.model.iter().flat_map(|m| m.values()).map(|w| w.len()).max().unwrap_or(0);
            ("none-at-bound", verdict.status != Status::Sat || longest > bound)
        }
        OracleResult::ExhaustedUnsat => ("unsat", verdict.status != Status::Sat),
    };
    OracleReport { bound, result, agrees }
}
