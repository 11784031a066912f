//! Machine-readable run reports.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::formula::Assignment;
use crate::problem::{PqeProblem, Solution};
use crate::sat::{ResourceLimit, SatStats};
use crate::verifier::{Verdict, VerdictStatus, VerifyOptions, VerifyStats, WitnessKind};

pub const TOOL_NAME: &str = "pqeverify";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit code for a verdict: 0 correct, 1 refuted, 2 out of resources.
pub fn exit_code(status: VerdictStatus) -> i32 {
    match status {
        VerdictStatus::Correct => 0,
        VerdictStatus::NotImplied | VerdictStatus::NotRedundant => 1,
        VerdictStatus::ResourceOut => 2,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Variable id to 0/1.
pub fn point_values(point: &Assignment) -> BTreeMap<u32, u8> {
    point.iter().map(|(v, b)| (v.id(), b as u8)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub kind: WitnessKind,
    /// 1-based ordinal in the solution file (implication) or the problem
    /// file (redundancy).
    pub clause_ordinal: usize,
    pub removed_before: Vec<usize>,
    pub point: BTreeMap<u32, u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub num_clauses: usize,
    pub num_vars: u32,
    pub num_unquantified: usize,
    pub num_targets: usize,
    pub solution_clauses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionsSummary {
    pub shorten: bool,
    pub time_limit_s: Option<f64>,
    pub conflict_limit: Option<u64>,
    pub iteration_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigests {
    pub problem_sha256: String,
    pub solution_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub status: VerdictStatus,
    pub exit_code: i32,
    pub resource_limit: Option<ResourceLimit>,
    pub witness: Option<WitnessReport>,
    pub stats: VerifyStats,
    pub sat: SatStats,
    pub problem: ProblemSummary,
    pub options: OptionsSummary,
    pub input_digests: InputDigests,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(
        problem: &PqeProblem,
        h: &Solution,
        verdict: &Verdict,
        options: &VerifyOptions,
        digests: InputDigests,
        wall_time_s: f64,
    ) -> RunReport {
        let witness = verdict.witness.as_ref().map(|w| WitnessReport {
            kind: w.kind,
            clause_ordinal: w.clause_index + 1,
            removed_before: w.removed_before.iter().map(|i| i + 1).collect(),
            point: point_values(&w.point),
        });
        RunReport {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            status: verdict.status,
            exit_code: exit_code(verdict.status),
            resource_limit: verdict.resource,
            witness,
            stats: verdict.stats,
            sat: verdict.sat,
            problem: ProblemSummary {
                num_clauses: problem.formula().len(),
                num_vars: problem.num_vars(),
                num_unquantified: problem.unquantified().len(),
                num_targets: problem.targets().len(),
                solution_clauses: h.len(),
            },
            options: OptionsSummary {
                shorten: options.shorten,
                time_limit_s: options.limits.time_budget.map(|d| d.as_secs_f64()),
                conflict_limit: options.limits.max_conflicts,
                iteration_cap: options.iteration_cap,
            },
            input_digests: digests,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimacs::{parse_problem, parse_solution};
    use crate::verifier::ver_pqe;

    #[test]
    fn report_for_refuted_example() {
        let text = "p pqe 4 4\nx 3 4 0\ng 1 0\n-3 4 0\n1 3 0\n1 -4 0\n2 4 0\n";
        let p = parse_problem(text).unwrap();
        let h = parse_solution("p cnf 4 0\n", &p).unwrap();
        let options = VerifyOptions::default();
        let v = ver_pqe(&p, &h, options);
        let digests = InputDigests {
            problem_sha256: sha256_hex(text.as_bytes()),
            solution_sha256: sha256_hex(b"p cnf 4 0\n"),
        };
        let r = RunReport::new(&p, &h, &v, &options, digests, 0.0);
        assert_eq!(r.exit_code, 1);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["status"], "not_redundant");
        assert_eq!(json["witness"]["kind"], "redundancy");
        assert_eq!(json["witness"]["clause_ordinal"], 1);
        assert_eq!(json["witness"]["point"]["1"], 0);
        assert_eq!(json["witness"]["point"]["2"], 1);
        assert_eq!(json["witness"]["point"]["3"], 1);
        assert_eq!(json["witness"]["point"]["4"], 0);
        assert_eq!(
            json["input_digests"]["problem_sha256"]
                .as_str()
                .unwrap()
                .len(),
            64
        );
    }

    #[test]
    fn exit_codes_are_distinct_per_outcome() {
        assert_eq!(exit_code(VerdictStatus::Correct), 0);
        assert_eq!(exit_code(VerdictStatus::NotImplied), 1);
        assert_eq!(exit_code(VerdictStatus::NotRedundant), 1);
        assert_eq!(exit_code(VerdictStatus::ResourceOut), 2);
    }
}
