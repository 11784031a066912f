//! Generated benchmark families: derive a candidate solution per problem,
//! verify it under a per-instance time limit and aggregate the timings.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::candidate::derive_solution;
use crate::gen::{generate_family, GenError, GenParams};
use crate::sat::{Limits, ResourceLimit};
use crate::verifier::{ver_pqe, VerdictStatus, VerifyOptions, DEFAULT_ITERATION_CAP};

pub const DEFAULT_SEED: u64 = 0x5eed_0f9e_7e01;
pub const DEFAULT_INSTANCE_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<u32>,
    pub per_size: usize,
    /// Generator parameters other than size, clause count and seed.
    pub base: GenParams,
    pub instance_timeout: Duration,
    pub shorten: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![70, 75, 80, 85],
            per_size: 25,
            base: GenParams {
                seed: DEFAULT_SEED,
                ..GenParams::default()
            },
            instance_timeout: DEFAULT_INSTANCE_TIMEOUT,
            shorten: true,
        }
    }
}

/// Outcome of one benchmark instance. `status` is `None` when deriving the
/// candidate itself ran out of time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: usize,
    pub num_clauses: usize,
    pub num_vars: u32,
    pub num_unquantified: usize,
    pub solution_clauses: usize,
    pub status: Option<VerdictStatus>,
    pub resource_limit: Option<ResourceLimit>,
    pub derive_time_s: f64,
    pub verify_time_s: f64,
}

impl BenchRecord {
    pub fn timed_out(&self) -> bool {
        self.resource_limit.is_some()
    }
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>, GenError> {
    run_bench_with(config, |_| {})
}

/// As [`run_bench`], calling `progress` after each instance.
pub fn run_bench_with(
    config: &BenchConfig,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<Vec<BenchRecord>, GenError> {
    let problems = generate_family(&config.base, &config.sizes, config.per_size)?;
    let mut out = Vec::with_capacity(problems.len());
    for (instance, problem) in problems.iter().enumerate() {
        let options = VerifyOptions {
            limits: Limits::time(config.instance_timeout),
            shorten: config.shorten,
            iteration_cap: DEFAULT_ITERATION_CAP,
        };
        let mut record = BenchRecord {
            instance,
            num_clauses: problem.formula().len(),
            num_vars: problem.num_vars(),
            num_unquantified: problem.unquantified().len(),
            solution_clauses: 0,
            status: None,
            resource_limit: None,
            derive_time_s: 0.0,
            verify_time_s: 0.0,
        };
        let start = Instant::now();
        let derived = derive_solution(problem, options);
        record.derive_time_s = start.elapsed().as_secs_f64();
        match derived {
            Err(limit) => record.resource_limit = Some(limit),
            Ok((h, _)) => {
                record.solution_clauses = h.len();
                let start = Instant::now();
                let verdict = ver_pqe(problem, &h, options);
                record.verify_time_s = start.elapsed().as_secs_f64();
                record.status = Some(verdict.status);
                record.resource_limit = verdict.resource;
            }
        }
        progress(&record);
        out.push(record);
    }
    Ok(out)
}

/// Process exit code for a finished bench: 2 if any instance ran out of
/// time, else 1 if any candidate was refuted, else 0.
pub fn exit_status(records: &[BenchRecord]) -> i32 {
    if records.iter().any(|r| r.timed_out()) {
        2
    } else if records
        .iter()
        .any(|r| r.status != Some(VerdictStatus::Correct))
    {
        1
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub num_vars: u32,
    pub instances: usize,
    /// Instances whose solution could not be derived in time; they have no
    /// verification time and are left out of the mean.
    pub derive_timeouts: usize,
    /// Verification runs that ran out of budget.
    pub timeouts: usize,
    /// Mean over verified instances; NaN when there are none.
    pub mean_verify_time_s: f64,
    pub max_verify_time_s: f64,
}

/// Per-size aggregates in ascending size order. Verification timeouts count
/// at their elapsed time.
pub fn summarize(records: &[BenchRecord]) -> Vec<SizeSummary> {
    let mut sizes: Vec<u32> = records.iter().map(|r| r.num_vars).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.num_vars == n).collect();
            let verified: Vec<f64> = group
                .iter()
                .filter(|r| r.status.is_some())
                .map(|r| r.verify_time_s)
                .collect();
            SizeSummary {
                num_vars: n,
                instances: group.len(),
                derive_timeouts: group.len() - verified.len(),
                timeouts: group
                    .iter()
                    .filter(|r| r.status == Some(VerdictStatus::ResourceOut))
                    .count(),
                mean_verify_time_s: verified.iter().sum::<f64>() / verified.len() as f64,
                max_verify_time_s: verified.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

/// CSV with one row per instance.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "#clauses",
        "#vars",
        "|Y|",
        "|H|",
        "status",
        "verify-time",
    ])?;
    for r in records {
        let status = match (r.status, r.resource_limit) {
            (Some(s), _) => s.to_string(),
            (None, Some(limit)) => format!("derive_{limit}"),
            (None, None) => "unknown".to_string(),
        };
        w.write_record([
            r.instance.to_string(),
            r.num_clauses.to_string(),
            r.num_vars.to_string(),
            r.num_unquantified.to_string(),
            r.solution_clauses.to_string(),
            status,
            format!("{:.6}", r.verify_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
