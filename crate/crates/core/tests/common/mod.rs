#![allow(dead_code)]

use pqe_core::formula::{Clause, CnfFormula};
use pqe_core::gen::{generate_family, GenParams, SplitMix64};
use pqe_core::oracle::{naive_pqe_solve, OracleCaps};
use pqe_core::problem::{PqeProblem, Solution};

pub const CORPUS_SEED: u64 = 20_240_601;
pub const CORPUS_SIZES: [u32; 5] = [8, 10, 12, 14, 16];

/// 40 problems per size in `CORPUS_SIZES`, `2 × vars` clauses each.
pub fn corpus() -> Vec<PqeProblem> {
    let base = GenParams {
        seed: CORPUS_SEED,
        ..GenParams::default()
    };
    generate_family(&base, &CORPUS_SIZES, 40).unwrap()
}

pub fn naive(problem: &PqeProblem) -> Solution {
    naive_pqe_solve(problem, &OracleCaps::default()).unwrap()
}

/// `h` without one clause chosen by `rng`; `None` when `h` is empty.
pub fn drop_one(problem: &PqeProblem, h: &Solution, rng: &mut SplitMix64) -> Option<Solution> {
    if h.is_empty() {
        return None;
    }
    let i = rng.below(h.len() as u64) as usize;
    Some(with_clauses(
        problem,
        h.formula().without(&[i]).clauses().to_vec(),
    ))
}

/// `h` plus one clause of one to three distinct `Y` literals chosen by `rng`.
pub fn add_random_y_clause(problem: &PqeProblem, h: &Solution, rng: &mut SplitMix64) -> Solution {
    let ys = problem.unquantified();
    let width = 1 + rng.below(3.min(ys.len() as u64)) as usize;
    let mut vars = Vec::with_capacity(width);
    while vars.len() < width {
        let v = ys[rng.below(ys.len() as u64) as usize];
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let c = Clause::new(vars.into_iter().map(|v| v.lit(rng.next_u64() & 1 == 0))).unwrap();
    let mut clauses = h.formula().clauses().to_vec();
    clauses.push(c);
    with_clauses(problem, clauses)
}

pub fn with_clauses(problem: &PqeProblem, clauses: Vec<Clause>) -> Solution {
    let mut f = CnfFormula::from_clauses(clauses);
    f.extend_num_vars(problem.num_vars());
    Solution::new(f, problem).unwrap()
}
