//! A SAT-based producer of PQE solutions, used to get realistic candidates
//! for benchmarking when `Y` is too large for the brute-force solver.
//!
//! For each target clause `C` it enumerates `C`-boundary points of `F ∧ H`.
//! A `Y`-removable point is excluded by adding to `H` the clause over `Y`
//! refuted by the oracle's failed assumptions (a clause implied by `F`); a
//! `Y`-unremovable point is excluded with a plugging clause. When no boundary
//! point is left, `C` is redundant and is dropped before the next target.
//! As in the verifier, `F|y ∧ H|y` is asked of a second oracle without plugs.

use std::collections::BTreeSet;

use crate::formula::{Clause, CnfFormula, Lit, Var};
use crate::problem::{PqeProblem, Solution};
use crate::sat::{ResourceLimit, SatOracle, SatOutcome};
use crate::verifier::{plug_clause, VerifyOptions};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DeriveStats {
    pub boundary_points: u64,
    pub solution_clauses: u64,
    pub plugging_clauses: u64,
}

pub fn derive_solution(
    problem: &PqeProblem,
    options: VerifyOptions,
) -> Result<(Solution, DeriveStats), ResourceLimit> {
    let f = problem.formula();
    let num_vars = f.num_vars();
    let quantified: &BTreeSet<Var> = problem.quantified();
    let mut oracle = SatOracle::with_limits(options.limits);
    let mut subspace = SatOracle::with_limits(options.limits);
    subspace.set_deadline(oracle.deadline());
    oracle.reserve_vars(num_vars);
    subspace.reserve_vars(num_vars);

    let mut guard: Vec<Option<Var>> = vec![None; f.len()];
    for &i in problem.targets() {
        let a = oracle.new_var();
        assert_eq!(subspace.new_var(), a, "guards agree across oracles");
        guard[i] = Some(a);
    }
    for (i, c) in f.clauses().iter().enumerate() {
        let mut lits = c.lits().to_vec();
        if let Some(a) = guard[i] {
            lits.push(a.positive());
        }
        let c = Clause::new(lits).expect("guard is fresh");
        oracle.add_clause(&c);
        subspace.add_clause(&c);
    }

    let mut live: Vec<bool> = vec![true; f.len()];
    let mut h: Vec<Clause> = Vec::new();
    let mut stats = DeriveStats::default();
    let enabled = |live: &[bool], skip: Option<usize>| -> Vec<Lit> {
        problem
            .targets()
            .iter()
            .filter(|&&i| live[i] && Some(i) != skip)
            .map(|&i| guard[i].unwrap().negative())
            .collect()
    };

    for &target in problem.targets() {
        let c = f.clause(target);
        let plug_guard = oracle.new_var();
        let mut boundary_query: Vec<Lit> = c.lits().iter().map(|&l| !l).collect();
        boundary_query.extend(enabled(&live, Some(target)));
        boundary_query.push(plug_guard.negative());
        let all_enabled = enabled(&live, None);
        // Live part of F followed by H; H clauses are appended as found.
        let mut f_and_h: Vec<Clause> = f
            .clauses()
            .iter()
            .enumerate()
            .filter(|(i, _)| live[*i])
            .map(|(_, c)| c.clone())
            .chain(h.iter().cloned())
            .collect();

        let mut iterations = 0u64;
        loop {
            iterations += 1;
            if iterations > options.iteration_cap {
                return Err(ResourceLimit::Iterations);
            }
            let model = match solve_shared(&mut oracle, &subspace, &options, &boundary_query) {
                SatOutcome::Unsat => break,
                SatOutcome::ResourceOut(limit) => return Err(limit),
                SatOutcome::Sat(m) => m,
            };
            stats.boundary_points += 1;
            let y = model.restrict(|v| v.id() <= num_vars && !quantified.contains(&v));
            let mut assumptions = y.to_lits();
            assumptions.extend(all_enabled.iter().copied());
            match solve_shared(&mut subspace, &oracle, &options, &assumptions) {
                SatOutcome::ResourceOut(limit) => return Err(limit),
                SatOutcome::Unsat => {
                    let core: Vec<Lit> = subspace
                        .failed_assumptions()
                        .iter()
                        .filter(|l| y.get(l.var()).is_some())
                        .map(|&l| !l)
                        .collect();
                    let d = Clause::new(core).expect("negated assignment literals");
                    oracle.add_clause(&d);
                    subspace.add_clause(&d);
                    f_and_h.push(d.clone());
                    h.push(d);
                    stats.solution_clauses += 1;
                }
                SatOutcome::Sat(m) => {
                    let x_star = m.restrict(|v| quantified.contains(&v));
                    let (d, _) = plug_clause(&y, &x_star, &f_and_h, options.shorten);
                    let mut lits = d.lits().to_vec();
                    lits.push(plug_guard.positive());
                    oracle.add_clause(&Clause::new(lits).expect("plug over Y only"));
                    stats.plugging_clauses += 1;
                }
            }
        }
        oracle.add_clause(&Clause::new([plug_guard.positive()]).unwrap());
        let retire = Clause::new([guard[target].unwrap().positive()]).unwrap();
        oracle.add_clause(&retire);
        subspace.add_clause(&retire);
        live[target] = false;
    }

    let mut formula = CnfFormula::from_clauses(h);
    formula.extend_num_vars(num_vars);
    let solution = Solution::new(formula, problem).expect("clauses range over Y");
    Ok((solution, stats))
}

/// Solves on `target`, charging conflicts to the budget shared with `other`.
fn solve_shared(
    target: &mut SatOracle,
    other: &SatOracle,
    options: &VerifyOptions,
    assumptions: &[Lit],
) -> SatOutcome {
    if let Some(max) = options.limits.max_conflicts {
        target.set_conflict_limit(Some(max.saturating_sub(other.stats().conflicts)));
    }
    target.solve_lits(assumptions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_equiv, OracleCaps};

    #[test]
    fn small_example_gets_a_correct_solution() {
        let f = CnfFormula::from_dimacs(&[&[-3, 4], &[1, 3], &[1, -4], &[2, 4]]).unwrap();
        let xs = [Var::new(3).unwrap(), Var::new(4).unwrap()];
        let p = PqeProblem::new(f, xs, vec![0]).unwrap();
        let (h, stats) = derive_solution(&p, VerifyOptions::default()).unwrap();
        assert!(
            brute_equiv(&p, &h, &OracleCaps::default())
                .unwrap()
                .equivalent
        );
        assert_eq!(stats.solution_clauses, h.len() as u64);
        assert!(!h.is_empty());
    }
}
