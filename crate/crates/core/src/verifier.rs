//! Verification of a PQE solution.
//!
//! `H` is a solution for taking `G` out of `∃X[F]` iff `F` implies `H` and
//! `G` is redundant in `H ∧ ∃X[F]`. The first condition is `|H|` SAT checks
//! of `F ∧ ¬C`. The second is decided one clause `C ∈ G` at a time by
//! looking for a `Y`-removable `C`-boundary point of `F ∧ H`: a point that
//! falsifies `C`, satisfies the rest, and whose `Y` part `y` makes `F ∧ H`
//! unsatisfiable. `Y`-unremovable points are excluded with plugging clauses
//! over `Y` until no boundary point is left.
//!
//! Queries go to incremental oracles that persist for the whole run. Clauses
//! of `G` and the plugging clauses of each redundancy check are stored with
//! an activation literal (`C ∨ a`), so removing `C` from the working formula
//! or retiring a set of plugging clauses is done by adding the unit `a`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::formula::{Assignment, Clause, CnfFormula, Lit, Var};
use crate::problem::{is_boundary_point, PqeProblem, Solution};
use crate::sat::{Limits, ResourceLimit, ResourceOut, SatOracle, SatOutcome, SatStats};

pub const DEFAULT_ITERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub limits: Limits,
    /// Try to drop literals from plugging clauses.
    pub shorten: bool,
    /// Hard cap on iterations of a single redundancy check.
    pub iteration_cap: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            limits: Limits::none(),
            shorten: true,
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Correct,
    NotImplied,
    NotRedundant,
    ResourceOut,
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictStatus::Correct => "correct",
            VerdictStatus::NotImplied => "not_implied",
            VerdictStatus::NotRedundant => "not_redundant",
            VerdictStatus::ResourceOut => "resource_out",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `clause_index` points into `H`; the point is a model of `F ∧ ¬C`.
    Implication,
    /// `clause_index` points into `F` (a member of `G`); the point is a
    /// `Y`-removable `C`-boundary point of the working `F ∧ H`.
    Redundancy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub clause_index: usize,
    pub point: Assignment,
    /// Clauses of `G` already removed from `F` when the witness was found.
    pub removed_before: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerifyStats {
    pub sat_calls_implication: u64,
    pub sat_calls_redundancy: u64,
    pub boundary_points_examined: u64,
    pub plugging_clauses_added: u64,
    pub shortened_literal_drops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub witness: Option<Witness>,
    pub resource: Option<ResourceLimit>,
    pub stats: VerifyStats,
    pub sat: SatStats,
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        self.status == VerdictStatus::Correct
    }
}

/// The plugging clauses of one redundancy check.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PluggingSet {
    clauses: Vec<Clause>,
}

impl PluggingSet {
    pub fn push(&mut self, d: Clause) {
        self.clauses.push(d);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Redundancy {
    Redundant,
    /// A `Y`-removable boundary point over the problem variables.
    NotRedundant(Assignment),
}

/// Builds a plugging clause for the `Y`-unremovable subspace `y`, given a
/// model `x_star` of `f_and_h|y`.
///
/// Without shortening this is the clause falsified by all of `y`. With
/// shortening, the variables of `y` are visited in ascending order and a
/// variable is dropped when every clause of `f_and_h` stays satisfied by
/// `x_star` and the kept part of `y`. Returns the clause and the number of
/// dropped literals.
pub fn plug_clause(
    y: &Assignment,
    x_star: &Assignment,
    f_and_h: &[Clause],
    shorten: bool,
) -> (Clause, usize) {
    if !shorten || y.len() <= 1 {
        return (Clause::blocking(y), 0);
    }
    // Dense tables indexed by variable; `y` wins over `x_star` on overlap.
    let width = f_and_h
        .iter()
        .flat_map(|c| c.vars())
        .chain(y.iter().map(|(v, _)| v))
        .map(|v| v.index() + 1)
        .max()
        .unwrap_or(0);
    let mut value: Vec<Option<bool>> = vec![None; width];
    let mut in_y = vec![false; width];
    for (v, b) in x_star.iter().filter(|(v, _)| v.index() < width) {
        value[v.index()] = Some(b);
    }
    for (v, b) in y.iter() {
        value[v.index()] = Some(b);
        in_y[v.index()] = true;
    }
    // Satisfying literals per clause, and (flattened, offsets per variable)
    // the clauses each y-literal satisfies.
    let satisfies = |lit: Lit| value[lit.var().index()].map(|b| lit.eval(b)) == Some(true);
    let mut support: Vec<u32> = Vec::with_capacity(f_and_h.len());
    let mut offsets = vec![0usize; width + 1];
    for c in f_and_h {
        let mut count = 0;
        for &lit in c.lits() {
            if satisfies(lit) {
                count += 1;
                if in_y[lit.var().index()] {
                    offsets[lit.var().index() + 1] += 1;
                }
            }
        }
        debug_assert!(count > 0, "x* ∪ y must satisfy every clause");
        support.push(count);
    }
    for v in 0..width {
        offsets[v + 1] += offsets[v];
    }
    let mut fill = offsets.clone();
    let mut occurs = vec![0usize; offsets[width]];
    for (i, c) in f_and_h.iter().enumerate() {
        for &lit in c.lits() {
            let v = lit.var().index();
            if in_y[v] && satisfies(lit) {
                occurs[fill[v]] = i;
                fill[v] += 1;
            }
        }
    }
    let mut kept = y.clone();
    let mut dropped = 0;
    for (v, _) in y.iter() {
        let clauses = &occurs[offsets[v.index()]..offsets[v.index() + 1]];
        if clauses.iter().all(|&i| support[i] >= 2) {
            for &i in clauses {
                support[i] -= 1;
            }
            kept.remove(v);
            dropped += 1;
        }
    }
    (Clause::blocking(&kept), dropped)
}

/// Incremental oracles over a working formula `F ∧ H` in which some clauses
/// are guarded by activation literals. `oracle` also holds the plugging
/// clauses; `subspace` holds only `F ∧ H` and answers the `F|y ∧ H|y`
/// queries, where plugs over `Y` are decided by `y` anyway. Both share one
/// conflict budget and one deadline.
struct Engine {
    formula: Vec<Clause>,
    num_vars: u32,
    quantified: BTreeSet<Var>,
    oracle: SatOracle,
    subspace: SatOracle,
    guards: BTreeMap<usize, Var>,
    removed: Vec<usize>,
    options: VerifyOptions,
    stats: VerifyStats,
}

impl Engine {
    fn new(
        formula: &CnfFormula,
        quantified: &BTreeSet<Var>,
        guarded: &[usize],
        options: VerifyOptions,
    ) -> Engine {
        let mut oracle = SatOracle::with_limits(options.limits);
        let mut subspace = SatOracle::with_limits(options.limits);
        subspace.set_deadline(oracle.deadline());
        let num_vars = formula.num_vars();
        oracle.reserve_vars(num_vars);
        subspace.reserve_vars(num_vars);
        let mut guards = BTreeMap::new();
        for (i, c) in formula.clauses().iter().enumerate() {
            let mut lits = c.lits().to_vec();
            if guarded.contains(&i) {
                let a = oracle.new_var();
                assert_eq!(subspace.new_var(), a, "guards agree across oracles");
                guards.insert(i, a);
                lits.push(a.positive());
            }
            let c = Clause::new(lits).expect("guard is fresh");
            oracle.add_clause(&c);
            subspace.add_clause(&c);
        }
        Engine {
            formula: formula.clauses().to_vec(),
            num_vars,
            quantified: quantified.clone(),
            oracle,
            subspace,
            guards,
            removed: Vec::new(),
            options,
            stats: VerifyStats::default(),
        }
    }

    fn add_clause(&mut self, c: &Clause) {
        self.formula.push(c.clone());
        self.oracle.add_clause(c);
        self.subspace.add_clause(c);
    }

    /// Solves on the main oracle, or on `subspace`, charging conflicts to
    /// the shared budget.
    fn solve(&mut self, on_subspace: bool, assumptions: &[Lit]) -> SatOutcome {
        let (target, other) = if on_subspace {
            (&mut self.subspace, &self.oracle)
        } else {
            (&mut self.oracle, &self.subspace)
        };
        if let Some(max) = self.options.limits.max_conflicts {
            target.set_conflict_limit(Some(max.saturating_sub(other.stats().conflicts)));
        }
        target.solve_lits(assumptions)
    }

    /// Assumptions switching on every live guarded clause except `skip`.
    fn enabled(&self, skip: Option<usize>) -> Vec<Lit> {
        self.guards
            .iter()
            .filter(|(i, _)| Some(**i) != skip && !self.removed.contains(i))
            .map(|(_, a)| a.negative())
            .collect()
    }

    fn remove(&mut self, index: usize) {
        let unit = Clause::new([self.guards[&index].positive()]).unwrap();
        self.oracle.add_clause(&unit);
        self.subspace.add_clause(&unit);
        self.removed.push(index);
    }

    fn live_clauses(&self) -> Vec<Clause> {
        self.formula
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.removed.contains(i))
            .map(|(_, c)| c.clone())
            .collect()
    }

    fn project(&self, model: &Assignment) -> Assignment {
        model.restrict(|v| v.id() <= self.num_vars)
    }

    fn y_part(&self, point: &Assignment) -> Assignment {
        point.restrict(|v| !self.quantified.contains(&v))
    }

    /// Looks for a model of `F ∧ ¬C` for a clause `c` over problem variables.
    fn implication_query(&mut self, c: &Clause) -> Result<Option<Assignment>, ResourceLimit> {
        let mut assumptions: Vec<Lit> = c.lits().iter().map(|&l| !l).collect();
        assumptions.extend(self.enabled(None));
        self.stats.sat_calls_implication += 1;
        match self.solve(false, &assumptions) {
            SatOutcome::Sat(m) => Ok(Some(self.project(&m))),
            SatOutcome::Unsat => Ok(None),
            SatOutcome::ResourceOut(limit) => Err(limit),
        }
    }

    /// Decides whether the guarded clause at `c_index` is redundant in
    /// `∃X[working F ∧ H]`.
    fn check_red(&mut self, c_index: usize) -> Result<Redundancy, ResourceLimit> {
        let c = self.formula[c_index].clone();
        let plug_guard = self.oracle.new_var();
        let mut plugs = PluggingSet::default();

        let mut boundary_query: Vec<Lit> = c.lits().iter().map(|&l| !l).collect();
        boundary_query.extend(self.enabled(Some(c_index)));
        boundary_query.push(plug_guard.negative());
        let enabled = self.enabled(None);

        let mut live: Option<Vec<Clause>> = None;
        let mut iterations = 0u64;
        let result = loop {
            iterations += 1;
            if iterations > self.options.iteration_cap {
                break Err(ResourceLimit::Iterations);
            }
            self.stats.sat_calls_redundancy += 1;
            let model = match self.solve(false, &boundary_query) {
                SatOutcome::Unsat => break Ok(Redundancy::Redundant),
                SatOutcome::ResourceOut(limit) => break Err(limit),
                SatOutcome::Sat(m) => m,
            };
            self.stats.boundary_points_examined += 1;
            let point = self.project(&model);
            let y = self.y_part(&point);

            let mut subspace = y.to_lits();
            subspace.extend(enabled.iter().copied());
            self.stats.sat_calls_redundancy += 1;
            let x_star = match self.solve(true, &subspace) {
                SatOutcome::Unsat => break Ok(Redundancy::NotRedundant(point)),
                SatOutcome::ResourceOut(limit) => break Err(limit),
                SatOutcome::Sat(m) => m.restrict(|v| self.quantified.contains(&v)),
            };
            if live.is_none() {
                live = Some(self.live_clauses());
            }
            let f_and_h = live.as_deref().unwrap_or_default();
            let (d, dropped) = plug_clause(&y, &x_star, f_and_h, self.options.shorten);
            debug_assert!(d.is_falsified_by(&y));
            self.stats.plugging_clauses_added += 1;
            self.stats.shortened_literal_drops += dropped as u64;
            let mut guarded = d.lits().to_vec();
            guarded.push(plug_guard.positive());
            self.oracle
                .add_clause(&Clause::new(guarded).expect("plug over Y only"));
            plugs.push(d);
        };
        // Retire this check's plugging clauses.
        self.oracle
            .add_clause(&Clause::new([plug_guard.positive()]).unwrap());
        result
    }

    fn verdict(
        &self,
        status: VerdictStatus,
        witness: Option<Witness>,
        resource: Option<ResourceLimit>,
    ) -> Verdict {
        Verdict {
            status,
            witness,
            resource,
            stats: self.stats,
            sat: self.oracle.stats() + self.subspace.stats(),
        }
    }
}

/// Decides whether `h` is a solution for taking `G` out of `∃X[F]`.
pub fn ver_pqe(problem: &PqeProblem, h: &Solution, options: VerifyOptions) -> Verdict {
    let mut engine = Engine::new(
        problem.formula(),
        problem.quantified(),
        problem.targets(),
        options,
    );
    run(&mut engine, problem, h)
}

/// As [`ver_pqe`], also returning the oracle's final clause database
/// (activation literals included) for debugging.
pub fn ver_pqe_with_database(
    problem: &PqeProblem,
    h: &Solution,
    options: VerifyOptions,
) -> (Verdict, CnfFormula) {
    let mut engine = Engine::new(
        problem.formula(),
        problem.quantified(),
        problem.targets(),
        options,
    );
    let verdict = run(&mut engine, problem, h);
    (verdict, engine.oracle.database())
}

fn run(engine: &mut Engine, problem: &PqeProblem, h: &Solution) -> Verdict {
    let f = problem.formula();

    for (i, c) in h.formula().clauses().iter().enumerate() {
        match engine.implication_query(c) {
            Ok(None) => {}
            Ok(Some(model)) => {
                assert!(
                    f.is_satisfied_by(&model) && c.is_falsified_by(&model),
                    "internal error: invalid implication witness"
                );
                let witness = Witness {
                    kind: WitnessKind::Implication,
                    clause_index: i,
                    point: model,
                    removed_before: Vec::new(),
                };
                return engine.verdict(VerdictStatus::NotImplied, Some(witness), None);
            }
            Err(limit) => return engine.verdict(VerdictStatus::ResourceOut, None, Some(limit)),
        }
    }

    for c in h.formula().clauses() {
        engine.add_clause(c);
    }

    for &c_index in problem.targets() {
        match engine.check_red(c_index) {
            Ok(Redundancy::Redundant) => engine.remove(c_index),
            Ok(Redundancy::NotRedundant(point)) => {
                let live = CnfFormula::from_clauses(engine.live_clauses());
                let position = engine
                    .formula
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !engine.removed.contains(i))
                    .position(|(i, _)| i == c_index)
                    .expect("target is live");
                assert_eq!(
                    is_boundary_point(&live, &[position], &point),
                    Ok(true),
                    "internal error: redundancy witness is not a boundary point"
                );
                let witness = Witness {
                    kind: WitnessKind::Redundancy,
                    clause_index: c_index,
                    point,
                    removed_before: engine.removed.clone(),
                };
                return engine.verdict(VerdictStatus::NotRedundant, Some(witness), None);
            }
            Err(limit) => return engine.verdict(VerdictStatus::ResourceOut, None, Some(limit)),
        }
    }
    engine.verdict(VerdictStatus::Correct, None, None)
}

/// The first clause of `h` (in order) not implied by `f`, with a model of
/// `f ∧ ¬C`; `None` when `f` implies every clause of `h`.
pub fn check_implication(
    f: &CnfFormula,
    h: &CnfFormula,
    limits: Limits,
) -> Result<Option<Witness>, ResourceOut> {
    let options = VerifyOptions {
        limits,
        ..VerifyOptions::default()
    };
    let mut engine = Engine::new(f, &BTreeSet::new(), &[], options);
    engine.oracle.reserve_vars(h.num_vars());
    for (i, c) in h.clauses().iter().enumerate() {
        if let Some(point) = engine.implication_query(c).map_err(ResourceOut)? {
            return Ok(Some(Witness {
                kind: WitnessKind::Implication,
                clause_index: i,
                point,
                removed_before: Vec::new(),
            }));
        }
    }
    Ok(None)
}

/// Result of a standalone redundancy check, with its counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRedReport {
    pub outcome: Result<Redundancy, ResourceLimit>,
    pub stats: VerifyStats,
}

/// Checks whether clause `c_index` of `f_and_h` is redundant in
/// `∃X[f_and_h]`, on a fresh oracle.
pub fn check_red(
    f_and_h: &CnfFormula,
    quantified: &BTreeSet<Var>,
    c_index: usize,
    options: VerifyOptions,
) -> CheckRedReport {
    let mut engine = Engine::new(f_and_h, quantified, &[c_index], options);
    let outcome = engine.check_red(c_index);
    CheckRedReport {
        outcome,
        stats: engine.stats,
    }
}
