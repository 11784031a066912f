//! The PQE problem `∃X[F(X,Y)]` with a target clause subset `G`, candidate
//! solutions `H(Y)`, and boundary points.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{cofactor, Assignment, Clause, CnfFormula, Var};
use crate::sat::{solve_formula, Limits, ResourceOut, SatOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("the target set G is empty")]
    EmptyTarget,
    #[error("target clause index {index} is out of range (formula has {len} clauses)")]
    TargetOutOfRange { index: usize, len: usize },
    #[error("target clause index {0} is listed twice")]
    DuplicateTarget(usize),
    #[error("target clause {0} has no quantified variable")]
    UnquantifiedTarget(usize),
    #[error("quantified variable {var} exceeds the variable count {num_vars}")]
    QuantifiedOutOfRange { var: u32, num_vars: u32 },
    #[error("solution mentions quantified variable {0}")]
    SolutionUsesQuantified(u32),
    #[error("solution mentions variable {var} outside the problem's {num_vars} variables")]
    SolutionOutOfRange { var: u32, num_vars: u32 },
    #[error("assignment is not full over the {0} problem variables")]
    NotFull(u32),
}

/// `∃X[F]` together with the clauses `G ⊆ F` to take out of the quantifier
/// scope. `G` is held as clause indices so duplicate clauses stay distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqeProblem {
    formula: CnfFormula,
    quantified: BTreeSet<Var>,
    targets: Vec<usize>,
}

impl PqeProblem {
    pub fn new(
        formula: CnfFormula,
        quantified: impl IntoIterator<Item = Var>,
        targets: Vec<usize>,
    ) -> Result<PqeProblem, ProblemError> {
        let quantified: BTreeSet<Var> = quantified.into_iter().collect();
        if let Some(v) = quantified.iter().find(|v| v.id() > formula.num_vars()) {
            return Err(ProblemError::QuantifiedOutOfRange {
                var: v.id(),
                num_vars: formula.num_vars(),
            });
        }
        if targets.is_empty() {
            return Err(ProblemError::EmptyTarget);
        }
        let mut seen = BTreeSet::new();
        for &index in &targets {
            if index >= formula.len() {
                return Err(ProblemError::TargetOutOfRange {
                    index,
                    len: formula.len(),
                });
            }
            if !seen.insert(index) {
                return Err(ProblemError::DuplicateTarget(index));
            }
            if !formula
                .clause(index)
                .vars()
                .any(|v| quantified.contains(&v))
            {
                return Err(ProblemError::UnquantifiedTarget(index));
            }
        }
        Ok(PqeProblem {
            formula,
            quantified,
            targets,
        })
    }

    /// `F`.
    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn num_vars(&self) -> u32 {
        self.formula.num_vars()
    }

    /// `X`.
    pub fn quantified(&self) -> &BTreeSet<Var> {
        &self.quantified
    }

    pub fn is_quantified(&self, v: Var) -> bool {
        self.quantified.contains(&v)
    }

    /// `Y = vars(F) \ X`, ascending.
    pub fn unquantified(&self) -> Vec<Var> {
        self.formula
            .vars()
            .filter(|v| !self.quantified.contains(v))
            .collect()
    }

    /// Indices of `G` in declared order.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// `G` as a formula.
    pub fn target_formula(&self) -> CnfFormula {
        self.formula.select(&self.targets)
    }

    /// `F \ G`.
    pub fn remainder(&self) -> CnfFormula {
        self.formula.without(&self.targets)
    }

    /// Splits a point into its `X` part and its `Y` part.
    pub fn split(&self, p: &Assignment) -> (Assignment, Assignment) {
        let x = p.restrict(|v| self.quantified.contains(&v));
        let y = p.restrict(|v| !self.quantified.contains(&v) && v.id() <= self.num_vars());
        (x, y)
    }
}

/// A candidate `H(Y)`: a CNF over unquantified variables only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    formula: CnfFormula,
}

impl Solution {
    pub fn new(formula: CnfFormula, problem: &PqeProblem) -> Result<Solution, ProblemError> {
        let num_vars = problem.num_vars();
        for v in formula.occurring_vars() {
            if v.id() > num_vars {
                return Err(ProblemError::SolutionOutOfRange {
                    var: v.id(),
                    num_vars,
                });
            }
            if problem.is_quantified(v) {
                return Err(ProblemError::SolutionUsesQuantified(v.id()));
            }
        }
        let formula = CnfFormula::with_num_vars(formula.clauses().to_vec(), num_vars)
            .expect("variables checked against the problem");
        Ok(Solution { formula })
    }

    /// The constant-true solution (no clauses).
    pub fn empty(problem: &PqeProblem) -> Solution {
        Solution {
            formula: CnfFormula::with_num_vars(Vec::new(), problem.num_vars())
                .expect("empty formula"),
        }
    }

    pub fn from_clauses(
        clauses: Vec<Clause>,
        problem: &PqeProblem,
    ) -> Result<Solution, ProblemError> {
        Solution::new(CnfFormula::from_clauses(clauses), problem)
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn len(&self) -> usize {
        self.formula.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formula.is_empty()
    }
}

/// True iff `p` falsifies the formula `G` (some clause indexed by `g`) and
/// satisfies every other clause of `f`. `p` must be full over `vars(f)`.
pub fn is_boundary_point(
    f: &CnfFormula,
    g: &[usize],
    p: &Assignment,
) -> Result<bool, ProblemError> {
    if !p.is_full_over(f.num_vars()) {
        return Err(ProblemError::NotFull(f.num_vars()));
    }
    let mut falsifies_g = false;
    for (i, c) in f.clauses().iter().enumerate() {
        let satisfied = c.is_satisfied_by(p);
        if g.contains(&i) {
            falsifies_g |= !satisfied;
        } else if !satisfied {
            return Ok(false);
        }
    }
    Ok(falsifies_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Removability {
    /// `F|y` is unsatisfiable: an `F`-implied clause over `Y` can remove it.
    YRemovable,
    /// `F|y` is satisfiable.
    YUnremovable,
}

/// Classifies the boundary point `p` of `f` by satisfiability of `f|y`, where
/// `y` is the part of `p` outside `quantified`. Builds the cofactor explicitly
/// and solves it on a fresh oracle.
pub fn classify_point(
    f: &CnfFormula,
    quantified: &BTreeSet<Var>,
    p: &Assignment,
    limits: Limits,
) -> Result<Removability, ResourceOut> {
    let y = p.restrict(|v| !quantified.contains(&v));
    match solve_formula(&cofactor(f, &y), limits) {
        SatOutcome::Sat(_) => Ok(Removability::YUnremovable),
        SatOutcome::Unsat => Ok(Removability::YRemovable),
        SatOutcome::ResourceOut(limit) => Err(ResourceOut(limit)),
    }
}

/// [`classify_point`] against the problem's own `F`.
pub fn classify_boundary_point(
    problem: &PqeProblem,
    p: &Assignment,
    limits: Limits,
) -> Result<Removability, ResourceOut> {
    classify_point(problem.formula(), problem.quantified(), p, limits)
}
