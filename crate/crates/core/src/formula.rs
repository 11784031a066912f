//! CNF formulas, literals and partial assignments.
//!
//! Variables are 1-based (DIMACS convention) and literals are stored as
//! signed integers, so `-3` is the negative literal of variable 3. The value
//! `0` is never a variable; it only terminates clause lines in files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("variable id must be at least 1")]
    ZeroVariable,
    #[error("literal 0 is reserved as a clause terminator")]
    ZeroLiteral,
    #[error("clause contains both {0} and -{0}")]
    Tautology(i32),
    #[error("variable {var} exceeds the declared variable count {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: u32 },
}

/// A propositional variable, identified by a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    pub fn new(id: u32) -> Result<Var, FormulaError> {
        if id == 0 {
            return Err(FormulaError::ZeroVariable);
        }
        Ok(Var(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// Zero-based index, handy for dense tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_index(index: usize) -> Var {
        Var(index as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn negative(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.positive()
        } else {
            self.negative()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A literal in signed DIMACS encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(value: i32) -> Result<Lit, FormulaError> {
        if value == 0 {
            return Err(FormulaError::ZeroLiteral);
        }
        Ok(Lit(value))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Status of a clause under a (possibly partial) assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseStatus {
    Satisfied,
    Falsified,
    Undecided,
}

/// A disjunction of literals. Duplicates are dropped on construction and
/// tautologies are rejected; the empty clause is allowed and means false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Clause, FormulaError> {
        let mut out: Vec<Lit> = Vec::new();
        for lit in lits {
            if out.contains(&!lit) {
                return Err(FormulaError::Tautology(lit.0.abs()));
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Ok(Clause { lits: out })
    }

    pub fn from_dimacs(values: &[i32]) -> Result<Clause, FormulaError> {
        let lits = values
            .iter()
            .map(|&v| Lit::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn max_var(&self) -> u32 {
        self.lits.iter().map(|l| l.var().id()).max().unwrap_or(0)
    }

    pub fn eval(&self, q: &Assignment) -> ClauseStatus {
        let mut undecided = false;
        for lit in &self.lits {
            match q.lit_value(*lit) {
                Some(true) => return ClauseStatus::Satisfied,
                Some(false) => {}
                None => undecided = true,
            }
        }
        if undecided {
            ClauseStatus::Undecided
        } else {
            ClauseStatus::Falsified
        }
    }

    pub fn is_satisfied_by(&self, q: &Assignment) -> bool {
        self.eval(q) == ClauseStatus::Satisfied
    }

    pub fn is_falsified_by(&self, q: &Assignment) -> bool {
        self.eval(q) == ClauseStatus::Falsified
    }

    /// `None` when `q` satisfies the clause, otherwise the clause with every
    /// literal falsified by `q` removed.
    pub fn cofactor(&self, q: &Assignment) -> Option<Clause> {
        let mut kept = Vec::with_capacity(self.lits.len());
        for &lit in &self.lits {
            match q.lit_value(lit) {
                Some(true) => return None,
                Some(false) => {}
                None => kept.push(lit),
            }
        }
        Some(Clause { lits: kept })
    }

    /// The longest clause falsified by `q`: one literal per assigned variable.
    pub fn blocking(q: &Assignment) -> Clause {
        Clause {
            lits: q.iter().map(|(v, value)| v.lit(!value)).collect(),
        }
    }

    /// Literals in ascending variable order, for comparisons that should not
    /// depend on literal order.
    pub fn normalized(&self) -> Vec<Lit> {
        let mut lits = self.lits.clone();
        lits.sort_by_key(|l| (l.var(), !l.is_positive()));
        lits
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

/// A conjunction of clauses over the variables `1..=num_vars`.
///
/// Clause positions are stable identifiers: index `i` here is ordinal `i + 1`
/// in files.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CnfFormula {
    clauses: Vec<Clause>,
    num_vars: u32,
}

impl CnfFormula {
    pub fn new() -> CnfFormula {
        CnfFormula::default()
    }

    /// Formula whose variable universe is the largest id mentioned.
    pub fn from_clauses(clauses: Vec<Clause>) -> CnfFormula {
        let num_vars = clauses.iter().map(Clause::max_var).max().unwrap_or(0);
        CnfFormula { clauses, num_vars }
    }

    /// Formula with an explicit variable universe, as declared by a header.
    pub fn with_num_vars(clauses: Vec<Clause>, num_vars: u32) -> Result<CnfFormula, FormulaError> {
        if let Some(var) = clauses.iter().map(Clause::max_var).find(|&m| m > num_vars) {
            return Err(FormulaError::VariableOutOfRange { var, num_vars });
        }
        Ok(CnfFormula { clauses, num_vars })
    }

    pub fn from_dimacs(clauses: &[&[i32]]) -> Result<CnfFormula, FormulaError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CnfFormula::from_clauses(clauses))
    }

    pub fn push(&mut self, clause: Clause) {
        self.num_vars = self.num_vars.max(clause.max_var());
        self.clauses.push(clause);
    }

    pub fn extend_num_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// The variable universe `1..=num_vars`.
    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.num_vars).map(Var)
    }

    /// Variables that actually occur in some clause.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn is_satisfied_by(&self, q: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(q))
    }

    pub fn is_falsified_by(&self, q: &Assignment) -> bool {
        self.clauses.iter().any(|c| c.is_falsified_by(q))
    }

    /// Conjunction of `self` and `other`, keeping `self`'s clause indices.
    pub fn conjoin(&self, other: &CnfFormula) -> CnfFormula {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        CnfFormula {
            clauses,
            num_vars: self.num_vars.max(other.num_vars),
        }
    }

    /// The formula without the clauses at `indices`.
    pub fn without(&self, indices: &[usize]) -> CnfFormula {
        let clauses = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(i, _)| !indices.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        CnfFormula {
            clauses,
            num_vars: self.num_vars,
        }
    }

    /// The clauses at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> CnfFormula {
        CnfFormula {
            clauses: indices.iter().map(|&i| self.clauses[i].clone()).collect(),
            num_vars: self.num_vars,
        }
    }

    /// Clause multiset as sorted, normalized literal lists.
    pub fn normalized(&self) -> Vec<Vec<Lit>> {
        let mut out: Vec<Vec<Lit>> = self.clauses.iter().map(Clause::normalized).collect();
        out.sort();
        out
    }
}

/// `f|q`: clauses satisfied by `q` are dropped and the remaining clauses lose
/// their `q`-falsified literals. The result may contain the empty clause.
pub fn cofactor(f: &CnfFormula, q: &Assignment) -> CnfFormula {
    CnfFormula {
        clauses: f.clauses.iter().filter_map(|c| c.cofactor(q)).collect(),
        num_vars: f.num_vars,
    }
}

pub fn eval_clause(c: &Clause, q: &Assignment) -> ClauseStatus {
    c.eval(q)
}

/// A partial map from variables to truth values.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct Assignment {
    bindings: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// Builds from `(variable id, value)` pairs; panics on id 0.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, bool)>) -> Assignment {
        Assignment {
            bindings: pairs
                .into_iter()
                .map(|(id, v)| (Var::new(id).expect("variable ids are 1-based"), v))
                .collect(),
        }
    }

    /// The assignment making every literal in `lits` true.
    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Assignment {
        Assignment {
            bindings: lits
                .into_iter()
                .map(|l| (l.var(), l.is_positive()))
                .collect(),
        }
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.bindings.insert(var, value);
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.bindings.get(&var).copied()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| lit.eval(v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.bindings.iter().map(|(v, b)| (*v, *b))
    }

    /// `Va(q)`.
    pub fn assigned_vars(&self) -> BTreeSet<Var> {
        self.bindings.keys().copied().collect()
    }

    /// Literals true under the assignment, in ascending variable order.
    pub fn to_lits(&self) -> Vec<Lit> {
        self.iter().map(|(v, b)| v.lit(b)).collect()
    }

    /// `self ⊆ other`: every binding of `self` appears in `other`.
    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.bindings
            .iter()
            .all(|(v, b)| other.bindings.get(v) == Some(b))
    }

    /// True when every variable of `1..=num_vars` is assigned.
    pub fn is_full_over(&self, num_vars: u32) -> bool {
        (1..=num_vars).all(|id| self.bindings.contains_key(&Var(id)))
    }

    /// Restriction to the variables accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(Var) -> bool) -> Assignment {
        Assignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(v, b)| (*v, *b))
                .collect(),
        }
    }

    /// Union with `other`; `other` wins on conflicting bindings.
    pub fn union(&self, other: &Assignment) -> Assignment {
        let mut bindings = self.bindings.clone();
        bindings.extend(other.bindings.iter().map(|(v, b)| (*v, *b)));
        Assignment { bindings }
    }

    pub fn remove(&mut self, var: Var) -> Option<bool> {
        self.bindings.remove(&var)
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Var, bool)>>(iter: T) -> Self {
        Assignment {
            bindings: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}={}", v, b as u8)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_example() -> CnfFormula {
        CnfFormula::from_dimacs(&[&[-3, 4], &[1, 3], &[1, -4], &[2, 4]]).unwrap()
    }

    #[test]
    fn clause_dedups_and_rejects_tautologies() {
        let c = Clause::from_dimacs(&[1, -2, 1]).unwrap();
        assert_eq!(c.lits(), &[Lit(1), Lit(-2)]);
        assert_eq!(
            Clause::from_dimacs(&[3, 1, -3]),
            Err(FormulaError::Tautology(3))
        );
        assert_eq!(Clause::from_dimacs(&[0]), Err(FormulaError::ZeroLiteral));
        assert!(Clause::from_dimacs(&[]).unwrap().is_empty());
    }

    #[test]
    fn eval_clause_three_way() {
        let c = Clause::from_dimacs(&[1, 3]).unwrap();
        assert_eq!(
            eval_clause(&c, &Assignment::from_pairs([(1, true)])),
            ClauseStatus::Satisfied
        );
        assert_eq!(
            eval_clause(&c, &Assignment::from_pairs([(1, false), (3, false)])),
            ClauseStatus::Falsified
        );
        assert_eq!(
            eval_clause(&c, &Assignment::from_pairs([(1, false)])),
            ClauseStatus::Undecided
        );
        assert_eq!(
            eval_clause(&Clause::empty(), &Assignment::new()),
            ClauseStatus::Falsified
        );
    }

    #[test]
    fn cofactor_single_clause() {
        let f = CnfFormula::from_dimacs(&[&[-3, 4]]).unwrap();
        let g = cofactor(&f, &Assignment::from_pairs([(3, true)]));
        assert_eq!(g.clauses(), &[Clause::from_dimacs(&[4]).unwrap()]);
        let g = cofactor(&f, &Assignment::from_pairs([(4, true)]));
        assert!(g.is_empty());
    }

    #[test]
    fn cofactor_small_example_under_y() {
        let g = cofactor(
            &small_example(),
            &Assignment::from_pairs([(1, false), (2, true)]),
        );
        let expected = CnfFormula::from_dimacs(&[&[-3, 4], &[3], &[-4]]).unwrap();
        assert_eq!(g.normalized(), expected.normalized());
    }

    #[test]
    fn cofactor_can_produce_empty_clause() {
        let f = CnfFormula::from_dimacs(&[&[1, 2]]).unwrap();
        let g = cofactor(&f, &Assignment::from_pairs([(1, false), (2, false)]));
        assert_eq!(g.clauses(), &[Clause::empty()]);
    }

    #[test]
    fn assignment_containment() {
        let q = Assignment::from_pairs([(1, true)]);
        let r = Assignment::from_pairs([(1, true), (2, false)]);
        assert!(q.is_subset_of(&r));
        assert!(!r.is_subset_of(&q));
        assert!(!Assignment::from_pairs([(1, false)]).is_subset_of(&r));
        assert!(Assignment::new().is_subset_of(&q));
        assert_eq!(r.assigned_vars().len(), 2);
    }

    #[test]
    fn blocking_clause_is_falsified() {
        let y = Assignment::from_pairs([(1, true), (2, true)]);
        let d = Clause::blocking(&y);
        assert_eq!(d, Clause::from_dimacs(&[-1, -2]).unwrap());
        assert!(d.is_falsified_by(&y));
    }

    #[test]
    fn header_bounds_variables() {
        let c = Clause::from_dimacs(&[5]).unwrap();
        assert_eq!(
            CnfFormula::with_num_vars(vec![c], 4),
            Err(FormulaError::VariableOutOfRange {
                var: 5,
                num_vars: 4
            })
        );
    }
}
