//! Brute-force ground truth for small problems.
//!
//! Everything here enumerates the full assignments to `Y` in lexicographic
//! order, with the smallest variable id most significant and 0 before 1. The
//! `X` side is decided exhaustively or, for large `X`, with a fresh SAT
//! oracle under `y` as assumptions. Nothing in this module shares code with
//! the verifier's boundary-point search.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{Assignment, Clause, CnfFormula, Var};
use crate::problem::{PqeProblem, Removability, Solution};
use crate::sat::{Limits, SatOracle, SatOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest `|Y|` enumerated.
    pub max_unquantified: usize,
    /// Largest `|X|` decided by enumeration rather than SAT.
    pub max_exhaustive_quantified: usize,
    /// Largest total variable count for the boundary-point census.
    pub max_census_vars: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_unquantified: 20,
            max_exhaustive_quantified: 20,
            max_census_vars: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is {size}, above the brute-force cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Smallest `y` where the two sides differ.
    pub first_divergence: Option<Assignment>,
    /// `(∃X[F], H ∧ ∃X[F \ G])` at the divergence.
    pub side_values: Option<(bool, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryCensus {
    pub total: u64,
    pub removable: u64,
    pub unremovable: u64,
    /// The first boundary points found, in enumeration order.
    pub samples: Vec<(Assignment, Removability)>,
}

const SAMPLE_LIMIT: usize = 16;

/// A clause split into bit masks over the `Y` and `X` positions.
#[derive(Debug, Clone, Copy)]
struct Masks {
    y_pos: u64,
    y_neg: u64,
    x_pos: u64,
    x_neg: u64,
}

impl Masks {
    fn y_satisfied(&self, y: u64) -> bool {
        (y & self.y_pos) | (!y & self.y_neg) != 0
    }

    fn x_satisfied(&self, x: u64) -> bool {
        (x & self.x_pos) | (!x & self.x_neg) != 0
    }
}

/// Positions of variables: `Y` in lexicographic significance order, `X`
/// ascending from bit 0.
struct Layout {
    ys: Vec<Var>,
    xs: Vec<Var>,
    y_bit: Vec<Option<u32>>,
    x_bit: Vec<Option<u32>>,
}

impl Layout {
    fn new(problem: &PqeProblem) -> Layout {
        Layout::from_parts(problem.num_vars(), problem.quantified())
    }

    fn from_parts(num_vars: u32, quantified: &BTreeSet<Var>) -> Layout {
        let ys: Vec<Var> = (1..=num_vars)
            .map(|id| Var::new(id).expect("ids start at 1"))
            .filter(|v| !quantified.contains(v))
            .collect();
        let xs: Vec<Var> = quantified.iter().copied().collect();
        let n = num_vars as usize;
        let mut y_bit = vec![None; n];
        let mut x_bit = vec![None; n];
        let ny = ys.len() as u32;
        for (i, v) in ys.iter().enumerate() {
            y_bit[v.index()] = Some(ny - 1 - i as u32);
        }
        for (i, v) in xs.iter().enumerate() {
            x_bit[v.index()] = Some(i as u32);
        }
        Layout {
            ys,
            xs,
            y_bit,
            x_bit,
        }
    }

    fn masks(&self, c: &Clause) -> Masks {
        let mut m = Masks {
            y_pos: 0,
            y_neg: 0,
            x_pos: 0,
            x_neg: 0,
        };
        for lit in c.lits() {
            let i = lit.var().index();
            if let Some(b) = self.y_bit[i] {
                if lit.is_positive() {
                    m.y_pos |= 1 << b;
                } else {
                    m.y_neg |= 1 << b;
                }
            } else if let Some(b) = self.x_bit[i] {
                if lit.is_positive() {
                    m.x_pos |= 1 << b;
                } else {
                    m.x_neg |= 1 << b;
                }
            }
        }
        m
    }

    fn y_assignment(&self, y: u64) -> Assignment {
        let ny = self.ys.len() as u32;
        self.ys
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, (y >> (ny - 1 - i as u32)) & 1 == 1))
            .collect()
    }

    fn x_assignment(&self, x: u64) -> Assignment {
        self.xs
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, (x >> i) & 1 == 1))
            .collect()
    }
}

/// Decides `∃X[f]|y` for each `y`.
enum SubspaceSat {
    Exhaustive { masks: Vec<Masks>, nx: u32 },
    Sat(Box<SatOracle>),
}

impl SubspaceSat {
    fn new(f: &CnfFormula, layout: &Layout, caps: &OracleCaps) -> SubspaceSat {
        if layout.xs.len() <= caps.max_exhaustive_quantified {
            SubspaceSat::Exhaustive {
                masks: f.clauses().iter().map(|c| layout.masks(c)).collect(),
                nx: layout.xs.len() as u32,
            }
        } else {
            SubspaceSat::Sat(Box::new(SatOracle::from_formula(f, Limits::none())))
        }
    }

    fn satisfiable(&mut self, y: u64, layout: &Layout) -> bool {
        match self {
            SubspaceSat::Exhaustive { masks, nx } => {
                let residual: Vec<Masks> = masks
                    .iter()
                    .filter(|m| !m.y_satisfied(y))
                    .copied()
                    .collect();
                if residual.iter().any(|m| m.x_pos | m.x_neg == 0) {
                    return false;
                }
                (0..1u64 << *nx).any(|x| residual.iter().all(|m| m.x_satisfied(x)))
            }
            SubspaceSat::Sat(oracle) => match oracle.solve(&layout.y_assignment(y)) {
                SatOutcome::Sat(_) => true,
                SatOutcome::Unsat => false,
                SatOutcome::ResourceOut(_) => unreachable!("oracle runs without limits"),
            },
        }
    }
}

fn check_y_cap(layout: &Layout, caps: &OracleCaps) -> Result<(), OracleError> {
    if layout.ys.len() > caps.max_unquantified {
        return Err(OracleError::CapExceeded {
            what: "|Y|",
            size: layout.ys.len(),
            cap: caps.max_unquantified,
        });
    }
    Ok(())
}

/// Semantic check of `∃X[F] ≡ H ∧ ∃X[F \ G]` over every full `y`.
pub fn brute_equiv(
    problem: &PqeProblem,
    h: &Solution,
    caps: &OracleCaps,
) -> Result<EquivalenceReport, OracleError> {
    let layout = Layout::new(problem);
    check_y_cap(&layout, caps)?;
    let mut whole = SubspaceSat::new(problem.formula(), &layout, caps);
    let mut rest = SubspaceSat::new(&problem.remainder(), &layout, caps);
    let h_masks: Vec<Masks> = h
        .formula()
        .clauses()
        .iter()
        .map(|c| layout.masks(c))
        .collect();

    for y in 0..1u64 << layout.ys.len() {
        let lhs = whole.satisfiable(y, &layout);
        let rhs = h_masks.iter().all(|m| m.y_satisfied(y)) && rest.satisfiable(y, &layout);
        if lhs != rhs {
            return Ok(EquivalenceReport {
                equivalent: false,
                first_divergence: Some(layout.y_assignment(y)),
                side_values: Some((lhs, rhs)),
            });
        }
    }
    Ok(EquivalenceReport {
        equivalent: true,
        first_divergence: None,
        side_values: None,
    })
}

/// Compares `∃X[a]` with `∃X[b]` over every full assignment to the other
/// variables in `1..=num_vars`, returning the smallest `y` where they differ.
pub fn quantified_equiv(
    a: &CnfFormula,
    b: &CnfFormula,
    num_vars: u32,
    quantified: &BTreeSet<Var>,
    caps: &OracleCaps,
) -> Result<Option<Assignment>, OracleError> {
    let layout = Layout::from_parts(num_vars, quantified);
    check_y_cap(&layout, caps)?;
    let mut left = SubspaceSat::new(a, &layout, caps);
    let mut right = SubspaceSat::new(b, &layout, caps);
    for y in 0..1u64 << layout.ys.len() {
        if left.satisfiable(y, &layout) != right.satisfiable(y, &layout) {
            return Ok(Some(layout.y_assignment(y)));
        }
    }
    Ok(None)
}

/// Counts the `G`-boundary points of `F` (or `F ∧ H` with `extra`) and
/// classifies each by satisfiability of the formula in its `y` subspace.
pub fn enumerate_boundary_points(
    problem: &PqeProblem,
    extra: Option<&Solution>,
    caps: &OracleCaps,
) -> Result<BoundaryCensus, OracleError> {
    let n = problem.num_vars() as usize;
    if n > caps.max_census_vars {
        return Err(OracleError::CapExceeded {
            what: "variable count",
            size: n,
            cap: caps.max_census_vars,
        });
    }
    let layout = Layout::new(problem);
    let f = match extra {
        Some(h) => problem.formula().conjoin(h.formula()),
        None => problem.formula().clone(),
    };
    let masks: Vec<Masks> = f.clauses().iter().map(|c| layout.masks(c)).collect();
    let targets = problem.targets();
    let nx = layout.xs.len() as u32;

    let mut census = BoundaryCensus::default();
    let mut points: Vec<u64> = Vec::new();
    for y in 0..1u64 << layout.ys.len() {
        let residual: Vec<(usize, Masks)> = masks
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, m)| !m.y_satisfied(y))
            .collect();
        points.clear();
        let mut satisfiable = false;
        for x in 0..1u64 << nx {
            let mut g_falsified = false;
            let mut rest_ok = true;
            for (i, m) in &residual {
                if !m.x_satisfied(x) {
                    if targets.contains(i) {
                        g_falsified = true;
                    } else {
                        rest_ok = false;
                        break;
                    }
                }
            }
            if rest_ok {
                if g_falsified {
                    points.push(x);
                } else {
                    satisfiable = true;
                }
            }
        }
        if points.is_empty() {
            continue;
        }
        let kind = if satisfiable {
            census.unremovable += points.len() as u64;
            Removability::YUnremovable
        } else {
            census.removable += points.len() as u64;
            Removability::YRemovable
        };
        census.total += points.len() as u64;
        for &x in &points {
            if census.samples.len() >= SAMPLE_LIMIT {
                break;
            }
            let p = layout.y_assignment(y).union(&layout.x_assignment(x));
            census.samples.push((p, kind));
        }
    }
    Ok(census)
}

/// Reference PQE solver: one full-length blocking clause for every `y` where
/// `F` is unsatisfiable but `F \ G` is satisfiable.
pub fn naive_pqe_solve(problem: &PqeProblem, caps: &OracleCaps) -> Result<Solution, OracleError> {
    let layout = Layout::new(problem);
    check_y_cap(&layout, caps)?;
    let mut whole = SubspaceSat::new(problem.formula(), &layout, caps);
    let mut rest = SubspaceSat::new(&problem.remainder(), &layout, caps);
    let mut clauses = Vec::new();
    for y in 0..1u64 << layout.ys.len() {
        if !whole.satisfiable(y, &layout) && rest.satisfiable(y, &layout) {
            clauses.push(Clause::blocking(&layout.y_assignment(y)));
        }
    }
    let mut h = CnfFormula::from_clauses(clauses);
    h.extend_num_vars(problem.num_vars());
    Ok(Solution::new(h, problem).expect("blocking clauses range over Y"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: u32) -> Var {
        Var::new(id).unwrap()
    }

    fn small_example() -> PqeProblem {
        let f = CnfFormula::from_dimacs(&[&[-3, 4], &[1, 3], &[1, -4], &[2, 4]]).unwrap();
        PqeProblem::new(f, [var(3), var(4)], vec![0]).unwrap()
    }

    fn solution(p: &PqeProblem, clauses: &[&[i32]]) -> Solution {
        Solution::new(CnfFormula::from_dimacs(clauses).unwrap(), p).unwrap()
    }

    fn point(x3: bool, x4: bool, y1: bool, y2: bool) -> Assignment {
        Assignment::from_pairs([(1, y1), (2, y2), (3, x3), (4, x4)])
    }

    #[test]
    fn small_example_equivalences() {
        let p = small_example();
        let caps = OracleCaps::default();
        assert!(
            brute_equiv(&p, &solution(&p, &[&[1]]), &caps)
                .unwrap()
                .equivalent
        );
        assert!(
            brute_equiv(&p, &solution(&p, &[&[1, -2]]), &caps)
                .unwrap()
                .equivalent
        );
        let r = brute_equiv(&p, &Solution::empty(&p), &caps).unwrap();
        assert!(!r.equivalent);
        assert_eq!(
            r.first_divergence,
            Some(Assignment::from_pairs([(1, false), (2, true)]))
        );
        assert_eq!(r.side_values, Some((false, true)));
    }

    #[test]
    fn small_example_census() {
        let p = small_example();
        let caps = OracleCaps::default();
        let c = enumerate_boundary_points(&p, None, &caps).unwrap();
        assert_eq!((c.total, c.removable, c.unremovable), (2, 1, 1));
        assert_eq!(
            c.samples,
            vec![
                (point(true, false, false, true), Removability::YRemovable),
                (point(true, false, true, true), Removability::YUnremovable),
            ]
        );
        let c = enumerate_boundary_points(&p, Some(&solution(&p, &[&[1]])), &caps).unwrap();
        assert_eq!((c.total, c.removable, c.unremovable), (1, 0, 1));
        assert_eq!(c.samples[0].0, point(true, false, true, true));
    }

    #[test]
    fn duplicated_target_has_no_boundary_points() {
        let f = CnfFormula::from_dimacs(&[&[-3, 4], &[1, 3], &[-3, 4]]).unwrap();
        let p = PqeProblem::new(f, [var(3), var(4)], vec![0]).unwrap();
        let c = enumerate_boundary_points(&p, None, &OracleCaps::default()).unwrap();
        assert_eq!(c.total, 0);
    }

    #[test]
    fn naive_solution_of_small_example() {
        let p = small_example();
        let h = naive_pqe_solve(&p, &OracleCaps::default()).unwrap();
        assert_eq!(
            h.formula().clauses(),
            &[Clause::from_dimacs(&[1, -2]).unwrap()]
        );
    }

    #[test]
    fn naive_solution_empty_when_target_redundant() {
        // G = {x3 ∨ y1} is implied by (x3) in F \ G.
        let f = CnfFormula::from_dimacs(&[&[3, 1], &[3]]).unwrap();
        let p = PqeProblem::new(f, [var(3)], vec![0]).unwrap();
        assert!(naive_pqe_solve(&p, &OracleCaps::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn naive_solution_blocks_every_y_when_f_unsat() {
        // G = {¬x3} and F \ G = {x3, y1 ∨ y2 ∨ x3}: F is unsatisfiable in
        // every subspace while F \ G is satisfiable in every subspace.
        let f = CnfFormula::from_dimacs(&[&[-3], &[3], &[1, 2, 3]]).unwrap();
        let p = PqeProblem::new(f, [var(3)], vec![0]).unwrap();
        let h = naive_pqe_solve(&p, &OracleCaps::default()).unwrap();
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn sat_route_matches_exhaustive_route() {
        let p = small_example();
        let exhaustive = OracleCaps::default();
        let via_sat = OracleCaps {
            max_exhaustive_quantified: 0,
            ..OracleCaps::default()
        };
        for h in [
            Solution::empty(&p),
            solution(&p, &[&[1]]),
            solution(&p, &[&[2]]),
        ] {
            assert_eq!(
                brute_equiv(&p, &h, &exhaustive).unwrap(),
                brute_equiv(&p, &h, &via_sat).unwrap()
            );
        }
        assert_eq!(
            naive_pqe_solve(&p, &exhaustive).unwrap(),
            naive_pqe_solve(&p, &via_sat).unwrap()
        );
    }

    #[test]
    fn caps_are_errors() {
        let p = small_example();
        let caps = OracleCaps {
            max_unquantified: 1,
            max_census_vars: 3,
            ..OracleCaps::default()
        };
        assert!(matches!(
            brute_equiv(&p, &Solution::empty(&p), &caps),
            Err(OracleError::CapExceeded {
                what: "|Y|",
                size: 2,
                cap: 1
            })
        ));
        assert!(enumerate_boundary_points(&p, None, &caps).is_err());
        assert!(naive_pqe_solve(&p, &caps).is_err());
    }
}
