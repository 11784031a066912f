use std::collections::BTreeSet;

use proptest::prelude::*;

use pqe_core::dimacs::{parse_problem, parse_solution, write_problem, write_solution};
use pqe_core::formula::{cofactor, Assignment, Clause, CnfFormula, Lit, Var};
use pqe_core::gen::{generate, GenError, GenParams};
use pqe_core::oracle::{quantified_equiv, OracleCaps};
use pqe_core::problem::{is_boundary_point, Solution};
use pqe_core::sat::{solve_formula, Limits, SatOracle, SatOutcome};
use pqe_core::verifier::plug_clause;

/// Clauses over `1..=num_vars` with distinct variables per clause.
fn cnf(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let clause = prop::collection::btree_map(1..=n, any::<bool>(), 1..=3.min(n as usize))
            .prop_map(|m| {
                Clause::new(m.into_iter().map(|(v, b)| Var::new(v).unwrap().lit(b))).unwrap()
            });
        prop::collection::vec(clause, 0..=max_clauses)
            .prop_map(move |cs| CnfFormula::with_num_vars(cs, n).unwrap())
    })
}

fn full(n: u32, bits: u64) -> Assignment {
    (1..=n)
        .map(|id| (Var::new(id).unwrap(), (bits >> (id - 1)) & 1 == 1))
        .collect()
}

fn brute_sat(f: &CnfFormula, assumptions: &Assignment) -> bool {
    let n = f.num_vars();
    (0..1u64 << n).any(|bits| {
        let t = full(n, bits);
        assumptions.is_subset_of(&t) && f.is_satisfied_by(&t)
    })
}

/// Two disjoint partial assignments drawn from one value-per-variable map.
fn split_assignments(n: u32, picks: &[(u8, bool)]) -> (Assignment, Assignment) {
    let mut q = Assignment::new();
    let mut r = Assignment::new();
    for id in 1..=n {
        let (which, value) = picks[(id - 1) as usize];
        let v = Var::new(id).unwrap();
        match which % 3 {
            0 => q.set(v, value),
            1 => r.set(v, value),
            _ => {}
        }
    }
    (q, r)
}

fn sorted(f: &CnfFormula) -> Vec<Vec<Lit>> {
    let mut v = f.normalized();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cofactor_composes(f in cnf(12, 20), picks in prop::collection::vec((any::<u8>(), any::<bool>()), 12)) {
        let (q, r) = split_assignments(f.num_vars(), &picks);
        let stepwise = cofactor(&cofactor(&f, &q), &r);
        let joint = cofactor(&f, &q.union(&r));
        prop_assert_eq!(sorted(&stepwise), sorted(&joint));
    }

    #[test]
    fn cofactor_is_sound(f in cnf(10, 16), picks in prop::collection::vec((any::<u8>(), any::<bool>()), 10)) {
        let n = f.num_vars();
        let (q, _) = split_assignments(n, &picks);
        let fq = cofactor(&f, &q);
        for bits in 0..1u64 << n {
            let t = full(n, bits).restrict(|v| q.get(v).is_none());
            prop_assert_eq!(fq.is_satisfied_by(&t), f.is_satisfied_by(&q.union(&t)));
        }
    }

    #[test]
    fn boundary_points_falsify_the_formula(f in cnf(8, 12), bits in any::<u64>(), g_pick in any::<usize>()) {
        prop_assume!(!f.is_empty());
        let n = f.num_vars();
        let p = full(n, bits & ((1u64 << n) - 1));
        let g = [g_pick % f.len()];
        if is_boundary_point(&f, &g, &p).unwrap() {
            prop_assert!(f.is_falsified_by(&p));
            prop_assert!(!f.is_satisfied_by(&p));
            prop_assert!(f.clause(g[0]).is_falsified_by(&p));
        }
    }

    #[test]
    fn quantified_equivalence_is_an_equivalence(
        a in cnf(8, 10),
        b_clauses in prop::collection::vec(prop::collection::btree_map(1u32..=8, any::<bool>(), 1..=3), 0..10),
        x_mask in any::<u8>(),
        rotation in any::<usize>(),
    ) {
        let n = a.num_vars();
        let b_clauses: Vec<Clause> = b_clauses
            .into_iter()
            .map(|m| m.into_iter().filter(|(v, _)| *v <= n).collect::<Vec<_>>())
            .filter(|m| !m.is_empty())
            .map(|m| Clause::new(m.into_iter().map(|(v, s)| Var::new(v).unwrap().lit(s))).unwrap())
            .collect();
        let b = CnfFormula::with_num_vars(b_clauses, n).unwrap();
        let xs: BTreeSet<Var> = (1..=n).filter(|id| x_mask >> (id - 1) & 1 == 1).map(|id| Var::new(id).unwrap()).collect();
        let caps = OracleCaps::default();
        prop_assert_eq!(quantified_equiv(&a, &a, n, &xs, &caps).unwrap(), None);
        let ab = quantified_equiv(&a, &b, n, &xs, &caps).unwrap().is_none();
        let ba = quantified_equiv(&b, &a, n, &xs, &caps).unwrap().is_none();
        prop_assert_eq!(ab, ba);
        let mut rotated: Vec<Clause> = a.clauses().to_vec();
        if !rotated.is_empty() {
            let k = rotation % rotated.len();
            rotated.rotate_left(k);
        }
        let rotated = CnfFormula::with_num_vars(rotated, n).unwrap();
        prop_assert_eq!(quantified_equiv(&rotated, &a, n, &xs, &caps).unwrap(), None);
        prop_assert_eq!(quantified_equiv(&rotated, &b, n, &xs, &caps).unwrap().is_none(), ab);
    }

    #[test]
    fn sat_agrees_with_enumeration(f in cnf(14, 60)) {
        match solve_formula(&f, Limits::none()) {
            SatOutcome::Sat(m) => prop_assert!(f.is_satisfied_by(&m)),
            SatOutcome::Unsat => prop_assert!(!brute_sat(&f, &Assignment::new())),
            SatOutcome::ResourceOut(l) => prop_assert!(false, "unlimited solve ran out: {l}"),
        }
    }

    #[test]
    fn assumptions_agree_with_enumeration_and_are_monotone(
        f in cnf(12, 50),
        picks in prop::collection::vec((any::<u8>(), any::<bool>()), 12),
    ) {
        let (a, b) = split_assignments(f.num_vars(), &picks);
        let mut oracle = SatOracle::from_formula(&f, Limits::none());
        let small = oracle.solve(&a);
        prop_assert_eq!(small.is_sat(), brute_sat(&f, &a));
        if let SatOutcome::Sat(m) = &small {
            prop_assert!(a.is_subset_of(m));
            prop_assert!(f.is_satisfied_by(m));
        }
        let large = oracle.solve(&a.union(&b));
        prop_assert_eq!(large.is_sat(), brute_sat(&f, &a.union(&b)));
        if small.is_unsat() {
            prop_assert!(large.is_unsat());
        }
    }

    #[test]
    fn identical_call_sequences_are_deterministic(
        f in cnf(14, 60),
        queries in prop::collection::vec(prop::collection::vec((any::<u8>(), any::<bool>()), 14), 1..5),
    ) {
        let run = || {
            let mut oracle = SatOracle::from_formula(&f, Limits::none());
            queries
                .iter()
                .map(|q| oracle.solve(&split_assignments(f.num_vars(), q).0))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn generated_problems_are_valid_and_round_trip(
        num_vars in 3u32..40,
        ratio in 1usize..5,
        y_pct in 10u32..90,
        two_pct in 0u32..=100,
        targets in 1usize..4,
        seed in any::<u64>(),
    ) {
        let params = GenParams {
            num_vars,
            num_clauses: ratio * num_vars as usize,
            y_fraction: y_pct as f64 / 100.0,
            two_lit_fraction: two_pct as f64 / 100.0,
            targets,
            seed,
        };
        prop_assume!(params.validate().is_ok());
        let p = match generate(&params) {
            Ok(p) => p,
            Err(GenError::NoQuantifiedClause(_)) => {
                // Only possible when too few clauses mention X to pick from.
                let retry = GenParams { targets: 1, ..params.clone() };
                if let Ok(one) = generate(&retry) {
                    let eligible = one.formula().clauses().iter().filter(|c| c.vars().any(|v| one.is_quantified(v))).count();
                    prop_assert!(eligible < targets);
                }
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(!p.targets().is_empty());
        for &i in p.targets() {
            prop_assert!(p.formula().clause(i).vars().any(|v| p.is_quantified(v)));
        }
        let again = parse_problem(&write_problem(&p)).unwrap();
        prop_assert_eq!(&again, &p);
        prop_assert_eq!(generate(&params).unwrap(), p);
    }

    #[test]
    fn solutions_round_trip(seed in any::<u64>(), picks in prop::collection::vec(prop::collection::btree_map(0usize..16, any::<bool>(), 1..4), 0..8)) {
        let p = generate(&GenParams { num_vars: 16, num_clauses: 32, seed, ..GenParams::default() }).unwrap();
        let ys = p.unquantified();
        let clauses: Vec<Clause> = picks
            .into_iter()
            .map(|m| Clause::new(m.into_iter().map(|(i, s)| ys[i % ys.len()].lit(s))).unwrap_or_else(|_| Clause::new([ys[0].positive()]).unwrap()))
            .collect();
        let h = Solution::from_clauses(clauses, &p).unwrap();
        prop_assert_eq!(parse_solution(&write_solution(&h), &p).unwrap(), h);
    }

    #[test]
    fn plugging_clause_excludes_its_own_point(f in cnf(10, 20), bits in 0u64..1024, y_mask in any::<u16>(), shorten in any::<bool>()) {
        let n = f.num_vars();
        let size = 1u64 << n;
        // The first model of f at or after `bits`, cyclically.
        let p = (0..size).map(|k| full(n, (bits + k) % size)).find(|t| f.is_satisfied_by(t));
        prop_assume!(p.is_some());
        let p = p.unwrap();
        let ys: BTreeSet<Var> = (1..=n).filter(|id| y_mask >> (id - 1) & 1 == 1).map(|id| Var::new(id).unwrap()).collect();
        prop_assume!(!ys.is_empty());
        let y = p.restrict(|v| ys.contains(&v));
        let x = p.restrict(|v| !ys.contains(&v));
        let (d, drops) = plug_clause(&y, &x, f.clauses(), shorten);
        prop_assert!(d.is_falsified_by(&y));
        prop_assert!(d.vars().all(|v| ys.contains(&v)));
        prop_assert_eq!(d.len() + drops, y.len());
        if !shorten {
            prop_assert_eq!(drops, 0);
        }
        // Every point agreeing with x and with y on D's variables keeps F true.
        let kept: BTreeSet<Var> = d.vars().collect();
        for bits in 0..1u64 << n {
            let t = full(n, bits);
            let agrees = t.iter().all(|(v, b)| {
                if ys.contains(&v) { !kept.contains(&v) || y.get(v) == Some(b) } else { x.get(v) == Some(b) }
            });
            if agrees {
                prop_assert!(f.is_satisfied_by(&t));
            }
        }
    }
}

#[test]
fn clause_width_mix_matches_the_requested_fraction() {
    for (fraction, seed) in [(0.2, 11u64), (0.5, 12), (0.9, 13)] {
        let n = 10_000usize;
        let p = generate(&GenParams {
            num_vars: 60,
            num_clauses: n,
            two_lit_fraction: fraction,
            seed,
            ..GenParams::default()
        })
        .unwrap();
        let binary = p
            .formula()
            .clauses()
            .iter()
            .filter(|c| c.len() == 2)
            .count() as f64;
        let sigma = (n as f64 * fraction * (1.0 - fraction)).sqrt();
        let expected = n as f64 * fraction;
        assert!(
            (binary - expected).abs() <= 3.0 * sigma,
            "fraction {fraction}: {binary} binary clauses, expected {expected} ± {}",
            3.0 * sigma
        );
        assert!(p
            .formula()
            .clauses()
            .iter()
            .all(|c| c.len() == 2 || c.len() == 3));
    }
}
