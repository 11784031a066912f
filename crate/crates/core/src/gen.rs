//! Seeded random PQE problems: a mix of two- and three-literal clauses, a
//! random `X`/`Y` split and one (or more) quantified target clauses.
//!
//! The generator is reproducible across implementations. All randomness comes
//! from [`SplitMix64`], consumed in this order:
//!
//! 1. Fisher–Yates shuffle of the ids `1..=num_vars`: for `i` from
//!    `num_vars - 1` down to 1, swap positions `i` and `below(i + 1)`. The
//!    first `|Y|` ids of the shuffled list form `Y`, the rest `X`.
//! 2. For each clause: width 2 if `unit_f64() < two_lit_fraction`, else 3;
//!    then variables `1 + below(num_vars)` drawn until the clause has `width`
//!    distinct ones; then one polarity per variable, negative if
//!    `next_u64() & 1 == 1`.
//! 3. For each target: clause index `below(num_clauses)`, redrawn while the
//!    clause has no `X` variable or is already a target.
//!
//! `below(n)` is `next_u64() % n` and `unit_f64()` is `(next_u64() >> 11)`
//! scaled by `2^-53`.

use thiserror::Error;

use crate::formula::{Clause, CnfFormula, Var};
use crate::problem::PqeProblem;

/// Resample bound for picking quantified target clauses.
const MAX_TARGET_DRAWS: usize = 100_000;

/// The SplitMix64 generator (Steele, Lea, Flood).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("num_vars must be at least 2, got {0}")]
    TooFewVars(u32),
    #[error("y_fraction must lie strictly between 0 and 1, got {0}")]
    BadYFraction(String),
    #[error("two_lit_fraction must lie in [0, 1], got {0}")]
    BadTwoLitFraction(String),
    #[error("split leaves |Y| = {y} and |X| = {x}; both must be at least 1")]
    EmptySide { y: u32, x: u32 },
    #[error("need at least {needed} clauses, got {got}")]
    TooFewClauses { needed: usize, got: usize },
    #[error("three-literal clauses need at least 3 variables")]
    WidthExceedsVars,
    #[error("no quantified target clause found after {0} draws")]
    NoQuantifiedClause(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub num_vars: u32,
    pub num_clauses: usize,
    pub y_fraction: f64,
    pub two_lit_fraction: f64,
    pub targets: usize,
    pub seed: u64,
}

impl Default for GenParams {
    /// 70 variables, 140 clauses, half of the variables unquantified.
    fn default() -> Self {
        GenParams {
            num_vars: 70,
            num_clauses: 140,
            y_fraction: 0.5,
            two_lit_fraction: 0.2,
            targets: 1,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn num_unquantified(&self) -> u32 {
        (self.y_fraction * self.num_vars as f64).round() as u32
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.num_vars < 2 {
            return Err(GenError::TooFewVars(self.num_vars));
        }
        if !(self.y_fraction > 0.0 && self.y_fraction < 1.0) {
            return Err(GenError::BadYFraction(self.y_fraction.to_string()));
        }
        if !(0.0..=1.0).contains(&self.two_lit_fraction) {
            return Err(GenError::BadTwoLitFraction(
                self.two_lit_fraction.to_string(),
            ));
        }
        let y = self.num_unquantified();
        if y == 0 || y >= self.num_vars {
            return Err(GenError::EmptySide {
                y,
                x: self.num_vars.saturating_sub(y),
            });
        }
        let needed = self.targets.max(1);
        if self.num_clauses < needed {
            return Err(GenError::TooFewClauses {
                needed,
                got: self.num_clauses,
            });
        }
        if self.num_vars < 3 && self.two_lit_fraction < 1.0 {
            return Err(GenError::WidthExceedsVars);
        }
        Ok(())
    }
}

/// One random problem; identical parameters give an identical problem.
pub fn generate(params: &GenParams) -> Result<PqeProblem, GenError> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);
    let n = params.num_vars;

    let mut ids: Vec<u32> = (1..=n).collect();
    for i in (1..ids.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        ids.swap(i, j);
    }
    let y_count = params.num_unquantified() as usize;
    let quantified: Vec<Var> = ids[y_count..]
        .iter()
        .map(|&id| Var::new(id).expect("ids start at 1"))
        .collect();

    let mut clauses = Vec::with_capacity(params.num_clauses);
    for _ in 0..params.num_clauses {
        let width = if rng.unit_f64() < params.two_lit_fraction {
            2
        } else {
            3
        };
        let mut vars: Vec<u32> = Vec::with_capacity(width);
        while vars.len() < width {
            let v = 1 + rng.below(n as u64) as u32;
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let lits = vars.into_iter().map(|v| {
            let var = Var::new(v).expect("ids start at 1");
            var.lit(rng.next_u64() & 1 == 0)
        });
        clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    let formula = CnfFormula::with_num_vars(clauses, n).expect("ids within range");

    let is_quantified = |c: &Clause| c.vars().any(|v| quantified.contains(&v));
    let mut targets = Vec::with_capacity(params.targets);
    let mut draws = 0;
    while targets.len() < params.targets.max(1) {
        if draws == MAX_TARGET_DRAWS {
            return Err(GenError::NoQuantifiedClause(draws));
        }
        draws += 1;
        let i = rng.below(params.num_clauses as u64) as usize;
        if is_quantified(formula.clause(i)) && !targets.contains(&i) {
            targets.push(i);
        }
    }
    Ok(PqeProblem::new(formula, quantified, targets).expect("generator output is well formed"))
}

/// Seed of member `index` of the `num_vars` group in a family.
pub fn family_seed(base: u64, num_vars: u32, index: usize) -> u64 {
    mix64(base ^ mix64(((num_vars as u64) << 32) | index as u64))
}

/// `per_size` problems for each size, with `2 × num_vars` clauses and the
/// remaining parameters taken from `base`. Ordered by size, then index.
pub fn generate_family(
    base: &GenParams,
    sizes: &[u32],
    per_size: usize,
) -> Result<Vec<PqeProblem>, GenError> {
    let mut out = Vec::with_capacity(sizes.len() * per_size);
    for &num_vars in sizes {
        for index in 0..per_size {
            let params = GenParams {
                num_vars,
                num_clauses: 2 * num_vars as usize,
                seed: family_seed(base.seed, num_vars, index),
                ..base.clone()
            };
            out.push(generate(&params)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 1234567 from the reference C implementation.
        let mut rng = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..5).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                6457827717110365317,
                3203168211198807973,
                9817491932198370423,
                4593380528125082431,
                16408922859458223821,
            ]
        );
    }

    #[test]
    fn default_sizes() {
        let p = generate(&GenParams {
            seed: 7,
            ..GenParams::default()
        })
        .unwrap();
        assert_eq!(p.num_vars(), 70);
        assert_eq!(p.formula().len(), 140);
        assert_eq!(p.unquantified().len(), 35);
        assert_eq!(p.quantified().len(), 35);
        assert_eq!(p.targets().len(), 1);
    }

    #[test]
    fn all_binary_when_requested() {
        let p = generate(&GenParams {
            two_lit_fraction: 1.0,
            seed: 3,
            ..GenParams::default()
        })
        .unwrap();
        assert!(p.formula().clauses().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn deterministic_per_seed() {
        let params = GenParams {
            num_vars: 12,
            num_clauses: 24,
            seed: 99,
            ..GenParams::default()
        };
        assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
        let other = GenParams {
            seed: 100,
            ..params.clone()
        };
        assert_ne!(generate(&params).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn multiple_targets_are_distinct_and_quantified() {
        let p = generate(&GenParams {
            num_vars: 10,
            num_clauses: 20,
            targets: 3,
            seed: 5,
            ..GenParams::default()
        })
        .unwrap();
        assert_eq!(p.targets().len(), 3);
    }

    #[test]
    fn invalid_params() {
        let base = GenParams::default();
        assert_eq!(
            generate(&GenParams {
                num_vars: 1,
                ..base.clone()
            }),
            Err(GenError::TooFewVars(1))
        );
        assert!(matches!(
            generate(&GenParams {
                y_fraction: 1.0,
                ..base.clone()
            }),
            Err(GenError::BadYFraction(_))
        ));
        assert!(matches!(
            generate(&GenParams {
                num_vars: 3,
                y_fraction: 0.1,
                ..base.clone()
            }),
            Err(GenError::EmptySide { y: 0, .. })
        ));
    }

    #[test]
    fn family_shape() {
        let base = GenParams::default();
        let fam = generate_family(&base, &[8, 10, 12], 5).unwrap();
        assert_eq!(fam.len(), 15);
        assert_eq!(fam[0].formula().len(), 16);
        assert_eq!(fam[14].num_vars(), 12);
        assert!(generate_family(&base, &[8], 0).unwrap().is_empty());
    }
}
