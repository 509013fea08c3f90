//! Backtracking constraint synthesizer and the dataset checker that feeds
//! counterexamples back to it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::{consistent, Constraint, Dataset, Example, ProgramSpace, SearchOutcome};
use crate::error::Result;

pub const DEFAULT_SOLVER_BUDGET: u64 = 1_000_000_000;

/// Finds one program consistent with the constraint set, or proves there is
/// none. `program: None` means unsatisfiable over the whole space; running
/// out of budget is a distinct `BudgetExhausted` error, never folded into
/// unsat.
pub fn synthesize<S: ProgramSpace + ?Sized>(
    space: &S,
    constraints: &[Constraint<S::Input, S::Output>],
    budget: u64,
) -> Result<SearchOutcome<S::Params>> {
    space.synthesize_constrained(constraints, budget)
}

/// How the checker picks among violated examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeStrategy {
    /// The minimal violated example under the domain's canonical order:
    /// row-major for pixels, dataset insertion order otherwise.
    Canonical,
    /// Uniformly random among the violated examples, advancing a seeded
    /// generator on every call.
    Random,
    /// The violated example earliest in one fixed seeded permutation of the
    /// dataset.
    FixedArbitrary,
}

/// Counterexample picker with the per-run state the strategy needs.
pub struct CeSelector {
    strategy: CeStrategy,
    rng: ChaCha8Rng,
    perm: Vec<usize>,
}

impl CeSelector {
    pub fn new(strategy: CeStrategy, seed: u64, data_len: usize) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..data_len).collect();
        if strategy == CeStrategy::FixedArbitrary {
            perm.shuffle(&mut rng);
        }
        CeSelector { strategy, rng, perm }
    }

    /// One violated example per the strategy, or None when `s` fits all of
    /// `data`.
    pub fn pick<S: ProgramSpace + ?Sized>(
        &mut self,
        space: &S,
        s: &S::Params,
        data: &Dataset<S::Input, S::Output>,
    ) -> Option<Example<S::Input, S::Output>> {
        let violated: Vec<usize> = (0..data.len())
            .filter(|&i| {
                let e = &data.examples()[i];
                space.evaluate(s, &e.input) != e.output
            })
            .collect();
        if violated.is_empty() {
            return None;
        }
        let idx = match self.strategy {
            CeStrategy::Canonical => violated
                .iter()
                .copied()
                .min_by_key(|&i| {
                    let e = &data.examples()[i];
                    (space.canonical_rank(&e.input).unwrap_or(0), i)
                })
                .unwrap(),
            CeStrategy::Random => violated[self.rng.gen_range(0..violated.len())],
            CeStrategy::FixedArbitrary => violated
                .iter()
                .copied()
                .min_by_key(|&i| self.perm[i])
                .unwrap(),
        };
        Some(data.examples()[idx].clone())
    }
}

/// Stateless canonical check: None iff `s` is consistent with every example.
pub fn check<S: ProgramSpace + ?Sized>(
    space: &S,
    s: &S::Params,
    data: &Dataset<S::Input, S::Output>,
) -> Option<Example<S::Input, S::Output>> {
    CeSelector::new(CeStrategy::Canonical, 0, data.len()).pick(space, s, data)
}

/// True iff the program fits the whole dataset.
pub fn fits<S: ProgramSpace + ?Sized>(
    space: &S,
    s: &S::Params,
    data: &Dataset<S::Input, S::Output>,
) -> bool {
    let constraints: Vec<Constraint<S::Input, S::Output>> = crate::core::positives(data);
    consistent(space, s, &constraints)
}
