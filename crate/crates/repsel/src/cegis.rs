//! Counterexample-guided synthesis and its representative-subset-initialized
//! variant: synthesize over a working subset, check against the full
//! dataset, feed one violated example back, repeat until the check is clean.

use serde::Serialize;

use crate::core::{positives, Dataset, ProgramSpace};
use crate::error::{Error, Result};
use crate::predictor::Predictor;
use crate::selection::anticipation_select;
use crate::solver::{synthesize, CeSelector, CeStrategy};

#[derive(Debug, Clone, Serialize)]
pub struct SynthesisOutcome<P, I, O> {
    pub program: P,
    /// Synthesize calls made.
    pub iterations: u64,
    pub counterexamples_added: Dataset<I, O>,
    pub initial_subset: Dataset<I, O>,
    pub solver_nodes: u64,
}

/// Runs the synthesize/check loop starting from `initial` until the program
/// fits every example in `data`.
pub fn run_cegis<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    initial: &Dataset<S::Input, S::Output>,
    strategy: CeStrategy,
    seed: u64,
    budget: u64,
) -> Result<SynthesisOutcome<S::Params, S::Input, S::Output>> {
    if !data.contains_all_inputs(initial) {
        return Err(Error::InvalidInput(
            "initial subset contains examples outside the dataset".into(),
        ));
    }
    let mut working = initial.clone();
    let mut counterexamples: Dataset<S::Input, S::Output> = Dataset::new();
    let mut selector = CeSelector::new(strategy, seed, data.len());
    let mut solver_nodes = 0u64;
    let mut iterations = 0u64;

    // The working subset grows by one example per iteration, so the loop
    // finishes within |data| + 1 synthesize calls.
    while iterations <= data.len() as u64 + 1 {
        let outcome = synthesize(space, &positives(&working), budget)?;
        iterations += 1;
        solver_nodes += outcome.nodes;
        let program = outcome.program.ok_or(Error::Unsat)?;
        match selector.pick(space, &program, data) {
            None => {
                return Ok(SynthesisOutcome {
                    program,
                    iterations,
                    counterexamples_added: counterexamples,
                    initial_subset: initial.clone(),
                    solver_nodes,
                })
            }
            Some(ce) => {
                debug_assert!(!initial.contains_input(&ce.input));
                counterexamples.push(ce.clone())?;
                working.push(ce)?;
            }
        }
    }
    Err(Error::Internal("cegis failed to converge within |data| iterations".into()))
}

/// Selects an anticipated-representative subset with the predictor, then
/// lets the CEGIS loop repair whatever the subset missed. Correctness over
/// the full dataset comes from the loop's exit condition.
pub fn run_ours<S: ProgramSpace, P: Predictor<S>>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    predictor: &P,
    tau: f64,
    strategy: CeStrategy,
    seed: u64,
    budget: u64,
) -> Result<SynthesisOutcome<S::Params, S::Input, S::Output>> {
    let selection = anticipation_select(predictor, data, tau, data.len())?;
    run_cegis(space, data, &selection.subset, strategy, seed, budget)
}
