//! Verification oracles: representativeness checking through the solver,
//! prune/rem accounting, the greedy size bound, monotonicity/submodularity
//! checks, and exhaustive minimal-subset search.

use serde::{Deserialize, Serialize};

use crate::core::{count, positives, Constraint, Dataset, Example, ProgramSpace};
use crate::error::{Error, Result};
use crate::solver::synthesize;

/// Three-valued verdict; `Unknown` surfaces solver budget exhaustion
/// instead of guessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct ReprOutcome<P, I, O> {
    pub verdict: Tri,
    /// For a `False` verdict: the violated example together with a program
    /// that satisfies the subset yet contradicts it.
    pub counterexample: Option<(Example<I, O>, P)>,
    pub probes: usize,
}

/// Is every program consistent with `subset` also consistent with `data`?
/// Checked by asking the solver for a program satisfying the subset plus
/// the negation of each left-out example.
pub fn is_representative<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    subset: &Dataset<S::Input, S::Output>,
    budget: u64,
) -> Result<ReprOutcome<S::Params, S::Input, S::Output>> {
    let base = positives(subset);
    let mut probes = 0usize;
    let mut hit_budget = false;
    for d in data.difference(subset) {
        let mut cs = base.clone();
        cs.push(Constraint::negated(d.clone()));
        probes += 1;
        match synthesize(space, &cs, budget) {
            Ok(outcome) => {
                if let Some(witness) = outcome.program {
                    return Ok(ReprOutcome {
                        verdict: Tri::False,
                        counterexample: Some((d, witness)),
                        probes,
                    });
                }
            }
            Err(Error::BudgetExhausted { .. }) => hit_budget = true,
            Err(e) => return Err(e),
        }
    }
    Ok(ReprOutcome {
        verdict: if hit_budget { Tri::Unknown } else { Tri::True },
        counterexample: None,
        probes,
    })
}

/// Number of programs invalidated by the dataset: |S| - c(data).
pub fn prune<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    cap: u64,
) -> Result<u64> {
    let c = count(space, &positives(data), cap)?;
    Ok(space.space_size() as u64 - c)
}

/// Programs still to be pruned by `subset` relative to `data`.
pub fn rem<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    subset: &Dataset<S::Input, S::Output>,
    cap: u64,
) -> Result<u64> {
    Ok(prune(space, data, cap)? - prune(space, subset, cap)?)
}

/// Upper bound on the greedy subset size:
/// log(prune) / (log(k_opt) - log(k_opt - 1)).
pub fn greedy_bound(prune_d: f64, k_opt: u64) -> Result<f64> {
    if k_opt < 2 {
        return Err(Error::DomainError(format!("k_opt {k_opt} must be at least 2")));
    }
    if prune_d < 1.0 {
        return Err(Error::DomainError(format!("prune {prune_d} must be at least 1")));
    }
    Ok(prune_d.ln() / ((k_opt as f64).ln() - ((k_opt - 1) as f64).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    Claim1,
    Claim2Bound,
    Lemma21Mono,
    Lemma21Submod,
    Claim3,
}

/// Aggregated result of checking one claim over many instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: ClaimId,
    pub trials: u64,
    pub failures: u64,
    pub witnesses: Vec<String>,
}

impl ClaimReport {
    fn new(claim: ClaimId) -> Self {
        ClaimReport { claim, trials: 0, failures: 0, witnesses: Vec::new() }
    }

    fn fail(&mut self, witness: String) {
        self.failures += 1;
        self.witnesses.push(witness);
    }

    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    /// Merges a second report's tallies into this one.
    pub fn absorb(&mut self, other: ClaimReport) {
        self.trials += other.trials;
        self.failures += other.failures;
        self.witnesses.extend(other.witnesses);
    }
}

/// Checks that prune is monotone and submodular over subsets of `data`:
/// exhaustively over all chains A within B when `trials` is None, otherwise
/// over `trials` sampled (A, B, e) triples. Marginals are computed from the
/// count oracle, so the space size cancels out.
pub fn check_submodular_monotone<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    trials: Option<u64>,
    seed: u64,
    cap: u64,
) -> Result<(ClaimReport, ClaimReport)> {
    let mut mono = ClaimReport::new(ClaimId::Lemma21Mono);
    let mut submod = ClaimReport::new(ClaimId::Lemma21Submod);
    let len = data.len();

    let mut run_one = |membership: &[u8]| -> Result<()> {
        // membership per element: 0 = neither, 1 = B only, 2 = A and B.
        let mut a: Vec<Constraint<S::Input, S::Output>> = Vec::new();
        let mut b: Vec<Constraint<S::Input, S::Output>> = Vec::new();
        for (i, &m) in membership.iter().enumerate() {
            let c = Constraint::positive(data.examples()[i].clone());
            if m >= 1 {
                b.push(c.clone());
            }
            if m == 2 {
                a.push(c);
            }
        }
        let c_a = count(space, &a, cap)?;
        let c_b = count(space, &b, cap)?;
        mono.trials += 1;
        if c_a < c_b {
            mono.fail(format!("prune not monotone at membership {membership:?}"));
        }
        for e in data.iter() {
            let ec = Constraint::positive(e.clone());
            let mut ae = a.clone();
            ae.push(ec.clone());
            let mut be = b.clone();
            be.push(ec);
            let marg_a = c_a - count(space, &ae, cap)?;
            let marg_b = c_b - count(space, &be, cap)?;
            submod.trials += 1;
            if marg_a < marg_b {
                submod.fail(format!(
                    "submodularity violated at membership {membership:?}, example {:?}",
                    e.input
                ));
            }
        }
        Ok(())
    };

    match trials {
        None => {
            if len > 12 {
                return Err(Error::TooLarge { len });
            }
            let total = 3usize.pow(len as u32);
            for code in 0..total {
                let mut membership = vec![0u8; len];
                let mut rest = code;
                for m in membership.iter_mut() {
                    *m = (rest % 3) as u8;
                    rest /= 3;
                }
                run_one(&membership)?;
            }
        }
        Some(t) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..t {
                let membership: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3)).collect();
                run_one(&membership)?;
            }
        }
    }
    Ok((mono, submod))
}

/// Smallest representative subset by exhaustive search in increasing size,
/// ties broken by lexicographic index order. A subset is representative
/// exactly when it leaves the same number of consistent programs as the
/// full dataset.
pub fn minimal_subset<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    cap: u64,
) -> Result<Dataset<S::Input, S::Output>> {
    let len = data.len();
    if len > 20 {
        return Err(Error::TooLarge { len });
    }
    let target = count(space, &positives(data), cap)?;
    for k in 0..=len {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let cs: Vec<Constraint<S::Input, S::Output>> = combo
                .iter()
                .map(|&i| Constraint::positive(data.examples()[i].clone()))
                .collect();
            if count(space, &cs, cap)? == target {
                let mut out = Dataset::new();
                for &i in &combo {
                    out.push(data.examples()[i].clone())?;
                }
                return Ok(out);
            }
            if !next_combination(&mut combo, len) {
                break;
            }
        }
    }
    unreachable!("the full dataset always matches its own count")
}

/// Advances to the next k-combination of 0..len in lexicographic order;
/// false once exhausted.
fn next_combination(combo: &mut [usize], len: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < len - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Randomized claim checkers behind the `verify-claims` interface. Each
/// runner generates its own tasks from a seed and tallies failures into a
/// `ClaimReport`; a correct implementation produces zero.
pub mod claims {
    use super::*;
    use crate::domains::{DfaSpace, OrderingSpace};
    use crate::harness::{gen_dfa_dataset, gen_ordering_dataset};
    use crate::predictor::exact_predict;
    use crate::selection::greedy_count_select;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug, Clone, Copy)]
    pub struct ClaimOpts {
        pub seed: u64,
        pub cap: u64,
        pub budget: u64,
    }

    impl Default for ClaimOpts {
        fn default() -> Self {
            ClaimOpts {
                seed: 0,
                cap: crate::core::DEFAULT_SPACE_CAP,
                budget: crate::solver::DEFAULT_SOLVER_BUDGET,
            }
        }
    }

    /// Greedy count-oracle subsets are representative, on random ordering
    /// tasks.
    pub fn claim1_ordering(
        tasks: u64,
        n: usize,
        size_range: (usize, usize),
        opts: &ClaimOpts,
    ) -> Result<ClaimReport> {
        let mut report = ClaimReport::new(ClaimId::Claim1);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let space = OrderingSpace::new(n)?;
        for t in 0..tasks {
            let size = rng.gen_range(size_range.0..=size_range.1);
            let gen = gen_ordering_dataset(&space, size, rng.gen())?;
            let picked = greedy_count_select(&space, &gen.data, opts.cap)?;
            let verdict =
                is_representative(&space, &gen.data, &picked.subset, opts.budget)?.verdict;
            report.trials += 1;
            if verdict != Tri::True {
                report.fail(format!("task {t}: verdict {verdict:?} on {:?}", gen.data));
            }
        }
        Ok(report)
    }

    /// Same check over random DFA tasks.
    pub fn claim1_dfa(
        tasks: u64,
        num_states: u8,
        data_size: usize,
        len_range: (usize, usize),
        opts: &ClaimOpts,
    ) -> Result<ClaimReport> {
        let mut report = ClaimReport::new(ClaimId::Claim1);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let space = DfaSpace::new(num_states)?;
        for t in 0..tasks {
            let gen = gen_dfa_dataset(&space, data_size, len_range, rng.gen())?;
            let picked = greedy_count_select(&space, &gen.data, opts.cap)?;
            let verdict =
                is_representative(&space, &gen.data, &picked.subset, opts.budget)?.verdict;
            report.trials += 1;
            if verdict != Tri::True {
                report.fail(format!("task {t}: verdict {verdict:?}"));
            }
        }
        Ok(report)
    }

    /// The greedy subset stays under the submodularity size bound computed
    /// from prune(D) and the optimal subset size.
    pub fn claim2_ordering(
        tasks: u64,
        n_range: (usize, usize),
        size_range: (usize, usize),
        opts: &ClaimOpts,
    ) -> Result<ClaimReport> {
        let mut report = ClaimReport::new(ClaimId::Claim2Bound);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for t in 0..tasks {
            // The bound needs prune >= 1 and an optimal size >= 2; resample
            // until the generated task qualifies.
            let (space, data, pruned, k_opt) = loop {
                let n = rng.gen_range(n_range.0..=n_range.1);
                let space = OrderingSpace::new(n)?;
                let max_size = (n * (n - 1)).min(size_range.1);
                let size = rng.gen_range(size_range.0.min(max_size)..=max_size);
                let gen = gen_ordering_dataset(&space, size, rng.gen())?;
                let pruned = prune(&space, &gen.data, opts.cap)?;
                if pruned < 1 {
                    continue;
                }
                let k_opt = minimal_subset(&space, &gen.data, opts.cap)?.len() as u64;
                if k_opt < 2 {
                    continue;
                }
                break (space, gen.data, pruned, k_opt);
            };
            let picked = greedy_count_select(&space, &data, opts.cap)?;
            let bound = greedy_bound(pruned as f64, k_opt)?;
            report.trials += 1;
            // Termination forces rem < 1 only once floor(bound)+1 examples
            // are in, so the sound size bound is strict against bound + 1.
            if (picked.subset.len() as f64) >= bound + 1.0 {
                report.fail(format!(
                    "task {t}: greedy size {} exceeds bound {bound:.3}+1 (prune {pruned}, k_opt {k_opt})",
                    picked.subset.len()
                ));
            }
        }
        Ok(report)
    }

    /// At a random reachable selection state, the example minimizing the
    /// exact anticipation probability is the example minimizing the count,
    /// under identical index tie-breaking.
    pub fn claim3_ordering(
        states: u64,
        n_range: (usize, usize),
        opts: &ClaimOpts,
    ) -> Result<ClaimReport> {
        let mut report = ClaimReport::new(ClaimId::Claim3);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for t in 0..states {
            let n = rng.gen_range(n_range.0..=n_range.1);
            let space = OrderingSpace::new(n)?;
            let size = rng.gen_range(3..=n * (n - 1));
            let gen = gen_ordering_dataset(&space, size, rng.gen())?;
            let data = gen.data;
            // A random already-selected prefix; the remaining examples are
            // the candidates.
            let subset_len = rng.gen_range(0..data.len());
            let mut idx: Vec<usize> = (0..data.len()).collect();
            use rand::seq::SliceRandom;
            idx.shuffle(&mut rng);
            let chosen: std::collections::HashSet<usize> =
                idx[..subset_len].iter().copied().collect();
            let mut subset = Dataset::new();
            for &i in idx[..subset_len].iter() {
                subset.push(data.examples()[i].clone())?;
            }
            let base = positives(&subset);

            let mut by_count: Option<(u64, usize)> = None;
            let mut by_prob: Option<(f64, usize)> = None;
            for i in 0..data.len() {
                if chosen.contains(&i) {
                    continue;
                }
                let e = &data.examples()[i];
                let mut cs = base.clone();
                cs.push(Constraint::positive(e.clone()));
                let c = count(&space, &cs, opts.cap)?;
                if by_count.map_or(true, |(bc, _)| c < bc) {
                    by_count = Some((c, i));
                }
                let p = exact_predict(&space, &subset, &e.input, &e.output, opts.cap)?;
                if by_prob.map_or(true, |(bp, _)| p < bp) {
                    by_prob = Some((p, i));
                }
            }
            report.trials += 1;
            let (_, ci) = by_count.expect("at least one candidate");
            let (_, pi) = by_prob.expect("at least one candidate");
            if ci != pi {
                report.fail(format!("state {t}: count argmin {ci} != probability argmin {pi}"));
            }
        }
        Ok(report)
    }

    /// Monotonicity and submodularity of prune, exhaustively on a generated
    /// ordering dataset.
    pub fn lemma21_ordering(
        n: usize,
        data_size: usize,
        opts: &ClaimOpts,
    ) -> Result<(ClaimReport, ClaimReport)> {
        let space = OrderingSpace::new(n)?;
        let gen = gen_ordering_dataset(&space, data_size, opts.seed)?;
        check_submodular_monotone(&space, &gen.data, None, opts.seed, opts.cap)
    }
}
