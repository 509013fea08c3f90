//! Example-subset selection strategies: the count-oracle greedy loop, its
//! predictor-driven counterpart, and the random / Hasse / heuristic
//! baselines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{count, Constraint, Dataset, Example, ProgramSpace};
use crate::domains::{Grid, OrderingSpace};
use crate::error::{Error, Result};
use crate::predictor::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// No candidate example prunes any program (count greedy), or the
    /// dataset was empty.
    Fixpoint,
    /// Every remaining example is anticipated with probability >= tau.
    Threshold,
    /// Ran out of examples or steps.
    Exhausted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionStep<I, O> {
    pub example: Example<I, O>,
    /// The score that made this example the argmin: a solution count for
    /// the count greedy, a probability for predictor-driven selection.
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult<I, O> {
    pub subset: Dataset<I, O>,
    pub trace: Vec<SelectionStep<I, O>>,
    pub terminated_by: Termination,
}

/// Greedy selection with the count oracle: repeatedly add the example whose
/// addition leaves the fewest consistent programs, stopping when the best
/// candidate no longer prunes anything.
pub fn greedy_count_select<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    cap: u64,
) -> Result<SelectionResult<S::Input, S::Output>> {
    let mut result = SelectionResult {
        subset: Dataset::new(),
        trace: Vec::new(),
        terminated_by: Termination::Fixpoint,
    };
    if data.is_empty() {
        return Ok(result);
    }
    let mut chosen = vec![false; data.len()];
    let mut constraints: Vec<Constraint<S::Input, S::Output>> = Vec::new();
    loop {
        let current = count(space, &constraints, cap)?;
        let remaining: Vec<usize> = (0..data.len()).filter(|&i| !chosen[i]).collect();
        if remaining.is_empty() {
            result.terminated_by = Termination::Exhausted;
            return Ok(result);
        }
        // Scored in parallel; the (count, index) reduction keeps the winner
        // independent of scheduling.
        let scores: Result<Vec<(u64, usize)>> = remaining
            .par_iter()
            .map(|&i| {
                let e = &data.examples()[i];
                let mut cs = constraints.clone();
                cs.push(Constraint::positive(e.clone()));
                Ok((count(space, &cs, cap)?, i))
            })
            .collect();
        let (best_count, best_idx) = scores?.into_iter().min().expect("nonempty remaining");
        if best_count == current {
            result.terminated_by = Termination::Fixpoint;
            return Ok(result);
        }
        let example = data.examples()[best_idx].clone();
        chosen[best_idx] = true;
        constraints.push(Constraint::positive(example.clone()));
        result.subset.push(example.clone())?;
        result.trace.push(SelectionStep { example, score: best_count as f64 });
    }
}

/// Predictor-driven greedy selection: add the example whose true output is
/// least anticipated, until every remaining example clears the confidence
/// threshold `tau` (or `max_steps` additions).
pub fn anticipation_select<S: ProgramSpace, P: Predictor<S>>(
    predictor: &P,
    data: &Dataset<S::Input, S::Output>,
    tau: f64,
    max_steps: usize,
) -> Result<SelectionResult<S::Input, S::Output>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::DomainError(format!("tau {tau} outside [0, 1]")));
    }
    let mut result = SelectionResult {
        subset: Dataset::new(),
        trace: Vec::new(),
        terminated_by: Termination::Exhausted,
    };
    let mut chosen = vec![false; data.len()];
    loop {
        if result.trace.len() >= max_steps {
            result.terminated_by = Termination::Exhausted;
            return Ok(result);
        }
        let remaining: Vec<usize> = (0..data.len()).filter(|&i| !chosen[i]).collect();
        if remaining.is_empty() {
            result.terminated_by = Termination::Exhausted;
            return Ok(result);
        }
        let mut best: Option<(f64, usize)> = None;
        for &i in &remaining {
            let e = &data.examples()[i];
            let p = predictor.predict(&result.subset, &e.input, &e.output)?;
            if best.map_or(true, |(bp, _)| p < bp) {
                best = Some((p, i));
            }
        }
        let (min_p, best_idx) = best.expect("nonempty remaining");
        if min_p >= tau {
            result.terminated_by = Termination::Threshold;
            return Ok(result);
        }
        let example = data.examples()[best_idx].clone();
        chosen[best_idx] = true;
        result.subset.push(example.clone())?;
        result.trace.push(SelectionStep { example, score: min_p });
    }
}

/// Uniform sample of round(fraction * |data|) examples without replacement.
pub fn random_select<I: Serialize + Clone, O: Clone>(
    data: &Dataset<I, O>,
    fraction: f64,
    seed: u64,
) -> Result<SelectionResult<I, O>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::DomainError(format!("fraction {fraction} outside [0, 1]")));
    }
    let k = (fraction * data.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    indices.shuffle(&mut rng);
    indices.truncate(k);
    let mut result = SelectionResult {
        subset: Dataset::new(),
        trace: Vec::new(),
        terminated_by: Termination::Exhausted,
    };
    for i in indices {
        let example = data.examples()[i].clone();
        result.subset.push(example.clone())?;
        result.trace.push(SelectionStep { example, score: 0.0 });
    }
    Ok(result)
}

/// Transitive reduction of an ordering dataset: keeps one example per
/// relation that is not implied by the others through transitivity. This is
/// the optimal representative subset for consistent ordering data.
pub fn hasse_select(data: &Dataset<(u8, u8), bool>) -> Result<Dataset<(u8, u8), bool>> {
    let n = data
        .iter()
        .map(|e| e.input.0.max(e.input.1) as usize + 1)
        .max()
        .unwrap_or(0);
    if data.is_empty() {
        return Ok(Dataset::new());
    }
    // One edge per asserted precedence; mirrored examples collapse onto the
    // first occurrence.
    let mut first_example: std::collections::HashMap<(u8, u8), usize> =
        std::collections::HashMap::new();
    let mut adj = vec![vec![false; n]; n];
    for (idx, e) in data.iter().enumerate() {
        let c = Constraint::positive(e.clone());
        let (before, after) = OrderingSpace::fact(&c);
        adj[before as usize][after as usize] = true;
        first_example.entry((before, after)).or_insert(idx);
    }
    // Reachability closure; any self-reach is a contradiction.
    let mut closure = adj.clone();
    for k in 0..n {
        for i in 0..n {
            if closure[i][k] {
                for j in 0..n {
                    if closure[k][j] {
                        closure[i][j] = true;
                    }
                }
            }
        }
    }
    if (0..n).any(|v| closure[v][v]) {
        return Err(Error::CyclicData);
    }
    // An edge is redundant when a longer path connects its endpoints.
    let mut kept: Vec<usize> = Vec::new();
    for (&(a, b), &idx) in &first_example {
        let (a, b) = (a as usize, b as usize);
        let redundant =
            (0..n).any(|c| c != b && adj[a][c] && closure[c][b]);
        if !redundant {
            kept.push(idx);
        }
    }
    kept.sort_unstable();
    let mut out = Dataset::new();
    for idx in kept {
        out.push(data.examples()[idx].clone())?;
    }
    Ok(out)
}

struct TrieNode {
    children: [Option<Box<TrieNode>>; 2],
    accepts: usize,
    rejects: usize,
    /// Dataset indices of strings terminating at this node.
    terminals: Vec<usize>,
}

impl TrieNode {
    fn new() -> Self {
        TrieNode { children: [None, None], accepts: 0, rejects: 0, terminals: Vec::new() }
    }

    fn subtree_indices(&self, out: &mut Vec<usize>) {
        out.extend_from_slice(&self.terminals);
        for child in self.children.iter().flatten() {
            child.subtree_indices(out);
        }
    }
}

/// Suffix heuristic for DFA data: strings are reversed into a trie whose
/// nodes track label counts; a label-pure subtree contributes one random
/// example, while examples ending on impure paths are kept individually.
pub fn h1_dfa_select(data: &Dataset<String, bool>, seed: u64) -> Dataset<String, bool> {
    let mut root = TrieNode::new();
    for (idx, e) in data.iter().enumerate() {
        let mut node = &mut root;
        if e.output {
            node.accepts += 1;
        } else {
            node.rejects += 1;
        }
        for b in e.input.bytes().rev() {
            let slot = (b - b'0') as usize;
            node = node.children[slot].get_or_insert_with(|| Box::new(TrieNode::new()));
            if e.output {
                node.accepts += 1;
            } else {
                node.rejects += 1;
            }
        }
        node.terminals.push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::new();
    let mut stack: Vec<&TrieNode> = vec![&root];
    while let Some(node) = stack.pop() {
        if node.accepts + node.rejects == 0 {
            continue;
        }
        if node.accepts == 0 || node.rejects == 0 {
            let mut pool = Vec::new();
            node.subtree_indices(&mut pool);
            picked.push(pool[rng.gen_range(0..pool.len())]);
            continue;
        }
        picked.extend_from_slice(&node.terminals);
        // Pushed right-to-left so child 0 is walked first.
        for slot in [1usize, 0] {
            if let Some(child) = &node.children[slot] {
                stack.push(child);
            }
        }
    }

    let mut out = Dataset::new();
    for idx in picked {
        out.push(data.examples()[idx].clone()).expect("dataset indices are unique");
    }
    out
}

/// Boundary heuristic for drawings: keep a pixel when some in-bounds pixel
/// within Chebyshev distance 2 has a different value.
pub fn h1_draw_select(target: &Grid) -> Dataset<(u8, u8), bool> {
    let mut out = Dataset::new();
    for r in 0..target.height() {
        for c in 0..target.width() {
            let v = target.get(r, c);
            let mut boundary = false;
            'scan: for dr in -2i32..=2 {
                for dc in -2i32..=2 {
                    let rr = r as i32 + dr;
                    let cc = c as i32 + dc;
                    if rr < 0 || cc < 0 || rr >= target.height() as i32 || cc >= target.width() as i32
                    {
                        continue;
                    }
                    if target.get(rr as u8, cc as u8) != v {
                        boundary = true;
                        break 'scan;
                    }
                }
            }
            if boundary {
                out.push(Example::new((r, c), v)).expect("pixels are unique");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::DEFAULT_SPACE_CAP;
    use crate::predictor::ExactPosterior;

    fn ex(i: u8, j: u8, out: bool) -> Example<(u8, u8), bool> {
        Example::new((i, j), out)
    }

    fn paper_dataset() -> Dataset<(u8, u8), bool> {
        Dataset::from_examples(vec![
            ex(0, 1, true),
            ex(0, 2, true),
            ex(1, 3, true),
            ex(2, 3, true),
            ex(3, 0, false),
            ex(2, 0, false),
        ])
        .unwrap()
    }

    #[test]
    fn greedy_empty_data_is_fixpoint() {
        let space = OrderingSpace::new(3).unwrap();
        let data: Dataset<(u8, u8), bool> = Dataset::new();
        let r = greedy_count_select(&space, &data, DEFAULT_SPACE_CAP).unwrap();
        assert!(r.subset.is_empty());
        assert_eq!(r.terminated_by, Termination::Fixpoint);
    }

    #[test]
    fn greedy_single_informative_example() {
        let space = OrderingSpace::new(3).unwrap();
        let data = Dataset::from_examples(vec![ex(0, 1, true)]).unwrap();
        let r = greedy_count_select(&space, &data, DEFAULT_SPACE_CAP).unwrap();
        assert_eq!(r.subset.len(), 1);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].score, 3.0);
    }

    #[test]
    fn greedy_stops_at_fixpoint_before_redundant_example() {
        let space = OrderingSpace::new(3).unwrap();
        // Once the chain is selected, (0,2) prunes nothing and the loop
        // stops without adding it.
        let data = Dataset::from_examples(vec![ex(0, 1, true), ex(1, 2, true), ex(0, 2, true)])
            .unwrap();
        let r = greedy_count_select(&space, &data, DEFAULT_SPACE_CAP).unwrap();
        assert_eq!(r.terminated_by, Termination::Fixpoint);
        assert_eq!(r.subset.len(), 2);
        let picked: Vec<_> = r.trace.iter().map(|s| s.example.input).collect();
        assert_eq!(picked, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn anticipation_with_exact_predictor_matches_greedy_sequence() {
        let space = OrderingSpace::new(4).unwrap();
        let data = paper_dataset();
        let greedy = greedy_count_select(&space, &data, DEFAULT_SPACE_CAP).unwrap();
        let exact = ExactPosterior::new(&space, DEFAULT_SPACE_CAP);
        let nn = anticipation_select(&exact, &data, 1.0, data.len()).unwrap();
        let g: Vec<_> = greedy.trace.iter().map(|s| s.example.input).collect();
        let a: Vec<_> = nn.trace.iter().map(|s| s.example.input).collect();
        assert_eq!(g, a);
        assert_eq!(nn.terminated_by, Termination::Threshold);
    }

    #[test]
    fn anticipation_tau_zero_selects_nothing() {
        let space = OrderingSpace::new(4).unwrap();
        let data = paper_dataset();
        let exact = ExactPosterior::new(&space, DEFAULT_SPACE_CAP);
        let r = anticipation_select(&exact, &data, 0.0, data.len()).unwrap();
        assert!(r.subset.is_empty());
        assert_eq!(r.terminated_by, Termination::Threshold);
    }

    #[test]
    fn anticipation_empty_data() {
        let space = OrderingSpace::new(4).unwrap();
        let data: Dataset<(u8, u8), bool> = Dataset::new();
        let exact = ExactPosterior::new(&space, DEFAULT_SPACE_CAP);
        let r = anticipation_select(&exact, &data, 0.95, 10).unwrap();
        assert!(r.subset.is_empty());
    }

    #[test]
    fn random_select_contract() {
        let data = paper_dataset();
        let all = random_select(&data, 1.0, 1).unwrap();
        assert_eq!(all.subset.len(), data.len());
        let none = random_select(&data, 0.0, 1).unwrap();
        assert!(none.subset.is_empty());
        let a = random_select(&data, 0.5, 33).unwrap();
        let b = random_select(&data, 0.5, 33).unwrap();
        assert_eq!(a.subset, b.subset);
        assert_eq!(a.subset.len(), 3);
        for e in &a.subset {
            assert!(data.contains_input(&e.input));
        }
    }

    #[test]
    fn hasse_on_paper_dataset() {
        let data = paper_dataset();
        let out = hasse_select(&data).unwrap();
        let expect = vec![ex(0, 1, true), ex(0, 2, true), ex(1, 3, true), ex(2, 3, true)];
        assert_eq!(out.examples(), &expect[..]);
    }

    #[test]
    fn hasse_trivial_cases() {
        let single = Dataset::from_examples(vec![ex(0, 1, true)]).unwrap();
        assert_eq!(hasse_select(&single).unwrap().examples(), single.examples());

        let chain =
            Dataset::from_examples(vec![ex(0, 1, true), ex(1, 2, true), ex(0, 2, true)]).unwrap();
        let out = hasse_select(&chain).unwrap();
        assert_eq!(out.examples(), &[ex(0, 1, true), ex(1, 2, true)]);
    }

    #[test]
    fn hasse_rejects_cycles() {
        let bad =
            Dataset::from_examples(vec![ex(0, 1, true), ex(1, 2, true), ex(2, 0, true)]).unwrap();
        assert!(matches!(hasse_select(&bad), Err(Error::CyclicData)));
    }

    #[test]
    fn h1_dfa_spec_example() {
        // Reversed strings "0", "01", "11": subtree under '0' is pure accept,
        // under '1' pure reject, so one of {"0","10"} plus "11".
        let data = Dataset::from_examples(vec![
            Example::new("0".to_string(), true),
            Example::new("10".to_string(), true),
            Example::new("11".to_string(), false),
        ])
        .unwrap();
        let out = h1_dfa_select(&data, 0);
        assert_eq!(out.len(), 2);
        let inputs: Vec<&str> = out.iter().map(|e| e.input.as_str()).collect();
        assert!(inputs.contains(&"11"));
        assert!(inputs.iter().any(|s| *s == "0" || *s == "10"));
    }

    #[test]
    fn h1_dfa_pure_root_and_empty() {
        let same = Dataset::from_examples(vec![
            Example::new("0".to_string(), true),
            Example::new("111".to_string(), true),
            Example::new("10".to_string(), true),
        ])
        .unwrap();
        assert_eq!(h1_dfa_select(&same, 7).len(), 1);
        let empty: Dataset<String, bool> = Dataset::new();
        assert!(h1_dfa_select(&empty, 7).is_empty());
    }

    #[test]
    fn h1_draw_uniform_grid_selects_nothing() {
        let grid = Grid::new(16, 16);
        assert!(h1_draw_select(&grid).is_empty());
    }

    #[test]
    fn h1_draw_single_white_pixel() {
        let mut grid = Grid::new(16, 16);
        grid.set(5, 5, true);
        let out = h1_draw_select(&grid);
        // Exactly the 25 pixels within Chebyshev distance 2 of (5,5).
        assert_eq!(out.len(), 25);
        for e in &out {
            let (r, c) = e.input;
            assert!((r as i32 - 5).abs() <= 2 && (c as i32 - 5).abs() <= 2);
            assert_eq!(e.output, r == 5 && c == 5);
        }
    }

    #[test]
    fn h1_draw_tiny_half_white() {
        let mut grid = Grid::new(2, 2);
        grid.set(0, 0, true);
        grid.set(0, 1, true);
        assert_eq!(h1_draw_select(&grid).len(), 4);
    }
}
