//! Domain-independent abstractions: a parameterized program family with an
//! enumerable parameter space, example datasets, constraints, and the exact
//! model-counting oracle.

use std::fmt::Debug;
use std::hash::Hash;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard on |S| for exact counting.
pub const DEFAULT_SPACE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainId {
    Ordering,
    Dfa,
    Drawing,
}

impl std::fmt::Display for DomainId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainId::Ordering => write!(f, "ordering"),
            DomainId::Dfa => write!(f, "dfa"),
            DomainId::Drawing => write!(f, "drawing"),
        }
    }
}

/// One input-output example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Example<I, O> {
    pub input: I,
    pub output: O,
}

impl<I, O> Example<I, O> {
    pub fn new(input: I, output: O) -> Self {
        Example { input, output }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negated,
}

/// An example plus a polarity. A negated constraint requires the program to
/// NOT map the input to the recorded output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint<I, O> {
    pub example: Example<I, O>,
    pub polarity: Polarity,
}

impl<I, O> Constraint<I, O> {
    pub fn positive(example: Example<I, O>) -> Self {
        Constraint { example, polarity: Polarity::Positive }
    }

    pub fn negated(example: Example<I, O>) -> Self {
        Constraint { example, polarity: Polarity::Negated }
    }
}

/// An ordered, duplicate-input-free collection of examples.
///
/// Input equality is decided on the canonical serialized form of the input,
/// so duplicate detection is unambiguous across domains.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Dataset<I, O> {
    examples: Vec<Example<I, O>>,
}

impl<I, O> Default for Dataset<I, O> {
    fn default() -> Self {
        Dataset { examples: Vec::new() }
    }
}

/// Canonical serialized form of an input, used as its identity.
pub fn input_key<I: Serialize>(input: &I) -> String {
    serde_json::to_string(input).expect("inputs are always serializable")
}

impl<I, O> Dataset<I, O> {
    pub fn new() -> Self {
        Dataset { examples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example<I, O>] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example<I, O>> {
        self.examples.iter()
    }

    pub fn get(&self, idx: usize) -> Option<&Example<I, O>> {
        self.examples.get(idx)
    }
}

impl<I: Serialize + Clone, O: Clone> Dataset<I, O> {
    pub fn from_examples(examples: Vec<Example<I, O>>) -> Result<Self> {
        let mut ds = Self::new();
        for ex in examples {
            ds.push(ex)?;
        }
        Ok(ds)
    }

    /// Appends an example, rejecting duplicate inputs.
    pub fn push(&mut self, example: Example<I, O>) -> Result<()> {
        let key = input_key(&example.input);
        if self.examples.iter().any(|e| input_key(&e.input) == key) {
            return Err(Error::DuplicateInput(key));
        }
        self.examples.push(example);
        Ok(())
    }

    pub fn contains_input(&self, input: &I) -> bool {
        let key = input_key(input);
        self.examples.iter().any(|e| input_key(&e.input) == key)
    }

    /// Examples of `self` whose inputs do not occur in `other`.
    pub fn difference(&self, other: &Dataset<I, O>) -> Vec<Example<I, O>> {
        let keys: std::collections::HashSet<String> =
            other.examples.iter().map(|e| input_key(&e.input)).collect();
        self.examples
            .iter()
            .filter(|e| !keys.contains(&input_key(&e.input)))
            .cloned()
            .collect()
    }

    /// True iff every example of `other` occurs in `self` (matched on input).
    pub fn contains_all_inputs(&self, other: &Dataset<I, O>) -> bool {
        other.iter().all(|e| self.contains_input(&e.input))
    }
}

impl<I: Serialize + Clone, O: Serialize + Clone> Dataset<I, O> {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for ex in &self.examples {
            serde_json::to_writer(&mut w, ex)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_jsonl<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_jsonl(std::io::BufWriter::new(file))
    }
}

impl<I, O> Dataset<I, O>
where
    I: Serialize + DeserializeOwned + Clone,
    O: Serialize + DeserializeOwned + Clone,
{
    pub fn read_jsonl<R: std::io::Read>(r: R) -> Result<Self> {
        let mut ds = Self::new();
        for line in BufReader::new(r).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ex: Example<I, O> = serde_json::from_str(&line)?;
            ds.push(ex)?;
        }
        Ok(ds)
    }

    pub fn load_jsonl<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl(file)
    }
}

impl<'a, I, O> IntoIterator for &'a Dataset<I, O> {
    type Item = &'a Example<I, O>;
    type IntoIter = std::slice::Iter<'a, Example<I, O>>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// Result of a bounded program search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<P> {
    /// `Some(s)` when a consistent program was found, `None` for a proven
    /// unsatisfiable constraint set.
    pub program: Option<P>,
    /// Search nodes visited.
    pub nodes: u64,
}

/// An enumerable parameterized program family F(.; s).
///
/// `params_from_ordinal` fixes the enumeration order: ordinal 0..space_size
/// maps bijectively onto S, lexicographic over the parameter vector.
pub trait ProgramSpace: Send + Sync {
    type Params: Clone + PartialEq + Debug + Serialize + Send + Sync;
    type Input: Clone + PartialEq + Eq + Hash + Debug + Serialize + DeserializeOwned + Send + Sync;
    type Output: Clone + PartialEq + Debug + Serialize + DeserializeOwned + Send + Sync;

    fn domain_id(&self) -> DomainId;

    /// |S|.
    fn space_size(&self) -> u128;

    /// Decodes an enumeration ordinal into a parameter vector. Must be a
    /// bijection from 0..space_size() onto S.
    fn params_from_ordinal(&self, ordinal: u128) -> Self::Params;

    fn validate_params(&self, s: &Self::Params) -> Result<()>;

    fn validate_input(&self, x: &Self::Input) -> Result<()>;

    /// Total on valid (s, x); callers validate first when inputs are untrusted.
    fn evaluate(&self, s: &Self::Params, x: &Self::Input) -> Self::Output;

    /// The output domain Y.
    fn outputs(&self) -> Vec<Self::Output>;

    fn enumerate(&self) -> Box<dyn Iterator<Item = Self::Params> + '_> {
        Box::new((0..self.space_size()).map(move |o| self.params_from_ordinal(o)))
    }

    /// Exact number of programs satisfying every constraint. Domains override
    /// this with pruned search; the default scans the full enumeration.
    fn count_constrained(&self, constraints: &[Constraint<Self::Input, Self::Output>]) -> u64 {
        self.enumerate()
            .filter(|s| consistent(self, s, constraints))
            .count() as u64
    }

    /// First consistent program in enumeration order (or a deterministic
    /// domain-specific canonical solution), within a node budget.
    fn synthesize_constrained(
        &self,
        constraints: &[Constraint<Self::Input, Self::Output>],
        budget: u64,
    ) -> Result<SearchOutcome<Self::Params>> {
        let mut nodes = 0u64;
        for s in self.enumerate() {
            nodes += 1;
            if nodes > budget {
                return Err(Error::BudgetExhausted { nodes });
            }
            if consistent(self, &s, constraints) {
                return Ok(SearchOutcome { program: Some(s), nodes });
            }
        }
        Ok(SearchOutcome { program: None, nodes })
    }

    /// Rank used by the canonical counterexample strategy. Domains with a
    /// spatial canonical order (drawing: row-major) return `Some`.
    fn canonical_rank(&self, _x: &Self::Input) -> Option<u64> {
        None
    }
}

/// Evaluates F(x; s) after validating both arguments.
pub fn evaluate<S: ProgramSpace + ?Sized>(
    space: &S,
    s: &S::Params,
    x: &S::Input,
) -> Result<S::Output> {
    space.validate_params(s)?;
    space.validate_input(x)?;
    Ok(space.evaluate(s, x))
}

/// True iff `s` satisfies every positive constraint and violates every
/// negated one.
pub fn consistent<S: ProgramSpace + ?Sized>(
    space: &S,
    s: &S::Params,
    constraints: &[Constraint<S::Input, S::Output>],
) -> bool {
    constraints.iter().all(|c| {
        let matches = space.evaluate(s, &c.example.input) == c.example.output;
        match c.polarity {
            Polarity::Positive => matches,
            Polarity::Negated => !matches,
        }
    })
}

/// The count oracle c: exact number of programs consistent with the
/// constraint set. Guarded by `cap` on |S|.
pub fn count<S: ProgramSpace + ?Sized>(
    space: &S,
    constraints: &[Constraint<S::Input, S::Output>],
    cap: u64,
) -> Result<u64> {
    let size = space.space_size();
    if size > cap as u128 {
        return Err(Error::SpaceTooLarge { size, cap });
    }
    Ok(space.count_constrained(constraints))
}

/// Positive constraints for every example of a dataset.
pub fn positives<I: Clone, O: Clone>(data: &Dataset<I, O>) -> Vec<Constraint<I, O>> {
    data.iter().map(|e| Constraint::positive(e.clone())).collect()
}

/// Positive constraints for a slice of examples.
pub fn positives_of<I: Clone, O: Clone>(examples: &[Example<I, O>]) -> Vec<Constraint<I, O>> {
    examples.iter().map(|e| Constraint::positive(e.clone())).collect()
}
