//! Deterministic finite automata over the binary alphabet {0, 1}, with a
//! fixed start state 0 and a single accept state carried as a parameter.
//! A program is a total transition table plus the accept state.

use serde::{Deserialize, Serialize};

use crate::core::{Constraint, DomainId, Example, Polarity, ProgramSpace, SearchOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DfaSpace {
    num_states: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaParams {
    /// Transition table, indexed by `state * 2 + symbol`.
    pub transitions: Vec<u8>,
    pub accept: u8,
}

pub type DfaExample = Example<String, bool>;

/// A constraint lowered to (symbols, must_accept). Output and polarity flips
/// both reduce to flipping the required label.
fn lower(c: &Constraint<String, bool>) -> (Vec<u8>, bool) {
    let symbols = c.example.input.bytes().map(|b| b - b'0').collect();
    let must_accept = match c.polarity {
        Polarity::Positive => c.example.output,
        Polarity::Negated => !c.example.output,
    };
    (symbols, must_accept)
}

impl DfaSpace {
    pub fn new(num_states: u8) -> Result<Self> {
        if !(1..=8).contains(&num_states) {
            return Err(Error::InvalidParams(format!("state count {num_states} outside 1..=8")));
        }
        Ok(DfaSpace { num_states })
    }

    pub fn num_states(&self) -> u8 {
        self.num_states
    }

    fn table_len(&self) -> usize {
        self.num_states as usize * 2
    }

    /// Number of transition tables alone, num_states^(2 * num_states).
    pub fn transition_table_count(&self) -> u128 {
        (self.num_states as u128).pow(self.table_len() as u32)
    }

    /// Search over partial transition tables: transitions are assigned only
    /// when some string needs them, values tried in ascending order, and
    /// branches die as soon as the viable-accept-state set empties. When all
    /// strings simulate to completion, every unassigned transition is free.
    fn search(
        &self,
        constraints: &[(Vec<u8>, bool)],
        mode: SearchMode,
        budget: u64,
    ) -> Result<(u64, Option<DfaParams>, u64)> {
        let mut table: Vec<Option<u8>> = vec![None; self.table_len()];
        let mut nodes = 0u64;
        match self.search_rec(constraints, &mut table, mode, budget, &mut nodes)? {
            Found::Count(c) => Ok((c, None, nodes)),
            Found::Program(p) => Ok((1, Some(p), nodes)),
            Found::Nothing => Ok((0, None, nodes)),
        }
    }

    fn search_rec(
        &self,
        constraints: &[(Vec<u8>, bool)],
        table: &mut Vec<Option<u8>>,
        mode: SearchMode,
        budget: u64,
        nodes: &mut u64,
    ) -> Result<Found> {
        let m = self.num_states;
        // Simulate every string as far as the assigned transitions allow.
        let mut accept_mask: u16 = (1u16 << m) - 1;
        let mut stuck: Option<usize> = None;
        for (symbols, must_accept) in constraints {
            let mut state = 0u8;
            let mut done = true;
            for &sym in symbols {
                let idx = state as usize * 2 + sym as usize;
                match table[idx] {
                    Some(next) => state = next,
                    None => {
                        if stuck.is_none() {
                            stuck = Some(idx);
                        }
                        done = false;
                        break;
                    }
                }
            }
            if done {
                if *must_accept {
                    accept_mask &= 1 << state;
                } else {
                    accept_mask &= !(1 << state);
                }
                if accept_mask == 0 {
                    return Ok(Found::Nothing);
                }
            }
        }

        match stuck {
            None => {
                // Every string is decided; the remaining transitions are
                // unconstrained.
                let unset = table.iter().filter(|t| t.is_none()).count();
                match mode {
                    SearchMode::Count => {
                        let free = (m as u64).pow(unset as u32);
                        Ok(Found::Count(free * accept_mask.count_ones() as u64))
                    }
                    SearchMode::First => {
                        let transitions: Vec<u8> = table.iter().map(|t| t.unwrap_or(0)).collect();
                        let accept = accept_mask.trailing_zeros() as u8;
                        Ok(Found::Program(DfaParams { transitions, accept }))
                    }
                }
            }
            Some(idx) => {
                let mut total = 0u64;
                for v in 0..m {
                    *nodes += 1;
                    if *nodes > budget {
                        return Err(Error::BudgetExhausted { nodes: *nodes });
                    }
                    table[idx] = Some(v);
                    match self.search_rec(constraints, table, mode, budget, nodes)? {
                        Found::Nothing => {}
                        Found::Count(c) => total += c,
                        Found::Program(p) => {
                            table[idx] = None;
                            return Ok(Found::Program(p));
                        }
                    }
                    table[idx] = None;
                }
                if total > 0 {
                    Ok(Found::Count(total))
                } else {
                    Ok(Found::Nothing)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum SearchMode {
    Count,
    First,
}

enum Found {
    Nothing,
    Count(u64),
    Program(DfaParams),
}

impl ProgramSpace for DfaSpace {
    type Params = DfaParams;
    type Input = String;
    type Output = bool;

    fn domain_id(&self) -> DomainId {
        DomainId::Dfa
    }

    fn space_size(&self) -> u128 {
        self.transition_table_count() * self.num_states as u128
    }

    fn params_from_ordinal(&self, ordinal: u128) -> DfaParams {
        // Mixed-radix decode of (t_0, ..., t_{2m-1}, accept), t_0 most
        // significant.
        let m = self.num_states as u128;
        let mut ord = ordinal;
        let accept = (ord % m) as u8;
        ord /= m;
        let len = self.table_len();
        let mut transitions = vec![0u8; len];
        for i in (0..len).rev() {
            transitions[i] = (ord % m) as u8;
            ord /= m;
        }
        DfaParams { transitions, accept }
    }

    fn validate_params(&self, s: &DfaParams) -> Result<()> {
        if s.transitions.len() != self.table_len() {
            return Err(Error::InvalidParams(format!(
                "transition table length {} != {}",
                s.transitions.len(),
                self.table_len()
            )));
        }
        if s.transitions.iter().any(|&t| t >= self.num_states) || s.accept >= self.num_states {
            return Err(Error::InvalidParams("state index out of range".into()));
        }
        Ok(())
    }

    fn validate_input(&self, x: &String) -> Result<()> {
        if x.bytes().any(|b| b != b'0' && b != b'1') {
            return Err(Error::InvalidInput(format!("not a binary string: {x:?}")));
        }
        Ok(())
    }

    fn evaluate(&self, s: &DfaParams, x: &String) -> bool {
        let mut state = 0u8;
        for b in x.bytes() {
            state = s.transitions[state as usize * 2 + (b - b'0') as usize];
        }
        state == s.accept
    }

    fn outputs(&self) -> Vec<bool> {
        vec![false, true]
    }

    fn count_constrained(&self, constraints: &[Constraint<String, bool>]) -> u64 {
        let lowered: Vec<_> = constraints.iter().map(lower).collect();
        let (count, _, _) = self
            .search(&lowered, SearchMode::Count, u64::MAX)
            .expect("unbounded budget");
        count
    }

    fn synthesize_constrained(
        &self,
        constraints: &[Constraint<String, bool>],
        budget: u64,
    ) -> Result<SearchOutcome<DfaParams>> {
        let lowered: Vec<_> = constraints.iter().map(lower).collect();
        let (_, program, nodes) = self.search(&lowered, SearchMode::First, budget)?;
        Ok(SearchOutcome { program, nodes })
    }
}

/// Longest common prefix length.
fn lcp(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count()
}

/// Longest common suffix length.
fn lcs(a: &str, b: &str) -> usize {
    a.bytes().rev().zip(b.bytes().rev()).take_while(|(x, y)| x == y).count()
}

/// Top-k neighbors of `x` in `subset`, ranked by common prefix length plus
/// common suffix length, descending; ties keep subset insertion order.
pub fn nb_dfa(subset: &[DfaExample], x: &str, k: usize) -> Vec<DfaExample> {
    let mut scored: Vec<(usize, &DfaExample)> = subset
        .iter()
        .map(|e| (lcp(&e.input, x) + lcs(&e.input, x), e))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0));
    scored.into_iter().take(k).map(|(_, e)| e.clone()).collect()
}
