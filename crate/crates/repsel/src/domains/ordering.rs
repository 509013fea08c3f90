//! Total orderings over n elements. A program is a permutation; an input is
//! an ordered pair of element indices; the output says whether the first
//! element precedes the second.

use crate::core::{
    Constraint, DomainId, Example, Polarity, ProgramSpace, SearchOutcome,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderingSpace {
    n: usize,
}

pub type OrderingExample = Example<(u8, u8), bool>;

impl OrderingSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n > 20 {
            return Err(Error::InvalidParams(format!("element count {n} outside 2..=20")));
        }
        Ok(OrderingSpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn factorial(n: usize) -> u128 {
        (1..=n as u128).product()
    }

    /// The precedence fact `(before, after)` asserted by a constraint. Both
    /// output and polarity flips reduce to swapping the pair: a total order
    /// holds exactly one of (i before j) and (j before i).
    pub fn fact(c: &Constraint<(u8, u8), bool>) -> (u8, u8) {
        let (i, j) = c.example.input;
        let forward = match c.polarity {
            Polarity::Positive => c.example.output,
            Polarity::Negated => !c.example.output,
        };
        if forward {
            (i, j)
        } else {
            (j, i)
        }
    }

    /// Bitmask of required predecessors per element, from a constraint set.
    fn pred_masks(&self, constraints: &[Constraint<(u8, u8), bool>]) -> Vec<u32> {
        let mut pred = vec![0u32; self.n];
        for c in constraints {
            let (before, after) = Self::fact(c);
            pred[after as usize] |= 1 << before;
        }
        pred
    }

    /// Number of linear extensions of the precedence relation, by dynamic
    /// programming over element subsets. Exact; contradictory (cyclic)
    /// relations yield 0.
    fn count_extensions(&self, pred: &[u32]) -> u64 {
        let n = self.n;
        let full: usize = (1 << n) - 1;
        let mut ways = vec![0u64; full + 1];
        ways[0] = 1;
        for mask in 0..=full {
            if ways[mask] == 0 {
                continue;
            }
            for v in 0..n {
                let bit = 1usize << v;
                if mask & bit == 0 && (pred[v] as usize) & !mask == 0 {
                    ways[mask | bit] += ways[mask];
                }
            }
        }
        ways[full]
    }
}

impl ProgramSpace for OrderingSpace {
    /// Elements listed first-to-last.
    type Params = Vec<u8>;
    type Input = (u8, u8);
    type Output = bool;

    fn domain_id(&self) -> DomainId {
        DomainId::Ordering
    }

    fn space_size(&self) -> u128 {
        Self::factorial(self.n)
    }

    fn params_from_ordinal(&self, ordinal: u128) -> Vec<u8> {
        // Lehmer decode: lexicographic order over the element sequence.
        let n = self.n;
        let mut remaining: Vec<u8> = (0..n as u8).collect();
        let mut ord = ordinal;
        let mut perm = Vec::with_capacity(n);
        for pos in 0..n {
            let block = Self::factorial(n - pos - 1);
            let idx = (ord / block) as usize;
            ord %= block;
            perm.push(remaining.remove(idx));
        }
        perm
    }

    fn validate_params(&self, s: &Vec<u8>) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "permutation length {} != {}",
                s.len(),
                self.n
            )));
        }
        let mut seen = 0u32;
        for &e in s {
            if e as usize >= self.n || seen & (1 << e) != 0 {
                return Err(Error::InvalidParams(format!("not a permutation: {s:?}")));
            }
            seen |= 1 << e;
        }
        Ok(())
    }

    fn validate_input(&self, x: &(u8, u8)) -> Result<()> {
        let (i, j) = *x;
        if i as usize >= self.n || j as usize >= self.n {
            return Err(Error::InvalidInput(format!("element index out of range: {x:?}")));
        }
        if i == j {
            return Err(Error::InvalidInput(format!("pair must be distinct: {x:?}")));
        }
        Ok(())
    }

    fn evaluate(&self, s: &Vec<u8>, x: &(u8, u8)) -> bool {
        let pos_i = s.iter().position(|&e| e == x.0).expect("valid params");
        let pos_j = s.iter().position(|&e| e == x.1).expect("valid params");
        pos_i < pos_j
    }

    fn outputs(&self) -> Vec<bool> {
        vec![false, true]
    }

    fn count_constrained(&self, constraints: &[Constraint<(u8, u8), bool>]) -> u64 {
        self.count_extensions(&self.pred_masks(constraints))
    }

    fn synthesize_constrained(
        &self,
        constraints: &[Constraint<(u8, u8), bool>],
        budget: u64,
    ) -> Result<SearchOutcome<Vec<u8>>> {
        let pred = self.pred_masks(constraints);
        let n = self.n;
        let mut placed_mask = 0u32;
        let mut perm: Vec<u8> = Vec::with_capacity(n);
        // Next candidate element to try at each depth.
        let mut cursor: Vec<u8> = vec![0];
        let mut nodes = 0u64;

        // Backtracking over positions, trying elements in ascending order;
        // an element is placeable once all its predecessors are placed. The
        // first full assignment is the lexicographically smallest extension.
        loop {
            let depth = perm.len();
            if depth == n {
                return Ok(SearchOutcome { program: Some(perm), nodes });
            }
            let mut advanced = false;
            let start = cursor[depth];
            for v in start..n as u8 {
                let bit = 1u32 << v;
                if placed_mask & bit != 0 || pred[v as usize] & !placed_mask != 0 {
                    continue;
                }
                nodes += 1;
                if nodes > budget {
                    return Err(Error::BudgetExhausted { nodes });
                }
                cursor[depth] = v + 1;
                perm.push(v);
                placed_mask |= bit;
                cursor.push(0);
                advanced = true;
                break;
            }
            if !advanced {
                // Backtrack.
                cursor.pop();
                match perm.pop() {
                    Some(v) => placed_mask &= !(1u32 << v),
                    None => return Ok(SearchOutcome { program: None, nodes }),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{consistent, count, evaluate, positives_of, Dataset};

    fn ex(i: u8, j: u8, out: bool) -> OrderingExample {
        Example::new((i, j), out)
    }

    fn pos(i: u8, j: u8, out: bool) -> Constraint<(u8, u8), bool> {
        Constraint::positive(ex(i, j, out))
    }

    #[test]
    fn evaluate_matches_precedence() {
        let space = OrderingSpace::new(3).unwrap();
        // s = (a, b, c): a precedes b.
        let s = vec![0u8, 1, 2];
        assert!(evaluate(&space, &s, &(0, 1)).unwrap());
        assert!(!evaluate(&space, &s, &(2, 0)).unwrap());
    }

    #[test]
    fn evaluate_rejects_bad_args() {
        let space = OrderingSpace::new(3).unwrap();
        assert!(matches!(
            evaluate(&space, &vec![0, 1], &(0, 1)),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            evaluate(&space, &vec![0, 1, 2], &(1, 1)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let space = OrderingSpace::new(4).unwrap();
        let all: Vec<Vec<u8>> = space.enumerate().collect();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], vec![0, 1, 2, 3]);
        assert_eq!(all[23], vec![3, 2, 1, 0]);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
        assert_eq!(sorted, all);
    }

    #[test]
    fn count_no_constraints_is_factorial() {
        let space = OrderingSpace::new(3).unwrap();
        assert_eq!(count(&space, &[], u64::MAX).unwrap(), 6);
    }

    #[test]
    fn count_single_relation_halves() {
        let space = OrderingSpace::new(3).unwrap();
        assert_eq!(count(&space, &[pos(0, 1, true)], u64::MAX).unwrap(), 3);
    }

    #[test]
    fn count_diamond_relations() {
        // a<b, a<c, b<d, c<d: survivors are (a,b,c,d) and (a,c,b,d),
        // confirmed below by full enumeration of the 24 permutations.
        let space = OrderingSpace::new(4).unwrap();
        let cs = vec![pos(0, 1, true), pos(0, 2, true), pos(1, 3, true), pos(2, 3, true)];
        let brute: Vec<Vec<u8>> =
            space.enumerate().filter(|s| consistent(&space, s, &cs)).collect();
        assert_eq!(brute, vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3]]);
        assert_eq!(count(&space, &cs, u64::MAX).unwrap(), 2);
    }

    #[test]
    fn count_agrees_with_enumeration() {
        let space = OrderingSpace::new(4).unwrap();
        let sets: Vec<Vec<Constraint<(u8, u8), bool>>> = vec![
            vec![],
            vec![pos(0, 1, true)],
            vec![pos(0, 1, false)],
            vec![Constraint::negated(ex(0, 1, true))],
            vec![pos(0, 1, true), pos(1, 2, true), pos(2, 3, true)],
            vec![pos(0, 1, true), pos(1, 0, true)],
            vec![pos(0, 1, true), Constraint::negated(ex(0, 1, true))],
            vec![pos(3, 0, true), pos(2, 0, false), pos(1, 3, false)],
        ];
        for cs in &sets {
            let brute = space.enumerate().filter(|s| consistent(&space, s, cs)).count() as u64;
            assert_eq!(count(&space, cs, u64::MAX).unwrap(), brute, "constraints {cs:?}");
        }
    }

    #[test]
    fn count_monotone_under_added_constraints() {
        let space = OrderingSpace::new(4).unwrap();
        let mut cs = Vec::new();
        let adds = [pos(0, 1, true), pos(2, 1, true), pos(3, 2, true), pos(0, 3, true)];
        let mut last = count(&space, &cs, u64::MAX).unwrap();
        for c in adds {
            cs.push(c);
            let now = count(&space, &cs, u64::MAX).unwrap();
            assert!(now <= last);
            last = now;
        }
    }

    #[test]
    fn count_cap_guard() {
        let space = OrderingSpace::new(12).unwrap();
        assert!(matches!(
            count(&space, &[], 100_000_000),
            Err(Error::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn consistent_examples() {
        let space = OrderingSpace::new(3).unwrap();
        let s = vec![0u8, 1, 2];
        assert!(consistent(&space, &s, &[pos(0, 1, true)]));
        assert!(!consistent(&space, &s, &[Constraint::negated(ex(0, 1, true))]));
        let s2 = vec![0u8, 2, 1];
        assert!(!consistent(&space, &s2, &[pos(0, 1, true), pos(1, 2, true)]));
    }

    #[test]
    fn synthesize_unique_survivor() {
        let space = OrderingSpace::new(3).unwrap();
        let cs = vec![pos(0, 1, true), pos(1, 2, true)];
        // Brute-force oracle: the only consistent permutation.
        let brute: Vec<Vec<u8>> =
            space.enumerate().filter(|s| consistent(&space, s, &cs)).collect();
        assert_eq!(brute, vec![vec![0, 1, 2]]);
        let got = space.synthesize_constrained(&cs, u64::MAX).unwrap();
        assert_eq!(got.program, Some(vec![0, 1, 2]));
    }

    #[test]
    fn synthesize_contradiction_is_unsat() {
        let space = OrderingSpace::new(2).unwrap();
        let cs = vec![pos(0, 1, true), Constraint::negated(ex(0, 1, true))];
        let got = space.synthesize_constrained(&cs, u64::MAX).unwrap();
        assert_eq!(got.program, None);
    }

    #[test]
    fn synthesize_empty_constraints_first_in_order() {
        let space = OrderingSpace::new(5).unwrap();
        let got = space.synthesize_constrained(&[], u64::MAX).unwrap();
        assert_eq!(got.program, space.enumerate().next());
    }

    #[test]
    fn synthesize_budget_exhaustion() {
        let space = OrderingSpace::new(6).unwrap();
        // Force heavy backtracking with an unsatisfiable cycle.
        let cs = vec![pos(0, 1, true), pos(1, 2, true), pos(2, 0, true)];
        assert!(matches!(
            space.synthesize_constrained(&cs, 1),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn synthesize_agrees_with_scan_on_random_sets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let space = OrderingSpace::new(5).unwrap();
        for _ in 0..50 {
            let mut cs = Vec::new();
            for _ in 0..rng.gen_range(0..6) {
                let i = rng.gen_range(0..5u8);
                let mut j = rng.gen_range(0..5u8);
                while j == i {
                    j = rng.gen_range(0..5u8);
                }
                cs.push(pos(i, j, rng.gen_bool(0.5)));
            }
            let scan = space.enumerate().find(|s| consistent(&space, s, &cs));
            let got = space.synthesize_constrained(&cs, u64::MAX).unwrap();
            assert_eq!(got.program, scan, "constraints {cs:?}");
        }
    }

    #[test]
    fn dataset_from_paper_layout() {
        // D = {a<b, a<c, b<d, c<d, d>a, c>a} with mirrored pairs as distinct
        // examples.
        let data: Dataset<(u8, u8), bool> = Dataset::from_examples(vec![
            ex(0, 1, true),
            ex(0, 2, true),
            ex(1, 3, true),
            ex(2, 3, true),
            ex(3, 0, false),
            ex(2, 0, false),
        ])
        .unwrap();
        let space = OrderingSpace::new(4).unwrap();
        let cs = positives_of(data.examples());
        assert_eq!(count(&space, &cs, u64::MAX).unwrap(), 2);
    }
}
