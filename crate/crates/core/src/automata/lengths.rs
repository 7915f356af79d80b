use std::collections::HashMap;

use super::{Dfa, Nfa, StateId};

/// The set of lengths of words in a regular language, as an ultimately
/// periodic set: membership of `n` is `bits[n]` below `threshold` and
/// `bits[threshold + (n - threshold) % period]` above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthSet {
    threshold: usize,
    period: usize,
    bits: Vec<bool>,
}

impl LengthSet {
    /// Lengths accepted by a graph: successor lists (labels ignored), an
    /// initial state set, and final flags.
    fn of_graph(succ: &[Vec<StateId>], initial: &[StateId], finals: &[bool]) -> LengthSet {
        let n = succ.len();
        let mut cur = vec![false; n];
        for &q in initial {
            cur[q] = true;
        }
        let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut bits = Vec::new();
        loop {
            if let Some(&i) = seen.get(&cur) {
                return LengthSet { threshold: i, period: bits.len() - i, bits };
            }
            seen.insert(cur.clone(), bits.len());
            bits.push((0..n).any(|q| cur[q] && finals[q]));
            let mut next = vec![false; n];
            for q in (0..n).filter(|&q| cur[q]) {
                for &r in &succ[q] {
                    next[r] = true;
                }
            }
            cur = next;
        }
    }

    pub fn of_dfa(dfa: &Dfa) -> LengthSet {
        let finals: Vec<bool> = (0..dfa.num_states()).map(|q| dfa.is_final(q)).collect();
        LengthSet::of_graph(&dfa.adjacency(), &[dfa.initial()], &finals)
    }

    pub fn of_nfa(nfa: &Nfa) -> LengthSet {
        let ef = nfa.eps_free();
        let succ: Vec<Vec<StateId>> =
            ef.trans.iter().map(|ts| ts.iter().map(|&(_, r)| r).collect()).collect();
        LengthSet::of_graph(&succ, &ef.initial, &ef.finals)
    }

    pub fn contains(&self, n: usize) -> bool {
        if n < self.threshold {
            self.bits[n]
        } else {
            self.bits[self.threshold + (n - self.threshold) % self.period]
        }
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Members below the threshold.
    pub fn finite_part(&self) -> Vec<usize> {
        (0..self.threshold).filter(|&n| self.bits[n]).collect()
    }

    /// Pairs `(offset, period)` such that every `offset + k * period` is a
    /// member; together with the finite part they cover the set exactly.
    pub fn offsets_periods(&self) -> Vec<(usize, usize)> {
        (self.threshold..self.threshold + self.period)
            .filter(|&n| self.bits[n])
            .map(|n| (n, self.period))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_finite(&self) -> bool {
        self.offsets_periods().is_empty()
    }

    pub fn min(&self) -> Option<usize> {
        self.bits.iter().position(|&b| b)
    }

    /// Largest member, or `None` for an infinite or empty set.
    pub fn max(&self) -> Option<usize> {
        if !self.is_finite() {
            return None;
        }
        self.finite_part().last().copied()
    }

    /// Least member that is at least `n`.
    pub fn least_at_least(&self, n: usize) -> Option<usize> {
        let end = n.max(self.threshold) + self.period;
        (n..end).find(|&m| self.contains(m))
    }
}
