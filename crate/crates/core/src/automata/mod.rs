//! Finite automata over symbol ids.
//!
//! Variable languages are kept as canonical DFAs: trim, minimal, and
//! numbered breadth-first from the initial state in symbol order. Every
//! tie-break downstream (connectors, butterflies, enumeration order) keys off
//! that numbering, which keeps verdicts and models reproducible.

mod flat;
mod lengths;
mod nfa;
mod regex;

use std::collections::VecDeque;

use thiserror::Error;

use crate::words::{Symbol, Word};

pub use flat::{
    butterfly_at, classify_flatness, patterns_to_nfa, restrict_min_length, Butterfly, FlatPattern,
    Flatness,
};
pub use lengths::LengthSet;
pub use nfa::{EpsFree, Nfa};
pub use regex::{parse_regex, Regex, RegexError};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("language is empty")]
    EmptyLanguage,
    #[error("state {to} is unreachable from state {from}")]
    Unreachable { from: StateId, to: StateId },
    #[error("language is flat; no butterfly exists")]
    FlatLanguage,
}

/// A (partial) deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    num_symbols: usize,
    delta: Vec<Vec<Option<StateId>>>,
    initial: StateId,
    finals: Vec<bool>,
}

/// Strongly connected components of a transition graph.
#[derive(Clone, Debug)]
pub struct Sccs {
    /// Component index of every state.
    pub comp: Vec<usize>,
    pub members: Vec<Vec<StateId>>,
    /// A component is nontrivial if it has an internal transition.
    pub nontrivial: Vec<bool>,
}

impl Sccs {
    pub fn same(&self, p: StateId, q: StateId) -> bool {
        self.comp[p] == self.comp[q]
    }

    pub fn is_nontrivial_state(&self, q: StateId) -> bool {
        self.nontrivial[self.comp[q]]
    }

    /// Kosaraju over an adjacency list.
    pub fn compute(adj: &[Vec<StateId>]) -> Sccs {
        let n = adj.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![(s, 0usize)];
            while let Some(&mut (q, ref mut i)) = stack.last_mut() {
                if *i < adj[q].len() {
                    let r = adj[q][*i];
                    *i += 1;
                    if !seen[r] {
                        seen[r] = true;
                        stack.push((r, 0));
                    }
                } else {
                    order.push(q);
                    stack.pop();
                }
            }
        }
        let mut radj = vec![Vec::new(); n];
        for (q, succ) in adj.iter().enumerate() {
            for &r in succ {
                radj[r].push(q);
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut members: Vec<Vec<StateId>> = Vec::new();
        for &s in order.iter().rev() {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut group = vec![s];
            comp[s] = c;
            let mut i = 0;
            while i < group.len() {
                let q = group[i];
                i += 1;
                for &p in &radj[q] {
                    if comp[p] == usize::MAX {
                        comp[p] = c;
                        group.push(p);
                    }
                }
            }
            group.sort_unstable();
            members.push(group);
        }
        let mut nontrivial = vec![false; members.len()];
        for (q, succ) in adj.iter().enumerate() {
            for &r in succ {
                if comp[q] == comp[r] {
                    nontrivial[comp[q]] = true;
                }
            }
        }
        Sccs { comp, members, nontrivial }
    }
}

impl Dfa {
    /// Raw constructor; the result need not be trim or minimal.
    pub fn from_parts(
        num_symbols: usize,
        delta: Vec<Vec<Option<StateId>>>,
        initial: StateId,
        finals: Vec<bool>,
    ) -> Dfa {
        assert_eq!(delta.len(), finals.len());
        assert!(initial < delta.len());
        assert!(delta.iter().all(|row| row.len() == num_symbols));
        Dfa { num_symbols, delta, initial, finals }
    }

    /// Automaton for `w*` (before canonicalization: a cycle of |w| states).
    pub fn star_of(num_symbols: usize, w: &[Symbol]) -> Dfa {
        assert!(!w.is_empty());
        let n = w.len();
        let mut delta = vec![vec![None; num_symbols]; n];
        for (i, &a) in w.iter().enumerate() {
            delta[i][a as usize] = Some((i + 1) % n);
        }
        let mut finals = vec![false; n];
        finals[0] = true;
        Dfa::from_parts(num_symbols, delta, 0, finals)
    }

    /// Automaton accepting exactly `w`.
    pub fn literal(num_symbols: usize, w: &[Symbol]) -> Dfa {
        let n = w.len() + 1;
        let mut delta = vec![vec![None; num_symbols]; n];
        for (i, &a) in w.iter().enumerate() {
            delta[i][a as usize] = Some(i + 1);
        }
        let mut finals = vec![false; n];
        finals[n - 1] = true;
        Dfa::from_parts(num_symbols, delta, 0, finals)
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals.iter().enumerate().filter(|(_, &f)| f).map(|(q, _)| q)
    }

    pub fn step(&self, q: StateId, a: Symbol) -> Option<StateId> {
        self.delta[q].get(a as usize).copied().flatten()
    }

    /// Outgoing transitions of `q` in symbol order.
    pub fn out(&self, q: StateId) -> impl Iterator<Item = (Symbol, StateId)> + '_ {
        self.delta[q]
            .iter()
            .enumerate()
            .filter_map(|(a, t)| t.map(|r| (a as Symbol, r)))
    }

    pub fn out_degree(&self, q: StateId) -> usize {
        self.delta[q].iter().filter(|t| t.is_some()).count()
    }

    pub fn run_from(&self, q: StateId, w: &[Symbol]) -> Option<StateId> {
        w.iter().try_fold(q, |q, &a| self.step(q, a))
    }

    pub fn accepts(&self, w: &[Symbol]) -> bool {
        self.run_from(self.initial, w).is_some_and(|q| self.finals[q])
    }

    pub fn adjacency(&self) -> Vec<Vec<StateId>> {
        (0..self.num_states()).map(|q| self.out(q).map(|(_, r)| r).collect()).collect()
    }

    pub fn sccs(&self) -> Sccs {
        Sccs::compute(&self.adjacency())
    }

    /// Same graph with a different initial state.
    pub fn with_initial(&self, q: StateId) -> Dfa {
        Dfa { initial: q, ..self.clone() }
    }

    /// Same graph with exactly the given final states.
    pub fn with_finals(&self, qs: &[StateId]) -> Dfa {
        let mut finals = vec![false; self.num_states()];
        for &q in qs {
            finals[q] = true;
        }
        Dfa { finals, ..self.clone() }
    }

    /// Same automaton read over a larger symbol range (extra symbols have no
    /// transitions).
    pub fn widen(&self, num_symbols: usize) -> Dfa {
        assert!(num_symbols >= self.num_symbols);
        let delta = self
            .delta
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.resize(num_symbols, None);
                row
            })
            .collect();
        Dfa { num_symbols, delta, ..self.clone() }
    }

    fn reachable_from(&self, starts: &[StateId], backward: bool) -> Vec<bool> {
        let n = self.num_states();
        let mut adj = vec![Vec::new(); n];
        for q in 0..n {
            for (_, r) in self.out(q) {
                if backward {
                    adj[r].push(q);
                } else {
                    adj[q].push(r);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<StateId> = starts.to_vec();
        for &s in starts {
            seen[s] = true;
        }
        while let Some(q) = stack.pop() {
            for &r in &adj[q] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    /// Trim, minimize and renumber breadth-first. Fails on the empty language.
    pub fn canonicalize(&self) -> Result<Dfa, AutomataError> {
        let fwd = self.reachable_from(&[self.initial], false);
        let finals: Vec<StateId> = self.finals().collect();
        let bwd = self.reachable_from(&finals, true);
        if !(fwd[self.initial] && bwd[self.initial]) {
            return Err(AutomataError::EmptyLanguage);
        }
        let useful: Vec<bool> = (0..self.num_states()).map(|q| fwd[q] && bwd[q]).collect();

        // Moore refinement; a missing or useless successor behaves as the
        // implicit sink, distinct from every useful state.
        let n = self.num_states();
        let mut class: Vec<usize> = (0..n).map(|q| usize::from(self.finals[q])).collect();
        let mut num_classes = 0;
        loop {
            let mut sigs: std::collections::HashMap<(usize, Vec<Option<usize>>), usize> =
                std::collections::HashMap::new();
            let mut next = vec![usize::MAX; n];
            for q in (0..n).filter(|&q| useful[q]) {
                let row: Vec<Option<usize>> = self.delta[q]
                    .iter()
                    .map(|t| t.filter(|&r| useful[r]).map(|r| class[r]))
                    .collect();
                let len = sigs.len();
                next[q] = *sigs.entry((class[q], row)).or_insert(len);
            }
            let count = sigs.len();
            class = next;
            if count == num_classes {
                break;
            }
            num_classes = count;
        }

        // BFS renumbering over classes.
        let mut new_id = vec![usize::MAX; num_classes];
        let mut rep = Vec::with_capacity(num_classes);
        let mut queue = VecDeque::new();
        new_id[class[self.initial]] = 0;
        rep.push(self.initial);
        queue.push_back(self.initial);
        while let Some(q) = queue.pop_front() {
            for (_, r) in self.out(q) {
                if useful[r] && new_id[class[r]] == usize::MAX {
                    new_id[class[r]] = rep.len();
                    rep.push(r);
                    queue.push_back(r);
                }
            }
        }
        let delta = rep
            .iter()
            .map(|&q| {
                self.delta[q]
                    .iter()
                    .map(|t| t.filter(|&r| useful[r]).map(|r| new_id[class[r]]))
                    .collect()
            })
            .collect();
        let finals = rep.iter().map(|&q| self.finals[q]).collect();
        Ok(Dfa { num_symbols: self.num_symbols, delta, initial: 0, finals })
    }

    /// Keep only transitions between states marked in `keep`.
    pub fn restrict_states(&self, keep: &[bool]) -> Dfa {
        let delta = self
            .delta
            .iter()
            .enumerate()
            .map(|(q, row)| row.iter().map(|t| t.filter(|&r| keep[q] && keep[r])).collect())
            .collect();
        Dfa { delta, ..self.clone() }
    }

    /// Every nontrivial strongly connected component is a simple cycle.
    pub fn is_flat(&self) -> bool {
        let sccs = self.sccs();
        (0..self.num_states()).all(|q| self.out(q).filter(|&(_, r)| sccs.same(q, r)).count() <= 1)
    }

    /// The language has no word using a cycle.
    pub fn is_finite(&self) -> bool {
        let sccs = self.sccs();
        !sccs.nontrivial.iter().any(|&b| b)
    }

    /// Distances (in letters) from every state to `targets`.
    fn distances_to(&self, targets: &[StateId]) -> Vec<Option<usize>> {
        let n = self.num_states();
        let mut radj = vec![Vec::new(); n];
        for q in 0..n {
            for (_, r) in self.out(q) {
                radj[r].push(q);
            }
        }
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for &t in targets {
            if dist[t].is_none() {
                dist[t] = Some(0);
                queue.push_back(t);
            }
        }
        while let Some(q) = queue.pop_front() {
            let d = dist[q].unwrap();
            for &p in &radj[q] {
                if dist[p].is_none() {
                    dist[p] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// Walk from `q` choosing, at each step, the least symbol that stays on a
    /// shortest path to the targets.
    fn greedy_shortest(&self, q: StateId, dist: &[Option<usize>]) -> Option<Word> {
        let mut d = dist[q]?;
        let mut cur = q;
        let mut w = Word::new();
        while d > 0 {
            let (a, r) = self.out(cur).find(|&(_, r)| dist[r] == Some(d - 1))?;
            w.push(a);
            cur = r;
            d -= 1;
        }
        Some(w)
    }

    /// Lexicographically least among the shortest words leading from `q` to `r`.
    pub fn connector(&self, q: StateId, r: StateId) -> Result<Word, AutomataError> {
        let dist = self.distances_to(&[r]);
        self.greedy_shortest(q, &dist).ok_or(AutomataError::Unreachable { from: q, to: r })
    }

    /// Least accepted word in shortlex order.
    pub fn shortest_accepted(&self) -> Option<Word> {
        let finals: Vec<StateId> = self.finals().collect();
        let dist = self.distances_to(&finals);
        self.greedy_shortest(self.initial, &dist)
    }

    /// Lexicographically least accepted word of length exactly `n`.
    pub fn least_word_of_length(&self, n: usize) -> Option<Word> {
        // can[k][q]: some word of length k leads from q to a final state
        let states = self.num_states();
        let mut can = Vec::with_capacity(n + 1);
        can.push(self.finals.clone());
        for k in 1..=n {
            let prev: &Vec<bool> = &can[k - 1];
            let row = (0..states).map(|q| self.out(q).any(|(_, r)| prev[r])).collect();
            can.push(row);
        }
        if !can[n][self.initial] {
            return None;
        }
        let mut q = self.initial;
        let mut w = Word::new();
        for k in (0..n).rev() {
            let (a, r) = self.out(q).find(|&(_, r)| can[k][r])?;
            w.push(a);
            q = r;
        }
        Some(w)
    }

    /// Accepted words of length at most `max_len`, shortest first, then
    /// lexicographic. Returns `None` once more than `cap` words are found.
    pub fn enumerate_words_capped(&self, max_len: usize, cap: usize) -> Option<Vec<Word>> {
        let mut out = Vec::new();
        let mut level: Vec<(Word, StateId)> = vec![(Word::new(), self.initial)];
        // only states that can still reach a final state are worth extending
        let finals: Vec<StateId> = self.finals().collect();
        let dist = self.distances_to(&finals);
        for len in 0..=max_len {
            for (w, q) in &level {
                if self.finals[*q] {
                    out.push(w.clone());
                    if out.len() > cap {
                        return None;
                    }
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (w, q) in &level {
                for (a, r) in self.out(*q) {
                    if dist[r].is_some_and(|d| len + 1 + d <= max_len) {
                        let mut w2 = w.clone();
                        w2.push(a);
                        next.push((w2, r));
                    }
                }
                if next.len() > cap.saturating_mul(4).max(1 << 16) {
                    return None;
                }
            }
            level = next;
        }
        Some(out)
    }

    pub fn enumerate_words(&self, max_len: usize) -> Vec<Word> {
        self.enumerate_words_capped(max_len, usize::MAX).expect("uncapped enumeration")
    }

    /// Reversed transition relation, as an NFA-style adjacency in symbol order.
    pub fn reversed_adjacency(&self) -> Vec<Vec<(Symbol, StateId)>> {
        let mut radj = vec![Vec::new(); self.num_states()];
        for q in 0..self.num_states() {
            for (a, r) in self.out(q) {
                radj[r].push((a, q));
            }
        }
        for row in &mut radj {
            row.sort_unstable();
        }
        radj
    }

    /// Automaton for the reversed language.
    pub fn reverse(&self) -> Nfa {
        let mut nfa = Nfa::new(self.num_symbols);
        for _ in 0..self.num_states() {
            nfa.add_state();
        }
        for q in 0..self.num_states() {
            for (a, r) in self.out(q) {
                nfa.add_transition(r, a, q);
            }
        }
        for f in self.finals() {
            nfa.add_initial(f);
        }
        nfa.set_final(self.initial, true);
        nfa
    }

    /// One initial state, one final state, and a single strongly connected
    /// component containing every state, which is nontrivial.
    pub fn is_decomposed(&self) -> bool {
        let sccs = self.sccs();
        self.finals().count() == 1 && sccs.members.len() == 1 && sccs.nontrivial[0]
    }

    /// The language is `w*` for a non-empty `w`: a single simple cycle whose
    /// initial state is its only final state. Returns the cycle word.
    pub fn star_word(&self) -> Option<Word> {
        if !self.is_final(self.initial) || self.finals().count() != 1 {
            return None;
        }
        if (0..self.num_states()).any(|q| self.out_degree(q) != 1) {
            return None;
        }
        let mut w = Word::new();
        let mut q = self.initial;
        loop {
            let (a, r) = self.out(q).next()?;
            w.push(a);
            q = r;
            if q == self.initial {
                break;
            }
            if w.len() > self.num_states() {
                return None;
            }
        }
        (w.len() == self.num_states()).then_some(w)
    }
}

/// Determinize, trim, minimize and renumber.
pub fn canonical_dfa(nfa: &Nfa) -> Result<Dfa, AutomataError> {
    nfa.determinize().canonicalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{dfa_of, w};

    #[test]
    fn canonical_plus_has_three_states() {
        let d = dfa_of("(ab)+", "ab");
        assert_eq!(d.num_states(), 3);
        assert!(d.accepts(&w("abab")));
        assert!(!d.accepts(&w("")));
        assert!(!d.accepts(&w("aba")));
    }

    #[test]
    fn minimization_merges_duplicates() {
        assert_eq!(dfa_of("a|a", "ab"), dfa_of("a", "ab"));
        assert_eq!(dfa_of("(ab)*", "ab"), dfa_of("(abab)*|(ab)(abab)*", "ab"));
    }

    #[test]
    fn empty_language_is_reported() {
        let d = dfa_of("a[bc]", "abc");
        assert_eq!(d.with_finals(&[]).canonicalize(), Err(AutomataError::EmptyLanguage));
    }

    #[test]
    fn connectors() {
        let d = dfa_of("(a(b|c)c)*", "abc");
        let q1 = d.step(d.initial(), 0).unwrap();
        assert_eq!(d.connector(q1, d.initial()).unwrap(), w("bc"));
        assert_eq!(d.connector(q1, q1).unwrap(), w(""));
        let lit = dfa_of("ab", "ab");
        let end = lit.run_from(0, &w("ab")).unwrap();
        assert!(matches!(lit.connector(end, 0), Err(AutomataError::Unreachable { .. })));
    }

    #[test]
    fn enumeration_and_membership() {
        let d = dfa_of("(ab)+", "ab");
        assert_eq!(d.enumerate_words(5), vec![w("ab"), w("abab")]);
        let z = dfa_of("(a(b|c)c)*", "abc");
        assert!(z.accepts(&w("accabc")));
        assert!(!d.accepts(&w("")));
        let all = dfa_of("(a|b)*", "ab").enumerate_words(2);
        assert_eq!(all, vec![w(""), w("a"), w("b"), w("aa"), w("ab"), w("ba"), w("bb")]);
        assert!(dfa_of("(a|b)*", "ab").enumerate_words_capped(10, 100).is_none());
    }

    #[test]
    fn least_words() {
        let d = dfa_of("(ab)*(b|a)b*", "ab");
        assert_eq!(d.least_word_of_length(3).unwrap(), w("aba"));
        assert_eq!(d.shortest_accepted().unwrap(), w("a"));
        assert_eq!(dfa_of("(ab)+", "ab").least_word_of_length(3), None);
    }

    #[test]
    fn star_words_and_decomposition() {
        let d = dfa_of("(abab)*", "ab");
        assert_eq!(d.star_word(), Some(w("abab")));
        assert!(d.is_decomposed());
        assert_eq!(dfa_of("(ab)+", "ab").star_word(), None);
        assert!(!dfa_of("(ab)+", "ab").is_decomposed());
        assert!(dfa_of("(a(b|c)c)*", "abc").is_decomposed());
        assert!(dfa_of("a|aaa", "a").is_finite());
    }

    #[test]
    fn reverse_language() {
        let d = dfa_of("ab(c|a)*", "abc");
        let r = canonical_dfa(&d.reverse()).unwrap();
        for word in d.enumerate_words(5) {
            assert!(r.accepts(&word.reversed()));
        }
        assert!(!r.accepts(&w("ab")));
        assert!(r.accepts(&w("ba")));
    }
}
