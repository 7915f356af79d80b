use std::collections::HashMap;

use crate::words::{Symbol, Word};

use super::{Dfa, StateId};

/// Transitions and finality of epsilon closures.
pub struct EpsFree {
    pub trans: Vec<Vec<(Symbol, StateId)>>,
    pub finals: Vec<bool>,
    pub initial: Vec<StateId>,
}

/// Nondeterministic automaton with epsilon moves and several initial states.
#[derive(Clone, Debug, Default)]
pub struct Nfa {
    num_symbols: usize,
    trans: Vec<Vec<(Symbol, StateId)>>,
    eps: Vec<Vec<StateId>>,
    initial: Vec<StateId>,
    finals: Vec<bool>,
}

impl Nfa {
    pub fn new(num_symbols: usize) -> Nfa {
        Nfa { num_symbols, ..Default::default() }
    }

    pub fn from_dfa(dfa: &Dfa) -> Nfa {
        let mut nfa = Nfa::new(dfa.num_symbols());
        for _ in 0..dfa.num_states() {
            nfa.add_state();
        }
        for q in 0..dfa.num_states() {
            for (a, r) in dfa.out(q) {
                nfa.add_transition(q, a, r);
            }
            nfa.set_final(q, dfa.is_final(q));
        }
        nfa.add_initial(dfa.initial());
        nfa
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn add_state(&mut self) -> StateId {
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.finals.push(false);
        self.trans.len() - 1
    }

    pub fn add_transition(&mut self, from: StateId, a: Symbol, to: StateId) {
        assert!((a as usize) < self.num_symbols, "symbol {a} out of range");
        self.trans[from].push((a, to));
    }

    pub fn add_epsilon(&mut self, from: StateId, to: StateId) {
        self.eps[from].push(to);
    }

    pub fn add_initial(&mut self, q: StateId) {
        if !self.initial.contains(&q) {
            self.initial.push(q);
        }
    }

    pub fn set_final(&mut self, q: StateId, f: bool) {
        self.finals[q] = f;
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial
    }

    pub fn transitions(&self, q: StateId) -> &[(Symbol, StateId)] {
        &self.trans[q]
    }

    pub fn epsilons(&self, q: StateId) -> &[StateId] {
        &self.eps[q]
    }

    /// Copy all states of `other` into `self`; returns the offset of the copy.
    /// Initial and final markings of `other` are not transferred.
    pub fn embed(&mut self, other: &Nfa) -> StateId {
        assert_eq!(self.num_symbols, other.num_symbols);
        let off = self.num_states();
        for q in 0..other.num_states() {
            self.trans.push(other.trans[q].iter().map(|&(a, r)| (a, r + off)).collect());
            self.eps.push(other.eps[q].iter().map(|&r| r + off).collect());
            self.finals.push(false);
        }
        off
    }

    fn close(&self, set: &mut Vec<StateId>, mark: &mut [bool]) {
        let mut i = 0;
        while i < set.len() {
            let q = set[i];
            i += 1;
            for &r in &self.eps[q] {
                if !mark[r] {
                    mark[r] = true;
                    set.push(r);
                }
            }
        }
        for &q in set.iter() {
            mark[q] = false;
        }
        set.sort_unstable();
    }

    /// Subset construction over reachable non-empty subsets.
    pub fn determinize(&self) -> Dfa {
        let n = self.num_states();
        let mut mark = vec![false; n];
        let mut start: Vec<StateId> = self.initial.clone();
        start.sort_unstable();
        start.dedup();
        for &q in &start {
            mark[q] = true;
        }
        self.close(&mut start, &mut mark);

        let mut ids: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut subsets = vec![start.clone()];
        ids.insert(start, 0);
        let mut delta: Vec<Vec<Option<StateId>>> = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            let mut targets: Vec<Vec<StateId>> = vec![Vec::new(); self.num_symbols];
            for &q in &subsets[i] {
                for &(a, r) in &self.trans[q] {
                    targets[a as usize].push(r);
                }
            }
            let mut row = vec![None; self.num_symbols];
            for (a, mut t) in targets.into_iter().enumerate() {
                if t.is_empty() {
                    continue;
                }
                t.sort_unstable();
                t.dedup();
                for &q in &t {
                    mark[q] = true;
                }
                self.close(&mut t, &mut mark);
                t.dedup();
                let next = ids.len();
                let id = *ids.entry(t.clone()).or_insert_with(|| {
                    subsets.push(t);
                    next
                });
                row[a] = Some(id);
            }
            delta.push(row);
            i += 1;
        }
        let finals = subsets.iter().map(|s| s.iter().any(|&q| self.finals[q])).collect();
        Dfa::from_parts(self.num_symbols, delta, 0, finals)
    }

    pub fn accepts(&self, w: &[Symbol]) -> bool {
        let n = self.num_states();
        let mut mark = vec![false; n];
        let mut cur: Vec<StateId> = self.initial.clone();
        cur.sort_unstable();
        cur.dedup();
        for &q in &cur {
            mark[q] = true;
        }
        self.close(&mut cur, &mut mark);
        for &a in w {
            let mut next: Vec<StateId> = Vec::new();
            for &q in &cur {
                for &(b, r) in &self.trans[q] {
                    if b == a && !mark[r] {
                        mark[r] = true;
                        next.push(r);
                    }
                }
            }
            self.close(&mut next, &mut mark);
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.iter().any(|&q| self.finals[q])
    }

    /// Epsilon-free view: state `q` gets the transitions and finality of its
    /// epsilon closure.
    pub fn eps_free(&self) -> EpsFree {
        let n = self.num_states();
        let mut stamp = vec![usize::MAX; n];
        let mut trans = Vec::with_capacity(n);
        let mut finals = vec![false; n];
        for q in 0..n {
            let mut stack = vec![q];
            stamp[q] = q;
            let mut out: Vec<(Symbol, StateId)> = Vec::new();
            while let Some(p) = stack.pop() {
                finals[q] |= self.finals[p];
                out.extend_from_slice(&self.trans[p]);
                for &r in &self.eps[p] {
                    if stamp[r] != q {
                        stamp[r] = q;
                        stack.push(r);
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            trans.push(out);
        }
        let mut initial = self.initial.clone();
        initial.sort_unstable();
        initial.dedup();
        EpsFree { trans, finals, initial }
    }

    /// Lexicographically least accepted word of length exactly `len`.
    pub fn least_word_of_length(&self, len: usize) -> Option<Word> {
        let ef = self.eps_free();
        let n = ef.trans.len();
        // can[k][q]: a word of length k leads from q to acceptance
        let mut can: Vec<Vec<bool>> = vec![ef.finals.clone()];
        for k in 1..=len {
            let prev = &can[k - 1];
            let row = (0..n).map(|q| ef.trans[q].iter().any(|&(_, r)| prev[r])).collect();
            can.push(row);
        }
        let mut cur: Vec<StateId> = ef.initial.iter().copied().filter(|&q| can[len][q]).collect();
        if cur.is_empty() {
            return None;
        }
        let mut w = Word::new();
        for k in (0..len).rev() {
            let a = cur
                .iter()
                .flat_map(|&q| ef.trans[q].iter())
                .filter(|&&(_, r)| can[k][r])
                .map(|&(a, _)| a)
                .min()?;
            let mut next: Vec<StateId> = cur
                .iter()
                .flat_map(|&q| ef.trans[q].iter())
                .filter(|&&(b, r)| b == a && can[k][r])
                .map(|&(_, r)| r)
                .collect();
            next.sort_unstable();
            next.dedup();
            w.push(a);
            cur = next;
        }
        Some(w)
    }

    /// Synchronous product with a DFA (epsilon moves of `self` kept).
    pub fn intersect_dfa(&self, dfa: &Dfa) -> Nfa {
        let m = dfa.num_states();
        let id = |q: StateId, d: StateId| q * m + d;
        let mut out = Nfa::new(self.num_symbols);
        for _ in 0..self.num_states() * m {
            out.add_state();
        }
        for q in 0..self.num_states() {
            for d in 0..m {
                for &(a, r) in &self.trans[q] {
                    if let Some(e) = dfa.step(d, a) {
                        out.add_transition(id(q, d), a, id(r, e));
                    }
                }
                for &r in &self.eps[q] {
                    out.add_epsilon(id(q, d), id(r, d));
                }
                out.set_final(id(q, d), self.finals[q] && dfa.is_final(d));
            }
        }
        for &q in &self.initial {
            out.add_initial(id(q, dfa.initial()));
        }
        out
    }
}
