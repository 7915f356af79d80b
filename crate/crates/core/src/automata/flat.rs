use crate::alphabet::Alphabet;
use crate::words::{Symbol, Word};

use super::{AutomataError, Dfa, Nfa, Sccs, StateId};

/// `literals[0] · loops[0]* · literals[1] · … · loops[m-1]* · literals[m]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatPattern {
    literals: Vec<Word>,
    loops: Vec<Word>,
}

impl FlatPattern {
    pub fn new(literals: Vec<Word>, loops: Vec<Word>) -> FlatPattern {
        assert_eq!(literals.len(), loops.len() + 1, "literals must surround loops");
        assert!(loops.iter().all(|l| !l.is_empty()), "loop words are non-empty");
        FlatPattern { literals, loops }
    }

    pub fn word(w: Word) -> FlatPattern {
        FlatPattern { literals: vec![w], loops: Vec::new() }
    }

    /// `w*`
    pub fn star(w: Word) -> FlatPattern {
        FlatPattern::new(vec![Word::new(), Word::new()], vec![w])
    }

    pub fn literals(&self) -> &[Word] {
        &self.literals
    }

    pub fn loops(&self) -> &[Word] {
        &self.loops
    }

    pub fn is_finite(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.literals.iter().map(|l| l.len()).sum()
    }

    /// The word obtained by iterating loop `i` `counts[i]` times.
    pub fn instantiate(&self, counts: &[usize]) -> Word {
        assert_eq!(counts.len(), self.loops.len());
        let mut w = self.literals[0].clone();
        for (i, l) in self.loops.iter().enumerate() {
            for _ in 0..counts[i] {
                w.extend_from(l);
            }
            w.extend_from(&self.literals[i + 1]);
        }
        w
    }

    /// Length of `instantiate(counts)` without building it.
    pub fn len_with(&self, counts: &[usize]) -> usize {
        self.min_len() + self.loops.iter().zip(counts).map(|(l, &c)| l.len() * c).sum::<usize>()
    }

    pub fn prepend(&self, w: &[Symbol]) -> FlatPattern {
        let mut p = self.clone();
        let mut head = Word::from(w);
        head.extend_from(&p.literals[0]);
        p.literals[0] = head;
        p
    }

    pub fn append(&self, w: &[Symbol]) -> FlatPattern {
        let mut p = self.clone();
        p.literals.last_mut().unwrap().extend_from(w);
        p
    }

    pub fn concat(&self, other: &FlatPattern) -> FlatPattern {
        let mut literals = self.literals.clone();
        literals.last_mut().unwrap().extend_from(&other.literals[0]);
        literals.extend(other.literals[1..].iter().cloned());
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        FlatPattern { literals, loops }
    }

    pub fn reversed(&self) -> FlatPattern {
        FlatPattern {
            literals: self.literals.iter().rev().map(|w| w.reversed()).collect(),
            loops: self.loops.iter().rev().map(|w| w.reversed()).collect(),
        }
    }

    /// All words of the pattern with length at most `max_len`.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut counts = vec![0; self.loops.len()];
        self.collect_words(0, &mut counts, max_len, &mut out);
        out.sort_by(|a, b| a.shortlex_cmp(b));
        out.dedup();
        out
    }

    fn collect_words(&self, i: usize, counts: &mut Vec<usize>, max_len: usize, out: &mut Vec<Word>) {
        if self.len_with(counts) > max_len {
            return;
        }
        if i == self.loops.len() {
            out.push(self.instantiate(counts));
            return;
        }
        loop {
            if self.len_with(counts) > max_len {
                break;
            }
            self.collect_words(i + 1, counts, max_len, out);
            counts[i] += 1;
        }
        counts[i] = 0;
    }

    /// Append this pattern as a chain of states from `start`; returns the end
    /// state.
    pub fn add_to_nfa(&self, nfa: &mut Nfa, start: StateId) -> StateId {
        let chain = |nfa: &mut Nfa, from: StateId, w: &[Symbol]| {
            let mut cur = from;
            for &a in w {
                let next = nfa.add_state();
                nfa.add_transition(cur, a, next);
                cur = next;
            }
            cur
        };
        let mut cur = chain(nfa, start, &self.literals[0]);
        for (i, l) in self.loops.iter().enumerate() {
            // a cycle through `hub` spelling the loop word
            let hub = nfa.add_state();
            nfa.add_epsilon(cur, hub);
            let mut q = hub;
            for (j, &a) in l.iter().enumerate() {
                let next = if j + 1 == l.len() { hub } else { nfa.add_state() };
                nfa.add_transition(q, a, next);
                q = next;
            }
            cur = chain(nfa, hub, &self.literals[i + 1]);
        }
        cur
    }

    pub fn to_nfa(&self, num_symbols: usize) -> Nfa {
        patterns_to_nfa(std::slice::from_ref(self), num_symbols)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut s = alphabet.render(&self.literals[0]);
        for (i, l) in self.loops.iter().enumerate() {
            s.push('(');
            s.push_str(&alphabet.render(l));
            s.push_str(")*");
            s.push_str(&alphabet.render(&self.literals[i + 1]));
        }
        s
    }
}

/// NFA for a finite union of patterns.
pub fn patterns_to_nfa(patterns: &[FlatPattern], num_symbols: usize) -> Nfa {
    let mut nfa = Nfa::new(num_symbols);
    let start = nfa.add_state();
    nfa.add_initial(start);
    for p in patterns {
        let s = nfa.add_state();
        nfa.add_epsilon(start, s);
        let end = p.add_to_nfa(&mut nfa, s);
        nfa.set_final(end, true);
    }
    nfa
}

/// Certificate of non-flatness: `p {u, v}* s` is contained in the language,
/// and `loop_state` reads both `u` and `v` back to itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Butterfly {
    pub p: Word,
    pub u: Word,
    pub v: Word,
    pub s: Word,
    pub loop_state: StateId,
}

impl Butterfly {
    pub fn validate(&self, dfa: &Dfa) -> bool {
        let q = self.loop_state;
        !self.u.is_empty()
            && !self.v.is_empty()
            && self.u[0] != self.v[0]
            && dfa.run_from(dfa.initial(), &self.p) == Some(q)
            && dfa.run_from(q, &self.u) == Some(q)
            && dfa.run_from(q, &self.v) == Some(q)
            && dfa.run_from(q, &self.s).is_some_and(|f| dfa.is_final(f))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flatness {
    Flat(Vec<FlatPattern>),
    NonFlat(Butterfly),
}

/// States of a nontrivial component with at least two successors inside it.
fn branching_states(dfa: &Dfa, sccs: &Sccs) -> Vec<StateId> {
    (0..dfa.num_states())
        .filter(|&q| sccs.is_nontrivial_state(q))
        .filter(|&q| dfa.out(q).filter(|&(_, r)| sccs.same(q, r)).count() >= 2)
        .collect()
}

/// Flat iff every nontrivial component is a simple cycle. Flat languages are
/// decomposed into one pattern per path through the component DAG and choice
/// of entry and exit states on each cycle.
pub fn classify_flatness(dfa: &Dfa) -> Flatness {
    let sccs = dfa.sccs();
    if !branching_states(dfa, &sccs).is_empty() {
        return Flatness::NonFlat(butterfly_at(dfa).expect("branching state exists"));
    }
    let mut out = Vec::new();
    let mut literals = Vec::new();
    let mut loops = Vec::new();
    walk(dfa, &sccs, dfa.initial(), Word::new(), &mut literals, &mut loops, &mut out);
    out.sort();
    out.dedup();
    Flatness::Flat(out)
}

fn walk(
    dfa: &Dfa,
    sccs: &Sccs,
    q: StateId,
    lit: Word,
    literals: &mut Vec<Word>,
    loops: &mut Vec<Word>,
    out: &mut Vec<FlatPattern>,
) {
    if !sccs.is_nontrivial_state(q) {
        if dfa.is_final(q) {
            let mut ls = literals.clone();
            ls.push(lit.clone());
            out.push(FlatPattern::new(ls, loops.clone()));
        }
        for (a, r) in dfa.out(q) {
            walk(dfa, sccs, r, lit.concat(&[a]), literals, loops, out);
        }
        return;
    }
    // the unique cycle of this component, read from the entry state
    let mut cycle = Word::new();
    let mut states = vec![q];
    let mut cur = q;
    loop {
        let (a, r) = dfa.out(cur).find(|&(_, r)| sccs.same(cur, r)).unwrap();
        cycle.push(a);
        if r == q {
            break;
        }
        states.push(r);
        cur = r;
    }
    literals.push(lit);
    loops.push(cycle.clone());
    for (j, &e) in states.iter().enumerate() {
        let partial = Word::from(&cycle[..j]);
        if dfa.is_final(e) {
            let mut ls = literals.clone();
            ls.push(partial.clone());
            out.push(FlatPattern::new(ls, loops.clone()));
        }
        for (a, r) in dfa.out(e).filter(|&(_, r)| !sccs.same(e, r)) {
            walk(dfa, sccs, r, partial.concat(&[a]), literals, loops, out);
        }
    }
    literals.pop();
    loops.pop();
}

/// The canonical butterfly of a non-flat DFA.
pub fn butterfly_at(dfa: &Dfa) -> Result<Butterfly, AutomataError> {
    let sccs = dfa.sccs();
    let loop_state = *branching_states(dfa, &sccs).first().ok_or(AutomataError::FlatLanguage)?;
    let mut letters = dfa.out(loop_state).filter(|&(_, r)| sccs.same(loop_state, r));
    let (a, ra) = letters.next().unwrap();
    let (b, rb) = letters.next().unwrap();
    let u = least_cycle(dfa, &sccs, loop_state, a, ra);
    let v = least_cycle(dfa, &sccs, loop_state, b, rb);
    let p = dfa.connector(dfa.initial(), loop_state)?;
    let reach = reachable(dfa, loop_state);
    let f = dfa.finals().find(|&f| reach[f]).ok_or(AutomataError::EmptyLanguage)?;
    let s = dfa.connector(loop_state, f)?;
    Ok(Butterfly { p, u, v, s, loop_state })
}

fn reachable(dfa: &Dfa, from: StateId) -> Vec<bool> {
    let mut seen = vec![false; dfa.num_states()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(q) = stack.pop() {
        for (_, r) in dfa.out(q) {
            if !seen[r] {
                seen[r] = true;
                stack.push(r);
            }
        }
    }
    seen
}

/// Lexicographically least simple cycle `q -a-> first -> … -> q` inside the
/// component of `q`. Cycle labels through a fixed state of a DFA are prefix
/// free, so depth-first search in symbol order finds the least one first.
fn least_cycle(dfa: &Dfa, sccs: &Sccs, q: StateId, a: Symbol, first: StateId) -> Word {
    let mut word = Word::single(a);
    if first == q {
        return word;
    }
    let mut on_path = vec![false; dfa.num_states()];
    on_path[q] = true;
    on_path[first] = true;
    fn dfs(
        dfa: &Dfa,
        sccs: &Sccs,
        target: StateId,
        cur: StateId,
        on_path: &mut Vec<bool>,
        word: &mut Word,
    ) -> bool {
        for (a, r) in dfa.out(cur) {
            if !sccs.same(cur, r) {
                continue;
            }
            if r == target {
                word.push(a);
                return true;
            }
            if on_path[r] {
                continue;
            }
            on_path[r] = true;
            word.push(a);
            if dfs(dfa, sccs, target, r, on_path, word) {
                return true;
            }
            word.pop_last();
            on_path[r] = false;
        }
        false
    }
    let found = dfs(dfa, sccs, q, first, &mut on_path, &mut word);
    assert!(found, "component is strongly connected");
    word
}

/// Patterns denoting exactly the words of `p` of length at least `n`. Loops
/// are unrolled by minimal iteration vectors, the unrolled copies merged into
/// the preceding literal.
pub fn restrict_min_length(p: &FlatPattern, n: usize) -> Vec<FlatPattern> {
    let base = p.min_len();
    if base >= n {
        return vec![p.clone()];
    }
    if p.loops.is_empty() {
        return Vec::new();
    }
    let deficit = n - base;
    let caps: Vec<usize> = p.loops.iter().map(|l| deficit.div_ceil(l.len())).collect();
    let lens: Vec<usize> = p.loops.iter().map(|l| l.len()).collect();
    let mut minimal = Vec::new();
    let mut counts = vec![0; lens.len()];
    loop {
        let total: usize = counts.iter().zip(&lens).map(|(c, l)| c * l).sum();
        // minimal: enough, and dropping one iteration of any loop is not
        if total >= deficit && counts.iter().zip(&lens).all(|(&c, &l)| c == 0 || total - l < deficit) {
            minimal.push(counts.clone());
        }
        let mut i = 0;
        loop {
            if i == counts.len() {
                return finish(p, minimal);
            }
            if counts[i] < caps[i] {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

fn finish(p: &FlatPattern, minimal: Vec<Vec<usize>>) -> Vec<FlatPattern> {
    let mut out: Vec<FlatPattern> = minimal
        .into_iter()
        .map(|counts| {
            let mut q = p.clone();
            for (i, &c) in counts.iter().enumerate() {
                let unrolled = q.loops[i].pow(c);
                q.literals[i].extend_from(&unrolled);
            }
            q
        })
        .collect();
    out.sort();
    out
}
