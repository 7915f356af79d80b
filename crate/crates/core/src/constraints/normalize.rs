//! Split an instance into normalized disjuncts.
//!
//! Each variable's DFA is cut along its component DAG. Trivial components
//! contribute letters, each visited nontrivial component becomes a fresh
//! variable whose language is the component entered and left at the chosen
//! states. Finite languages therefore turn into plain literals, and every
//! fresh variable is decomposed. Simple-cycle components are further split
//! into a literal and a variable over `w*`.

use std::collections::BTreeMap;

use crate::automata::{Dfa, Sccs, StateId};
use crate::words::{is_factor, Word};

use super::{Assignment, Instance, Term};

#[derive(Clone, Debug)]
pub struct Disjunct {
    pub instance: Instance,
    /// Each original variable as a term over the disjunct's variables.
    pub reconstruction: BTreeMap<String, Term>,
}

impl Disjunct {
    /// Values of the original variables under a model of the disjunct.
    pub fn reconstruct(&self, sigma: &Assignment) -> Option<Assignment> {
        self.reconstruction
            .iter()
            .map(|(x, t)| t.eval(sigma).ok().map(|w| (x.clone(), w)))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum Normalized {
    /// Some variable-free disjunct holds; the assignment is a model of the
    /// input.
    TriviallySat(Assignment),
    Disjuncts(Vec<Disjunct>),
    CapExceeded,
}

enum Piece {
    Lit(Word),
    /// Enter a nontrivial component at the first state, leave at the second.
    Frag(StateId, StateId),
}

struct Walker<'a> {
    dfa: &'a Dfa,
    sccs: Sccs,
    cap: usize,
    out: Vec<Vec<Piece>>,
    overflow: bool,
}

impl Walker<'_> {
    fn emit(&mut self, pieces: &[(bool, Word, StateId, StateId)], tail: Word) {
        if self.out.len() >= self.cap {
            self.overflow = true;
            return;
        }
        let mut alt = Vec::new();
        for (frag, lit, q, e) in pieces {
            if !lit.is_empty() {
                alt.push(Piece::Lit(lit.clone()));
            }
            if *frag {
                alt.push(Piece::Frag(*q, *e));
            }
        }
        if !tail.is_empty() {
            alt.push(Piece::Lit(tail));
        }
        self.out.push(alt);
    }

    fn walk(&mut self, q: StateId, lit: Word, acc: &mut Vec<(bool, Word, StateId, StateId)>) {
        if self.overflow {
            return;
        }
        let dfa = self.dfa;
        if !self.sccs.is_nontrivial_state(q) {
            if dfa.is_final(q) {
                self.emit(acc, lit.clone());
            }
            for (a, r) in dfa.out(q) {
                self.walk(r, lit.concat(&[a]), acc);
            }
            return;
        }
        let members = self.sccs.members[self.sccs.comp[q]].clone();
        for e in members {
            acc.push((true, lit.clone(), q, e));
            if dfa.is_final(e) {
                self.emit(acc, Word::new());
            }
            let exits: Vec<(u32, StateId)> = dfa.out(e).filter(|&(_, r)| !self.sccs.same(e, r)).collect();
            for (a, r) in exits {
                self.walk(r, Word::single(a), acc);
            }
            acc.pop();
        }
    }
}

/// Component of `q` as a simple cycle read from `q`, or `None` if the
/// component branches.
fn simple_cycle(dfa: &Dfa, sccs: &Sccs, q: StateId) -> Option<(Vec<StateId>, Word)> {
    let members = &sccs.members[sccs.comp[q]];
    if members.iter().any(|&p| dfa.out(p).filter(|&(_, r)| sccs.same(p, r)).count() != 1) {
        return None;
    }
    let mut states = vec![q];
    let mut word = Word::new();
    let mut cur = q;
    loop {
        let (a, r) = dfa.out(cur).find(|&(_, r)| sccs.same(cur, r)).unwrap();
        word.push(a);
        if r == q {
            return Some((states, word));
        }
        states.push(r);
        cur = r;
    }
}

/// The alternatives for one variable: a term and the languages of the fresh
/// variables it uses.
type Alternative = (Term, Vec<(String, Dfa)>);

fn alternatives(x: &str, dfa: &Dfa, cap: usize) -> Option<Vec<Alternative>> {
    let mut walker = Walker { dfa, sccs: dfa.sccs(), cap, out: Vec::new(), overflow: false };
    walker.walk(dfa.initial(), Word::new(), &mut Vec::new());
    if walker.overflow {
        return None;
    }
    let sccs = walker.sccs;
    let mut result = Vec::new();
    for (d, alt) in walker.out.into_iter().enumerate() {
        let mut term = Term::new();
        let mut fresh = Vec::new();
        for piece in alt {
            match piece {
                Piece::Lit(w) => term.push_lit(&w),
                Piece::Frag(q, e) => {
                    let name = format!("{x}.{d}.{}", fresh.len());
                    let lang = match simple_cycle(dfa, &sccs, q) {
                        Some((states, cycle)) => {
                            let j = states.iter().position(|&s| s == e).unwrap();
                            term.push_lit(&cycle[..j]);
                            let mut rotated = Word::from(&cycle[j..]);
                            rotated.extend_from(&cycle[..j]);
                            Dfa::star_of(dfa.num_symbols(), &rotated)
                        }
                        None => {
                            let keep: Vec<bool> = (0..dfa.num_states()).map(|p| sccs.same(p, q)).collect();
                            dfa.restrict_states(&keep).with_initial(q).with_finals(&[e])
                        }
                    };
                    let lang = lang.canonicalize().expect("component language is non-empty");
                    term.push_var(&name);
                    fresh.push((name, lang));
                }
            }
        }
        result.push((term, fresh));
    }
    Some(result)
}

/// Equisatisfiable disjunction of normalized instances, in a deterministic
/// order: variables by name, alternatives in depth-first symbol order.
/// More than `cap` disjuncts (or alternatives for one variable) gives
/// `CapExceeded`.
pub fn normalize(inst: &Instance, cap: usize) -> Normalized {
    let vars = inst.vars();
    let mut per_var = Vec::with_capacity(vars.len());
    let mut total: usize = 1;
    for x in &vars {
        let Some(alts) = alternatives(x, inst.lang(x), cap) else {
            return Normalized::CapExceeded;
        };
        total = total.saturating_mul(alts.len());
        if total > cap {
            return Normalized::CapExceeded;
        }
        per_var.push(alts);
    }

    let mut out = Vec::new();
    let mut choice = vec![0usize; vars.len()];
    loop {
        let mut reconstruction = BTreeMap::new();
        let mut langs = BTreeMap::new();
        let mut needle = inst.needle.clone();
        let mut haystack = inst.haystack.clone();
        for (i, x) in vars.iter().enumerate() {
            let (term, fresh) = &per_var[i][choice[i]];
            needle = needle.substitute(x, term);
            haystack = haystack.substitute(x, term);
            reconstruction.insert(x.clone(), term.clone());
            for (y, d) in fresh {
                langs.insert(y.clone(), d.clone());
            }
        }
        if needle.is_ground() && haystack.is_ground() {
            let n = needle.eval(&Assignment::new()).unwrap();
            let h = haystack.eval(&Assignment::new()).unwrap();
            if !is_factor(&n, &h) {
                let model = reconstruction
                    .iter()
                    .map(|(x, t)| (x.clone(), t.eval(&Assignment::new()).unwrap()))
                    .collect();
                return Normalized::TriviallySat(model);
            }
        } else {
            let instance = Instance {
                alphabet: inst.alphabet.clone(),
                needle,
                haystack,
                langs,
                sources: BTreeMap::new(),
            };
            out.push(Disjunct { instance, reconstruction });
        }
        // advance the mixed-radix counter, last variable fastest
        let mut i = vars.len();
        loop {
            if i == 0 {
                return Normalized::Disjuncts(out);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < per_var[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}
