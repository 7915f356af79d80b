//! Flat underapproximation of non-flat haystack variables.
//!
//! The prefix tree of a decomposed variable `z` has the choice states of its
//! DFA as vertices; an edge follows one outgoing transition and then the
//! deterministic continuation up to the next choice state. The suffix tree is
//! the same construction on reversed transitions, rooted at the final state.
//! Words of `L_z` are approximated by short words, by Γ-expansions of
//! bounded tree paths glued around a long power of `γ_z`, and by words that
//! stay inside the factors of a needle variable's base.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::automata::{canonical_dfa, classify_flatness, AutomataError, Butterfly, Dfa, FlatPattern, Flatness, Nfa, StateId};
use crate::constraints::{gamma_z_for, Assignment, Bounds, ConstraintError, Instance, TermItem};
use crate::flatsolver::{FlatLanguage, GlueProduct};
use crate::words::{Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("enumeration cap exceeded")]
    CapExceeded,
    #[error("context is not a {0} of the language")]
    BadContext(&'static str),
    #[error("factor language of a base is not flat")]
    NonFlatFactors,
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Pref,
    Suf,
}

/// A decomposed non-flat variable with its butterfly and `γ_z`.
#[derive(Clone, Debug)]
pub struct GammaCtx {
    pub var: String,
    pub dfa: Dfa,
    pub butterfly: Butterfly,
    pub gamma: Word,
    radj: Vec<Vec<(Symbol, StateId)>>,
}

impl GammaCtx {
    pub fn new(var: &str, dfa: Dfa, butterfly: Butterfly, gamma: Word) -> GammaCtx {
        let radj = dfa.reversed_adjacency();
        GammaCtx { var: var.to_string(), dfa, butterfly, gamma, radj }
    }

    pub fn from_instance(inst: &Instance, z: &str) -> Result<GammaCtx, GammaError> {
        let (b, gamma) = gamma_z_for(inst, z)?;
        Ok(GammaCtx::new(z, inst.lang(z).clone(), b, gamma))
    }

    fn q_uv(&self) -> StateId {
        self.butterfly.loop_state
    }

    fn final_state(&self) -> StateId {
        self.dfa.finals().next().expect("decomposed languages have a final state")
    }

    fn root(&self, side: Side) -> StateId {
        match side {
            Side::Pref => self.dfa.initial(),
            Side::Suf => self.final_state(),
        }
    }

    /// Tree-direction successors of `q`.
    fn moves(&self, side: Side, q: StateId) -> Vec<(Symbol, StateId)> {
        match side {
            Side::Pref => self.dfa.out(q).collect(),
            Side::Suf => self.radj[q].clone(),
        }
    }

    pub fn is_choice(&self, side: Side, q: StateId) -> bool {
        self.moves(side, q).len() >= 2
    }

    /// Edges leaving the tree vertex at `q`, ordered by their first letter in
    /// tree direction.
    pub fn edges(&self, side: Side, q: StateId) -> Vec<TreeEdge> {
        let mut out = Vec::new();
        'next: for (a, r) in self.moves(side, q) {
            let mut read = vec![a];
            let mut cur = r;
            loop {
                let m = self.moves(side, cur);
                match m.len() {
                    0 => continue 'next,
                    1 if read.len() <= self.dfa.num_states() => {
                        read.push(m[0].0);
                        cur = m[0].1;
                    }
                    1 => continue 'next,
                    _ => break,
                }
            }
            if side == Side::Suf {
                read.reverse();
            }
            out.push(TreeEdge { from: q, label: Word::from_vec(read), to: cur });
        }
        out
    }

    /// Tree vertices: the root and every choice state.
    fn vertices(&self, side: Side) -> Vec<StateId> {
        let root = self.root(side);
        let mut vs: Vec<StateId> =
            (0..self.dfa.num_states()).filter(|&q| q == root || self.is_choice(side, q)).collect();
        vs.sort_by_key(|&q| (q != root, q));
        vs
    }
}

/// A tree edge. `label` is in reading order: on the prefix side the DFA reads
/// it from `from` to `to`, on the suffix side from `to` to `from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub from: StateId,
    pub label: Word,
    pub to: StateId,
}

/// A root path whose label first reaches the bound on its last edge.
/// `label` is the prefix (suffix) word it spells, `end` its last vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachingPath {
    pub vertices: Vec<StateId>,
    pub label: Word,
}

impl ReachingPath {
    pub fn end(&self) -> StateId {
        *self.vertices.last().unwrap()
    }
}

/// All `bound`-reaching paths in depth-first order, or `CapExceeded` once
/// more than `cap` are found.
pub fn reaching_paths(ctx: &GammaCtx, side: Side, bound: usize, cap: usize) -> Result<Vec<ReachingPath>, GammaError> {
    let root = ctx.root(side);
    if bound == 0 {
        return Ok(vec![ReachingPath { vertices: vec![root], label: Word::new() }]);
    }
    let edges: HashMap<StateId, Vec<TreeEdge>> =
        ctx.vertices(side).into_iter().map(|q| (q, ctx.edges(side, q))).collect();
    let mut out = Vec::new();
    let mut stack: Vec<&TreeEdge> = Vec::new();
    fn dfs<'e>(
        edges: &'e HashMap<StateId, Vec<TreeEdge>>,
        side: Side,
        root: StateId,
        q: StateId,
        len: usize,
        bound: usize,
        cap: usize,
        stack: &mut Vec<&'e TreeEdge>,
        out: &mut Vec<ReachingPath>,
    ) -> Result<(), GammaError> {
        for e in &edges[&q] {
            stack.push(e);
            let l = len + e.label.len();
            if l >= bound {
                if out.len() == cap {
                    return Err(GammaError::CapExceeded);
                }
                let mut vertices = vec![root];
                vertices.extend(stack.iter().map(|e| e.to));
                let mut label = Word::new();
                match side {
                    Side::Pref => stack.iter().for_each(|e| label.extend_from(&e.label)),
                    Side::Suf => stack.iter().rev().for_each(|e| label.extend_from(&e.label)),
                }
                out.push(ReachingPath { vertices, label });
            } else {
                dfs(edges, side, root, e.to, l, bound, cap, stack, out)?;
            }
            stack.pop();
        }
        Ok(())
    }
    dfs(&edges, side, root, root, 0, bound, cap, &mut stack, &mut out)?;
    Ok(out)
}

/// Prefix side: `ctx·con(q, q_uv)` with `q` the state reached by the context.
fn pref_head(ctx: &GammaCtx, context: &[Symbol], q: StateId) -> Result<Word, GammaError> {
    Ok(Word::from(context).concat(&ctx.dfa.connector(q, ctx.q_uv())?))
}

/// Suffix side: `con(q_uv, q)·ctx` with `q` a state reading the context to the
/// final state.
fn suf_tail(ctx: &GammaCtx, context: &[Symbol], q: StateId) -> Result<Word, GammaError> {
    Ok(ctx.dfa.connector(ctx.q_uv(), q)?.concat(context))
}

/// Γ-expansion of a prefix (`ctx·con·γ^k`) or suffix (`γ^k·con·ctx`). On the
/// suffix side the start state is the one with the shortest connector from
/// the loop state, ties broken by state number.
pub fn gamma_expand(ctx: &GammaCtx, side: Side, context: &[Symbol], k: usize) -> Result<Word, GammaError> {
    let g = ctx.gamma.pow(k);
    match side {
        Side::Pref => {
            let q = ctx.dfa.run_from(ctx.dfa.initial(), context).ok_or(GammaError::BadContext("prefix"))?;
            Ok(pref_head(ctx, context, q)?.concat(&g))
        }
        Side::Suf => {
            let q = (0..ctx.dfa.num_states())
                .filter(|&q| ctx.dfa.run_from(q, context).is_some_and(|f| ctx.dfa.is_final(f)))
                .filter_map(|q| ctx.dfa.connector(ctx.q_uv(), q).ok().map(|c| (c.len(), q)))
                .min()
                .ok_or(GammaError::BadContext("suffix"))?
                .1;
            Ok(g.concat(&suf_tail(ctx, context, q)?))
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GammaCaps {
    pub path_cap: usize,
    pub pattern_cap: usize,
}

impl Default for GammaCaps {
    fn default() -> Self {
        GammaCaps { path_cap: 100_000, pattern_cap: 50_000 }
    }
}

/// One side of the underapproximation: complete words of `L_z` and partial
/// patterns that meet `γ_z^G` at the loop state (heads on the prefix side,
/// tails on the suffix side).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GlueHalf {
    pub complete: Vec<FlatPattern>,
    pub partial: Vec<FlatPattern>,
}

/// Words of `L` that are factors of `α⁺`, as flat patterns.
fn factors_within(alpha: &[Symbol], lang: &Dfa) -> Result<Vec<FlatPattern>, GammaError> {
    let mut cyc = Nfa::new(lang.num_symbols());
    let n = alpha.len();
    for _ in 0..n {
        cyc.add_state();
    }
    for (i, &a) in alpha.iter().enumerate() {
        cyc.add_transition(i, a, (i + 1) % n);
        cyc.add_initial(i);
        cyc.set_final(i, true);
    }
    match canonical_dfa(&cyc.intersect_dfa(lang)) {
        Err(AutomataError::EmptyLanguage) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
        Ok(d) => match classify_flatness(&d) {
            Flatness::Flat(ps) => Ok(ps),
            Flatness::NonFlat(_) => Err(GammaError::NonFlatFactors),
        },
    }
}

/// The needle variable nearest the glued side and the literal block
/// between it and the needle's end (start).
fn outer_needle_var(inst: &Instance, side: Side) -> Option<(String, Word)> {
    let items = inst.needle.items();
    let pos = match side {
        Side::Pref => items.iter().rposition(|i| matches!(i, TermItem::Var(_)))?,
        Side::Suf => items.iter().position(|i| matches!(i, TermItem::Var(_)))?,
    };
    let TermItem::Var(x) = &items[pos] else { unreachable!() };
    let block = match side {
        Side::Pref => &items[pos + 1..],
        Side::Suf => &items[..pos],
    };
    let mut lit = Word::new();
    for i in block {
        if let TermItem::Lit(w) = i {
            lit.extend_from(w);
        }
    }
    Some((x.clone(), lit))
}

/// `t = α^m·p·W` with `m` maximal and `p` the longest common prefix of `α`
/// and the rest; returns `W`.
fn deviation(t: &[Symbol], alpha: &[Symbol]) -> Word {
    let mut rest = t;
    while rest.starts_with(alpha) && !alpha.is_empty() {
        rest = &rest[alpha.len()..];
    }
    let p = rest.iter().zip(alpha).take_while(|(a, b)| a == b).count();
    Word::from(&rest[p..])
}

fn push_capped(out: &mut Vec<FlatPattern>, p: FlatPattern, cap: usize) -> Result<(), GammaError> {
    if out.len() >= cap {
        return Err(GammaError::CapExceeded);
    }
    out.push(p);
    Ok(())
}

/// Prefix or suffix half of `L'_z` for the instance after guessing. `bases`
/// maps flat needle variables to their bases.
pub fn underapprox_half(
    inst: &Instance,
    ctx: &GammaCtx,
    side: Side,
    bounds: &Bounds,
    bases: &BTreeMap<String, Word>,
    caps: &GammaCaps,
) -> Result<GlueHalf, GammaError> {
    let dfa = &ctx.dfa;
    let cap = caps.pattern_cap;
    let mut half = GlueHalf::default();

    // short words
    let short = dfa
        .enumerate_words_capped((bounds.k0 + bounds.p_aut).saturating_sub(1), cap)
        .ok_or(GammaError::CapExceeded)?;
    for w in short {
        push_capped(&mut half.complete, FlatPattern::word(w), cap)?;
    }

    // Γ-expansions of bounded tree paths
    for path in reaching_paths(ctx, side, bounds.k0, caps.path_cap)? {
        let w = match side {
            Side::Pref => pref_head(ctx, &path.label, path.end())?,
            Side::Suf => suf_tail(ctx, &path.label, path.end())?,
        };
        push_capped(&mut half.partial, FlatPattern::word(w), cap)?;
    }

    if let Some((x, block)) = outer_needle_var(inst, side) {
        if let Some(alpha) = bases.get(&x) {
            // values that never leave the factors of α⁺
            for p in factors_within(alpha, dfa)? {
                push_capped(&mut half.complete, p, cap)?;
            }
            // values that leave them along a tree edge matching the deviation
            let w = match side {
                Side::Pref => deviation(&block, alpha),
                Side::Suf => deviation(&block.reversed(), &Word::from(alpha.as_ref()).reversed()).reversed(),
            };
            for v in ctx.vertices(side) {
                for e in ctx.edges(side, v) {
                    match side {
                        Side::Pref if w.is_empty() || e.label.starts_with(&w) => {
                            let tail = e.label.concat(&dfa.connector(e.to, ctx.q_uv())?);
                            for p in factors_within(alpha, &dfa.with_finals(&[e.from]))? {
                                push_capped(&mut half.partial, p.append(&tail), cap)?;
                            }
                        }
                        Side::Suf if w.is_empty() || e.label.ends_with(&w) => {
                            let head = dfa.connector(ctx.q_uv(), e.to)?.concat(&e.label);
                            for p in factors_within(alpha, &dfa.with_initial(e.from))? {
                                push_capped(&mut half.partial, p.prepend(&head), cap)?;
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    for ps in [&mut half.complete, &mut half.partial] {
        ps.sort();
        ps.dedup();
    }
    Ok(half)
}

/// `L'_z`: complete words of both halves plus `heads · γ_z^g · tails`.
pub fn glue(pref: &GlueHalf, suf: &GlueHalf, ctx: &GammaCtx, g: usize) -> FlatLanguage {
    let mut patterns: Vec<FlatPattern> = pref.complete.iter().chain(&suf.complete).cloned().collect();
    patterns.sort();
    patterns.dedup();
    let mut lang = FlatLanguage::from_patterns(patterns);
    if !pref.partial.is_empty() && !suf.partial.is_empty() {
        lang.products.push(GlueProduct {
            heads: pref.partial.clone(),
            middle: ctx.gamma.pow(g),
            tails: suf.partial.clone(),
        });
    }
    lang
}

/// Whether `prefix` as a value of `z`, followed by a fresh separator, already
/// makes the needle a factor of the haystack under `partial`.
pub fn is_dead_end(inst: &Instance, partial: &Assignment, z: &str, prefix: &[Symbol]) -> Result<bool, ConstraintError> {
    let sep = inst.alphabet.size() as Symbol;
    let spell = |t: &crate::constraints::Term| -> Result<Word, ConstraintError> {
        let mut w = Word::new();
        for item in t.items() {
            match item {
                TermItem::Lit(l) => w.extend_from(l),
                TermItem::Var(x) if x == z => {
                    w.extend_from(prefix);
                    w.push(sep);
                }
                TermItem::Var(x) => w.extend_from(partial.get(x).ok_or_else(|| ConstraintError::Unassigned(x.clone()))?),
            }
        }
        Ok(w)
    };
    Ok(crate::words::is_factor(&spell(&inst.needle)?, &spell(&inst.haystack)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dfa_of;
    use crate::automata::butterfly_at;
    use crate::constraints::tests::running_example;
    use crate::testutil::w;
    use crate::words::build_gamma_z;

    fn ctx_of(re: &str, letters: &str, max_base: usize) -> GammaCtx {
        let d = dfa_of(re, letters);
        let b = butterfly_at(&d).unwrap();
        let g = build_gamma_z(&b.u, &b.v, max_base).unwrap();
        GammaCtx::new("z", d, b, g)
    }

    #[test]
    fn all_paths_over_two_letters() {
        let c = ctx_of("(a|b)*", "ab", 0);
        let ps = reaching_paths(&c, Side::Pref, 3, 1000).unwrap();
        let labels: Vec<Word> = ps.iter().map(|p| p.label.clone()).collect();
        let expected: Vec<Word> = ["aaa", "aab", "aba", "abb", "baa", "bab", "bba", "bbb"].map(w).to_vec();
        assert_eq!(labels, expected);
        assert_eq!(reaching_paths(&c, Side::Suf, 3, 1000).unwrap().len(), 8);
        assert_eq!(reaching_paths(&c, Side::Pref, 3, 7), Err(GammaError::CapExceeded));
    }

    #[test]
    fn tree_edges_skip_deterministic_stretches() {
        let c = ctx_of("(a(b|c)c)*", "abc", 0);
        let ps = reaching_paths(&c, Side::Pref, 7, 1000).unwrap();
        let labels: Vec<Word> = ps.iter().map(|p| p.label.clone()).collect();
        assert_eq!(labels, ["abcabca", "abcacca", "accabca", "accacca"].map(w).to_vec());
        // every prefix label is a prefix of the language
        for p in &ps {
            assert!(c.dfa.run_from(c.dfa.initial(), &p.label) == Some(p.end()));
        }
        // suffix labels read from their end vertex to the final state
        for p in reaching_paths(&c, Side::Suf, 7, 1000).unwrap() {
            assert!(p.label.len() >= 7);
            let f = c.dfa.run_from(p.end(), &p.label).unwrap();
            assert!(c.dfa.is_final(f));
        }
    }

    #[test]
    fn gamma_expansions_are_in_language() {
        let c = ctx_of("(a(b|c)c)*", "abc", 2);
        let pre = gamma_expand(&c, Side::Pref, &w("ab"), 2).unwrap();
        assert!(pre.starts_with(&w("ab")));
        let suf = gamma_expand(&c, Side::Suf, &w("cc"), 2).unwrap();
        assert!(suf.ends_with(&w("cc")));
        let q = c.dfa.run_from(c.dfa.initial(), &pre).unwrap();
        assert_eq!(q, c.butterfly.loop_state);
        let whole = pre.concat(&suf);
        assert!(c.dfa.accepts(&whole));
        assert_eq!(gamma_expand(&c, Side::Pref, &w("b"), 1), Err(GammaError::BadContext("prefix")));
    }

    #[test]
    fn dead_end_golden() {
        let inst = running_example();
        let mut partial = Assignment::new();
        partial.insert("x".into(), w("ab"));
        assert!(is_dead_end(&inst, &partial, "z", &w("abca")).unwrap());
        assert!(!is_dead_end(&inst, &partial, "z", &w("acc")).unwrap());
        assert!(is_dead_end(&inst, &Assignment::new(), "z", &w("acc")).is_err());
    }

    #[test]
    fn deviation_splits_off_alpha_powers() {
        assert_eq!(deviation(&w("ababac"), &w("ab")), w("c"));
        assert_eq!(deviation(&w("abab"), &w("ab")), w(""));
        assert_eq!(deviation(&w("bb"), &w("ab")), w("bb"));
    }

    #[test]
    fn factors_of_base_power() {
        // (a|b)* ∩ factors((ab)⁺) = (ε|b)(ab)*(ε|a)
        let ps = factors_within(&w("ab"), &dfa_of("(a|b)*", "ab")).unwrap();
        let nfa = crate::automata::patterns_to_nfa(&ps, 2);
        let oracle = dfa_of("(b|())(ab)*(a|())", "ab");
        for len in 0..8 {
            for x in crate::testutil::all_words(2, len) {
                assert_eq!(nfa.accepts(&x), oracle.accepts(&x), "{x:?}");
            }
        }
    }

    #[test]
    fn glued_language_is_inside_original() {
        let inst = running_example();
        let d = crate::constraints::normalize(&inst, 100);
        let crate::constraints::Normalized::Disjuncts(ds) = d else { panic!() };
        let i = &ds[0].instance;
        let z = i.nonflat_vars().remove(0);
        let c = GammaCtx::from_instance(i, &z).unwrap();
        let bounds = Bounds::from_params(2, 3, c.gamma.len()).scaled(0.3);
        let bases: BTreeMap<String, Word> =
            i.flat_vars().into_iter().filter(|x| i.in_needle(x)).map(|x| (x.clone(), crate::constraints::base(i, &x).unwrap())).collect();
        let caps = GammaCaps::default();
        let pre = underapprox_half(i, &c, Side::Pref, &bounds, &bases, &caps).unwrap();
        let suf = underapprox_half(i, &c, Side::Suf, &bounds, &bases, &caps).unwrap();
        assert!(!pre.partial.is_empty() && !suf.partial.is_empty());
        let lang = glue(&pre, &suf, &c, bounds.g);
        for p in &lang.patterns {
            for x in p.words_up_to(30) {
                assert!(c.dfa.accepts(&x));
            }
        }
        let prod = &lang.products[0];
        for h in (0..prod.heads.len()).step_by(3) {
            for t in (0..prod.tails.len()).step_by(5) {
                for x in prod.pattern(h, t).words_up_to(400) {
                    assert!(c.dfa.accepts(&x));
                }
            }
        }
        // short words are all present
        for x in c.dfa.enumerate_words(bounds.k0) {
            assert!(lang.patterns.contains(&FlatPattern::word(x)));
        }
    }
}
