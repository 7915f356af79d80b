//! Terminal search for instances whose variables all range over flat
//! languages, the length-abstraction shortcut, and SMT-LIB export.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::{self, Write};

use log::debug;

use crate::automata::{patterns_to_nfa, FlatPattern, LengthSet, Nfa, Regex};
use crate::constraints::{Assignment, Instance, Term, TermItem};
use crate::words::{find_factor, is_factor, Symbol, Word};

/// A flat pattern set glued around a fixed middle word:
/// `⋃ heads · middle · ⋃ tails`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueProduct {
    pub heads: Vec<FlatPattern>,
    pub middle: Word,
    pub tails: Vec<FlatPattern>,
}

impl GlueProduct {
    pub fn len(&self) -> usize {
        self.heads.len() * self.tails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pattern(&self, h: usize, t: usize) -> FlatPattern {
        self.heads[h].append(&self.middle).concat(&self.tails[t])
    }
}

/// A flat language kept as explicit patterns plus factored products, so
/// that large glued unions need not be materialized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatLanguage {
    pub patterns: Vec<FlatPattern>,
    pub products: Vec<GlueProduct>,
}

impl FlatLanguage {
    pub fn from_patterns(patterns: Vec<FlatPattern>) -> FlatLanguage {
        FlatLanguage { patterns, products: Vec::new() }
    }

    /// Number of alternatives, counting every head/tail combination.
    pub fn alternatives(&self) -> usize {
        self.patterns.len() + self.products.iter().map(GlueProduct::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.patterns.iter().all(FlatPattern::is_finite)
            && self
                .products
                .iter()
                .all(|p| p.heads.iter().chain(&p.tails).all(FlatPattern::is_finite))
    }

    pub fn to_nfa(&self, num_symbols: usize) -> Nfa {
        let mut nfa = patterns_to_nfa(&self.patterns, num_symbols);
        let start = nfa.initial_states()[0];
        for prod in self.products.iter().filter(|p| !p.is_empty()) {
            let entry = nfa.add_state();
            nfa.add_epsilon(start, entry);
            let mid_start = nfa.add_state();
            for h in &prod.heads {
                let s = nfa.add_state();
                nfa.add_epsilon(entry, s);
                let e = h.add_to_nfa(&mut nfa, s);
                nfa.add_epsilon(e, mid_start);
            }
            let mid_end = FlatPattern::word(prod.middle.clone()).add_to_nfa(&mut nfa, mid_start);
            for t in &prod.tails {
                let s = nfa.add_state();
                nfa.add_epsilon(mid_end, s);
                let e = t.add_to_nfa(&mut nfa, s);
                nfa.set_final(e, true);
            }
        }
        nfa
    }

    pub fn length_set(&self, num_symbols: usize) -> LengthSet {
        LengthSet::of_nfa(&self.to_nfa(num_symbols))
    }

    pub fn accepts(&self, w: &[Symbol], num_symbols: usize) -> bool {
        self.to_nfa(num_symbols).accepts(w)
    }
}

/// All-flat instance: terms plus a flat language per variable.
#[derive(Clone, Debug)]
pub struct FlatInstance {
    pub num_symbols: usize,
    pub needle: Term,
    pub haystack: Term,
    pub langs: BTreeMap<String, FlatLanguage>,
}

impl FlatInstance {
    pub fn vars(&self) -> Vec<String> {
        let mut vs: Vec<String> =
            self.needle.vars().chain(self.haystack.vars()).map(str::to_string).collect();
        vs.sort();
        vs.dedup();
        vs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlatVerdict {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

#[derive(Clone, Copy, Debug)]
pub struct FlatConfig {
    /// Largest loop iteration count tried.
    pub iter_bound: usize,
    /// Candidate assignments checked before giving up.
    pub budget: u64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        FlatConfig { iter_bound: 8, budget: 20_000_000 }
    }
}

/// Lengths per variable making the needle strictly longer than the
/// haystack, if any exist. The length difference is separable in the
/// variables, so it suffices to push each length to its extreme: the
/// largest member where the variable helps the needle, the least otherwise.
/// A helping variable with infinitely many lengths is raised just enough.
fn length_witness(needle: &Term, haystack: &Term, sets: &BTreeMap<String, LengthSet>) -> Option<BTreeMap<String, usize>> {
    let mut coeff: BTreeMap<&str, i64> = BTreeMap::new();
    for x in needle.vars() {
        *coeff.entry(x).or_default() += 1;
    }
    for x in haystack.vars() {
        *coeff.entry(x).or_default() -= 1;
    }
    let mut base = needle.literal_len() as i64 - haystack.literal_len() as i64;
    let mut lens = BTreeMap::new();
    let mut pump: Option<(&str, i64)> = None;
    for (&x, &c) in &coeff {
        let set = &sets[x];
        if c > 0 && !set.is_finite() && pump.is_none() {
            pump = Some((x, c));
            continue;
        }
        let l = if c > 0 { set.max()? } else { set.min()? };
        base += c * l as i64;
        lens.insert(x.to_string(), l);
    }
    match pump {
        Some((x, c)) => {
            let need = if base > 0 { 0 } else { (-base / c + 1) as usize };
            lens.insert(x.to_string(), sets[x].least_at_least(need)?);
            Some(lens)
        }
        None => (base > 0).then_some(lens),
    }
}

/// A model whose needle is longer than its haystack, using for each variable
/// the least word of the chosen length.
pub fn length_abstraction(inst: &Instance) -> Option<Assignment> {
    let vars = inst.vars();
    let sets: BTreeMap<String, LengthSet> =
        vars.iter().map(|x| (x.clone(), LengthSet::of_dfa(inst.lang(x)))).collect();
    let lens = length_witness(&inst.needle, &inst.haystack, &sets)?;
    lens.into_iter()
        .map(|(x, l)| inst.lang(&x).least_word_of_length(l).map(|w| (x, w)))
        .collect()
}

fn flat_length_abstraction(inst: &FlatInstance) -> Option<Assignment> {
    let nfas: BTreeMap<String, Nfa> =
        inst.langs.iter().map(|(x, l)| (x.clone(), l.to_nfa(inst.num_symbols))).collect();
    let sets = nfas.iter().map(|(x, n)| (x.clone(), LengthSet::of_nfa(n))).collect();
    let lens = length_witness(&inst.needle, &inst.haystack, &sets)?;
    lens.into_iter()
        .map(|(x, l)| nfas[&x].least_word_of_length(l).map(|w| (x, w)))
        .collect()
}

/// Counts vectors with entries `≤ b` in colexicographic order.
fn next_counts(counts: &mut [usize], b: usize) -> bool {
    for c in counts.iter_mut() {
        if *c < b {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}

/// Prefix automaton of the words avoiding `n` as a factor: state `k` means
/// the longest suffix read so far that is a prefix of `n` has length `k`.
struct Avoid<'n> {
    n: &'n [Symbol],
    fail: Vec<usize>,
}

impl<'n> Avoid<'n> {
    fn new(n: &'n [Symbol]) -> Self {
        let mut fail = vec![0; n.len()];
        let mut k = 0;
        for i in 1..n.len() {
            while k > 0 && n[i] != n[k] {
                k = fail[k - 1];
            }
            if n[i] == n[k] {
                k += 1;
            }
            fail[i] = k;
        }
        Avoid { n, fail }
    }

    /// `None` once `n` has been read completely.
    fn step(&self, mut k: usize, a: Symbol) -> Option<usize> {
        loop {
            if self.n[k] == a {
                k += 1;
                break;
            }
            if k == 0 {
                break;
            }
            k = self.fail[k - 1];
        }
        (k < self.n.len()).then_some(k)
    }
}

enum Avoidance {
    /// No values of the unassigned variables avoid the needle.
    Impossible,
    Witness(Assignment),
    /// Some variable occurs twice, so a path may not be a real assignment.
    Possible,
}

struct Search<'a> {
    inst: &'a FlatInstance,
    nfas: BTreeMap<String, Nfa>,
    refuted: HashSet<Word>,
    /// Some needle value survived the exact check and was left to bounded
    /// enumeration over an infinite language.
    undecided: bool,
    order: Vec<String>,
    /// Index in `order` from which no variable occurs in the needle.
    needle_done_at: usize,
    round: usize,
    budget: u64,
    spent: u64,
    sigma: Assignment,
    needle_word: Option<Word>,
    buf: Vec<Symbol>,
}

enum Step {
    Found,
    Continue,
    OutOfBudget,
}

impl Search<'_> {
    /// Exact check for the fixed needle `n` with `order[i..]` unassigned:
    /// the haystack with each free occurrence ranging over its language,
    /// intersected with the words avoiding `n`.
    fn avoidance(&self, i: usize, n: &[Symbol]) -> Avoidance {
        if n.is_empty() {
            return Avoidance::Impossible;
        }
        let free: BTreeMap<&str, usize> = self.order[i..].iter().map(|x| (x.as_str(), 0)).collect();
        let mut nfa = Nfa::new(self.inst.num_symbols);
        let start = nfa.add_state();
        nfa.add_initial(start);
        let mut cur = start;
        // states owned by a free occurrence: (first, end, variable)
        let mut owned: Vec<(usize, usize, &str)> = Vec::new();
        let mut repeated = false;
        let chain = |nfa: &mut Nfa, mut cur: usize, w: &[Symbol]| {
            for &a in w {
                let next = nfa.add_state();
                nfa.add_transition(cur, a, next);
                cur = next;
            }
            cur
        };
        for item in self.inst.haystack.items() {
            match item {
                TermItem::Lit(w) => cur = chain(&mut nfa, cur, w),
                TermItem::Var(x) if free.contains_key(x.as_str()) => {
                    repeated |= owned.iter().any(|o| o.2 == x);
                    let sub = &self.nfas[x];
                    let off = nfa.embed(sub);
                    owned.push((off, nfa.num_states(), x));
                    for &q in sub.initial_states() {
                        nfa.add_epsilon(cur, q + off);
                    }
                    let end = nfa.add_state();
                    for q in (0..sub.num_states()).filter(|&q| sub.is_final(q)) {
                        nfa.add_epsilon(q + off, end);
                    }
                    cur = end;
                }
                TermItem::Var(x) => cur = chain(&mut nfa, cur, &self.sigma[x]),
            }
        }
        nfa.set_final(cur, true);

        let avoid = Avoid::new(n);
        let m = n.len();
        let idx = |q: usize, k: usize| q * m + k;
        let mut parent: Vec<u32> = vec![u32::MAX; nfa.num_states() * m];
        let mut letter: Vec<Option<Symbol>> = vec![None; nfa.num_states() * m];
        let mut queue = VecDeque::new();
        parent[idx(start, 0)] = idx(start, 0) as u32;
        queue.push_back((start, 0));
        let mut hit = None;
        while let Some((q, k)) = queue.pop_front() {
            if nfa.is_final(q) {
                hit = Some(idx(q, k));
                break;
            }
            let from = idx(q, k) as u32;
            for &r in nfa.epsilons(q) {
                if parent[idx(r, k)] == u32::MAX {
                    parent[idx(r, k)] = from;
                    queue.push_back((r, k));
                }
            }
            for &(a, r) in nfa.transitions(q) {
                if let Some(k2) = avoid.step(k, a) {
                    if parent[idx(r, k2)] == u32::MAX {
                        parent[idx(r, k2)] = from;
                        letter[idx(r, k2)] = Some(a);
                        queue.push_back((r, k2));
                    }
                }
            }
        }
        let Some(mut at) = hit else { return Avoidance::Impossible };
        if repeated {
            return Avoidance::Possible;
        }
        let mut values: Assignment = free.keys().map(|x| (x.to_string(), Word::new())).collect();
        let mut rev: Vec<(usize, Symbol)> = Vec::new();
        while parent[at] as usize != at {
            let prev = parent[at] as usize;
            if let Some(a) = letter[at] {
                rev.push((prev / m, a));
            }
            at = prev;
        }
        for (q, a) in rev.into_iter().rev() {
            if let Some(&(_, _, x)) = owned.iter().find(|o| o.0 <= q && q < o.1) {
                values.get_mut(x).unwrap().push(a);
            }
        }
        Avoidance::Witness(values)
    }

    fn pruned(&self, p: &FlatPattern) -> bool {
        match &self.needle_word {
            Some(n) => p.literals().iter().any(|l| is_factor(n, l)),
            None => false,
        }
    }

    fn check(&mut self) -> Step {
        self.spent += 1;
        if self.spent > self.budget {
            return Step::OutOfBudget;
        }
        let n = match &self.needle_word {
            Some(n) => n.clone(),
            None => self.inst.needle.eval(&self.sigma).expect("all variables assigned"),
        };
        self.buf.clear();
        for item in self.inst.haystack.items() {
            match item {
                TermItem::Lit(w) => self.buf.extend_from_slice(w),
                TermItem::Var(x) => self.buf.extend_from_slice(&self.sigma[x]),
            }
        }
        if find_factor(&n, &self.buf).is_none() {
            Step::Found
        } else {
            Step::Continue
        }
    }

    fn try_pattern(&mut self, i: usize, p: &FlatPattern, max_so_far: usize) -> Step {
        if self.pruned(p) {
            return Step::Continue;
        }
        let b = self.round;
        let mut counts = vec![0; p.loops().len()];
        loop {
            let m = counts.iter().copied().max().unwrap_or(0).max(max_so_far);
            let last = i + 1 == self.order.len();
            if !(last && m < b) {
                self.sigma.insert(self.order[i].clone(), p.instantiate(&counts));
                match self.descend(i + 1, m) {
                    Step::Continue => {}
                    other => return other,
                }
            }
            if !next_counts(&mut counts, b) {
                return Step::Continue;
            }
        }
    }

    /// The needle is not a factor of the concatenated parts; `None` once the
    /// budget is spent.
    fn avoids(&mut self, n: &[Symbol], parts: &[&[Symbol]]) -> Option<bool> {
        self.spent += 1;
        if self.spent > self.budget {
            return None;
        }
        self.buf.clear();
        for p in parts {
            self.buf.extend_from_slice(p);
        }
        Some(find_factor(n, &self.buf).is_none())
    }

    /// Decide a finite product for the last variable at once. With every other
    /// value fixed, the variable occurring once in the haystack and the middle
    /// at least as long as the needle, no occurrence of the needle can touch
    /// both a head and a tail, so heads and tails are checked separately.
    fn split_product(&mut self, i: usize, prod: &GlueProduct, max_so_far: usize) -> Option<Step> {
        let n = self.needle_word.as_ref()?;
        let x = self.order[i].clone();
        let finite = prod.heads.iter().chain(&prod.tails).all(FlatPattern::is_finite);
        if i + 1 != self.order.len() || self.inst.haystack.occurrences(&x) != 1 || !finite || prod.middle.len() < n.len() {
            return None;
        }
        if max_so_far != self.round {
            return Some(Step::Continue);
        }
        let (mut left, mut right, mut seen) = (Word::new(), Word::new(), false);
        for item in self.inst.haystack.items() {
            let side = if seen { &mut right } else { &mut left };
            match item {
                TermItem::Lit(w) => side.extend_from(w),
                TermItem::Var(y) if *y == x => seen = true,
                TermItem::Var(y) => side.extend_from(&self.sigma[y]),
            }
        }
        let n = n.clone();
        let mut head = None;
        for h in &prod.heads {
            let hw = h.instantiate(&[]);
            match self.avoids(&n, &[&left, &hw, &prod.middle]) {
                None => return Some(Step::OutOfBudget),
                Some(true) => {
                    head = Some(hw);
                    break;
                }
                Some(false) => {}
            }
        }
        let Some(head) = head else { return Some(Step::Continue) };
        for t in &prod.tails {
            let tw = t.instantiate(&[]);
            match self.avoids(&n, &[&prod.middle, &tw, &right]) {
                None => return Some(Step::OutOfBudget),
                Some(true) => {
                    let mut v = head;
                    v.extend_from(&prod.middle);
                    v.extend_from(&tw);
                    self.sigma.insert(x.clone(), v);
                    return Some(self.check());
                }
                Some(false) => {}
            }
        }
        Some(Step::Continue)
    }

    fn descend(&mut self, i: usize, max_so_far: usize) -> Step {
        if i == self.needle_done_at && self.needle_word.is_none() {
            let n = self.inst.needle.eval(&self.sigma).expect("needle assigned");
            if self.refuted.contains(&n) {
                return Step::Continue;
            }
            self.spent += 1;
            if self.spent > self.budget {
                return Step::OutOfBudget;
            }
            match self.avoidance(i, &n) {
                Avoidance::Impossible => {
                    self.refuted.insert(n);
                    return Step::Continue;
                }
                Avoidance::Witness(values) => {
                    self.sigma.extend(values);
                    if let Step::Found = self.check() {
                        return Step::Found;
                    }
                }
                Avoidance::Possible => {
                    self.undecided |= self.order[i..].iter().any(|x| !self.inst.langs[x].is_finite());
                }
            }
            self.needle_word = Some(n);
            let r = self.descend(i, max_so_far);
            self.needle_word = None;
            return r;
        }
        if i == self.order.len() {
            return if max_so_far == self.round { self.check() } else { Step::Continue };
        }
        let lang = &self.inst.langs[&self.order[i]];
        for p in &lang.patterns {
            match self.try_pattern(i, p, max_so_far) {
                Step::Continue => {}
                other => return other,
            }
        }
        for prod in &lang.products {
            if let Some(n) = &self.needle_word {
                if is_factor(n, &prod.middle) {
                    continue;
                }
            }
            if let Some(r) = self.split_product(i, prod, max_so_far) {
                match r {
                    Step::Continue => continue,
                    other => return other,
                }
            }
            for h in 0..prod.heads.len() {
                if self.pruned(&prod.heads[h]) {
                    continue;
                }
                for t in 0..prod.tails.len() {
                    let p = prod.pattern(h, t);
                    match self.try_pattern(i, &p, max_so_far) {
                        Step::Continue => {}
                        other => return other,
                    }
                }
            }
        }
        Step::Continue
    }
}

/// Search over needle values in rounds of increasing largest loop count.
/// Each needle value is decided exactly against the haystack when its
/// free variables occur once; otherwise haystack values are enumerated too.
/// `Unsat` is reported only when the needle variables have finite languages
/// and every needle value was refuted exactly or by exhausting finite
/// haystack languages.
pub fn solve_flat(inst: &FlatInstance, config: &FlatConfig) -> FlatVerdict {
    if let Some(model) = flat_length_abstraction(inst) {
        debug!("flat: length abstraction model");
        return FlatVerdict::Sat(model);
    }
    let vars = inst.vars();
    if vars.iter().any(|x| inst.langs[x].is_empty()) {
        return FlatVerdict::Unsat;
    }
    // needle variables first, so the needle word is fixed before haystack-only
    // variables are enumerated
    let (mut order, rest): (Vec<String>, Vec<String>) =
        vars.into_iter().partition(|x| inst.needle.occurrences(x) > 0);
    let needle_done_at = order.len();
    order.extend(rest);
    let needle_finite = order[..needle_done_at].iter().all(|x| inst.langs[x].is_finite());
    let nfas = order[needle_done_at..]
        .iter()
        .map(|x| (x.clone(), inst.langs[x].to_nfa(inst.num_symbols)))
        .collect();
    let mut search = Search {
        inst,
        nfas,
        refuted: HashSet::new(),
        undecided: false,
        order,
        needle_done_at,
        round: 0,
        budget: config.budget,
        spent: 0,
        sigma: Assignment::new(),
        needle_word: None,
        buf: Vec::new(),
    };
    for round in 0..=config.iter_bound {
        search.round = round;
        match search.descend(0, 0) {
            Step::Found => return FlatVerdict::Sat(search.sigma),
            Step::OutOfBudget => return FlatVerdict::Unknown("search-budget".into()),
            Step::Continue => {}
        }
        if needle_finite && !search.undecided {
            debug!("flat: refuted after {} checks", search.spent);
            return FlatVerdict::Unsat;
        }
    }
    debug!("flat: {} candidates checked", search.spent);
    FlatVerdict::Unknown("iter-bound".into())
}

fn smt_string(inst: &Instance, w: &[Symbol]) -> String {
    let mut s = String::from("\"");
    for &a in w {
        match inst.alphabet.letter(a) {
            Some('"') => s.push_str("\"\""),
            Some(c) if c.is_ascii_graphic() || c == ' ' => s.push(c),
            Some(c) => s.push_str(&format!("\\u{{{:x}}}", c as u32)),
            None => {
                let sep = 0xE000 + a as usize - inst.alphabet.base_size();
                s.push_str(&format!("\\u{{{sep:x}}}"));
            }
        }
    }
    s.push('"');
    s
}

fn smt_term(inst: &Instance, t: &Term) -> String {
    let parts: Vec<String> = t
        .items()
        .iter()
        .map(|i| match i {
            TermItem::Lit(w) => smt_string(inst, w),
            TermItem::Var(x) => x.clone(),
        })
        .collect();
    match parts.len() {
        0 => "\"\"".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(str.++ {})", parts.join(" ")),
    }
}

/// SMT-LIB 2.6 script in the theory of strings.
pub fn emit_smtlib(inst: &Instance, sink: &mut dyn Write) -> io::Result<()> {
    writeln!(sink, "(set-logic QF_S)")?;
    let vars = inst.vars();
    for x in &vars {
        writeln!(sink, "(declare-const {x} String)")?;
    }
    for x in &vars {
        let re = inst.sources.get(x).cloned().unwrap_or_else(|| Regex::from_dfa(inst.lang(x)));
        let re = re.to_smtlib(&|a| {
            let s = smt_string(inst, &[a]);
            s[1..s.len() - 1].to_string()
        });
        writeln!(sink, "(assert (str.in_re {x} {re}))")?;
    }
    writeln!(
        sink,
        "(assert (not (str.contains {} {})))",
        smt_term(inst, &inst.haystack),
        smt_term(inst, &inst.needle)
    )?;
    writeln!(sink, "(check-sat)")?;
    writeln!(sink, "(get-model)")
}
