//! Instances of `¬Contains(N, H)` with per-variable regular constraints.

mod bounds;
mod classify;
mod document;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::alphabet::{Alphabet, AlphabetError};
use crate::automata::{AutomataError, Dfa, Regex, RegexError};
use crate::words::{is_factor, Word};

pub use bounds::{base, compute_bounds, gamma_z_for, Bounds};
pub use classify::{classify, Class};
pub use document::{parse_instance, parse_instance_json, InstanceDocument, TermDoc, VarDecl};
pub use normalize::{normalize, Disjunct, Normalized};

/// Partial or total map from variable names to words.
pub type Assignment = BTreeMap<String, Word>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("invalid JSON document: {0}")]
    Json(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("variable {var}: {err}")]
    Regex { var: String, err: RegexError },
    #[error("variable {0} has an empty language")]
    EmptyLanguage(String),
    #[error("variable {0} is declared twice")]
    DuplicateVar(String),
    #[error("invalid variable name {0:?}")]
    BadName(String),
    #[error("term references undeclared variable {0}")]
    UndeclaredVar(String),
    #[error("literal {lit:?}: {err}")]
    Literal { lit: String, err: AlphabetError },
    #[error("variable {0} is not flat")]
    NotFlat(String),
    #[error("language of {0} is not of the form w*")]
    NotStar(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("assignment has no value for {0}")]
    Unassigned(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermItem {
    Lit(Word),
    Var(String),
}

/// A sequence of literals and variable occurrences. Adjacent literals are
/// merged and empty literals dropped on construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Vec<TermItem>);

impl Term {
    pub fn new() -> Term {
        Term(Vec::new())
    }

    pub fn lit(w: impl Into<Word>) -> Term {
        let mut t = Term::new();
        t.push_lit(&w.into());
        t
    }

    pub fn var(name: &str) -> Term {
        Term(vec![TermItem::Var(name.to_string())])
    }

    pub fn items(&self) -> &[TermItem] {
        &self.0
    }

    pub fn push_lit(&mut self, w: &[u32]) {
        if w.is_empty() {
            return;
        }
        if let Some(TermItem::Lit(last)) = self.0.last_mut() {
            last.extend_from(w);
        } else {
            self.0.push(TermItem::Lit(Word::from(w)));
        }
    }

    pub fn push_var(&mut self, name: &str) {
        self.0.push(TermItem::Var(name.to_string()));
    }

    pub fn push(&mut self, item: &TermItem) {
        match item {
            TermItem::Lit(w) => self.push_lit(w),
            TermItem::Var(x) => self.push_var(x),
        }
    }

    pub fn append(&mut self, other: &Term) {
        for item in &other.0 {
            self.push(item);
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|i| match i {
            TermItem::Var(x) => Some(x.as_str()),
            TermItem::Lit(_) => None,
        })
    }

    pub fn occurrences(&self, x: &str) -> usize {
        self.vars().filter(|&y| y == x).count()
    }

    pub fn is_ground(&self) -> bool {
        self.vars().next().is_none()
    }

    pub fn literal_len(&self) -> usize {
        self.literals().map(|w| w.len()).sum()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Word> {
        self.0.iter().filter_map(|i| match i {
            TermItem::Lit(w) => Some(w),
            TermItem::Var(_) => None,
        })
    }

    /// Replace every occurrence of `x` by `t`.
    pub fn substitute(&self, x: &str, t: &Term) -> Term {
        let mut out = Term::new();
        for item in &self.0 {
            match item {
                TermItem::Var(y) if y == x => out.append(t),
                other => out.push(other),
            }
        }
        out
    }

    /// Replace every variable with a value in `sigma`; others stay.
    pub fn substitute_all(&self, sigma: &Assignment) -> Term {
        let mut out = Term::new();
        for item in &self.0 {
            match item {
                TermItem::Var(y) => match sigma.get(y) {
                    Some(w) => out.push_lit(w),
                    None => out.push_var(y),
                },
                lit => out.push(lit),
            }
        }
        out
    }

    pub fn eval(&self, sigma: &Assignment) -> Result<Word, ConstraintError> {
        let mut w = Word::new();
        for item in &self.0 {
            match item {
                TermItem::Lit(l) => w.extend_from(l),
                TermItem::Var(x) => {
                    w.extend_from(sigma.get(x).ok_or_else(|| ConstraintError::Unassigned(x.clone()))?)
                }
            }
        }
        Ok(w)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|i| match i {
                TermItem::Lit(w) => format!("\"{}\"", alphabet.render(w)),
                TermItem::Var(x) => x.clone(),
            })
            .collect();
        if parts.is_empty() {
            "\"\"".to_string()
        } else {
            parts.join("·")
        }
    }
}

impl FromIterator<TermItem> for Term {
    fn from_iter<I: IntoIterator<Item = TermItem>>(iter: I) -> Self {
        let mut t = Term::new();
        for item in iter {
            t.push(&item);
        }
        t
    }
}

/// `¬Contains(needle, haystack)` with a canonical DFA per variable.
#[derive(Clone, Debug)]
pub struct Instance {
    pub alphabet: Alphabet,
    pub needle: Term,
    pub haystack: Term,
    pub langs: BTreeMap<String, Dfa>,
    /// Source regexes of user-declared variables, kept for export.
    pub sources: BTreeMap<String, Regex>,
}

impl Instance {
    pub fn new(
        alphabet: Alphabet,
        needle: Term,
        haystack: Term,
        langs: BTreeMap<String, Dfa>,
    ) -> Result<Instance, ConstraintError> {
        for x in needle.vars().chain(haystack.vars()) {
            if !langs.contains_key(x) {
                return Err(ConstraintError::UndeclaredVar(x.to_string()));
            }
        }
        Ok(Instance { alphabet, needle, haystack, langs, sources: BTreeMap::new() })
    }

    /// Variables occurring in either term, sorted by name.
    pub fn vars(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.needle.vars().chain(self.haystack.vars()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn lang(&self, x: &str) -> &Dfa {
        &self.langs[x]
    }

    pub fn in_needle(&self, x: &str) -> bool {
        self.needle.occurrences(x) > 0
    }

    pub fn in_haystack(&self, x: &str) -> bool {
        self.haystack.occurrences(x) > 0
    }

    pub fn is_flat(&self, x: &str) -> bool {
        self.lang(x).is_flat()
    }

    pub fn is_finite(&self, x: &str) -> bool {
        self.lang(x).is_finite()
    }

    pub fn is_decomposed(&self, x: &str) -> bool {
        self.lang(x).is_decomposed()
    }

    /// Occurring non-flat variables, sorted by name.
    pub fn nonflat_vars(&self) -> Vec<String> {
        self.vars().into_iter().filter(|x| !self.is_flat(x)).collect()
    }

    pub fn flat_vars(&self) -> Vec<String> {
        self.vars().into_iter().filter(|x| self.is_flat(x)).collect()
    }

    /// Longest literal of either term.
    pub fn longest_literal(&self) -> usize {
        self.needle.literals().chain(self.haystack.literals()).map(|w| w.len()).max().unwrap_or(0)
    }

    /// Whether `sigma` satisfies the constraint: memberships of every
    /// occurring variable and `σ(N)` not a factor of `σ(H)`.
    pub fn satisfied_by(&self, sigma: &Assignment) -> bool {
        for x in self.vars() {
            match sigma.get(&x) {
                Some(w) if self.lang(&x).accepts(w) => {}
                _ => return false,
            }
        }
        match (self.needle.eval(sigma), self.haystack.eval(sigma)) {
            (Ok(n), Ok(h)) => !is_factor(&n, &h),
            _ => false,
        }
    }

    /// The same constraint with `x` replaced by the term `t` everywhere; the
    /// language map keeps all entries.
    pub fn substitute(&self, x: &str, t: &Term) -> Instance {
        Instance {
            needle: self.needle.substitute(x, t),
            haystack: self.haystack.substitute(x, t),
            ..self.clone()
        }
    }

    /// Drop language entries for variables that no longer occur.
    pub fn prune_langs(&mut self) {
        let vars: BTreeSet<String> = self.vars().into_iter().collect();
        self.langs.retain(|x, _| vars.contains(x));
        self.sources.retain(|x, _| vars.contains(x));
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "¬Contains({}, {})",
            self.needle.render(&self.alphabet),
            self.haystack.render(&self.alphabet)
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The running example: ¬Contains("ab"·x, x·z) with x ∈ (ab)+ and
    /// z ∈ (a(b|c)c)*.
    pub(crate) fn running_example() -> Instance {
        parse_instance_json(
            r#"{"alphabet":"abc",
                "vars":[{"name":"x","regex":"(ab)+"},{"name":"z","regex":"(a(b|c)c)*"}],
                "needle":[{"lit":"ab"},{"var":"x"}],
                "haystack":[{"var":"x"},{"var":"z"}]}"#,
        )
        .unwrap()
    }

    use crate::testutil::w;

    #[test]
    fn terms_merge_literals() {
        let mut t = Term::lit(w("ab"));
        t.push_lit(&w(""));
        t.push_lit(&w("c"));
        t.push_var("x");
        t.push_lit(&w("a"));
        assert_eq!(t.items().len(), 3);
        assert_eq!(t.literal_len(), 4);
        let s = t.substitute("x", &Term::lit(w("b")));
        assert_eq!(s, Term::lit(w("abcba")));
    }

    #[test]
    fn running_example_semantics() {
        let inst = running_example();
        let mut sigma = Assignment::new();
        sigma.insert("x".into(), w("ab"));
        sigma.insert("z".into(), w("acc"));
        assert!(inst.satisfied_by(&sigma));
        sigma.insert("z".into(), w("abc"));
        assert!(!inst.satisfied_by(&sigma));
        sigma.insert("z".into(), w("ab"));
        assert!(!inst.satisfied_by(&sigma));
        assert_eq!(inst.vars(), vec!["x".to_string(), "z".to_string()]);
        assert!(inst.is_flat("x") && !inst.is_flat("z"));
    }
}
