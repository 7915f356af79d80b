//! Regex frontend.
//!
//! Grammar (no whitespace, no escapes):
//!
//! ```text
//! union  := concat ('|' concat)*
//! concat := repeat*
//! repeat := atom ('*' | '+' | '?')*
//! atom   := letter | '(' union ')' | '[' letter+ ']'
//! ```
//!
//! An empty concat denotes the empty word, so `(ab|)` matches `ab` or nothing.

use std::fmt::Write as _;

use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::words::Symbol;

use super::{Dfa, Nfa, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("character {ch:?} at position {pos} is not in the alphabet")]
    UnknownLetter { ch: char, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    /// The empty language.
    Nothing,
    Epsilon,
    Letter(Symbol),
    Class(Vec<Symbol>),
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Optional(Box<Regex>),
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> RegexError {
        RegexError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn letter(&self, ch: char) -> Result<Symbol, RegexError> {
        self.alphabet.symbol(ch).ok_or(RegexError::UnknownLetter { ch, pos: self.pos })
    }

    fn union(&mut self) -> Result<Regex, RegexError> {
        let mut alts = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            alts.push(self.concat()?);
        }
        Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Regex::Union(alts) })
    }

    fn concat(&mut self) -> Result<Regex, RegexError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repeat()?);
        }
        Ok(match items.len() {
            0 => Regex::Epsilon,
            1 => items.pop().unwrap(),
            _ => Regex::Concat(items),
        })
    }

    fn repeat(&mut self) -> Result<Regex, RegexError> {
        let mut r = self.atom()?;
        while let Some(c) = self.peek() {
            r = match c {
                '*' => Regex::Star(Box::new(r)),
                '+' => Regex::Plus(Box::new(r)),
                '?' => Regex::Optional(Box::new(r)),
                _ => break,
            };
            self.pos += 1;
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let r = self.union()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some('[') => {
                self.pos += 1;
                let mut set = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(self.err("unterminated class")),
                        Some(']') => break,
                        Some(c) if is_meta(c) || c.is_whitespace() => {
                            return Err(self.err("expected letter in class"))
                        }
                        Some(c) => {
                            set.push(self.letter(c)?);
                            self.pos += 1;
                        }
                    }
                }
                if set.is_empty() {
                    return Err(self.err("empty class"));
                }
                self.pos += 1;
                set.sort_unstable();
                set.dedup();
                Ok(Regex::Class(set))
            }
            Some(c) if is_meta(c) || c.is_whitespace() => Err(self.err(&format!("unexpected {c:?}"))),
            Some(c) => {
                let a = self.letter(c)?;
                self.pos += 1;
                Ok(Regex::Letter(a))
            }
        }
    }
}

fn is_meta(c: char) -> bool {
    matches!(c, '(' | ')' | '[' | ']' | '|' | '*' | '+' | '?' | '#')
}

impl Regex {
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Regex, RegexError> {
        let mut p = Parser { chars: text.chars().collect(), pos: 0, alphabet };
        let r = p.union()?;
        if p.pos != p.chars.len() {
            return Err(p.err("unbalanced ')'"));
        }
        Ok(r)
    }

    /// Thompson construction.
    pub fn to_nfa(&self, num_symbols: usize) -> Nfa {
        let mut nfa = Nfa::new(num_symbols);
        let (s, f) = self.build(&mut nfa);
        nfa.add_initial(s);
        nfa.set_final(f, true);
        nfa
    }

    fn build(&self, nfa: &mut Nfa) -> (StateId, StateId) {
        let s = nfa.add_state();
        let f = nfa.add_state();
        match self {
            Regex::Nothing => {}
            Regex::Epsilon => nfa.add_epsilon(s, f),
            Regex::Letter(a) => nfa.add_transition(s, *a, f),
            Regex::Class(set) => {
                for &a in set {
                    nfa.add_transition(s, a, f);
                }
            }
            Regex::Concat(items) => {
                let mut cur = s;
                for item in items {
                    let (is, it) = item.build(nfa);
                    nfa.add_epsilon(cur, is);
                    cur = it;
                }
                nfa.add_epsilon(cur, f);
            }
            Regex::Union(alts) => {
                for alt in alts {
                    let (is, it) = alt.build(nfa);
                    nfa.add_epsilon(s, is);
                    nfa.add_epsilon(it, f);
                }
            }
            Regex::Star(r) | Regex::Plus(r) | Regex::Optional(r) => {
                let (is, it) = r.build(nfa);
                nfa.add_epsilon(s, is);
                nfa.add_epsilon(it, f);
                if !matches!(self, Regex::Plus(_)) {
                    nfa.add_epsilon(s, f);
                }
                if !matches!(self, Regex::Optional(_)) {
                    nfa.add_epsilon(it, is);
                }
            }
        }
        (s, f)
    }

    /// SMT-LIB regular expression term. `lit` renders a symbol as a string
    /// literal body.
    pub fn to_smtlib(&self, lit: &dyn Fn(Symbol) -> String) -> String {
        let mut out = String::new();
        self.write_smtlib(&mut out, lit);
        out
    }

    fn write_smtlib(&self, out: &mut String, lit: &dyn Fn(Symbol) -> String) {
        let nary = |out: &mut String, op: &str, items: &[Regex]| {
            let _ = write!(out, "({op}");
            for item in items {
                out.push(' ');
                item.write_smtlib(out, lit);
            }
            out.push(')');
        };
        let unary = |out: &mut String, op: &str, r: &Regex| {
            let _ = write!(out, "({op} ");
            r.write_smtlib(out, lit);
            out.push(')');
        };
        match self {
            Regex::Nothing => out.push_str("re.none"),
            Regex::Epsilon => out.push_str("(str.to_re \"\")"),
            Regex::Letter(a) => {
                let _ = write!(out, "(str.to_re \"{}\")", lit(*a));
            }
            Regex::Class(set) if set.len() == 1 => Regex::Letter(set[0]).write_smtlib(out, lit),
            Regex::Class(set) => {
                let letters: Vec<Regex> = set.iter().map(|&a| Regex::Letter(a)).collect();
                nary(out, "re.union", &letters);
            }
            Regex::Concat(items) => nary(out, "re.++", items),
            Regex::Union(items) => nary(out, "re.union", items),
            Regex::Star(r) => unary(out, "re.*", r),
            Regex::Plus(r) => unary(out, "re.+", r),
            Regex::Optional(r) => unary(out, "re.opt", r),
        }
    }

    /// A regex for the language of a DFA, by state elimination.
    pub fn from_dfa(dfa: &Dfa) -> Regex {
        // states 0..n are the DFA's, n is a fresh start, n+1 a fresh end
        let n = dfa.num_states();
        let start = n;
        let end = n + 1;
        let mut edge: Vec<Vec<Option<Regex>>> = vec![vec![None; n + 2]; n + 2];
        let add = |edge: &mut Vec<Vec<Option<Regex>>>, p: usize, q: usize, r: Regex| {
            edge[p][q] = Some(match edge[p][q].take() {
                None => r,
                Some(old) => union2(old, r),
            });
        };
        for q in 0..n {
            for (a, r) in dfa.out(q) {
                add(&mut edge, q, r, Regex::Letter(a));
            }
            if dfa.is_final(q) {
                add(&mut edge, q, end, Regex::Epsilon);
            }
        }
        add(&mut edge, start, dfa.initial(), Regex::Epsilon);
        for k in 0..n {
            let loop_re = edge[k][k].take().map(|r| Regex::Star(Box::new(r)));
            let ins: Vec<usize> = (0..n + 2).filter(|&p| p != k && edge[p][k].is_some()).collect();
            let outs: Vec<usize> = (0..n + 2).filter(|&q| q != k && edge[k][q].is_some()).collect();
            for &p in &ins {
                for &q in &outs {
                    let mut parts = vec![edge[p][k].clone().unwrap()];
                    if let Some(l) = &loop_re {
                        parts.push(l.clone());
                    }
                    parts.push(edge[k][q].clone().unwrap());
                    add(&mut edge, p, q, concat_all(parts));
                }
            }
            for p in 0..n + 2 {
                edge[p][k] = None;
                edge[k][p] = None;
            }
        }
        edge[start][end].take().unwrap_or(Regex::Nothing)
    }
}

fn union2(a: Regex, b: Regex) -> Regex {
    match (a, b) {
        (Regex::Union(mut xs), Regex::Union(ys)) => {
            xs.extend(ys);
            Regex::Union(xs)
        }
        (Regex::Union(mut xs), b) => {
            xs.push(b);
            Regex::Union(xs)
        }
        (a, b) => Regex::Union(vec![a, b]),
    }
}

fn concat_all(parts: Vec<Regex>) -> Regex {
    let mut items = Vec::new();
    for p in parts {
        match p {
            Regex::Epsilon => {}
            Regex::Concat(xs) => items.extend(xs),
            other => items.push(other),
        }
    }
    match items.len() {
        0 => Regex::Epsilon,
        1 => items.pop().unwrap(),
        _ => Regex::Concat(items),
    }
}

/// Parse `text` and build its Thompson NFA over the alphabet's current symbols.
pub fn parse_regex(text: &str, alphabet: &Alphabet) -> Result<Nfa, RegexError> {
    Ok(Regex::parse(text, alphabet)?.to_nfa(alphabet.size()))
}
