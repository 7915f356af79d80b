//! Combinatorics on words.
//!
//! Words are sequences of opaque symbol ids. Besides the usual primitives
//! (primitivity, primitive roots, factors) this module hosts the explicit
//! constructions of long primitive words that cannot overlap themselves
//! without a conflict, which the two-sided elimination and the Γ-expansion
//! rely on.

use std::fmt;
use std::ops::Deref;

use num_integer::{gcd, lcm};
use thiserror::Error;

/// A letter. Ids below the alphabet's base size are user letters, ids above
/// are fresh separators.
pub type Symbol = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("operation is undefined on the empty word")]
    EmptyWord,
    #[error("alignment bound {ell} exceeds word length {len}")]
    AlignmentBound { ell: usize, len: usize },
    #[error("words share the primitive root and cannot seed a butterfly construction")]
    SameRoot,
    #[error("repetition parameter must be at least 2, got {0}")]
    RepetitionTooSmall(usize),
    #[error("alpha and beta must have equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// An owned word.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub const fn new() -> Self {
        Word(Vec::new())
    }

    pub fn from_vec(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn single(symbol: Symbol) -> Self {
        Word(vec![symbol])
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.0.push(symbol);
    }

    pub fn pop_last(&mut self) -> Option<Symbol> {
        self.0.pop()
    }

    pub fn extend_from(&mut self, other: &[Symbol]) {
        self.0.extend_from_slice(other);
    }

    /// `self · other`
    pub fn concat(&self, other: &[Symbol]) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }

    /// `self^n`
    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Compare by length first, then lexicographically.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Small ids print as letters, which keeps test failures readable.
        write!(f, "\"")?;
        for &s in &self.0 {
            if s < 26 {
                write!(f, "{}", (b'a' + s as u8) as char)?;
            } else {
                write!(f, "<{s}>")?;
            }
        }
        write!(f, "\"")
    }
}

/// Smallest period of `w` (|w| for the empty word), via the prefix function.
fn smallest_period(w: &[Symbol]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let fail = prefix_function(w);
    n - fail[n - 1]
}

/// Knuth–Morris–Pratt prefix function: `pi[i]` is the length of the longest
/// proper border of `w[..=i]`.
fn prefix_function(w: &[Symbol]) -> Vec<usize> {
    let mut pi = vec![0usize; w.len()];
    let mut k = 0;
    for i in 1..w.len() {
        while k > 0 && w[i] != w[k] {
            k = pi[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        pi[i] = k;
    }
    pi
}

pub fn is_primitive(w: &[Symbol]) -> Result<bool, WordError> {
    primitive_root(w).map(|(_, e)| e == 1)
}

/// Returns `(root, exponent)` with `w = root^exponent` and `root` primitive.
pub fn primitive_root(w: &[Symbol]) -> Result<(Word, usize), WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let p = smallest_period(w);
    let root_len = if w.len().is_multiple_of(p) { p } else { w.len() };
    Ok((Word::from(&w[..root_len]), w.len() / root_len))
}

/// Position of the first occurrence of `needle` in `haystack`.
pub fn find_factor(needle: &[Symbol], haystack: &[Symbol]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    if needle.len() > haystack.len() {
        return None;
    }
    let pi = prefix_function(needle);
    let mut k = 0;
    for (i, &c) in haystack.iter().enumerate() {
        while k > 0 && c != needle[k] {
            k = pi[k - 1];
        }
        if c == needle[k] {
            k += 1;
            if k == needle.len() {
                return Some(i + 1 - k);
            }
        }
    }
    None
}

pub fn is_factor(needle: &[Symbol], haystack: &[Symbol]) -> bool {
    find_factor(needle, haystack).is_some()
}

/// Two words placed on a common axis: `right[0]` sits at position `shift`
/// of `left`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub left: Word,
    pub right: Word,
    pub shift: isize,
}

impl Alignment {
    pub fn new(left: impl Into<Word>, right: impl Into<Word>, shift: isize) -> Self {
        Alignment { left: left.into(), right: right.into(), shift }
    }

    /// Shared positions, as a half-open range in `left` coordinates.
    fn shared(&self) -> std::ops::Range<isize> {
        let lo = self.shift.max(0);
        let hi = (self.left.len() as isize).min(self.shift + self.right.len() as isize);
        lo..hi.max(lo)
    }

    pub fn overlap_size(&self) -> usize {
        let r = self.shared();
        (r.end - r.start) as usize
    }
}

/// True iff some shared position holds different letters.
pub fn alignment_conflict(a: &Alignment) -> bool {
    a.shared()
        .any(|i| a.left[i as usize] != a.right[(i - a.shift) as usize])
}

/// `w` is ℓ-aligned iff no `p` with `1 ≤ |p| ≤ |w| - ℓ` makes `w` a prefix
/// of `p·w`; equivalently `w` has no period in `1..=|w|-ℓ`.
pub fn is_ell_aligned(w: &[Symbol], ell: usize) -> Result<bool, WordError> {
    let n = w.len();
    if ell > n {
        return Err(WordError::AlignmentBound { ell, len: n });
    }
    Ok((1..=n - ell).all(|k| w[k..] != w[..n - k]))
}

fn ensure_distinct_roots(u: &[Symbol], v: &[Symbol]) -> Result<(), WordError> {
    let (ru, _) = primitive_root(u)?;
    let (rv, _) = primitive_root(v)?;
    if ru == rv {
        Err(WordError::SameRoot)
    } else {
        Ok(())
    }
}

/// `α = u^(2+k)·v²` and `β = u²·v^(2+l)` with `k·|u| = l·|v| = lcm(|u|,|v|)`,
/// so that `|α| = |β|` and both are primitive.
pub fn build_two_sided_alpha_beta(u: &[Symbol], v: &[Symbol]) -> Result<(Word, Word), WordError> {
    ensure_distinct_roots(u, v)?;
    let m = lcm(u.len(), v.len());
    let (k, l) = (m / u.len(), m / v.len());
    let u = Word::from(u);
    let v = Word::from(v);
    let alpha = u.pow(2 + k).concat(&v.pow(2));
    let beta = u.pow(2).concat(&v.pow(2 + l));
    Ok((alpha, beta))
}

/// `γ = α^r β^r α^r β^r α^{2r} β^{2r}`.
pub fn build_gamma_two_sided(alpha: &[Symbol], beta: &[Symbol], r: usize) -> Result<Word, WordError> {
    if r < 2 {
        return Err(WordError::RepetitionTooSmall(r));
    }
    if alpha.len() != beta.len() {
        return Err(WordError::LengthMismatch(alpha.len(), beta.len()));
    }
    if alpha.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let a = Word::from(alpha);
    let b = Word::from(beta);
    let mut g = Word::new();
    for reps in [r, r, 2 * r] {
        g.extend_from(&a.pow(reps));
        g.extend_from(&b.pow(reps));
    }
    Ok(g)
}

/// Least `r ≥ 2` with `r·|α| > m + |p| + |s|`.
pub fn choose_r(alpha: &[Symbol], m: usize, p: &[Symbol], s: &[Symbol]) -> Result<usize, WordError> {
    if alpha.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let need = m + p.len() + s.len();
    Ok((need / alpha.len() + 1).max(2))
}

/// `γ_z = u^(2+k)·v²` for the least `k` making `|γ_z| > max_base`.
pub fn build_gamma_z(u: &[Symbol], v: &[Symbol], max_base: usize) -> Result<Word, WordError> {
    ensure_distinct_roots(u, v)?;
    let fixed = 2 * u.len() + 2 * v.len();
    let k = if fixed > max_base { 0 } else { (max_base - fixed) / u.len() + 1 };
    let u = Word::from(u);
    Ok(u.pow(2 + k).concat(&Word::from(v).pow(2)))
}

/// Greatest common divisor of two lengths (re-exported for overlap bounds).
pub fn gcd_len(a: usize, b: usize) -> usize {
    gcd(a, b)
}
