//! Elimination of non-flat variables that occur in both the needle and the
//! haystack.
//!
//! Every such variable is replaced by a fresh separator letter. A model of
//! the stripped instance lifts back by assigning the variable `p·γ·s`, where
//! `γ` is built from two distinct-root cycles `u`, `v` of its butterfly and is
//! long and self-conflicting enough that the needle cannot find a new
//! occurrence across it.

use thiserror::Error;

use crate::automata::{butterfly_at, AutomataError, Butterfly};
use crate::constraints::{Assignment, Instance, Term, TermItem};
use crate::words::{build_gamma_two_sided, build_two_sided_alpha_beta, choose_r, Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("model has no value for {0}")]
    MissingVar(String),
    #[error("lifted assignment does not satisfy the original instance")]
    Verification,
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftEntry {
    pub var: String,
    pub separator: Symbol,
    pub butterfly: Butterfly,
    pub alpha: Word,
    pub beta: Word,
}

/// Eliminated variables in elimination order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LiftPlan {
    pub entries: Vec<LiftEntry>,
}

impl LiftPlan {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Replace every two-sided non-flat variable (in name order) by a fresh
/// separator.
pub fn strip_two_sided(inst: &Instance) -> Result<(Instance, LiftPlan), AutomataError> {
    let mut out = inst.clone();
    let mut plan = LiftPlan::default();
    for z in inst.vars() {
        if !(inst.in_needle(&z) && inst.in_haystack(&z)) || inst.lang(&z).is_flat() {
            continue;
        }
        let butterfly = butterfly_at(inst.lang(&z))?;
        let (alpha, beta) =
            build_two_sided_alpha_beta(&butterfly.u, &butterfly.v).expect("butterfly cycles have distinct roots");
        let separator = out.alphabet.add_separator();
        out = out.substitute(&z, &Term::lit(Word::single(separator)));
        plan.entries.push(LiftEntry { var: z, separator, butterfly, alpha, beta });
    }
    out.prune_langs();
    Ok((out, plan))
}

/// Lengths of the pieces between occurrences of `z`.
fn piece_lengths(t: &Term, z: &str, sigma: &Assignment) -> Result<Vec<usize>, LiftError> {
    let mut lens = vec![0];
    for item in t.items() {
        match item {
            TermItem::Var(x) if x == z => lens.push(0),
            TermItem::Var(x) => {
                *lens.last_mut().unwrap() += sigma.get(x).ok_or_else(|| LiftError::MissingVar(x.clone()))?.len()
            }
            TermItem::Lit(w) => *lens.last_mut().unwrap() += w.len(),
        }
    }
    Ok(lens)
}

/// Candidate values for an eliminated variable: `p·γ·s` with both cycle
/// orders and two choices of `r`, then short words of the language.
fn candidates(original: &Instance, entry: &LiftEntry, m: usize) -> Vec<Word> {
    let b = &entry.butterfly;
    let mut out = Vec::new();
    for (u, v) in [(&b.u, &b.v), (&b.v, &b.u)] {
        let Ok((alpha, beta)) = build_two_sided_alpha_beta(u, v) else { continue };
        let r = choose_r(&alpha, m, &b.p, &b.s).expect("alpha is non-empty");
        for r in [r, r + 1] {
            let gamma = build_gamma_two_sided(&alpha, &beta, r).expect("r is at least 2");
            let mut w = b.p.clone();
            w.extend_from(&gamma);
            w.extend_from(&b.s);
            out.push(w);
        }
    }
    let lang = original.lang(&entry.var);
    let short = [SHORT_LEN, SHORT_LEN / 2]
        .into_iter()
        .find_map(|len| lang.enumerate_words_capped(len, SHORT_CAP))
        .unwrap_or_default();
    out.extend(short);
    out
}

const SHORT_LEN: usize = 8;
const SHORT_CAP: usize = 512;

/// Extend a model of the stripped instance to a model of `original`.
/// Entries are lifted in reverse order; each sees the terms with earlier
/// entries still replaced by their separators and later entries already
/// assigned. The first candidate satisfying that stage is kept.
pub fn lift_model(original: &Instance, plan: &LiftPlan, model: &Assignment) -> Result<Assignment, LiftError> {
    let mut sigma = model.clone();
    for i in (0..plan.entries.len()).rev() {
        let entry = &plan.entries[i];
        let mut stage = original.clone();
        for earlier in &plan.entries[..i] {
            stage = stage.substitute(&earlier.var, &Term::lit(Word::single(earlier.separator)));
        }
        let m = piece_lengths(&stage.needle, &entry.var, &sigma)?
            .into_iter()
            .chain(piece_lengths(&stage.haystack, &entry.var, &sigma)?)
            .max()
            .unwrap_or(0);
        let found = candidates(original, entry, m).into_iter().find(|w| {
            sigma.insert(entry.var.clone(), w.clone());
            stage.satisfied_by(&sigma)
        });
        if found.is_none() {
            return Err(LiftError::Verification);
        }
    }
    if original.satisfied_by(&sigma) {
        Ok(sigma)
    } else {
        Err(LiftError::Verification)
    }
}
