use crate::automata::LengthSet;
use crate::flatsolver::length_abstraction;

use super::{Assignment, Instance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Class {
    /// Some choice of lengths makes the needle longer than the haystack.
    EasyLengthSat(Assignment),
    /// A variable occurring only in the needle can be pumped past the
    /// haystack.
    NeedleOnlyNonFlatSat(Assignment),
    EasyAllFlat,
    HardTwoSided,
    HardHaystackOnly,
}

/// Fragment of a normalized instance; the first matching class wins.
pub fn classify(inst: &Instance) -> Class {
    if let Some(model) = length_abstraction(inst) {
        return Class::EasyLengthSat(model);
    }
    if let Some(model) = pump_needle_only(inst) {
        return Class::NeedleOnlyNonFlatSat(model);
    }
    let nonflat = inst.nonflat_vars();
    if nonflat.is_empty() {
        Class::EasyAllFlat
    } else if nonflat.iter().any(|z| inst.in_needle(z) && inst.in_haystack(z)) {
        Class::HardTwoSided
    } else {
        Class::HardHaystackOnly
    }
}

fn pump_needle_only(inst: &Instance) -> Option<Assignment> {
    let vars = inst.vars();
    let x = vars.iter().find(|x| !inst.in_haystack(x) && !inst.is_finite(x))?;
    let mut model = Assignment::new();
    for y in &vars {
        model.insert(y.clone(), inst.lang(y).shortest_accepted()?);
    }
    let without_x = |t: &crate::constraints::Term| -> usize {
        let mut m = model.clone();
        m.insert(x.clone(), Default::default());
        t.eval(&m).map(|w| w.len()).unwrap_or(0)
    };
    let occ = inst.needle.occurrences(x);
    let need = (without_x(&inst.haystack) + 1).saturating_sub(without_x(&inst.needle));
    let len = LengthSet::of_dfa(inst.lang(x)).least_at_least(need.div_ceil(occ))?;
    model.insert(x.clone(), inst.lang(x).least_word_of_length(len)?);
    inst.satisfied_by(&model).then_some(model)
}
