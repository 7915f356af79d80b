use serde::Serialize;

use crate::automata::{butterfly_at, Butterfly};
use crate::words::{build_gamma_z, primitive_root, Word};

use super::{ConstraintError, Instance};

/// Search bounds: `k0` bounds prefix/suffix exploration of non-flat
/// variables, `n0` is the length from which a flat variable counts as long,
/// and `g` is the power of `γ_z` placed between glued prefixes and suffixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub p_lit: usize,
    pub p_aut: usize,
    pub p_prim: usize,
    pub k0: usize,
    pub n0: usize,
    pub g: usize,
}

impl Bounds {
    pub fn from_params(p_lit: usize, p_aut: usize, p_prim: usize) -> Bounds {
        let k0 = 2 * p_prim * p_aut + p_lit;
        let n0 = k0 + 4 * p_prim + p_aut;
        let g = n0 + 2 * p_prim + 2 * p_lit;
        Bounds { p_lit, p_aut, p_prim, k0, n0, g }
    }

    /// Multiply `k0`, `n0` and `g` by `factor`, keeping `1 ≤ k0 < n0 < g`.
    pub fn scaled(&self, factor: f64) -> Bounds {
        let scale = |v: usize| (v as f64 * factor).floor() as usize;
        let k0 = scale(self.k0).max(1);
        let n0 = scale(self.n0).max(k0 + 1);
        let g = scale(self.g).max(n0 + 1);
        Bounds { k0, n0, g, ..*self }
    }
}

/// Primitive root of the loop word of a flat variable with language `w*`.
pub fn base(inst: &Instance, x: &str) -> Result<Word, ConstraintError> {
    let dfa = inst.langs.get(x).ok_or_else(|| ConstraintError::UndeclaredVar(x.to_string()))?;
    if !dfa.is_flat() {
        return Err(ConstraintError::NotFlat(x.to_string()));
    }
    let w = dfa.star_word().ok_or_else(|| ConstraintError::NotStar(x.to_string()))?;
    Ok(primitive_root(&w).expect("loop words are non-empty").0)
}

/// Longest base among flat variables of the needle.
fn max_needle_base(inst: &Instance) -> Result<usize, ConstraintError> {
    let mut best = 0;
    for x in inst.needle.vars() {
        if inst.lang(x).is_flat() {
            best = best.max(base(inst, x)?.len());
        }
    }
    Ok(best)
}

/// Canonical butterfly and `γ_z` of a non-flat variable.
pub fn gamma_z_for(inst: &Instance, z: &str) -> Result<(Butterfly, Word), ConstraintError> {
    let b = butterfly_at(inst.lang(z))?;
    let gamma = build_gamma_z(&b.u, &b.v, max_needle_base(inst)?).expect("butterfly roots differ");
    Ok((b, gamma))
}

pub fn compute_bounds(inst: &Instance) -> Result<Bounds, ConstraintError> {
    let p_lit = inst.longest_literal();
    let vars = inst.vars();
    let p_aut = vars.iter().map(|x| inst.lang(x).num_states()).max().unwrap_or(0);
    let mut p_prim = max_needle_base(inst)?;
    for z in &vars {
        if inst.in_haystack(z) && !inst.lang(z).is_flat() {
            p_prim = p_prim.max(gamma_z_for(inst, z)?.1.len());
        }
    }
    Ok(Bounds::from_params(p_lit, p_aut, p_prim.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{normalize, parse_instance_json, Normalized};
    use crate::testutil::w;

    fn single(vars: &[(&str, &str)], needle: &str, haystack: &str) -> Instance {
        let vars: Vec<String> =
            vars.iter().map(|(n, r)| format!(r#"{{"name":"{n}","regex":"{r}"}}"#)).collect();
        parse_instance_json(&format!(
            r#"{{"alphabet":"abc","vars":[{}],"needle":{needle},"haystack":{haystack}}}"#,
            vars.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn base_examples() {
        let i = single(&[("x", "(ab)*"), ("y", "(abab)*"), ("z", "(a(b|c)c)*")], "[]", "[]");
        assert_eq!(base(&i, "x").unwrap(), w("ab"));
        assert_eq!(base(&i, "y").unwrap(), w("ab"));
        assert_eq!(base(&i, "z"), Err(ConstraintError::NotFlat("z".into())));
    }

    #[test]
    fn bounds_for_running_shape() {
        // N = "ab"·x, H = x·z with x ∈ (ab)*, z ∈ (a|b)*
        let i = single(
            &[("x", "(ab)*"), ("z", "(a|b)*")],
            r#"[{"lit":"ab"},{"var":"x"}]"#,
            r#"[{"var":"x"},{"var":"z"}]"#,
        );
        let Normalized::Disjuncts(ds) = normalize(&i, 10) else { panic!() };
        assert_eq!(ds.len(), 1);
        let b = compute_bounds(&ds[0].instance).unwrap();
        // Base(x) = ab, γ_z = aabb (|γ_z| = 4 > 2), p_aut = 2 (x's cycle)
        let (_, gamma) = gamma_z_for(&ds[0].instance, "z.0.0").unwrap();
        assert_eq!(gamma, w("aabb"));
        let (p_lit, p_aut, p_prim) = (2, 2, 4);
        assert_eq!((b.p_lit, b.p_aut, b.p_prim), (p_lit, p_aut, p_prim));
        assert_eq!(b.k0, 2 * 4 * 2 + 2);
        assert_eq!(b.n0, 18 + 16 + 2);
        assert_eq!(b.g, 36 + 8 + 4);
    }

    #[test]
    fn scaled_bounds_stay_ordered() {
        for (l, a, p) in [(0, 1, 1), (3, 4, 12), (1, 1, 5)] {
            let b = Bounds::from_params(l, a, p);
            assert!(b.k0 < b.n0 && b.n0 < b.g);
            for f in [0.01, 0.2, 1.0] {
                let s = b.scaled(f);
                assert!(1 <= s.k0 && s.k0 < s.n0 && s.n0 < s.g);
            }
            let bigger = Bounds::from_params(l + 1, a + 1, p + 1);
            assert!(bigger.k0 > b.k0 && bigger.n0 > b.n0 && bigger.g > b.g);
        }
    }
}
