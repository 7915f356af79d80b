#![allow(dead_code)]

use ncsolve_core::{brute_oracle, parse_instance_json, verify_model, Instance, OracleResult, Status, Verdict};
use rand::seq::SliceRandom;
use rand::Rng;

/// Regexes over `{a, b}` used by generated instances.
pub const POOL_AB: &[&str] = &[
    "a*", "(ab)*", "(a|b)*", "b+", "a|bb", "(ab|b)*", "(a|bb)*", "a(ba)*", "(ab)+b", "b(a|b)*", "ab|ba",
];

/// Regexes over `{a, b, c}`.
pub const POOL_ABC: &[&str] = &[
    "(a(b|c)c)*", "c*", "(a|c)*", "(abc)*", "a(b|c)*", "((a|b)c)*", "ca|b", "(ca)+", "(a|b)*c",
];

pub const NONFLAT_AB: &[&str] = &["(a|b)*", "(ab|b)*", "(a|bb)*", "(a|b)*b", "(aab|b)*"];

pub fn var_json(name: &str, re: &str) -> String {
    format!(r#"{{"name":"{name}","regex":"{re}"}}"#)
}

pub fn instance_json(alphabet: &str, vars: &[(String, String)], needle: &[String], haystack: &[String]) -> String {
    let vars: Vec<String> = vars.iter().map(|(n, r)| var_json(n, r)).collect();
    format!(
        r#"{{"alphabet":"{alphabet}","vars":[{}],"needle":[{}],"haystack":[{}]}}"#,
        vars.join(","),
        needle.join(","),
        haystack.join(",")
    )
}

pub fn lit(s: &str) -> String {
    format!(r#"{{"lit":"{s}"}}"#)
}

pub fn var(s: &str) -> String {
    format!(r#"{{"var":"{s}"}}"#)
}

pub fn random_lit<R: Rng>(rng: &mut R, letters: &[char], max_len: usize) -> String {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| *letters.choose(rng).unwrap()).collect()
}

/// A term of `1..=max_items` items over the given variables and letters.
pub fn random_term<R: Rng>(rng: &mut R, vars: &[&str], letters: &[char], max_items: usize) -> Vec<String> {
    let n = rng.gen_range(1..=max_items);
    (0..n)
        .map(|_| {
            if !vars.is_empty() && rng.gen_bool(0.5) {
                var(vars.choose(rng).unwrap())
            } else {
                lit(&random_lit(rng, letters, 3))
            }
        })
        .collect()
}

/// Instance with at most two variables, alphabet `ab` or `abc`, literals of
/// length at most 3, regexes from the fixed pools.
pub fn random_small_instance<R: Rng>(rng: &mut R) -> (String, Instance) {
    let three = rng.gen_bool(0.4);
    let (alphabet, letters): (&str, Vec<char>) = if three { ("abc", vec!['a', 'b', 'c']) } else { ("ab", vec!['a', 'b']) };
    let nvars = rng.gen_range(1..=2);
    let names = ["x", "y"];
    let mut vars = Vec::new();
    for name in &names[..nvars] {
        let pool: Vec<&str> = if three { POOL_AB.iter().chain(POOL_ABC).copied().collect() } else { POOL_AB.to_vec() };
        vars.push((name.to_string(), pool.choose(rng).unwrap().to_string()));
    }
    let needle = random_term(rng, &names[..nvars], &letters, 3);
    let haystack = random_term(rng, &names[..nvars], &letters, 4);
    let json = instance_json(alphabet, &vars, &needle, &haystack);
    let inst = parse_instance_json(&json).unwrap_or_else(|e| panic!("{json}: {e}"));
    (json, inst)
}

/// Largest value length of a model.
pub fn model_len(v: &Verdict) -> usize {
    v.model.as_ref().map(|m| m.values().map(|w| w.len()).max().unwrap_or(0)).unwrap_or(0)
}

/// Sat verdicts verify and are matched by the oracle unless the model is
/// longer than the bound; Unsat verdicts are never contradicted by it.
pub fn agrees_with_oracle(inst: &Instance, v: &Verdict, bound: usize) -> Result<(), String> {
    match v.status {
        Status::Sat => {
            let m = v.model.as_ref().ok_or("sat without model")?;
            if !verify_model(inst, m) {
                return Err("model does not verify".into());
            }
            match brute_oracle(inst, bound) {
                OracleResult::Sat(_) => Ok(()),
                _ if model_len(v) > bound => Ok(()),
                other => Err(format!("sat, oracle says {other:?}")),
            }
        }
        Status::Unsat => match brute_oracle(inst, bound) {
            OracleResult::Sat(m) => Err(format!("unsat, oracle found {m:?}")),
            _ => Ok(()),
        },
        Status::Unknown => Ok(()),
    }
}

/// Independent primitivity check: no proper divisor length repeats.
pub fn primitive_oracle(w: &[u32]) -> bool {
    let n = w.len();
    n > 0 && (1..n).filter(|d| n.is_multiple_of(*d)).all(|d| (0..n).any(|i| w[i] != w[i % d]))
}

/// All non-empty words over `k` letters of length at most `max`.
pub fn words_up_to(k: u32, max: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut level: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..max {
        level = level.iter().flat_map(|w| (0..k).map(move |a| [w.as_slice(), &[a]].concat())).collect();
        out.extend(level.iter().cloned());
    }
    out
}
