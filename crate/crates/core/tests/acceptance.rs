//! Acceptance suite: one line per criterion with its time limit.
//!
//! Run with `cargo test -p ncsolve-core --test acceptance`. Exits non-zero if
//! any criterion fails or overruns.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ncsolve_core::automata::{classify_flatness, Butterfly, Flatness};
use ncsolve_core::constraints::{normalize, Normalized};
use ncsolve_core::flatsolver::{solve_flat, FlatConfig, FlatInstance, FlatLanguage, FlatVerdict};
use ncsolve_core::gamma::is_dead_end;
use ncsolve_core::twosided::{lift_model, strip_two_sided};
use ncsolve_core::words::{
    alignment_conflict, build_gamma_two_sided, build_two_sided_alpha_beta, gcd_len, is_primitive, primitive_root,
    Alignment,
};
use ncsolve_core::{
    brute_oracle, parse_instance_json, solve, verify_model, Assignment, BoundsProfile, Dfa, FlatPattern, Instance,
    OracleResult, SolverConfig, Status, Word,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn w(s: &str) -> Word {
    s.bytes().map(|b| (b - b'a') as u32).collect()
}

fn rotations_primitive() -> Outcome {
    let mut checked = 0;
    for x in words_up_to(2, 10) {
        if primitive_oracle(&x) != is_primitive(&x).unwrap() {
            return fail(format!("primitivity disagrees on {x:?}"));
        }
        if !primitive_oracle(&x) {
            continue;
        }
        for i in 1..x.len() {
            let r = [&x[i..], &x[..i]].concat();
            checked += 1;
            if !is_primitive(&r).unwrap() || !primitive_oracle(&r) {
                return fail(format!("rotation {r:?} of {x:?} not primitive"));
            }
        }
    }
    pass(format!("{checked} rotations primitive"))
}

fn fine_wilf() -> Outcome {
    let words = words_up_to(2, 5);
    let mut premises = 0;
    for x in &words {
        for y in &words {
            // x^∞ and y^∞ agree on |x| + |y| - gcd positions
            let n = x.len() + y.len() - gcd_len(x.len(), y.len());
            if (0..n).all(|i| x[i % x.len()] == y[i % y.len()]) {
                premises += 1;
                if primitive_root(x).unwrap().0 != primitive_root(y).unwrap().0 {
                    return fail(format!("counterexample {x:?} {y:?}"));
                }
            }
        }
    }
    pass(format!("{premises} premise pairs, 0 counterexamples"))
}

fn overlap_conflicts() -> Outcome {
    let prims: Vec<Vec<u32>> = words_up_to(2, 4).into_iter().filter(|x| primitive_oracle(x)).collect();
    let mut alignments = 0u64;
    for a in &prims {
        for b in &prims {
            if a.len() == b.len() {
                continue;
            }
            let bound = a.len() + b.len() - gcd_len(a.len(), b.len());
            for i in 1..=24 / a.len() {
                for j in 1..=24 / b.len() {
                    let left: Vec<u32> = a.repeat(i);
                    let right: Vec<u32> = b.repeat(j);
                    let lo = -(right.len() as isize);
                    for shift in lo..=left.len() as isize {
                        let al = Alignment::new(left.clone(), right.clone(), shift);
                        if al.overlap_size() < bound {
                            continue;
                        }
                        alignments += 1;
                        if !alignment_conflict(&al) {
                            return fail(format!("no conflict: {a:?}^{i} vs {b:?}^{j} at {shift}"));
                        }
                    }
                }
            }
        }
    }
    pass(format!("{alignments} alignments, all conflicting"))
}

fn distinct_root_powers() -> Outcome {
    let words = words_up_to(2, 3);
    let mut checked = 0;
    for u in &words {
        for v in &words {
            if primitive_root(u).unwrap().0 == primitive_root(v).unwrap().0 {
                continue;
            }
            for l in [2, 3] {
                for m in [2, 3] {
                    let x = [u.repeat(l), v.repeat(m)].concat();
                    checked += 1;
                    if !primitive_oracle(&x) {
                        return fail(format!("u={u:?} v={v:?} L={l} M={m}"));
                    }
                }
            }
        }
    }
    pass(format!("{checked} words primitive"))
}

/// Brute force: no shift `k` with `1 ≤ k ≤ |g| - ell` lets `g` overlap itself
/// without a conflict.
fn aligned_oracle(g: &[u32], ell: usize) -> bool {
    (1..=g.len() - ell).all(|k| (k..g.len()).any(|i| g[i] != g[i - k]))
}

fn gamma_alignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = vec![(w("ab"), w("aab"))];
    while pairs.len() < 11 {
        let mut rand_word = || -> Word { (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..2)).collect() };
        let (u, v) = (rand_word(), rand_word());
        if primitive_root(&u).unwrap().0 != primitive_root(&v).unwrap().0 {
            pairs.push((u, v));
        }
    }
    for (u, v) in &pairs {
        let (alpha, beta) = build_two_sided_alpha_beta(u, v).unwrap();
        let g = build_gamma_two_sided(&alpha, &beta, 2).unwrap();
        if !aligned_oracle(&g, 3 * alpha.len()) {
            return fail(format!("γ for u={u:?} v={v:?} not aligned"));
        }
    }
    pass(format!("{} pairs aligned", pairs.len()))
}

fn running_example() -> Instance {
    parse_instance_json(
        r#"{"alphabet":"abc","vars":[{"name":"x","regex":"(ab)+"},{"name":"z","regex":"(a(b|c)c)*"}],
            "needle":[{"lit":"ab"},{"var":"x"}],"haystack":[{"var":"x"},{"var":"z"}]}"#,
    )
    .unwrap()
}

fn dead_end_golden() -> Outcome {
    let inst = running_example();
    let mut partial = Assignment::new();
    partial.insert("x".into(), w("ab"));
    let a = is_dead_end(&inst, &partial, "z", &w("abca")).unwrap();
    let b = is_dead_end(&inst, &partial, "z", &w("acc")).unwrap();
    if a && !b {
        pass("abca dead end, acc not")
    } else {
        fail(format!("abca -> {a}, acc -> {b}"))
    }
}

fn random_dfa<R: Rng>(rng: &mut R) -> Option<Dfa> {
    let n = rng.gen_range(1..=4);
    let delta = (0..n)
        .map(|_| (0..2).map(|_| if rng.gen_bool(0.75) { Some(rng.gen_range(0..n)) } else { None }).collect())
        .collect();
    let finals = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    Dfa::from_parts(2, delta, 0, finals).canonicalize().ok()
}

/// Independent membership test for `l0 (c1)* l1 … (ck)* lk`.
fn pattern_matches(p: &FlatPattern, x: &[u32]) -> bool {
    fn go(lits: &[Word], loops: &[Word], x: &[u32]) -> bool {
        let Some(rest) = x.strip_prefix(lits[0].as_slice()) else { return false };
        if loops.is_empty() {
            return rest.is_empty();
        }
        let mut cur = rest;
        loop {
            if go(&lits[1..], &loops[1..], cur) {
                return true;
            }
            match cur.strip_prefix(loops[0].as_slice()) {
                Some(next) if !loops[0].is_empty() => cur = next,
                _ => return false,
            }
        }
    }
    go(p.literals(), p.loops(), x)
}

fn butterfly_valid(d: &Dfa, b: &Butterfly) -> bool {
    let run = |q: usize, x: &[u32]| x.iter().try_fold(q, |q, &a| d.step(q, a));
    let q = b.loop_state;
    !b.u.is_empty()
        && !b.v.is_empty()
        && b.u[0] != b.v[0]
        && primitive_root(&b.u).unwrap().0 != primitive_root(&b.v).unwrap().0
        && run(d.initial(), &b.p) == Some(q)
        && run(q, &b.u) == Some(q)
        && run(q, &b.v) == Some(q)
        && run(q, &b.s).is_some_and(|f| d.is_final(f))
}

fn flatness_certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words: Vec<Vec<u32>> = std::iter::once(vec![]).chain(words_up_to(2, 12)).collect();
    let (mut flat, mut nonflat, mut made) = (0, 0, 0);
    while made < 500 {
        let Some(d) = random_dfa(&mut rng) else { continue };
        made += 1;
        match classify_flatness(&d) {
            Flatness::Flat(ps) => {
                flat += 1;
                for x in &words {
                    if d.accepts(x) != ps.iter().any(|p| pattern_matches(p, x)) {
                        return fail(format!("decomposition differs on {x:?}"));
                    }
                }
            }
            Flatness::NonFlat(b) => {
                nonflat += 1;
                if !butterfly_valid(&d, &b) {
                    return fail(format!("invalid butterfly {b:?}"));
                }
            }
        }
    }
    pass(format!("{flat} flat, {nonflat} non-flat"))
}

fn two_sided_instance<R: Rng>(rng: &mut R) -> Instance {
    let letters = ['a', 'b'];
    let z = NONFLAT_AB[rng.gen_range(0..NONFLAT_AB.len())];
    let mut vars = vec![("z".to_string(), z.to_string())];
    let with_x = rng.gen_bool(0.3);
    if with_x {
        vars.push(("x".to_string(), ["(ab)*", "a*", "ab|b"][rng.gen_range(0..3)].to_string()));
    }
    let side = |rng: &mut R, extra: bool| {
        let mut t = Vec::new();
        if rng.gen_bool(0.6) {
            t.push(lit(&random_lit(rng, &letters, 3)));
        }
        t.push(var("z"));
        if extra {
            t.push(var("x"));
        }
        if rng.gen_bool(0.6) {
            t.push(lit(&random_lit(rng, &letters, 3)));
        }
        t
    };
    let needle = side(rng, false);
    let haystack = side(rng, with_x);
    parse_instance_json(&instance_json("ab", &vars, &needle, &haystack)).unwrap()
}

fn two_sided_removal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = SolverConfig { probe_len: None, ..SolverConfig::default() };
    let (mut lifted, mut unsat, mut stripped_seen) = (0, 0, 0);
    for k in 0..30 {
        let inst = two_sided_instance(&mut rng);
        // strip and lift every normalized disjunct directly
        if let Normalized::Disjuncts(ds) = normalize(&inst, 1000) {
            for d in ds {
                let (stripped, plan) = strip_two_sided(&d.instance).unwrap();
                if plan.is_empty() {
                    continue;
                }
                stripped_seen += 1;
                let v = solve(&stripped, &cfg).unwrap();
                if v.status != Status::Sat {
                    continue;
                }
                let m: Assignment = v
                    .model
                    .unwrap()
                    .into_iter()
                    .filter(|(x, _)| stripped.langs.contains_key(x))
                    .collect();
                let Ok(sigma) = lift_model(&d.instance, &plan, &m) else {
                    return fail(format!("instance {k}: lifting failed for {}", d.instance));
                };
                let orig = d.reconstruct(&sigma).unwrap();
                if !verify_model(&inst, &orig) {
                    return fail(format!("instance {k}: lifted model does not verify"));
                }
                lifted += 1;
            }
        }
        let v = solve(&inst, &cfg).unwrap();
        if let Err(e) = agrees_with_oracle(&inst, &v, 6) {
            return fail(format!("instance {k} ({inst}): {e}"));
        }
        if v.status == Status::Unsat {
            unsat += 1;
        }
    }
    pass(format!("{stripped_seen} stripped disjuncts, {lifted} lifted and verified, {unsat} unsat confirmed"))
}

fn paper_bounds_corpus() -> Vec<(String, &'static str, &'static str)> {
    let z = ("z".to_string(), "(a|b)*".to_string());
    let mk = |extra: &[(&str, &str)], n: &[String], h: &[String]| {
        let mut vars = vec![z.clone()];
        vars.extend(extra.iter().map(|(a, b)| (a.to_string(), b.to_string())));
        instance_json("ab", &vars, n, h)
    };
    vec![
        (mk(&[], &[lit("ab")], &[lit("a"), var("z"), lit("b")]), "a z b contains ab", "unsat"),
        (mk(&[], &[lit("aa")], &[lit("b"), var("z"), lit("b")]), "z empty", "sat"),
        (mk(&[], &[lit("ba")], &[lit("b"), var("z"), lit("a")]), "b z a contains ba", "unsat"),
        (mk(&[], &[lit("aba")], &[var("z"), lit("ab"), var("z")]), "z empty", "sat"),
        (mk(&[], &[var("z"), lit("b")], &[lit("a"), var("z")]), "two-sided", "sat"),
        (mk(&[("x", "a*")], &[lit("ab")], &[lit("a"), var("z"), lit("b"), var("x")]), "a z b x", "unsat"),
        (mk(&[("x", "b*")], &[lit("bb")], &[var("x"), lit("a"), var("z")]), "flat x", "sat"),
        (mk(&[], &[lit("bab")], &[lit("ba"), var("z"), lit("ab")]), "avoid bab", "sat"),
        (mk(&[("x", "ab|ba")], &[var("x")], &[lit("a"), var("z"), lit("b")]), "x = ba", "sat"),
        (mk(&[], &[lit("a")], &[lit("bb"), var("z"), lit("a")]), "literal a", "unsat"),
    ]
}

fn paper_bounds_end_to_end() -> Outcome {
    let cfg = SolverConfig { probe_len: None, profile: BoundsProfile::Paper, ..SolverConfig::default() };
    let mut slowest = Duration::ZERO;
    let mut tally = BTreeMap::new();
    for (json, what, expected) in paper_bounds_corpus() {
        let inst = parse_instance_json(&json).unwrap();
        let t = Instant::now();
        let v = match solve(&inst, &cfg) {
            Ok(v) => v,
            Err(e) => return fail(format!("{what}: {e}")),
        };
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        if dt > Duration::from_secs(60) {
            return fail(format!("{what}: {dt:?}"));
        }
        if v.status.to_string() != expected {
            return fail(format!("{what}: got {} ({:?}), expected {expected}", v.status, v.reason));
        }
        if let Err(e) = agrees_with_oracle(&inst, &v, 6) {
            return fail(format!("{what}: {e}"));
        }
        *tally.entry(expected).or_insert(0) += 1;
    }
    pass(format!("{tally:?}, slowest {slowest:.2?}"))
}

fn scaled_corpus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = SolverConfig { profile: BoundsProfile::Scaled(0.2), ..SolverConfig::default() };
    let mut counts = BTreeMap::new();
    let mut unknown_reasons: BTreeMap<String, usize> = BTreeMap::new();
    let mut stages: BTreeMap<String, usize> = BTreeMap::new();
    for k in 0..200 {
        let (json, inst) = random_small_instance(&mut rng);
        let v = match solve(&inst, &cfg) {
            Ok(v) => v,
            Err(e) => return fail(format!("instance {k} {json}: {e}")),
        };
        if let Err(e) = agrees_with_oracle(&inst, &v, 6) {
            return fail(format!("instance {k} {json}: {e}"));
        }
        if let Some(r) = &v.reason {
            *unknown_reasons.entry(r.clone()).or_default() += 1;
        }
        *counts.entry(v.status.to_string()).or_insert(0) += 1;
        *stages.entry(v.stats.stage.clone()).or_default() += 1;
    }
    let unknown = counts.get("unknown").copied().unwrap_or(0);
    let detail = format!("{counts:?}, unknown reasons {unknown_reasons:?}, stages {stages:?}");
    if unknown * 100 <= 30 * 200 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn random_flat_instance<R: Rng>(rng: &mut R) -> Instance {
    const FLAT: &[&str] = &["a*", "(ab)*", "b+", "a|bb", "a(ba)*", "(ab)+b", "ab|ba", "(aab)*", "b*a*", "a?b"];
    let nvars = rng.gen_range(1..=2);
    let names = ["x", "y"];
    let vars: Vec<(String, String)> =
        names[..nvars].iter().map(|n| (n.to_string(), FLAT[rng.gen_range(0..FLAT.len())].to_string())).collect();
    let needle = random_term(rng, &names[..nvars], &['a', 'b'], 3);
    let haystack = random_term(rng, &names[..nvars], &['a', 'b'], 4);
    parse_instance_json(&instance_json("ab", &vars, &needle, &haystack)).unwrap()
}

fn flat_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = BTreeMap::new();
    for k in 0..100 {
        let inst = random_flat_instance(&mut rng);
        let mut langs = BTreeMap::new();
        for x in inst.vars() {
            let Flatness::Flat(ps) = classify_flatness(inst.lang(&x)) else {
                return fail(format!("instance {k}: {x} not flat"));
            };
            langs.insert(x, FlatLanguage::from_patterns(ps));
        }
        let needle_finite = inst.needle.vars().all(|x| inst.is_finite(x));
        let fi = FlatInstance {
            num_symbols: inst.alphabet.size(),
            needle: inst.needle.clone(),
            haystack: inst.haystack.clone(),
            langs,
        };
        let verdict = solve_flat(&fi, &FlatConfig::default());
        let oracle = brute_oracle(&inst, 6);
        let label = match &verdict {
            FlatVerdict::Sat(m) => {
                let long = m.values().any(|v| v.len() > 6);
                if !verify_model(&inst, m) || !(matches!(oracle, OracleResult::Sat(_)) || long) {
                    return fail(format!("instance {k} ({inst}): sat {m:?}, oracle {oracle:?}"));
                }
                "sat"
            }
            FlatVerdict::Unsat => {
                if matches!(oracle, OracleResult::Sat(_)) || !needle_finite {
                    return fail(format!("instance {k} ({inst}): unsat, oracle {oracle:?}"));
                }
                "unsat"
            }
            FlatVerdict::Unknown(_) => "unknown",
        };
        *counts.entry(label).or_insert(0) += 1;
    }
    pass(format!("{counts:?}"))
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: &[Criterion] = &[
        (1, "rotations of primitive words are primitive", 1, rotations_primitive),
        (2, "periodicity agreement implies a common root", 5, fine_wilf),
        (3, "long overlaps of distinct primitive powers conflict", 10, overlap_conflicts),
        (4, "u^L v^M primitive for distinct roots", 1, distinct_root_powers),
        (5, "two-sided gamma is (r+1)|alpha|-aligned", 5, gamma_alignment),
        (6, "dead-end golden example", 1, dead_end_golden),
        (7, "flatness certificates on random DFAs", 30, flatness_certification),
        (8, "two-sided removal lifts verified models", 120, two_sided_removal),
        (9, "paper bounds end to end on (a|b)*", 600, paper_bounds_end_to_end),
        (10, "scaled profile corpus agrees with oracle", 300, scaled_corpus),
        (11, "flat solver agrees with oracle", 60, flat_solver),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for &(id, name, limit, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(limit);
        let ok = outcome.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name} ({:.2?} / limit {limit}s): {}",
            if ok { "PASS" } else { "FAIL" },
            dt,
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
