//! End-to-end decision procedure and the brute-force oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

use crate::automata::{classify_flatness, restrict_min_length, FlatPattern, Flatness};
use crate::constraints::{
    base, classify, compute_bounds, normalize, Assignment, Bounds, Class, Instance, Normalized, Term, TermItem,
};
use crate::flatsolver::{solve_flat, FlatConfig, FlatInstance, FlatLanguage, FlatVerdict};
use crate::gamma::{glue, underapprox_half, GammaCaps, GammaCtx, GammaError, Side};
use crate::twosided::{lift_model, strip_two_sided, LiftError};
use crate::words::{is_factor, Word};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundsProfile {
    Paper,
    /// Bounds multiplied by a factor in `(0, 1]`.
    Scaled(f64),
}

impl fmt::Display for BoundsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsProfile::Paper => write!(f, "paper"),
            BoundsProfile::Scaled(x) => write!(f, "scaled:{x}"),
        }
    }
}

impl FromStr for BoundsProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "paper" {
            return Ok(BoundsProfile::Paper);
        }
        let f: f64 = s
            .strip_prefix("scaled:")
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| format!("expected `paper` or `scaled:F`, got {s:?}"))?;
        if f > 0.0 && f <= 1.0 {
            Ok(BoundsProfile::Scaled(f))
        } else {
            Err(format!("scale factor must be in (0, 1], got {f}"))
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub profile: BoundsProfile,
    pub iter_bound: usize,
    /// Cap on reaching paths per prefix/suffix tree.
    pub max_paths: usize,
    /// Cap on patterns per underapproximation half.
    pub max_patterns: usize,
    pub max_disjuncts: usize,
    pub max_frames: usize,
    /// Brute-force probe up to this value length before the pipeline.
    pub probe_len: Option<usize>,
    pub flat_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            profile: BoundsProfile::Paper,
            iter_bound: 8,
            max_paths: 100_000,
            max_patterns: 50_000,
            max_disjuncts: 10_000,
            max_frames: 200_000,
            probe_len: Some(3),
            flat_budget: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Stage that produced the verdict.
    pub stage: String,
    pub disjuncts: usize,
    pub frames: usize,
    pub flat_calls: usize,
    pub underapprox_frames: usize,
    pub two_sided_vars: usize,
    pub bounds: Option<Bounds>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<Assignment>,
    pub reason: Option<String>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("internal error: {0}")]
    Internal(String),
}

/// `model` assigns every occurring variable a word of its language (and
/// every other assigned declared variable too), and the needle is not a
/// factor of the haystack.
pub fn verify_model(inst: &Instance, model: &Assignment) -> bool {
    model.iter().all(|(x, w)| inst.langs.get(x).is_none_or(|d| d.accepts(w))) && inst.satisfied_by(model)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Sat(Assignment),
    /// No model with values up to the bound; some language has longer words.
    NoneAtBound,
    /// No model at all: every language is finite and fully enumerated.
    ExhaustedUnsat,
}

/// Exhaustive search over values of length at most `len_bound`, variables
/// in name order, values shortest first then lexicographic.
pub fn brute_oracle(inst: &Instance, len_bound: usize) -> OracleResult {
    brute_capped(inst, len_bound, usize::MAX).expect("uncapped")
}

fn brute_capped(inst: &Instance, len_bound: usize, cap: usize) -> Option<OracleResult> {
    let vars = inst.vars();
    let mut values = Vec::with_capacity(vars.len());
    let mut total: usize = 1;
    for x in &vars {
        let ws = inst.lang(x).enumerate_words_capped(len_bound, cap)?;
        total = total.saturating_mul(ws.len());
        if total > cap {
            return None;
        }
        values.push(ws);
    }
    let complete = vars.iter().all(|x| {
        let d = inst.lang(x);
        d.is_finite() && crate::automata::LengthSet::of_dfa(d).max().is_some_and(|m| m <= len_bound)
    });
    if values.iter().any(Vec::is_empty) {
        return Some(if complete { OracleResult::ExhaustedUnsat } else { OracleResult::NoneAtBound });
    }
    let mut idx = vec![0usize; vars.len()];
    let mut sigma = Assignment::new();
    loop {
        for (i, x) in vars.iter().enumerate() {
            sigma.insert(x.clone(), values[i][idx[i]].clone());
        }
        if inst.satisfied_by(&sigma) {
            return Some(OracleResult::Sat(sigma));
        }
        // last variable varies fastest
        let mut i = vars.len();
        loop {
            if i == 0 {
                return Some(if complete { OracleResult::ExhaustedUnsat } else { OracleResult::NoneAtBound });
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < values[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// The needle occurs verbatim inside the haystack term, so every assignment
/// makes it a factor.
fn contained_syntactically(n: &Term, h: &Term) -> bool {
    let ni = n.items();
    let hi = h.items();
    let k = ni.len();
    if k == 0 {
        return true;
    }
    if k == 1 {
        return match &ni[0] {
            TermItem::Lit(l) => h.literals().any(|m| is_factor(l, m)),
            v => hi.contains(v),
        };
    }
    (0..hi.len().saturating_sub(k - 1)).any(|j| {
        ni.iter().enumerate().all(|(i, item)| match (item, &hi[j + i]) {
            (TermItem::Lit(a), TermItem::Lit(b)) if i == 0 => b.ends_with(a),
            (TermItem::Lit(a), TermItem::Lit(b)) if i + 1 == k => b.starts_with(a),
            (a, b) => a == b,
        })
    })
}

/// Outcome of one branch of the search.
enum Branch {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

struct Solver<'c> {
    cfg: &'c SolverConfig,
    stats: Stats,
    /// Some refuted frame relied on a scaled underapproximation.
    incomplete_unsat: bool,
}

fn flat_patterns(inst: &Instance, x: &str) -> Result<Vec<FlatPattern>, SolveError> {
    match classify_flatness(inst.lang(x)) {
        Flatness::Flat(ps) => Ok(ps),
        Flatness::NonFlat(_) => Err(SolveError::Internal(format!("{x} expected flat"))),
    }
}

/// Short values of `x` (below `n0`) for every variable not in `long`.
fn short_values(inst: &Instance, vars: &[String], n0: usize) -> Vec<Vec<Word>> {
    vars.iter().map(|x| inst.lang(x).enumerate_words(n0.saturating_sub(1))).collect()
}

/// Subsets of `0..n` by increasing size, each size in lexicographic order.
fn subsets_by_size(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 0..=n {
        let mut c: Vec<usize> = (0..size).collect();
        loop {
            out.push(c.clone());
            let mut i = size;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if c[i] < n - size + i {
                    c[i] += 1;
                    for j in i + 1..size {
                        c[j] = c[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    out
}

impl Solver<'_> {
    fn flat_config(&self) -> FlatConfig {
        FlatConfig { iter_bound: self.cfg.iter_bound, budget: self.cfg.flat_budget }
    }

    fn run_flat(&mut self, fi: &FlatInstance) -> Branch {
        self.stats.flat_calls += 1;
        match solve_flat(fi, &self.flat_config()) {
            FlatVerdict::Sat(m) => Branch::Sat(m),
            FlatVerdict::Unsat => Branch::Unsat,
            FlatVerdict::Unknown(r) => Branch::Unknown(r),
        }
    }

    fn all_flat(&mut self, inst: &Instance) -> Result<Branch, SolveError> {
        let mut langs = BTreeMap::new();
        for x in inst.vars() {
            langs.insert(x.clone(), FlatLanguage::from_patterns(flat_patterns(inst, &x)?));
        }
        let fi = FlatInstance {
            num_symbols: inst.alphabet.size(),
            needle: inst.needle.clone(),
            haystack: inst.haystack.clone(),
            langs,
        };
        Ok(self.run_flat(&fi))
    }

    fn disjunct(&mut self, inst: &Instance) -> Result<Branch, SolveError> {
        if contained_syntactically(&inst.needle, &inst.haystack) {
            self.stats.stage = "syntactic".into();
            return Ok(Branch::Unsat);
        }
        match classify(inst) {
            Class::EasyLengthSat(m) => {
                self.stats.stage = "length-abstraction".into();
                return Ok(Branch::Sat(m));
            }
            Class::NeedleOnlyNonFlatSat(m) => {
                self.stats.stage = "needle-pumping".into();
                return Ok(Branch::Sat(m));
            }
            Class::EasyAllFlat => {
                self.stats.stage = "flat".into();
                return self.all_flat(inst);
            }
            Class::HardTwoSided | Class::HardHaystackOnly => {}
        }
        let (stripped, plan) = strip_two_sided(inst).map_err(|e| SolveError::Internal(e.to_string()))?;
        self.stats.two_sided_vars += plan.entries.len();
        debug!("stripped: {stripped}");
        let branch = self.stripped(&stripped)?;
        match branch {
            Branch::Sat(m) if !plan.is_empty() => match lift_model(inst, &plan, &m) {
                Ok(m) => Ok(Branch::Sat(m)),
                Err(LiftError::Verification) => Ok(Branch::Unknown("lift-failed".into())),
                Err(e) => Err(SolveError::Internal(format!("lifting failed: {e}"))),
            },
            other => Ok(other),
        }
    }

    fn stripped(&mut self, inst: &Instance) -> Result<Branch, SolveError> {
        if contained_syntactically(&inst.needle, &inst.haystack) {
            self.stats.stage = "syntactic".into();
            return Ok(Branch::Unsat);
        }
        if inst.vars().is_empty() {
            self.stats.stage = "ground".into();
            let sat = inst.satisfied_by(&Assignment::new());
            return Ok(if sat { Branch::Sat(Assignment::new()) } else { Branch::Unsat });
        }
        match classify(inst) {
            Class::EasyLengthSat(m) | Class::NeedleOnlyNonFlatSat(m) => {
                self.stats.stage = "length-abstraction".into();
                return Ok(Branch::Sat(m));
            }
            Class::EasyAllFlat => {
                self.stats.stage = "flat".into();
                return self.all_flat(inst);
            }
            Class::HardTwoSided | Class::HardHaystackOnly => {}
        }
        self.stats.stage = "underapprox".into();
        let paper = compute_bounds(inst).map_err(|e| SolveError::Internal(e.to_string()))?;
        let bounds = match self.cfg.profile {
            BoundsProfile::Paper => paper,
            BoundsProfile::Scaled(f) => paper.scaled(f),
        };
        info!("bounds: {bounds:?}");
        self.stats.bounds = Some(bounds);
        let flat = inst.flat_vars();
        let nonflat = inst.nonflat_vars();
        let mut ctxs = BTreeMap::new();
        for z in &nonflat {
            ctxs.insert(z.clone(), GammaCtx::from_instance(inst, z).map_err(|e| SolveError::Internal(e.to_string()))?);
        }
        let mut bases = BTreeMap::new();
        for x in flat.iter().filter(|x| inst.in_needle(x)) {
            bases.insert(x.clone(), base(inst, x).map_err(|e| SolveError::Internal(e.to_string()))?);
        }
        let caps = GammaCaps { path_cap: self.cfg.max_paths, pattern_cap: self.cfg.max_patterns };
        let mut cache: HashMap<(String, Term), Result<FlatLanguage, GammaError>> = HashMap::new();
        let mut first_unknown: Option<String> = None;

        for long in subsets_by_size(flat.len()) {
            let short: Vec<String> =
                (0..flat.len()).filter(|i| !long.contains(i)).map(|i| flat[i].clone()).collect();
            let values = short_values(inst, &short, bounds.n0);
            if values.iter().any(Vec::is_empty) {
                continue;
            }
            let mut long_langs = BTreeMap::new();
            let mut empty = false;
            for &i in &long {
                let x = &flat[i];
                let ps: Vec<FlatPattern> = flat_patterns(inst, x)?
                    .iter()
                    .flat_map(|p| restrict_min_length(p, bounds.n0))
                    .collect();
                empty |= ps.is_empty();
                long_langs.insert(x.clone(), FlatLanguage::from_patterns(ps));
            }
            if empty {
                continue;
            }
            let mut idx = vec![0usize; short.len()];
            loop {
                self.stats.frames += 1;
                if self.stats.frames > self.cfg.max_frames {
                    return Ok(Branch::Unknown(first_unknown.unwrap_or_else(|| "frame-cap".into())));
                }
                let mut sigma = Assignment::new();
                let mut frame = inst.clone();
                for (i, x) in short.iter().enumerate() {
                    let v = values[i][idx[i]].clone();
                    frame = frame.substitute(x, &Term::lit(v.clone()));
                    sigma.insert(x.clone(), v);
                }
                match self.frame(&frame, &ctxs, &bounds, &bases, &caps, &long_langs, &mut cache)? {
                    Branch::Sat(m) => {
                        sigma.extend(m);
                        return Ok(Branch::Sat(sigma));
                    }
                    Branch::Unsat => {}
                    Branch::Unknown(r) => {
                        first_unknown.get_or_insert(r);
                    }
                }
                let mut i = short.len();
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < values[i].len() {
                        advanced = true;
                        break;
                    }
                    idx[i] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        Ok(match first_unknown {
            Some(r) => Branch::Unknown(r),
            None => Branch::Unsat,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn frame(
        &mut self,
        frame: &Instance,
        ctxs: &BTreeMap<String, GammaCtx>,
        bounds: &Bounds,
        bases: &BTreeMap<String, Word>,
        caps: &GammaCaps,
        long_langs: &BTreeMap<String, FlatLanguage>,
        cache: &mut HashMap<(String, Term), Result<FlatLanguage, GammaError>>,
    ) -> Result<Branch, SolveError> {
        if contained_syntactically(&frame.needle, &frame.haystack) {
            return Ok(Branch::Unsat);
        }
        let mut langs = BTreeMap::new();
        let mut approximated = false;
        for x in frame.vars() {
            if let Some(l) = long_langs.get(&x) {
                langs.insert(x, l.clone());
                continue;
            }
            approximated = true;
            let key = (x.clone(), frame.needle.clone());
            let l = cache
                .entry(key)
                .or_insert_with(|| {
                    let ctx = &ctxs[&x];
                    let pre = underapprox_half(frame, ctx, Side::Pref, bounds, bases, caps)?;
                    let suf = underapprox_half(frame, ctx, Side::Suf, bounds, bases, caps)?;
                    Ok(glue(&pre, &suf, ctx, bounds.g))
                })
                .clone();
            match l {
                Ok(l) => {
                    langs.insert(x, l);
                }
                Err(GammaError::CapExceeded) => return Ok(Branch::Unknown("underapprox-cap".into())),
                Err(e) => return Err(SolveError::Internal(e.to_string())),
            }
        }
        if approximated {
            self.stats.underapprox_frames += 1;
        }
        let fi = FlatInstance {
            num_symbols: frame.alphabet.size(),
            needle: frame.needle.clone(),
            haystack: frame.haystack.clone(),
            langs,
        };
        let b = self.run_flat(&fi);
        if matches!(b, Branch::Unsat) && approximated && matches!(self.cfg.profile, BoundsProfile::Scaled(_)) {
            self.incomplete_unsat = true;
        }
        Ok(b)
    }
}

/// Complete `model` with the shortest word for declared variables it lacks.
fn fill_declared(inst: &Instance, model: &mut Assignment) {
    for (x, d) in &inst.langs {
        if !model.contains_key(x) {
            if let Some(w) = d.shortest_accepted() {
                model.insert(x.clone(), w);
            }
        }
    }
}

fn finish_sat(inst: &Instance, mut model: Assignment, stats: Stats) -> Result<Verdict, SolveError> {
    fill_declared(inst, &mut model);
    if !verify_model(inst, &model) {
        return Err(SolveError::Internal(format!("model failed verification at stage {}", stats.stage)));
    }
    Ok(Verdict { status: Status::Sat, model: Some(model), reason: None, stats })
}

fn unknown(reason: String, stats: Stats) -> Verdict {
    Verdict { status: Status::Unknown, model: None, reason: Some(reason), stats }
}

/// Decide `inst`. Sat models are verified against `inst` before returning;
/// a model that fails verification is reported as an internal error.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<Verdict, SolveError> {
    let mut solver = Solver { cfg, stats: Stats::default(), incomplete_unsat: false };
    if let Some(len) = cfg.probe_len {
        match brute_capped(inst, len, 100_000) {
            Some(OracleResult::Sat(m)) => {
                solver.stats.stage = "probe".into();
                return finish_sat(inst, m, solver.stats);
            }
            Some(OracleResult::ExhaustedUnsat) => {
                solver.stats.stage = "probe".into();
                return Ok(Verdict { status: Status::Unsat, model: None, reason: None, stats: solver.stats });
            }
            _ => {}
        }
    }
    let disjuncts = match normalize(inst, cfg.max_disjuncts) {
        Normalized::TriviallySat(m) => {
            solver.stats.stage = "normalize".into();
            return finish_sat(inst, m, solver.stats);
        }
        Normalized::CapExceeded => return Ok(unknown("normalize-cap".into(), solver.stats)),
        Normalized::Disjuncts(ds) => ds,
    };
    solver.stats.disjuncts = disjuncts.len();
    info!("{} disjuncts", disjuncts.len());
    let mut first_unknown = None;
    for d in &disjuncts {
        debug!("disjunct: {}", d.instance);
        match solver.disjunct(&d.instance)? {
            Branch::Sat(m) => {
                if !d.instance.satisfied_by(&m) {
                    return Err(SolveError::Internal(format!(
                        "disjunct model failed verification at stage {}",
                        solver.stats.stage
                    )));
                }
                let model = d
                    .reconstruct(&m)
                    .ok_or_else(|| SolveError::Internal("reconstruction is missing a value".into()))?;
                return finish_sat(inst, model, solver.stats);
            }
            Branch::Unsat => {}
            Branch::Unknown(r) => {
                first_unknown.get_or_insert(r);
            }
        }
    }
    if disjuncts.is_empty() {
        solver.stats.stage = "normalize".into();
    }
    match first_unknown {
        Some(r) => Ok(unknown(r, solver.stats)),
        None if solver.incomplete_unsat => Ok(unknown("scaled-incomplete".into(), solver.stats)),
        None => Ok(Verdict { status: Status::Unsat, model: None, reason: None, stats: solver.stats }),
    }
}
