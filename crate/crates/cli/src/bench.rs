//! Corpus runner: one CSV row per instance file, in file-name order.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use ncsolve_core::{emit_smtlib, parse_instance_json, solve, SolverConfig};
use rayon::prelude::*;

pub struct Row {
    pub file: String,
    pub status: String,
    pub ms: u128,
    /// Diagnostic for files that could not be solved.
    pub error: Option<String>,
}

/// Instance files (`*.json`) directly inside `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run_one(path: &Path, cfg: &SolverConfig, smt_dir: Option<&Path>) -> Row {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let start = Instant::now();
    let result = (|| -> Result<String, String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let inst = parse_instance_json(&text).map_err(|e| e.to_string())?;
        if let Some(dir) = smt_dir {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let out = dir.join(format!("{stem}.smt2"));
            let mut sink = BufWriter::new(File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?);
            emit_smtlib(&inst, &mut sink).and_then(|_| sink.flush()).map_err(|e| e.to_string())?;
        }
        let verdict = solve(&inst, cfg).map_err(|e| e.to_string())?;
        Ok(verdict.status.to_string())
    })();
    let ms = start.elapsed().as_millis();
    info!("{file}: {result:?} in {ms} ms");
    match result {
        Ok(status) => Row { file, status, ms, error: None },
        Err(e) => Row { file, status: "error".into(), ms, error: Some(e) },
    }
}

/// Solve every file with `workers` threads; rows come back in input order.
pub fn run(files: &[PathBuf], cfg: &SolverConfig, workers: usize, smt_dir: Option<&Path>) -> io::Result<Vec<Row>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(io::Error::other)?;
    Ok(pool.install(|| files.par_iter().map(|f| run_one(f, cfg, smt_dir)).collect()))
}

pub fn write_csv(out: &mut dyn Write, rows: &[Row], profile: &str) -> io::Result<()> {
    writeln!(out, "file,status,ms,profile")?;
    for row in rows {
        writeln!(out, "{},{},{},{}", csv_field(&row.file), row.status, row.ms, profile)?;
    }
    let count = |s: &str| rows.iter().filter(|r| r.status == s).count();
    writeln!(
        out,
        "# files={} sat={} unsat={} unknown={} error={}",
        rows.len(),
        count("sat"),
        count("unsat"),
        count("unknown"),
        count("error")
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
