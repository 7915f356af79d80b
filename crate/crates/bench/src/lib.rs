//! Fixed benchmark corpus shared by the criterion harness and the
//! `ncsolve bench` runner.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ncsolve_core::{parse_instance_json, Instance};

pub struct Named {
    pub name: &'static str,
    pub json: &'static str,
}

impl Named {
    pub fn instance(&self) -> Instance {
        parse_instance_json(self.json).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

/// One instance per pipeline stage, plus a few harder mixes.
pub const CORPUS: &[Named] = &[
    Named {
        name: "running_example",
        json: r#"{"alphabet":"abc","vars":[{"name":"x","regex":"(ab)+"},{"name":"z","regex":"(a(b|c)c)*"}],"needle":[{"lit":"ab"},{"var":"x"}],"haystack":[{"var":"x"},{"var":"z"}]}"#,
    },
    Named {
        name: "length_shortcut",
        json: r#"{"alphabet":"ab","vars":[{"name":"x","regex":"a(a|b)*"}],"needle":[{"var":"x"},{"lit":"bb"}],"haystack":[{"lit":"b"},{"var":"x"}]}"#,
    },
    Named {
        name: "flat_pair",
        json: r#"{"alphabet":"ab","vars":[{"name":"x","regex":"(ab)*"},{"name":"y","regex":"b*a"}],"needle":[{"lit":"ba"},{"var":"x"}],"haystack":[{"var":"y"},{"var":"x"},{"var":"y"}]}"#,
    },
    Named {
        name: "flat_unsat",
        json: r#"{"alphabet":"ab","vars":[{"name":"x","regex":"a|ab"}],"needle":[{"lit":"a"}],"haystack":[{"var":"x"},{"lit":"b"}]}"#,
    },
    Named {
        name: "two_sided",
        json: r#"{"alphabet":"ab","vars":[{"name":"z","regex":"(a|b)*"}],"needle":[{"var":"z"},{"lit":"b"}],"haystack":[{"lit":"a"},{"var":"z"}]}"#,
    },
    Named {
        name: "two_sided_border",
        json: r#"{"alphabet":"abc","vars":[{"name":"x","regex":"((a|b)c)*"}],"needle":[{"lit":"bc"},{"var":"x"}],"haystack":[{"var":"x"},{"var":"x"},{"lit":"baa"},{"var":"x"}]}"#,
    },
    Named {
        name: "haystack_only_unsat",
        json: r#"{"alphabet":"ab","vars":[{"name":"z","regex":"(a|b)*"}],"needle":[{"lit":"ab"}],"haystack":[{"lit":"a"},{"var":"z"},{"lit":"b"}]}"#,
    },
    Named {
        name: "haystack_only_sat",
        json: r#"{"alphabet":"ab","vars":[{"name":"z","regex":"(a|b)*"}],"needle":[{"lit":"bab"}],"haystack":[{"lit":"ba"},{"var":"z"},{"lit":"ab"}]}"#,
    },
    Named {
        name: "haystack_only_with_flat_needle",
        json: r#"{"alphabet":"ab","vars":[{"name":"x","regex":"(ab)*"},{"name":"z","regex":"(a|b)*"}],"needle":[{"lit":"bb"},{"var":"x"}],"haystack":[{"lit":"a"},{"var":"z"},{"lit":"a"}]}"#,
    },
    Named {
        name: "butterfly_haystack",
        json: r#"{"alphabet":"abc","vars":[{"name":"x","regex":"(ab)+"},{"name":"z","regex":"a(b|c)c(a(b|c)c)*"}],"needle":[{"lit":"ab"},{"var":"x"}],"haystack":[{"var":"x"},{"var":"z"}]}"#,
    },
];

/// Write every corpus instance to `dir/<name>.json`.
pub fn write_corpus(dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    CORPUS
        .iter()
        .map(|n| {
            let path = dir.join(format!("{}.json", n.name));
            fs::write(&path, n.json)?;
            Ok(path)
        })
        .collect()
}
