//! JSON instance format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::automata::{canonical_dfa, AutomataError, Regex};

use super::{ConstraintError, Instance, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub alphabet: String,
    #[serde(default)]
    pub vars: Vec<VarDecl>,
    pub needle: Vec<TermDoc>,
    pub haystack: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDecl {
    pub name: String,
    pub regex: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TermDoc {
    Lit(String),
    Var(String),
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_instance(doc: &InstanceDocument) -> Result<Instance, ConstraintError> {
    let alphabet = Alphabet::new(&doc.alphabet)?;
    let mut langs = BTreeMap::new();
    let mut sources = BTreeMap::new();
    for decl in &doc.vars {
        if !valid_name(&decl.name) {
            return Err(ConstraintError::BadName(decl.name.clone()));
        }
        if langs.contains_key(&decl.name) {
            return Err(ConstraintError::DuplicateVar(decl.name.clone()));
        }
        let regex = Regex::parse(&decl.regex, &alphabet)
            .map_err(|err| ConstraintError::Regex { var: decl.name.clone(), err })?;
        let dfa = canonical_dfa(&regex.to_nfa(alphabet.size())).map_err(|e| match e {
            AutomataError::EmptyLanguage => ConstraintError::EmptyLanguage(decl.name.clone()),
            other => other.into(),
        })?;
        langs.insert(decl.name.clone(), dfa);
        sources.insert(decl.name.clone(), regex);
    }
    let term = |items: &[TermDoc]| -> Result<Term, ConstraintError> {
        let mut t = Term::new();
        for item in items {
            match item {
                TermDoc::Lit(s) => {
                    let w = alphabet
                        .encode(s)
                        .map_err(|err| ConstraintError::Literal { lit: s.clone(), err })?;
                    t.push_lit(&w);
                }
                TermDoc::Var(x) => t.push_var(x),
            }
        }
        Ok(t)
    };
    let needle = term(&doc.needle)?;
    let haystack = term(&doc.haystack)?;
    let mut inst = Instance::new(alphabet, needle, haystack, langs)?;
    inst.sources = sources;
    Ok(inst)
}

pub fn parse_instance_json(text: &str) -> Result<Instance, ConstraintError> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| ConstraintError::Json(e.to_string()))?;
    parse_instance(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(alphabet: &str, vars: &[(&str, &str)], needle: &str, haystack: &str) -> String {
        let vars: Vec<String> =
            vars.iter().map(|(n, r)| format!(r#"{{"name":"{n}","regex":"{r}"}}"#)).collect();
        format!(
            r#"{{"alphabet":"{alphabet}","vars":[{}],"needle":{needle},"haystack":{haystack}}}"#,
            vars.join(",")
        )
    }

    #[test]
    fn running_example_parses() {
        let inst = super::super::tests::running_example();
        assert_eq!(inst.langs.len(), 2);
        assert_eq!(inst.needle.items().len(), 2);
        assert_eq!(inst.lang("z").num_states(), 3);
    }

    #[test]
    fn diagnostics() {
        let undeclared = doc("ab", &[], r#"[{"var":"x"}]"#, "[]");
        assert_eq!(
            parse_instance_json(&undeclared).unwrap_err(),
            ConstraintError::UndeclaredVar("x".into())
        );
        let reserved = doc("ab#", &[], "[]", "[]");
        assert!(matches!(parse_instance_json(&reserved), Err(ConstraintError::Alphabet(_))));
        let dup = doc("ab", &[("x", "a"), ("x", "b")], "[]", "[]");
        assert_eq!(parse_instance_json(&dup).unwrap_err(), ConstraintError::DuplicateVar("x".into()));
        let bad_lit = doc("ab", &[], r#"[{"lit":"ac"}]"#, "[]");
        assert!(matches!(parse_instance_json(&bad_lit), Err(ConstraintError::Literal { .. })));
        let bad_name = doc("ab", &[("x.1", "a")], "[]", "[]");
        assert!(matches!(parse_instance_json(&bad_name), Err(ConstraintError::BadName(_))));
        let bad_re = doc("ab", &[("x", "a(")], "[]", "[]");
        assert!(matches!(parse_instance_json(&bad_re), Err(ConstraintError::Regex { .. })));
        assert!(matches!(parse_instance_json("{"), Err(ConstraintError::Json(_))));
        let extra = r#"{"alphabet":"a","needle":[],"haystack":[],"extra":1}"#;
        assert!(matches!(parse_instance_json(extra), Err(ConstraintError::Json(_))));
    }
}
