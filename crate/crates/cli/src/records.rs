//! JSON Lines records exchanged between stages.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use defgraph::annotation::{AnnotatedDefinition, PartOfSpeech};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::InputError;

/// A definition waiting to be labeled.
#[derive(Debug, Clone, Deserialize)]
pub struct RawDefinition {
    pub id: String,
    pub pos: PartOfSpeech,
    #[serde(default)]
    pub lemmas: Vec<String>,
    pub gloss: String,
    #[serde(default)]
    pub tree: Option<String>,
    /// One named-entity tag per token.
    #[serde(default)]
    pub entity_tags: Option<Vec<String>>,
}

/// An annotated definition, optionally carrying its parse and any warnings
/// raised while post-processing it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatedRecord {
    #[serde(flatten)]
    pub def: AnnotatedDefinition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TreeRecord {
    pub id: String,
    pub tree: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PairRecord {
    #[serde(default)]
    pub id: Option<String>,
    pub t: String,
    pub h: String,
    #[serde(default)]
    pub t_tags: Option<Vec<String>>,
    #[serde(default)]
    pub h_tags: Option<Vec<String>>,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
        .map_err(Into::into)
}

/// Non-blank lines with their 1-based line numbers.
pub fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
}

pub fn parse_line<T: DeserializeOwned>(path: &Path, line_no: usize, line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| InputError(format!("{}:{line_no}: {e}", path.display())).into())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    lines(&text).map(|(n, l)| parse_line(path, n, l)).collect()
}

pub fn read_trees(path: &Path) -> Result<HashMap<String, String>> {
    Ok(read_jsonl::<TreeRecord>(path)?
        .into_iter()
        .map(|r| (r.id, r.tree))
        .collect())
}

pub fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn to_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records serialize");
    s.push('\n');
    s
}

/// File stem for a definition id: anything outside `[A-Za-z0-9._-]`
/// becomes `_`.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

/// Drop parenthesized asides and trailing example sentences from a gloss.
pub fn strip_gloss(gloss: &str) -> String {
    let main = match gloss.find(';') {
        Some(i) if gloss[i + 1..].trim_start().starts_with('"') => &gloss[..i],
        _ => gloss,
    };
    let mut depth = 0usize;
    let mut out = String::with_capacity(main.len());
    for c in main.chars() {
        match c {
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            c if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
