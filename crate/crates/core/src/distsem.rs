//! Word vectors and phrase similarity.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::text::{normalize_term, word_tokens};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: `{token}` is not a number")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: non-finite component")]
    NonFinite { line: usize },
    #[error("line {line}: word without a vector")]
    MissingVector { line: usize },
    #[error("no vectors found")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("similarity is undefined for a zero vector")]
    ZeroVector,
}

/// Anything that can score two phrases. The navigator only talks to this
/// trait, so a different distributional model can be slotted in.
pub trait Similarity {
    fn similarity(&self, a: &str, b: &str) -> f64;
    fn is_stopword(&self, word: &str) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    stopwords: BTreeSet<String>,
}

pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// One word per line; blank lines and `#` comments are skipped.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>, EmbeddingError> {
    let p = path.as_ref();
    let text = fs::read_to_string(p).map_err(|source| EmbeddingError::Io {
        path: p.display().to_string(),
        source,
    })?;
    Ok(parse_stopwords(&text))
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok())
}

impl EmbeddingTable {
    /// Empty table of the given dimensionality with the default stopwords.
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            stopwords: default_stopwords(),
        }
    }

    /// Parse the whitespace-separated text format. An optional first line
    /// `count dim` is skipped; when a word repeats, its first vector wins.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dim: Option<usize> = None;
        let mut vectors = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lineno == 1 && is_header(&fields) {
                dim = fields[1].parse().ok();
                continue;
            }
            if fields.len() < 2 {
                return Err(EmbeddingError::MissingVector { line: lineno });
            }
            let mut v = Vec::with_capacity(fields.len() - 1);
            for tok in &fields[1..] {
                let x: f64 = tok.parse().map_err(|_| EmbeddingError::NonNumeric {
                    line: lineno,
                    token: tok.to_string(),
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::NonFinite { line: lineno });
                }
                v.push(x);
            }
            let expected = *dim.get_or_insert(v.len());
            if v.len() != expected {
                return Err(EmbeddingError::Dimension {
                    line: lineno,
                    expected,
                    found: v.len(),
                });
            }
            vectors.entry(fields[0].to_lowercase()).or_insert(v);
        }
        let dim = match dim {
            Some(d) if d > 0 => d,
            _ => return Err(EmbeddingError::Empty),
        };
        Ok(EmbeddingTable {
            dim,
            vectors,
            stopwords: default_stopwords(),
        })
    }

    pub fn with_stopwords(mut self, stopwords: BTreeSet<String>) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    /// Copy with every vector multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in out.vectors.values_mut() {
            v.iter_mut().for_each(|x| *x *= c);
        }
        out
    }

    /// Lowercased content tokens of a phrase.
    pub fn content_tokens(&self, phrase: &str) -> Vec<String> {
        word_tokens(phrase)
            .into_iter()
            .filter(|w| !self.stopwords.contains(w))
            .collect()
    }

    /// Mean of the in-vocabulary token vectors, or `None` when no token is
    /// known. Tokens are summed in sorted order so the result does not
    /// depend on word order.
    fn mean_vector(&self, phrase: &str) -> Option<Vec<f64>> {
        let mut toks = self.content_tokens(phrase);
        toks.sort();
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for t in &toks {
            if let Some(v) = self.vectors.get(t) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let p = path.as_ref();
    let text = fs::read_to_string(p).map_err(|source| EmbeddingError::Io {
        path: p.display().to_string(),
        source,
    })?;
    EmbeddingTable::parse(&text)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::LengthMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Cosine of the mean content-word vectors. When either side has no known
/// token (or pools to zero) the phrases score 1.0 if they are equal after
/// case folding and 0.0 otherwise.
pub fn phrase_similarity(a: &str, b: &str, t: &EmbeddingTable) -> f64 {
    let fallback = || if normalize_term(a) == normalize_term(b) { 1.0 } else { 0.0 };
    match (t.mean_vector(a), t.mean_vector(b)) {
        (Some(u), Some(v)) => cosine(&u, &v).unwrap_or_else(|_| fallback()),
        _ => fallback(),
    }
}

impl Similarity for EmbeddingTable {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        phrase_similarity(a, b, self)
    }

    fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }
}
