//! Semantic roles for dictionary definitions, the annotated-definition model
//! and Brat standoff exchange.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{char_len, char_slice};
use crate::treebank::Span;

/// The twelve roles a definition segment can play relative to the
/// definiendum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoleLabel {
    Supertype,
    DifferentiaQuality,
    DifferentiaEvent,
    EventLocation,
    EventTime,
    OriginLocation,
    QualityModifier,
    Purpose,
    AssociatedFact,
    AccessoryDeterminer,
    AccessoryQuality,
    RoleParticle,
}

impl RoleLabel {
    pub const ALL: [RoleLabel; 12] = [
        RoleLabel::Supertype,
        RoleLabel::DifferentiaQuality,
        RoleLabel::DifferentiaEvent,
        RoleLabel::EventLocation,
        RoleLabel::EventTime,
        RoleLabel::OriginLocation,
        RoleLabel::QualityModifier,
        RoleLabel::Purpose,
        RoleLabel::AssociatedFact,
        RoleLabel::AccessoryDeterminer,
        RoleLabel::AccessoryQuality,
        RoleLabel::RoleParticle,
    ];

    /// Stable serialized identifier.
    pub fn name(self) -> &'static str {
        match self {
            RoleLabel::Supertype => "Supertype",
            RoleLabel::DifferentiaQuality => "DifferentiaQuality",
            RoleLabel::DifferentiaEvent => "DifferentiaEvent",
            RoleLabel::EventLocation => "EventLocation",
            RoleLabel::EventTime => "EventTime",
            RoleLabel::OriginLocation => "OriginLocation",
            RoleLabel::QualityModifier => "QualityModifier",
            RoleLabel::Purpose => "Purpose",
            RoleLabel::AssociatedFact => "AssociatedFact",
            RoleLabel::AccessoryDeterminer => "AccessoryDeterminer",
            RoleLabel::AccessoryQuality => "AccessoryQuality",
            RoleLabel::RoleParticle => "RoleParticle",
        }
    }

    /// Local name of the graph predicate linking a supertype to this role.
    pub fn predicate(self) -> &'static str {
        match self {
            RoleLabel::Supertype => "has_supertype",
            RoleLabel::DifferentiaQuality => "has_diff_qual",
            RoleLabel::DifferentiaEvent => "has_diff_event",
            RoleLabel::EventLocation => "has_event_location",
            RoleLabel::EventTime => "has_event_time",
            RoleLabel::OriginLocation => "has_origin_location",
            RoleLabel::QualityModifier => "has_quality_modifier",
            RoleLabel::Purpose => "has_purpose",
            RoleLabel::AssociatedFact => "has_assoc_fact",
            RoleLabel::AccessoryDeterminer => "has_acc_determiner",
            RoleLabel::AccessoryQuality => "has_acc_quality",
            RoleLabel::RoleParticle => "has_particle",
        }
    }

    pub fn from_predicate(local: &str) -> Option<RoleLabel> {
        RoleLabel::ALL.into_iter().find(|r| r.predicate() == local)
    }

    /// Lowercase words, as used in rendered explanations.
    pub fn human_name(self) -> &'static str {
        match self {
            RoleLabel::Supertype => "supertype",
            RoleLabel::DifferentiaQuality => "differentia quality",
            RoleLabel::DifferentiaEvent => "differentia event",
            RoleLabel::EventLocation => "event location",
            RoleLabel::EventTime => "event time",
            RoleLabel::OriginLocation => "origin location",
            RoleLabel::QualityModifier => "quality modifier",
            RoleLabel::Purpose => "purpose",
            RoleLabel::AssociatedFact => "associated fact",
            RoleLabel::AccessoryDeterminer => "accessory determiner",
            RoleLabel::AccessoryQuality => "accessory quality",
            RoleLabel::RoleParticle => "particle",
        }
    }

    /// Roles that attach to a differentia event or quality rather than to the
    /// supertype.
    pub fn is_component(self) -> bool {
        matches!(
            self,
            RoleLabel::EventLocation | RoleLabel::EventTime | RoleLabel::QualityModifier
        )
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown role label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for RoleLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RoleLabel::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
        })
    }
}

impl FromStr for PartOfSpeech {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noun" | "n" => Ok(PartOfSpeech::Noun),
            "verb" | "v" => Ok(PartOfSpeech::Verb),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSpan {
    pub start: usize,
    pub end: usize,
    pub label: RoleLabel,
    /// Cached `gloss[start, end)`.
    #[serde(default)]
    pub text: String,
}

impl RoleSpan {
    /// Build a span and fill its text from `gloss`. Returns `None` when the
    /// offsets are out of bounds or empty.
    pub fn from_gloss(gloss: &str, start: usize, end: usize, label: RoleLabel) -> Option<RoleSpan> {
        if start >= end {
            return None;
        }
        char_slice(gloss, start, end).map(|t| RoleSpan {
            start,
            end,
            label,
            text: t.to_string(),
        })
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDefinition {
    pub id: String,
    pub pos: PartOfSpeech,
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub spans: Vec<RoleSpan>,
}

impl AnnotatedDefinition {
    pub fn new(id: impl Into<String>, pos: PartOfSpeech, lemmas: Vec<String>, gloss: impl Into<String>) -> Self {
        AnnotatedDefinition {
            id: id.into(),
            pos,
            lemmas,
            gloss: gloss.into(),
            spans: Vec::new(),
        }
    }

    pub fn has_supertype(&self) -> bool {
        self.spans.iter().any(|s| s.label == RoleLabel::Supertype)
    }

    pub fn spans_with(&self, label: RoleLabel) -> impl Iterator<Item = &RoleSpan> {
        self.spans.iter().filter(move |s| s.label == label)
    }

    /// Re-derive every span's cached text from the gloss. Spans that fall
    /// out of bounds keep their text.
    pub fn refresh_texts(&mut self) {
        for s in &mut self.spans {
            if let Some(t) = char_slice(&self.gloss, s.start, s.end) {
                s.text = t.to_string();
            }
        }
    }
}

/// Tokens allowed to stay outside every role: leading determiners and
/// conjunctions or punctuation between roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageExemptions {
    words: Vec<String>,
}

impl CoverageExemptions {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        CoverageExemptions {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn allows(&self, token: &str) -> bool {
        let t = token.to_lowercase();
        self.words.contains(&t)
    }
}

impl Default for CoverageExemptions {
    fn default() -> Self {
        CoverageExemptions::new(["and", "or", "a", "an", "the", ",", ";"])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    MissingSupertype,
    OutOfBounds { start: usize, end: usize },
    TextMismatch { start: usize, end: usize },
    UnorderedSpans { start: usize, end: usize },
    OverlappingSpans { start: usize, end: usize },
    UncoveredText { start: usize, end: usize },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::MissingSupertype => "MissingSupertype",
            Violation::OutOfBounds { .. } => "OutOfBounds",
            Violation::TextMismatch { .. } => "TextMismatch",
            Violation::UnorderedSpans { .. } => "UnorderedSpans",
            Violation::OverlappingSpans { .. } => "OverlappingSpans",
            Violation::UncoveredText { .. } => "UncoveredText",
        }
    }
}

pub type ValidationReport = Vec<Violation>;

pub fn validate(def: &AnnotatedDefinition) -> ValidationReport {
    validate_with(def, &CoverageExemptions::default())
}

/// Check every annotated-definition invariant; an empty report means the
/// definition is well formed.
pub fn validate_with(def: &AnnotatedDefinition, exempt: &CoverageExemptions) -> ValidationReport {
    let mut report = Vec::new();
    if !def.has_supertype() {
        report.push(Violation::MissingSupertype);
    }
    let len = char_len(&def.gloss);
    let mut in_bounds = Vec::new();
    for s in &def.spans {
        if s.start >= s.end || s.end > len {
            report.push(Violation::OutOfBounds {
                start: s.start,
                end: s.end,
            });
            continue;
        }
        if char_slice(&def.gloss, s.start, s.end) != Some(s.text.as_str()) {
            report.push(Violation::TextMismatch {
                start: s.start,
                end: s.end,
            });
        }
        in_bounds.push(s.span());
    }
    for w in in_bounds.windows(2) {
        if w[1].start < w[0].start {
            report.push(Violation::UnorderedSpans {
                start: w[1].start,
                end: w[1].end,
            });
        } else if w[0].overlaps(&w[1]) {
            report.push(Violation::OverlappingSpans {
                start: w[1].start,
                end: w[0].end.min(w[1].end),
            });
        }
    }

    let chars: Vec<char> = def.gloss.chars().collect();
    let mut covered = vec![false; chars.len()];
    for sp in &in_bounds {
        for c in &mut covered[sp.start..sp.end] {
            *c = true;
        }
    }
    for (start, end) in uncovered_tokens(&chars, &covered) {
        let tok: String = chars[start..end].iter().collect();
        if !exempt.allows(&tok) {
            report.push(Violation::UncoveredText { start, end });
        }
    }
    report
}

/// Tokens (alphanumeric runs or single punctuation characters) made of
/// uncovered characters.
fn uncovered_tokens(chars: &[char], covered: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if covered[i] || chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if chars[i].is_alphanumeric() {
            while i < chars.len() && !covered[i] && chars[i].is_alphanumeric() {
                i += 1;
            }
        } else {
            i += 1;
        }
        out.push((start, i));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BratError {
    #[error("span {start}-{end} contains a line break, which standoff cannot represent")]
    NewlineInSpan { start: usize, end: usize },
    #[error("span {start}-{end} is outside the {len}-character text")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("ann line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("ann line {line}: {source}")]
    UnknownLabel { line: usize, source: UnknownLabel },
    #[error("ann line {line}: offsets {start}-{end} are outside the {len}-character text")]
    OffsetOutOfRange {
        line: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("ann line {line}: text column `{found}` does not match `{expected}` at {start}-{end}")]
    TextMismatch {
        line: usize,
        start: usize,
        end: usize,
        expected: String,
        found: String,
    },
}

/// Render a definition as a standoff `.txt`/`.ann` pair.
pub fn export_brat(def: &AnnotatedDefinition) -> Result<(String, String), BratError> {
    let len = char_len(&def.gloss);
    let mut ann = String::new();
    for (i, s) in def.spans.iter().enumerate() {
        let text = char_slice(&def.gloss, s.start, s.end)
            .filter(|_| s.start < s.end)
            .ok_or(BratError::OutOfRange {
                start: s.start,
                end: s.end,
                len,
            })?;
        if text.contains(['\n', '\r']) {
            return Err(BratError::NewlineInSpan {
                start: s.start,
                end: s.end,
            });
        }
        ann.push_str(&format!("T{}\t{} {} {}\t{}\n", i + 1, s.label, s.start, s.end, text));
    }
    Ok((def.gloss.clone(), ann))
}

/// Read a standoff pair back into a definition. Note lines (`#...`) are
/// skipped; every other line must be a text-bound annotation.
pub fn import_brat(
    txt: &str,
    ann: &str,
    id: &str,
    pos: PartOfSpeech,
    lemmas: &[String],
) -> Result<AnnotatedDefinition, BratError> {
    let len = char_len(txt);
    let mut spans = Vec::new();
    for (idx, line) in ann.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: &str| BratError::Malformed {
            line: line_no,
            message: message.to_string(),
        };
        let mut cols = line.splitn(3, '\t');
        let tid = cols.next().unwrap_or("");
        let middle = cols.next().ok_or_else(|| malformed("expected three tab-separated columns"))?;
        let text_col = cols.next().ok_or_else(|| malformed("missing text column"))?;
        if !tid.starts_with('T') {
            return Err(malformed("only text-bound (T) annotations are supported"));
        }
        let mut parts = middle.split(' ');
        let label = parts.next().unwrap_or("");
        let start = parts.next().ok_or_else(|| malformed("missing start offset"))?;
        let end = parts.next().ok_or_else(|| malformed("missing end offset"))?;
        if parts.next().is_some() || end.contains(';') {
            return Err(malformed("discontinuous spans are not supported"));
        }
        let label: RoleLabel = label.parse().map_err(|e| BratError::UnknownLabel {
            line: line_no,
            source: e,
        })?;
        let start: usize = start.parse().map_err(|_| malformed("start offset is not a number"))?;
        let end: usize = end.parse().map_err(|_| malformed("end offset is not a number"))?;
        let expected = char_slice(txt, start, end)
            .filter(|_| start < end)
            .ok_or(BratError::OffsetOutOfRange {
                line: line_no,
                start,
                end,
                len,
            })?;
        if expected != text_col {
            return Err(BratError::TextMismatch {
                line: line_no,
                start,
                end,
                expected: expected.to_string(),
                found: text_col.to_string(),
            });
        }
        spans.push(RoleSpan {
            start,
            end,
            label,
            text: expected.to_string(),
        });
    }
    spans.sort_by_key(|s| (s.start, s.end));
    Ok(AnnotatedDefinition {
        id: id.to_string(),
        pos,
        lemmas: lemmas.to_vec(),
        gloss: txt.to_string(),
        spans,
    })
}
