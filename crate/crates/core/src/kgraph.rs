//! The definition graph: one resource per synset, supertype links to
//! resources, and every other role attached to the supertype through RDF
//! reification so each link keeps the definition it came from.
//!
//! Layout for a definition of synset `S` with supertype `Sup`:
//!
//! ```text
//! <S> has_supertype <Sup>
//! <S> lemma "w"                                   (one per lemma)
//! <S> def_statement <st>                          (one per role)
//! <st> rdf:type rdf:Statement ; rdf:subject <Sup> ; rdf:predicate has_x ; rdf:object V
//! ```
//!
//! When a differentia event or quality has components (event time, event
//! location, quality modifier) the role becomes a resource `<V>`, the
//! component is reified against it, and that inner statement is the object of
//! the outer statement hanging off the supertype.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotation::{AnnotatedDefinition, RoleLabel, RoleSpan};
use crate::text::{normalize_term, term_singulars};

/// Namespace for every minted resource and predicate.
pub const BASE: &str = "urn:wng:";
/// Prefix of reified statement identifiers.
pub const STATEMENT_PREFIX: &str = "urn:wng:stmt/";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_STATEMENT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Statement";
pub const RDF_SUBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
pub const RDF_PREDICATE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
pub const RDF_OBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";

pub const LEMMA: &str = "lemma";
pub const DEF_STATEMENT: &str = "def_statement";
pub const HAS_SUPERTYPE: &str = "has_supertype";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Resource(String),
    Literal(String),
    /// Reified triple, identified by its IRI.
    Statement(String),
}

impl Term {
    /// Classify an IRI: statement identifiers live under [`STATEMENT_PREFIX`].
    pub fn iri(iri: impl Into<String>) -> Term {
        let iri = iri.into();
        if iri.starts_with(STATEMENT_PREFIX) {
            Term::Statement(iri)
        } else {
            Term::Resource(iri)
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Resource(i) | Term::Statement(i) => Some(i),
            Term::Literal(_) => None,
        }
    }

    /// N-Triples rendering.
    pub fn render(&self) -> String {
        match self {
            Term::Resource(i) | Term::Statement(i) => format!("<{i}>"),
            Term::Literal(t) => format!("\"{}\"", escape_literal(t)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    /// Full predicate IRI.
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPolicy {
    /// Let navigation also follow edges backwards (from a supertype down to
    /// the things it defines).
    pub bidirectional: bool,
}

/// One edge out of a node, seen through reification.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Neighbor {
    /// Local predicate name, e.g. `has_supertype`.
    pub predicate: String,
    pub node: Term,
    /// Synset whose definition contributed the edge.
    pub origin: String,
    /// Edge traversed against its direction.
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("definition `{0}` has no supertype span")]
    MissingSupertype(String),
    #[error("duplicate synset id `{0}`")]
    DuplicateSynset(String),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("statement {0} lacks one of its subject/predicate/object triples")]
    IncompleteStatement(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinitionGraph {
    triples: BTreeSet<Triple>,
    /// normalized surface form → synset IRIs
    lemma_index: BTreeMap<String, BTreeSet<String>>,
    /// synset IRI → normalized lemmas
    synset_lemmas: BTreeMap<String, BTreeSet<String>>,
    /// display text → non-synset resources carrying it
    resource_text: BTreeMap<String, BTreeSet<String>>,
    statements: BTreeMap<String, (Term, String, Term)>,
    adjacency: BTreeMap<Term, BTreeSet<Neighbor>>,
    reverse: BTreeMap<Term, BTreeSet<Neighbor>>,
    policy: GraphPolicy,
}

/// Percent-encode everything except alphanumerics and `_-.~`, after
/// lowercasing and turning spaces into underscores.
pub fn slug(text: &str) -> String {
    let norm = normalize_term(text).replace(' ', "_");
    let mut out = String::with_capacity(norm.len());
    for c in norm.chars() {
        if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '~') {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

/// Inverse of [`slug`] up to case and whitespace.
pub fn unslug(local: &str) -> String {
    let mut bytes = Vec::with_capacity(local.len());
    let raw = local.as_bytes();
    let mut i = 0;
    while i < raw.len() {
        if raw[i] == b'%' && i + 2 < raw.len() && raw[i + 1].is_ascii_hexdigit() && raw[i + 2].is_ascii_hexdigit() {
            if let Ok(b) = u8::from_str_radix(&local[i + 1..i + 3], 16) {
                bytes.push(b);
                i += 3;
                continue;
            }
        }
        bytes.push(if raw[i] == b'_' { b' ' } else { raw[i] });
        i += 1;
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

pub fn mint(text: &str) -> String {
    format!("{BASE}{}", slug(text))
}

pub fn predicate_iri(local: &str) -> String {
    format!("{BASE}{local}")
}

/// Local name of a predicate minted under [`BASE`].
pub fn local_name(iri: &str) -> &str {
    iri.strip_prefix(BASE).unwrap_or(iri)
}

fn statement_id(context: &str, subject: &Term, predicate: &str, object: &Term) -> String {
    let mut h = Sha256::new();
    for part in [context, &subject.render(), predicate, &object.render()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    format!("{STATEMENT_PREFIX}{}", hex::encode(&digest[..16]))
}

/// Subject, predicate and object seen so far for one statement id.
type PartialStatement = (Option<Term>, Option<String>, Option<Term>);

struct Builder {
    triples: BTreeSet<Triple>,
}

impl Builder {
    fn reify(&mut self, context: &str, subject: Term, predicate: &str, object: Term) -> Term {
        let pred = predicate_iri(predicate);
        let id = statement_id(context, &subject, &pred, &object);
        let st = Term::Statement(id);
        self.triples
            .insert(Triple::new(st.clone(), RDF_TYPE, Term::Resource(RDF_STATEMENT.into())));
        self.triples.insert(Triple::new(st.clone(), RDF_SUBJECT, subject));
        self.triples
            .insert(Triple::new(st.clone(), RDF_PREDICATE, Term::Resource(pred)));
        self.triples.insert(Triple::new(st.clone(), RDF_OBJECT, object));
        st
    }
}

/// Which host span each component attaches to: event times and locations
/// to the nearest differentia event before them, quality modifiers to the
/// nearest differentia quality after them (else before). Unattached
/// components stand alone.
fn attach_components(spans: &[RoleSpan]) -> BTreeMap<usize, Option<usize>> {
    let mut hosts = BTreeMap::new();
    for (i, s) in spans.iter().enumerate() {
        if !s.label.is_component() {
            continue;
        }
        let host = match s.label {
            RoleLabel::QualityModifier => spans[i + 1..]
                .iter()
                .position(|h| h.label == RoleLabel::DifferentiaQuality)
                .map(|p| i + 1 + p)
                .or_else(|| spans[..i].iter().rposition(|h| h.label == RoleLabel::DifferentiaQuality)),
            _ => spans[..i].iter().rposition(|h| h.label == RoleLabel::DifferentiaEvent),
        };
        hosts.insert(i, host);
    }
    hosts
}

/// Build the reified graph. Input order does not matter: definitions are
/// processed by id and statement ids are content hashes.
pub fn build_graph(defs: &[AnnotatedDefinition], policy: GraphPolicy) -> Result<DefinitionGraph, GraphError> {
    let mut sorted: Vec<&AnnotatedDefinition> = defs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = BTreeSet::new();
    for d in &sorted {
        if !seen.insert(mint(&d.id)) {
            return Err(GraphError::DuplicateSynset(d.id.clone()));
        }
        if !d.has_supertype() {
            return Err(GraphError::MissingSupertype(d.id.clone()));
        }
    }

    let mut b = Builder {
        triples: BTreeSet::new(),
    };
    for d in sorted {
        let synset_iri = mint(&d.id);
        let synset = Term::Resource(synset_iri.clone());
        for w in &d.lemmas {
            b.triples
                .insert(Triple::new(synset.clone(), predicate_iri(LEMMA), Term::Literal(w.clone())));
        }
        let mut spans = d.spans.clone();
        spans.sort_by_key(|s| (s.start, s.end));
        let sup_positions: Vec<usize> = spans
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == RoleLabel::Supertype)
            .map(|(i, _)| i)
            .collect();
        for &i in &sup_positions {
            b.triples.insert(Triple::new(
                synset.clone(),
                predicate_iri(HAS_SUPERTYPE),
                Term::Resource(mint(&spans[i].text)),
            ));
        }
        let host_sup = |i: usize| -> Term {
            let p = sup_positions
                .iter()
                .rev()
                .find(|&&p| p < i)
                .unwrap_or(&sup_positions[0]);
            Term::Resource(mint(&spans[*p].text))
        };
        let hosts = attach_components(&spans);
        for (i, s) in spans.iter().enumerate() {
            if s.label == RoleLabel::Supertype || matches!(hosts.get(&i), Some(Some(_))) {
                continue;
            }
            let sup = host_sup(i);
            let comps: Vec<&RoleSpan> = hosts
                .iter()
                .filter(|(_, h)| **h == Some(i))
                .map(|(c, _)| &spans[*c])
                .collect();
            let with_components = matches!(s.label, RoleLabel::DifferentiaEvent | RoleLabel::DifferentiaQuality)
                && !comps.is_empty();
            if with_components {
                let role_node = Term::Resource(mint(&s.text));
                for c in comps {
                    let inner = b.reify(&synset_iri, role_node.clone(), c.label.predicate(), Term::Literal(c.text.clone()));
                    let outer = b.reify(&synset_iri, sup.clone(), s.label.predicate(), inner);
                    b.triples
                        .insert(Triple::new(synset.clone(), predicate_iri(DEF_STATEMENT), outer));
                }
            } else {
                let st = b.reify(&synset_iri, sup, s.label.predicate(), Term::Literal(s.text.clone()));
                b.triples
                    .insert(Triple::new(synset.clone(), predicate_iri(DEF_STATEMENT), st));
            }
        }
    }
    DefinitionGraph::from_triples(b.triples, policy)
}

impl DefinitionGraph {
    /// Rebuild all indexes from a triple set.
    pub fn from_triples(triples: BTreeSet<Triple>, policy: GraphPolicy) -> Result<DefinitionGraph, GraphError> {
        let lemma_p = predicate_iri(LEMMA);
        let sup_p = predicate_iri(HAS_SUPERTYPE);
        let def_p = predicate_iri(DEF_STATEMENT);

        let mut parts: BTreeMap<String, PartialStatement> = BTreeMap::new();
        for t in &triples {
            if let Term::Statement(id) = &t.subject {
                let e = parts.entry(id.clone()).or_default();
                match t.predicate.as_str() {
                    RDF_SUBJECT => e.0 = Some(t.object.clone()),
                    RDF_PREDICATE => e.1 = t.object.as_iri().map(str::to_string),
                    RDF_OBJECT => e.2 = Some(t.object.clone()),
                    _ => {}
                }
            }
            if let Term::Statement(id) = &t.object {
                parts.entry(id.clone()).or_default();
            }
        }
        let mut statements = BTreeMap::new();
        for (id, p) in parts {
            match p {
                (Some(s), Some(p), Some(o)) => {
                    statements.insert(id, (s, p, o));
                }
                _ => return Err(GraphError::IncompleteStatement(id)),
            }
        }

        let mut g = DefinitionGraph {
            triples: BTreeSet::new(),
            lemma_index: BTreeMap::new(),
            synset_lemmas: BTreeMap::new(),
            resource_text: BTreeMap::new(),
            statements,
            adjacency: BTreeMap::new(),
            reverse: BTreeMap::new(),
            policy,
        };
        let mut synsets = BTreeSet::new();
        for t in &triples {
            let Term::Resource(s) = &t.subject else { continue };
            if t.predicate == lemma_p {
                if let Term::Literal(w) = &t.object {
                    let w = normalize_term(w);
                    g.lemma_index.entry(w.clone()).or_default().insert(s.clone());
                    g.synset_lemmas.entry(s.clone()).or_default().insert(w);
                }
                synsets.insert(s.clone());
            } else if t.predicate == sup_p {
                synsets.insert(s.clone());
                g.add_edge(t.subject.clone(), HAS_SUPERTYPE, t.object.clone(), s);
            } else if t.predicate == def_p {
                synsets.insert(s.clone());
                if let Term::Statement(id) = &t.object {
                    g.flatten(id, s)?;
                }
            }
        }
        for t in &triples {
            for term in [&t.subject, &t.object] {
                if let Term::Resource(iri) = term {
                    if iri.starts_with(BASE) && !synsets.contains(iri) {
                        g.resource_text
                            .entry(normalize_term(&unslug(local_name(iri))))
                            .or_default()
                            .insert(iri.clone());
                    }
                }
            }
        }
        g.triples = triples;
        Ok(g)
    }

    fn add_edge(&mut self, from: Term, predicate: &str, to: Term, origin: &str) {
        self.adjacency.entry(from.clone()).or_default().insert(Neighbor {
            predicate: predicate.to_string(),
            node: to.clone(),
            origin: origin.to_string(),
            inverse: false,
        });
        self.reverse.entry(to).or_default().insert(Neighbor {
            predicate: predicate.to_string(),
            node: from,
            origin: origin.to_string(),
            inverse: true,
        });
    }

    /// Add the edge a statement stands for, seeing through nested
    /// statements; returns the node the statement resolves to.
    fn flatten(&mut self, id: &str, origin: &str) -> Result<Term, GraphError> {
        let (s, p, o) = self
            .statements
            .get(id)
            .cloned()
            .ok_or_else(|| GraphError::IncompleteStatement(id.to_string()))?;
        let s_node = match &s {
            Term::Statement(inner) => self.flatten(inner, origin)?,
            other => other.clone(),
        };
        let o_node = match &o {
            Term::Statement(inner) => self.flatten(inner, origin)?,
            other => other.clone(),
        };
        self.add_edge(s_node.clone(), local_name(&p), o_node, origin);
        Ok(s_node)
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn policy(&self) -> GraphPolicy {
        self.policy
    }

    pub fn with_policy(mut self, policy: GraphPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn lemma_index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.lemma_index
    }

    pub fn synset_lemmas(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.synset_lemmas
    }

    /// Lemmas of `node` if it is a synset.
    pub fn lemmas_of(&self, node: &Term) -> Option<&BTreeSet<String>> {
        node.as_iri().and_then(|i| self.synset_lemmas.get(i))
    }

    /// Subject, predicate and object bound to a statement id.
    pub fn statement(&self, id: &str) -> Option<&(Term, String, Term)> {
        self.statements.get(id)
    }

    pub fn statement_ids(&self) -> impl Iterator<Item = &String> {
        self.statements.keys()
    }

    /// Human-readable text of a node.
    pub fn text_of(&self, node: &Term) -> String {
        match node {
            Term::Literal(t) => t.clone(),
            Term::Resource(i) | Term::Statement(i) => unslug(local_name(i)),
        }
    }

    /// Every node that occurs as an edge endpoint.
    pub fn nodes(&self) -> BTreeSet<&Term> {
        self.adjacency
            .keys()
            .chain(self.reverse.keys())
            .collect()
    }

    /// Edges out of `node`; statements are transparent. Inverse edges are
    /// included when the graph policy is bidirectional. Unknown nodes have
    /// no neighbors.
    pub fn neighbors(&self, node: &Term) -> BTreeSet<Neighbor> {
        let mut out: BTreeSet<Neighbor> = self.adjacency.get(node).cloned().unwrap_or_default();
        if self.policy.bidirectional {
            if let Some(rev) = self.reverse.get(node) {
                out.extend(rev.iter().cloned());
            }
        }
        out
    }

    /// Synsets having `surface` as a lemma, plus role and supertype
    /// resources whose text is `surface` (case-folded). Falls back to
    /// singular forms of the last word when nothing matches as written.
    pub fn lookup(&self, surface: &str) -> BTreeSet<Term> {
        let norm = normalize_term(surface);
        let found = self.lookup_exact(&norm);
        if !found.is_empty() {
            return found;
        }
        term_singulars(&norm)
            .iter()
            .flat_map(|s| self.lookup_exact(s))
            .collect()
    }

    fn lookup_exact(&self, norm: &str) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        if let Some(syns) = self.lemma_index.get(norm) {
            out.extend(syns.iter().map(|s| Term::Resource(s.clone())));
        }
        if let Some(res) = self.resource_text.get(norm) {
            out.extend(res.iter().map(|s| Term::Resource(s.clone())));
        }
        out
    }

    /// Checks of the reification and resource policy; an empty result means
    /// the graph is sound.
    pub fn integrity_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let sup_p = predicate_iri(HAS_SUPERTYPE);
        let def_p = predicate_iri(DEF_STATEMENT);
        let resource_roles = [
            predicate_iri(RoleLabel::DifferentiaQuality.predicate()),
            predicate_iri(RoleLabel::DifferentiaEvent.predicate()),
        ];
        let mut bindings: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
        let mut references: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &self.triples {
            if t.predicate == sup_p && t.object.is_literal() {
                issues.push(format!("has_supertype with literal object on {}", t.subject));
            }
            if let Term::Statement(id) = &t.subject {
                let slot = match t.predicate.as_str() {
                    RDF_TYPE => 0,
                    RDF_SUBJECT => 1,
                    RDF_PREDICATE => 2,
                    RDF_OBJECT => 3,
                    _ => {
                        issues.push(format!("statement {id} has unexpected predicate {}", t.predicate));
                        continue;
                    }
                };
                bindings.entry(id).or_default()[slot] += 1;
            }
            if let Term::Statement(id) = &t.object {
                if t.predicate == def_p || t.predicate == RDF_OBJECT {
                    *references.entry(id).or_default() += 1;
                } else {
                    issues.push(format!("statement {id} referenced through {}", t.predicate));
                }
            }
        }
        for (id, counts) in &bindings {
            if *counts != [1, 1, 1, 1] {
                issues.push(format!("statement {id} has bindings {counts:?}"));
            }
            if references.get(id).copied().unwrap_or(0) != 1 {
                issues.push(format!("statement {id} is referenced {} times", references.get(id).copied().unwrap_or(0)));
            }
        }
        for (id, (s, p, o)) in &self.statements {
            // Only differentia roles with components may be resources.
            if let Term::Resource(_) = o {
                if !resource_roles.contains(p) {
                    issues.push(format!("statement {id}: role {p} has a resource object"));
                }
            }
            if let Term::Statement(_) = o {
                if !resource_roles.contains(p) {
                    issues.push(format!("statement {id}: nested statement under {p}"));
                }
            }
            if s.is_literal() {
                issues.push(format!("statement {id} has a literal subject"));
            }
        }
        issues
    }
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// One triple per line, sorted by (subject, predicate, object) rendering.
pub fn serialize_ntriples(g: &DefinitionGraph) -> String {
    let mut rows: Vec<(String, String, String)> = g
        .triples
        .iter()
        .map(|t| (t.subject.render(), format!("<{}>", t.predicate), t.object.render()))
        .collect();
    rows.sort();
    let mut out = String::new();
    for (s, p, o) in rows {
        out.push_str(&s);
        out.push(' ');
        out.push_str(&p);
        out.push(' ');
        out.push_str(&o);
        out.push_str(" .\n");
    }
    out
}

struct LineParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl LineParser<'_> {
    fn err(&self, message: impl Into<String>) -> GraphError {
        GraphError::Syntax {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], ' ' | '\t') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn iri(&mut self) -> Result<String, GraphError> {
        if self.peek() != Some('<') {
            return Err(self.err("expected `<`"));
        }
        self.pos += 1;
        let start = self.pos;
        while let Some(c) = self.peek() {
            match c {
                '>' => {
                    let iri: String = self.chars[start..self.pos].iter().collect();
                    self.pos += 1;
                    if iri.is_empty() {
                        return Err(self.err("empty IRI"));
                    }
                    return Ok(iri);
                }
                ' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                    return Err(self.err(format!("character `{c}` not allowed in IRI")))
                }
                _ => self.pos += 1,
            }
        }
        Err(self.err("unterminated IRI"))
    }

    fn hex_escape(&mut self, n: usize) -> Result<char, GraphError> {
        if self.pos + n > self.chars.len() {
            return Err(self.err("truncated unicode escape"));
        }
        let digits: String = self.chars[self.pos..self.pos + n].iter().collect();
        let code = u32::from_str_radix(&digits, 16).map_err(|_| self.err("bad unicode escape"))?;
        self.pos += n;
        char::from_u32(code).ok_or_else(|| self.err("escape is not a scalar value"))
    }

    fn literal(&mut self) -> Result<String, GraphError> {
        self.pos += 1; // opening quote
        let mut out = String::new();
        loop {
            let c = self.peek().ok_or_else(|| self.err("unterminated literal"))?;
            self.pos += 1;
            match c {
                '"' => break,
                '\\' => {
                    let e = self.peek().ok_or_else(|| self.err("dangling escape"))?;
                    self.pos += 1;
                    match e {
                        '"' => out.push('"'),
                        '\\' => out.push('\\'),
                        'n' => out.push('\n'),
                        'r' => out.push('\r'),
                        't' => out.push('\t'),
                        'u' => out.push(self.hex_escape(4)?),
                        'U' => out.push(self.hex_escape(8)?),
                        other => {
                            self.pos -= 1;
                            return Err(self.err(format!("unknown escape `\\{other}`")));
                        }
                    }
                }
                c => out.push(c),
            }
        }
        match self.peek() {
            Some('@') | Some('^') => Err(self.err("language tags and datatypes are not supported")),
            _ => Ok(out),
        }
    }

    fn term(&mut self) -> Result<Term, GraphError> {
        match self.peek() {
            Some('<') => Ok(Term::iri(self.iri()?)),
            Some('"') => Ok(Term::Literal(self.literal()?)),
            Some('_') => Err(self.err("blank nodes are not supported")),
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of line")),
        }
    }
}

/// Parse the N-Triples subset written by [`serialize_ntriples`] (IRIs and
/// plain literals) and rebuild the indexes.
pub fn parse_ntriples(text: &str, policy: GraphPolicy) -> Result<DefinitionGraph, GraphError> {
    let mut triples = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let mut p = LineParser {
            chars: line.chars().collect(),
            pos: 0,
            line: idx + 1,
            _src: line,
        };
        p.skip_ws();
        if p.peek().is_none() || p.peek() == Some('#') {
            continue;
        }
        let subject = p.term()?;
        if subject.is_literal() {
            return Err(GraphError::Syntax {
                line: idx + 1,
                column: 1,
                message: "literal in subject position".into(),
            });
        }
        p.skip_ws();
        let predicate = p.iri()?;
        p.skip_ws();
        let object = p.term()?;
        p.skip_ws();
        if p.peek() != Some('.') {
            return Err(p.err("expected terminating `.`"));
        }
        p.pos += 1;
        p.skip_ws();
        if let Some(c) = p.peek() {
            if c != '#' {
                return Err(p.err(format!("trailing `{c}` after `.`")));
            }
        }
        triples.insert(Triple {
            subject,
            predicate,
            object,
        });
    }
    DefinitionGraph::from_triples(triples, policy)
}
