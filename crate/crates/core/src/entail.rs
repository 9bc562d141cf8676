//! Entailment by navigating the definition graph from a term of the text
//! toward a term of the hypothesis.
//!
//! Candidate pairs come from noun chunks that one side has and the other
//! lacks. For each pair (best first) the navigator walks the graph, always
//! expanding the node most similar to the target, and stops when a node
//! matches the target directly or through synonymy. The path is then
//! rendered as a short justification.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::RoleLabel;
use crate::distsem::Similarity;
use crate::kgraph::{DefinitionGraph, Neighbor, Term, HAS_SUPERTYPE};
use crate::text::{capitalize, indefinite_article, normalize_term, same_word, term_singulars, word_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntailConfig {
    pub max_depth: usize,
    /// Neighbors kept per expansion; 1 is a pure greedy walk.
    pub beam: usize,
    pub pair_count: usize,
    /// Pairs scoring below this are recorded but not navigated.
    pub accept_threshold: f64,
}

impl Default for EntailConfig {
    fn default() -> Self {
        EntailConfig {
            max_depth: 5,
            beam: 1,
            pair_count: 3,
            accept_threshold: 0.0,
        }
    }
}

impl EntailConfig {
    pub fn validate(&self) -> Result<(), EntailError> {
        if self.max_depth == 0 {
            return Err(EntailError::Config("max_depth must be at least 1".into()));
        }
        if self.beam == 0 {
            return Err(EntailError::Config("beam must be at least 1".into()));
        }
        if self.pair_count == 0 {
            return Err(EntailError::Config("pair_count must be at least 1".into()));
        }
        if !self.accept_threshold.is_finite() {
            return Err(EntailError::Config("accept_threshold must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntailError {
    #[error("invalid entailment config: {0}")]
    Config(String),
    #[error("`{0}` is not in the graph")]
    SourceNotFound(String),
    #[error("{tokens} tokens but {tags} tags")]
    TagCountMismatch { tokens: usize, tags: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermPair {
    pub source: String,
    pub target: String,
    pub similarity: f64,
}

/// Maximal runs of content tokens. With tags, a run is made of nominal
/// tokens (NN*, JJ*, CD) and must contain a noun.
pub fn noun_chunks<S: Similarity + ?Sized>(
    text: &str,
    tags: Option<&[String]>,
    sim: &S,
) -> Result<Vec<Vec<String>>, EntailError> {
    let tokens = word_tokens(text);
    if let Some(tags) = tags {
        if tags.len() != tokens.len() {
            return Err(EntailError::TagCountMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
    }
    let nominal = |i: usize| match tags {
        Some(t) => t[i].starts_with("NN") || t[i].starts_with("JJ") || t[i] == "CD",
        None => true,
    };
    let has_noun = |run: &[usize]| match tags {
        Some(t) => run.iter().any(|&i| t[i].starts_with("NN")),
        None => true,
    };
    let mut chunks = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    for i in 0..=tokens.len() {
        let keep = i < tokens.len() && !sim.is_stopword(&tokens[i]) && nominal(i);
        if keep {
            run.push(i);
        } else if !run.is_empty() {
            if has_noun(&run) {
                chunks.push(run.iter().map(|&j| tokens[j].clone()).collect());
            }
            run.clear();
        }
    }
    Ok(chunks)
}

fn contains_sequence(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty()
        && hay.len() >= needle.len()
        && hay
            .windows(needle.len())
            .any(|w| w.iter().zip(needle).all(|(a, b)| same_word(a, b)))
}

fn distinct_chunks(chunks: Vec<Vec<String>>, other_tokens: &[String]) -> BTreeSet<String> {
    chunks
        .into_iter()
        .filter(|c| !contains_sequence(other_tokens, c))
        .map(|c| c.join(" "))
        .collect()
}

/// Rank (source chunk of T, target chunk of H) pairs by similarity, ties
/// broken lexicographically, and keep the best `k`. Identical texts give no
/// pairs.
pub fn select_term_pairs<S: Similarity + ?Sized>(t_text: &str, h_text: &str, sim: &S, k: usize) -> Vec<TermPair> {
    select_term_pairs_tagged(t_text, None, h_text, None, sim, k).unwrap_or_default()
}

pub fn select_term_pairs_tagged<S: Similarity + ?Sized>(
    t_text: &str,
    t_tags: Option<&[String]>,
    h_text: &str,
    h_tags: Option<&[String]>,
    sim: &S,
    k: usize,
) -> Result<Vec<TermPair>, EntailError> {
    let t_tokens = word_tokens(t_text);
    let h_tokens = word_tokens(h_text);
    let sources = distinct_chunks(noun_chunks(t_text, t_tags, sim)?, &h_tokens);
    let targets = distinct_chunks(noun_chunks(h_text, h_tags, sim)?, &t_tokens);
    let mut pairs: Vec<TermPair> = sources
        .iter()
        .flat_map(|s| {
            targets.iter().map(move |t| TermPair {
                source: s.clone(),
                target: t.clone(),
                similarity: sim.similarity(s, t),
            })
        })
        .collect();
    pairs.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.target.cmp(&b.target))
    });
    pairs.truncate(k);
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub from: Term,
    pub predicate: String,
    pub to: Term,
    pub origin: String,
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NavigationPath {
    pub source: String,
    pub target: String,
    pub start: Term,
    pub steps: Vec<Step>,
    pub terminal: Term,
    /// Synonymy that closed the path: (lemma reached, target lemma).
    pub closure: Option<(String, String)>,
}

impl NavigationPath {
    pub fn nodes(&self) -> Vec<&Term> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.to)).collect()
    }
}

/// What the navigator compares nodes against.
struct Target {
    forms: BTreeSet<String>,
    /// Lemma used when naming the target in a synonymy sentence.
    name: String,
    synsets: BTreeSet<Term>,
    /// Target text first, then the lemmas of its synsets.
    lemmas: Vec<Vec<String>>,
}

impl Target {
    fn new(g: &DefinitionGraph, target: &str) -> Self {
        let norm = normalize_term(target);
        let mut forms: BTreeSet<String> = term_singulars(&norm).into_iter().collect();
        forms.insert(norm.clone());
        let synsets: BTreeSet<Term> = g.lookup(target).into_iter().filter(|t| g.lemmas_of(t).is_some()).collect();
        let mut syn_lemmas = BTreeSet::new();
        for s in &synsets {
            syn_lemmas.extend(g.lemmas_of(s).into_iter().flatten().cloned());
        }
        let name = syn_lemmas
            .iter()
            .find(|l| forms.contains(*l))
            .cloned()
            .unwrap_or_else(|| norm.clone());
        let mut lemmas = vec![word_tokens(&norm)];
        lemmas.extend(syn_lemmas.iter().map(|l| word_tokens(l)));
        Target {
            forms,
            name,
            synsets,
            lemmas,
        }
    }

    /// `Some(closure)` when `node` satisfies the target.
    fn matches(&self, g: &DefinitionGraph, node: &Term) -> Option<Option<(String, String)>> {
        let text = normalize_term(&g.text_of(node));
        if self.forms.contains(&text) {
            return Some(None);
        }
        if let Some(lemmas) = g.lemmas_of(node) {
            if self.synsets.contains(node) || lemmas.iter().any(|l| self.forms.contains(l)) {
                return Some(Some((text, self.name.clone())));
            }
            return None;
        }
        let toks = word_tokens(&text);
        for (i, lemma) in self.lemmas.iter().enumerate() {
            if contains_sequence(&toks, lemma) {
                let lemma = lemma.join(" ");
                let closure = (i > 0 && lemma != self.name).then(|| (lemma, self.name.clone()));
                return Some(closure);
            }
        }
        None
    }
}

#[derive(Debug)]
struct Entry {
    sim: f64,
    key: String,
    depth: usize,
    seq: usize,
    node: Term,
    steps: Vec<Step>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Max-heap: higher similarity, then smaller key, then shallower, then
    // earlier insertion pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.sim
            .total_cmp(&other.sim)
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.depth.cmp(&self.depth))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Order candidates for expansion: similarity descending, then rendered
/// term, then edge. Keeps one edge per node.
fn rank_candidates(mut cands: Vec<(f64, &Neighbor)>) -> Vec<(f64, &Neighbor)> {
    cands.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.node.render().cmp(&b.1.node.render()))
            .then_with(|| a.1.cmp(b.1))
    });
    let mut seen = BTreeSet::new();
    cands.retain(|(_, n)| seen.insert(n.node.clone()));
    cands
}

/// Best-first search from the nodes `source` names toward `target`.
///
/// The frontier is ordered by similarity to the target. Each expansion
/// pushes the `beam` best neighbors not already reached at the same or a
/// smaller depth, so with `beam = 1` the search is a single greedy walk and
/// with a large beam it explores everything within `max_depth`.
/// `Ok(None)` means no path.
pub fn navigate<S: Similarity + ?Sized>(
    g: &DefinitionGraph,
    source: &str,
    target: &str,
    sim: &S,
    cfg: &EntailConfig,
) -> Result<Option<NavigationPath>, EntailError> {
    cfg.validate()?;
    let starts = g.lookup(source);
    if starts.is_empty() {
        return Err(EntailError::SourceNotFound(source.to_string()));
    }
    let tgt = Target::new(g, target);
    let score = |t: &Term| sim.similarity(&g.text_of(t), target);

    let mut ranked: Vec<(f64, Term)> = starts.into_iter().map(|t| (score(&t), t)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.render().cmp(&b.1.render())));
    ranked.truncate(cfg.beam);

    let mut best: HashMap<Term, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    for (s, t) in ranked {
        best.insert(t.clone(), 0);
        heap.push(Entry {
            sim: s,
            key: t.render(),
            depth: 0,
            seq,
            node: t,
            steps: Vec::new(),
        });
        seq += 1;
    }

    while let Some(e) = heap.pop() {
        if best.get(&e.node).is_some_and(|&d| d < e.depth) {
            continue;
        }
        if let Some(closure) = tgt.matches(g, &e.node) {
            let start = e.steps.first().map_or_else(|| e.node.clone(), |s| s.from.clone());
            let closure = if e.steps.is_empty() && closure.is_none() {
                Some((normalize_term(source), normalize_term(target)))
            } else {
                closure
            };
            return Ok(Some(NavigationPath {
                source: source.to_string(),
                target: target.to_string(),
                start,
                steps: e.steps,
                terminal: e.node,
                closure,
            }));
        }
        if e.depth >= cfg.max_depth {
            continue;
        }
        let depth = e.depth + 1;
        let neighbors = g.neighbors(&e.node);
        let cands: Vec<(f64, &Neighbor)> = neighbors
            .iter()
            .filter(|n| best.get(&n.node).is_none_or(|&d| depth < d))
            .map(|n| (score(&n.node), n))
            .collect();
        for (s, n) in rank_candidates(cands).into_iter().take(cfg.beam) {
            best.insert(n.node.clone(), depth);
            let mut steps = e.steps.clone();
            steps.push(Step {
                from: e.node.clone(),
                predicate: n.predicate.clone(),
                to: n.node.clone(),
                origin: n.origin.clone(),
                inverse: n.inverse,
            });
            heap.push(Entry {
                sim: s,
                key: n.node.render(),
                depth,
                seq,
                node: n.node.clone(),
                steps,
            });
            seq += 1;
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Justification {
    pub sentences: Vec<String>,
}

fn sentence_for(g: &DefinitionGraph, step: &Step) -> String {
    let (from, to) = if step.inverse {
        (g.text_of(&step.to), g.text_of(&step.from))
    } else {
        (g.text_of(&step.from), g.text_of(&step.to))
    };
    let origin = g.text_of(&Term::Resource(step.origin.clone()));
    match step.predicate.as_str() {
        HAS_SUPERTYPE => format!("{} {from} is a kind of {to}", capitalize(indefinite_article(&from))),
        "has_diff_qual" => format!(
            "{} {origin} is {} {from} {to}",
            capitalize(indefinite_article(&origin)),
            indefinite_article(&from)
        ),
        "has_diff_event" => format!("{} {from} {to}", capitalize(indefinite_article(&from))),
        p => {
            let role: &str = match RoleLabel::from_predicate(p) {
                Some(l) => l.human_name(),
                None => p,
            };
            format!("{from}: {role} \u{2014} {to}")
        }
    }
}

/// One sentence per step, plus a synonymy sentence when the path closed on
/// a synonym. A supertype step followed by a quality of that same
/// definition reads as a single sentence.
pub fn justify(path: &NavigationPath, g: &DefinitionGraph) -> Justification {
    let mut sentences = Vec::new();
    let steps = &path.steps;
    let mut i = 0;
    while i < steps.len() {
        let s = &steps[i];
        if let Some(next) = steps.get(i + 1) {
            let merges = s.predicate == HAS_SUPERTYPE
                && !s.inverse
                && next.predicate == "has_diff_qual"
                && !next.inverse
                && next.from == s.to
                && s.from.as_iri() == Some(next.origin.as_str());
            if merges {
                let from = g.text_of(&s.from);
                let sup = g.text_of(&s.to);
                sentences.push(format!(
                    "{} {from} is {} {sup} {}",
                    capitalize(indefinite_article(&from)),
                    indefinite_article(&sup),
                    g.text_of(&next.to)
                ));
                i += 2;
                continue;
            }
        }
        sentences.push(sentence_for(g, s));
        i += 1;
    }
    if let Some((a, b)) = &path.closure {
        sentences.push(format!("{} is synonym of {b}", capitalize(a)));
    }
    Justification { sentences }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Entails,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    PathFound,
    NoPath,
    SourceNotInGraph,
    BelowThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub source: String,
    pub target: String,
    pub similarity: f64,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathEdge {
    pub from: String,
    pub predicate: String,
    pub to: String,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub decision: Decision,
    pub source: Option<String>,
    pub target: Option<String>,
    pub path: Vec<PathEdge>,
    pub justification: Vec<String>,
    pub attempts: Vec<Attempt>,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialize")
    }
}

pub fn entail<S: Similarity + ?Sized>(
    g: &DefinitionGraph,
    t_text: &str,
    h_text: &str,
    sim: &S,
    cfg: &EntailConfig,
) -> Result<Verdict, EntailError> {
    entail_tagged(g, t_text, None, h_text, None, sim, cfg)
}

/// Try the ranked pairs in order; the first one with a path decides.
/// Texts with no distinguishing chunks entail trivially.
pub fn entail_tagged<S: Similarity + ?Sized>(
    g: &DefinitionGraph,
    t_text: &str,
    t_tags: Option<&[String]>,
    h_text: &str,
    h_tags: Option<&[String]>,
    sim: &S,
    cfg: &EntailConfig,
) -> Result<Verdict, EntailError> {
    cfg.validate()?;
    let pairs = select_term_pairs_tagged(t_text, t_tags, h_text, h_tags, sim, cfg.pair_count)?;
    let mut verdict = Verdict {
        decision: Decision::Rejected,
        source: None,
        target: None,
        path: Vec::new(),
        justification: Vec::new(),
        attempts: Vec::new(),
    };
    if pairs.is_empty() {
        verdict.decision = Decision::Entails;
        return Ok(verdict);
    }
    for p in pairs {
        let mut attempt = Attempt {
            source: p.source.clone(),
            target: p.target.clone(),
            similarity: p.similarity,
            outcome: AttemptOutcome::BelowThreshold,
        };
        if p.similarity < cfg.accept_threshold {
            verdict.attempts.push(attempt);
            continue;
        }
        match navigate(g, &p.source, &p.target, sim, cfg) {
            Err(EntailError::SourceNotFound(_)) => attempt.outcome = AttemptOutcome::SourceNotInGraph,
            Err(e) => return Err(e),
            Ok(None) => attempt.outcome = AttemptOutcome::NoPath,
            Ok(Some(path)) => {
                attempt.outcome = AttemptOutcome::PathFound;
                verdict.attempts.push(attempt);
                verdict.decision = Decision::Entails;
                verdict.justification = justify(&path, g).sentences;
                verdict.path = path
                    .steps
                    .iter()
                    .map(|s| PathEdge {
                        from: s.from.render(),
                        predicate: s.predicate.clone(),
                        to: s.to.render(),
                        inverse: s.inverse,
                    })
                    .collect();
                verdict.source = Some(p.source);
                verdict.target = Some(p.target);
                return Ok(verdict);
            }
        }
        verdict.attempts.push(attempt);
    }
    Ok(verdict)
}
