//! Rule-based pre-annotation of definitions from their constituency parses,
//! and the supertype repair pass for labelings that lack one.
//!
//! The cascade runs in a fixed order and never overwrites an earlier
//! decision; each later rule only claims text that is still free:
//!
//! 1. supertype: head nouns of the innermost-leftmost NP containing a noun
//!    (for verbs, the head verbs of the leftmost VP);
//! 2. differentia event: maximal SBAR/VP constituents after the supertype;
//! 3. event location / event time: PPs carved out of those events, and
//!    location, origin or time PPs attached next to the supertype;
//! 4. differentia quality: modifiers inside the supertype NP, plus an
//!    adjacent ADJP (leading adverbs become quality modifiers);
//! 5. purpose: `for` + gerund PPs and infinitival `to` VPs;
//! 6. fallback: leftover clauses are associated facts, leftover adjectival
//!    phrases accessory qualities.
//!
//! Leading determiners are never labeled. Accessory determiners are not
//! produced by any rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{AnnotatedDefinition, CoverageExemptions, PartOfSpeech, RoleLabel, RoleSpan};
use crate::text::singular_candidates;
use crate::treebank::{contains_category, CategoryMatch, ParseTree, Span, TreeNode};

/// Per-rule switches. Everything is on by default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleToggles {
    pub supertype: bool,
    pub differentia_event: bool,
    pub event_components: bool,
    pub differentia_quality: bool,
    pub purpose: bool,
    pub fallback: bool,
}

impl Default for RuleToggles {
    fn default() -> Self {
        RuleToggles {
            supertype: true,
            differentia_event: true,
            event_components: true,
            differentia_quality: true,
            purpose: true,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Let `NN` in the supertype rule match NNS/NNP/NNPS as well.
    pub noun_family_matching: bool,
    pub temporal_head_nouns: Vec<String>,
    pub location_prepositions: Vec<String>,
    /// Prepositions that mark an origin location when the PP attaches to the
    /// supertype rather than to an event.
    pub origin_prepositions: Vec<String>,
    /// Prepositions that open a purpose PP when followed by a gerund.
    pub purpose_prepositions: Vec<String>,
    /// Known location words; consulted when no entity tags are supplied.
    pub location_gazetteer: Vec<String>,
    pub rules: RuleToggles,
}

impl Default for RuleConfig {
    fn default() -> Self {
        let words = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        RuleConfig {
            noun_family_matching: false,
            temporal_head_nouns: words(&[
                "century", "year", "time", "period", "era", "day", "decade", "age", "month", "week",
                "season", "night", "morning", "evening", "hour",
            ]),
            location_prepositions: words(&["in", "at", "near", "from", "on", "inside", "throughout"]),
            origin_prepositions: words(&["from"]),
            purpose_prepositions: words(&["for"]),
            location_gazetteer: Vec::new(),
            rules: RuleToggles::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("word list `{0}` is empty")]
    EmptyList(&'static str),
    #[error("word list `{list}` contains `{word}`, which is not lowercase")]
    NotLowercase { list: &'static str, word: String },
}

impl RuleConfig {
    pub fn category_match(&self) -> CategoryMatch {
        if self.noun_family_matching {
            CategoryMatch::NounFamily
        } else {
            CategoryMatch::Exact
        }
    }

    /// Check the word-list invariants. The gazetteer may be empty.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let lists: [(&'static str, &Vec<String>, bool); 5] = [
            ("temporal_head_nouns", &self.temporal_head_nouns, true),
            ("location_prepositions", &self.location_prepositions, true),
            ("origin_prepositions", &self.origin_prepositions, true),
            ("purpose_prepositions", &self.purpose_prepositions, true),
            ("location_gazetteer", &self.location_gazetteer, false),
        ];
        for (name, list, required) in lists {
            if required && list.is_empty() {
                return Err(ConfigError::EmptyList(name));
            }
            if let Some(w) = list.iter().find(|w| w.to_lowercase() != **w) {
                return Err(ConfigError::NotLowercase {
                    list: name,
                    word: w.clone(),
                });
            }
        }
        Ok(())
    }

    fn is_temporal(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        let hit = |x: &str| self.temporal_head_nouns.iter().any(|t| t == x);
        hit(&w) || singular_candidates(&w).iter().any(|s| hit(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("tree has no leaves")]
    NoLeaves,
    #[error("tree text `{tree}` does not match definition gloss `{gloss}`")]
    GlossMismatch { tree: String, gloss: String },
    #[error("{tags} entity tags supplied for {leaves} tokens")]
    TagCountMismatch { tags: usize, leaves: usize },
}

/// Flat, index-addressed view of a tree for the rules.
struct Flat<'a> {
    tree: &'a ParseTree,
    nodes: Vec<FlatNode<'a>>,
    /// Leaf node indices in surface order.
    leaves: Vec<usize>,
    /// Optional entity tag per leaf (position in `leaves`).
    tags: Option<&'a [String]>,
}

struct FlatNode<'a> {
    node: &'a TreeNode,
    depth: usize,
    parent: Option<usize>,
    children: Vec<usize>,
}

impl<'a> Flat<'a> {
    fn new(tree: &'a ParseTree, tags: Option<&'a [String]>) -> Self {
        let walk = tree.preorder();
        let mut nodes: Vec<FlatNode<'a>> = walk
            .iter()
            .map(|v| FlatNode {
                node: v.node,
                depth: v.depth,
                parent: v.parent,
                children: Vec::new(),
            })
            .collect();
        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p].children.push(i);
            }
        }
        let leaves = (0..nodes.len()).filter(|&i| nodes[i].node.is_leaf()).collect();
        Flat {
            tree,
            nodes,
            leaves,
            tags,
        }
    }

    fn label(&self, i: usize) -> &str {
        &self.nodes[i].node.label
    }

    fn span(&self, i: usize) -> Span {
        self.nodes[i].node.span
    }

    fn is_leaf(&self, i: usize) -> bool {
        self.nodes[i].node.is_leaf()
    }

    fn token(&self, i: usize) -> &str {
        self.nodes[i].node.token.as_deref().unwrap_or("")
    }

    fn surface(&self, i: usize) -> &str {
        self.tree.text(self.span(i))
    }

    fn ancestors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[i].parent, move |&p| self.nodes[p].parent)
    }

    fn leaves_under(&self, i: usize) -> Vec<usize> {
        let span = self.span(i);
        self.leaves
            .iter()
            .copied()
            .filter(|&l| span.contains(&self.span(l)))
            .collect()
    }

    fn leaf_position(&self, leaf: usize) -> usize {
        self.leaves.iter().position(|&l| l == leaf).expect("leaf index")
    }

    fn tag(&self, leaf: usize) -> Option<&str> {
        self.tags.map(|t| t[self.leaf_position(leaf)].as_str())
    }

    /// Indices carrying any of `labels`, ordered by start then depth
    /// descending.
    fn find(&self, labels: &[&str], mode: CategoryMatch) -> Vec<usize> {
        let mut hits: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| labels.iter().any(|l| mode.matches(l, self.label(i))))
            .collect();
        hits.sort_by(|&a, &b| {
            self.span(a)
                .start
                .cmp(&self.span(b).start)
                .then(self.nodes[b].depth.cmp(&self.nodes[a].depth))
        });
        hits
    }

    fn first_leaf(&self, i: usize) -> usize {
        let mut cur = i;
        while let Some(&c) = self.nodes[cur].children.first() {
            cur = c;
        }
        cur
    }
}

fn is_noun(label: &str) -> bool {
    matches!(label, "NN" | "NNS" | "NNP" | "NNPS")
}

fn is_verb(label: &str) -> bool {
    label.starts_with("VB")
}

fn is_determiner_like(label: &str) -> bool {
    matches!(label, "DT" | "PDT" | "PRP$" | "WDT" | "WP$" | "POS" | "CC" | "," | ":" | "``" | "''")
}

fn is_adverb(label: &str) -> bool {
    matches!(label, "RB" | "RBR" | "RBS")
}

fn is_adjectival(label: &str) -> bool {
    matches!(label, "ADJP" | "JJ" | "JJR" | "JJS")
}

fn is_clausal(label: &str) -> bool {
    matches!(
        label,
        "S" | "SBAR" | "SINV" | "SQ" | "SBARQ" | "VP" | "PP" | "FRAG" | "UCP" | "RRC"
    )
}

/// Head-noun run of an NP: the last contiguous run of noun leaves among its
/// direct children, else the head of the first NP child holding a noun,
/// else the last noun leaf below it.
fn noun_core(flat: &Flat, np: usize) -> Option<Vec<usize>> {
    let kids = &flat.nodes[np].children;
    let mut best: Option<Vec<usize>> = None;
    let mut run: Vec<usize> = Vec::new();
    for &k in kids {
        if flat.is_leaf(k) && is_noun(flat.label(k)) {
            run.push(k);
        } else if !run.is_empty() {
            best = Some(std::mem::take(&mut run));
        }
    }
    if !run.is_empty() {
        best = Some(run);
    }
    if best.is_some() {
        return best;
    }
    for &k in kids {
        if flat.label(k) == "NP" && contains_category(flat.nodes[k].node, "NN", CategoryMatch::NounFamily) {
            return noun_core(flat, k);
        }
    }
    flat.leaves_under(np)
        .into_iter()
        .rev()
        .find(|&l| is_noun(flat.label(l)))
        .map(|l| vec![l])
}

fn hull_of(flat: &Flat, leaves: &[usize]) -> Option<Span> {
    leaves.iter().map(|&l| flat.span(l)).reduce(|a, b| a.hull(&b))
}

/// Outcome of the supertype rule: its span, plus the NP it came from for
/// noun definitions.
struct SupertypeHit {
    span: Span,
    np: Option<usize>,
    core: Vec<usize>,
}

fn find_supertype(flat: &Flat, pos: PartOfSpeech, cfg: &RuleConfig) -> Option<SupertypeHit> {
    match pos {
        PartOfSpeech::Noun => {
            let mode = cfg.category_match();
            let np = flat
                .find(&["NP"], CategoryMatch::Exact)
                .into_iter()
                .find(|&i| contains_category(flat.nodes[i].node, "NN", mode))?;
            let core = noun_core(flat, np)?;
            // modifiers are read from the NP that directly holds the head
            let holder = flat.nodes[core[0]].parent.unwrap_or(np);
            Some(SupertypeHit {
                span: hull_of(flat, &core)?,
                np: Some(holder),
                core,
            })
        }
        PartOfSpeech::Verb => {
            for vp in flat.find(&["VP"], CategoryMatch::Exact) {
                let mut run = Vec::new();
                for &k in &flat.nodes[vp].children {
                    if flat.is_leaf(k) && is_verb(flat.label(k)) {
                        run.push(k);
                    } else if !run.is_empty() {
                        break;
                    }
                }
                if !run.is_empty() {
                    return Some(SupertypeHit {
                        span: hull_of(flat, &run)?,
                        np: None,
                        core: run,
                    });
                }
            }
            None
        }
    }
}

/// Spans claimed so far.
struct Claims<'a> {
    gloss: &'a str,
    spans: Vec<RoleSpan>,
}

impl Claims<'_> {
    fn is_free(&self, span: Span) -> bool {
        !self.spans.iter().any(|s| s.span().overlaps(&span))
    }

    fn claim(&mut self, span: Span, label: RoleLabel) -> bool {
        if span.is_empty() || !self.is_free(span) {
            return false;
        }
        match RoleSpan::from_gloss(self.gloss, span.start, span.end, label) {
            Some(s) => {
                self.spans.push(s);
                true
            }
            None => false,
        }
    }
}

const LOCATION_TAGS: &[&str] = &["LOCATION", "LOC", "GPE"];
const TIME_TAGS: &[&str] = &["DATE", "TIME"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PpKind {
    Time,
    Location,
}

fn preposition(flat: &Flat, pp: usize) -> Option<String> {
    let first = *flat.nodes[pp].children.first()?;
    (flat.is_leaf(first) && matches!(flat.label(first), "IN" | "TO")).then(|| flat.token(first).to_lowercase())
}

/// Heads of every NP under `node`.
fn np_heads(flat: &Flat, node: usize) -> Vec<usize> {
    let span = flat.span(node);
    flat.find(&["NP"], CategoryMatch::Exact)
        .into_iter()
        .filter(|&np| span.contains(&flat.span(np)))
        .filter_map(|np| {
            flat.nodes[np]
                .children
                .iter()
                .rev()
                .copied()
                .find(|&k| flat.is_leaf(k) && is_noun(flat.label(k)))
        })
        .collect()
}

fn classify_pp(flat: &Flat, pp: usize, cfg: &RuleConfig) -> Option<PpKind> {
    let prep = preposition(flat, pp)?;
    let leaves = flat.leaves_under(pp);
    let tagged = |set: &[&str]| {
        leaves
            .iter()
            .any(|&l| flat.tag(l).is_some_and(|t| set.contains(&t)))
    };
    if np_heads(flat, pp).iter().any(|&h| cfg.is_temporal(flat.token(h))) || (flat.tags.is_some() && tagged(TIME_TAGS)) {
        return Some(PpKind::Time);
    }
    if !cfg.location_prepositions.contains(&prep) {
        return None;
    }
    let located = if flat.tags.is_some() {
        tagged(LOCATION_TAGS)
    } else {
        leaves.iter().any(|&l| {
            matches!(flat.label(l), "NNP" | "NNPS")
                || cfg
                    .location_gazetteer
                    .iter()
                    .any(|g| g.eq_ignore_ascii_case(flat.token(l)))
        })
    };
    located.then_some(PpKind::Location)
}

/// Outermost PPs under `node` (excluding `node`) that satisfy `keep`.
fn outer_pps(flat: &Flat, node: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let span = flat.span(node);
    let hits: Vec<usize> = flat
        .find(&["PP"], CategoryMatch::Exact)
        .into_iter()
        .filter(|&p| p != node && span.contains(&flat.span(p)) && keep(p))
        .collect();
    hits.iter()
        .copied()
        .filter(|&p| !flat.ancestors(p).any(|a| hits.contains(&a)))
        .collect()
}

/// Group `leaves` into runs of consecutive surface positions.
fn contiguous_runs(flat: &Flat, leaves: &[usize]) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut last_pos: Option<usize> = None;
    for &l in leaves {
        let p = flat.leaf_position(l);
        match (last_pos, runs.last_mut()) {
            (Some(lp), Some(run)) if p == lp + 1 => run.push(l),
            _ => runs.push(vec![l]),
        }
        last_pos = Some(p);
    }
    runs
}

fn only_exempt(flat: &Flat, run: &[usize], exempt: &CoverageExemptions) -> bool {
    run.iter().all(|&l| exempt.allows(flat.surface(l)))
}

fn starts_with_gerund(flat: &Flat, pp: usize) -> bool {
    flat.nodes[pp]
        .children
        .get(1)
        .map(|&obj| flat.label(flat.first_leaf(obj)) == "VBG")
        .unwrap_or(false)
}

fn is_infinitival_vp(flat: &Flat, vp: usize) -> bool {
    flat.label(vp) == "VP"
        && flat.nodes[vp]
            .children
            .first()
            .is_some_and(|&c| flat.is_leaf(c) && flat.label(c) == "TO")
}

/// Pre-annotate a definition from its parse. The returned definition has an
/// empty id and no lemmas; see [`AnnotatedDefinition::with_identity`].
pub fn preannotate(tree: &ParseTree, pos: PartOfSpeech, cfg: &RuleConfig) -> Result<AnnotatedDefinition, LabelError> {
    preannotate_tagged(tree, pos, cfg, None)
}

/// As [`preannotate`], with one named-entity tag per token (`O` for none).
/// When present, tags decide location and time PPs ahead of the gazetteer.
pub fn preannotate_tagged(
    tree: &ParseTree,
    pos: PartOfSpeech,
    cfg: &RuleConfig,
    entity_tags: Option<&[String]>,
) -> Result<AnnotatedDefinition, LabelError> {
    let leaves = tree.leaves();
    if leaves.is_empty() {
        return Err(LabelError::NoLeaves);
    }
    if let Some(tags) = entity_tags {
        if tags.len() != leaves.len() {
            return Err(LabelError::TagCountMismatch {
                tags: tags.len(),
                leaves: leaves.len(),
            });
        }
    }
    let flat = Flat::new(tree, entity_tags);
    let exempt = CoverageExemptions::default();
    let gloss = tree.source_text();
    let mut claims = Claims {
        gloss,
        spans: Vec::new(),
    };
    let rules = &cfg.rules;

    // (1) supertype
    let sup = if rules.supertype {
        find_supertype(&flat, pos, cfg)
    } else {
        None
    };
    if let Some(hit) = &sup {
        claims.claim(hit.span, RoleLabel::Supertype);
    }
    let after_sup = |span: Span| sup.as_ref().is_none_or(|h| span.start >= h.span.end);

    // (2) differentia events, with (3) components carved out
    if rules.differentia_event {
        let candidates: Vec<usize> = flat
            .find(&["SBAR", "VP"], CategoryMatch::Exact)
            .into_iter()
            .filter(|&i| after_sup(flat.span(i)) && claims.is_free(flat.span(i)))
            .filter(|&i| !flat.ancestors(i).any(|a| flat.label(a) == "PP"))
            .filter(|&i| {
                !(rules.purpose
                    && (is_infinitival_vp(&flat, i) || flat.ancestors(i).any(|a| is_infinitival_vp(&flat, a))))
            })
            .collect();
        let events: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| !flat.ancestors(i).any(|a| candidates.contains(&a)))
            .collect();
        for ev in events {
            let ev_span = flat.span(ev);
            if !claims.is_free(ev_span) {
                continue;
            }
            let mut carved: Vec<Span> = Vec::new();
            if rules.event_components {
                for pp in outer_pps(&flat, ev, |p| classify_pp(&flat, p, cfg).is_some()) {
                    let label = match classify_pp(&flat, pp, cfg) {
                        Some(PpKind::Time) => RoleLabel::EventTime,
                        _ => RoleLabel::EventLocation,
                    };
                    if claims.claim(flat.span(pp), label) {
                        carved.push(flat.span(pp));
                    }
                }
            }
            let rest: Vec<usize> = flat
                .leaves_under(ev)
                .into_iter()
                .filter(|&l| !carved.iter().any(|c| c.contains(&flat.span(l))))
                .collect();
            for run in contiguous_runs(&flat, &rest) {
                if only_exempt(&flat, &run, &exempt) {
                    continue;
                }
                if let Some(span) = hull_of(&flat, &run) {
                    claims.claim(span, RoleLabel::DifferentiaEvent);
                }
            }
        }
    }

    // (3b) time, location and origin PPs next to the supertype
    if rules.event_components {
        if let Some(hit) = &sup {
            let root = 0;
            let pps = outer_pps(&flat, root, |p| {
                flat.span(p).start >= hit.span.end && claims.is_free(flat.span(p)) && classify_pp(&flat, p, cfg).is_some()
            });
            for pp in pps {
                let label = match classify_pp(&flat, pp, cfg) {
                    Some(PpKind::Time) => RoleLabel::EventTime,
                    _ if preposition(&flat, pp).is_some_and(|p| cfg.origin_prepositions.contains(&p)) => {
                        RoleLabel::OriginLocation
                    }
                    _ => RoleLabel::EventLocation,
                };
                claims.claim(flat.span(pp), label);
            }
        }
    }

    // (4) differentia quality
    if rules.differentia_quality {
        if let Some(SupertypeHit { np: Some(np), core, .. }) = &sup {
            let core_start = flat.span(core[0]).start;
            let mut modifiers = Vec::new();
            for &k in &flat.nodes[*np].children {
                if flat.span(k).start >= core_start {
                    break;
                }
                if flat.is_leaf(k) {
                    if is_adverb(flat.label(k)) {
                        claims.claim(flat.span(k), RoleLabel::QualityModifier);
                    } else if !is_determiner_like(flat.label(k)) {
                        modifiers.push(k);
                    }
                } else if flat.label(k) == "ADJP" {
                    claim_adjp(&flat, &mut claims, k);
                } else if !flat.leaves_under(k).iter().all(|&l| is_determiner_like(flat.label(l))) {
                    claims.claim(flat.span(k), RoleLabel::DifferentiaQuality);
                }
            }
            for run in contiguous_runs(&flat, &modifiers) {
                if let Some(span) = hull_of(&flat, &run) {
                    claims.claim(span, RoleLabel::DifferentiaQuality);
                }
            }
            // an ADJP right after the supertype NP
            if let Some(parent) = flat.nodes[*np].parent {
                let sibs = &flat.nodes[parent].children;
                if let Some(idx) = sibs.iter().position(|&s| s == *np) {
                    if let Some(&next) = sibs.get(idx + 1) {
                        if flat.label(next) == "ADJP" {
                            claim_adjp(&flat, &mut claims, next);
                        }
                    }
                }
            }
        }
    }

    // (5) purpose
    if rules.purpose {
        let mut cands: Vec<usize> = flat
            .find(&["PP", "VP"], CategoryMatch::Exact)
            .into_iter()
            .filter(|&i| after_sup(flat.span(i)))
            .filter(|&i| {
                if flat.label(i) == "PP" {
                    preposition(&flat, i).is_some_and(|p| cfg.purpose_prepositions.contains(&p)) && starts_with_gerund(&flat, i)
                } else {
                    is_infinitival_vp(&flat, i)
                }
            })
            .collect();
        // earlier first, then larger
        cands.sort_by(|&a, &b| {
            let (sa, sb) = (flat.span(a), flat.span(b));
            sa.start.cmp(&sb.start).then(sb.end.cmp(&sa.end))
        });
        for c in cands {
            claims.claim(flat.span(c), RoleLabel::Purpose);
        }
    }

    // (6) fallback over what is left
    if rules.fallback {
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let span = flat.span(i);
            let label = flat.label(i);
            let free = claims.is_free(span);
            let substantive = !only_exempt(&flat, &flat.leaves_under(i), &exempt)
                && !flat.leaves_under(i).iter().all(|&l| is_determiner_like(flat.label(l)));
            if free && substantive && is_clausal(label) && after_sup(span) {
                claims.claim(span, RoleLabel::AssociatedFact);
                continue;
            }
            if free && substantive && is_adjectival(label) {
                claims.claim(span, RoleLabel::AccessoryQuality);
                continue;
            }
            for &c in flat.nodes[i].children.iter().rev() {
                stack.push(c);
            }
        }
    }

    let mut spans = claims.spans;
    spans.sort_by_key(|s| (s.start, s.end));
    Ok(AnnotatedDefinition {
        id: String::new(),
        pos,
        lemmas: Vec::new(),
        gloss: gloss.to_string(),
        spans,
    })
}

fn claim_adjp(flat: &Flat, claims: &mut Claims, adjp: usize) {
    let leaves = flat.leaves_under(adjp);
    let lead: Vec<usize> = leaves.iter().copied().take_while(|&l| is_adverb(flat.label(l))).collect();
    if lead.len() == leaves.len() {
        claims.claim(flat.span(adjp), RoleLabel::DifferentiaQuality);
        return;
    }
    if let Some(span) = hull_of(flat, &lead) {
        claims.claim(span, RoleLabel::QualityModifier);
    }
    if let Some(span) = hull_of(flat, &leaves[lead.len()..]) {
        claims.claim(span, RoleLabel::DifferentiaQuality);
    }
}

impl AnnotatedDefinition {
    pub fn with_identity(mut self, id: impl Into<String>, lemmas: Vec<String>) -> Self {
        self.id = id.into();
        self.lemmas = lemmas;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryOutcome {
    /// A supertype was inserted.
    Recovered,
    /// The input already had a supertype; returned unchanged.
    AlreadyPresent,
    /// No NP with a noun (or VP with a verb) exists; returned unchanged.
    NoCandidate,
}

impl RecoveryOutcome {
    pub fn is_warning(self) -> bool {
        !matches!(self, RecoveryOutcome::Recovered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovery {
    pub definition: AnnotatedDefinition,
    pub outcome: RecoveryOutcome,
}

/// Insert a missing supertype found by the supertype rule. Spans overlapping
/// it are trimmed around it; spans that do not touch it are left exactly as
/// they were.
pub fn recover_supertype(def: &AnnotatedDefinition, tree: &ParseTree, cfg: &RuleConfig) -> Result<Recovery, LabelError> {
    if tree.source_text() != def.gloss {
        return Err(LabelError::GlossMismatch {
            tree: tree.source_text().to_string(),
            gloss: def.gloss.clone(),
        });
    }
    if def.has_supertype() {
        return Ok(Recovery {
            definition: def.clone(),
            outcome: RecoveryOutcome::AlreadyPresent,
        });
    }
    let flat = Flat::new(tree, None);
    let Some(hit) = find_supertype(&flat, def.pos, cfg) else {
        return Ok(Recovery {
            definition: def.clone(),
            outcome: RecoveryOutcome::NoCandidate,
        });
    };
    let exempt = CoverageExemptions::default();
    let cand = hit.span;
    let chars: Vec<char> = def.gloss.chars().collect();
    let mut spans = Vec::with_capacity(def.spans.len() + 2);
    for s in &def.spans {
        if !s.span().overlaps(&cand) {
            spans.push(s.clone());
            continue;
        }
        for (a, b) in [(s.start, cand.start), (cand.end, s.end)] {
            if a >= b {
                continue;
            }
            let (mut a, mut b) = (a, b);
            while a < b && chars[a].is_whitespace() {
                a += 1;
            }
            while b > a && chars[b - 1].is_whitespace() {
                b -= 1;
            }
            if a == b {
                continue;
            }
            let piece: String = chars[a..b].iter().collect();
            let substantive = piece
                .split(|c: char| c.is_whitespace())
                .filter(|w| !w.is_empty())
                .any(|w| !exempt.allows(w));
            if substantive {
                spans.push(RoleSpan {
                    start: a,
                    end: b,
                    label: s.label,
                    text: piece,
                });
            }
        }
    }
    spans.push(RoleSpan::from_gloss(&def.gloss, cand.start, cand.end, RoleLabel::Supertype).expect("candidate inside gloss"));
    spans.sort_by_key(|s| (s.start, s.end));
    let mut definition = def.clone();
    definition.spans = spans;
    Ok(Recovery {
        definition,
        outcome: RecoveryOutcome::Recovered,
    })
}

/// Whether the supertype rule finds anything in `tree`.
pub fn has_supertype_candidate(tree: &ParseTree, pos: PartOfSpeech, cfg: &RuleConfig) -> bool {
    let flat = Flat::new(tree, None);
    find_supertype(&flat, pos, cfg).is_some()
}
