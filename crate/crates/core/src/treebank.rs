//! Penn-Treebank style bracketed constituency trees, aligned to the gloss
//! they were parsed from.
//!
//! Preterminals are the leaves of a [`ParseTree`]: `(NN whiskey)` is a single
//! node with label `NN`, token `whiskey` and no children. Every leaf owns the
//! character span of its token in the gloss; internal nodes span the hull of
//! their children. Whitespace between tokens belongs to no leaf.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open character interval `[start, end)` over a gloss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn hull(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: String,
    pub children: Vec<TreeNode>,
    /// Present exactly on leaves, as written in the bracketing.
    pub token: Option<String>,
    pub span: Span,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaves under this node (the node itself if it is a leaf), left to right.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    fn render_into(&self, out: &mut String) {
        out.push('(');
        out.push_str(&self.label);
        if let Some(tok) = &self.token {
            out.push(' ');
            out.push_str(tok);
        }
        for c in &self.children {
            out.push(' ');
            c.render_into(out);
        }
        out.push(')');
    }
}

/// How a category query is compared against node labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CategoryMatch {
    /// `NN` matches only `NN`.
    #[default]
    Exact,
    /// A query of `NN` also matches `NNS`, `NNP` and `NNPS`.
    NounFamily,
}

impl CategoryMatch {
    pub fn matches(self, query: &str, label: &str) -> bool {
        match self {
            CategoryMatch::Exact => query == label,
            CategoryMatch::NounFamily => {
                if query == "NN" {
                    matches!(label, "NN" | "NNS" | "NNP" | "NNPS")
                } else {
                    query == label
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    root: TreeNode,
    /// Label of a transparent single-child wrapper such as `ROOT` or `TOP`.
    wrapper: Option<String>,
    source_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unbalanced brackets at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("empty node at offset {offset}")]
    EmptyNode { offset: usize },
    #[error("unexpected token `{found}` at offset {offset}")]
    Unexpected { offset: usize, found: String },
    #[error("tree has no leaves")]
    NoLeaves,
    #[error("gloss offset {offset}: expected token `{expected}`, found `{found}`")]
    TokenMismatch {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("gloss offset {offset}: text `{found}` is not covered by any tree token")]
    TrailingGloss { offset: usize, found: String },
}

impl TreeError {
    /// Character offset the error refers to (into the bracketing for syntax
    /// errors, into the gloss for alignment errors).
    pub fn offset(&self) -> Option<usize> {
        match self {
            TreeError::Unbalanced { offset }
            | TreeError::EmptyNode { offset }
            | TreeError::Unexpected { offset, .. }
            | TreeError::TokenMismatch { offset, .. }
            | TreeError::TrailingGloss { offset, .. } => Some(*offset),
            TreeError::NoLeaves => None,
        }
    }
}

/// One node of a pre-order walk.
#[derive(Debug, Clone, Copy)]
pub struct Visit<'a> {
    pub node: &'a TreeNode,
    pub depth: usize,
    /// Index of the parent in the same walk.
    pub parent: Option<usize>,
}

impl ParseTree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn wrapper(&self) -> Option<&str> {
        self.wrapper.as_deref()
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        self.root.leaves()
    }

    /// Gloss text under `span`.
    pub fn text(&self, span: Span) -> &str {
        crate::text::char_slice(&self.source_text, span.start, span.end).unwrap_or("")
    }

    /// Pre-order walk with depths (root at 0) and parent links.
    pub fn preorder(&self) -> Vec<Visit<'_>> {
        let mut out = Vec::new();
        let mut stack = vec![(&self.root, 0usize, None)];
        while let Some((node, depth, parent)) = stack.pop() {
            let idx = out.len();
            out.push(Visit {
                node,
                depth,
                parent,
            });
            for c in node.children.iter().rev() {
                stack.push((c, depth + 1, Some(idx)));
            }
        }
        out
    }

    /// Canonical bracketing: single spaces, stripped function tags, wrapper
    /// kept.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(w) = &self.wrapper {
            out.push('(');
            out.push_str(w);
            out.push(' ');
            self.root.render_into(&mut out);
            out.push(')');
        } else {
            self.root.render_into(&mut out);
        }
        out
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug)]
enum Lex {
    Open(usize),
    Close(usize),
    Atom(usize, String),
}

fn lex(text: &str) -> Vec<Lex> {
    let mut out = Vec::new();
    let mut atom = String::new();
    let mut atom_start = 0;
    for (i, c) in text.chars().enumerate() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !atom.is_empty() {
                out.push(Lex::Atom(atom_start, std::mem::take(&mut atom)));
            }
            match c {
                '(' => out.push(Lex::Open(i)),
                ')' => out.push(Lex::Close(i)),
                _ => {}
            }
        } else {
            if atom.is_empty() {
                atom_start = i;
            }
            atom.push(c);
        }
    }
    if !atom.is_empty() {
        out.push(Lex::Atom(atom_start, atom));
    }
    out
}

/// Raw node before alignment; `None` label marks an unlabeled bracket.
struct RawNode {
    label: Option<String>,
    token: Option<String>,
    children: Vec<RawNode>,
}

struct Parser {
    toks: Vec<Lex>,
    pos: usize,
    end_offset: usize,
}

impl Parser {
    fn node(&mut self) -> Result<RawNode, TreeError> {
        let open = match self.toks.get(self.pos) {
            Some(Lex::Open(o)) => *o,
            Some(Lex::Close(o)) => return Err(TreeError::Unbalanced { offset: *o }),
            Some(Lex::Atom(o, a)) => {
                return Err(TreeError::Unexpected {
                    offset: *o,
                    found: a.clone(),
                })
            }
            None => {
                return Err(TreeError::Unbalanced {
                    offset: self.end_offset,
                })
            }
        };
        self.pos += 1;
        let label = match self.toks.get(self.pos) {
            Some(Lex::Atom(_, a)) => {
                let a = a.clone();
                self.pos += 1;
                Some(a)
            }
            Some(Lex::Close(_)) => return Err(TreeError::EmptyNode { offset: open }),
            Some(Lex::Open(_)) => None,
            None => {
                return Err(TreeError::Unbalanced {
                    offset: self.end_offset,
                })
            }
        };
        match self.toks.get(self.pos) {
            Some(Lex::Atom(_, tok)) => {
                let token = tok.clone();
                self.pos += 1;
                match self.toks.get(self.pos) {
                    Some(Lex::Close(_)) => {
                        self.pos += 1;
                        if label.is_none() {
                            return Err(TreeError::EmptyNode { offset: open });
                        }
                        Ok(RawNode {
                            label,
                            token: Some(token),
                            children: Vec::new(),
                        })
                    }
                    Some(Lex::Open(o)) | Some(Lex::Atom(o, _)) => Err(TreeError::Unexpected {
                        offset: *o,
                        found: self.describe(self.pos),
                    }),
                    None => Err(TreeError::Unbalanced {
                        offset: self.end_offset,
                    }),
                }
            }
            Some(Lex::Close(_)) => {
                // label only, e.g. "(NP)"
                Err(TreeError::EmptyNode { offset: open })
            }
            Some(Lex::Open(_)) => {
                let mut children = Vec::new();
                loop {
                    match self.toks.get(self.pos) {
                        Some(Lex::Open(_)) => children.push(self.node()?),
                        Some(Lex::Close(_)) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Lex::Atom(o, a)) => {
                            return Err(TreeError::Unexpected {
                                offset: *o,
                                found: a.clone(),
                            })
                        }
                        None => {
                            return Err(TreeError::Unbalanced {
                                offset: self.end_offset,
                            })
                        }
                    }
                }
                Ok(RawNode {
                    label,
                    token: None,
                    children,
                })
            }
            None => Err(TreeError::Unbalanced {
                offset: self.end_offset,
            }),
        }
    }

    fn describe(&self, i: usize) -> String {
        match &self.toks[i] {
            Lex::Open(_) => "(".into(),
            Lex::Close(_) => ")".into(),
            Lex::Atom(_, a) => a.clone(),
        }
    }
}

/// Drop function tags and coindexation: `NP-SBJ-1` and `NP=2` become `NP`.
/// Labels that start with a dash (`-LRB-`, `-NONE-`) are kept whole.
fn bare_category(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(i) if i > 0 => &label[..i],
        _ => label,
    }
}

/// Strip trace elements; returns `None` when nothing but traces remains.
fn strip_traces(raw: RawNode) -> Option<RawNode> {
    if raw.label.as_deref() == Some("-NONE-") {
        return None;
    }
    if raw.token.is_some() {
        return Some(raw);
    }
    let children: Vec<RawNode> = raw.children.into_iter().filter_map(strip_traces).collect();
    if children.is_empty() {
        None
    } else {
        Some(RawNode {
            label: raw.label,
            token: None,
            children,
        })
    }
}

fn unescape_ptb(token: &str) -> Option<&'static str> {
    Some(match token {
        "-LRB-" => "(",
        "-RRB-" => ")",
        "-LSB-" => "[",
        "-RSB-" => "]",
        "-LCB-" => "{",
        "-RCB-" => "}",
        "``" | "''" => "\"",
        _ => return None,
    })
}

struct Aligner<'a> {
    gloss: &'a [char],
    cursor: usize,
}

impl Aligner<'_> {
    fn skip_ws(&mut self) {
        while self.cursor < self.gloss.len() && self.gloss[self.cursor].is_whitespace() {
            self.cursor += 1;
        }
    }

    fn matches_at(&self, candidate: &str) -> Option<usize> {
        let n = candidate.chars().count();
        if n == 0 || self.cursor + n > self.gloss.len() {
            return None;
        }
        candidate
            .chars()
            .zip(&self.gloss[self.cursor..self.cursor + n])
            .all(|(a, b)| a == *b)
            .then_some(n)
    }

    fn take(&mut self, token: &str) -> Result<Span, TreeError> {
        self.skip_ws();
        let n = self
            .matches_at(token)
            .or_else(|| unescape_ptb(token).and_then(|u| self.matches_at(u)))
            .ok_or_else(|| {
                let found: String = self.gloss[self.cursor..]
                    .iter()
                    .take_while(|c| !c.is_whitespace())
                    .collect();
                TreeError::TokenMismatch {
                    offset: self.cursor,
                    expected: token.to_string(),
                    found,
                }
            })?;
        let span = Span::new(self.cursor, self.cursor + n);
        self.cursor += n;
        Ok(span)
    }

    fn build(&mut self, raw: RawNode) -> Result<TreeNode, TreeError> {
        let label = bare_category(raw.label.as_deref().unwrap_or("")).to_string();
        if let Some(tok) = raw.token {
            let span = self.take(&tok)?;
            return Ok(TreeNode {
                label,
                children: Vec::new(),
                token: Some(tok),
                span,
            });
        }
        let mut children = Vec::with_capacity(raw.children.len());
        for c in raw.children {
            children.push(self.build(c)?);
        }
        let span = children
            .iter()
            .map(|c| c.span)
            .reduce(|a, b| a.hull(&b))
            .expect("internal node has children");
        Ok(TreeNode {
            label,
            children,
            token: None,
            span,
        })
    }
}

/// Parse one bracketed tree and align its leaves to `gloss`.
pub fn parse_tree(text: &str, gloss: &str) -> Result<ParseTree, TreeError> {
    let toks = lex(text);
    let end_offset = text.chars().count();
    if toks.is_empty() {
        return Err(TreeError::NoLeaves);
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end_offset,
    };
    let raw = parser.node()?;
    if let Some(extra) = parser.toks.get(parser.pos) {
        return Err(match extra {
            Lex::Close(o) => TreeError::Unbalanced { offset: *o },
            Lex::Open(o) => TreeError::Unexpected {
                offset: *o,
                found: "(".into(),
            },
            Lex::Atom(o, a) => TreeError::Unexpected {
                offset: *o,
                found: a.clone(),
            },
        });
    }
    let raw = strip_traces(raw).ok_or(TreeError::NoLeaves)?;

    // Unwrap transparent wrappers: ROOT, TOP or an unlabeled bracket around a
    // single constituent.
    let (wrapper, raw) = match raw.label.as_deref() {
        None | Some("ROOT") | Some("TOP") if raw.children.len() == 1 => {
            let w = raw.label.clone().unwrap_or_default();
            let mut raw = raw;
            (Some(w), raw.children.pop().expect("one child"))
        }
        None => {
            return Err(TreeError::EmptyNode { offset: 0 });
        }
        _ => (None, raw),
    };

    let chars: Vec<char> = gloss.chars().collect();
    let mut aligner = Aligner {
        gloss: &chars,
        cursor: 0,
    };
    let root = aligner.build(raw)?;
    aligner.skip_ws();
    if aligner.cursor < chars.len() {
        return Err(TreeError::TrailingGloss {
            offset: aligner.cursor,
            found: chars[aligner.cursor..].iter().collect(),
        });
    }
    Ok(ParseTree {
        root,
        wrapper,
        source_text: gloss.to_string(),
    })
}

/// Parse a tree whose gloss is simply its tokens joined by single spaces.
pub fn parse_tree_from_tokens(text: &str) -> Result<ParseTree, TreeError> {
    let toks = lex(text);
    // Leaf tokens are atoms directly preceded by another atom (the label).
    let mut words = Vec::new();
    for w in toks.windows(2) {
        if let (Lex::Atom(..), Lex::Atom(_, tok)) = (&w[0], &w[1]) {
            words.push(unescape_ptb(tok).unwrap_or(tok).to_string());
        }
    }
    parse_tree(text, &words.join(" "))
}

/// All nodes whose label is in `labels`, ordered by start ascending and then
/// depth descending, so the innermost-leftmost match comes first.
pub fn find_nodes<'a>(tree: &'a ParseTree, labels: &BTreeSet<&str>) -> Vec<&'a TreeNode> {
    find_nodes_with(tree, labels, CategoryMatch::Exact)
}

pub fn find_nodes_with<'a>(
    tree: &'a ParseTree,
    labels: &BTreeSet<&str>,
    mode: CategoryMatch,
) -> Vec<&'a TreeNode> {
    if labels.is_empty() {
        return Vec::new();
    }
    let mut hits: Vec<(usize, usize, &TreeNode)> = tree
        .preorder()
        .into_iter()
        .filter(|v| labels.iter().any(|l| mode.matches(l, &v.node.label)))
        .map(|v| (v.node.span.start, v.depth, v.node))
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    hits.into_iter().map(|(_, _, n)| n).collect()
}

/// True iff `node` or any descendant carries `label`.
pub fn contains_category(node: &TreeNode, label: &str, mode: CategoryMatch) -> bool {
    mode.matches(label, &node.label)
        || node
            .children
            .iter()
            .any(|c| contains_category(c, label, mode))
}
