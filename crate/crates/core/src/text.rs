//! Small string helpers shared by the modules. All offsets in this crate are
//! counted in Unicode scalar values (`char`s), matching the standoff
//! convention, so slicing has to go through these helpers.

/// Number of characters in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slice `s` by character offsets `[start, end)`. Returns `None` when the
/// range is inverted or out of bounds.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut byte_start = None;
    let mut byte_end = None;
    for (ci, (bi, _)) in s.char_indices().enumerate() {
        if ci == start {
            byte_start = Some(bi);
        }
        if ci == end {
            byte_end = Some(bi);
            break;
        }
    }
    let len = char_len(s);
    if start == len {
        byte_start = Some(s.len());
    }
    if end == len {
        byte_end = Some(s.len());
    }
    match (byte_start, byte_end) {
        (Some(a), Some(b)) => Some(&s[a..b]),
        _ => None,
    }
}

/// Lowercase and collapse runs of whitespace and underscores into a single
/// space. Used for every lemma and surface-form comparison.
pub fn normalize_term(s: &str) -> String {
    s.split(|c: char| c.is_whitespace() || c == '_')
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Split on anything that is not alphanumeric and lowercase the pieces.
pub fn word_tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Candidate singular forms of a lowercase word, most specific first. The
/// word itself is not included.
pub fn singular_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    if word.len() > 3 && word.ends_with("ies") {
        out.push(format!("{}y", &word[..word.len() - 3]));
    }
    if word.len() > 3
        && (word.ends_with("ses")
            || word.ends_with("xes")
            || word.ends_with("zes")
            || word.ends_with("ches")
            || word.ends_with("shes"))
    {
        out.push(word[..word.len() - 2].to_string());
    }
    if word.len() > 2 && word.ends_with('s') && !word.ends_with("ss") {
        out.push(word[..word.len() - 1].to_string());
    }
    out
}

/// Singular candidates for a (possibly multiword) normalized term: only the
/// last word is inflected.
pub fn term_singulars(term: &str) -> Vec<String> {
    match term.rsplit_once(' ') {
        Some((head, last)) => singular_candidates(last)
            .into_iter()
            .map(|s| format!("{head} {s}"))
            .collect(),
        None => singular_candidates(term),
    }
}

/// Two word tokens agree when they are equal or one is a plural of the other.
pub fn same_word(a: &str, b: &str) -> bool {
    a == b
        || singular_candidates(a).iter().any(|s| s == b)
        || singular_candidates(b).iter().any(|s| s == a)
}

/// Uppercase the first character.
pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Indefinite article for `word`, decided by its first letter.
pub fn indefinite_article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}
