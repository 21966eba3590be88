//! Text helpers shared by ingestion, delexicalization and realization.

use crate::corpus::SlotLabel;

/// Lowercases and collapses runs of whitespace into single spaces.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte spans of `needle` in `haystack` that sit between non-alphanumeric
/// boundaries. Matches are scanned left to right and do not overlap.
pub fn boundary_matches(haystack: &str, needle: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    if needle.is_empty() {
        return spans;
    }
    let mut from = 0;
    while let Some(rel) = haystack[from..].find(needle) {
        let start = from + rel;
        let end = start + needle.len();
        let left_ok = haystack[..start]
            .chars()
            .next_back()
            .is_none_or(|c| !is_word_char(c));
        let right_ok = haystack[end..]
            .chars()
            .next()
            .is_none_or(|c| !is_word_char(c));
        if left_ok && right_ok {
            spans.push((start, end));
            from = end;
        } else {
            // advance by one char to allow overlapping candidates
            let step = haystack[start..].chars().next().map_or(1, char::len_utf8);
            from = start + step;
        }
        if from >= haystack.len() {
            break;
        }
    }
    spans
}

pub fn contains_at_boundary(haystack: &str, needle: &str) -> bool {
    !boundary_matches(haystack, needle).is_empty()
}

/// Surface form of a placeholder, e.g. `[train-day]`.
pub fn placeholder(label: &SlotLabel) -> String {
    format!("[{}]", label.as_str())
}

/// A piece of text split around placeholder tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment<'a> {
    Text(&'a str),
    Slot(SlotLabel),
}

/// Splits `text` into literal runs and `[domain-name]` placeholder tokens.
/// Bracketed spans whose contents are not a well-formed slot label stay literal.
pub fn segments(text: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut literal_start = 0;
    let mut cursor = 0;
    while let Some(open_rel) = text[cursor..].find('[') {
        let open = cursor + open_rel;
        let Some(close_rel) = text[open + 1..].find(']') else {
            break;
        };
        let close = open + 1 + close_rel;
        match SlotLabel::parse(&text[open + 1..close]) {
            Ok(label) => {
                if open > literal_start {
                    out.push(Segment::Text(&text[literal_start..open]));
                }
                out.push(Segment::Slot(label));
                literal_start = close + 1;
                cursor = close + 1;
            }
            Err(_) => cursor = open + 1,
        }
    }
    if literal_start < text.len() {
        out.push(Segment::Text(&text[literal_start..]));
    }
    out
}

/// Labels of every placeholder token in `text`, in order of appearance.
pub fn placeholder_labels(text: &str) -> Vec<SlotLabel> {
    segments(text)
        .into_iter()
        .filter_map(|s| match s {
            Segment::Slot(l) => Some(l),
            Segment::Text(_) => None,
        })
        .collect()
}

/// Replaces placeholder tokens left to right using `lookup`. Returns the first
/// label `lookup` cannot resolve as the error.
pub fn fill_placeholders<'v, F>(text: &str, mut lookup: F) -> Result<String, SlotLabel>
where
    F: FnMut(&SlotLabel) -> Option<&'v str>,
{
    let mut out = String::with_capacity(text.len());
    for seg in segments(text) {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Slot(label) => match lookup(&label) {
                Some(v) => out.push_str(v),
                None => return Err(label),
            },
        }
    }
    Ok(out)
}
