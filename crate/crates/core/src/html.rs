//! Minimal tag scanning for generated HTML documents.

use alloc::vec::Vec;
use core::ops::Range;

/// One `<script ...>` element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptTag<'a> {
    /// Byte range of the opening tag.
    pub open: Range<usize>,
    /// Value of the `src` attribute, if any.
    pub src: Option<&'a str>,
    /// Byte range between the opening tag and `</script>`; `None` when unclosed.
    pub body: Option<Range<usize>>,
}

pub(crate) fn find_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.is_empty() || from > h.len() || h.len() - from < n.len() {
        return None;
    }
    (from..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

pub(crate) fn rfind_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.is_empty() || h.len() < n.len() {
        return None;
    }
    (0..=h.len() - n.len())
        .rev()
        .find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Every script element in document order.
pub fn script_tags(html: &str) -> Vec<ScriptTag<'_>> {
    let bytes = html.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(start) = find_ci(html, "<script", pos) {
        let after = start + "<script".len();
        // `<scripts>` or `<scriptfoo` are other tags
        if after < bytes.len() && !(bytes[after].is_ascii_whitespace() || bytes[after] == b'>' || bytes[after] == b'/') {
            pos = after;
            continue;
        }
        let Some(gt) = html[after..].find('>').map(|i| i + after) else {
            break;
        };
        let attrs = &html[after..gt];
        let src = attribute(attrs, "src");
        let self_closing = attrs.trim_end().ends_with('/');
        let body = if self_closing {
            Some(gt + 1..gt + 1)
        } else {
            find_ci(html, "</script", gt + 1).map(|end| gt + 1..end)
        };
        pos = match &body {
            Some(b) if !self_closing => b.end + "</script".len(),
            _ => gt + 1,
        };
        out.push(ScriptTag {
            open: start..gt + 1,
            src,
            body,
        });
    }
    out
}

/// Value of attribute `name` inside a tag's attribute text.
fn attribute<'a>(attrs: &'a str, name: &str) -> Option<&'a str> {
    let bytes = attrs.as_bytes();
    let mut from = 0;
    while let Some(i) = find_ci(attrs, name, from) {
        from = i + name.len();
        let boundary_before = i == 0 || bytes[i - 1].is_ascii_whitespace();
        if !boundary_before {
            continue;
        }
        let mut j = from;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= bytes.len() || bytes[j] != b'=' {
            continue;
        }
        j += 1;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= bytes.len() {
            return None;
        }
        let q = bytes[j];
        if q == b'"' || q == b'\'' {
            let end = attrs[j + 1..].find(q as char)? + j + 1;
            return Some(&attrs[j + 1..end]);
        }
        let end = attrs[j..]
            .find(|c: char| c.is_ascii_whitespace() || c == '/')
            .map_or(attrs.len(), |e| e + j);
        return Some(&attrs[j..end]);
    }
    None
}

/// Inline script bodies (scripts without `src`), joined by newlines.
pub fn inline_script_text(html: &str) -> alloc::string::String {
    let mut parts: Vec<&str> = Vec::new();
    for tag in script_tags(html) {
        if tag.src.is_some() {
            continue;
        }
        if let Some(body) = tag.body {
            parts.push(html[body].trim_matches('\n'));
        }
    }
    parts.join("\n")
}
