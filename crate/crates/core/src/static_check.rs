//! Non-executing checks of a generated document against its plan.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::generate::{cdn_script_count, has_doctype, GeneratedArtifact, GenerationConfig};
use crate::html::script_tags;
use crate::plan::PipelinePlan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCoverage {
    pub node: usize,
    pub name: String,
    pub present: Vec<String>,
    pub missing: Vec<String>,
}

impl NodeCoverage {
    pub fn covered(&self) -> usize {
        self.present.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticReport {
    pub has_doctype: bool,
    pub cdn_url: String,
    /// Script elements loading the configured CDN URL.
    pub cdn_scripts: usize,
    /// Every `<script>` has a matching `</script>`.
    pub scripts_closed: bool,
    /// Markdown fence lines come in pairs (ideally there are none).
    pub fences_balanced: bool,
    /// Brackets in inline scripts nest correctly, ignoring strings and comments.
    pub brackets_balanced: bool,
    pub coverage: Vec<NodeCoverage>,
}

impl StaticReport {
    pub fn missing_script(&self) -> bool {
        self.cdn_scripts == 0
    }

    /// Document type declaration present and CDN script loaded exactly once.
    pub fn document_ok(&self) -> bool {
        self.has_doctype && self.cdn_scripts == 1
    }

    pub fn structural_pass(&self) -> bool {
        self.document_ok() && self.scripts_closed && self.fences_balanced && self.brackets_balanced
    }

    pub fn coverage_complete(&self) -> bool {
        self.coverage.iter().all(|c| c.missing.is_empty())
    }
}

pub fn static_check(artifact: &GeneratedArtifact, plan: &PipelinePlan, config: &GenerationConfig) -> StaticReport {
    check_html(&artifact.html, plan, config)
}

/// Same checks on raw document text, for documents that never went through
/// artifact construction.
pub fn check_html(html: &str, plan: &PipelinePlan, config: &GenerationConfig) -> StaticReport {
    let cdn_url = config.cdn_url();
    let tags = script_tags(html);
    let fence_lines = html
        .lines()
        .filter(|l| l.trim_start().starts_with("```"))
        .count();
    let brackets_balanced = tags
        .iter()
        .filter(|t| t.src.is_none())
        .filter_map(|t| t.body.clone())
        .all(|body| brackets_nest(&html[body]));
    let coverage = plan
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let (present, missing): (Vec<String>, Vec<String>) = node
                .modules
                .iter()
                .cloned()
                .partition(|m| contains_word(html, m));
            NodeCoverage {
                node: i,
                name: node.name.clone(),
                present,
                missing,
            }
        })
        .collect();
    StaticReport {
        has_doctype: has_doctype(html),
        cdn_scripts: cdn_script_count(html, &cdn_url),
        cdn_url,
        scripts_closed: tags.iter().all(|t| t.body.is_some()),
        fences_balanced: fence_lines % 2 == 0,
        brackets_balanced,
        coverage,
    }
}

fn contains_word(text: &str, word: &str) -> bool {
    let bytes = text.as_bytes();
    let ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'$';
    text.match_indices(word).any(|(i, _)| {
        let end = i + word.len();
        (i == 0 || !ident(bytes[i - 1])) && (end == bytes.len() || !ident(bytes[end]))
    })
}

/// Bracket nesting of JavaScript source. Strings, template literals,
/// comments and regex literals are skipped.
pub fn brackets_nest(js: &str) -> bool {
    let b = js.as_bytes();
    let mut stack: Vec<u8> = Vec::new();
    let mut i = 0;
    // last significant byte, used to tell a regex literal from division
    let mut prev: u8 = b'(';
    while i < b.len() {
        let c = b[i];
        match c {
            b'\'' | b'"' | b'`' => {
                i += 1;
                while i < b.len() && b[i] != c {
                    if b[i] == b'\\' {
                        i += 1;
                    } else if c != b'`' && b[i] == b'\n' {
                        return false;
                    }
                    i += 1;
                }
                if i >= b.len() {
                    return false;
                }
                prev = b'a';
            }
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                match js[i + 2..].find("*/") {
                    Some(end) => i += end + 3,
                    None => return false,
                }
                continue;
            }
            b'/' if b"(,=:[!&|?{};+-*%<>~^".contains(&prev) => {
                i += 1;
                let mut in_class = false;
                while i < b.len() {
                    match b[i] {
                        b'\\' => i += 1,
                        b'[' => in_class = true,
                        b']' => in_class = false,
                        b'/' if !in_class => break,
                        b'\n' => return false,
                        _ => {}
                    }
                    i += 1;
                }
                prev = b'a';
            }
            b'(' | b'[' | b'{' => {
                stack.push(c);
                prev = c;
            }
            b')' | b']' | b'}' => {
                let open = match c {
                    b')' => b'(',
                    b']' => b'[',
                    _ => b'{',
                };
                if stack.pop() != Some(open) {
                    return false;
                }
                prev = c;
            }
            c if c.is_ascii_whitespace() => {}
            c => prev = c,
        }
        i += 1;
    }
    stack.is_empty()
}
