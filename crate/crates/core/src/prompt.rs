//! Prompt container and fenced-block helpers shared by every model stage.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// A two-message prompt: system instructions followed by one user turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FencedBlock<'a> {
    /// Info string after the opening fence, e.g. `json`; may be empty.
    pub lang: &'a str,
    pub body: &'a str,
}

/// All closed ```` ``` ```` blocks in `text`, in order. Unclosed fences are ignored.
pub fn fenced_blocks(text: &str) -> Vec<FencedBlock<'_>> {
    let mut blocks = Vec::new();
    let mut open: Option<(&str, usize)> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        let line_start = offset;
        offset += line.len();
        if let Some(info) = trimmed.strip_prefix("```") {
            match open {
                None => open = Some((info.trim(), offset)),
                Some((lang, body_start)) if info.trim().is_empty() => {
                    let body = text[body_start..line_start].trim_end_matches(['\n', '\r']);
                    blocks.push(FencedBlock { lang, body });
                    open = None;
                }
                Some(_) => {}
            }
        }
    }
    blocks
}
