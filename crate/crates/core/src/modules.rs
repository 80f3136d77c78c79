//! Static scanning of vtk.js module references in example documents.
//!
//! Two reference forms are recognised without parsing JavaScript:
//!
//! * dotted global access rooted at the `vtk` namespace object, e.g.
//!   `vtk.Rendering.Core.vtkActor.newInstance()`;
//! * import statements, either through a path segment such as
//!   `'vtk.js/Sources/Rendering/Core/vtkActor'` or through the identifier
//!   the statement binds (`import vtkActor from '.../Actor'`).
//!
//! Any other mention (comments, bare usages of a name that was never
//! imported) is ignored.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Returns true when `name` has the shape `vtk` + uppercase letter + alphanumerics.
pub fn is_module_name(name: &str) -> bool {
    let Some(rest) = name.strip_prefix("vtk") else {
        return false;
    };
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric())
}

/// Namespace area a reference was found under, when the reference form reveals it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleRef {
    pub name: String,
    /// Byte offset of the first character of the name.
    pub offset: usize,
    /// First namespace segment below the root, e.g. `Filters` or `IO`.
    pub area: Option<String>,
}

/// All distinct module names referenced by `code`, in first-occurrence order.
pub fn extract_modules(code: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in scan_references(code) {
        if !out.contains(&r.name) {
            out.push(r.name);
        }
    }
    out
}

/// Every recognised reference, sorted by offset. Repeated names are kept.
pub fn scan_references(code: &str) -> Vec<ModuleRef> {
    let bytes = code.as_bytes();
    let mut refs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if is_ident_start(b) && (i == 0 || !is_ident_byte(bytes[i - 1])) {
            let end = ident_end(bytes, i);
            let word = &code[i..end];
            if word == "import" {
                if let Some(next) = scan_import(code, end, &mut refs) {
                    i = next;
                    continue;
                }
            } else if word == "require" {
                if let Some((start, stop)) = call_string_arg(bytes, end) {
                    push_path_refs(code, start, stop, &mut refs);
                    i = stop;
                    continue;
                }
            } else if is_module_name(word) {
                if let Some(area) = dotted_vtk_root(code, i) {
                    refs.push(ModuleRef {
                        name: word.to_string(),
                        offset: i,
                        area,
                    });
                }
            }
            i = end;
            continue;
        }
        i += 1;
    }
    refs.sort_by_key(|r| r.offset);
    refs
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$'
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

fn ident_end(bytes: &[u8], start: usize) -> usize {
    let mut j = start;
    while j < bytes.len() && is_ident_byte(bytes[j]) {
        j += 1;
    }
    j
}

fn skip_ws(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn skip_ws_back(bytes: &[u8], mut i: usize) -> usize {
    while i > 0 && bytes[i - 1].is_ascii_whitespace() {
        i -= 1;
    }
    i
}

/// Walks backwards over `Ident.` segments from the identifier at `start`.
/// Returns `Some(area)` when one of the segments is the bare `vtk` object.
fn dotted_vtk_root(code: &str, start: usize) -> Option<Option<String>> {
    let bytes = code.as_bytes();
    let mut segments: Vec<&str> = Vec::new();
    let mut pos = start;
    loop {
        let before = skip_ws_back(bytes, pos);
        if before == 0 || bytes[before - 1] != b'.' {
            break;
        }
        let seg_end = skip_ws_back(bytes, before - 1);
        let mut seg_start = seg_end;
        while seg_start > 0 && is_ident_byte(bytes[seg_start - 1]) {
            seg_start -= 1;
        }
        if seg_start == seg_end {
            break;
        }
        segments.push(&code[seg_start..seg_end]);
        pos = seg_start;
    }
    // segments are innermost-first; the root is last
    let root_idx = segments.iter().position(|s| *s == "vtk")?;
    let area = if root_idx > 0 {
        Some(segments[root_idx - 1].to_string())
    } else {
        None
    };
    Some(area)
}

/// Scans one import statement beginning right after the `import` keyword.
/// Returns the offset to resume scanning from.
fn scan_import(code: &str, after_kw: usize, refs: &mut Vec<ModuleRef>) -> Option<usize> {
    let bytes = code.as_bytes();
    let mut i = skip_ws(bytes, after_kw);
    if i >= bytes.len() {
        return None;
    }
    // import('path') or import 'path'
    if bytes[i] == b'(' {
        let (s, e) = call_string_arg(bytes, after_kw)?;
        push_path_refs(code, s, e, refs);
        return Some(e);
    }
    if is_quote(bytes[i]) {
        let (s, e) = string_body(bytes, i)?;
        push_path_refs(code, s, e, refs);
        return Some(e);
    }

    let mut bound: Vec<(usize, usize)> = Vec::new();
    loop {
        i = skip_ws(bytes, i);
        if i >= bytes.len() {
            return None;
        }
        match bytes[i] {
            b'{' => {
                let close = code[i..].find('}')? + i;
                collect_specifiers(code, i + 1, close, &mut bound);
                i = close + 1;
            }
            b'*' => {
                let mut j = skip_ws(bytes, i + 1);
                let end = ident_end(bytes, j);
                if &code[j..end] != "as" {
                    return None;
                }
                j = skip_ws(bytes, end);
                let alias_end = ident_end(bytes, j);
                if alias_end == j {
                    return None;
                }
                bound.push((j, alias_end));
                i = alias_end;
            }
            b',' => i += 1,
            b if is_ident_start(b) => {
                let end = ident_end(bytes, i);
                if &code[i..end] == "from" {
                    let q = skip_ws(bytes, end);
                    if q < bytes.len() && is_quote(bytes[q]) {
                        let (s, e) = string_body(bytes, q)?;
                        for (bs, be) in bound {
                            let name = &code[bs..be];
                            if is_module_name(name) {
                                refs.push(ModuleRef {
                                    name: name.to_string(),
                                    offset: bs,
                                    area: path_area(&code[s..e]),
                                });
                            }
                        }
                        push_path_refs(code, s, e, refs);
                        return Some(e);
                    }
                    return None;
                }
                bound.push((i, end));
                i = end;
            }
            _ => return None,
        }
    }
}

/// `a`, `a as b` entries between braces; the bound name is the alias when present.
fn collect_specifiers(code: &str, start: usize, end: usize, bound: &mut Vec<(usize, usize)>) {
    let bytes = code.as_bytes();
    let mut i = start;
    let mut last: Option<(usize, usize)> = None;
    let mut saw_as = false;
    while i < end {
        let b = bytes[i];
        if is_ident_start(b) {
            let e = ident_end(bytes, i).min(end);
            if &code[i..e] == "as" && last.is_some() {
                saw_as = true;
            } else if saw_as {
                last = Some((i, e));
                saw_as = false;
            } else {
                if let Some(prev) = last.take() {
                    bound.push(prev);
                }
                last = Some((i, e));
            }
            i = e;
        } else {
            if b == b',' {
                if let Some(prev) = last.take() {
                    bound.push(prev);
                }
                saw_as = false;
            }
            i += 1;
        }
    }
    if let Some(prev) = last {
        bound.push(prev);
    }
}

fn is_quote(b: u8) -> bool {
    b == b'\'' || b == b'"' || b == b'`'
}

/// Body range of the string literal whose opening quote is at `open`.
fn string_body(bytes: &[u8], open: usize) -> Option<(usize, usize)> {
    let q = bytes[open];
    let mut j = open + 1;
    while j < bytes.len() {
        if bytes[j] == b'\\' {
            j += 2;
            continue;
        }
        if bytes[j] == q {
            return Some((open + 1, j));
        }
        if bytes[j] == b'\n' && q != b'`' {
            return None;
        }
        j += 1;
    }
    None
}

/// `( 'literal' ...` right after a callee name.
fn call_string_arg(bytes: &[u8], after: usize) -> Option<(usize, usize)> {
    let i = skip_ws(bytes, after);
    if i >= bytes.len() || bytes[i] != b'(' {
        return None;
    }
    let q = skip_ws(bytes, i + 1);
    if q >= bytes.len() || !is_quote(bytes[q]) {
        return None;
    }
    string_body(bytes, q)
}

fn push_path_refs(code: &str, start: usize, end: usize, refs: &mut Vec<ModuleRef>) {
    let path = &code[start..end];
    let mut offset = start;
    for seg in path.split('/') {
        let name = seg.strip_suffix(".js").unwrap_or(seg);
        if is_module_name(name) {
            refs.push(ModuleRef {
                name: name.to_string(),
                offset,
                area: path_area(path),
            });
        }
        offset += seg.len() + 1;
    }
}

/// The namespace area of an import path: the segment after `Sources` or after
/// the package name.
fn path_area(path: &str) -> Option<String> {
    let segs: Vec<&str> = path.split('/').collect();
    let pkg = segs
        .iter()
        .position(|s| *s == "Sources")
        .or_else(|| segs.iter().position(|s| *s == "vtk.js"))?;
    segs.get(pkg + 1)
        .filter(|s| !s.is_empty() && !s.starts_with("vtk"))
        .map(|s| s.to_string())
}
