//! Loading the example corpus and the ground-truth cases from disk.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use vispipe_core::corpus::{Category, Corpus, CorpusEntry, CorpusError, EntryMeta};
use vispipe_core::GroundTruthCase;

pub const CODE_FILE: &str = "code.html";
pub const DESCRIPTION_FILE: &str = "description.txt";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{dir} is missing {file}")]
    MissingFile { dir: PathBuf, file: &'static str },
    #[error("{path}: {reason}")]
    BadMeta { path: PathBuf, reason: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LoadError {
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::MissingFile { .. } => "MissingFile",
            LoadError::BadMeta { .. } => "MetaParseError",
            LoadError::Corpus(CorpusError::DuplicateId(_)) => "DuplicateId",
            LoadError::Corpus(CorpusError::MetaMismatch { .. }) => "MetaMismatch",
            LoadError::Corpus(CorpusError::InvalidEntry { .. }) => "InvalidEntry",
            LoadError::Io { .. } => "IoError",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LoadError + '_ {
    move |source| LoadError::Io { path: path.to_path_buf(), source }
}

/// Subdirectories of `root`, sorted by name. Hidden directories are skipped.
fn example_dirs(root: &Path) -> Result<Vec<(String, PathBuf)>, LoadError> {
    let mut dirs = Vec::new();
    for item in std::fs::read_dir(root).map_err(io_err(root))? {
        let item = item.map_err(io_err(root))?;
        let path = item.path();
        if !path.is_dir() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            continue;
        };
        if name.starts_with('.') {
            continue;
        }
        dirs.push((name, path));
    }
    dirs.sort();
    Ok(dirs)
}

fn read_required(dir: &Path, file: &'static str) -> Result<String, LoadError> {
    let path = dir.join(file);
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(LoadError::MissingFile {
            dir: dir.to_path_buf(),
            file,
        }),
        Err(e) => Err(LoadError::Io { path, source: e }),
    }
}

fn read_meta(dir: &Path) -> Result<Option<EntryMeta>, LoadError> {
    let path = dir.join(META_FILE);
    match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| LoadError::BadMeta { path, reason: e.to_string() }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(LoadError::Io { path, source: e }),
    }
}

pub fn load_entry(id: &str, dir: &Path) -> Result<CorpusEntry, LoadError> {
    let code = read_required(dir, CODE_FILE)?;
    let description = read_required(dir, DESCRIPTION_FILE)?;
    let meta = read_meta(dir)?;
    let mut entry = CorpusEntry::from_parts(id, code, description, meta)?;
    entry.source_path = dir.display().to_string();
    Ok(entry)
}

/// Reads `<root>/<id>/{code.html, description.txt, meta.json?}` into a corpus.
pub fn load_corpus(root: &Path) -> Result<Corpus, LoadError> {
    let entries = example_dirs(root)?
        .into_iter()
        .map(|(id, dir)| load_entry(&id, &dir))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(entries)?)
}

/// Reads `<root>/<case_id>/{description.txt, code.html}`. A `meta.json` may
/// set the category; otherwise it is inferred from the reference code.
pub fn load_cases(root: &Path) -> Result<Vec<GroundTruthCase>, LoadError> {
    let mut seen = BTreeSet::new();
    let mut cases = Vec::new();
    for (id, dir) in example_dirs(root)? {
        let description = read_required(&dir, DESCRIPTION_FILE)?;
        let reference_code = read_required(&dir, CODE_FILE)?;
        for (text, file) in [(&description, DESCRIPTION_FILE), (&reference_code, CODE_FILE)] {
            if text.trim().is_empty() {
                return Err(CorpusError::InvalidEntry { id: id.clone(), reason: format!("{file} is empty") }.into());
            }
        }
        let category = read_meta(&dir)?
            .and_then(|m| m.category)
            .unwrap_or_else(|| Category::infer(&reference_code));
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id).into());
        }
        cases.push(GroundTruthCase { id, description, reference_code, category });
    }
    Ok(cases)
}
