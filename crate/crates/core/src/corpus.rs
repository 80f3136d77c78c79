//! Validated corpus entries and the module → entry index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::modules::{extract_modules, is_module_name, scan_references};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Io,
    Filter,
    Rendering,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Io => "io",
            Category::Filter => "filter",
            Category::Rendering => "rendering",
        }
    }

    /// Best guess from the namespaces the code pulls modules from.
    pub fn infer(code: &str) -> Category {
        let refs = scan_references(code);
        let in_area = |a: &str| refs.iter().any(|r| r.area.as_deref() == Some(a));
        if in_area("Filters") {
            Category::Filter
        } else if in_area("IO")
            || refs
                .iter()
                .any(|r| r.name.ends_with("Reader") || r.name.ends_with("Writer"))
        {
            Category::Io
        } else {
            Category::Rendering
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "io" => Ok(Category::Io),
            "filter" => Ok(Category::Filter),
            "rendering" => Ok(Category::Rendering),
            other => Err(other.to_string()),
        }
    }
}

/// Contents of an optional `meta.json`. Unknown keys are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntryMeta {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default)]
    pub modules: Option<Vec<String>>,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub source_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub title: String,
    pub category: Category,
    pub description: String,
    pub code: String,
    pub modules: Vec<String>,
    pub source_path: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
    #[error("meta.json of `{id}` lists modules {meta:?} but the code references {extracted:?}")]
    MetaMismatch {
        id: String,
        meta: Vec<String>,
        extracted: Vec<String>,
    },
    #[error("invalid entry `{id}`: {reason}")]
    InvalidEntry { id: String, reason: String },
}

impl CorpusEntry {
    /// Builds an entry from the raw files of one example directory.
    ///
    /// The module list always comes from scanning `code`; a meta file may only
    /// confirm it (same set of names), otherwise `MetaMismatch` is returned.
    pub fn from_parts(
        id: &str,
        code: String,
        description: String,
        meta: Option<EntryMeta>,
    ) -> Result<Self, CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidEntry {
            id: id.to_string(),
            reason: reason.to_string(),
        };
        if id.is_empty() {
            return Err(invalid("empty id"));
        }
        let meta = meta.unwrap_or_default();
        if let Some(meta_id) = &meta.id {
            if meta_id != id {
                return Err(invalid("meta.json id differs from the directory name"));
            }
        }
        let extracted = extract_modules(&code);
        if let Some(listed) = &meta.modules {
            if let Some(bad) = listed.iter().find(|m| !is_module_name(m)) {
                return Err(CorpusError::InvalidEntry {
                    id: id.to_string(),
                    reason: alloc::format!("meta.json module `{bad}` is not a vtk.js module name"),
                });
            }
            let a: BTreeSet<&str> = listed.iter().map(String::as_str).collect();
            let b: BTreeSet<&str> = extracted.iter().map(String::as_str).collect();
            if a != b {
                return Err(CorpusError::MetaMismatch {
                    id: id.to_string(),
                    meta: listed.clone(),
                    extracted,
                });
            }
        }
        let category = meta.category.unwrap_or_else(|| Category::infer(&code));
        Ok(CorpusEntry {
            id: id.to_string(),
            title: meta.title.unwrap_or_else(|| id.to_string()),
            category,
            description,
            code,
            modules: extracted,
            source_path: id.to_string(),
            tags: meta.tags,
        })
    }

    /// Checks the entry invariants, including index consistency with its code.
    pub fn check(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidEntry {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if self.modules != extract_modules(&self.code) {
            return Err(invalid("module list does not match the code"));
        }
        Ok(())
    }
}

/// An immutable set of entries together with the module index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
    module_index: BTreeMap<String, BTreeSet<String>>,
}

impl Corpus {
    pub fn new(entries: Vec<CorpusEntry>) -> Result<Self, CorpusError> {
        let mut module_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for e in &entries {
            e.check()?;
            if !seen.insert(e.id.as_str()) {
                return Err(CorpusError::DuplicateId(e.id.clone()));
            }
            for m in &e.modules {
                module_index
                    .entry(m.clone())
                    .or_default()
                    .insert(e.id.clone());
            }
        }
        Ok(Corpus {
            entries,
            module_index,
        })
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn module_index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.module_index
    }

    /// Ids of the entries referencing `module`; empty for unknown modules.
    pub fn lookup(&self, module: &str) -> BTreeSet<&str> {
        self.module_index
            .get(module)
            .map(|ids| ids.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}
