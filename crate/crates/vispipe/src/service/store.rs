//! One JSON document per session, replaced atomically on every write.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use vispipe_core::Session;

use crate::error::{Error, Result};

/// Points inside [`SessionStore::save`] where a test can simulate the
/// process dying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    BeforeTempWrite,
    /// Temp file written and synced, not yet renamed.
    AfterTempWrite,
    AfterRename,
}

pub type CrashHook = Arc<dyn Fn(CrashPoint, &str) -> bool + Send + Sync>;

const TMP_SUFFIX: &str = ".tmp";

#[derive(Clone)]
pub struct SessionStore {
    dir: PathBuf,
    crash: Option<CrashHook>,
}

impl std::fmt::Debug for SessionStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionStore").field("dir", &self.dir).finish_non_exhaustive()
    }
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl SessionStore {
    /// Opens (creating if needed) a store and removes temp files left by an
    /// interrupted write.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        for item in std::fs::read_dir(&dir)? {
            let path = item?.path();
            if path.is_file() && path.to_string_lossy().ends_with(TMP_SUFFIX) {
                std::fs::remove_file(&path)?;
            }
        }
        Ok(SessionStore { dir, crash: None })
    }

    pub fn with_crash_hook(mut self, hook: CrashHook) -> Self {
        self.crash = Some(hook);
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Directory for files derived from a session, such as the generated document.
    pub fn artifact_dir(&self, id: &str) -> PathBuf {
        self.dir.join(id)
    }

    fn crash_at(&self, point: CrashPoint, id: &str) -> Result<()> {
        match &self.crash {
            Some(hook) if hook(point, id) => Err(Error::Storage(format!("simulated crash at {point:?}"))),
            _ => Ok(()),
        }
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.path(id).is_file()
    }

    pub fn load(&self, id: &str) -> Result<Session> {
        let not_found = || Error::NotFound(format!("session `{id}`"));
        if !valid_id(id) {
            return Err(not_found());
        }
        let bytes = match std::fs::read(self.path(id)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(not_found()),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_slice(&bytes).map_err(|e| Error::Storage(format!("session `{id}` is corrupt: {e}")))
    }

    pub fn save(&self, session: &Session) -> Result<()> {
        if !valid_id(&session.id) {
            return Err(Error::Invalid(format!("bad session id `{}`", session.id)));
        }
        let mut bytes = serde_json::to_vec_pretty(session).map_err(|e| Error::Storage(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.path(&session.id);
        let tmp = self.dir.join(format!("{}.json{TMP_SUFFIX}", session.id));
        self.crash_at(CrashPoint::BeforeTempWrite, &session.id)?;
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        self.crash_at(CrashPoint::AfterTempWrite, &session.id)?;
        std::fs::rename(&tmp, &path)?;
        self.crash_at(CrashPoint::AfterRename, &session.id)
    }

    /// All sessions, sorted by id.
    pub fn list(&self) -> Result<Vec<Session>> {
        let mut ids = Vec::new();
        for item in std::fs::read_dir(&self.dir)? {
            let path = item?.path();
            if path.extension().is_some_and(|e| e == "json") && path.is_file() {
                if let Some(id) = path.file_stem().and_then(|s| s.to_str()).filter(|s| valid_id(s)) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        ids.iter().map(|id| self.load(id)).collect()
    }

    pub fn delete(&self, id: &str) -> Result<()> {
        if !self.exists(id) {
            return Err(Error::NotFound(format!("session `{id}`")));
        }
        std::fs::remove_file(self.path(id))?;
        let artifacts = self.artifact_dir(id);
        if artifacts.is_dir() {
            std::fs::remove_dir_all(artifacts)?;
        }
        Ok(())
    }
}
