use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qutrit::{Error, Result};
use tempfile::NamedTempFile;

/// Output files written beside their destinations and published together on success.
///
/// Dropping an uncommitted set deletes every staged file.
#[derive(Default)]
pub struct Outputs {
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stages `bytes` for `path`, or prints them when no path is given.
    pub fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match path {
            Some(p) => self.stage(p, |w| Ok(w.write_all(bytes)?)),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                Ok(out.flush()?)
            }
        }
    }

    pub fn stage<F>(&mut self, path: &Path, write: F) -> Result<()>
    where
        F: FnOnce(&mut NamedTempFile) -> Result<()>,
    {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut file = NamedTempFile::new_in(dir)?;
        write(&mut file)?;
        file.as_file().sync_all()?;
        self.staged.push((file, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (file, path) in self.staged {
            if let Err(e) = file.persist(&path) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::Io(e.error));
            }
            done.push(path);
        }
        Ok(())
    }
}
