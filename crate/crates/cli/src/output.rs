use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;

use crate::args::Format;

/// Destination of a command's data: a directory of named files, or stdout
/// for the primary table only.
pub struct Output {
    dir: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    pub fn new(dir: Option<PathBuf>, format: Format) -> anyhow::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Output { dir, format })
    }

    pub fn to_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` into the output directory, or to stdout when there is
    /// none and `primary` is set. Secondary files are skipped on stdout.
    pub fn emit(
        &self,
        name: &str,
        primary: bool,
        write: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
    ) -> anyhow::Result<()> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                let file =
                    File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                write(&mut w)?;
                w.flush()?;
            }
            None if primary => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                write(&mut w)?;
                w.flush()?;
            }
            None => {}
        }
        Ok(())
    }

    pub fn emit_json<T: Serialize>(
        &self,
        name: &str,
        primary: bool,
        value: &T,
    ) -> anyhow::Result<()> {
        self.emit(name, primary, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }
}
