//! Output plumbing: stdout-or-file sink, provenance headers, and
//! deterministic number formatting.
//!
//! CSV and text outputs start with `#`-prefixed provenance lines (command
//! name and resolved configuration). JSON outputs embed the same
//! configuration under a `config` key so the document stays parseable.
//! Nothing here reads the clock or the environment, so identical
//! invocations produce byte-identical output.

use anyhow::Context;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub struct Emitter {
    out: Box<dyn Write>,
    target: String,
}

impl Emitter {
    pub fn create(output: &Option<PathBuf>) -> anyhow::Result<Self> {
        match output {
            Some(path) => {
                let file = File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                Ok(Self {
                    out: Box::new(BufWriter::new(file)),
                    target: path.display().to_string(),
                })
            }
            None => Ok(Self { out: Box::new(std::io::stdout().lock()), target: "stdout".into() }),
        }
    }

    /// `# `-prefixed provenance/warning line (CSV and text formats).
    pub fn comment(&mut self, line: &str) -> anyhow::Result<()> {
        writeln!(self.out, "# {line}").with_context(|| format!("writing {}", self.target))
    }

    /// Command name + resolved configuration header.
    pub fn provenance(&mut self, command: &str, config: &serde_json::Value) -> anyhow::Result<()> {
        self.comment(&format!("nvspin {command}"))?;
        self.comment(&format!("config {config}"))
    }

    pub fn line(&mut self, line: &str) -> anyhow::Result<()> {
        writeln!(self.out, "{line}").with_context(|| format!("writing {}", self.target))
    }

    /// Pretty-printed JSON document plus trailing newline.
    pub fn json(&mut self, doc: &serde_json::Value) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, doc)
            .with_context(|| format!("writing {}", self.target))?;
        writeln!(self.out).with_context(|| format!("writing {}", self.target))
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush().with_context(|| format!("flushing {}", self.target))
    }
}

/// Default float formatting (shortest round-trip decimal).
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// τ₀ with the table's "never flips" sentinel spelling.
pub fn tau0(value: f64) -> String {
    if value.is_infinite() || value >= nvspin_core::observables::TAU0_SENTINEL {
        "1e+10".to_string()
    } else {
        num(value)
    }
}

/// One CSV record from preformatted cells.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}
