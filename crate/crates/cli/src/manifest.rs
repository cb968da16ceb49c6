use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const FILE: &str = "manifest.json";

/// Written into every output directory. `args` are the command's own flags
/// with input paths made absolute and the output location removed, so the
/// same manifest replayed into another directory writes the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    /// Effective simulation config, in the key = value format.
    pub config: Option<String>,
    pub topology: Option<String>,
    /// Relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            seed: None,
            config: None,
            topology: None,
            outputs: Vec::new(),
        }
    }

    pub fn save(&mut self, dir: &Path) -> Result<()> {
        self.outputs.push(FILE.into());
        self.outputs.sort();
        phoenix_core::io::results::save_json(&dir.join(FILE), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: RunManifest = phoenix_core::io::results::load_json(path)?;
        Ok(m)
    }

    /// Command line that reproduces this run into `out`.
    pub fn replay_argv(&self, out: &Path) -> Vec<OsString> {
        let mut argv: Vec<OsString> = vec!["phoenix".into(), self.command.clone().into()];
        argv.extend(self.args.iter().map(OsString::from));
        argv.push("--out".into());
        argv.push(out.into());
        argv
    }
}

/// Flags after the subcommand name, minus `--out`/`--out-root`, with the
/// values of path-valued flags made absolute.
pub fn recorded_args(raw: &[OsString], command: &str, path_flags: &[&str]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let start = raw.iter().position(|a| a == command).context("subcommand not found in arguments")?;
    let mut it = raw[start + 1..].iter();
    while let Some(a) = it.next() {
        let a = a.to_str().context("non UTF-8 argument")?.to_string();
        let (flag, inline) = match a.split_once('=') {
            Some((f, v)) if f.starts_with("--") => (f.to_string(), Some(v.to_string())),
            _ => (a.clone(), None),
        };
        if flag == "--out" || flag == "--out-root" {
            if inline.is_none() {
                it.next();
            }
            continue;
        }
        if path_flags.contains(&flag.as_str()) {
            let v = match inline {
                Some(v) => v,
                None => it.next().and_then(|v| v.to_str()).context("missing flag value")?.to_string(),
            };
            out.push(flag);
            out.push(absolute(Path::new(&v))?.display().to_string());
        } else {
            out.push(a);
        }
    }
    Ok(out)
}

pub fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}
