//! Batch front-end for the `conebook` experiments.

pub mod commands;
pub mod config;
pub mod conventions;
pub mod svg;
pub mod table;

use crate::config::{Command, Config};
use crate::table::{document, exit_status, write_atomic, Metadata};
use conebook_core::{Error, Result};
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = concat!("conebook ", env!("CARGO_PKG_VERSION"));

/// A parsed invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Invocation {
    /// File config, then `--set` overrides in order, then `--seed`.
    pub fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config_file {
            Some(p) => Config::parse(&std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?)?,
            None => Config::default(),
        };
        for kv in &self.overrides {
            cfg.apply_override(kv)?;
        }
        if let Some(seed) = self.seed {
            cfg.set("seed", &seed.to_string())?;
        }
        Ok(cfg)
    }

    pub fn prefix(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(self.command.name()))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs an invocation and writes its outputs; returns the exit status.
pub fn execute(inv: &Invocation) -> i32 {
    let prefix = inv.prefix();
    let cfg = match inv.config() {
        Ok(c) => c,
        Err(e) => return fail(&prefix, None, &e),
    };
    let resolved = cfg.resolve();
    let meta = Metadata {
        command: inv.command.name().into(),
        seed: resolved.u64("seed").unwrap_or(0),
        config_hash: resolved.hash(inv.command),
        tool_version: TOOL_VERSION.into(),
        measure: resolved.str("measure").into(),
        conventions: conventions::CONVENTIONS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
    };
    if let Err(e) = write_atomic(&with_suffix(&prefix, ".config"), &resolved.echo(inv.command)) {
        return fail(&prefix, Some(&meta), &e);
    }
    let result = resolved
        .u64("seed")
        .and_then(|_| commands::measure(&resolved))
        .and_then(|_| commands::run(inv.command, &resolved));
    let out = match result {
        Ok(o) => o,
        Err(e) => return fail(&prefix, Some(&meta), &e),
    };
    let written = (|| -> Result<()> {
        for t in &out.tables {
            t.validate()?;
        }
        for (i, t) in out.tables.iter().enumerate() {
            let path = if i == 0 { with_suffix(&prefix, ".csv") } else { with_suffix(&prefix, &format!(".{}.csv", t.name)) };
            write_atomic(&path, &t.to_csv())?;
        }
        write_atomic(&with_suffix(&prefix, ".json"), &document(&meta, &out.tables, None))?;
        if let (Some(fig), true) = (&out.figure, resolved.bool("svg")?) {
            write_atomic(&with_suffix(&prefix, ".svg"), &fig.render())?;
        }
        Ok(())
    })();
    match written {
        Ok(()) => 0,
        Err(e) => fail(&prefix, Some(&meta), &e),
    }
}

fn fail(prefix: &Path, meta: Option<&Metadata>, e: &Error) -> i32 {
    eprintln!("conebook: {e}");
    let meta = meta.cloned().unwrap_or_else(|| Metadata {
        command: String::new(),
        seed: 0,
        config_hash: String::new(),
        tool_version: TOOL_VERSION.into(),
        measure: String::new(),
        conventions: Vec::new(),
    });
    if let Err(w) = write_atomic(&with_suffix(prefix, ".json"), &document(&meta, &[], Some(e))) {
        eprintln!("conebook: could not write the error report: {w}");
    }
    exit_status(e)
}
