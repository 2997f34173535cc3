//! Flat dotted-key experiment configuration.
//!
//! A config file holds one `key = value` pair per line; `#` starts a comment.
//! Every key must appear in [`KEYS`]. Missing keys take their registered
//! default when the config is resolved.

use conebook_core::{Error, Result};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Reach,
    Prob,
    Invariants,
    Calabi,
    Qstats,
    Sde,
    Recur,
    CheckAdapted,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Reach,
        Command::Prob,
        Command::Invariants,
        Command::Calabi,
        Command::Qstats,
        Command::Sde,
        Command::Recur,
        Command::CheckAdapted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Reach => "reach",
            Command::Prob => "prob",
            Command::Invariants => "invariants",
            Command::Calabi => "calabi",
            Command::Qstats => "qstats",
            Command::Sde => "sde",
            Command::Recur => "recur",
            Command::CheckAdapted => "check-adapted",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown command '{s}'")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn k(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, default, help }
}

/// Every accepted key, sorted.
pub const KEYS: &[KeySpec] = &[
    k("A.center", "0.2,0.1", "source disk center on page 0 (re,im)"),
    k("A.radius", "0.2", "source disk radius"),
    k("B.center", "image", "target disk/annulus center, or 'image' for the Hopf image of A.center"),
    k("B.inner", "0.1", "annulus inner radius"),
    k("B.kind", "disk", "target set: disk | annulus | grid | page | empty"),
    k("B.outer", "0.3", "annulus outer radius"),
    k("B.path", "", "indicator grid file for B.kind = grid"),
    k("B.radius", "0.3", "target disk radius"),
    k("calabi.n_max", "10", "largest iterate in the growth table"),
    k("calabi.region", "page", "region A: page | half | disk (disk uses A.center, A.radius)"),
    k("calabi.tau_cap", "1000000", "return times above this are reported as non-integrable"),
    k("check.samples", "10000", "sample count per adaptedness flag"),
    k("check.tol", "1e-9", "margin a sample must clear to pass a flag"),
    k("field.alpha0", "0.2", "half-angle of the constant and collared fields"),
    k("field.collar_eps", "0.3", "collar width of the collared field"),
    k("field.kind", "collared", "cone field: hopf | constant | collared | fan | tabulated"),
    k("field.path", "", "table file for field.kind = tabulated"),
    k("invariants.samples", "100000", "Monte Carlo samples for the integrability measures"),
    k("invariants.volume", "contact", "volume form for the mean measure: contact | round"),
    k("measure", "normalized", "page measure: normalized | contact"),
    k("n", "10000", "Monte Carlo path count"),
    k("prob.bound_samples", "20000", "samples for the max integrability measure in the bound"),
    k("prob.mc", "true", "run the trajectory Monte Carlo"),
    k("prob.step_h", "0.001", "trajectory step in the open-book angle"),
    k("recurrence.U.center", "start", "center of the target disk U, or 'start'"),
    k("recurrence.U.radius", "0.2", "radius of the target disk U"),
    k("recurrence.max_returns", "200", "returns observed before a path is censored"),
    k("recurrence.modes", "project,reject", "interior modes to run"),
    k("recurrence.n_paths", "1000", "number of paths"),
    k("recurrence.start", "0.3,0", "start point on page 0 (re,im)"),
    k("sde.drift", "true", "include the drift term"),
    k("sde.horizon", "1", "time horizon"),
    k("sde.mode", "project", "cone interior enforcement: project | reject"),
    k("sde.model", "halfspace", "state space: halfspace | cone"),
    k("sde.mu3", "0.1", "drift coefficient"),
    k("sde.paths", "10000", "number of paths"),
    k("sde.sigma", "1", "volatility: a constant or an expression in r"),
    k("sde.start", "0,0", "start: (x,y) in the half-space model, page point for the cone model"),
    k("sde.start_z", "10", "start height in the half-space model"),
    k("sde.step_h", "0.001", "Euler-Maruyama step"),
    k("section.epsilon", "0.5", "speed perturbation of the perturbed flow"),
    k("section.kind", "reeb_hopf", "section: reeb_hopf | perturbed_flow | trajectory_family"),
    k("section.tilt", "0.5", "tilt factor of the trajectory family"),
    k("seed", "0", "random seed; every stream derives from it"),
    k("svg", "true", "write a figure when the command has one"),
    k("t", "1", "flow time"),
    k("theta", "0.4", "inner angle (full opening), or 'field' for the field's max measure"),
    k("velocity_model", "cap", "trajectory velocity law: cap | disk"),
];

pub fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|s| s.key == key)
}

/// Explicitly set keys; defaults are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Parses one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (key, value) =
            kv.split_once('=').ok_or_else(|| Error::InvalidInput(format!("override '{kv}' is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if spec(key).is_none() {
            return Err(Error::InvalidInput(format!("unknown config key '{key}'")));
        }
        if value.contains('#') || value.contains('\n') {
            return Err(Error::InvalidInput(format!("value of '{key}' may not contain '#' or newlines")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// All keys with defaults filled in.
    pub fn resolve(&self) -> Resolved {
        let values = KEYS
            .iter()
            .map(|s| (s.key.to_string(), self.values.get(s.key).cloned().unwrap_or_else(|| s.default.to_string())))
            .collect();
        Resolved { values }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    /// The echoed form: every key, sorted, one per line.
    pub fn echo(&self, command: Command) -> String {
        let mut out = format!("# command: {command}\n");
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn hash(&self, command: Command) -> String {
        let digest = Sha256::digest(self.echo(command).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("unregistered key {key}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let s = self.str(key);
        let v: f64 = s.parse().map_err(|_| bad(key, s, "a number"))?;
        if !v.is_finite() {
            return Err(bad(key, s, "a finite number"));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let s = self.str(key);
        s.parse().map_err(|_| bad(key, s, "a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let s = self.str(key);
        s.parse().map_err(|_| bad(key, s, "a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            s => Err(bad(key, s, "true or false")),
        }
    }

    pub fn complex(&self, key: &str) -> Result<Complex64> {
        parse_complex(self.str(key)).map_err(|_| bad(key, self.str(key), "a point re,im"))
    }
}

pub fn parse_complex(s: &str) -> std::result::Result<Complex64, ()> {
    let (re, im) = s.split_once(',').ok_or(())?;
    let re: f64 = re.trim().parse().map_err(|_| ())?;
    let im: f64 = im.trim().parse().map_err(|_| ())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(());
    }
    Ok(Complex64::new(re, im))
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::InvalidInput(format!("{key} = '{value}' is not {what}"))
}
