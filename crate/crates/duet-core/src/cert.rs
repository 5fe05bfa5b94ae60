//! Machine-checkable certificates. Every search emits one; the serialized
//! form is line-oriented between `BEGIN CERT` / `END CERT` fences with a
//! fixed field order, so `parse ∘ serialize` is the identity and repeated
//! runs produce byte-identical output.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Deterministic counters accumulated by a search. Counts are defined
/// shard-wise (each shard runs to its own exit point), so they do not
/// depend on the worker count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub candidates: u64,
    pub prunes: u64,
}

impl SearchStats {
    pub fn merge(&mut self, other: SearchStats) {
        self.candidates += other.candidates;
        self.prunes += other.prunes;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// A witness was found; the payload summarizes it in one line.
    Witness(String),
    /// A value was computed and certified (e.g. a Ramsey-type number).
    Resolved(String),
    /// The search space was exhausted without a witness.
    Exhausted,
    /// The budget ran out before the question was settled.
    Unresolved(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Witness(_) | Outcome::Resolved(_) => 0,
            Outcome::Exhausted | Outcome::Unresolved(_) => 1,
        }
    }

    fn to_line(&self) -> String {
        match self {
            Outcome::Witness(s) if s.is_empty() => "WITNESS".to_string(),
            Outcome::Witness(s) => format!("WITNESS {s}"),
            Outcome::Resolved(s) if s.is_empty() => "RESOLVED".to_string(),
            Outcome::Resolved(s) => format!("RESOLVED {s}"),
            Outcome::Exhausted => "EXHAUSTED".to_string(),
            Outcome::Unresolved(s) if s.is_empty() => "UNRESOLVED".to_string(),
            Outcome::Unresolved(s) => format!("UNRESOLVED {s}"),
        }
    }

    fn from_line(line: &str) -> Result<Self> {
        let (head, rest) = match line.split_once(' ') {
            Some((h, r)) => (h, r.to_string()),
            None => (line, String::new()),
        };
        match head {
            "WITNESS" => Ok(Outcome::Witness(rest)),
            "RESOLVED" => Ok(Outcome::Resolved(rest)),
            "EXHAUSTED" if rest.is_empty() => Ok(Outcome::Exhausted),
            "UNRESOLVED" => Ok(Outcome::Unresolved(rest)),
            _ => Err(Error::input(format!("unknown outcome `{line}`"))),
        }
    }
}

/// The full record of one run: command echo, configuration echo and hash,
/// outcome, witness payload (canonical encodings, one per line), whether
/// the witness was re-validated by the independent checker, statistics,
/// and free-form notes (recorded discrepancies, budget caps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub config_hash: String,
    pub outcome: Outcome,
    pub witness: Vec<String>,
    pub validated: Option<bool>,
    pub stats: Vec<(String, u64)>,
    pub notes: Vec<String>,
}

pub fn config_hash(command: &str, config: &[(String, String)]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    for (k, v) in config {
        hasher.update(b"\n");
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

impl Certificate {
    pub fn new(command: impl Into<String>, config: Vec<(String, String)>, outcome: Outcome) -> Self {
        let command = command.into();
        let hash = config_hash(&command, &config);
        Certificate {
            command,
            config,
            config_hash: hash,
            outcome,
            witness: Vec::new(),
            validated: None,
            stats: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_stat(&mut self, key: impl Into<String>, value: u64) {
        self.stats.push((key.into(), value));
    }

    pub fn push_stats(&mut self, stats: SearchStats) {
        self.push_stat("candidates", stats.candidates);
        self.push_stat("prunes", stats.prunes);
    }

    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn hash_is_consistent(&self) -> bool {
        config_hash(&self.command, &self.config) == self.config_hash
    }

    /// Short outcome label for logs.
    pub fn outcome_label(&self) -> &'static str {
        match self.outcome {
            Outcome::Witness(_) => "WITNESS",
            Outcome::Resolved(_) => "RESOLVED",
            Outcome::Exhausted => "EXHAUSTED",
            Outcome::Unresolved(_) => "UNRESOLVED",
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from("BEGIN CERT\n");
        out.push_str(&format!("command: {}\n", self.command));
        for (k, v) in &self.config {
            out.push_str(&format!("config: {k}={v}\n"));
        }
        out.push_str(&format!("config_hash: {}\n", self.config_hash));
        out.push_str(&format!("outcome: {}\n", self.outcome.to_line()));
        for w in &self.witness {
            out.push_str(&format!("witness: {w}\n"));
        }
        if let Some(v) = self.validated {
            out.push_str(&format!("validated: {}\n", if v { "yes" } else { "no" }));
        }
        for (k, v) in &self.stats {
            out.push_str(&format!("stat: {k}={v}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str("END CERT\n");
        out
    }

    pub fn parse(text: &str) -> Result<Certificate> {
        let mut lines = text.lines().enumerate().peekable();
        match lines.next() {
            Some((_, "BEGIN CERT")) => {}
            Some((i, other)) => {
                return Err(Error::parse(
                    i + 1,
                    1,
                    format!("expected BEGIN CERT fence, got `{other}`"),
                ))
            }
            None => return Err(Error::parse(1, 1, "empty certificate: missing BEGIN CERT fence")),
        }
        let mut command: Option<String> = None;
        let mut config: Vec<(String, String)> = Vec::new();
        let mut config_hash_field: Option<String> = None;
        let mut outcome: Option<Outcome> = None;
        let mut witness: Vec<String> = Vec::new();
        let mut validated: Option<bool> = None;
        let mut stats: Vec<(String, u64)> = Vec::new();
        let mut notes: Vec<String> = Vec::new();
        // field order is fixed; `stage` tracks the last field kind seen
        let mut stage = 0u8;
        let mut closed = false;
        let mut last_line = 1;
        for (i, raw) in lines {
            let lineno = i + 1;
            last_line = lineno;
            if raw == "END CERT" {
                closed = true;
                break;
            }
            let (key, value) = raw.split_once(": ").ok_or_else(|| {
                Error::parse(lineno, 1, format!("expected `key: value`, got `{raw}`"))
            })?;
            let order = match key {
                "command" => 1,
                "config" => 2,
                "config_hash" => 3,
                "outcome" => 4,
                "witness" => 5,
                "validated" => 6,
                "stat" => 7,
                "note" => 8,
                other => {
                    return Err(Error::parse(lineno, 1, format!("unknown field `{other}`")))
                }
            };
            let repeatable = matches!(order, 2 | 5 | 7 | 8);
            if order < stage || (order == stage && !repeatable) {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("field `{key}` out of order"),
                ));
            }
            stage = order;
            match key {
                "command" => command = Some(value.to_string()),
                "config" => {
                    let (k, v) = value.split_once('=').ok_or_else(|| {
                        Error::parse(lineno, 1, format!("config entry `{value}` missing `=`"))
                    })?;
                    config.push((k.to_string(), v.to_string()));
                }
                "config_hash" => config_hash_field = Some(value.to_string()),
                "outcome" => {
                    outcome = Some(
                        Outcome::from_line(value)
                            .map_err(|e| Error::parse(lineno, 1, e.to_string()))?,
                    )
                }
                "witness" => witness.push(value.to_string()),
                "validated" => {
                    validated = Some(match value {
                        "yes" => true,
                        "no" => false,
                        other => {
                            return Err(Error::parse(
                                lineno,
                                1,
                                format!("validated must be yes/no, got `{other}`"),
                            ))
                        }
                    })
                }
                "stat" => {
                    let (k, v) = value.split_once('=').ok_or_else(|| {
                        Error::parse(lineno, 1, format!("stat entry `{value}` missing `=`"))
                    })?;
                    let n: u64 = v.parse().map_err(|_| {
                        Error::parse(lineno, 1, format!("stat value `{v}` is not a number"))
                    })?;
                    stats.push((k.to_string(), n));
                }
                "note" => notes.push(value.to_string()),
                _ => unreachable!(),
            }
        }
        if !closed {
            return Err(Error::parse(last_line + 1, 1, "missing END CERT fence"));
        }
        let command =
            command.ok_or_else(|| Error::parse(last_line, 1, "missing command field"))?;
        let config_hash = config_hash_field
            .ok_or_else(|| Error::parse(last_line, 1, "missing config_hash field"))?;
        let outcome =
            outcome.ok_or_else(|| Error::parse(last_line, 1, "missing outcome field"))?;
        Ok(Certificate {
            command,
            config,
            config_hash,
            outcome,
            witness,
            validated,
            stats,
            notes,
        })
    }
}
