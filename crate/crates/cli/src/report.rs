//! Command outcome, exit codes and error classes.

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
        }
    }

    fn severity(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Indeterminate => 1,
            Status::Fail => 2,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
            Status::Indeterminate => 2,
        }
    }
}

pub const USAGE_EXIT: i32 = 3;

/// JSON payload plus human-readable diagnostics for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub payload: Map<String, Value>,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    pub fn new(status: Status) -> Self {
        Self {
            status,
            payload: Map::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.payload.insert(key.to_string(), v);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.diagnostics.push(line.into());
    }

    /// Downgrade to `status` unless already worse.
    pub fn demote(&mut self, status: Status) {
        if status.severity() > self.status.severity() {
            self.status = status;
        }
    }

    /// A library error on otherwise well-formed input.
    pub fn failure(err: impl std::fmt::Display) -> Self {
        let msg = err.to_string();
        let mut o = Outcome::new(Status::Fail).with("error", &msg);
        o.note(msg);
        o
    }
}

/// Errors that abort a command before any result exists.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable/malformed input files (exit 3).
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult = Result<Outcome, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demotion_order() {
        let mut o = Outcome::new(Status::Ok);
        o.demote(Status::Indeterminate);
        assert_eq!(o.status, Status::Indeterminate);
        o.demote(Status::Ok);
        assert_eq!(o.status, Status::Indeterminate);
        o.demote(Status::Fail);
        o.demote(Status::Indeterminate);
        assert_eq!(o.status, Status::Fail);
        assert_eq!(
            [Status::Ok, Status::Fail, Status::Indeterminate].map(Status::exit_code),
            [0, 1, 2]
        );
    }
}
