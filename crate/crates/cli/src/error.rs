use std::fmt;
use std::path::Path;

use serde_json::json;

use crate::output::SCHEMA_VERSION;

pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_NOINPUT: u8 = 66;
pub const EXIT_CANTCREAT: u8 = 73;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// An input file (config, table, profile) could not be read.
    Unreadable(String),
    /// The config parsed but is not valid.
    Config(String),
    Core(khess_core::Error),
    /// An artifact could not be written.
    Output(String),
}

impl CliError {
    pub fn unreadable(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Unreadable(format!("{}: {e}", path.display()))
    }

    pub fn output(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Output(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        use khess_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Unreadable(_) => EXIT_NOINPUT,
            CliError::Config(_) => EXIT_DOMAIN,
            CliError::Core(E::Numeric(_) | E::Estimation(_)) => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_DOMAIN,
            CliError::Output(_) => EXIT_CANTCREAT,
        }
    }

    pub fn kind(&self) -> &'static str {
        use khess_core::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Unreadable(_) => "unreadable",
            CliError::Config(_) => "config",
            CliError::Core(E::Domain(_)) => "domain",
            CliError::Core(E::Assumption(_)) => "assumption",
            CliError::Core(E::Numeric(_)) => "numeric",
            CliError::Core(E::Estimation(_)) => "estimation",
            CliError::Core(E::Input(_)) => "input",
            CliError::Output(_) => "output",
        }
    }

    /// The one-line JSON record written to stderr.
    pub fn report(&self) -> String {
        let msg = self.to_string().replace('\n', "; ");
        json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": msg },
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Unreadable(m) | CliError::Config(m) | CliError::Output(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<khess_core::Error> for CliError {
    fn from(e: khess_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use khess_core::Error;

    #[test]
    fn codes() {
        assert_eq!(CliError::Core(Error::Numeric("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Estimation("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Domain("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(Error::Assumption("x".into())).exit_code(), 1);
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 64);
        assert_eq!(CliError::Unreadable("x".into()).exit_code(), 66);
    }

    #[test]
    fn report_is_one_json_line() {
        let r = CliError::Config("a\nb".into()).report();
        assert!(!r.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&r).unwrap();
        assert_eq!(v["error"]["kind"], "config");
        assert_eq!(v["error"]["message"], "a; b");
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }
}
