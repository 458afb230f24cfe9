use harmonic_channels::error::Error;
use serde::Serialize;

use crate::expr::ParseError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_UNKNOWN_SUBCOMMAND: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    ValidationError,
    NumericalFailure,
    UnknownSubcommand,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Library error variant, when the failure came from the library.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::ValidationError, variant: None, message: msg.into() }
    }

    pub fn unknown_subcommand(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::UnknownSubcommand, variant: None, message: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::ValidationError => EXIT_VALIDATION,
            ErrorKind::NumericalFailure => EXIT_NUMERICAL,
            ErrorKind::UnknownSubcommand => EXIT_UNKNOWN_SUBCOMMAND,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: &'a CliError,
        }
        serde_json::to_string_pretty(&Wrapper { error: self }).unwrap_or_else(|_| self.message.clone())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let debug = format!("{e:?}");
        let variant = debug.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
        let kind = match e {
            Error::NumericalFailure(_) => ErrorKind::NumericalFailure,
            _ => ErrorKind::ValidationError,
        };
        Self { kind, variant: Some(variant), message: e.to_string() }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        Self { kind: ErrorKind::ValidationError, variant: Some("ParseError".into()), message: e.0 }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { kind: ErrorKind::ValidationError, variant: Some("Io".into()), message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self { kind: ErrorKind::ValidationError, variant: Some("Serialization".into()), message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
