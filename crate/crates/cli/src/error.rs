use entmetrics::Error;

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: DATA,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: NUMERIC,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotMultiple { .. } | Error::InvalidParameter(_) | Error::MissingLabels(_) => USAGE,
        Error::Numeric(_) => NUMERIC,
        _ => DATA,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Attach a location prefix such as a file path to a library error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|e| {
            let code = exit_code(&e);
            CliError {
                code,
                message: format!("{}: {e}", what()),
            }
        })
    }
}
