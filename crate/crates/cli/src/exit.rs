//! Exit-code classification.

use std::fmt;

use sepcont_core::Error;

pub const EXIT_CERTIFICATE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_RESOURCE,
            message: message.into(),
        }
    }

    pub fn from_core(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::InvalidInput(_) | Error::Domain(_) | Error::UnsupportedStructure(_) => {
                EXIT_CONFIG
            }
            Error::ResourceCap(_) | Error::RefinementExhausted(_) => EXIT_RESOURCE,
            Error::EmptyEnumeration(_)
            | Error::NetMaximality(_)
            | Error::CoverConstruction(_)
            | Error::QuantizerCondition(_)
            | Error::Certificate(_) => EXIT_CERTIFICATE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::resource(format!("cannot write {}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_core(e)
    }
}
