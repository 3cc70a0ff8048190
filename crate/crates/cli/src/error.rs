// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::Path;

use verigate::ErrorClass;

pub const EXIT_ANALYSIS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PROTOCOL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(verigate::Error),
    /// Core error tied to an input file.
    InFile(String, verigate::Error),
    Input(String),
    Protocol(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn in_file(path: &Path) -> impl FnOnce(verigate::Error) -> Self + '_ {
        move |e| CliError::InFile(path.display().to_string(), e)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::InFile(_, e) => match e.class() {
                ErrorClass::Input => EXIT_INPUT,
                ErrorClass::Analysis => EXIT_ANALYSIS,
            },
            CliError::Input(_) => EXIT_INPUT,
            CliError::Protocol(_) => EXIT_PROTOCOL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::InFile(path, e) => write!(f, "{path}: {e}"),
            CliError::Input(msg) => f.write_str(msg),
            CliError::Protocol(msg) => write!(f, "protocol violation: {msg}"),
        }
    }
}

impl From<verigate::Error> for CliError {
    fn from(e: verigate::Error) -> Self {
        CliError::Core(e)
    }
}
