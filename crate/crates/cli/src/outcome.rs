use std::path::{Path, PathBuf};
use std::process::ExitCode;

use flagcalc::Error;

#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a check ran but missed its tolerance.
    Tolerance(String),
    /// Exit 2: bad configuration, unknown kernel, unreadable input.
    Config(String),
    /// Exit 3: conditioning, divergence, non-invertible fibers.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Tolerance(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Tolerance(m) | CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonInvertible { .. }
            | Error::FibersNotInvertible(_)
            | Error::Divergent(_)
            | Error::NotSymmetric(_)
            | Error::InsufficientResolution(_) => CliError::Numerical(e.to_string()),
            Error::Parse(_)
            | Error::UnknownKernel(_)
            | Error::InvalidArgument(_)
            | Error::InvalidGrid(_)
            | Error::ZeroLambda
            | Error::LambdaOutOfBand { .. }
            | Error::Io(_)
            | Error::Format(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Output files, held in memory and written together once a command is done.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((PathBuf::from(name), body.into_bytes()));
    }

    pub fn json<S: serde::Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
        body.push('\n');
        self.text(name, body);
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, body: Vec<u8>) {
        self.files.push((PathBuf::from(name), body));
    }

    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
            written.push(p);
        }
        Ok(written)
    }
}
