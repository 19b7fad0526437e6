use std::fmt;
use std::process::ExitCode;

use ris_steer::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e {
                Error::Scenario(_) => "scenario",
                Error::Geometry(_) => "geometry",
                Error::Channel(_) => "channel",
                Error::Optimizer(_) => "optimizer",
                Error::Sweep(_) => "sweep",
                Error::Metrics(_) => "metrics",
                Error::Io(_) => "io",
            },
        }
    }

    pub fn code(&self) -> u8 {
        match self.kind() {
            "usage" => 2,
            "scenario" => 3,
            "geometry" => 4,
            "channel" => 5,
            "optimizer" => 6,
            "sweep" => 7,
            "metrics" => 8,
            _ => 9,
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{self}");
        ExitCode::from(self.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}] exit={}", self.kind(), self.code())?;
        if let CliError::Core(Error::Scenario(e)) = self {
            if let Some(key) = e.key() {
                write!(f, " key={key}")?;
            }
        }
        let msg = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        };
        write!(f, ": {}", msg.replace(['\n', '\r'], " "))
    }
}
