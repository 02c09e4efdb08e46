//! The `scri-solve` driver: configuration, experiment runners and
//! artifact output, kept in the library so they can be tested directly.

pub mod config;
pub mod experiments;
pub mod output;

use crate::error::Error;
use config::{Experiment, ExperimentConfig, RawConfig};
use experiments::Artifact;
use std::path::{Path, PathBuf};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Config(Error),
    #[error("{0}")]
    Solve(Error),
    #[error("{0}")]
    Io(Error),
    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solve(_) => 3,
            CliError::CheckFailed { .. } => 4,
        }
    }
}

/// Command-line overrides, applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<String>,
    pub kappa: Option<String>,
    pub m: Option<String>,
    pub nrho: Option<String>,
    pub ntheta: Option<String>,
    pub medium: Option<String>,
    pub route: Option<String>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig) {
        let pairs = [
            ("k", &self.k),
            ("kappa", &self.kappa),
            ("m", &self.m),
            ("nrho", &self.nrho),
            ("ntheta", &self.ntheta),
            ("medium", &self.medium),
            ("route", &self.route),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                raw.set(key, v.clone());
            }
        }
        if let Some(out) = &self.out {
            raw.set("out", out.display().to_string());
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub artifact: Artifact,
    pub files: Vec<PathBuf>,
}

/// Loads, overrides, resolves, runs and writes. With `check` set, any
/// failed check turns into [`CliError::CheckFailed`] after the artifacts
/// are on disk.
pub fn run_cli(experiment: Experiment, config_path: &Path, overrides: &Overrides, check: bool) -> Result<Outcome, CliError> {
    let mut raw = RawConfig::load(config_path).map_err(CliError::Config)?;
    overrides.apply(&mut raw);
    let config = ExperimentConfig::resolve(experiment, &raw).map_err(CliError::Config)?;
    log::info!("running {} into {}", experiment, config.out.display());
    let artifact = experiments::run(&config).map_err(|e| match e {
        Error::Config(_) => CliError::Config(e),
        e => CliError::Solve(e),
    })?;
    let files = output::write_artifacts(&config, &raw, &artifact).map_err(CliError::Io)?;
    for c in &artifact.checks {
        log::info!("{}", c.line());
    }
    let failed = artifact.failed_checks().len();
    if check && failed > 0 {
        for c in artifact.failed_checks() {
            eprintln!("{}", c.line());
        }
        return Err(CliError::CheckFailed { failed });
    }
    Ok(Outcome { config, artifact, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(Error::Config("x".into())).exit_code(), 2);
        assert_eq!(CliError::Io(Error::Io { path: "p".into(), message: "m".into() }).exit_code(), 2);
        let solve = Error::Solve { reason: "singular".into(), condition: f64::INFINITY };
        assert_eq!(CliError::Solve(solve).exit_code(), 3);
        assert_eq!(CliError::CheckFailed { failed: 1 }.exit_code(), 4);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut raw = RawConfig::parse("k = 1\nm = 0\n").unwrap();
        let o = Overrides { k: Some("2.5".into()), out: Some(PathBuf::from("x")), ..Default::default() };
        o.apply(&mut raw);
        assert_eq!(raw.0["k"], "2.5");
        assert_eq!(raw.0["m"], "0");
        assert_eq!(raw.0["out"], "x");
    }
}
