//! Optimizer defaults from flags, `BELLOPT_SEED`, and a `key=value` file.
//!
//! Precedence is flag, then environment, then file, then built-in default.

use std::path::Path;

use bellopt::{Execution, OptimizerConfig};
use serde::{Deserialize, Serialize};

use crate::args::RunArgs;
use crate::error::{CliError, CliResult};

pub const CI_STARTS: usize = 1000;
pub const PAPER_STARTS: usize = 10_000;

/// Values read from a config file. Absent keys are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub starts: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub penalty_weight: Option<f64>,
    pub fd_step: Option<f64>,
    pub rank_tol: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ConfigFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {key}: {e}", lineno + 1);
            match key {
                "starts" => cfg.starts = Some(value.parse().map_err(|e| bad(&e))?),
                "tol" => cfg.tol = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => cfg.seed = Some(value.parse().map_err(|e| bad(&e))?),
                "max_iters" => cfg.max_iters = Some(value.parse().map_err(|e| bad(&e))?),
                "penalty_weight" => cfg.penalty_weight = Some(value.parse().map_err(|e| bad(&e))?),
                "fd_step" => cfg.fd_step = Some(value.parse().map_err(|e| bad(&e))?),
                "rank_tol" => cfg.rank_tol = Some(value.parse().map_err(|e| bad(&e))?),
                _ => return Err(format!("line {}: unknown key {key:?}", lineno + 1)),
            }
        }
        Ok(cfg)
    }
}

/// Global switches that affect every optimizer run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub paper_fidelity: bool,
    pub serial: bool,
}

pub fn resolve(file: &ConfigFile, run: &RunArgs, budget: Budget) -> CliResult<OptimizerConfig> {
    let base = OptimizerConfig::default();
    let fidelity = budget.paper_fidelity.then_some(PAPER_STARTS);
    let cfg = OptimizerConfig {
        starts: run.starts.or(fidelity).or(file.starts).unwrap_or(CI_STARTS),
        tol: run.tol.or(file.tol).unwrap_or(base.tol),
        max_iters: run.max_iters.or(file.max_iters).unwrap_or(base.max_iters),
        // clap already folds BELLOPT_SEED into `run.seed`
        seed: run.seed.or(file.seed).unwrap_or(base.seed),
        penalty_weight: file.penalty_weight.unwrap_or(base.penalty_weight),
        fd_step: file.fd_step.unwrap_or(base.fd_step),
        rank_tol: file.rank_tol.unwrap_or(base.rank_tol),
        execution: if budget.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        },
        ..base
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args() -> RunArgs {
        RunArgs {
            starts: None,
            tol: None,
            seed: None,
            max_iters: None,
        }
    }

    #[test]
    fn parses_keys_and_comments() {
        let cfg = ConfigFile::parse("# defaults\nstarts = 50\n\nseed=9 # trailing\ntol = 1e-8\n").unwrap();
        assert_eq!(cfg.starts, Some(50));
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.tol, Some(1e-8));
        assert_eq!(cfg.max_iters, None);
    }

    #[test]
    fn rejects_unknown_keys_and_garbage() {
        assert!(ConfigFile::parse("stars = 5").is_err());
        assert!(ConfigFile::parse("starts 5").is_err());
        assert!(ConfigFile::parse("starts = five").is_err());
    }

    #[test]
    fn precedence() {
        let file = ConfigFile::parse("starts = 50\nseed = 9").unwrap();
        let cfg = resolve(&file, &run_args(), Budget::default()).unwrap();
        assert_eq!((cfg.starts, cfg.seed), (50, 9));

        let cfg = resolve(&file, &run_args(), Budget { paper_fidelity: true, serial: false }).unwrap();
        assert_eq!(cfg.starts, PAPER_STARTS);

        let args = RunArgs {
            starts: Some(7),
            seed: Some(1),
            ..run_args()
        };
        let cfg = resolve(&file, &args, Budget { paper_fidelity: true, serial: true }).unwrap();
        assert_eq!((cfg.starts, cfg.seed), (7, 1));
        assert_eq!(cfg.execution, Execution::Serial);

        let cfg = resolve(&ConfigFile::default(), &run_args(), Budget::default()).unwrap();
        assert_eq!(cfg.starts, CI_STARTS);
    }

    #[test]
    fn zero_starts_is_a_usage_error() {
        let args = RunArgs {
            starts: Some(0),
            ..run_args()
        };
        let err = resolve(&ConfigFile::default(), &args, Budget::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
