//! CSV rows and JSON run records.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bellopt::efficiency::EfficiencyResult;
use bellopt::tolerance::ToleranceReport;
use bellopt::{OptimizationRecord, OptimizerConfig, RankProfile, StateSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const PARAM_COLUMNS: usize = 16;

/// One line of the shared CSV schema. `None` prints as an empty cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub ratio: f64,
    pub class: String,
    pub value: Option<f64>,
    pub eta_crit: Option<f64>,
    /// Optimizer parameters, at most [`PARAM_COLUMNS`].
    pub params: Vec<f64>,
    pub ranks: Option<[u8; 3]>,
    pub converged: Option<bool>,
    pub seed: Option<u64>,
}

impl SweepRow {
    pub fn bare(c: f64, state: &StateSpec, class: &str) -> Self {
        Self {
            c,
            ratio: state.ratio(),
            class: class.to_string(),
            value: None,
            eta_crit: None,
            params: Vec::new(),
            ranks: None,
            converged: None,
            seed: None,
        }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    fn with_run(mut self, params: &[f64], ranks: &RankProfile, converged: bool, seed: u64) -> Self {
        self.params = params.iter().take(PARAM_COLUMNS).copied().collect();
        self.ranks = Some(ranks.numerical_ranks);
        self.converged = Some(converged);
        self.seed = Some(seed);
        self
    }

    pub fn from_record(r: &OptimizationRecord) -> Self {
        Self::bare(r.c, &r.state, r.class.label())
            .with_value(r.best_value)
            .with_run(&r.best_params.values, &r.rank_profile, r.best_converged && r.is_ok(), r.seed)
    }

    /// `value` is I_CH3 of the optimal scenario at unit efficiency.
    pub fn from_efficiency(r: &EfficiencyResult) -> Self {
        let mut row = Self::bare(r.c, &r.state, r.class.label())
            .with_value(r.reference_ich_value)
            .with_run(&r.params.values, &r.rank_profile, r.is_ok(), r.seed);
        row.eta_crit = r.eta_crit.is_finite().then_some(r.eta_crit);
        row
    }

    fn fields(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
        let mut out = vec![
            format_sig9(self.c),
            format_sig9(self.ratio),
            self.class.clone(),
            num(self.value),
            num(self.eta_crit),
        ];
        out.extend((0..PARAM_COLUMNS).map(|i| num(self.params.get(i).copied())));
        out.extend((0..3).map(|i| self.ranks.map(|r| r[i].to_string()).unwrap_or_default()));
        out.push(self.converged.map(|b| b.to_string()).unwrap_or_default());
        out.push(self.seed.map(|s| s.to_string()).unwrap_or_default());
        out
    }
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["c", "ratio", "class", "value", "eta_crit"].map(String::from).to_vec();
    h.extend((1..=PARAM_COLUMNS).map(|i| format!("p{i:02}")));
    h.extend(["rank0", "rank1", "rank2", "converged", "seed"].map(String::from));
    h
}

/// Nine significant digits, shortest form.
pub fn format_sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(rows, file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Records(Vec<OptimizationRecord>),
    Efficiency(Vec<EfficiencyResult>),
    Tolerance {
        records: Vec<OptimizationRecord>,
        report: ToleranceReport,
    },
    LhvBound {
        c: f64,
        value: f64,
    },
    Verify(Vec<CheckOutcome>),
    Figure {
        id: u8,
        rows: Vec<SweepRow>,
    },
}

impl Payload {
    /// Copy with wall-clock fields zeroed.
    pub fn untimed(&self) -> Payload {
        let mut p = self.clone();
        match &mut p {
            Payload::Records(rs) | Payload::Tolerance { records: rs, .. } => {
                rs.iter_mut().for_each(|r| r.wall_time = 0.0);
            }
            Payload::Efficiency(rs) => rs.iter_mut().for_each(|r| r.wall_time = 0.0),
            Payload::LhvBound { .. } | Payload::Verify(_) | Payload::Figure { .. } => {}
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Arguments as invoked, program name first.
    pub command: Vec<String>,
    pub config: Option<OptimizerConfig>,
    /// Seconds since the Unix epoch; not part of the reproducible content.
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub payload: Payload,
    pub version: String,
}

impl RunRecord {
    pub fn new(command: Vec<String>, config: Option<OptimizerConfig>, payload: Payload) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            command,
            seed: config.map(|c| c.seed),
            config,
            timestamp,
            payload,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Same command, seed and results, ignoring timestamps and wall times.
    pub fn reproduces(&self, other: &RunRecord) -> bool {
        self.command == other.command
            && self.config == other.config
            && self.seed == other.seed
            && self.payload.untimed() == other.payload.untimed()
    }
}

pub fn emit_json(record: &RunRecord, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(record).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn load_json(path: &Path) -> CliResult<RunRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
