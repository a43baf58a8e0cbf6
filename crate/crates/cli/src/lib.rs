//! Command-line front end for `bellopt`: argument parsing, configuration,
//! run records and CSV output.

pub mod args;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod verify;

use std::io::Write;
use std::path::Path;

use bellopt::efficiency::minimize_eta_crit_with;
use bellopt::optimizer::{linear_grid, sweep, SweepAxis};
use bellopt::tolerance::{max_supported_delta_at_resolution, tolerance_at, ToleranceRecords};
use bellopt::{lhv_max, multistart, OptimizationRecord, OptimizerConfig, RankClass};
use clap::Parser;

use crate::args::{Cli, Command, OutputArgs, RunArgs};
use crate::config::{resolve, Budget, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::output::{emit_csv, emit_json, write_csv, Payload, RunRecord, SweepRow};

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 2 on usage errors, 3 on numerical or I/O failure.
pub fn run(argv: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, argv, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    argv: Vec<String>,
    file: ConfigFile,
    budget: Budget,
}

impl Context {
    fn config(&self, run: &RunArgs) -> CliResult<OptimizerConfig> {
        resolve(&self.file, run, self.budget)
    }

    fn record(&self, config: Option<OptimizerConfig>, payload: Payload) -> RunRecord {
        RunRecord::new(self.argv.clone(), config, payload)
    }

    fn finish(&self, config: OptimizerConfig, rows: &[SweepRow], payload: Payload, out: &OutputArgs) -> CliResult<()> {
        if let Some(path) = &out.csv {
            emit_csv(rows, path)?;
        }
        if let Some(path) = &out.out {
            emit_json(&self.record(Some(config), payload), path)?;
        }
        Ok(())
    }
}

fn say(stdout: &mut dyn Write, line: std::fmt::Arguments<'_>) -> CliResult<()> {
    writeln!(stdout, "{line}").map_err(|e| CliError::io("<stdout>", e))
}

fn check_c(c: f64) -> CliResult<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("c must be positive, got {c}")))
    }
}

fn require_ok(records: &[OptimizationRecord]) -> CliResult<()> {
    match records.iter().find(|r| !r.is_ok()) {
        Some(r) => Err(CliError::Numerical(format!(
            "no feasible start for class {} at c={} ({:?})",
            r.class, r.c, r.state
        ))),
        None => Ok(()),
    }
}

fn print_record(stdout: &mut dyn Write, r: &OptimizationRecord) -> CliResult<()> {
    let ranks = r.rank_profile.numerical_ranks;
    say(
        stdout,
        format_args!(
            "c={} ratio={} class={} value={:.9} ranks=({},{},{}) feasible={}/{}",
            r.c,
            r.state.ratio(),
            r.class,
            r.best_value,
            ranks[0],
            ranks[1],
            ranks[2],
            r.n_feasible,
            r.starts
        ),
    )
}

fn execute(cli: Cli, argv: Vec<String>, stdout: &mut dyn Write) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Context {
        argv,
        file,
        budget: Budget {
            paper_fidelity: cli.paper_fidelity,
            serial: cli.serial,
        },
    };

    match cli.command {
        Command::Maximize {
            c,
            class,
            state,
            run,
            output,
        } => {
            check_c(c)?;
            let cfg = ctx.config(&run)?.with_class(class);
            let record = multistart(&cfg, c, &state.spec())?;
            print_record(stdout, &record)?;
            let rows = [SweepRow::from_record(&record)];
            let records = vec![record];
            ctx.finish(cfg, &rows, Payload::Records(records.clone()), &output)?;
            require_ok(&records)
        }
        Command::SweepC {
            grid,
            class,
            state,
            run,
            output,
        } => {
            let cfg = ctx.config(&run)?.with_class(class);
            let grid = linear_grid(grid.from, grid.to, grid.step)?;
            grid.iter().try_for_each(|&c| check_c(c))?;
            let records = sweep(&SweepAxis::C { grid, state: state.spec() }, &cfg)?;
            sweep_output(&ctx, cfg, records, &output, stdout)
        }
        Command::SweepRatio {
            c,
            grid,
            class,
            run,
            output,
        } => {
            check_c(c)?;
            let cfg = ctx.config(&run)?.with_class(class);
            let grid = linear_grid(grid.from, grid.to, grid.step)?;
            let records = sweep(&SweepAxis::Ratio { grid, c }, &cfg)?;
            sweep_output(&ctx, cfg, records, &output, stdout)
        }
        Command::Efficiency {
            c,
            class,
            method,
            state,
            run,
            output,
        } => {
            check_c(c)?;
            let cfg = ctx.config(&run)?.with_class(class);
            let result = minimize_eta_crit_with(c, &state.spec(), &cfg, method.into())?;
            say(
                stdout,
                format_args!(
                    "c={} ratio={} class={} eta_crit={:.9} ich3={:.9} cross_check={}",
                    c,
                    result.state.ratio(),
                    class,
                    result.eta_crit,
                    result.reference_ich_value,
                    result.cross_check.map_or("none".to_string(), |v| format!("{v:.9}"))
                ),
            )?;
            let ok = result.is_ok();
            let rows = [SweepRow::from_efficiency(&result)];
            ctx.finish(cfg, &rows, Payload::Efficiency(vec![result]), &output)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Numerical("no start reached a violating scenario".into()))
            }
        }
        Command::ErrorTolerance {
            c_from,
            c_to,
            c_step,
            delta_resolution,
            delta,
            state,
            run,
            output,
        } => {
            if !(delta_resolution > 0.0) {
                return Err(CliError::Usage("delta resolution must be positive".into()));
            }
            if delta.is_some_and(|d| !(d >= 0.0)) {
                return Err(CliError::Usage("delta must be non-negative".into()));
            }
            let cfg = ctx.config(&run)?;
            let grid = linear_grid(c_from, c_to, c_step)?;
            grid.iter().try_for_each(|&c| check_c(c))?;
            let spec = state.spec();
            let classes = figures::with_projective(RankClass::General);
            let records = figures::records_over_c(&cfg, &grid, &spec, &classes)?;
            let table = ToleranceRecords::from_records(&spec, &records)?;
            let report = match delta {
                Some(d) => tolerance_at(&table, d),
                None => max_supported_delta_at_resolution(&table, delta_resolution),
            };
            say(
                stdout,
                format_args!(
                    "max_delta={:.6} argmax_c={} status={:?}",
                    report.max_supported_delta, report.argmax_c, report.status
                ),
            )?;
            for ((c, d), m) in report.c_grid.iter().zip(&report.differences).zip(&report.violation_margins) {
                say(stdout, format_args!("c={c} difference={d:.9} margin={m:.9}"))?;
            }
            let rows: Vec<SweepRow> = records
                .iter()
                .filter(|r| r.class == RankClass::General)
                .zip(&report.differences)
                .map(|(r, &d)| SweepRow::from_record(r).with_value(d))
                .collect();
            ctx.finish(cfg, &rows, Payload::Tolerance { records, report }, &output)
        }
        Command::LhvBound { c } => {
            check_c(c)?;
            let value = lhv_max(c);
            say(stdout, format_args!("{value:.6}"))
        }
        Command::Verify { c, run, out } => {
            check_c(c)?;
            let cfg = ctx.config(&run)?;
            let checks = verify::oracle_suite(c, &cfg)?;
            for ch in &checks {
                let tag = if ch.passed { "PASS" } else { "FAIL" };
                say(
                    stdout,
                    format_args!("{tag} {} value={:.3e} threshold={:.3e}", ch.name, ch.value, ch.threshold),
                )?;
            }
            let failed = checks.iter().filter(|ch| !ch.passed).count();
            if let Some(path) = &out {
                emit_json(&ctx.record(Some(cfg), Payload::Verify(checks)), path)?;
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("{failed} oracle check(s) failed")))
            }
        }
        Command::Figure {
            id,
            from,
            to,
            step,
            run,
            out,
            record,
        } => {
            let cfg = ctx.config(&run)?;
            let grid = match (from, to, step) {
                (Some(f), Some(t), Some(s)) => linear_grid(f, t, s)?,
                _ => figures::default_grid(id),
            };
            let rows = figures::figure(id, &grid, &cfg)?;
            match &out {
                Some(path) => emit_csv(&rows, path)?,
                None => write_csv(&rows, &mut *stdout).map_err(|e| CliError::Format {
                    path: Path::new("<stdout>").to_path_buf(),
                    message: e.to_string(),
                })?,
            }
            if let Some(path) = &record {
                emit_json(&ctx.record(Some(cfg), Payload::Figure { id, rows }), path)?;
            }
            Ok(())
        }
    }
}

fn sweep_output(
    ctx: &Context,
    cfg: OptimizerConfig,
    records: Vec<OptimizationRecord>,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    for r in &records {
        print_record(stdout, r)?;
    }
    let rows: Vec<SweepRow> = records.iter().map(SweepRow::from_record).collect();
    ctx.finish(cfg, &rows, Payload::Records(records.clone()), output)?;
    require_ok(&records)
}
