use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use sitscreen::seed::derive_seed;
use sitscreen::simlab::{aggregate, run_outcomes, write_replication_csv};
use sitscreen::{apply_rule, augment_with_noise, screen_all_with, Dataset, SliceConfig};

use crate::config::{AugmentArgs, Cli, Command, KeepArg, ScreenArgs, SimulateArgs};
use crate::error::{CliError, Result};
use crate::ingest::ingest_csv;
use crate::report::{to_json, AugmentReport, ScreenReport, SimulateReport, Timing, SCHEMA_VERSION};

/// Stream for the noise columns of `augment-check`, kept apart from the tie
/// seeds derived from the same master seed.
const AUX_STREAM: u64 = u64::MAX;

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Screen(args) => run_screen(args),
        Command::Simulate(args) => run_simulate(args),
        Command::AugmentCheck(args) => run_augment_check(args),
    }
}

fn timing(start: Instant, omit: bool) -> Option<Timing> {
    (!omit).then(|| Timing {
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Screens an in-memory dataset under the given arguments.
pub fn screen_dataset(args: &ScreenArgs, data: &Dataset) -> Result<ScreenReport> {
    let config = args.resolve(data.n(), data.p())?;
    let slice = SliceConfig::new(config.slice_size, config.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let result = screen_all_with(data, &slice, config.sigma)?;
    let active = apply_rule(&result, &config.rule)?;
    Ok(ScreenReport::build(config, data, &result, &active))
}

pub fn screen(args: &ScreenArgs) -> Result<ScreenReport> {
    let ingested = ingest_csv(&args.input, &args.response, args.standardize)?;
    screen_dataset(args, &ingested.dataset)
}

pub fn run_screen(args: &ScreenArgs) -> Result<()> {
    let start = Instant::now();
    let mut report = screen(args)?;
    if let Some(path) = &args.plot_data {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        report
            .write_plot_data(BufWriter::new(file))
            .map_err(|e| CliError::io(path, e.into()))?;
    }
    report.timing = timing(start, args.no_timing);
    emit(args.output.as_deref(), &to_json(&report)?)
}

pub fn simulate(args: &SimulateArgs) -> Result<SimulateReport> {
    let config = args.resolve()?;
    let outcomes = run_outcomes(&config)?;
    if let Some(path) = &args.replications_csv {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        write_replication_csv(BufWriter::new(file), &outcomes)
            .map_err(|e| CliError::io(path, e))?;
    }
    Ok(SimulateReport {
        schema_version: SCHEMA_VERSION,
        report: aggregate(&config, &outcomes),
        timing: None,
    })
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let mut report = simulate(args)?;
    report.timing = timing(start, args.no_timing);
    emit(args.output.as_deref(), &to_json(&report)?)
}

pub fn augment_check(args: &AugmentArgs) -> Result<AugmentReport> {
    let screen = &args.screen;
    let ingested = ingest_csv(&screen.input, &screen.response, screen.standardize)?;
    augment_dataset(args, &ingested.dataset)
}

/// Screens `data`, keeps the selected (or all) columns, fills up with noise
/// columns and screens again.
pub fn augment_dataset(args: &AugmentArgs, data: &Dataset) -> Result<AugmentReport> {
    let original = screen_dataset(&args.screen, data)?;
    let kept: Vec<usize> = match args.keep {
        KeepArg::Selected => original.selected(),
        KeepArg::All => (0..data.p()).collect(),
    };
    let num_aux = args.num_aux.unwrap_or(data.p() - kept.len());
    if kept.len() + num_aux == 0 {
        return Err(CliError::Config(
            "augmented data would have no covariates; pass --num-aux".into(),
        ));
    }
    let aug = augment_with_noise(
        data,
        &kept,
        num_aux,
        derive_seed(args.screen.seed, AUX_STREAM),
    )?;
    let augmented = screen_dataset(&args.screen, &aug)?;
    let again = augmented.selected();
    let overlap: Vec<usize> = again
        .iter()
        .filter(|&&j| j < kept.len())
        .map(|&j| kept[j])
        .collect();
    let first = original.selected();
    let retained = first.iter().all(|k| overlap.contains(k));
    Ok(AugmentReport {
        schema_version: SCHEMA_VERSION,
        keep: args.keep,
        num_aux,
        kept,
        original,
        augmented,
        overlap,
        retained,
        timing: None,
    })
}

pub fn run_augment_check(args: &AugmentArgs) -> Result<()> {
    let start = Instant::now();
    let mut report = augment_check(args)?;
    report.timing = timing(start, args.screen.no_timing);
    emit(args.screen.output.as_deref(), &to_json(&report)?)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
