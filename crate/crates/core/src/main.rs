use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use snconc::config::{Command, Overrides, RunConfig};
use snconc::experiments::{compare_bounds, run_coverage, run_figure, CoverageReport, FigureId, Manifest, Table};
use snconc::processes::run_scenario;
use snconc::Result;

const EXIT_VACUOUS: u8 = 2;

/// Self-normalized confidence bounds: evaluation, figure data, coverage and comparisons.
#[derive(Parser, Debug)]
#[command(name = "snconc", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (a `.manifest.toml` is written next to it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    figure_id: Option<String>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Evaluate one bound on one state; prints a single CSV row.
    Eval,
    /// Produce a figure table.
    Figure,
    /// Monte Carlo coverage of a bound on a scenario.
    Coverage,
    /// Two bounds side by side along one simulated path.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("ERR {} {msg}", e.code());
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        delta: cli.delta,
        lambda: cli.lambda,
        figure_id: cli.figure_id.as_deref().map(str::parse::<FigureId>).transpose()?,
        trials: cli.trials,
        horizon: cli.horizon,
    };
    let command = match cli.command {
        Cmd::Eval => Command::Eval,
        Cmd::Figure => Command::Figure,
        Cmd::Coverage => Command::Coverage,
        Cmd::Compare => Command::Compare,
    };
    let cfg = file.resolve(command, &overrides)?;
    match command {
        Command::Eval => eval(&cfg),
        Command::Figure => figure(&cfg),
        Command::Coverage => coverage(&cfg),
        Command::Compare => compare(&cfg),
    }
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Writes `table` to `out` plus its manifest, or to stdout when no path is given.
fn emit(table: &Table, out: Option<&Path>, cfg: &RunConfig) -> Result<()> {
    match out {
        Some(path) => {
            table.write_csv(path)?;
            Manifest::new(cfg.seed.unwrap_or(0), &cfg.to_toml_string()?, path).write(path)?;
            Ok(())
        }
        None => print(&table.to_csv_string()?),
    }
}

fn eval(cfg: &RunConfig) -> Result<u8> {
    let section = cfg.eval.as_ref().expect("resolved eval config");
    let state = section.state.as_ref().expect("resolved eval state").to_state()?;
    let result = section.bound.evaluate(&state, cfg.effective_delta())?;
    let mut table = Table::new(result.csv_header());
    table.push(result.csv_record());
    print(&table.to_csv_string()?)?;
    Ok(if result.valid { 0 } else { EXIT_VACUOUS })
}

fn figure(cfg: &RunConfig) -> Result<u8> {
    let spec = cfg.figure_spec()?;
    let table = run_figure(&spec)?;
    let out = cfg.figure.as_ref().and_then(|f| f.out.as_deref());
    emit(&table, out, cfg)?;
    Ok(0)
}

fn coverage(cfg: &RunConfig) -> Result<u8> {
    let section = cfg.coverage.as_ref().expect("resolved coverage config");
    let report = run_coverage(
        &section.bound,
        &section.scenario,
        cfg.effective_delta(),
        section.trials.unwrap_or_default(),
        section.horizon.unwrap_or(section.scenario.horizon),
    )?;
    let mut table = Table::new(CoverageReport::csv_header());
    table.push(report.csv_record());
    emit(&table, section.out.as_deref(), cfg)?;
    if section.out.is_some() {
        print(&table.to_csv_string()?)?;
    }
    Ok(0)
}

fn compare(cfg: &RunConfig) -> Result<u8> {
    let section = cfg.compare.as_ref().expect("resolved compare config");
    let run = run_scenario(&section.scenario)?;
    let cmp = compare_bounds(&run.snapshots, &section.left, &section.right, cfg.effective_delta())?;
    emit(&cmp.to_table(), section.out.as_deref(), cfg)?;
    let fmt = |t: Option<u64>| t.map_or_else(|| "none".to_string(), |t| t.to_string());
    let mut summary = format!(
        "left_below_from={}\nright_below_from={}\n",
        fmt(cmp.summary.left_below_from),
        fmt(cmp.summary.right_below_from)
    );
    if let Some([lo, hi]) = section.window {
        let s = cmp.summary_from(lo);
        summary.push_str(&format!(
            "window={lo}..{hi}\nwindow_left_below_fraction={}\nwindow_left_below_from={}\nwindow_right_below_from={}\n",
            snconc::bounds::format_value(cmp.fraction_left_below(lo, hi)),
            fmt(s.left_below_from),
            fmt(s.right_below_from)
        ));
    }
    if section.out.is_some() {
        print(&summary)?;
    } else {
        eprint!("{summary}");
    }
    Ok(0)
}
