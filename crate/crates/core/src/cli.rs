//! Command-line entry point.
//!
//! Output layout under the configured output directory:
//!
//! ```text
//! config.toml                         effective configuration of the last run
//! corpus/segments.txt                 segments separated by blank lines
//! corpus/index.csv                    index,level,start_col
//! rules/<template>.rules              extracted rule sets (JSON)
//! logs/explore-<template>.jsonl       one attempt record per line
//! logs/baseline-<template>.jsonl
//! levels/<template>/<cell>_s<seed>.txt
//! levels/baseline-<template>/<cell>_s<seed>.txt
//! reports/{attempts,histogram,interestingness,tilefreq}.csv
//! ```

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::config::RunConfig;
use crate::corpus::{build_corpus, parse_level, read_level_dir, Corpus, TileCatalog, TileGrid};
use crate::error::{Error, Result};
use crate::explorer::{
    coverage, explore_parallel, init_state, level_file_name, random_baseline, read_log, AttemptRecord, Outcome,
    SatGenerator,
};
use crate::patterns::{check_grid, extract_rules, load_rules, write_rules, RuleSet, TemplateKind};
use crate::report::{
    attempt_table, attempts_csv, histogram, histogram_csv, interestingness_csv, interestingness_table, tile_frequency,
    tilefreq_csv, Origin,
};
use crate::solver::ExternalSolver;

#[derive(Debug, Parser)]
#[command(name = "tilerange", version, about = "Tile level generation over a density x difficulty grid")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override the config file.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Config file (TOML); built-in defaults when omitted
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exploration budget in seconds
    #[arg(long, global = true, value_name = "SECS")]
    pub budget: Option<f64>,
    /// Per-attempt solver timeout in seconds
    #[arg(long, global = true, value_name = "SECS")]
    pub timeout: Option<f64>,
    /// Pattern template: ring, block2 or nbr-plus
    #[arg(long, global = true)]
    pub template: Option<TemplateKind>,
    /// Concurrent exploration attempts
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut the example levels into segments and save the corpus
    Ingest,
    /// Extract rule sets for one template (or all with --all)
    Extract {
        /// Extract every template
        #[arg(long)]
        all: bool,
    },
    /// Run prioritized exploration of the expressive-range grid
    Explore {
        /// Stop after this many attempts
        #[arg(long, value_name = "N")]
        max_attempts: Option<usize>,
    },
    /// Generate levels without metric constraints
    Baseline {
        /// Number of attempts (config baseline_attempts when omitted)
        #[arg(long, value_name = "N")]
        attempts: Option<usize>,
    },
    /// Write CSV reports from the corpus and attempt logs
    Report {
        /// Attempt logs to include (every logs/explore-*.jsonl when omitted)
        #[arg(long = "log", value_name = "FILE")]
        logs: Vec<PathBuf>,
    },
    /// Check a level file against a rule file
    Check {
        /// Level text file
        level: PathBuf,
        /// Rule file written by extract
        rules: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn effective_config(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.budget {
        cfg.budget_secs = v;
    }
    if let Some(v) = o.timeout {
        cfg.attempt_timeout_secs = v;
    }
    if let Some(v) = o.template {
        cfg.template = v;
    }
    if let Some(v) = o.workers {
        cfg.workers = v;
    }
    if let Some(v) = &o.output {
        cfg.output_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Command::Check { level, rules } = &cli.command {
        return check(level, rules);
    }
    let cfg = effective_config(&cli.overrides)?;
    let catalog = cfg.load_catalog()?;
    cfg.require_levels()?;
    create_dir(&cfg.output_dir)?;
    write_file(&cfg.output_dir.join("config.toml"), &cfg.to_toml()?)?;
    let corpus = load_corpus(&cfg, &catalog)?;
    match cli.command {
        Command::Ingest => ingest(&cfg, &corpus)?,
        Command::Extract { all } => {
            let kinds = if all { TemplateKind::ALL.to_vec() } else { vec![cfg.template] };
            for kind in kinds {
                let rules = extract_rules(&corpus, kind)?;
                save_rules(&cfg, &rules, &catalog)?;
            }
        }
        Command::Explore { max_attempts } => explore_cmd(&cfg, &corpus, max_attempts)?,
        Command::Baseline { attempts } => baseline_cmd(&cfg, &corpus, attempts.unwrap_or(cfg.baseline_attempts))?,
        Command::Report { logs } => report_cmd(&cfg, &corpus, logs)?,
        Command::Check { .. } => unreachable!("handled above"),
    }
    Ok(0)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingPath(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_corpus(cfg: &RunConfig, catalog: &TileCatalog) -> Result<Corpus> {
    let levels = read_level_dir(&cfg.levels_dir)?;
    build_corpus(&levels, catalog, cfg.window_width, cfg.window_height, cfg.stride)
}

fn ingest(cfg: &RunConfig, corpus: &Corpus) -> Result<()> {
    let dir = cfg.output_dir.join("corpus");
    let text: Vec<String> = corpus.segments.iter().map(|s| s.render(&corpus.catalog)).collect();
    write_file(&dir.join("segments.txt"), &text.join("\n"))?;
    let mut index = String::from("index,level,start_col\n");
    for (i, p) in corpus.provenance.iter().enumerate() {
        index.push_str(&format!("{i},{},{}\n", p.level, p.start_col));
    }
    write_file(&dir.join("index.csv"), &index)?;
    write_file(&dir.join("catalog.toml"), &corpus.catalog.to_config())?;
    let distinct = corpus
        .segments
        .iter()
        .flat_map(|s| s.cells().iter().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    println!("{} segments, {} distinct tiles", corpus.len(), distinct);
    Ok(())
}

fn rules_path(cfg: &RunConfig, kind: TemplateKind) -> PathBuf {
    cfg.output_dir.join("rules").join(format!("{}.rules", kind.name()))
}

fn save_rules(cfg: &RunConfig, rules: &RuleSet, catalog: &TileCatalog) -> Result<()> {
    let path = rules_path(cfg, rules.kind);
    write_file(&path, &write_rules(rules, catalog)?)?;
    println!("{}: {} rules -> {}", rules.kind.name(), rules.rule_count(), path.display());
    Ok(())
}

/// Rules from a previous `extract`, or freshly extracted and saved.
fn rules_for(cfg: &RunConfig, corpus: &Corpus) -> Result<RuleSet> {
    let path = rules_path(cfg, cfg.template);
    if path.is_file() {
        let (rules, _) = load_rules(&path)?;
        if rules.kind != cfg.template {
            return Err(Error::TemplateMismatch {
                expected: cfg.template.name().into(),
                found: rules.kind.name().into(),
            });
        }
        return Ok(rules);
    }
    let rules = extract_rules(corpus, cfg.template)?;
    save_rules(cfg, &rules, &corpus.catalog)?;
    Ok(rules)
}

struct LogWriter {
    log: BufWriter<File>,
    levels: PathBuf,
}

impl LogWriter {
    fn create(path: &Path, levels: PathBuf) -> Result<Self> {
        if let Some(parent) = path.parent() {
            create_dir(parent)?;
        }
        create_dir(&levels)?;
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(LogWriter { log: BufWriter::new(file), levels })
    }

    fn write(&mut self, record: &AttemptRecord, name: Option<String>) -> Result<()> {
        let io = |e| Error::io(&self.levels, e);
        writeln!(self.log, "{}", record.to_json_line()?).map_err(io)?;
        self.log.flush().map_err(io)?;
        if let (Some(rows), Some(name)) = (&record.level, name) {
            write_file(&self.levels.join(name), &(rows.join("\n") + "\n"))?;
        }
        Ok(())
    }
}

fn generator<'a>(cfg: &RunConfig, rules: &'a RuleSet, catalog: &'a TileCatalog) -> SatGenerator<'a> {
    let mut gen = SatGenerator::new(cfg.window_width, cfg.window_height, rules, catalog);
    gen.external = cfg.external_solver.as_ref().map(ExternalSolver::new);
    gen
}

fn summarize(log: &[AttemptRecord], cfg: &RunConfig) {
    let count = |o| log.iter().filter(|r| r.outcome == o).count();
    println!(
        "{}: {} attempts, {} successful, {} failed, {} timed out, {} cells covered",
        cfg.template.name(),
        log.len(),
        count(Outcome::Success),
        count(Outcome::Failed),
        count(Outcome::TimedOut),
        coverage(log, &cfg.axes).len()
    );
}

fn explore_cmd(cfg: &RunConfig, corpus: &Corpus, max_attempts: Option<usize>) -> Result<()> {
    let rules = rules_for(cfg, corpus)?;
    let gen = generator(cfg, &rules, &corpus.catalog);
    let mut state = init_state(
        &corpus.segments,
        &corpus.catalog,
        cfg.axes,
        cfg.threshold,
        Duration::from_secs_f64(cfg.budget_secs),
        Duration::from_secs_f64(cfg.attempt_timeout_secs),
        cfg.seed,
    )?;
    state.max_attempts = max_attempts;
    info!("exploring with {}: {} cells start blocklisted", cfg.template.name(), state.blocklist.len());
    let name = cfg.template.name();
    let mut out = LogWriter::create(
        &cfg.output_dir.join("logs").join(format!("explore-{name}.jsonl")),
        cfg.output_dir.join("levels").join(name),
    )?;
    let axes = cfg.axes;
    let log = explore_parallel(&mut state, &gen, &corpus.catalog, cfg.workers, |r| {
        info!("{} {:?} in {:.3}s", r.cell.map(|c| axes.label(c)).unwrap_or_default(), r.outcome, r.elapsed);
        out.write(r, r.cell.map(|c| level_file_name(&axes, c, r.seed)))
    })?;
    summarize(&log, cfg);
    Ok(())
}

fn baseline_cmd(cfg: &RunConfig, corpus: &Corpus, attempts: usize) -> Result<()> {
    let rules = rules_for(cfg, corpus)?;
    let gen = generator(cfg, &rules, &corpus.catalog);
    let name = cfg.template.name();
    let mut out = LogWriter::create(
        &cfg.output_dir.join("logs").join(format!("baseline-{name}.jsonl")),
        cfg.output_dir.join("levels").join(format!("baseline-{name}")),
    )?;
    let axes = cfg.axes;
    let timeout = Some(Duration::from_secs_f64(cfg.attempt_timeout_secs));
    let log = random_baseline(attempts, &gen, &corpus.catalog, &axes, cfg.seed, timeout, |r| {
        let cell = r.cell.map(|c| axes.label(c)).unwrap_or_else(|| "out_of_range".into());
        out.write(r, Some(format!("{cell}_s{}.txt", r.seed)))
    })?;
    summarize(&log, cfg);
    Ok(())
}

fn explore_logs(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = cfg.output_dir.join("logs");
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("explore-") && n.ends_with(".jsonl"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

fn report_cmd(cfg: &RunConfig, corpus: &Corpus, logs: Vec<PathBuf>) -> Result<()> {
    let logs = if logs.is_empty() { explore_logs(cfg)? } else { logs };
    let mut records = Vec::new();
    for path in &logs {
        records.extend(read_log(&read_file(path)?)?);
    }
    let catalog = &corpus.catalog;
    let generated: Vec<TileGrid> =
        records.iter().filter_map(|r| r.grid(catalog)).collect::<Result<Vec<_>>>()?;

    let dir = cfg.output_dir.join("reports");
    write_file(&dir.join("attempts.csv"), &attempts_csv(&attempt_table(&records)))?;
    let initial_hist = histogram(&corpus.segments, catalog, &cfg.axes);
    let generated_hist = histogram(&generated, catalog, &cfg.axes);
    write_file(
        &dir.join("histogram.csv"),
        &histogram_csv(&[(&initial_hist, Origin::Initial), (&generated_hist, Origin::Generated)], &cfg.axes),
    )?;
    let tagged: Vec<(TileGrid, Origin)> = corpus
        .segments
        .iter()
        .map(|g| (g.clone(), Origin::Initial))
        .chain(generated.iter().map(|g| (g.clone(), Origin::Generated)))
        .collect();
    write_file(
        &dir.join("interestingness.csv"),
        &interestingness_csv(&interestingness_table(&tagged, catalog, &cfg.physics)),
    )?;
    let all: Vec<TileGrid> = tagged.into_iter().map(|(g, _)| g).collect();
    write_file(&dir.join("tilefreq.csv"), &tilefreq_csv(&tile_frequency(&all)?, catalog))?;
    println!(
        "reports for {} corpus segments and {} generated levels -> {}",
        corpus.len(),
        generated.len(),
        dir.display()
    );
    Ok(())
}

fn check(level: &Path, rules: &Path) -> Result<i32> {
    let (rules, catalog) = load_rules(rules)?;
    let grid = parse_level(&read_file(level)?, &catalog)?;
    let violations = check_grid(&grid, &rules);
    if violations.is_empty() {
        println!("ok: {} satisfies {} rules", level.display(), rules.kind.name());
        return Ok(0);
    }
    for v in &violations {
        let show = |t| catalog.ch(t).map_or_else(|| "<boundary>".to_string(), |c| c.to_string());
        let observed: String = v.observed.iter().map(|&t| show(t)).collect::<Vec<_>>().join(" ");
        println!("violation at col {}, row {}: input {} group {} saw [{}]", v.col, v.row, show(v.input), v.group, observed);
    }
    println!("{} violations", violations.len());
    Ok(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn help_lists_every_flag() {
        let mut cmd = Cli::command();
        cmd.build();
        let mut all = vec![cmd.clone()];
        all.extend(cmd.get_subcommands().cloned());
        for mut c in all {
            let help = c.render_long_help().to_string();
            for arg in c.get_arguments() {
                if let Some(long) = arg.get_long() {
                    assert!(help.contains(&format!("--{long}")), "{} help lacks --{long}", c.get_name());
                }
            }
        }
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_apply() {
        let cli = Cli::try_parse_from([
            "tilerange", "explore", "--template", "ring", "--budget", "43200", "--timeout", "900", "--seed", "5",
            "--workers", "2",
        ])
        .unwrap();
        let cfg = effective_config(&cli.overrides).unwrap();
        assert_eq!(
            (cfg.template, cfg.budget_secs, cfg.attempt_timeout_secs, cfg.seed, cfg.workers),
            (TemplateKind::Ring, 43_200.0, 900.0, 5, 2)
        );
    }

    #[test]
    fn usage_errors_are_nonzero() {
        assert_eq!(dispatch(["tilerange", "frobnicate"]), 2);
        assert_eq!(dispatch(["tilerange", "explore", "--template", "hexagon"]), 2);
        assert_eq!(dispatch(["tilerange", "--help"]), 0);
    }
}
