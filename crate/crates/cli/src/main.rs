//! `tcmine`: mine temporal constraints from a fact file, apply them back
//! to detect conflicts, and generate synthetic fixtures.
//!
//! Data goes to files, progress and timing to standard error. Exit codes:
//! 0 success, 1 usage or configuration error, 2 I/O error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use tcmine_core::detect::{detect, summarize};
use tcmine_core::fixture::{self, FixtureConfig};
use tcmine_core::ingest::{ingest_path, IngestConfig, IngestReport};
use tcmine_core::io::{read_constraint_records, resolve_constraints, write_conflicts, write_constraints};
use tcmine_core::miner::{mine, MiningConfig};
use tcmine_core::store::KgStore;

#[derive(Parser)]
#[command(
    name = "tcmine",
    version,
    about = "Temporal constraint mining and conflict detection for knowledge graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine constraints from a fact file and write them as JSONL
    Mine(MineArgs),
    /// Apply a constraints file to a fact file and report conflicts
    Detect(DetectArgs),
    /// Generate a synthetic fact file with planted regularities
    GenFixture(GenFixtureArgs),
    /// Ingest a fact file and print its statistics as JSON
    Stats(StatsArgs),
}

/// Options shared by every ingesting subcommand. Values resolve as
/// command-line flag, then config-file entry, then built-in default.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// JSON config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input fact file (TSV, or JSONL by extension)
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Property whose plain facts define entity classes
    #[arg(long)]
    class_property: Option<String>,
    /// Fail when malformed lines exceed the tolerated fraction
    #[arg(long)]
    strict: bool,
    /// Tolerated fraction of malformed lines in strict mode
    #[arg(long)]
    max_malformed_fraction: Option<f64>,
    /// File listing one property per line; facts with other properties are
    /// ignored (the class property is always kept)
    #[arg(long)]
    allow_props: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output constraints file (JSONL)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Minimum support for patterns and candidates
    #[arg(long)]
    theta_freq: Option<u32>,
    /// Confidence needed for outright acceptance
    #[arg(long)]
    theta_accept: Option<f64>,
    /// Confidence floor for attempting class refinement
    #[arg(long)]
    theta_refine: Option<f64>,
    /// Classes tried per slot during refinement
    #[arg(long)]
    max_classes_per_slot: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Constraints file (JSONL) to apply
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Output conflicts file (JSONL)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON path (default: `<out>.summary.json`)
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also report per-constraint counts of suppressed undecidable matches
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct GenFixtureArgs {
    /// JSON config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output fact file (TSV)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path (default: `<out>.manifest.json`)
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Athletes and persons generated per population
    #[arg(long)]
    size: Option<u32>,
    /// Chance of a cross-class interval overlap per athlete
    #[arg(long)]
    coarse_exception_rate: Option<f64>,
    /// Chance of an interval overlap within one team class
    #[arg(long)]
    class_exception_rate: Option<f64>,
    /// Noise facts as a fraction of all facts
    #[arg(long)]
    noise_rate: Option<f64>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the JSON here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config-file entries; all optional, flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FileConfig {
    facts: Option<PathBuf>,
    constraints: Option<PathBuf>,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
    manifest: Option<PathBuf>,
    theta_freq: Option<u32>,
    theta_accept: Option<f64>,
    theta_refine: Option<f64>,
    max_classes_per_slot: Option<usize>,
    class_property: Option<String>,
    strict: Option<bool>,
    max_malformed_fraction: Option<f64>,
    allow_properties: Option<Vec<String>>,
    threads: Option<usize>,
    seed: Option<u64>,
    size: Option<u32>,
    coarse_exception_rate: Option<f64>,
    class_exception_rate: Option<f64>,
    noise_rate: Option<f64>,
}

enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Io(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(msg: impl Into<String>) -> CliError {
    CliError::Io(msg.into())
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let file = File::open(path)
        .map_err(|e| io_err(format!("cannot open config {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

fn ingest_config(common: &CommonArgs, file: &FileConfig) -> Result<IngestConfig, CliError> {
    let allowlist = match (&common.allow_props, &file.allow_properties) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| io_err(format!("cannot read {}: {e}", path.display())))?;
            Some(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
        }
        (None, Some(props)) => Some(props.iter().cloned().collect()),
        (None, None) => None,
    };
    Ok(IngestConfig {
        class_property: Some(
            common
                .class_property
                .clone()
                .or_else(|| file.class_property.clone())
                .unwrap_or_else(|| fixture::CLASS_PROPERTY.to_string()),
        ),
        strict: common.strict || file.strict.unwrap_or(false),
        max_malformed_fraction: common
            .max_malformed_fraction
            .or(file.max_malformed_fraction)
            .unwrap_or(0.0),
        property_allowlist: allowlist,
    })
}

fn report_ingest(report: &IngestReport) {
    eprintln!(
        "[ingest] lines={} temporal={} plain={} duplicates={} malformed={} rejected_intervals={} filtered={}",
        report.lines,
        report.temporal_facts,
        report.plain_facts,
        report.duplicates,
        report.malformed,
        report.rejected_intervals,
        report.filtered,
    );
    for d in &report.diagnostics {
        eprintln!("[ingest] {d}");
    }
}

fn load_store(
    common: &CommonArgs,
    file: &FileConfig,
) -> Result<(KgStore, IngestReport, f64), CliError> {
    let facts = common
        .facts
        .clone()
        .or_else(|| file.facts.clone())
        .ok_or_else(|| usage("--facts is required"))?;
    let cfg = ingest_config(common, file)?;
    let started = Instant::now();
    let (store, report) =
        ingest_path(&facts, &cfg).map_err(|e| io_err(format!("ingest failed: {e}")))?;
    let elapsed = started.elapsed().as_secs_f64();
    report_ingest(&report);
    Ok((store, report, elapsed))
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(threads: usize, f: impl FnOnce() -> T) -> T {
    if threads > 1 {
        eprintln!("[warn] built without the parallel feature; --threads has no effect");
    }
    f()
}

fn create_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    let file = File::create(path)
        .map_err(|e| io_err(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn cmd_mine(args: &MineArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let mining = MiningConfig {
        theta_freq: args.theta_freq.or(file.theta_freq).unwrap_or(20),
        theta_accept: args.theta_accept.or(file.theta_accept).unwrap_or(0.9),
        theta_refine: args.theta_refine.or(file.theta_refine).unwrap_or(0.5),
        max_classes_per_slot: args
            .max_classes_per_slot
            .or(file.max_classes_per_slot)
            .unwrap_or(50),
        ..Default::default()
    };
    mining.validate().map_err(|e| usage(e.to_string()))?;
    let out_path = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| usage("--out is required"))?;
    let threads = args.common.threads.or(file.threads).unwrap_or(0);

    let (store, _report, ingest_secs) = load_store(&args.common, &file)?;
    if store.temporal_facts().is_empty() {
        eprintln!("[warn] no temporal facts ingested; writing an empty constraints file");
    }

    let started = Instant::now();
    let outcome =
        with_threads(threads, || mine(&store, &mining)).map_err(|e| usage(e.to_string()))?;
    let mine_secs = started.elapsed().as_secs_f64();

    let mut out = create_out(&out_path)?;
    write_constraints(&store, &outcome.constraints, &mut out)
        .and_then(|()| out.flush())
        .map_err(|e| io_err(format!("cannot write {}: {e}", out_path.display())))?;

    let s = outcome.stats;
    eprintln!(
        "[mine] patterns={} (shared={} linked={}) candidates={} accepted={} (coarse={} refined={}) refine_attempted={}",
        s.shared_patterns + s.linked_patterns,
        s.shared_patterns,
        s.linked_patterns,
        s.candidates,
        outcome.constraints.len(),
        s.accepted_coarse,
        s.accepted_refined,
        s.refine_attempted,
    );
    eprintln!(
        "[time] ingest {ingest_secs:.2}s | mine {mine_secs:.2}s | total {:.2}s",
        ingest_secs + mine_secs
    );
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let constraints_path = args
        .constraints
        .clone()
        .or_else(|| file.constraints.clone())
        .ok_or_else(|| usage("--constraints is required"))?;
    let out_path = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| usage("--out is required"))?;
    let summary_path = args.summary.clone().or_else(|| file.summary.clone()).unwrap_or_else(|| {
        let mut p = out_path.clone().into_os_string();
        p.push(".summary.json");
        PathBuf::from(p)
    });
    let threads = args.common.threads.or(file.threads).unwrap_or(0);

    let (store, _report, ingest_secs) = load_store(&args.common, &file)?;

    let records_file = File::open(&constraints_path)
        .map_err(|e| io_err(format!("cannot open {}: {e}", constraints_path.display())))?;
    let records = read_constraint_records(BufReader::new(records_file))
        .map_err(|e| io_err(format!("bad constraints file: {e}")))?;
    let (resolved, skipped) = resolve_constraints(&store, &records);
    for (line, reason) in &skipped {
        eprintln!("[warn] constraint {line} skipped: {reason}");
    }
    let line_map: Vec<usize> = resolved.iter().map(|(line, _)| *line).collect();
    let constraints: Vec<_> = resolved.into_iter().map(|(_, c)| c).collect();

    let started = Instant::now();
    let outcome = with_threads(threads, || detect(&store, &constraints));
    let detect_secs = started.elapsed().as_secs_f64();

    let mut out = create_out(&out_path)?;
    write_conflicts(&store, &outcome.reports, Some(&line_map), &mut out)
        .and_then(|()| out.flush())
        .map_err(|e| io_err(format!("cannot write {}: {e}", out_path.display())))?;

    let mut stats = summarize(&store, constraints.len(), &outcome.reports, 10);
    for entry in &mut stats.per_constraint {
        entry.0 = line_map[entry.0];
    }
    let mut summary_out = create_out(&summary_path)?;
    serde_json::to_writer_pretty(&mut summary_out, &stats)
        .map_err(|e| io_err(format!("cannot write {}: {e}", summary_path.display())))?;
    summary_out
        .write_all(b"\n")
        .and_then(|()| summary_out.flush())
        .map_err(|e| io_err(format!("cannot write {}: {e}", summary_path.display())))?;

    if args.verbose {
        for (i, n) in outcome.unknown_matches.iter().enumerate() {
            eprintln!("[detect] constraint {} suppressed_unknown_matches={n}", line_map[i]);
        }
    }
    eprintln!(
        "[detect] constraints={} (skipped={}) conflicts={}",
        constraints.len(),
        skipped.len(),
        outcome.reports.len()
    );
    eprintln!(
        "[time] ingest {ingest_secs:.2}s | detect {detect_secs:.2}s | total {:.2}s",
        ingest_secs + detect_secs
    );
    Ok(())
}

fn cmd_gen_fixture(args: &GenFixtureArgs) -> Result<(), CliError> {
    let file = load_file_config(args.config.as_deref())?;
    let defaults = FixtureConfig::default();
    let config = FixtureConfig {
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        size: args.size.or(file.size).unwrap_or(defaults.size),
        coarse_exception_rate: args
            .coarse_exception_rate
            .or(file.coarse_exception_rate)
            .unwrap_or(defaults.coarse_exception_rate),
        class_exception_rate: args
            .class_exception_rate
            .or(file.class_exception_rate)
            .unwrap_or(defaults.class_exception_rate),
        noise_rate: args.noise_rate.or(file.noise_rate).unwrap_or(defaults.noise_rate),
        ..defaults
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let out_path = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| usage("--out is required"))?;
    let manifest_path = args.manifest.clone().or_else(|| file.manifest.clone()).unwrap_or_else(|| {
        let mut p = out_path.clone().into_os_string();
        p.push(".manifest.json");
        PathBuf::from(p)
    });

    let started = Instant::now();
    let mut out = create_out(&out_path)?;
    let manifest = fixture::generate(&config, &mut out)
        .map_err(|e| io_err(format!("generation failed: {e}")))?;
    out.flush().map_err(|e| io_err(format!("cannot write {}: {e}", out_path.display())))?;

    let mut mout = create_out(&manifest_path)?;
    serde_json::to_writer_pretty(&mut mout, &manifest)
        .map_err(|e| io_err(format!("cannot write {}: {e}", manifest_path.display())))?;
    mout.write_all(b"\n")
        .and_then(|()| mout.flush())
        .map_err(|e| io_err(format!("cannot write {}: {e}", manifest_path.display())))?;

    eprintln!(
        "[gen-fixture] seed={} size={} regularities={} wall={:.2}s",
        config.seed,
        config.size,
        manifest.regularities.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let file = load_file_config(args.common.config.as_deref())?;
    let (store, _report, _secs) = load_store(&args.common, &file)?;
    let stats = store.stats();
    let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    match &args.out {
        Some(path) => {
            let mut out = create_out(path)?;
            out.write_all(json.as_bytes())
                .and_then(|()| out.write_all(b"\n"))
                .and_then(|()| out.flush())
                .map_err(|e| io_err(format!("cannot write {}: {e}", path.display())))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    return ExitCode::SUCCESS;
                }
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Detect(args) => cmd_detect(args),
        Command::GenFixture(args) => cmd_gen_fixture(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
