mod settings;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use probe_core::harness::{
    generate_all, load_seeds, mutation_config, read_records, run_campaign, sweep_campaign,
    write_jsonl, CampaignReport, DEFAULT_THRESHOLD, MAX_THRESHOLD, RECORDS_FILE,
};

use settings::Settings;

/// Metamorphic testing of black-box code completion systems.
#[derive(Debug, Parser)]
#[command(name = "completion-probe", version)]
struct Cli {
    /// TOML file with the same keys as the flags
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit prompt variants without querying a backend
    Mutate(Settings),
    /// Run a full campaign and write its report
    Run(Settings),
    /// Count outliers for several thresholds over one set of completions
    Sweep {
        #[command(flatten)]
        settings: Settings,
        /// Comma-separated thresholds
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9")]
        thresholds: Vec<usize>,
    },
    /// Re-render the summary of an earlier run
    Report {
        /// Run directory or records file
        path: PathBuf,
        /// Where to write the re-rendered summary
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

enum Status {
    Clean,
    Outliers,
}

fn settings(flags: Settings, file: Option<&Path>) -> Result<Settings> {
    Ok(match file {
        Some(path) => flags.over(Settings::from_file(path)?),
        None => flags,
    })
}

fn mutate(s: Settings) -> Result<Status> {
    let config = s.campaign()?;
    let (seeds, skipped) = load_seeds(&config)?;
    let variants = generate_all(&seeds, &mutation_config(&config));
    let cases: Vec<_> = variants.iter().flat_map(|v| &v.cases).collect();
    let defects: Vec<_> = variants.iter().flat_map(|v| &v.defects).collect();
    for d in &defects {
        log::warn!("{} {}: {}", d.seed_id, d.scheme, d.reason);
    }
    match &config.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_jsonl(&dir.join("variants.jsonl"), &cases)?;
            write_jsonl(&dir.join("defects.jsonl"), &defects)?;
            write_jsonl(&dir.join("skipped.jsonl"), &skipped)?;
        }
        None => {
            let mut out = io::stdout().lock();
            for case in &cases {
                writeln!(out, "{}", serde_json::to_string(case)?)?;
            }
        }
    }
    eprintln!("{} variants from {} seeds ({} defects)", cases.len(), seeds.len(), defects.len());
    Ok(Status::Clean)
}

fn run(s: Settings) -> Result<Status> {
    let report = run_campaign(&s.campaign()?)?;
    print!("{}", probe_core::harness::render_summary(&report.summary));
    Ok(outliers(report.summary.outliers))
}

fn sweep(s: Settings, thresholds: &[usize]) -> Result<Status> {
    let config = s.campaign()?;
    let table = sweep_campaign(&config, thresholds)?;
    let text = table.render();
    print!("{text}");
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.txt"), &text)?;
    }
    Ok(outliers(table.rows.iter().map(|(_, n)| n).sum()))
}

fn report(path: &Path, out: Option<&Path>) -> Result<Status> {
    let file = if path.is_dir() { path.join(RECORDS_FILE) } else { path.to_path_buf() };
    let records = read_records(&file).with_context(|| format!("reading {}", file.display()))?;
    let threshold = records.first().map_or(DEFAULT_THRESHOLD, |r| r.threshold);
    anyhow::ensure!((1..=MAX_THRESHOLD).contains(&threshold), "records carry threshold {threshold}");
    let report = CampaignReport::from_records(records, threshold);
    print!("{}", probe_core::harness::render_summary(&report.summary));
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(outliers(report.summary.outliers))
}

fn outliers(n: usize) -> Status {
    if n > 0 {
        Status::Outliers
    } else {
        Status::Clean
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let file = cli.config.as_deref();
    let result = match cli.command {
        Command::Mutate(s) => settings(s, file).and_then(mutate),
        Command::Run(s) => settings(s, file).and_then(run),
        Command::Sweep { settings: s, thresholds } => settings(s, file).and_then(|s| sweep(s, &thresholds)),
        Command::Report { path, out } => report(&path, out.as_deref()),
    };
    match result {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Outliers) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
