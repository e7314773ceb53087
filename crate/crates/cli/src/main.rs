use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use negoteam::experiments::{run_tournament_detailed, TournamentConfig, TranscriptFile};
use negoteam::report::{build_report, load_records_csv, render_report, write_records_csv, Format};

#[derive(Parser)]
#[command(name = "negoteam", version, about = "Team negotiation tournaments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a tournament and write sessions.csv, transcripts/ and report.md.
    Run {
        /// Tournament configuration (JSON). Defaults to the built-in desk setup.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of repetitions per pairing.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the round budget.
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Skip writing per-session transcripts.
        #[arg(long)]
        no_transcripts: bool,
    },
    /// Summarize the sessions.csv of a previous run.
    Report {
        /// Output directory of a run, or a sessions CSV file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: Format,
    },
    /// Replay a transcript and check that the rerun is identical.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed,
            reps,
            max_rounds,
            out,
            no_transcripts,
        } => {
            let mut cfg = match config {
                Some(path) => TournamentConfig::load(&path)?,
                None => TournamentConfig::desk(),
            };
            if let Some(s) = seed {
                cfg.tournament.master_seed = s;
            }
            if let Some(r) = reps {
                cfg.tournament.repetitions = r;
            }
            if let Some(m) = max_rounds {
                cfg.tournament.max_rounds = m;
            }
            run(&cfg, &out, !no_transcripts)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { input, format } => {
            let path = if input.is_dir() {
                input.join("sessions.csv")
            } else {
                input
            };
            let records = load_records_csv(&path)?;
            print!("{}", render_report(&build_report(&records)?, format)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { transcript } => {
            let file = TranscriptFile::load(&transcript)?;
            let rerun = file.replay()?;
            if rerun == file.transcript {
                println!(
                    "identical: {} actions, {}",
                    rerun.actions.len(),
                    if rerun.outcome.is_agreement() {
                        "agreement"
                    } else {
                        "no agreement"
                    }
                );
                Ok(ExitCode::SUCCESS)
            } else {
                let at = rerun
                    .actions
                    .iter()
                    .zip(&file.transcript.actions)
                    .position(|(a, b)| a != b)
                    .unwrap_or(rerun.actions.len().min(file.transcript.actions.len()));
                eprintln!("mismatch: replay diverges at action {at}");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn run(cfg: &TournamentConfig, out: &Path, transcripts: bool) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let runs = run_tournament_detailed(cfg)?;
    let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();

    let csv_path = out.join("sessions.csv");
    let file =
        fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_records_csv(&records, BufWriter::new(file))?;

    if transcripts {
        let scenario = cfg.scenario.resolve()?;
        let dir = out.join("transcripts");
        fs::create_dir_all(&dir)?;
        for run in &runs {
            let tf = TranscriptFile {
                setup: run.setup.clone(),
                scenario: scenario.clone(),
                transcript: run.transcript.clone(),
            };
            let path = dir.join(TranscriptFile::file_name(&run.setup));
            let f =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            serde_json::to_writer(BufWriter::new(f), &tf)?;
        }
    }

    let report = build_report(&records)?;
    let md = render_report(&report, Format::Markdown)?;
    fs::write(out.join("report.md"), &md)?;
    if records.is_empty() {
        bail!("tournament produced no sessions");
    }
    let agreements = records.iter().filter(|r| r.agreement).count();
    println!(
        "{} sessions, {} agreements, written to {}",
        records.len(),
        agreements,
        out.display()
    );
    Ok(())
}
