//! Command-line interface for the quantum image processing toolkit.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad flags or a
//! bad config file), 1 for runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qimp::encode::{frqi_encode, neqr_encode, qpie_encode};
use qimp::pipeline::config::ExperimentConfig;
use qimp::pipeline::{load_pgm, run_experiment, save_edge_pgm};
use qimp::qhed::qhed_large;
use qimp::simcore::StateVector;

#[derive(Parser)]
#[command(
    name = "qimp",
    about = "Quantum image encodings, Hadamard edge detection, and kernel classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Representation {
    Qpie,
    Frqi,
    Neqr,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PGM image into a quantum state and dump the amplitudes as JSON.
    Encode {
        /// Input image (P2 or P5 PGM).
        #[arg(long = "in")]
        input: PathBuf,
        /// Image representation to prepare.
        #[arg(long)]
        repr: Representation,
        /// Output JSON file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect edges with the patched Hadamard detector and save a PGM edge map.
    Edges {
        /// Input image (P2 or P5 PGM).
        #[arg(long = "in")]
        input: PathBuf,
        /// Patch side length.
        #[arg(long, default_value_t = 4)]
        patch: usize,
        /// Relative gradient threshold in (0, 1].
        #[arg(long, default_value_t = 0.25)]
        threshold: f64,
        /// Output PGM file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep accuracy over noise levels per a config file.
    NoiseSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train and evaluate a quantum-kernel SVM per a config file.
    KernelClassify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify edge maps with logistic regression per a config file.
    QhedClassify {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Serialize)]
struct AmplitudeDump {
    repr: String,
    rows: usize,
    cols: usize,
    n_qubits: usize,
    /// Pairs of (real, imaginary) parts, one per basis state.
    amplitudes: Vec<(f64, f64)>,
}

fn dump_state(
    repr: &str,
    rows: usize,
    cols: usize,
    state: &StateVector,
    out: &Path,
) -> qimp::Result<()> {
    let dump = AmplitudeDump {
        repr: repr.into(),
        rows,
        cols,
        n_qubits: state.n_qubits(),
        amplitudes: state.amplitudes().iter().map(|a| (a.re, a.im)).collect(),
    };
    let json = serde_json::to_string_pretty(&dump)
        .map_err(|e| qimp::Error::Format(format!("JSON encoding failed: {e}")))?;
    std::fs::write(out, json)?;
    Ok(())
}

fn run_encode(input: &Path, repr: Representation, out: &Path) -> qimp::Result<()> {
    let img = load_pgm(input)?;
    let (rows, cols) = (img.rows(), img.cols());
    match repr {
        Representation::Qpie => {
            let encoded = qpie_encode(&img)?;
            dump_state("qpie", rows, cols, encoded.state(), out)?;
        }
        Representation::Frqi => {
            let encoded = frqi_encode(&img)?;
            dump_state("frqi", rows, cols, encoded.state(), out)?;
        }
        Representation::Neqr => {
            let encoded = neqr_encode(&img)?;
            dump_state("neqr", rows, cols, encoded.state(), out)?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run_edges(input: &Path, patch: usize, threshold: f64, out: &Path) -> qimp::Result<()> {
    let img = load_pgm(input)?;
    let edges = qhed_large(&img, patch, threshold)?;
    save_edge_pgm(&edges, out)?;
    println!(
        "wrote {} ({} edge pixels of {})",
        out.display(),
        edges.set_count(),
        edges.rows() * edges.cols()
    );
    Ok(())
}

fn run_config_experiment(config: &Path, expected_kind: &str) -> Result<(), (u8, String)> {
    let cfg =
        ExperimentConfig::from_file(config).map_err(|e| (2u8, format!("config error: {e}")))?;
    if cfg.kind_name() != expected_kind {
        return Err((
            2,
            format!(
                "config error: config declares experiment = {}, expected {expected_kind}",
                cfg.kind_name()
            ),
        ));
    }
    let summary = run_experiment(&cfg).map_err(|e| (1u8, format!("runtime error: {e}")))?;
    for line in summary.lines {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<(), (u8, String)> = match &cli.command {
        Command::Encode { input, repr, out } => {
            run_encode(input, *repr, out).map_err(|e| (1, format!("runtime error: {e}")))
        }
        Command::Edges {
            input,
            patch,
            threshold,
            out,
        } => run_edges(input, *patch, *threshold, out)
            .map_err(|e| (1, format!("runtime error: {e}"))),
        Command::NoiseSweep { config } => run_config_experiment(config, "noise-sweep"),
        Command::KernelClassify { config } => run_config_experiment(config, "kernel-classify"),
        Command::QhedClassify { config } => run_config_experiment(config, "qhed-classify"),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}
