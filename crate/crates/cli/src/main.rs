//! `robq`: robustness analysis of quantum circuits against coherent
//! control errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use robq_core::bounds::{self, PartitionStrategy};
use robq_core::circuit::{parse_circuit, Circuit};
use robq_core::gates::NormMode;
use robq_core::presets;
use robq_core::qft;
use robq_core::rng::{SeededRng, SEED_ENV_VAR};
use robq_core::sim::{self, InitialState, MonteCarloCfg, StateVector};
use robq_core::tomography::{validation_sweep, SweepConfig};
use robq_core::vqa::{self, Dataset, EvalMode, TrainConfig};

#[derive(Parser)]
#[command(name = "robq", version, about = "Quantify circuit robustness against coherent control errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Master seed (falls back to ROBQ_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker-thread cap; results are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    PhaseOpt,
}

impl From<ModeArg> for NormMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Raw => NormMode::Raw,
            ModeArg::PhaseOpt => NormMode::PhaseOptimized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PairwiseArg {
    Greedy,
    Dp,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bound report for a circuit.
    Analyze {
        /// Circuit JSON file or preset name.
        circuit: String,
        #[arg(long, default_value_t = 0.05)]
        eps_bar: f64,
        #[arg(long, default_value_t = 0.99)]
        target_fidelity: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Raw)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = PairwiseArg::Dp)]
        pairwise: PairwiseArg,
        /// Emit JSON instead of the plain-text table.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo fidelity sampling under coherent control errors.
    Simulate {
        /// Circuit JSON file or preset name.
        circuit: String,
        #[arg(long, default_value_t = 0.2)]
        eps_bar: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Draw a fresh Haar-random initial state per sample.
        #[arg(long, conflicts_with = "psi0")]
        haar: bool,
        /// Basis-state index for a fixed initial state.
        #[arg(long, default_value_t = 0)]
        psi0: usize,
        /// Write per-sample CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rank circuits by Lipschitz bound.
    Compare {
        /// Circuit JSON files or preset names.
        circuits: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        eps_bar: f64,
        #[arg(long, default_value_t = 0.99)]
        target_fidelity: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Raw)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// 3-qubit QFT gate-set robustness comparison.
    QftStudy {
        #[arg(long, default_value_t = 0.05)]
        eps_bar: f64,
        #[arg(long, default_value_t = 40_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulated tomography validation sweep over two hardware-style
    /// circuit realizations.
    ValidationSweep {
        #[arg(long, default_value_t = 16)]
        levels: usize,
        #[arg(long, default_value_t = 80)]
        samples: usize,
        #[arg(long, default_value_t = 20_000)]
        shots: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regularized variational training.
    Vqa {
        /// Run the full 5-lambda x 8-seed study.
        #[arg(long, conflicts_with = "lambda")]
        study: bool,
        /// Train a single model with this regularization weight.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 8)]
        seeds: usize,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0.05)]
        noise_eps: f64,
        /// Estimate expectations from this many shots instead of exactly.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Core(e) => match e {
            robq_core::Error::SchemaError { .. }
            | robq_core::Error::UnknownGate(_)
            | robq_core::Error::BadParamCount { .. }
            | robq_core::Error::QubitOutOfRange { .. }
            | robq_core::Error::TooLarge { .. }
            | robq_core::Error::InvalidArgument(_)
            | robq_core::Error::NotSingleQubit(_)
            | robq_core::Error::BadPartition(_)
            | robq_core::Error::LengthMismatch { .. }
            | robq_core::Error::Io(_) => 2,
            _ => 3,
        },
        CliError::Io(_) => 2,
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(robq_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<robq_core::Error> for CliError {
    fn from(e: robq_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<(), CliError>;

fn resolve_seed(common: &CommonArgs) -> u64 {
    common
        .seed
        .or_else(|| std::env::var(SEED_ENV_VAR).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0)
}

fn setup_threads(common: &CommonArgs) {
    if let Some(n) = common.threads {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Resolve a positional circuit argument: preset name or JSON path.
fn load_circuit(spec: &str, eps_bar: f64) -> Result<(String, Circuit), CliError> {
    let preset = match spec {
        "intro" => Some(presets::intro_u(eps_bar)),
        "intro-prime" => Some(presets::intro_u_prime(eps_bar)),
        "validation-a" => Some(presets::validation_a(eps_bar)),
        "validation-b" => Some(presets::validation_b(eps_bar)),
        _ => None,
    };
    if let Some(c) = preset {
        return Ok((spec.to_string(), c));
    }
    let text = std::fs::read_to_string(spec)?;
    let mut circuit = parse_circuit(&text)?;
    if circuit.noise.eps_bar == 0.0 {
        circuit.noise.eps_bar = eps_bar;
    }
    let id = Path::new(spec)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok((id, circuit))
}

// --- run manifests -------------------------------------------------------

#[derive(Serialize)]
struct ManifestInput {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: Vec<String>,
    master_seed: u64,
    tool_version: &'static str,
    unix_timestamp: u64,
    inputs: Vec<ManifestInput>,
}

fn write_output(
    out: &Path,
    contents: &str,
    master_seed: u64,
    input_paths: &[&str],
) -> CliResult {
    std::fs::write(out, contents)?;
    let inputs = input_paths
        .iter()
        .filter(|p| Path::new(p).exists())
        .map(|p| -> Result<ManifestInput, CliError> {
            let bytes = std::fs::read(p)?;
            Ok(ManifestInput {
                path: p.to_string(),
                sha256: hex(&Sha256::digest(&bytes)),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        command: std::env::args().collect(),
        master_seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        unix_timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        inputs,
    };
    let manifest_path = out.with_extension(format!(
        "{}.manifest.json",
        out.extension().map(|e| e.to_string_lossy()).unwrap_or_default()
    ));
    std::fs::write(
        manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// --- subcommands ---------------------------------------------------------

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Analyze {
            circuit,
            eps_bar,
            target_fidelity,
            mode,
            pairwise,
            json,
            out,
            common,
        } => {
            setup_threads(&common);
            let seed = resolve_seed(&common);
            let (_, c) = load_circuit(&circuit, eps_bar)?;
            let mode = NormMode::from(mode);
            let report = bounds::full_report(&c, eps_bar, target_fidelity, mode)?;
            let rendered = if json { report.to_json() } else { report.to_table() };
            print!("{rendered}");
            if !json {
                // The report table always carries both pairwise values; the
                // flag picks which partition is spelled out.
                let (label, strategy) = match pairwise {
                    PairwiseArg::Greedy => ("greedy", PartitionStrategy::Greedy),
                    PairwiseArg::Dp => ("dp", PartitionStrategy::Dp),
                };
                let chosen = bounds::lipschitz_pairwise(&c, &strategy, mode)?;
                let blocks: Vec<String> = chosen
                    .partition
                    .iter()
                    .map(|b| match b {
                        bounds::Block::Single(i) => format!("[{i}]"),
                        bounds::Block::Pair(i, j) => format!("[{i},{j}]"),
                    })
                    .collect();
                println!("partition ({label})      {}", blocks.join(" "));
            }
            if let Some(out) = out {
                write_output(&out, &report.to_json(), seed, &[circuit.as_str()])?;
            }
            Ok(())
        }
        Command::Simulate {
            circuit,
            eps_bar,
            samples,
            haar,
            psi0,
            out,
            common,
        } => {
            setup_threads(&common);
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let seed_value = resolve_seed(&common);
            let seed = SeededRng::new(seed_value);
            let (id, c) = load_circuit(&circuit, eps_bar)?;
            let initial = if haar {
                InitialState::Haar
            } else {
                InitialState::Fixed(StateVector::basis(c.n_qubits, psi0)?)
            };
            let cfg = MonteCarloCfg {
                eps_bar,
                samples,
                initial,
                experiment_id: 1,
                keep_samples: true,
            };
            let stats = sim::monte_carlo(&c, &cfg, &seed)?;
            println!("circuit        {id}");
            println!("samples        {}", stats.samples);
            println!("eps_bar        {eps_bar}");
            println!("mean fidelity  {:.6}", stats.mean_fidelity);
            println!("std fidelity   {:.6}", stats.std_fidelity);
            println!("min fidelity   {:.6}", stats.min_fidelity);
            if let Some(out) = out {
                let csv = sim::sweep_to_csv(&[eps_bar], std::slice::from_ref(&stats));
                write_output(&out, &csv, seed_value, &[circuit.as_str()])?;
            }
            Ok(())
        }
        Command::Compare {
            circuits,
            eps_bar,
            target_fidelity,
            mode,
            out,
            common,
        } => {
            setup_threads(&common);
            if circuits.len() < 2 {
                return Err(CliError::Usage("compare needs at least two circuits".into()));
            }
            let seed = resolve_seed(&common);
            let mode = NormMode::from(mode);
            let mut rows = Vec::new();
            for spec in &circuits {
                let (id, c) = load_circuit(spec, eps_bar)?;
                let report = bounds::full_report(&c, eps_bar, target_fidelity, mode)?;
                rows.push((id, report));
            }
            rows.sort_by(|a, b| a.1.l_norm.total_cmp(&b.1.l_norm));
            let mut table = format!(
                "{:<16} {:>10} {:>10} {:>12} {:>10}\n",
                "circuit", "L_norm", "L_pair_dp", "fid_bound", "eps_max"
            );
            let mut csv = String::from("circuit,l_norm,l_pair_dp,fidelity_bound,eps_max\n");
            for (id, r) in &rows {
                table.push_str(&format!(
                    "{:<16} {:>10.6} {:>10.6} {:>12.6} {:>10.6}\n",
                    id, r.l_norm, r.l_pair_dp, r.fidelity_bound.value, r.eps_max
                ));
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    id, r.l_norm, r.l_pair_dp, r.fidelity_bound.value, r.eps_max
                ));
            }
            print!("{table}");
            if let Some(out) = out {
                let inputs: Vec<&str> = circuits.iter().map(String::as_str).collect();
                write_output(&out, &csv, seed, &inputs)?;
            }
            Ok(())
        }
        Command::QftStudy {
            eps_bar,
            samples,
            out,
            common,
        } => {
            setup_threads(&common);
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let seed_value = resolve_seed(&common);
            let comparison = qft::compare_variants(eps_bar, samples, &SeededRng::new(seed_value))?;
            print!("{}", comparison.to_table());
            if let Some(out) = out {
                write_output(&out, &comparison.to_csv(), seed_value, &[])?;
            }
            Ok(())
        }
        Command::ValidationSweep {
            levels,
            samples,
            shots,
            out,
            common,
        } => {
            setup_threads(&common);
            if levels < 2 || samples == 0 || shots == 0 {
                return Err(CliError::Usage(
                    "need at least 2 levels, 1 sample and 1 shot".into(),
                ));
            }
            let seed_value = resolve_seed(&common);
            let cfg = SweepConfig {
                levels: sim::equidistant_levels(0.0, 1.0, levels),
                samples,
                shots,
                ..SweepConfig::default()
            };
            let a = presets::validation_a(0.0);
            let b = presets::validation_b(0.0);
            let data = validation_sweep(&[("A", &a), ("B", &b)], &cfg, &SeededRng::new(seed_value))?;
            println!(
                "{:<8} {:>8} {:>10} {:>10} {:>10}",
                "circuit", "eps_bar", "mean_qst", "min_qst", "min_exact"
            );
            for s in &data.summaries {
                println!(
                    "{:<8} {:>8.4} {:>10.4} {:>10.4} {:>10.4}",
                    s.circuit_id, s.eps_bar, s.mean_f_qst, s.min_f_qst, s.min_f_exact
                );
            }
            if let Some(out) = out {
                write_output(&out, &data.to_csv(), seed_value, &[])?;
            }
            Ok(())
        }
        Command::Vqa {
            study,
            lambda,
            seeds,
            iters,
            restarts,
            noise_eps,
            shots,
            out,
            common,
        } => {
            setup_threads(&common);
            if iters == 0 || restarts == 0 || seeds == 0 {
                return Err(CliError::Usage(
                    "iterations, restarts and seeds must be at least 1".into(),
                ));
            }
            let seed_value = resolve_seed(&common);
            let seed = SeededRng::new(seed_value);
            let mode = match shots {
                Some(0) => return Err(CliError::Usage("--shots must be at least 1".into())),
                Some(n) => EvalMode::Shots(n),
                None => EvalMode::Exact,
            };
            let base = TrainConfig {
                lambda: lambda.unwrap_or(0.0),
                iters,
                restarts,
                lr: 0.1,
                noise_eps,
                mode,
            };
            let data = Dataset::default();
            if study {
                let result = vqa::regularization_study(
                    &vqa::STUDY_LAMBDAS,
                    seeds,
                    &base,
                    &data,
                    &seed,
                );
                println!(
                    "{:<8} {:>10} {:>10} {:>10}",
                    "lambda", "mean_L", "std_L", "mean_mse"
                );
                for row in &result.rows {
                    println!(
                        "{:<8} {:>10.4} {:>10.4} {:>10.4}",
                        row.lambda, row.mean_lipschitz, row.std_lipschitz, row.mean_mse
                    );
                }
                if let Some(out) = out {
                    write_output(&out, &result.to_csv(), seed_value, &[])?;
                }
                Ok(())
            } else {
                let lambda = lambda.ok_or_else(|| {
                    CliError::Usage("pass --lambda <value> or --study".into())
                })?;
                if lambda < 0.0 {
                    return Err(CliError::Usage("--lambda must be nonnegative".into()));
                }
                let cfg = TrainConfig { lambda, ..base };
                let record = vqa::adam_train(&cfg, &data, &seed, &[0]);
                println!("lambda         {lambda}");
                println!("restart        {}", record.restart_index);
                println!("final theta    {:?}", record.final_theta);
                println!("final mse      {:.6}", record.final_mse);
                println!("final L        {:.6}", record.final_lipschitz);
                if let Some(out) = out {
                    let json =
                        serde_json::to_string_pretty(&record).expect("record serialization");
                    write_output(&out, &json, seed_value, &[])?;
                }
                Ok(())
            }
        }
    }
}
