//! `pisep`: command-line workflows over the `pisep` library.
//!
//! Machine-readable output (JSON, CSV) goes to standard output or the file
//! given with `-o`; human-readable summaries go to standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use pisep::coeffs::coeffs_from_dense;
use pisep::io::{CoeffDoc, ReconstructionDoc, State};
use pisep::measurement::{self, Preset, Shots};
use pisep::state::{make_basis_state, random_mixed, random_pure, PauliType};
use pisep::{
    evaluate_criterion, evaluate_criterion_coeffs, kme_concurrence_pure, make_ghz, make_w,
    maximize_over_bases, pi_distance, pi_project, scan, w_noise_detection_threshold, DensityMatrix,
    Error, PICoefficients,
};

#[derive(Parser)]
#[command(
    name = "pisep",
    version,
    about = "PI parts, k-separability criteria and PI tomography for N qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a state file.
    Gen {
        kind: GenKind,
        n_qubits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the PI part of a state as a density-matrix file.
    Project {
        state: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the e_klmn coefficients of the PI part of a state.
    Coeffs {
        state: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the k-separability criteria; accepts a state or coefficient file.
    Certify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Via::Dense)]
        via: Via,
        /// Search local bases: RESTARTS SEED.
        #[arg(long, num_args = 2, value_names = ["RESTARTS", "SEED"])]
        basis_search: Option<Vec<u64>>,
    },
    /// Noisy W scan over N values and a start:end:step noise grid, as CSV.
    ScanNoise {
        /// Comma-separated qubit counts, e.g. 3,8,11,16.
        n_list: String,
        /// Noise grid start:end:step; endpoints included.
        p_grid: String,
        out: Option<PathBuf>,
        #[arg(long)]
        closed_form_only: bool,
    },
    /// Simulate the 2N+1 setting measurement scheme and reconstruct the coefficients.
    Reconstruct {
        state: PathBuf,
        /// Shots per setting; exact expectations when omitted.
        #[arg(long)]
        shots: Option<u64>,
        /// Base seed; setting i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PresetArg::Uniform)]
        preset: PresetArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// k-ME concurrence of a pure state and the minimizing partition.
    Concurrence { state: PathBuf, k: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Ghz,
    W,
    /// |0…0⟩
    Product,
    RandomPure,
    RandomMixed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Via {
    Dense,
    Coeffs,
    Reconstruct,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Uniform,
    Supplement,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Uniform => Preset::Uniform,
            PresetArg::Supplement => Preset::Supplement,
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NumericalConsistency(_)) => 3,
        Some(Error::Io(_) | Error::Json(_)) => 4,
        Some(_) => 2,
        None if err.downcast_ref::<std::io::Error>().is_some() => 4,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(Error::from)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(out, &text)
}

fn read_state(path: &Path) -> Result<State> {
    State::read(path).with_context(|| format!("reading {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            kind,
            n_qubits,
            seed,
            out,
        } => cmd_gen(kind, n_qubits, seed, out.as_deref()),
        Command::Project { state, out } => {
            let rho = read_state(&state)?.density();
            let projected = pi_project(&rho);
            eprintln!("distance to PI part: {:e}", pi_distance(&rho));
            emit(
                out.as_deref(),
                &(State::Density(projected).to_json()? + "\n"),
            )
        }
        Command::Coeffs { state, out } => {
            let coeffs = coeffs_from_dense(&read_state(&state)?.density());
            eprintln!(
                "{} coefficients for N = {}",
                coeffs.len(),
                coeffs.n_qubits()
            );
            emit_json(out.as_deref(), &CoeffDoc::from_coeffs(&coeffs))
        }
        Command::Certify {
            file,
            via,
            basis_search,
        } => cmd_certify(&file, via, basis_search.as_deref()),
        Command::ScanNoise {
            n_list,
            p_grid,
            out,
            closed_form_only,
        } => cmd_scan_noise(&n_list, &p_grid, out.as_deref(), closed_form_only),
        Command::Reconstruct {
            state,
            shots,
            seed,
            preset,
            out,
        } => cmd_reconstruct(&state, shots, seed, preset.into(), out.as_deref()),
        Command::Concurrence { state, k } => {
            let psi = read_state(&state)?.into_pure()?;
            let (value, partition) = kme_concurrence_pure(&psi, k)?;
            eprintln!("C_{k}ME = {value} at {partition}");
            emit_json(
                None,
                &json!({ "k": k, "value": value, "partition": partition.to_string() }),
            )
        }
    }
}

fn cmd_gen(kind: GenKind, n: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = match kind {
        GenKind::Ghz => State::Pure(make_ghz(n)?),
        GenKind::W => State::Pure(make_w(n)?),
        GenKind::Product => State::Pure(make_basis_state(n, 0)?),
        GenKind::RandomPure => State::Pure(random_pure(n, &mut rng)?),
        GenKind::RandomMixed => State::Density(random_mixed(n, &mut rng)?),
    };
    emit(out, &(state.to_json()? + "\n"))
}

/// A certify input: either a state or a coefficient table.
enum Input {
    State(DensityMatrix),
    Coeffs(PICoefficients),
}

fn read_input(path: &Path) -> Result<Input> {
    let text = fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    if value.get("coeffs").is_some() {
        let doc: CoeffDoc = serde_json::from_value(value).map_err(Error::from)?;
        Ok(Input::Coeffs(doc.to_coeffs()?))
    } else {
        Ok(Input::State(State::from_json(&text)?.density()))
    }
}

fn reconstruct_exact(rho: &DensityMatrix) -> pisep::Result<PICoefficients> {
    let n = rho.n_qubits();
    let data = measurement::design_settings(n)?
        .iter()
        .map(|s| measurement::exact_setting_data(rho, s))
        .collect::<pisep::Result<Vec<_>>>()?;
    Ok(measurement::reconstruct_coefficients(&data, n)?.to_coefficients())
}

fn cmd_certify(path: &Path, via: Via, basis_search: Option<&[u64]>) -> Result<()> {
    let input = read_input(path)?;
    if let Some(args) = basis_search {
        let Input::State(rho) = input else {
            return Err(Error::UnsupportedInput("basis search needs a state file".into()).into());
        };
        let (restarts, seed) = (args[0] as usize, args[1]);
        let search = maximize_over_bases(&rho, restarts, seed)?;
        eprintln!(
            "identity basis k_eff = {:?}, best k_eff = {:?} (restart {})",
            search.identity_report.k_eff, search.best_report.k_eff, search.best_restart
        );
        return emit_json(
            None,
            &json!({
                "identity_basis": search.identity_report,
                "best_basis": search.best_report,
                "best_restart": search.best_restart,
                "best_angles": search.best_angles,
            }),
        );
    }
    let report = match (input, via) {
        (Input::State(rho), Via::Dense) => evaluate_criterion(&rho)?,
        (Input::State(rho), Via::Coeffs) => evaluate_criterion_coeffs(&coeffs_from_dense(&rho))?,
        (Input::State(rho), Via::Reconstruct) => {
            evaluate_criterion_coeffs(&reconstruct_exact(&rho)?)?
        }
        (Input::Coeffs(c), Via::Coeffs) => evaluate_criterion_coeffs(&c)?,
        (Input::Coeffs(_), _) => {
            return Err(Error::UnsupportedInput(
                "a coefficient file can only be certified --via coeffs".into(),
            )
            .into())
        }
    };
    let detected: Vec<String> = report
        .verdicts
        .iter()
        .filter(|(k, _)| report.detects(*k))
        .map(|(k, _)| k.to_string())
        .collect();
    eprintln!(
        "k_eff = {:?}; k-nonseparable for k in [{}]",
        report.k_eff,
        detected.join(",")
    );
    emit_json(None, &report)
}

fn cmd_scan_noise(
    n_list: &str,
    p_grid: &str,
    out: Option<&Path>,
    closed_form_only: bool,
) -> Result<()> {
    let ns = scan::parse_n_list(n_list)?;
    let grid = scan::parse_p_grid(p_grid)?;
    let rows = scan::scan_noise(&ns, &grid, closed_form_only)?;
    for &n in &ns {
        let path = if !closed_form_only && n <= pisep::state::MAX_DENSE_QUBITS {
            "dense, checked against closed form"
        } else {
            "closed form"
        };
        eprintln!(
            "N = {n}: {} points ({path}); k = 2 detected below p* = {}",
            grid.len(),
            w_noise_detection_threshold(n, 2)?
        );
    }
    emit(out, &scan::rows_to_csv(&rows))
}

fn describe_type(t: PauliType) -> String {
    format!("e_{},{},{},{}", t.x, t.y, t.z, t.id)
}

fn cmd_reconstruct(
    path: &Path,
    shots: Option<u64>,
    seed: u64,
    preset: Preset,
    out: Option<&Path>,
) -> Result<()> {
    let rho = read_state(path)?.density();
    let n = rho.n_qubits();
    let settings = measurement::design_settings_with(n, preset)?;
    eprintln!("{} settings:", settings.len());
    let mut data = Vec::with_capacity(settings.len());
    for (i, s) in settings.iter().enumerate() {
        eprintln!("  {i}: {}", s.describe());
        data.push(match shots {
            Some(count) => {
                measurement::sample_setting_data(&rho, s, count, seed.wrapping_add(i as u64))?
            }
            None => measurement::exact_setting_data(&rho, s)?,
        });
    }
    let result = measurement::reconstruct_coefficients(&data, n)?;
    eprintln!("condition numbers: {:?}", result.condition_numbers);
    eprintln!("residuals: {:?}", result.residuals);

    let truth = coeffs_from_dense(&rho);
    let max_err = result
        .determined()
        .iter()
        .map(|&(t, e)| (e - truth.get_type(t)).abs())
        .fold(0.0, f64::max);
    eprintln!("max error of determined coefficients: {max_err:e}");
    if let (Some(Shots::Finite(_)), Some(errors)) = (
        data.first().map(|d| d.shots),
        result.criterion_standard_errors(),
    ) {
        let mut all_pass = true;
        for ((t, e), (_, se)) in result.criterion_coefficients().into_iter().zip(errors) {
            let dev = (e - truth.get_type(t)).abs();
            let pass = dev <= 5.0 * se + 1e-12;
            all_pass &= pass;
            eprintln!(
                "  {}: {e} ± {se} (error {dev:e}){}",
                describe_type(t),
                if pass { "" } else { "  OUTSIDE 5σ" }
            );
        }
        eprintln!("all criterion coefficients within 5σ: {all_pass}");
    }
    let report = evaluate_criterion_coeffs(&result.to_coefficients())?;
    eprintln!("reconstructed k_eff = {:?}", report.k_eff);
    emit_json(out, &ReconstructionDoc::from_result(&result))
}
