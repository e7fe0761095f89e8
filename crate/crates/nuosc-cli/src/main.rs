use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nuosc_cli::config::{ExperimentConfig, Mode};
use nuosc_cli::error::{CliError, CliResult};
use nuosc_cli::output::{self, Written};
use nuosc_cli::{evolve, gates, presets, scan, tomo};

#[derive(Parser)]
#[command(name = "nuosc", version, about = "Collective neutrino oscillations on qutrit and qubit circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML experiment file.
    #[arg(long, short, conflicts_with_all = ["preset", "from_sidecar"])]
    config: Option<PathBuf>,
    /// Built-in configuration; see `nuosc presets`.
    #[arg(long, short)]
    preset: Option<String>,
    /// Re-run the config embedded in a JSON sidecar.
    #[arg(long, conflicts_with = "preset")]
    from_sidecar: Option<PathBuf>,
    /// Override a config key, e.g. `--set evolution.steps=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory when the config gives none.
    #[arg(long, short, env = "NUOSC_OUTPUT_DIR", default_value = "nuosc-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Time evolution with exact, Trotter or noisy execution.
    Evolve {
        #[command(flatten)]
        source: Source,
        /// Shorthand for `--set evolution.mode=MODE`.
        #[arg(long, value_parser = ["exact", "trotter", "noisy"])]
        mode: Option<String>,
    },
    /// Entangling-gate counts of pair circuits and the Trotter formula grid.
    GateCounts {
        #[arg(long, default_value_t = gates::MAX_STEPS)]
        max_steps: usize,
        #[arg(long, value_delimiter = ',', default_values_t = gates::SIZES)]
        sizes: Vec<usize>,
        /// Also write CSV files here.
        #[arg(long, short, env = "NUOSC_OUTPUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Three-flavor state tomography along the time grid.
    Tomography {
        #[command(flatten)]
        source: Source,
    },
    /// Scan of the decoherence value used by renormalization.
    DnScan {
        #[command(flatten)]
        source: Source,
    },
    /// Parse a config, apply overrides and print the resolved form and hash.
    ValidateConfig {
        #[command(flatten)]
        source: Source,
    },
    /// List built-in configurations.
    Presets,
}

fn load(source: &Source, extra: &[String]) -> CliResult<ExperimentConfig> {
    let mut overrides = source.overrides.clone();
    if let Some(seed) = source.seed {
        overrides.push(format!("seed={seed}"));
    }
    overrides.extend(extra.iter().cloned());
    match (&source.config, &source.preset, &source.from_sidecar) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            ExperimentConfig::from_toml(&text, &overrides)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
        (None, Some(name), _) => presets::load_preset(name, &overrides),
        (None, None, Some(path)) => {
            let cfg = output::config_from_sidecar(path)?;
            ExperimentConfig::from_toml(&cfg.to_toml(), &overrides)
        }
        (None, None, None) => Err(CliError::Config("pass --config, --preset or --from-sidecar".into())),
    }
}

fn report(written: &Written) {
    for f in &written.csv {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", written.json.display());
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Evolve { source, mode } => {
            let extra: Vec<String> = mode.iter().map(|m| format!("evolution.mode=\"{m}\"")).collect();
            let cfg = load(&source, &extra)?;
            let record = evolve::run_experiment(&cfg)?;
            report(&evolve::write_experiment(&cfg, &record, &source.out)?);
        }
        Command::GateCounts { max_steps, sizes, out } => {
            let r = gates::gate_count_report(&sizes, max_steps)?;
            print!("{}", gates::render(&r));
            if let Some(dir) = out {
                let cfg = ExperimentConfig::from_toml("name = \"gate-counts\"\n[system]\ninitial = \"e mu\"\n[evolution]\ntimes = [0.0]\n", &[])?;
                report(&gates::write_report(&cfg, &r, &dir)?);
            }
        }
        Command::Tomography { source } => {
            let cfg = load(&source, &[])?;
            let r = tomo::tomography_run(&cfg)?;
            report(&tomo::write_tomography(&cfg, &r, &source.out)?);
        }
        Command::DnScan { source } => {
            let cfg = load(&source, &[])?;
            let r = scan::dn_scan(&cfg)?;
            println!("best d = {} (theoretical {})", r.scan.best_d, r.theoretical_d);
            report(&scan::write_scan(&cfg, &r, &source.out)?);
        }
        Command::ValidateConfig { source } => {
            let cfg = load(&source, &[])?;
            println!("# config_hash: {}", cfg.hash());
            if cfg.evolution.mode == Mode::Noisy {
                println!("# noise: {}", serde_json::to_string(&cfg.noise_model(cfg.initial()?.len())?)?);
            }
            print!("{}", cfg.to_toml());
        }
        Command::Presets => {
            for (name, about, _) in presets::PRESETS {
                println!("{name:<22} {about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
