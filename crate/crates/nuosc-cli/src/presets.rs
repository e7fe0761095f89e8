//! Built-in experiment configurations.

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Name, one-line description and TOML body of every preset.
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "pair-e-mu",
        "two neutrinos from e mu, qubit B, unit step size to t = 14, h1-1-like noise, 100 shots",
        r#"name = "pair-e-mu"
[system]
initial = "e mu"
[evolution]
mode = "noisy"
backend = "qubit-b"
order = "lo"
dt = 1.0
t_start = 1.0
t_stop = 14.0
t_count = 14
[noise]
preset = "h1-1-like"
shots = 100
"#,
    ),
    (
        "quad-e-mu-e-tau-dr",
        "four neutrinos from e mu e tau, torino-like noise, decoherence renormalization with pHS",
        r#"name = "quad-e-mu-e-tau-dr"
[system]
initial = "e mu e tau"
[evolution]
mode = "noisy"
backend = "qubit-b"
order = "lo"
steps = 1
t_start = 0.25
t_stop = 2.0
t_count = 8
[noise]
preset = "torino-like"
shots = 4000
method = "density_matrix"
[mitigation]
dr = true
scheme = "phs"
"#,
    ),
    (
        "octet-single-step-dr",
        "eight neutrinos from a palindromic word, one Trotter step of growing size, DR and mirror averaging",
        r#"name = "octet-single-step-dr"
[system]
initial = "e mu e tau tau e mu e"
[evolution]
mode = "noisy"
backend = "qubit-b"
order = "lo"
steps = 1
times = [0.5, 1.0, 2.0]
[noise]
preset = "torino-like"
shots = 4000
method = { trajectories = 16 }
[mitigation]
dr = true
scheme = "phs"
symmetrize = true
bootstrap = 50
"#,
    ),
    (
        "pair-tomography",
        "two-neutrino state tomography after a single Trotter step, global depolarizing noise",
        r#"name = "pair-tomography"
[system]
initial = "e mu"
[evolution]
mode = "noisy"
backend = "qutrit"
order = "lo"
steps = 1
t_start = 0.0
t_stop = 3.0
t_count = 7
[noise]
channels = [{ kind = "global_depolarizing", p2q = 0.01 }]
shots = 2000
"#,
    ),
    (
        "octet-identity-scan",
        "eight-neutrino calibration scan of the effective decoherence value under damping plus depolarizing noise",
        r#"name = "octet-identity-scan"
[system]
initial = "e mu e tau tau e mu e"
[evolution]
mode = "noisy"
backend = "qubit-b"
order = "lo"
steps = 1
times = [0.5, 1.5, 3.0]
[noise]
channels = [
    { kind = "local_depolarizing", p2q = 0.01, p1q = 0.0003333333333333333 },
    { kind = "amplitude_damping", gamma = 0.005 },
]
method = { trajectories = 24 }
[mitigation]
scheme = "phs"
scan = [0.002, 0.005, 0.01, 0.02, 0.033, 0.05, 0.07, 0.09, 0.1, 0.11, 0.12]
"#,
    ),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset_toml(name: &str) -> CliResult<&'static str> {
    PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.2)
        .ok_or_else(|| CliError::UnknownPreset(name.into(), preset_names().join(", ")))
}

pub fn load_preset(name: &str, overrides: &[String]) -> CliResult<ExperimentConfig> {
    ExperimentConfig::from_toml(preset_toml(name)?, overrides)
}
