//! Three-flavor state tomography of evolved states.

use std::path::Path;

use nuosc::hamiltonian::ExactPropagator;
use nuosc::mitigation::{self, persistence_decoherence};
use nuosc::noise::Method;
use nuosc::tomography::{
    append_basis_change, entropy, fidelity_with_pure, shared_dr_factor, tomography_settings, ReconstructedState,
    TomographySetting, POOL_SIZE,
};
use nuosc::trotter::backend_initial_state;
use nuosc::{DensityMatrix, QuditState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};
use crate::evolve::{derive_seed, execute, measured_circuit};
use crate::output::{self, Written};

pub const FIDELITY_SCHEMA: &str = "nuosc.tomography/1";
pub const ENTROPY_SCHEMA: &str = "nuosc.tomography.entropy/1";
pub const MAX_DEFAULT_NEUTRINOS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyRow {
    pub t: f64,
    pub fidelity_raw: f64,
    pub fidelity_cpdm: f64,
    pub fidelity_pure: f64,
    pub pair_entropy_cpdm: f64,
    pub pair_entropy_pure: f64,
    pub pair_entropy_exact: f64,
    pub dr_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub t: f64,
    pub neutrino: usize,
    pub entropy_cpdm: f64,
    pub entropy_pure: f64,
    pub entropy_exact: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyPoint {
    pub row: TomographyRow,
    pub entropies: Vec<EntropyRow>,
    pub state: ReconstructedState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyReport {
    pub points: Vec<TomographyPoint>,
}

fn pair_sites(n: usize) -> Vec<usize> {
    (0..n.min(2)).collect()
}

fn dm_entropy(rho: &DensityMatrix, keep: &[usize]) -> CliResult<f64> {
    Ok(entropy(&rho.partial_trace(keep)?)?)
}

pub fn tomography_run(cfg: &ExperimentConfig) -> CliResult<TomographyReport> {
    cfg.validate()?;
    let word = cfg.initial()?;
    let n = word.len();
    let settings_count = POOL_SIZE.pow(n as u32);
    if n > MAX_DEFAULT_NEUTRINOS && !cfg.tomography.allow_large {
        return Err(CliError::TooManySettings(n, settings_count));
    }
    if cfg.evolution.mode == Mode::Exact {
        return Err(CliError::Config("tomography needs mode trotter or noisy".into()));
    }
    let sys = cfg.system()?;
    let prop = ExactPropagator::new(&sys)?;
    let noise = cfg.noise_model(n)?;
    let method = if cfg.evolution.mode == Mode::Noisy { cfg.noise.method } else { Method::Auto };
    let initial = backend_initial_state(&sys, cfg.evolution.backend)?;
    let times = cfg.times()?;
    let shots = cfg.noise.shots;
    let stride = settings_count as u64 + 1;

    let points = times
        .iter()
        .enumerate()
        .map(|(i, &t)| -> CliResult<TomographyPoint> {
            let plan = cfg.plan_at(t);
            let base = measured_circuit(&sys, t, &plan, false)?;
            let settings: Vec<TomographySetting> = tomography_settings(n)
                .into_par_iter()
                .enumerate()
                .map(|(s, mut setting)| -> CliResult<_> {
                    let mut c = base.clone();
                    append_basis_change(&mut c, &setting.operators)?;
                    let seed = derive_seed(cfg.seed, i as u64 * stride + s as u64);
                    setting.record = Some(execute(&c, &initial, &noise, method, shots, seed)?.0);
                    Ok(setting)
                })
                .collect::<CliResult<_>>()?;
            let (scale, label) = if cfg.mitigation.dr {
                let id = measured_circuit(&sys, t, &plan, true)?;
                let seed = derive_seed(cfg.seed, i as u64 * stride + settings_count as u64);
                let rec = execute(&id, &initial, &noise, method, shots, seed)?.0;
                let p_id = mitigation::persistence(&rec, &word)?;
                let local = if cfg.evolution.backend.group() == 1 { 3 } else { 2 };
                let d = persistence_decoherence(n, local);
                (shared_dr_factor(p_id, d)?, "dr")
            } else {
                (1.0, "none")
            };
            let state = ReconstructedState::from_settings(&settings, n, scale, label)?;
            let exact = sys.to_flavor(&prop.evolve(&sys.initial_state(), t)?)?;
            let pair = pair_sites(n);
            let row = TomographyRow {
                t,
                fidelity_raw: fidelity_with_pure(&state.rho_raw, &exact)?,
                fidelity_cpdm: fidelity_with_pure(&state.rho_physical, &exact)?,
                fidelity_pure: fidelity_with_pure(&state.rho_pure, &exact)?,
                pair_entropy_cpdm: dm_entropy(&state.rho_physical, &pair)?,
                pair_entropy_pure: dm_entropy(&state.rho_pure, &pair)?,
                pair_entropy_exact: entropy(&exact.reduced(&pair)?)?,
                dr_scale: scale,
            };
            let entropies = (0..n)
                .map(|k| -> CliResult<EntropyRow> {
                    Ok(EntropyRow {
                        t,
                        neutrino: k,
                        entropy_cpdm: dm_entropy(&state.rho_physical, &[k])?,
                        entropy_pure: dm_entropy(&state.rho_pure, &[k])?,
                        entropy_exact: entropy(&exact.reduced(&[k])?)?,
                    })
                })
                .collect::<CliResult<_>>()?;
            Ok(TomographyPoint { row, entropies, state })
        })
        .collect::<CliResult<_>>()?;
    Ok(TomographyReport { points })
}

fn matrix_json(rho: &DensityMatrix) -> Value {
    let m = rho.to_matrix();
    let re: Vec<Vec<f64>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].im).collect()).collect();
    json!({ "re": re, "im": im })
}

fn state_json(psi: &QuditState) -> Value {
    let re: Vec<f64> = psi.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = psi.amplitudes().iter().map(|a| a.im).collect();
    json!({ "re": re, "im": im })
}

pub fn write_tomography(cfg: &ExperimentConfig, report: &TomographyReport, fallback_dir: &Path) -> CliResult<Written> {
    let dir = output::output_dir(cfg, fallback_dir);
    let stem = output::stem(cfg);
    let fid = dir.join(format!("{stem}-fidelity.csv"));
    let ent = dir.join(format!("{stem}-entropy.csv"));
    let rows: Vec<&TomographyRow> = report.points.iter().map(|p| &p.row).collect();
    let entropies: Vec<&EntropyRow> = report.points.iter().flat_map(|p| &p.entropies).collect();
    output::write_csv(&fid, FIDELITY_SCHEMA, cfg, &rows)?;
    output::write_csv(&ent, ENTROPY_SCHEMA, cfg, &entropies)?;
    let states: Vec<Value> = report
        .points
        .iter()
        .map(|p| {
            json!({
                "t": p.row.t,
                "settings": p.state.settings,
                "shots": p.state.shots,
                "mitigation": p.state.mitigation,
                "rho_raw": matrix_json(&p.state.rho_raw),
                "rho_cpdm": matrix_json(&p.state.rho_physical),
                "pure_state": state_json(&p.state.pure_state),
            })
        })
        .collect();
    let sidecar = dir.join(format!("{stem}.json"));
    output::write_sidecar(&sidecar, FIDELITY_SCHEMA, cfg, &[fid.clone(), ent.clone()], json!({ "states": states }))?;
    Ok(Written { csv: vec![fid, ent], json: sidecar })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &[&str]) -> ExperimentConfig {
        let base = "[system]\ninitial = \"e mu\"\n[evolution]\nbackend = \"qutrit\"\nsteps = 1\ntimes = [0.0, 1.0, 2.5]\n";
        ExperimentConfig::from_toml(base, &extra.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn noiseless_round_trip() {
        for backend in ["qutrit", "qubit-b"] {
            let report = tomography_run(&cfg(&[&format!("evolution.backend=\"{backend}\"")])).unwrap();
            for p in &report.points {
                assert!((p.row.fidelity_pure - 1.0).abs() < 1e-8, "{backend} {:?}", p.row);
                assert!((p.row.fidelity_cpdm - 1.0).abs() < 1e-8);
                assert!(p.row.pair_entropy_pure.abs() < 1e-8);
                for e in &p.entropies {
                    assert!((e.entropy_pure - e.entropy_exact).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn guard_on_large_registers() {
        let c = ExperimentConfig::from_toml(
            "[system]\ninitial = \"e mu e tau\"\n[evolution]\ntimes = [1.0]\n",
            &[],
        )
        .unwrap();
        assert!(matches!(tomography_run(&c), Err(CliError::TooManySettings(4, 2401))));
    }

    #[test]
    fn depolarized_pure_state_is_closer() {
        let report = tomography_run(&cfg(&[
            "evolution.mode=\"noisy\"",
            "noise.channels=[{kind=\"global_depolarizing\", p2q=0.05}]",
        ]))
        .unwrap();
        for p in &report.points {
            assert!(p.row.fidelity_pure >= p.row.fidelity_cpdm - 1e-12, "{:?}", p.row);
            assert!(p.row.fidelity_cpdm < 1.0);
        }
    }
}
