//! Effective decoherence-value scan against the exact oracle.

use std::collections::BTreeMap;
use std::path::Path;

use nuosc::hamiltonian::ExactPropagator;
use nuosc::mitigation::{self, decoherence_value, effective_dn_scan, DnScan, ScanPoint};
use nuosc::trotter::{backend_initial_state, identity_schedule};
use nuosc::MeasurementRecord;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};
use crate::evolve::{derive_seed, exact_point, execute, measured_circuit};
use crate::output::{self, Written};

pub const SCAN_SCHEMA: &str = "nuosc.dn-scan/1";
pub const IDENTITY_SCHEMA: &str = "nuosc.dn-scan.identity/1";

pub fn default_grid() -> Vec<f64> {
    (1..=30).map(|k| k as f64 * 0.005).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCsvRow {
    pub d: f64,
    pub rms: f64,
    pub best: bool,
}

/// Raw post-selected identity-circuit probabilities, mirror-averaged for palindromic words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub t: f64,
    pub neutrino: usize,
    pub p_e: f64,
    pub p_mu: f64,
    pub p_tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub scan: DnScan,
    pub theoretical_d: f64,
    pub identity: Vec<IdentityRow>,
    pub points: Vec<ScanPoint>,
}

pub fn dn_scan(cfg: &ExperimentConfig) -> CliResult<ScanReport> {
    cfg.validate()?;
    if cfg.evolution.mode != Mode::Noisy {
        return Err(CliError::Config("dn-scan needs evolution.mode = \"noisy\"".into()));
    }
    let word = cfg.initial()?;
    let n = word.len();
    let sys = cfg.system()?;
    let prop = ExactPropagator::new(&sys)?;
    let noise = cfg.noise_model(n)?;
    let initial = backend_initial_state(&sys, cfg.evolution.backend)?;
    let times = cfg.times()?;
    let scheme = cfg.mitigation.scheme;
    let local = if cfg.evolution.backend.group() == 1 { 3 } else { 2 };
    let run = |circuit: &nuosc::Circuit, stream: u64| -> CliResult<MeasurementRecord> {
        Ok(execute(circuit, &initial, &noise, cfg.noise.method, cfg.noise.shots, derive_seed(cfg.seed, stream))?.0)
    };

    // Identity circuits that coincide across time points run once.
    let mut identity_jobs: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    let mut identity_key = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let plan = cfg.plan_at(t);
        let key = format!("{plan:?} {:?}", identity_schedule(n, t, &plan)?);
        identity_jobs.entry(key.clone()).or_insert((i, t));
        identity_key.push(key);
    }
    let identity_records: BTreeMap<String, MeasurementRecord> = identity_jobs
        .into_par_iter()
        .map(|(key, (i, t))| -> CliResult<_> {
            let c = measured_circuit(&sys, t, &cfg.plan_at(t), true)?;
            Ok((key, run(&c, 2 * i as u64 + 1)?))
        })
        .collect::<CliResult<_>>()?;

    let points: Vec<ScanPoint> = times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| -> CliResult<ScanPoint> {
            let c = measured_circuit(&sys, t, &cfg.plan_at(t), false)?;
            let physics = mitigation::raw_flavors(&run(&c, 2 * i as u64)?, scheme)?;
            let identity = mitigation::raw_flavors(&identity_records[&identity_key[i]], scheme)?;
            let (exact, _) = exact_point(&sys, &prop, t)?;
            Ok(ScanPoint { time: t, physics, identity, exact })
        })
        .collect::<CliResult<_>>()?;

    let grid = cfg.mitigation.scan.clone().unwrap_or_else(default_grid);
    let scan = effective_dn_scan(&points, &word, &grid)?;
    let palindromic = word.iter().eq(word.iter().rev());
    let mut identity = Vec::new();
    for p in &points {
        let rows = if palindromic { mitigation::symmetrize(&p.identity, &word)? } else { p.identity.clone() };
        for (k, r) in rows.iter().enumerate() {
            identity.push(IdentityRow { t: p.time, neutrino: k, p_e: r[0], p_mu: r[1], p_tau: r[2] });
        }
    }
    Ok(ScanReport { scan, theoretical_d: decoherence_value(scheme, n, local), identity, points })
}

pub fn write_scan(cfg: &ExperimentConfig, report: &ScanReport, fallback_dir: &Path) -> CliResult<Written> {
    let dir = output::output_dir(cfg, fallback_dir);
    let stem = output::stem(cfg);
    let scan_csv = dir.join(format!("{stem}-scan.csv"));
    let id_csv = dir.join(format!("{stem}-identity.csv"));
    let rows: Vec<ScanCsvRow> =
        report.scan.rows.iter().map(|r| ScanCsvRow { d: r.d, rms: r.rms, best: r.d == report.scan.best_d }).collect();
    output::write_csv(&scan_csv, SCAN_SCHEMA, cfg, &rows)?;
    output::write_csv(&id_csv, IDENTITY_SCHEMA, cfg, &report.identity)?;
    let sidecar = dir.join(format!("{stem}.json"));
    output::write_sidecar(
        &sidecar,
        SCAN_SCHEMA,
        cfg,
        &[scan_csv.clone(), id_csv.clone()],
        json!({
            "best_d": report.scan.best_d,
            "theoretical_d": report.theoretical_d,
            "series": report.scan.rows,
        }),
    )?;
    Ok(Written { csv: vec![scan_csv, id_csv], json: sidecar })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_depolarizing_scan_finds_theoretical_value() {
        let theory = 3.0f64.powi(1) / 4.0f64.powi(2);
        let grid = [0.05, theory, 0.3];
        let c = ExperimentConfig::from_toml(
            "[system]\ninitial = \"e mu\"\n[evolution]\nmode = \"noisy\"\nsteps = 1\ntimes = [0.5, 1.5]\n\
             [noise]\nchannels = [{kind = \"global_depolarizing\", p2q = 0.03}]\n",
            &[format!("mitigation.scan={grid:?}")],
        )
        .unwrap();
        let r = dn_scan(&c).unwrap();
        assert_eq!(r.scan.best_d, theory);
        assert!(r.scan.rows[1].rms < 1e-12);
        assert_eq!(r.theoretical_d, theory);
        assert_eq!(r.identity.len(), 4);
    }
}
