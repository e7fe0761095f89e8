//! The `evolve` pipeline: exact oracle, Trotter circuits, noise and mitigation.

use std::path::Path;

use nuosc::hamiltonian::{single_neutrino_probabilities, ExactPropagator, Flavor, NeutrinoSystem};
use nuosc::mitigation::{self, Scheme};
use nuosc::noise::{noisy_probabilities, run_noisy, Method, NoiseModel};
use nuosc::trotter::{backend_initial_state, build_evolution, build_identity, measurement_rotation, TrotterPlan};
use nuosc::{Circuit, MeasurementRecord, QuditState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliResult;
use crate::output::{self, Written};

pub const EVOLVE_SCHEMA: &str = "nuosc.evolve/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveRow {
    pub t: f64,
    pub steps: usize,
    pub neutrino: usize,
    pub p_e: f64,
    pub p_mu: f64,
    pub p_tau: f64,
    pub sigma_e: f64,
    pub sigma_mu: f64,
    pub sigma_tau: f64,
    pub exact_e: f64,
    pub exact_mu: f64,
    pub exact_tau: f64,
    pub persistence: f64,
    pub persistence_sigma: f64,
    pub persistence_exact: f64,
    pub unphysical: f64,
    pub dr_flagged: bool,
    pub entangling: usize,
    pub depth: usize,
}

impl EvolveRow {
    pub fn measured(&self) -> [f64; 3] {
        [self.p_e, self.p_mu, self.p_tau]
    }

    pub fn sigma(&self) -> [f64; 3] {
        [self.sigma_e, self.sigma_mu, self.sigma_tau]
    }

    pub fn exact(&self) -> [f64; 3] {
        [self.exact_e, self.exact_mu, self.exact_tau]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub rows: Vec<EvolveRow>,
    pub method: Option<Method>,
    pub noise: NoiseModel,
}

/// Seed of an independent sub-stream of `seed`.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Exact single-neutrino flavor probabilities and persistence at `t`.
pub(crate) fn exact_point(sys: &NeutrinoSystem, prop: &ExactPropagator, t: f64) -> CliResult<(Vec<[f64; 3]>, f64)> {
    let psi0 = sys.initial_state();
    let psi = prop.evolve(&psi0, t)?;
    let persistence = psi0.fidelity(&psi);
    Ok((single_neutrino_probabilities(&sys.to_flavor(&psi)?), persistence))
}

/// Evolution circuit followed by the rotation into the flavor basis.
pub(crate) fn measured_circuit(sys: &NeutrinoSystem, t: f64, plan: &TrotterPlan, identity: bool) -> CliResult<Circuit> {
    let mut c = if identity { build_identity(sys, t, plan)? } else { build_evolution(sys, t, plan)? };
    c.extend(&measurement_rotation(sys, plan.backend)?)?;
    Ok(c)
}

/// Outcome record of `circuit`, sampled when `shots` is set.
pub(crate) fn execute(
    circuit: &Circuit,
    initial: &QuditState,
    noise: &NoiseModel,
    method: Method,
    shots: Option<u64>,
    seed: u64,
) -> CliResult<(MeasurementRecord, Method)> {
    let out = noisy_probabilities(circuit, initial, noise, method, seed)?;
    let rec = match shots {
        Some(s) => run_noisy(circuit, initial, noise, s, seed, out.method)?,
        None => MeasurementRecord::from_probabilities(circuit.shape(), out.probabilities, "probabilities")?,
    };
    Ok((rec, out.method))
}

struct Estimator<'a> {
    word: &'a [Flavor],
    scheme: Scheme,
    dr: bool,
    d_n: Option<f64>,
    symmetrize: bool,
    qubit: bool,
}

impl Estimator<'_> {
    /// Flattened `[P_e, P_μ, P_τ] × N`, persistence, unphysical fraction, DR flag.
    fn evaluate(&self, records: &[MeasurementRecord]) -> nuosc::Result<Vec<f64>> {
        let ph = &records[0];
        let (mut flavors, persistence, flagged) = if self.dr {
            let id = &records[1];
            let est = mitigation::mitigate_persistence(ph, id, self.word)?;
            (mitigation::mitigate_flavors(ph, id, self.word, self.scheme, self.d_n)?, est.value, est.flagged)
        } else {
            (mitigation::selected_flavors(ph, self.scheme)?, mitigation::persistence(ph, self.word)?, false)
        };
        if self.symmetrize {
            flavors = mitigation::symmetrize(&flavors, self.word)?;
        }
        let unphysical = if self.qubit { 1.0 - mitigation::post_select(ph, Scheme::Phs, 0)?.kept } else { 0.0 };
        let mut out: Vec<f64> = flavors.iter().flatten().copied().collect();
        out.extend([persistence, unphysical.max(0.0), if flagged { 1.0 } else { 0.0 }]);
        Ok(out)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentRecord> {
    cfg.validate()?;
    let sys = cfg.system()?;
    let word = cfg.initial()?;
    let n = word.len();
    let prop = ExactPropagator::new(&sys)?;
    let times = cfg.times()?;
    let noise = cfg.noise_model(n)?;
    let mode = cfg.evolution.mode;
    let method = if mode == Mode::Noisy { cfg.noise.method } else { Method::Auto };
    let initial = backend_initial_state(&sys, cfg.evolution.backend)?;
    let m = &cfg.mitigation;
    let estimator = Estimator {
        word: &word,
        scheme: m.scheme,
        dr: m.dr,
        d_n: m.d_n,
        symmetrize: m.symmetrize,
        qubit: cfg.evolution.backend.group() == 2,
    };

    let points: Vec<(Vec<EvolveRow>, Option<Method>)> = times
        .par_iter()
        .enumerate()
        .map(|(i, &t)| -> CliResult<_> {
            let (exact, persistence_exact) = exact_point(&sys, &prop, t)?;
            let steps = cfg.steps_at(t);
            let mut values = Vec::with_capacity(3 * n + 3);
            let mut sigma = vec![0.0; 3 * n + 3];
            let (mut entangling, mut depth, mut used) = (0, 0, None);
            if mode == Mode::Exact {
                let mut ex = exact.clone();
                if m.symmetrize {
                    ex = mitigation::symmetrize(&ex, &word)?;
                }
                values.extend(ex.iter().flatten().copied());
                values.extend([persistence_exact, 0.0, 0.0]);
            } else {
                let plan = cfg.plan_at(t);
                let circuit = measured_circuit(&sys, t, &plan, false)?;
                entangling = circuit.entangling_count();
                depth = circuit.entangling_depth();
                let base = 4 * i as u64;
                let (ph, meth) = execute(&circuit, &initial, &noise, method, cfg.noise.shots, derive_seed(cfg.seed, base))?;
                used = Some(meth);
                let mut records = vec![ph];
                if m.dr {
                    let id_circuit = measured_circuit(&sys, t, &plan, true)?;
                    let seed = derive_seed(cfg.seed, base + 1);
                    records.push(execute(&id_circuit, &initial, &noise, method, cfg.noise.shots, seed)?.0);
                }
                let refs: Vec<&MeasurementRecord> = records.iter().collect();
                if cfg.noise.shots.is_some() && m.bootstrap >= 2 {
                    let summary = mitigation::bootstrap(&refs, m.bootstrap, derive_seed(cfg.seed, base + 2), |r| {
                        estimator.evaluate(r)
                    })?;
                    values = summary.estimate;
                    sigma = summary.sigma;
                } else {
                    values = estimator.evaluate(&records)?;
                }
            }
            let rows = (0..n)
                .map(|k| EvolveRow {
                    t,
                    steps,
                    neutrino: k,
                    p_e: values[3 * k],
                    p_mu: values[3 * k + 1],
                    p_tau: values[3 * k + 2],
                    sigma_e: sigma[3 * k],
                    sigma_mu: sigma[3 * k + 1],
                    sigma_tau: sigma[3 * k + 2],
                    exact_e: exact[k][0],
                    exact_mu: exact[k][1],
                    exact_tau: exact[k][2],
                    persistence: values[3 * n],
                    persistence_sigma: sigma[3 * n],
                    persistence_exact,
                    unphysical: values[3 * n + 1],
                    dr_flagged: values[3 * n + 2] != 0.0,
                    entangling,
                    depth,
                })
                .collect();
            Ok((rows, used))
        })
        .collect::<CliResult<_>>()?;
    let method = points.iter().find_map(|p| p.1);
    let rows = points.into_iter().flat_map(|p| p.0).collect();
    Ok(ExperimentRecord { rows, method, noise })
}

pub fn write_experiment(cfg: &ExperimentConfig, record: &ExperimentRecord, fallback_dir: &Path) -> CliResult<Written> {
    let dir = output::output_dir(cfg, fallback_dir);
    let stem = output::stem(cfg);
    let csv = dir.join(format!("{stem}.csv"));
    let sidecar = dir.join(format!("{stem}.json"));
    output::write_csv(&csv, EVOLVE_SCHEMA, cfg, &record.rows)?;
    let payload = json!({
        "mode": cfg.evolution.mode,
        "times": cfg.times()?,
        "noise_model": record.noise,
        "method": record.method,
    });
    output::write_sidecar(&sidecar, EVOLVE_SCHEMA, cfg, std::slice::from_ref(&csv), payload)?;
    Ok(Written { csv: vec![csv], json: sidecar })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &[&str]) -> ExperimentConfig {
        let base = "[system]\ninitial = \"e mu\"\n[evolution]\nt_stop = 3.0\nt_count = 4\n";
        let o: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::from_toml(base, &o).unwrap()
    }

    #[test]
    fn exact_mode_rows() {
        let rec = run_experiment(&config(&["evolution.mode=\"exact\""])).unwrap();
        assert_eq!(rec.rows.len(), 8);
        for r in &rec.rows {
            assert_eq!(r.measured(), r.exact());
            assert!((r.p_e + r.p_mu + r.p_tau - 1.0).abs() < 1e-12);
        }
        assert!((rec.rows[0].persistence - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_trotter_matches_exact_for_two_neutrinos() {
        for backend in ["qutrit", "qubit-a", "qubit-b"] {
            let rec = run_experiment(&config(&[&format!("evolution.backend=\"{backend}\"")])).unwrap();
            for r in &rec.rows {
                for f in 0..3 {
                    assert!((r.measured()[f] - r.exact()[f]).abs() < 1e-9, "{backend} t={}", r.t);
                }
                assert!((r.persistence - r.persistence_exact).abs() < 1e-9);
                assert!(r.unphysical < 1e-12);
            }
        }
    }

    #[test]
    fn mass_basis_pipeline_matches_exact() {
        let rec = run_experiment(&config(&["system.basis=\"mass\"", "evolution.backend=\"qubit-b\""])).unwrap();
        for r in &rec.rows {
            for f in 0..3 {
                assert!((r.measured()[f] - r.exact()[f]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dr_under_global_depolarizing_is_exact() {
        let rec = run_experiment(&config(&[
            "evolution.mode=\"noisy\"",
            "noise.channels=[{kind=\"global_depolarizing\", p2q=0.02}]",
            "mitigation.dr=true",
        ]))
        .unwrap();
        assert_eq!(rec.method, Some(Method::Analytic));
        for r in &rec.rows {
            assert!((r.persistence - r.persistence_exact).abs() < 1e-10, "t={}", r.t);
        }
    }

    #[test]
    fn shots_produce_uncertainties() {
        let rec = run_experiment(&config(&[
            "evolution.mode=\"noisy\"",
            "noise.preset=\"h1-1-like\"",
            "noise.shots=200",
            "mitigation.bootstrap=20",
        ]))
        .unwrap();
        assert!(rec.rows.iter().any(|r| r.sigma_e > 0.0));
        for r in &rec.rows {
            assert!(r.measured().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
