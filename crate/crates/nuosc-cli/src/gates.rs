//! Entangling-gate counts of the pair circuits and of full Trotter circuits.

use std::path::Path;

use nuosc::hamiltonian::{Basis, Flavor, NeutrinoSystem};
use nuosc::qubit::{self, routing::route_linear_chain, Variant};
use nuosc::qutrit;
use nuosc::trotter::{build_evolution, cx_count, Backend, Order, TrotterPlan};
use nuosc::GateRole;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, Written};

pub const PAIR_SCHEMA: &str = "nuosc.gate-counts.pair/1";
pub const FORMULA_SCHEMA: &str = "nuosc.gate-counts.formula/1";

pub const BACKENDS: [Backend; 3] = [Backend::Qutrit, Backend::QubitA, Backend::QubitB];
pub const ORDERS: [Order; 3] = [Order::Lo, Order::Nlo, Order::NloStar];
pub const SIZES: [usize; 4] = [2, 4, 6, 8];
pub const MAX_STEPS: usize = 6;

/// Published (count, depth) of one pair interaction, all-to-all then linear.
pub fn reference_pair_counts(backend: Backend) -> [(usize, usize); 2] {
    match backend {
        Backend::Qutrit => [(4, 4), (4, 4)],
        Backend::QubitA => [(24, 13), (42, 31)],
        Backend::QubitB => [(18, 12), (30, 25)],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairRow {
    pub backend: Backend,
    pub topology: &'static str,
    pub entangling: usize,
    pub depth: usize,
    pub reference_entangling: usize,
    pub reference_depth: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaRow {
    pub backend: Backend,
    pub order: Order,
    pub steps: usize,
    pub n: usize,
    pub built: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateReport {
    pub pairs: Vec<PairRow>,
    pub formulas: Vec<FormulaRow>,
}

const PROBE_ALPHA: f64 = 0.37;

pub fn pair_rows() -> CliResult<Vec<PairRow>> {
    let mut rows = Vec::new();
    for backend in BACKENDS {
        let circuit = match backend {
            Backend::Qutrit => qutrit::two_body_gate_qutrit(PROBE_ALPHA)?.0,
            Backend::QubitA => qubit::two_body_gate_qubit(PROBE_ALPHA, Variant::A)?,
            Backend::QubitB => qubit::two_body_gate_qubit(PROBE_ALPHA, Variant::B)?,
        };
        let all = (circuit.entangling_count(), circuit.entangling_depth());
        // Two qutrits are always adjacent.
        let linear = match backend {
            Backend::Qutrit => all,
            _ => {
                let routed = route_linear_chain(&circuit)?;
                (routed.cx_count(), routed.depth())
            }
        };
        let reference = reference_pair_counts(backend);
        for ((topology, built), refd) in [("all-to-all", all), ("linear", linear)].into_iter().zip(reference) {
            rows.push(PairRow {
                backend,
                topology,
                entangling: built.0,
                depth: built.1,
                reference_entangling: refd.0,
                reference_depth: refd.1,
                matches: built == refd,
            });
        }
    }
    Ok(rows)
}

/// Two-body entangling gates of built circuits against the closed forms;
/// any disagreement is an error.
pub fn formula_rows(sizes: &[usize], max_steps: usize) -> CliResult<Vec<FormulaRow>> {
    let mut jobs = Vec::new();
    for &backend in &BACKENDS {
        for &order in &ORDERS {
            for steps in 1..=max_steps {
                for &n in sizes {
                    jobs.push((backend, order, steps, n));
                }
            }
        }
    }
    let rows: Vec<FormulaRow> = jobs
        .into_par_iter()
        .map(|(backend, order, steps, n)| -> CliResult<FormulaRow> {
            let word = vec![Flavor::E; n];
            let sys = NeutrinoSystem::cone(Basis::Flavor, word)?;
            let plan = TrotterPlan::new(order, steps, backend);
            let built = build_evolution(&sys, 1.0, &plan)?.entangling_count_role(GateRole::TwoBody);
            let predicted = cx_count(&plan, n, backend.n_cx());
            Ok(FormulaRow { backend, order, steps, n, built, predicted })
        })
        .collect::<CliResult<_>>()?;
    if let Some(r) = rows.iter().find(|r| r.built != r.predicted) {
        return Err(CliError::CountMismatch(format!(
            "{:?} {:?} k={} N={}: built {} vs formula {}",
            r.backend, r.order, r.steps, r.n, r.built, r.predicted
        )));
    }
    Ok(rows)
}

pub fn gate_count_report(sizes: &[usize], max_steps: usize) -> CliResult<GateReport> {
    Ok(GateReport { pairs: pair_rows()?, formulas: formula_rows(sizes, max_steps)? })
}

pub fn write_report(cfg: &ExperimentConfig, report: &GateReport, dir: &Path) -> CliResult<Written> {
    let stem = output::stem(cfg);
    let pairs = dir.join(format!("{stem}-pairs.csv"));
    let formulas = dir.join(format!("{stem}-formulas.csv"));
    output::write_csv(&pairs, PAIR_SCHEMA, cfg, &report.pairs)?;
    output::write_csv(&formulas, FORMULA_SCHEMA, cfg, &report.formulas)?;
    let sidecar = dir.join(format!("{stem}.json"));
    let mismatched: Vec<_> = report.pairs.iter().filter(|r| !r.matches).collect();
    output::write_sidecar(
        &sidecar,
        PAIR_SCHEMA,
        cfg,
        &[pairs.clone(), formulas.clone()],
        json!({ "pair_mismatches": mismatched }),
    )?;
    Ok(Written { csv: vec![pairs, formulas], json: sidecar })
}

/// Plain-text table for the terminal.
pub fn render(report: &GateReport) -> String {
    let mut s = String::from("backend   topology    count  depth  reference\n");
    for r in &report.pairs {
        let backend = serde_json::to_value(r.backend).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        s.push_str(&format!(
            "{backend:<9} {:<11} {:>5} {:>6}  {}/{}{}\n",
            r.topology,
            r.entangling,
            r.depth,
            r.reference_entangling,
            r.reference_depth,
            if r.matches { "" } else { "  (differs)" }
        ));
    }
    s.push_str(&format!("{} built Trotter circuits agree with the closed-form counts\n", report.formulas.len()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_agrees() {
        let rows = formula_rows(&[2, 3], 3).unwrap();
        assert_eq!(rows.len(), 3 * 3 * 3 * 2);
        let lo_b = rows.iter().find(|r| r.backend == Backend::QubitB && r.order == Order::Lo && r.n == 2 && r.steps == 1);
        assert_eq!(lo_b.unwrap().built, 18);
    }

    #[test]
    fn all_to_all_rows_match_reference() {
        let rows = pair_rows().unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows.iter().filter(|r| r.topology == "all-to-all") {
            assert!(r.matches, "{r:?}");
        }
    }
}
