//! Three-flavor state tomography, physical projection and entanglement measures.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::gell_mann;
use crate::linalg::{self, c, eigh, herm_fn, kron_all, CMat, C64, I, ONE, ZERO};
use crate::mitigation::project_to_simplex;
use crate::qudit::{DensityMatrix, Gate, GateRole, QuditState, RegisterShape};
use crate::record::MeasurementRecord;

pub const POOL_SIZE: usize = 7;
pub const PSD_TOL: f64 = 1e-10;
const SPECTRAL_FLOOR: f64 = 1e-13;

/// Basis-change operator `index` (1..=7) of the pool, acting on an encoded
/// qubit pair. Index 3 is the identity shared by λ₃, λ₈ and λ₉.
pub fn pool_operator(index: usize) -> Result<CMat> {
    let z = ZERO;
    let o = ONE;
    let r = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let m = match index {
        1 => linalg::from_rows(&[&[r, r, z, z], &[r, -r, z, z], &[z, z, o, z], &[z, z, z, o]]),
        2 => linalg::from_rows(&[&[r, -I * r, z, z], &[r, I * r, z, z], &[z, z, o, z], &[z, z, z, o]]),
        3 => linalg::identity(4),
        4 => linalg::from_rows(&[&[r, z, r, z], &[z, o, z, z], &[r, z, -r, z], &[z, z, z, o]]),
        5 => linalg::from_rows(&[&[r, z, -I * r, z], &[z, o, z, z], &[r, z, I * r, z], &[z, z, z, o]]),
        6 => linalg::from_rows(&[&[o, z, z, z], &[z, r, r, z], &[z, r, -r, z], &[z, z, z, o]]),
        7 => linalg::from_rows(&[&[o, z, z, z], &[z, r, -I * r, z], &[z, r, I * r, z], &[z, z, z, o]]),
        other => return Err(Error::Invalid(format!("pool operator {other} outside 1..=7"))),
    };
    Ok(m)
}

/// Physical 3×3 block of a pool operator, for qutrit registers.
pub fn pool_operator_qutrit(index: usize) -> Result<CMat> {
    Ok(pool_operator(index)?.view((0, 0), (3, 3)).into_owned())
}

/// Pool operator measured to obtain the coefficient of `λ_lambda` (1..=9).
pub fn setting_for(lambda: usize) -> usize {
    match lambda {
        3 | 8 | 9 => 3,
        other => other,
    }
}

/// Outcome weights of `c_lambda` over the encoded outcomes `00, 01, 10, 11`.
fn coefficient_weights(lambda: usize) -> [f64; 4] {
    let h = 0.5;
    let s = 1.0 / (2.0 * 3f64.sqrt());
    match lambda {
        1 | 3 => [h, -h, 0.0, 0.0],
        // Sign follows our λ₂.
        2 => [-h, h, 0.0, 0.0],
        4 | 5 => [h, 0.0, -h, 0.0],
        6 | 7 => [0.0, h, -h, 0.0],
        8 => [s, s, -2.0 * s, 0.0],
        9 => [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
        _ => unreachable!("lambda index checked by caller"),
    }
}

fn lambda_matrix(lambda: usize) -> CMat {
    if lambda == 9 {
        linalg::identity(3)
    } else {
        gell_mann(lambda).expect("index in 1..=8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographySetting {
    /// Pool operator index per neutrino, in logical order.
    pub operators: Vec<usize>,
    /// Outcome distribution in logical order; `None` until measured.
    pub record: Option<MeasurementRecord>,
}

/// All `7^n` settings, first neutrino slowest.
pub fn tomography_settings(n: usize) -> Vec<TomographySetting> {
    let total = POOL_SIZE.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut ops = vec![0; n];
            for slot in (0..n).rev() {
                ops[slot] = k % POOL_SIZE + 1;
                k /= POOL_SIZE;
            }
            TomographySetting { operators: ops, record: None }
        })
        .collect()
}

/// Appends the basis change of `operators` to a circuit, following its layout.
pub fn append_basis_change(circuit: &mut Circuit, operators: &[usize]) -> Result<()> {
    if operators.len() != circuit.slots() {
        return Err(Error::Invalid("one pool operator per neutrino expected".into()));
    }
    let g = circuit.group();
    let layout = circuit.layout().to_vec();
    for (slot, &logical) in layout.iter().enumerate() {
        let op = operators[logical];
        if op == 3 {
            continue;
        }
        let m = match g {
            1 => pool_operator_qutrit(op)?,
            _ => pool_operator(op)?,
        };
        let sites = (slot * g..(slot + 1) * g).collect();
        circuit.push(Gate::new(format!("tomo{op}"), m, sites, GateRole::BasisChange)?)?;
    }
    Ok(())
}

/// Noiseless outcome distribution of every setting for a logical qutrit state.
pub fn analytic_settings(state: &QuditState) -> Result<Vec<TomographySetting>> {
    let n = state.shape().n_sites();
    if state.shape().dims().iter().any(|&d| d != 3) {
        return Err(Error::Dimension("analytic tomography expects a qutrit state".into()));
    }
    tomography_settings(n)
        .into_par_iter()
        .map(|mut s| {
            let mut psi = state.clone();
            for (k, &op) in s.operators.iter().enumerate() {
                if op != 3 {
                    psi.apply_matrix(&pool_operator_qutrit(op)?, &[k])?;
                }
            }
            s.record = Some(MeasurementRecord::from_state(&psi));
            Ok(s)
        })
        .collect()
}

/// Linear reconstruction `ρ = Σ c λ⊗…⊗λ` from measured settings.
pub fn reconstruct_rho(settings: &[TomographySetting], n: usize) -> Result<DensityMatrix> {
    let mut table: HashMap<&[usize], &MeasurementRecord> = HashMap::new();
    for s in settings {
        if let Some(rec) = &s.record {
            table.insert(&s.operators, rec);
        }
    }
    let shape = RegisterShape::uniform(n, 3)?;
    let dim = shape.total_dim();
    let lambdas: Vec<CMat> = (1..=9).map(lambda_matrix).collect();
    let mut rho = CMat::zeros(dim, dim);
    let combos = 9usize.pow(n as u32);
    for k in 0..combos {
        let idx: Vec<usize> = (0..n).map(|s| (k / 9usize.pow((n - 1 - s) as u32)) % 9 + 1).collect();
        let ops: Vec<usize> = idx.iter().map(|&l| setting_for(l)).collect();
        let rec = table.get(ops.as_slice()).ok_or_else(|| Error::MissingSetting(ops.clone()))?;
        let coeff = coefficient(rec, &idx)?;
        if coeff == 0.0 {
            continue;
        }
        let term = kron_all(idx.iter().map(|&l| &lambdas[l - 1]));
        rho += term.scale(coeff);
    }
    rho = (&rho + rho.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_matrix(shape, &rho)?.flagged_raw())
}

fn coefficient(rec: &MeasurementRecord, lambdas: &[usize]) -> Result<f64> {
    let n = lambdas.len();
    let base: usize = match rec.dims.as_slice() {
        d if d.len() == n && d.iter().all(|&x| x == 3) => 3,
        d if d.len() == 2 * n && d.iter().all(|&x| x == 2) => 4,
        _ => return Err(Error::Dimension("record does not match neutrino count".into())),
    };
    let weights: Vec<[f64; 4]> = lambdas.iter().map(|&l| coefficient_weights(l)).collect();
    let mut acc = 0.0;
    for (o, &p) in rec.probabilities.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut w = 1.0;
        for (k, wk) in weights.iter().enumerate() {
            w *= wk[(o / base.pow((n - 1 - k) as u32)) % base];
            if w == 0.0 {
                break;
            }
        }
        acc += w * p;
    }
    Ok(acc)
}

/// Eigenvalue projection onto the simplex with eigenvectors kept.
pub fn closest_physical(rho_raw: &DensityMatrix) -> Result<DensityMatrix> {
    let (values, vectors) = eigh(&rho_raw.to_matrix());
    let projected = project_to_simplex(&values);
    let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |r, k| vectors[(r, k)] * projected[k]);
    DensityMatrix::from_matrix(rho_raw.shape().clone(), &(scaled * vectors.adjoint()))
}

/// Top eigenvector of `rho`.
pub fn dominant_state(rho: &DensityMatrix) -> Result<QuditState> {
    let (_, vectors) = eigh(&rho.to_matrix());
    let last = vectors.ncols() - 1;
    QuditState::from_amplitudes(rho.shape().clone(), vectors.column(last).iter().copied().collect())
}

fn check_psd(rho: &CMat) -> Result<()> {
    let (values, _) = eigh(rho);
    match values.first() {
        Some(&v) if v < -PSD_TOL => Err(Error::NotPsd(v)),
        _ => Ok(()),
    }
}

fn chopped_sqrt(x: f64) -> f64 {
    if x < SPECTRAL_FLOOR { 0.0 } else { x.sqrt() }
}

/// Uhlmann fidelity `(Tr √(√ζ ρ √ζ))²`.
pub fn fidelity(rho: &DensityMatrix, zeta: &DensityMatrix) -> Result<f64> {
    if rho.dim() != zeta.dim() {
        return Err(Error::Dimension("fidelity of matrices of different size".into()));
    }
    let (r, z) = (rho.to_matrix(), zeta.to_matrix());
    check_psd(&r)?;
    check_psd(&z)?;
    let root = herm_fn(&z, chopped_sqrt);
    let inner = &root * r * &root;
    let (values, _) = eigh(&inner);
    let tr: f64 = values.into_iter().map(chopped_sqrt).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩`; defined for any Hermitian `ρ`, including raw estimates.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &QuditState) -> Result<f64> {
    if rho.dim() != psi.shape().total_dim() {
        return Err(Error::Dimension("fidelity of objects of different size".into()));
    }
    let v = linalg::CVec::from_column_slice(psi.amplitudes());
    let val: C64 = (v.adjoint() * rho.to_matrix() * &v)[(0, 0)];
    Ok(val.re)
}

/// Von Neumann entropy in nats.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = rho.eigenvalues();
    if let Some(&v) = values.first() {
        if v < -PSD_TOL {
            return Err(Error::NotPsd(v));
        }
    }
    Ok(values.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum::<f64>().max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedState {
    pub rho_raw: DensityMatrix,
    pub rho_physical: DensityMatrix,
    pub rho_pure: DensityMatrix,
    pub pure_state: QuditState,
    pub settings: usize,
    pub shots: Option<u64>,
    pub mitigation: String,
}

impl ReconstructedState {
    /// Reconstructs after multiplying every coefficient by `scale`.
    pub fn from_settings(settings: &[TomographySetting], n: usize, scale: f64, mitigation: impl Into<String>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Invalid(format!("coefficient scale {scale} must be positive")));
        }
        let raw = reconstruct_rho(settings, n)?;
        let rho_raw = DensityMatrix::from_matrix(raw.shape().clone(), &raw.to_matrix().scale(scale))?.flagged_raw();
        let rho_physical = closest_physical(&rho_raw)?;
        let pure_state = dominant_state(&rho_physical)?;
        let rho_pure = pure_state.to_density();
        let shots = settings.iter().filter_map(|s| s.record.as_ref()?.shots).max();
        Ok(Self { rho_raw, rho_physical, rho_pure, pure_state, settings: settings.len(), shots, mitigation: mitigation.into() })
    }
}

/// Coefficient rescaling shared by all settings, from the identity-circuit
/// persistence `p_id` and its fixed point `d`.
pub fn shared_dr_factor(p_id: f64, d: f64) -> Result<f64> {
    let denom = p_id - d;
    if denom <= crate::mitigation::DR_GUARD {
        return Err(Error::Invalid(format!("identity persistence {p_id} does not exceed {d}")));
    }
    Ok((1.0 - d) / denom)
}
