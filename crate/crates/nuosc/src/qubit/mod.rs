//! Two-qubit-per-neutrino encoding and its circuits.
//!
//! Flavor `f` of neutrino `k` is stored as the bits of `f` on qubits
//! `2k` (high) and `2k + 1` (low): `e → 00`, `μ → 01`, `τ → 10`. The state
//! `11` is unphysical.

pub mod kak;
pub mod routing;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{lambda_dot_lambda, Basis, NeutrinoSystem};
use crate::linalg::{self, c, cis, CMat, ONE, ZERO};
use crate::qudit::{Gate, GateRole, QuditState, RegisterShape};

pub use routing::{route_linear_chain, RoutedCircuit};

pub fn rz(theta: f64) -> CMat {
    linalg::diag(&[cis(-theta / 2.0), cis(theta / 2.0)])
}

pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    linalg::real(&[&[co, -s], &[s, co]])
}

pub fn rx(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    linalg::from_rows(&[&[c(co, 0.0), c(0.0, -s)], &[c(0.0, -s), c(co, 0.0)]])
}

pub fn hadamard() -> CMat {
    linalg::real(&[&[1.0, 1.0], &[1.0, -1.0]]).scale(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn s_gate() -> CMat {
    linalg::diag(&[ONE, c(0.0, 1.0)])
}

/// CNOT with the first site as control.
pub fn cnot() -> CMat {
    linalg::real(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn cz() -> CMat {
    linalg::real(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, -1.0],
    ])
}

pub fn cx_gate(control: usize, target: usize, role: GateRole) -> Gate {
    Gate::new("cx", cnot(), vec![control, target], role).expect("cnot is unitary")
}

pub fn cz_gate(a: usize, b: usize, role: GateRole) -> Gate {
    Gate::new("cz", cz(), vec![a, b], role).expect("cz is unitary")
}

/// Qubit index of the physical basis state of `N` neutrinos with flavor digits `digits`.
pub fn encode_index(digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &f| acc * 4 + f)
}

/// Qubit indices of all physical states, in qutrit order.
pub fn physical_indices(n_neutrinos: usize) -> Vec<usize> {
    let shape = RegisterShape::uniform(n_neutrinos, 3).expect("n >= 1");
    (0..shape.total_dim()).map(|i| encode_index(&shape.digits(i))).collect()
}

pub fn encode_state(state: &QuditState) -> Result<QuditState> {
    let shape = state.shape();
    if shape.dims().iter().any(|&d| d != 3) {
        return Err(Error::Dimension("encoding expects a qutrit register".into()));
    }
    let n = shape.n_sites();
    let qshape = RegisterShape::uniform(2 * n, 2)?;
    let mut amps = vec![ZERO; qshape.total_dim()];
    for (i, &q) in physical_indices(n).iter().enumerate() {
        amps[q] = state.amplitudes()[i];
    }
    QuditState::from_amplitudes(qshape, amps)
}

/// Physical part of a qubit state and the norm left in unphysical states.
pub fn decode_state(state: &QuditState) -> Result<(QuditState, f64)> {
    let shape = state.shape();
    if shape.dims().iter().any(|&d| d != 2) || shape.n_sites() % 2 != 0 {
        return Err(Error::Dimension("decoding expects an even qubit register".into()));
    }
    let n = shape.n_sites() / 2;
    let idx = physical_indices(n);
    let amps: Vec<_> = idx.iter().map(|&q| state.amplitudes()[q]).collect();
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let out = QuditState::from_amplitudes(RegisterShape::uniform(n, 3)?, amps)?;
    Ok((out, (1.0 - kept).max(0.0)))
}

/// `block(v, 1)` on two qubits.
pub fn embed_physical(v: &CMat) -> CMat {
    let mut m = linalg::identity(4);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = v[(i, j)];
        }
    }
    m
}

/// `e^{−i t h_k}` for every neutrino: two `Rz` per neutrino in the mass basis,
/// a three-CNOT synthesis of the embedded flavor propagator otherwise.
pub fn one_body_step_qubit(sys: &NeutrinoSystem, t: f64) -> Result<Circuit> {
    let shape = RegisterShape::uniform(2 * sys.n, 2)?;
    let mut circ = Circuit::new(shape, 2)?;
    match sys.basis {
        Basis::Mass => {
            for k in 0..sys.n {
                circ.push(Gate::new("rz", rz(-sys.big_omega() * t), vec![2 * k], GateRole::OneBody)?)?;
                circ.push(Gate::new("rz", rz(-sys.small_omega() * t), vec![2 * k + 1], GateRole::OneBody)?)?;
            }
        }
        Basis::Flavor => {
            let v = linalg::expm_herm(&sys.one_body_site(), t);
            let gates = kak::three_cnot_gates(&embed_physical(&v), [0, 1], GateRole::OneBody)?;
            for k in 0..sys.n {
                for g in &gates {
                    let mut h = g.clone();
                    h.sites = g.sites.iter().map(|&s| 2 * k + s).collect();
                    circ.push(h)?;
                }
            }
        }
    }
    Ok(circ)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    A,
    B,
}

#[derive(Debug, Clone, Copy)]
enum Rot {
    H,
    S,
    /// Angle `offset + k·α`.
    Rz(f64, f64),
    Ry(f64, f64),
    Rx(f64, f64),
}

#[derive(Debug, Clone, Copy)]
enum Op {
    U(usize, Rot),
    Cx(usize, usize),
    Cz(usize, usize),
}

use Op::{Cx, Cz, U};
use Rot::{Rx, Ry, Rz, H, S};

const HP: f64 = FRAC_PI_2;
const QP: f64 = FRAC_PI_4;

/// Figure transcription of circuit A, one column per row, wires 0..3 top to bottom.
const CIRCUIT_A: &[&[Op]] = &[
    &[U(2, Rz(-HP, 0.0)), U(3, Rz(-HP, 0.0))],
    &[Cx(3, 1)],
    &[Cx(2, 0)],
    &[U(0, Rz(HP, 1.0)), U(1, Rz(HP, 1.0)), U(2, Ry(-HP, -1.0)), U(3, Ry(-HP, -1.0))],
    &[Cx(1, 3)],
    &[Cx(0, 2)],
    &[U(2, Ry(HP, 1.0)), U(3, Ry(HP, 1.0))],
    &[Cx(3, 1)],
    &[Cx(2, 0)],
    &[U(0, Rz(HP, 0.0)), U(1, Rz(HP, 0.0))],
    &[Cz(1, 2)],
    &[Cz(0, 3)],
    &[U(0, H), U(1, H), U(2, H), U(3, H)],
    &[U(0, S), U(1, S), U(2, S), U(3, S)],
    &[Cx(0, 2)],
    &[Cx(1, 3)],
    &[U(0, Rx(0.0, 1.0)), U(1, Rx(0.0, 1.0)), U(2, Rz(0.0, 1.0)), U(3, Rz(0.0, 1.0))],
    &[Cx(0, 2)],
    &[Cx(1, 3)],
    &[U(0, Rz(-HP, 0.0)), U(2, Rz(-HP, 0.0))],
    &[U(0, H), U(2, H)],
    &[Cx(2, 1)],
    &[Cx(0, 3)],
    &[U(0, Rz(-HP, 0.0)), U(2, Rz(-HP, 0.0))],
    &[U(0, H), U(1, H), U(2, H), U(3, H)],
    &[U(0, S), U(1, S), U(2, S), U(3, S)],
    &[Cx(1, 3)],
    &[Cx(0, 2)],
    &[U(0, Rx(0.0, 1.0)), U(1, Rx(0.0, 1.0)), U(2, Rz(0.0, 1.0))],
    &[Cx(1, 3)],
    &[Cx(0, 2)],
    &[U(0, Rz(-HP, 0.0)), U(2, Rz(-HP, 0.0))],
    &[U(0, H), U(2, H)],
    &[Cx(2, 1)],
    &[Cx(0, 3)],
    &[U(0, Rz(-HP, 0.0)), U(2, Rz(-HP, 0.0))],
    &[U(0, H), U(2, H)],
    &[U(0, S), U(2, S)],
    &[Cx(0, 2)],
    &[U(0, Rx(0.0, 1.0)), U(2, Rz(0.0, 1.0))],
    &[Cx(0, 2)],
    &[U(0, Rz(-HP, 0.0)), U(2, Rz(-HP, 0.0))],
    &[U(0, H), U(2, H)],
    &[Cz(0, 3)],
    &[Cz(1, 2)],
    &[U(1, H), U(3, H)],
    &[U(1, S), U(3, S)],
];

/// Figure transcription of circuit B.
const CIRCUIT_B: &[&[Op]] = &[
    &[Cx(0, 2)],
    &[Cx(1, 3)],
    &[U(0, Ry(QP, 0.0)), U(1, Ry(QP, 0.0))],
    &[Cx(2, 0)],
    &[Cx(3, 1)],
    &[U(0, Ry(-QP, 0.0)), U(1, Ry(-QP, 0.0)), U(2, Rz(0.0, -1.0)), U(3, Rz(0.0, -1.0))],
    &[Cx(0, 2)],
    &[Cx(1, 3)],
    &[Cx(0, 1)],
    &[U(1, Rz(0.0, -2.0)), U(2, Rz(0.0, 1.0)), U(3, Rz(0.0, 1.0))],
    &[Cx(0, 1)],
    &[Cx(1, 2)],
    &[U(2, Rz(0.0, 1.0))],
    &[Cx(0, 2)],
    &[U(2, Rz(0.0, -1.0))],
    &[Cx(0, 3)],
    &[Cx(1, 2)],
    &[U(3, Rz(0.0, 1.0))],
    &[Cx(1, 3)],
    &[U(3, Rz(0.0, -1.0))],
    &[Cx(0, 3)],
    &[U(0, Ry(QP, 0.0)), U(1, Ry(QP, 0.0))],
    &[Cx(3, 1)],
    &[Cx(2, 0)],
    &[U(0, Ry(-QP, 0.0)), U(1, Ry(-QP, 0.0))],
    &[Cx(1, 3)],
    &[Cx(0, 2)],
];

impl Rot {
    fn matrix(self, alpha: f64) -> (&'static str, CMat) {
        match self {
            H => ("h", hadamard()),
            S => ("s", s_gate()),
            Rz(o, k) => ("rz", rz(o + k * alpha)),
            Ry(o, k) => ("ry", ry(o + k * alpha)),
            Rx(o, k) => ("rx", rx(o + k * alpha)),
        }
    }
}

/// The drawn circuit with `alpha` substituted literally into its rotation angles.
pub fn figure_circuit(alpha: f64, variant: Variant) -> Result<Circuit> {
    let table = match variant {
        Variant::A => CIRCUIT_A,
        Variant::B => CIRCUIT_B,
    };
    let mut circ = Circuit::new(RegisterShape::uniform(4, 2)?, 2)?;
    let role = GateRole::TwoBody;
    for column in table {
        for op in column.iter() {
            let gate = match *op {
                U(q, r) => {
                    let (tag, m) = r.matrix(alpha);
                    Gate::new(tag, m, vec![q], role)?
                }
                Cx(a, b) => cx_gate(a, b, role),
                Cz(a, b) => cz_gate(a, b, role),
            };
            circ.push(gate)?;
        }
    }
    Ok(circ)
}

/// Figure angle that realizes `e^{−iα λ·λ}`.
///
/// Circuit B as drawn implements `e^{+iα λ·λ}`, so its angles are negated.
pub fn figure_angle(alpha: f64, variant: Variant) -> f64 {
    match variant {
        Variant::A => alpha,
        Variant::B => -alpha,
    }
}

pub fn pair_target(alpha: f64) -> CMat {
    linalg::expm_herm(&lambda_dot_lambda(), alpha)
}

pub const TRANSCRIPTION_GUARD: f64 = 1e-8;

/// `e^{−iα λ·λ}` on the physical subspace of qubits `(0,1)` and `(2,3)`.
pub fn two_body_gate_qubit(alpha: f64, variant: Variant) -> Result<Circuit> {
    let circ = figure_circuit(figure_angle(alpha, variant), variant)?;
    let report = subspace_report(&circ, &pair_target(alpha))?;
    let worst = report.physical_block_distance.max(report.leakage);
    if worst > TRANSCRIPTION_GUARD {
        return Err(Error::Verification { what: format!("circuit {variant:?}"), deviation: worst });
    }
    Ok(circ)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SubspaceReport {
    pub physical_block_distance: f64,
    pub leakage: f64,
    pub unphysical_block_unitarity_defect: f64,
}

/// Block structure of a qubit circuit against a target on the physical subspace.
pub fn subspace_report(circ: &Circuit, target: &CMat) -> Result<SubspaceReport> {
    subspace_report_unitary(&circ.unitary()?, target)
}

pub fn subspace_report_unitary(u: &CMat, target: &CMat) -> Result<SubspaceReport> {
    let d = u.nrows();
    let n = (d.trailing_zeros() / 2) as usize;
    if d != 1 << (2 * n) || target.nrows() != 3usize.pow(n as u32) {
        return Err(Error::Dimension("target does not match the physical subspace".into()));
    }
    let phys = physical_indices(n);
    let unphys: Vec<usize> = (0..d).filter(|i| !phys.contains(i)).collect();
    let block = |rows: &[usize], cols: &[usize]| CMat::from_fn(rows.len(), cols.len(), |r, k| u[(rows[r], cols[k])]);
    let pp = block(&phys, &phys);
    let leak = linalg::max_abs(&block(&unphys, &phys)).max(linalg::max_abs(&block(&phys, &unphys)));
    let qq = block(&unphys, &unphys);
    Ok(SubspaceReport {
        physical_block_distance: linalg::phase_aligned_distance(&pp, target),
        leakage: leak,
        unphysical_block_unitarity_defect: linalg::unitarity_defect(&qq),
    })
}

/// `exp(−i(α/2) Σ (σ_a⊗σ_b)⊗(σ_a⊗σ_b))` over the 15 non-identity Pauli pairs.
pub fn pauli_pair_exponential(alpha: f64) -> CMat {
    let paulis = [
        linalg::identity(2),
        linalg::real(&[&[0.0, 1.0], &[1.0, 0.0]]),
        linalg::from_rows(&[&[ZERO, c(0.0, -1.0)], &[c(0.0, 1.0), ZERO]]),
        linalg::real(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ];
    let mut g = CMat::zeros(16, 16);
    for a in 0..4 {
        for b in 0..4 {
            if a == 0 && b == 0 {
                continue;
            }
            let p = linalg::kron(&paulis[a], &paulis[b]);
            g += linalg::kron(&p, &p);
        }
    }
    linalg::expm_herm(&g, alpha / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Flavor;
    use crate::linalg::{max_abs, phase_aligned_distance};
    use crate::qutrit::swap9;

    #[test]
    fn encoding_round_trip() {
        let sys = NeutrinoSystem::cone(Basis::Flavor, vec![Flavor::Tau, Flavor::Mu]).unwrap();
        let q = encode_state(&sys.initial_state()).unwrap();
        let idx = q.shape().index(&[1, 0, 0, 1]).unwrap();
        assert!((q.amplitudes()[idx] - ONE).norm() < 1e-15);
        let (back, leak) = decode_state(&q).unwrap();
        assert_eq!(back, sys.initial_state());
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn mass_basis_one_body() {
        let sys = NeutrinoSystem::cone(Basis::Mass, vec![Flavor::E]).unwrap();
        let t = 2.3;
        let circ = one_body_step_qubit(&sys, t).unwrap();
        assert_eq!(circ.entangling_count(), 0);
        let e = sys.mass_energies();
        let target = linalg::diag(&[ONE, cis(-e[1] * t), cis(-e[2] * t)]);
        let r = subspace_report(&circ, &target).unwrap();
        assert!(r.physical_block_distance < 1e-12 && r.leakage < 1e-15);
        let zero = one_body_step_qubit(&sys, 0.0).unwrap().unitary().unwrap();
        assert!(max_abs(&(zero - linalg::identity(4))) < 1e-15);
    }

    #[test]
    fn flavor_basis_one_body() {
        let sys = NeutrinoSystem::cone(Basis::Flavor, vec![Flavor::E]).unwrap();
        let t = 3.0;
        let circ = one_body_step_qubit(&sys, t).unwrap();
        assert_eq!(circ.entangling_count(), 3);
        let target = linalg::expm_herm(&sys.one_body_site(), t);
        let r = subspace_report(&circ, &target).unwrap();
        assert!(r.physical_block_distance < 1e-10 && r.leakage < 1e-10);
    }

    #[test]
    fn circuits_reproduce_pair_exponential() {
        for variant in [Variant::A, Variant::B] {
            for alpha in [0.0, 0.3, 1.7, 4.0] {
                let circ = two_body_gate_qubit(alpha, variant).unwrap();
                let r = subspace_report(&circ, &pair_target(alpha)).unwrap();
                assert!(r.physical_block_distance < 1e-10, "{variant:?} {alpha}");
                assert!(r.leakage < 1e-12);
            }
        }
        assert_eq!(two_body_gate_qubit(0.2, Variant::A).unwrap().entangling_count(), 24);
        assert_eq!(two_body_gate_qubit(0.2, Variant::B).unwrap().entangling_count(), 18);
    }

    #[test]
    fn circuit_b_as_drawn_has_opposite_sign() {
        let alpha = 0.4;
        let drawn = figure_circuit(alpha, Variant::B).unwrap();
        let r = subspace_report(&drawn, &pair_target(-alpha)).unwrap();
        assert!(r.physical_block_distance < 1e-10);
        let wrong = subspace_report(&drawn, &pair_target(alpha)).unwrap();
        assert!(wrong.physical_block_distance > 1e-2);
    }

    #[test]
    fn quarter_turn_is_qutrit_swap() {
        let circ = two_body_gate_qubit(FRAC_PI_4, Variant::A).unwrap();
        let r = subspace_report(&circ, &swap9()).unwrap();
        assert!(r.physical_block_distance < 1e-10);
    }

    #[test]
    fn circuit_a_full_unitary() {
        let alpha = 0.77;
        let u = figure_circuit(alpha, Variant::A).unwrap().unitary().unwrap();
        assert!(phase_aligned_distance(&u, &pauli_pair_exponential(alpha)) < 1e-10);
    }

    #[test]
    fn a_and_b_differ_outside_physical_block() {
        let alpha = 0.77;
        let a = two_body_gate_qubit(alpha, Variant::A).unwrap().unitary().unwrap();
        let b = two_body_gate_qubit(alpha, Variant::B).unwrap().unitary().unwrap();
        assert!(phase_aligned_distance(&a, &b) > 1e-3);
    }

    #[test]
    fn corrupted_gate_is_flagged() {
        let alpha = 0.5;
        let mut circ = figure_circuit(alpha, Variant::A).unwrap();
        circ.push(Gate::new("ry", ry(0.3), vec![1], GateRole::Other).unwrap()).unwrap();
        let r = subspace_report(&circ, &pair_target(alpha)).unwrap();
        assert!(r.leakage > 1e-3);
    }
}
