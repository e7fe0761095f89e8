//! Native qutrit gate set and the qutrit circuits for the one-body term,
//! the PMNS change of basis and the pairwise `λ·λ` interaction.

use std::f64::consts::PI;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{lambda_dot_lambda, pmns_matrix, Basis, MixingParameters, NeutrinoSystem};
use crate::linalg::{self, c, cis, CMat, C64, ONE, ZERO};
use crate::qudit::{Gate, GateRole, RegisterShape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QutritGate {
    X12(f64),
    Ry01(f64),
    Ry12(f64),
    /// `{0,2}` analogue of `Ry01`.
    Ry02(f64),
    Ph(f64, f64, f64),
    Rz01(f64),
    Rz12(f64),
    /// `{0,2}` analogue of `Rz01`: `Ph(−θ/2, 0, θ/2)`.
    Rz02(f64),
    Cx,
    CxDagger,
    Cz,
    Hadamard3,
}

fn omega3() -> C64 {
    cis(2.0 * PI / 3.0)
}

impl QutritGate {
    pub fn arity(&self) -> usize {
        match self {
            QutritGate::Cx | QutritGate::CxDagger | QutritGate::Cz => 2,
            _ => 1,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            QutritGate::X12(_) => "x12",
            QutritGate::Ry01(_) => "ry01",
            QutritGate::Ry12(_) => "ry12",
            QutritGate::Ry02(_) => "ry02",
            QutritGate::Ph(..) => "ph",
            QutritGate::Rz01(_) => "rz01",
            QutritGate::Rz12(_) => "rz12",
            QutritGate::Rz02(_) => "rz02",
            QutritGate::Cx => "cx3",
            QutritGate::CxDagger => "cx3_dg",
            QutritGate::Cz => "cz3",
            QutritGate::Hadamard3 => "h3",
        }
    }

    pub fn matrix(&self) -> CMat {
        let rot = |a: f64, i: usize, j: usize| {
            let (s, co) = (a / 2.0).sin_cos();
            let mut m = linalg::identity(3);
            m[(i, i)] = c(co, 0.0);
            m[(j, j)] = c(co, 0.0);
            m[(i, j)] = c(-s, 0.0);
            m[(j, i)] = c(s, 0.0);
            m
        };
        match *self {
            QutritGate::X12(a) => {
                let (s, co) = (a / 2.0).sin_cos();
                linalg::from_rows(&[
                    &[ONE, ZERO, ZERO],
                    &[ZERO, c(co, 0.0), c(0.0, -s)],
                    &[ZERO, c(0.0, -s), c(co, 0.0)],
                ])
            }
            QutritGate::Ry01(a) => rot(a, 0, 1),
            QutritGate::Ry12(a) => rot(a, 1, 2),
            QutritGate::Ry02(a) => rot(a, 0, 2),
            QutritGate::Ph(t, p, l) => linalg::diag(&[cis(t), cis(p), cis(l)]),
            QutritGate::Rz01(t) => QutritGate::Ph(-t / 2.0, t / 2.0, 0.0).matrix(),
            QutritGate::Rz12(p) => QutritGate::Ph(0.0, -p / 2.0, p / 2.0).matrix(),
            QutritGate::Rz02(t) => QutritGate::Ph(-t / 2.0, 0.0, t / 2.0).matrix(),
            QutritGate::Cx => {
                let mut m = CMat::zeros(9, 9);
                for x in 0..3 {
                    for y in 0..3 {
                        m[(3 * x + (x + y) % 3, 3 * x + y)] = ONE;
                    }
                }
                m
            }
            QutritGate::CxDagger => QutritGate::Cx.matrix().adjoint(),
            QutritGate::Cz => {
                let w = omega3();
                let entries: Vec<C64> = (0..9).map(|k| w.powu(((k / 3) * (k % 3)) as u32)).collect();
                linalg::diag(&entries)
            }
            QutritGate::Hadamard3 => {
                let w = omega3();
                let w2 = w * w;
                linalg::from_rows(&[&[ONE, ONE, ONE], &[ONE, w, w2], &[ONE, w2, w]]).scale(1.0 / 3f64.sqrt())
            }
        }
    }

    pub fn on(&self, sites: &[usize], role: GateRole) -> Result<Gate> {
        if sites.len() != self.arity() {
            return Err(Error::Dimension(format!("{} acts on {} qutrits", self.tag(), self.arity())));
        }
        Gate::new(self.tag(), self.matrix(), sites.to_vec(), role)
    }
}

/// Two-qutrit SWAP.
pub fn swap9() -> CMat {
    let mut m = CMat::zeros(9, 9);
    for a in 0..3 {
        for b in 0..3 {
            m[(3 * b + a, 3 * a + b)] = ONE;
        }
    }
    m
}

/// PMNS gate sequence in application order; its product equals `pmns_matrix`
/// up to a global phase.
///
/// Rotation angles enter as `Ry(∓2θ)` because the gate set uses half angles,
/// and the `{0,2}` phase is `Rz02(−π + δ)`.
pub fn pmns_gates(m: &MixingParameters) -> Vec<QutritGate> {
    let phi = -PI + m.delta_cp;
    vec![
        QutritGate::Ry01(-2.0 * m.theta12),
        QutritGate::Rz02(-phi),
        QutritGate::Ry02(2.0 * m.theta13),
        QutritGate::Rz02(phi),
        QutritGate::Ry12(-2.0 * m.theta23),
    ]
}

pub fn pmns_circuit(m: &MixingParameters) -> Result<Circuit> {
    let mut circ = Circuit::new(RegisterShape::uniform(1, 3)?, 1)?;
    for g in pmns_gates(m) {
        circ.push(g.on(&[0], GateRole::BasisChange)?)?;
    }
    Ok(circ)
}

/// Phase-aligned residual and global phase of `pmns_circuit` against `pmns_matrix`.
pub fn pmns_discrepancy(m: &MixingParameters) -> Result<(f64, f64)> {
    let built = pmns_circuit(m)?.unitary()?;
    let target = pmns_matrix(m);
    Ok((linalg::phase_aligned_distance(&built, &target), linalg::relative_phase(&built, &target)))
}

/// `e^{−i t h_i}` on every qutrit: one phase gate per site in the mass basis,
/// conjugated by the PMNS circuit in the flavor basis.
pub fn one_body_step_qutrit(sys: &NeutrinoSystem, t: f64) -> Result<Circuit> {
    let mut circ = Circuit::new(sys.shape(), 1)?;
    let ph = QutritGate::Ph(0.0, -sys.small_omega() * t, -sys.big_omega() * t);
    let basis_change = pmns_gates(&sys.mixing);
    for s in 0..sys.n {
        if sys.basis == Basis::Flavor {
            for g in basis_change.iter().rev() {
                circ.push(g.on(&[s], GateRole::OneBody)?.dagger())?;
            }
        }
        circ.push(ph.on(&[s], GateRole::OneBody)?)?;
        if sys.basis == Basis::Flavor {
            for g in &basis_change {
                circ.push(g.on(&[s], GateRole::OneBody)?)?;
            }
        }
    }
    Ok(circ)
}

/// Which qutrit carries the two-level rotation of the pair circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOrientation {
    RotateFirst,
    RotateSecond,
}

/// `CX(a→b) · CX(b→a) · X12(4α) · Ph(−2α,0,0) · CX†(b→a) · CX†(a→b)` with the
/// single-qutrit gates on `a`.
///
/// The first `CX` stores `x + y` on `b`; the shift controlled by `b` then maps
/// the pair exchanged by SWAP onto levels `{1,2}` of `a`, where `e^{−2iα SWAP}`
/// is a single `X12` rotation plus a phase on the fixed level.
pub fn pair_circuit(alpha: f64, orientation: PairOrientation) -> Result<Circuit> {
    let (a, b) = match orientation {
        PairOrientation::RotateFirst => (0, 1),
        PairOrientation::RotateSecond => (1, 0),
    };
    let role = GateRole::TwoBody;
    let mut circ = Circuit::new(RegisterShape::uniform(2, 3)?, 1)?;
    circ.push(QutritGate::Cx.on(&[a, b], role)?)?;
    circ.push(QutritGate::Cx.on(&[b, a], role)?)?;
    circ.push(QutritGate::X12(4.0 * alpha).on(&[a], role)?)?;
    circ.push(QutritGate::Ph(-2.0 * alpha, 0.0, 0.0).on(&[a], role)?)?;
    circ.push(QutritGate::CxDagger.on(&[b, a], role)?)?;
    circ.push(QutritGate::CxDagger.on(&[a, b], role)?)?;
    Ok(circ)
}

pub const PAIR_GUARD: f64 = 1e-8;

/// `e^{−iα λ·λ}` on two qutrits with four entangling gates, verified on construction.
pub fn two_body_gate_qutrit(alpha: f64) -> Result<(Circuit, PairOrientation)> {
    let target = linalg::expm_herm(&lambda_dot_lambda(), alpha);
    let mut worst: f64 = 0.0;
    for orientation in [PairOrientation::RotateFirst, PairOrientation::RotateSecond] {
        let circ = pair_circuit(alpha, orientation)?;
        let d = linalg::phase_aligned_distance(&circ.unitary()?, &target);
        if d <= PAIR_GUARD {
            return Ok((circ, orientation));
        }
        worst = worst.max(d);
    }
    Err(Error::Verification { what: "qutrit pair circuit".into(), deviation: worst })
}

/// Global phase `e^{−iπ/3}` relating `e^{−i(π/4)λ·λ}` to SWAP.
pub fn swap_phase() -> C64 {
    cis(-PI / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{one_body_h, Flavor};
    use crate::linalg::{kron, max_abs, phase_aligned_distance, unitarity_defect};
    use crate::qudit::QuditState;

    fn unit(re: f64) -> C64 {
        c(re, 0.0)
    }

    #[test]
    fn all_gates_unitary() {
        let gates = [
            QutritGate::X12(0.3),
            QutritGate::Ry01(1.1),
            QutritGate::Ry12(-0.4),
            QutritGate::Ry02(2.0),
            QutritGate::Ph(0.1, 0.2, 0.3),
            QutritGate::Rz01(0.5),
            QutritGate::Rz12(0.6),
            QutritGate::Rz02(0.7),
            QutritGate::Cx,
            QutritGate::CxDagger,
            QutritGate::Cz,
            QutritGate::Hadamard3,
        ];
        for g in gates {
            assert!(unitarity_defect(&g.matrix()) < 1e-12, "{:?}", g);
        }
    }

    #[test]
    fn spot_entries() {
        let x = QutritGate::X12(PI).matrix();
        assert!((x[(1, 2)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(x[(1, 1)].norm() < 1e-15);
        let r = QutritGate::Ry01(PI).matrix();
        assert!((r[(0, 1)] - unit(-1.0)).norm() < 1e-15);
        let rz = QutritGate::Rz12(1.0).matrix();
        assert!((rz[(2, 2)] - cis(0.5)).norm() < 1e-15);
    }

    #[test]
    fn cx_shifts_target() {
        let shape = RegisterShape::uniform(2, 3).unwrap();
        let mut psi = QuditState::basis(shape, &[1, 1]).unwrap();
        psi.apply_gate(&QutritGate::Cx.on(&[0, 1], GateRole::Other).unwrap()).unwrap();
        assert!((psi.amplitudes()[5] - ONE).norm() < 1e-15);
    }

    #[test]
    fn cz_from_cx_by_hadamard_conjugation() {
        let h = QutritGate::Hadamard3.matrix();
        let one = linalg::identity(3);
        let built = kron(&one, &h) * QutritGate::Cx.matrix() * kron(&one, &h.adjoint());
        assert!(max_abs(&(built - QutritGate::Cz.matrix())) < 1e-12);
    }

    #[test]
    fn pmns_circuit_reproduces_matrix() {
        let (residual, _) = pmns_discrepancy(&MixingParameters::central()).unwrap();
        assert!(residual < 1e-10);
        let trivial = MixingParameters { theta12: 0.0, theta13: 0.0, theta23: 0.0, delta_cp: PI, ..MixingParameters::central() };
        assert!(pmns_discrepancy(&trivial).unwrap().0 < 1e-12);
    }

    #[test]
    fn one_body_phase_gate_is_exact() {
        let sys = NeutrinoSystem::cone(Basis::Mass, vec![Flavor::E]).unwrap();
        let u = one_body_step_qutrit(&sys, 1.0).unwrap().unitary().unwrap();
        let e = sys.mass_energies();
        let expect = linalg::diag(&[ONE, cis(-e[1]), cis(-e[2])]);
        assert!(max_abs(&(u - expect)) < 1e-15);
        let zero = one_body_step_qutrit(&sys, 0.0).unwrap().unitary().unwrap();
        assert!(max_abs(&(zero - linalg::identity(3))) < 1e-15);
        for basis in [Basis::Mass, Basis::Flavor] {
            let sys = NeutrinoSystem::cone(basis, vec![Flavor::E, Flavor::Tau]).unwrap();
            let u = one_body_step_qutrit(&sys, 2.5).unwrap().unitary().unwrap();
            let exact = one_body_h(&sys).unwrap().propagator(2.5);
            assert!(phase_aligned_distance(&u, &exact) < 1e-12);
        }
    }

    #[test]
    fn pair_circuit_matches_exponential() {
        for alpha in [0.0, PI / 8.0, 0.37, 2.9] {
            let (circ, orientation) = two_body_gate_qutrit(alpha).unwrap();
            assert_eq!(orientation, PairOrientation::RotateFirst);
            assert_eq!(circ.entangling_count(), 4);
            let target = linalg::expm_herm(&lambda_dot_lambda(), alpha);
            assert!(phase_aligned_distance(&circ.unitary().unwrap(), &target) < 1e-10);
            let mirrored = pair_circuit(alpha, PairOrientation::RotateSecond).unwrap();
            assert!(phase_aligned_distance(&mirrored.unitary().unwrap(), &target) < 1e-10);
        }
    }

    #[test]
    fn quarter_turn_is_swap_with_phase() {
        let u = linalg::expm_herm(&lambda_dot_lambda(), PI / 4.0);
        let expect = swap9().map(|z| z * swap_phase());
        assert!(max_abs(&(u - expect)) < 1e-12);
    }
}
