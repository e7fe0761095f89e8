//! Two-qubit KAK decomposition and its three-CNOT circuit.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use super::{cnot, ry, rz};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, C64, ZERO};
use crate::qudit::{Gate, GateRole};

pub const SYNTHESIS_TOL: f64 = 1e-9;

/// `U = e^{iφ} (a0⊗a1) · exp(i(a XX + b YY + c ZZ)) · (b0⊗b1)`.
#[derive(Debug, Clone)]
pub struct Kak {
    pub after: [CMat; 2],
    pub coefficients: [f64; 3],
    pub before: [CMat; 2],
}

fn magic() -> CMat {
    let s = FRAC_1_SQRT_2;
    let i = c(0.0, s);
    let r = c(s, 0.0);
    linalg::from_rows(&[
        &[r, ZERO, ZERO, i],
        &[ZERO, i, r, ZERO],
        &[ZERO, i, -r, ZERO],
        &[r, ZERO, ZERO, -i],
    ])
}

fn paulis() -> [CMat; 3] {
    [
        linalg::real(&[&[0.0, 1.0], &[1.0, 0.0]]),
        linalg::from_rows(&[&[ZERO, c(0.0, -1.0)], &[c(0.0, 1.0), ZERO]]),
        linalg::real(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ]
}

/// `exp(i(a XX + b YY + c ZZ))`.
pub fn canonical(a: f64, b: f64, cc: f64) -> CMat {
    let [x, y, z] = paulis();
    let g = linalg::kron(&x, &x).scale(a) + linalg::kron(&y, &y).scale(b) + linalg::kron(&z, &z).scale(cc);
    linalg::expm_herm(&g, -1.0)
}

fn det4(u: &CMat) -> C64 {
    nalgebra::Matrix4::from_fn(|r, k| u[(r, k)]).determinant()
}

/// Splits a two-qubit product operator into its factors.
fn kron_factor(k: &CMat) -> Result<[CMat; 2]> {
    let (mut r, mut col, mut best) = (0, 0, -1.0);
    for i in 0..4 {
        for j in 0..4 {
            if k[(i, j)].norm() > best {
                best = k[(i, j)].norm();
                r = i;
                col = j;
            }
        }
    }
    let (i1, i2) = (r / 2, r % 2);
    let (j1, j2) = (col / 2, col % 2);
    let pivot = k[(r, col)];
    let mut k1 = CMat::from_fn(2, 2, |a, b| k[(2 * a + i2, 2 * b + j2)]);
    let mut k2 = CMat::from_fn(2, 2, |a, b| k[(2 * i1 + a, 2 * j1 + b)] / pivot);
    for m in [&mut k1, &mut k2] {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.norm() < 1e-12 {
            return Err(Error::Synthesis("local factor is singular".into()));
        }
        *m = m.scale(1.0 / det.norm().sqrt());
    }
    let err = linalg::phase_aligned_distance(k, &linalg::kron(&k1, &k2));
    if err > SYNTHESIS_TOL {
        return Err(Error::Synthesis(format!("local part is not a product (error {err:.2e})")));
    }
    Ok([k1, k2])
}

pub fn decompose(u: &CMat) -> Result<Kak> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::Dimension("KAK expects a 4x4 unitary".into()));
    }
    let defect = linalg::unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    let det = det4(u);
    let u = u.scale(1.0) * cis(-det.arg() / 4.0);
    let b = magic();
    let up = b.adjoint() * &u * &b;
    let m = up.transpose() * &up;

    let mut found = None;
    for x in [0.5, 0.3141, 0.7243, 0.1618, 0.8811, 0.0472, 0.9539, 0.6021] {
        let s = DMatrix::from_fn(4, 4, |r, k| x * m[(r, k)].re + (1.0 - x) * m[(r, k)].im);
        let s = (&s + s.transpose()) * 0.5;
        let o = SymmetricEigen::new(s).eigenvectors;
        let oc = o.map(|v| c(v, 0.0));
        let d = oc.transpose() * &m * &oc;
        let off = (0..4)
            .flat_map(|r| (0..4).map(move |k| (r, k)))
            .filter(|(r, k)| r != k)
            .map(|(r, k)| d[(r, k)].norm())
            .fold(0.0, f64::max);
        if off < 1e-10 {
            found = Some(o);
            break;
        }
    }
    let mut o = found.ok_or_else(|| Error::Synthesis("could not diagonalize the magic-basis square".into()))?;
    if o.determinant() < 0.0 {
        for r in 0..4 {
            o[(r, 0)] = -o[(r, 0)];
        }
    }
    let oc = o.map(|v| c(v, 0.0));
    let d = oc.transpose() * &m * &oc;
    let mut theta: Vec<f64> = (0..4).map(|k| d[(k, k)].arg() / 2.0).collect();
    let prod: C64 = theta.iter().map(|&t| cis(t)).product();
    if prod.re < 0.0 {
        theta[0] += std::f64::consts::PI;
    }
    let a = &up * &oc * linalg::diag(&theta.iter().map(|&t| cis(-t)).collect::<Vec<_>>());
    let k1 = &b * a * b.adjoint();
    let k2 = &b * oc.transpose() * b.adjoint();

    let [x, y, z] = paulis();
    let ops = [linalg::kron(&x, &x), linalg::kron(&y, &y), linalg::kron(&z, &z)];
    let mut sys = DMatrix::<f64>::zeros(4, 4);
    for k in 0..4 {
        let col = b.column(k).into_owned();
        for (j, op) in ops.iter().enumerate() {
            sys[(k, j)] = (col.adjoint() * op * &col)[(0, 0)].re;
        }
        sys[(k, 3)] = 1.0;
    }
    let rhs = nalgebra::DVector::from_vec(theta);
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Synthesis("singular magic-basis system".into()))?;

    Ok(Kak { after: kron_factor(&k1)?, coefficients: [sol[0], sol[1], sol[2]], before: kron_factor(&k2)? })
}

/// At most three CNOTs and eight single-qubit gates realizing `u` on `sites`
/// (first site most significant), verified against `u` up to global phase.
pub fn three_cnot_gates(u: &CMat, sites: [usize; 2], role: GateRole) -> Result<Vec<Gate>> {
    let kak = decompose(u)?;
    let [a, b, cc] = kak.coefficients;
    let [q0, q1] = sites;
    let one = |m: CMat, q: usize| Gate::new("u", m, vec![q], role);
    let cx = |ctrl: usize, tgt: usize| Gate::new("cx", cnot(), vec![ctrl, tgt], role);
    let gates = vec![
        one(kak.before[0].clone(), q0)?,
        one(rz(FRAC_PI_2) * &kak.before[1], q1)?,
        cx(q1, q0)?,
        one(rz(FRAC_PI_2 - 2.0 * cc), q0)?,
        one(ry(FRAC_PI_2 - 2.0 * a), q1)?,
        cx(q0, q1)?,
        one(ry(2.0 * b - FRAC_PI_2), q1)?,
        cx(q1, q0)?,
        one(&kak.after[0] * rz(-FRAC_PI_2), q0)?,
        one(kak.after[1].clone(), q1)?,
    ];
    let got = local_unitary(&gates, sites);
    let err = linalg::phase_aligned_distance(&got, u);
    if err > SYNTHESIS_TOL {
        return Err(Error::Synthesis(format!("three-CNOT circuit misses target by {err:.2e}")));
    }
    Ok(gates)
}

fn local_unitary(gates: &[Gate], sites: [usize; 2]) -> CMat {
    let id = linalg::identity(2);
    let swap = linalg::permutation_matrix(&[0, 2, 1, 3]);
    let mut u = linalg::identity(4);
    for g in gates {
        let m = match g.sites.as_slice() {
            [s] if *s == sites[0] => linalg::kron(&g.matrix, &id),
            [_] => linalg::kron(&id, &g.matrix),
            [s, _] if *s == sites[0] => g.matrix.clone(),
            _ => &swap * &g.matrix * &swap,
        };
        u = m * u;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_unitary(seed: &[f64]) -> CMat {
        let h = CMat::from_fn(4, 4, |r, k| c(seed[(4 * r + k) % seed.len()], seed[(4 * k + r + 3) % seed.len()]));
        let h = (&h + h.adjoint()).scale(0.5);
        linalg::expm_herm(&h, 1.0)
    }

    #[test]
    fn canonical_gate_round_trip() {
        let u = canonical(0.3, -0.7, 1.1);
        let gates = three_cnot_gates(&u, [0, 1], GateRole::Other).unwrap();
        assert_eq!(gates.iter().filter(|g| g.is_entangling()).count(), 3);
    }

    #[test]
    fn identity_and_cnot() {
        three_cnot_gates(&linalg::identity(4), [0, 1], GateRole::Other).unwrap();
        three_cnot_gates(&cnot(), [2, 3], GateRole::Other).unwrap();
        let swap = linalg::permutation_matrix(&[0, 2, 1, 3]);
        three_cnot_gates(&swap, [0, 1], GateRole::Other).unwrap();
    }

    #[test]
    fn product_of_locals() {
        let u = linalg::kron(&ry(0.4), &rz(1.3));
        let k = decompose(&u).unwrap();
        let recon = linalg::kron(&k.after[0], &k.after[1])
            * canonical(k.coefficients[0], k.coefficients[1], k.coefficients[2])
            * linalg::kron(&k.before[0], &k.before[1]);
        assert!(linalg::phase_aligned_distance(&recon, &u) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_unitaries_synthesize(seed in prop::collection::vec(-2.0f64..2.0, 16)) {
            let u = random_unitary(&seed);
            prop_assert!(three_cnot_gates(&u, [0, 1], GateRole::Other).is_ok());
        }
    }
}
