//! Neutrino Hamiltonian in the mass and flavor bases and the exact propagator.
//!
//! `H = Σ_i h_i + Σ_{i<j} J_ij λ⁽ⁱ⁾·λ⁽ʲ⁾` with `h = diag(0, ω, Ω)` in the mass
//! basis and `U h U†` in the flavor basis. Times are in units of `1/μ`.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, C64, I, ONE, ZERO};
use crate::qudit::{QuditState, RegisterShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Mass,
    Flavor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "e")]
    E,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "tau")]
    Tau,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::E, Flavor::Mu, Flavor::Tau];

    pub fn index(self) -> usize {
        match self {
            Flavor::E => 0,
            Flavor::Mu => 1,
            Flavor::Tau => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Flavor::E => "e",
            Flavor::Mu => "mu",
            Flavor::Tau => "tau",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e" | "nu_e" => Ok(Flavor::E),
            "mu" | "m" | "nu_mu" => Ok(Flavor::Mu),
            "tau" | "t" | "nu_tau" => Ok(Flavor::Tau),
            other => Err(Error::Invalid(format!("unknown flavor {other:?}"))),
        }
    }

    /// Parses a word such as `"e mu e tau"`.
    pub fn parse_word(s: &str) -> Result<Vec<Self>> {
        s.split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .map(Self::parse)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingParameters {
    pub theta12: f64,
    pub theta13: f64,
    pub theta23: f64,
    pub delta_cp: f64,
    /// Δm²₂₁ in MeV².
    pub dm21_sq: f64,
    /// Δm²₃₁ in MeV².
    pub dm31_sq: f64,
}

impl Default for MixingParameters {
    fn default() -> Self {
        Self::central()
    }
}

impl MixingParameters {
    /// Central values of the global fit, normal ordering.
    pub fn central() -> Self {
        Self {
            theta12: 33.67f64.to_radians(),
            theta13: 8.58f64.to_radians(),
            theta23: 42.3f64.to_radians(),
            delta_cp: 232f64.to_radians(),
            dm21_sq: 7.41e-17,
            dm31_sq: 2.505e-15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let angles = [self.theta12, self.theta13, self.theta23, self.delta_cp];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("mixing angles must be finite".into()));
        }
        if !(self.dm31_sq > self.dm21_sq && self.dm21_sq > 0.0) {
            return Err(Error::Invalid("mass splittings must satisfy dm31 > dm21 > 0".into()));
        }
        Ok(())
    }

    pub fn splitting_ratio(&self) -> f64 {
        self.dm21_sq / self.dm31_sq
    }
}

/// Gell-Mann matrix `λ_index`, `index` in `1..=8`.
///
/// `λ₂` carries the opposite sign to the common convention. Every quantity
/// used here (`λ·λ`, `λ₃`, `λ₈`, probabilities) is even in that sign.
pub fn gell_mann(index: usize) -> Result<CMat> {
    let z = ZERO;
    let o = ONE;
    let m = match index {
        1 => linalg::from_rows(&[&[z, o, z], &[o, z, z], &[z, z, z]]),
        2 => linalg::from_rows(&[&[z, I, z], &[-I, z, z], &[z, z, z]]),
        3 => linalg::from_rows(&[&[o, z, z], &[z, -o, z], &[z, z, z]]),
        4 => linalg::from_rows(&[&[z, z, o], &[z, z, z], &[o, z, z]]),
        5 => linalg::from_rows(&[&[z, z, -I], &[z, z, z], &[I, z, z]]),
        6 => linalg::from_rows(&[&[z, z, z], &[z, z, o], &[z, o, z]]),
        7 => linalg::from_rows(&[&[z, z, z], &[z, z, -I], &[z, I, z]]),
        8 => linalg::diag(&[o, o, c(-2.0, 0.0)]).scale(1.0 / 3f64.sqrt()),
        other => return Err(Error::GellMannIndex(other)),
    };
    Ok(m)
}

/// `Σ_a λ_a ⊗ λ_a` on two qutrits.
pub fn lambda_dot_lambda() -> CMat {
    (1..=8).fold(CMat::zeros(9, 9), |acc, a| {
        let l = gell_mann(a).expect("index in range");
        acc + linalg::kron(&l, &l)
    })
}

/// `R₂₃ R₁₃(δ) R₁₂`.
pub fn pmns_matrix(m: &MixingParameters) -> CMat {
    let (s12, c12) = m.theta12.sin_cos();
    let (s13, c13) = m.theta13.sin_cos();
    let (s23, c23) = m.theta23.sin_cos();
    let r23 = linalg::real(&[&[1.0, 0.0, 0.0], &[0.0, c23, s23], &[0.0, -s23, c23]]);
    let r13 = linalg::from_rows(&[
        &[c(c13, 0.0), ZERO, cis(-m.delta_cp) * s13],
        &[ZERO, ONE, ZERO],
        &[cis(m.delta_cp) * -s13, ZERO, c(c13, 0.0)],
    ]);
    let r12 = linalg::real(&[&[c12, s12, 0.0], &[-s12, c12, 0.0], &[0.0, 0.0, 1.0]]);
    r23 * r13 * r12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutrinoSystem {
    pub n: usize,
    pub basis: Basis,
    pub mixing: MixingParameters,
    pub mu: f64,
    pub angles: Vec<Vec<f64>>,
    pub initial: Vec<Flavor>,
}

impl NeutrinoSystem {
    /// Opening angle of the cone between the first and the last neutrino.
    pub fn cone_max_angle() -> f64 {
        0.9f64.acos()
    }

    /// Cone model `θ_ij = |i − j|/(N − 1) · arccos(0.9)`.
    pub fn cone(basis: Basis, initial: Vec<Flavor>) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::TooFewNeutrinos { min: 1, got: 0 });
        }
        let angles = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if n == 1 {
                            0.0
                        } else {
                            i.abs_diff(j) as f64 / (n - 1) as f64 * Self::cone_max_angle()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(basis, MixingParameters::central(), 1.0, angles, initial)
    }

    pub fn new(
        basis: Basis,
        mixing: MixingParameters,
        mu: f64,
        angles: Vec<Vec<f64>>,
        initial: Vec<Flavor>,
    ) -> Result<Self> {
        mixing.validate()?;
        let n = initial.len();
        if n == 0 {
            return Err(Error::TooFewNeutrinos { min: 1, got: 0 });
        }
        if angles.len() != n || angles.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("angle matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if angles[i][i] != 0.0 {
                return Err(Error::Invalid(format!("θ_{i}{i} must vanish")));
            }
            for j in 0..n {
                if (angles[i][j] - angles[j][i]).abs() > 1e-15 || !angles[i][j].is_finite() {
                    return Err(Error::Invalid("angle matrix must be finite and symmetric".into()));
                }
            }
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Invalid("mu must be positive".into()));
        }
        Ok(Self { n, basis, mixing, mu, angles, initial })
    }

    pub fn with_basis(&self, basis: Basis) -> Self {
        Self { basis, ..self.clone() }
    }

    /// `Ω = μ/N`
    pub fn big_omega(&self) -> f64 {
        self.mu / self.n as f64
    }

    /// `ω = Ω Δm²₂₁/Δm²₃₁`
    pub fn small_omega(&self) -> f64 {
        self.big_omega() * self.mixing.splitting_ratio()
    }

    /// `J_ij = (μ/N)(1 − cos θ_ij)`
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.mu / self.n as f64 * (1.0 - self.angles[i][j].cos())
    }

    pub fn mass_energies(&self) -> [f64; 3] {
        [0.0, self.small_omega(), self.big_omega()]
    }

    pub fn pmns(&self) -> CMat {
        pmns_matrix(&self.mixing)
    }

    /// Single-neutrino one-body term in the system's basis.
    pub fn one_body_site(&self) -> CMat {
        let e = self.mass_energies();
        let d = linalg::diag(&[c(e[0], 0.0), c(e[1], 0.0), c(e[2], 0.0)]);
        match self.basis {
            Basis::Mass => d,
            Basis::Flavor => {
                let u = self.pmns();
                &u * d * u.adjoint()
            }
        }
    }

    /// Gell-Mann form `−ω/2 λ₃ + (ω − 2Ω)/(2√3) λ₈` of the mass-basis term.
    pub fn one_body_gell_mann(&self) -> CMat {
        let w = self.small_omega();
        let big = self.big_omega();
        let l3 = gell_mann(3).expect("index in range");
        let l8 = gell_mann(8).expect("index in range");
        l3.scale(-w / 2.0) + l8.scale((w - 2.0 * big) / (2.0 * 3f64.sqrt()))
    }

    pub fn shape(&self) -> RegisterShape {
        RegisterShape::uniform(self.n, 3).expect("n >= 1")
    }

    pub fn flavor_digits(&self) -> Vec<usize> {
        self.initial.iter().map(|f| f.index()).collect()
    }

    /// Initial flavor product state expressed in the system's basis.
    pub fn initial_state(&self) -> QuditState {
        let mut psi = QuditState::basis(self.shape(), &self.flavor_digits()).expect("digits < 3");
        if self.basis == Basis::Mass {
            let ud = self.pmns().adjoint();
            for s in 0..self.n {
                psi.apply_matrix(&ud, &[s]).expect("site in range");
            }
        }
        psi
    }

    /// A state in the system's basis, re-expressed in the flavor basis.
    pub fn to_flavor(&self, state: &QuditState) -> Result<QuditState> {
        let mut psi = state.clone();
        if self.basis == Basis::Mass {
            let u = self.pmns();
            for s in 0..psi.shape().n_sites() {
                psi.apply_matrix(&u, &[s])?;
            }
        }
        Ok(psi)
    }

    pub fn is_palindromic(&self) -> bool {
        self.initial.iter().eq(self.initial.iter().rev())
    }
}

/// Largest register for which dense Hamiltonians are built.
pub const DENSE_MAX_NEUTRINOS: usize = 7;

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: CMat,
    pub basis: Basis,
    eig: OnceLock<(Vec<f64>, CMat)>,
}

impl HamiltonianMatrix {
    fn new(matrix: CMat, basis: Basis) -> Self {
        Self { matrix, basis, eig: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> &(Vec<f64>, CMat) {
        self.eig.get_or_init(|| linalg::eigh(&self.matrix))
    }

    pub fn propagator(&self, t: f64) -> CMat {
        let (values, vectors) = self.eigen();
        let scaled = CMat::from_fn(vectors.nrows(), vectors.ncols(), |r, k| vectors[(r, k)] * cis(-values[k] * t));
        scaled * vectors.adjoint()
    }

    pub fn evolve(&self, state: &QuditState, t: f64) -> Result<QuditState> {
        if state.shape().total_dim() != self.dim() {
            return Err(Error::Dimension("state does not match Hamiltonian".into()));
        }
        let (values, vectors) = self.eigen();
        let psi = linalg::CVec::from_column_slice(state.amplitudes());
        let mut coeff = vectors.adjoint() * psi;
        for (k, a) in coeff.iter_mut().enumerate() {
            *a *= cis(-values[k] * t);
        }
        let out = vectors * coeff;
        QuditState::from_amplitudes(state.shape().clone(), out.iter().copied().collect())
    }
}

fn dense_guard(sys: &NeutrinoSystem) -> Result<()> {
    if sys.n > DENSE_MAX_NEUTRINOS {
        return Err(Error::Invalid(format!(
            "dense Hamiltonian limited to {DENSE_MAX_NEUTRINOS} neutrinos; use ExactPropagator"
        )));
    }
    Ok(())
}

/// Dense embedding of a local operator acting on `sites`.
pub fn embed_operator(shape: &RegisterShape, op: &CMat, sites: &[usize]) -> Result<CMat> {
    let emb = shape.embedding(sites)?;
    if emb.local_dim() != op.nrows() {
        return Err(Error::Dimension("operator size does not match sites".into()));
    }
    let d = shape.total_dim();
    let mut m = CMat::zeros(d, d);
    for &b in &emb.bases {
        for (i, &oi) in emb.offsets.iter().enumerate() {
            for (j, &oj) in emb.offsets.iter().enumerate() {
                m[(b + oi, b + oj)] += op[(i, j)];
            }
        }
    }
    Ok(m)
}

pub fn one_body_h(sys: &NeutrinoSystem) -> Result<HamiltonianMatrix> {
    dense_guard(sys)?;
    let shape = sys.shape();
    let site = sys.one_body_site();
    let mut h = CMat::zeros(shape.total_dim(), shape.total_dim());
    for s in 0..sys.n {
        h += embed_operator(&shape, &site, &[s])?;
    }
    Ok(HamiltonianMatrix::new(h, sys.basis))
}

pub fn two_body_h(sys: &NeutrinoSystem) -> Result<HamiltonianMatrix> {
    if sys.n < 2 {
        return Err(Error::TooFewNeutrinos { min: 2, got: sys.n });
    }
    dense_guard(sys)?;
    let shape = sys.shape();
    let ll = lambda_dot_lambda();
    let mut h = CMat::zeros(shape.total_dim(), shape.total_dim());
    for i in 0..sys.n {
        for j in i + 1..sys.n {
            h += embed_operator(&shape, &ll, &[i, j])?.scale(sys.coupling(i, j));
        }
    }
    Ok(HamiltonianMatrix::new(h, sys.basis))
}

pub fn total_h(sys: &NeutrinoSystem) -> Result<HamiltonianMatrix> {
    let mut h = one_body_h(sys)?.matrix;
    if sys.n >= 2 {
        h += two_body_h(sys)?.matrix;
    }
    Ok(HamiltonianMatrix::new(h, sys.basis))
}

#[derive(Debug, Clone)]
struct Sector {
    indices: Vec<usize>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Exact propagator built from the block structure of `H` in the mass basis.
///
/// Both terms conserve the number of neutrinos in each mass eigenstate
/// (`λ·λ = 2 SWAP − 2/3`), so `H` splits into real symmetric blocks labelled
/// by occupation numbers. The largest block at N = 8 has 560 states.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    n: usize,
    basis: Basis,
    pmns: CMat,
    sectors: Vec<Sector>,
}

impl ExactPropagator {
    pub fn new(sys: &NeutrinoSystem) -> Result<Self> {
        let shape = sys.shape();
        let mut groups: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
        for idx in 0..shape.total_dim() {
            let mut occ = [0usize; 3];
            for d in shape.digits(idx) {
                occ[d] += 1;
            }
            groups.entry(occ).or_default().push(idx);
        }
        let mut keys: Vec<[usize; 3]> = groups.keys().copied().collect();
        keys.sort();
        let e = sys.mass_energies();
        let mut sectors = Vec::with_capacity(keys.len());
        for key in keys {
            let indices = groups.remove(&key).expect("key present");
            let pos: HashMap<usize, usize> = indices.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let dim = indices.len();
            let mut h = DMatrix::<f64>::zeros(dim, dim);
            for (p, &idx) in indices.iter().enumerate() {
                let digits = shape.digits(idx);
                h[(p, p)] += digits.iter().map(|&d| e[d]).sum::<f64>();
                for i in 0..sys.n {
                    for j in i + 1..sys.n {
                        let jij = sys.coupling(i, j);
                        h[(p, p)] -= 2.0 / 3.0 * jij;
                        if digits[i] == digits[j] {
                            h[(p, p)] += 2.0 * jij;
                        } else {
                            let mut swapped = digits.clone();
                            swapped.swap(i, j);
                            let q = pos[&shape.index(&swapped)?];
                            h[(p, q)] += 2.0 * jij;
                        }
                    }
                }
            }
            let eig = SymmetricEigen::new(h);
            sectors.push(Sector {
                indices,
                energies: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            });
        }
        Ok(Self { n: sys.n, basis: sys.basis, pmns: sys.pmns(), sectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sectors.iter().flat_map(|s| s.energies.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn rotate(&self, psi: &mut QuditState, u: &CMat) -> Result<()> {
        for s in 0..self.n {
            psi.apply_matrix(u, &[s])?;
        }
        Ok(())
    }

    /// `e^{−iHt}|ψ⟩`
    pub fn evolve(&self, state: &QuditState, t: f64) -> Result<QuditState> {
        if state.shape().n_sites() != self.n || state.shape().dims().iter().any(|&d| d != 3) {
            return Err(Error::Dimension("state must be a qutrit register of N sites".into()));
        }
        let mut psi = state.clone();
        if self.basis == Basis::Flavor {
            self.rotate(&mut psi, &self.pmns.adjoint())?;
        }
        let amps = psi.amplitudes_mut();
        for sec in &self.sectors {
            let dim = sec.indices.len();
            let mut coeff = vec![ZERO; dim];
            for (k, ck) in coeff.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (p, &idx) in sec.indices.iter().enumerate() {
                    acc += amps[idx] * sec.vectors[(p, k)];
                }
                *ck = acc * cis(-sec.energies[k] * t);
            }
            for (p, &idx) in sec.indices.iter().enumerate() {
                let mut acc = ZERO;
                for (k, ck) in coeff.iter().enumerate() {
                    acc += ck * sec.vectors[(p, k)];
                }
                amps[idx] = acc;
            }
        }
        if self.basis == Basis::Flavor {
            self.rotate(&mut psi, &self.pmns.clone())?;
        }
        Ok(psi)
    }
}

pub fn exact_evolve(sys: &NeutrinoSystem, state: &QuditState, t: f64) -> Result<QuditState> {
    ExactPropagator::new(sys)?.evolve(state, t)
}

/// Single-neutrino flavor (or mass) probabilities of each neutrino.
pub fn single_neutrino_probabilities(state: &QuditState) -> Vec<[f64; 3]> {
    let shape = state.shape();
    let mut out = vec![[0.0; 3]; shape.n_sites()];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (s, row) in out.iter_mut().enumerate() {
            row[shape.digit(idx, s)] += p;
        }
    }
    out
}

pub fn expectation(state: &QuditState, op: &CMat, sites: &[usize]) -> Result<C64> {
    let mut phi = state.clone();
    phi.apply_matrix(op, sites)?;
    Ok(state.inner(&phi))
}
