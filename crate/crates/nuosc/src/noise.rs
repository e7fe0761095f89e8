//! Synthetic noise channels and noisy execution of circuits.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CompiledCircuit};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, C64, ONE, ZERO};
use crate::qudit::{DensityMatrix, Gate, Kernel, QuditState, RegisterShape};
use crate::record::{stream_rng, MeasurementRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Channel {
    /// Whole-register depolarization after each gate.
    GlobalDepolarizing {
        p2q: f64,
        #[serde(default)]
        p1q: f64,
    },
    /// Uniform non-identity generalized Pauli on the gate's sites.
    LocalDepolarizing {
        p2q: f64,
        #[serde(default)]
        p1q: f64,
    },
    /// Decay towards level 0 on every site touched by a gate.
    AmplitudeDamping {
        gamma: f64,
        #[serde(default)]
        gamma1q: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    GlobalDepolarizing,
    LocalDepolarizing,
    AmplitudeDamping,
    Composite,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(default)]
    pub channels: Vec<Channel>,
    /// Depolarizing rate overrides keyed by gate tag.
    #[serde(default)]
    pub gate_rates: BTreeMap<String, f64>,
    /// Per-site probability of misreading the outcome.
    #[serde(default)]
    pub readout: f64,
}

impl Channel {
    fn rate(&self, gate: &Gate, overrides: &BTreeMap<String, f64>) -> f64 {
        match *self {
            Channel::GlobalDepolarizing { p2q, p1q } | Channel::LocalDepolarizing { p2q, p1q } => {
                if let Some(&p) = overrides.get(&gate.tag) {
                    p
                } else if gate.is_entangling() {
                    p2q
                } else {
                    p1q
                }
            }
            Channel::AmplitudeDamping { gamma, gamma1q } => {
                if gate.is_entangling() {
                    gamma
                } else {
                    gamma1q
                }
            }
        }
    }

    fn values(&self) -> [f64; 2] {
        match *self {
            Channel::GlobalDepolarizing { p2q, p1q } | Channel::LocalDepolarizing { p2q, p1q } => [p2q, p1q],
            Channel::AmplitudeDamping { gamma, gamma1q } => [gamma, gamma1q],
        }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_channel(mut self, channel: Channel) -> Self {
        self.channels.push(channel);
        self
    }

    pub fn with_readout(mut self, readout: f64) -> Self {
        self.readout = readout;
        self
    }

    /// Device-inspired parameter sets; `n` selects the column of the IBM-like table.
    pub fn preset(name: &str, n: usize) -> Result<Self> {
        match name {
            "none" => Ok(Self::none()),
            "h1-1-like" => Ok(Self::none()
                .with_channel(Channel::LocalDepolarizing { p2q: 1e-3, p1q: 2e-5 })
                .with_readout(2e-4)),
            "torino-like" => {
                let (p2q, p1q, readout) = match n {
                    0..=2 => (9.4e-3, 3.2e-4, 2.6e-2),
                    3..=4 => (7.8e-3, 3.3e-4, 2.9e-2),
                    _ => (4.0e-3, 2.8e-4, 2.3e-2),
                };
                Ok(Self::none().with_channel(Channel::LocalDepolarizing { p2q, p1q }).with_readout(readout))
            }
            other => Err(Error::Invalid(format!("unknown noise preset {other:?}"))),
        }
    }

    pub fn kind(&self) -> NoiseKind {
        match self.channels.as_slice() {
            [] => NoiseKind::None,
            [Channel::GlobalDepolarizing { .. }] => NoiseKind::GlobalDepolarizing,
            [Channel::LocalDepolarizing { .. }] => NoiseKind::LocalDepolarizing,
            [Channel::AmplitudeDamping { .. }] => NoiseKind::AmplitudeDamping,
            _ => NoiseKind::Composite,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .channels
            .iter()
            .flat_map(|c| c.values())
            .chain(self.gate_rates.values().copied())
            .chain(std::iter::once(self.readout));
        for p in all {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability(p));
            }
        }
        Ok(())
    }

    fn only_global(&self) -> bool {
        self.channels.iter().all(|c| matches!(c, Channel::GlobalDepolarizing { .. }))
    }

    /// Probability that no global depolarization fires over the whole circuit.
    pub fn global_fidelity(&self, circuit: &Circuit) -> f64 {
        let mut f = 1.0;
        for ch in &self.channels {
            if let Channel::GlobalDepolarizing { .. } = ch {
                for g in circuit.gates() {
                    f *= 1.0 - ch.rate(g, &self.gate_rates);
                }
            }
        }
        f
    }
}

/// Weyl operators `X^a Z^b` of a `d`-level system, `(a, b) = (0, 0)` first.
pub fn weyl_operators(d: usize) -> Vec<CMat> {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            out.push(CMat::from_fn(d, d, |r, c| {
                if r == (c + a) % d {
                    cis(omega * (b * c) as f64)
                } else {
                    ZERO
                }
            }));
        }
    }
    out
}

/// Non-identity tensor products of Weyl operators over sites of dimensions `dims`.
pub fn pauli_errors(dims: &[usize]) -> Vec<CMat> {
    let mut ops = vec![linalg::identity(1)];
    for &d in dims {
        let local = weyl_operators(d);
        ops = ops.iter().flat_map(|o| local.iter().map(move |w| linalg::kron(o, w))).collect();
    }
    ops.remove(0);
    ops
}

pub fn amplitude_damping_kraus(d: usize, gamma: f64) -> Vec<CMat> {
    let mut k0 = linalg::identity(d);
    for k in 1..d {
        k0[(k, k)] = C64::new((1.0 - gamma).sqrt(), 0.0);
    }
    let mut out = vec![k0];
    for k in 1..d {
        let mut m = CMat::zeros(d, d);
        m[(0, k)] = C64::new(gamma.sqrt(), 0.0);
        out.push(m);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Analytic for global depolarizing only, density matrix up to dimension
    /// 256, trajectories beyond.
    #[default]
    Auto,
    Analytic,
    DensityMatrix,
    Trajectories(usize),
}

pub const DEFAULT_TRAJECTORIES: usize = 256;
const AUTO_DENSITY_LIMIT: usize = 256;
const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOutcome {
    /// Outcome probabilities in logical neutrino order, readout error included.
    pub probabilities: Vec<f64>,
    pub method: Method,
}

/// Outcome distribution of `circuit` run on `initial` under `noise`.
pub fn noisy_probabilities(
    circuit: &Circuit,
    initial: &QuditState,
    noise: &NoiseModel,
    method: Method,
    seed: u64,
) -> Result<NoisyOutcome> {
    noise.validate()?;
    if initial.shape() != circuit.shape() {
        return Err(Error::Dimension("initial state does not match circuit register".into()));
    }
    let dim = circuit.shape().total_dim();
    let method = match method {
        Method::Auto if noise.only_global() => Method::Analytic,
        Method::Auto if dim <= AUTO_DENSITY_LIMIT => Method::DensityMatrix,
        Method::Auto => Method::Trajectories(DEFAULT_TRAJECTORIES),
        m => m,
    };
    let slot_probs = match method {
        Method::Analytic => {
            if !noise.only_global() {
                return Err(Error::Invalid("analytic path supports global depolarizing noise only".into()));
            }
            let clean = circuit.run(initial)?.probabilities();
            let f = noise.global_fidelity(circuit);
            clean.iter().map(|p| f * p + (1.0 - f) / dim as f64).collect()
        }
        Method::DensityMatrix => density_matrix_path(circuit, initial, noise)?,
        Method::Trajectories(n) => trajectory_path(circuit, initial, noise, n, seed)?,
        Method::Auto => unreachable!(),
    };
    let logical = circuit.logical_probabilities(&slot_probs)?;
    let probabilities = apply_readout(circuit.shape(), &logical, noise.readout)?;
    Ok(NoisyOutcome { probabilities, method })
}

/// Noisy execution followed by `shots` samples.
pub fn run_noisy(
    circuit: &Circuit,
    initial: &QuditState,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    method: Method,
) -> Result<MeasurementRecord> {
    let out = noisy_probabilities(circuit, initial, noise, method, seed)?;
    let mut rec = MeasurementRecord::from_probabilities(circuit.shape(), out.probabilities, "noisy")?;
    let total = rec.total();
    for p in rec.probabilities.iter_mut() {
        *p = p.max(0.0) / total;
    }
    rec.sample_with(shots, seed, &mut stream_rng(seed, u64::MAX))
}

fn density_matrix_path(circuit: &Circuit, initial: &QuditState, noise: &NoiseModel) -> Result<Vec<f64>> {
    let dim = circuit.shape().total_dim();
    if dim > DensityMatrix::DIM_CAP {
        return Err(Error::DensityCap { dim, cap: DensityMatrix::DIM_CAP });
    }
    let shape = circuit.shape();
    let mut rho = initial.to_density();
    for g in circuit.gates() {
        rho.apply_gate(g)?;
        for ch in &noise.channels {
            let p = ch.rate(g, &noise.gate_rates);
            if p == 0.0 {
                continue;
            }
            match ch {
                Channel::GlobalDepolarizing { .. } => rho.depolarize(p),
                Channel::LocalDepolarizing { .. } => rho.depolarize_sites(&g.sites, p)?,
                Channel::AmplitudeDamping { .. } => {
                    for &s in &g.sites {
                        rho.apply_kraus(&amplitude_damping_kraus(shape.dims()[s], p), &[s])?;
                    }
                }
            }
        }
    }
    Ok(rho.probabilities().into_iter().map(|p| p.max(0.0)).collect())
}

struct Trajectory {
    amps: Vec<C64>,
    norm2: f64,
    threshold: f64,
    rng: ChaCha20Rng,
}

impl Trajectory {
    fn reset_basis(&mut self, index: usize) {
        self.amps.iter_mut().for_each(|a| *a = ZERO);
        self.amps[index] = ONE;
        self.norm2 = 1.0;
        self.threshold = self.rng.random::<f64>();
    }

    /// One damping step on `site`, unravelled by waiting-time sampling of the
    /// unnormalized no-jump branch.
    fn damp(&mut self, shape: &RegisterShape, site: usize, gamma: f64) {
        let d = shape.dims()[site];
        let stride = shape.strides()[site];
        let block = stride * d;
        let mut excited = [0.0f64; 3];
        for hi in (0..self.amps.len()).step_by(block) {
            for (k, e) in excited.iter_mut().enumerate().take(d).skip(1) {
                let start = hi + k * stride;
                *e += self.amps[start..start + stride].iter().map(|a| a.norm_sqr()).sum::<f64>();
            }
        }
        let total: f64 = excited.iter().sum();
        let after = self.norm2 - gamma * total;
        if after >= self.threshold * (1.0 - 1e-15) || total == 0.0 {
            let f = (1.0 - gamma).sqrt();
            for hi in (0..self.amps.len()).step_by(block) {
                for k in 1..d {
                    let start = hi + k * stride;
                    self.amps[start..start + stride].iter_mut().for_each(|a| *a *= f);
                }
            }
            self.norm2 = after;
            return;
        }
        let mut pick = self.rng.random::<f64>() * total;
        let mut level = d - 1;
        for (k, &e) in excited.iter().enumerate().take(d).skip(1) {
            if pick < e {
                level = k;
                break;
            }
            pick -= e;
        }
        let scale = 1.0 / excited[level].sqrt();
        for hi in (0..self.amps.len()).step_by(block) {
            for lo in 0..stride {
                let src = self.amps[hi + level * stride + lo] * scale;
                for k in 1..d {
                    self.amps[hi + k * stride + lo] = ZERO;
                }
                self.amps[hi + lo] = src;
            }
        }
        self.norm2 = 1.0;
        self.threshold = self.rng.random::<f64>();
    }
}

struct PauliTable {
    kernels: Vec<Kernel>,
}

fn trajectory_path(circuit: &Circuit, initial: &QuditState, noise: &NoiseModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Invalid("at least one trajectory required".into()));
    }
    let compiled = circuit.compile()?;
    let shape = circuit.shape().clone();
    let mut tables: BTreeMap<Vec<usize>, PauliTable> = BTreeMap::new();
    for g in circuit.gates() {
        let dims: Vec<usize> = g.sites.iter().map(|&s| shape.dims()[s]).collect();
        tables
            .entry(dims.clone())
            .or_insert_with(|| PauliTable { kernels: pauli_errors(&dims).iter().map(Kernel::from_matrix).collect() });
    }
    let rates: Vec<Vec<f64>> = circuit
        .gates()
        .iter()
        .map(|g| noise.channels.iter().map(|ch| ch.rate(g, &noise.gate_rates)).collect())
        .collect();
    let dim = shape.total_dim();
    let run_one = |index: usize| -> Vec<f64> {
        let mut rng = stream_rng(seed, index as u64);
        let threshold = rng.random::<f64>();
        let mut tr = Trajectory { amps: initial.amplitudes().to_vec(), norm2: initial.norm().powi(2), threshold, rng };
        run_trajectory(&compiled, circuit, &shape, noise, &rates, &tables, &mut tr);
        let inv = 1.0 / tr.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        tr.amps.iter().map(|a| a.norm_sqr() * inv).collect()
    };
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dim];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                for (a, p) in acc.iter_mut().zip(run_one(i)) {
                    *a += p;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for chunk in chunks {
        for (t, p) in total.iter_mut().zip(chunk) {
            *t += p;
        }
    }
    Ok(total.into_iter().map(|p| p / n as f64).collect())
}

fn run_trajectory(
    compiled: &CompiledCircuit,
    circuit: &Circuit,
    shape: &RegisterShape,
    noise: &NoiseModel,
    rates: &[Vec<f64>],
    tables: &BTreeMap<Vec<usize>, PauliTable>,
    tr: &mut Trajectory,
) {
    for op in &compiled.ops {
        op.embedding.apply_kernel(&mut tr.amps, &op.kernel);
        let gate = &circuit.gates()[op.index];
        for (ch, &p) in noise.channels.iter().zip(&rates[op.index]) {
            if p == 0.0 {
                continue;
            }
            match ch {
                Channel::GlobalDepolarizing { .. } => {
                    if tr.rng.random::<f64>() < p {
                        let idx = tr.rng.random_range(0..tr.amps.len());
                        tr.reset_basis(idx);
                    }
                }
                Channel::LocalDepolarizing { .. } => {
                    if tr.rng.random::<f64>() < p {
                        let dims: Vec<usize> = gate.sites.iter().map(|&s| shape.dims()[s]).collect();
                        let table = &tables[&dims];
                        let k = tr.rng.random_range(0..table.kernels.len());
                        op.embedding.apply_kernel(&mut tr.amps, &table.kernels[k]);
                    }
                }
                Channel::AmplitudeDamping { .. } => {
                    for &s in &gate.sites {
                        tr.damp(shape, s, p);
                    }
                }
            }
        }
    }
}

fn site_confusion(d: usize, e: f64) -> CMat {
    CMat::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(1.0 - e, 0.0)
        } else {
            C64::new(e / (d - 1) as f64, 0.0)
        }
    })
}

fn apply_site_maps(shape: &RegisterShape, probs: &[f64], maps: &[CMat]) -> Result<Vec<f64>> {
    let mut state: Vec<C64> = probs.iter().map(|&p| C64::new(p, 0.0)).collect();
    for s in 0..shape.n_sites() {
        let emb = shape.embedding(&[s])?;
        emb.apply_kernel(&mut state, &Kernel::from_matrix(&maps[shape.dims()[s] - 2]));
    }
    Ok(state.into_iter().map(|z| z.re).collect())
}

/// Independent symmetric misreading of every site with probability `e`.
pub fn apply_readout(shape: &RegisterShape, probs: &[f64], e: f64) -> Result<Vec<f64>> {
    if e == 0.0 {
        return Ok(probs.to_vec());
    }
    apply_site_maps(shape, probs, &[site_confusion(2, e), site_confusion(3, e)])
}

/// Inverse of [`apply_readout`]; the result may leave the simplex.
pub fn unfold_readout(shape: &RegisterShape, probs: &[f64], e: f64) -> Result<Vec<f64>> {
    if e == 0.0 {
        return Ok(probs.to_vec());
    }
    let inv = |d| {
        site_confusion(d, e)
            .try_inverse()
            .ok_or_else(|| Error::Invalid(format!("readout error {e} is not invertible")))
    };
    apply_site_maps(shape, probs, &[inv(2)?, inv(3)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::GateRole;

    #[test]
    fn closed_form_weyl_channel_matches_kraus_sum() {
        let shape = RegisterShape::new(vec![2, 3, 2]).unwrap();
        let amps: Vec<C64> = (0..12).map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect();
        let mut psi = QuditState::from_amplitudes(shape, amps).unwrap();
        psi.normalize();
        for sites in [vec![1], vec![0, 2], vec![2, 1]] {
            let p = 0.137;
            let mut fast = psi.to_density();
            fast.depolarize_sites(&sites, p).unwrap();
            let dims: Vec<usize> = sites.iter().map(|&s| psi.shape().dims()[s]).collect();
            let errors = pauli_errors(&dims);
            let w = (p / errors.len() as f64).sqrt();
            let mut kraus = vec![linalg::identity(errors[0].nrows()).scale((1.0 - p).sqrt())];
            kraus.extend(errors.iter().map(|e| e.scale(w)));
            let mut slow = psi.to_density();
            slow.apply_kraus(&kraus, &sites).unwrap();
            assert!(linalg::max_abs(&(fast.to_matrix() - slow.to_matrix())) < 1e-14, "{sites:?}");
        }
    }

    fn bell_circuit() -> (Circuit, QuditState) {
        let shape = RegisterShape::uniform(2, 2).unwrap();
        let mut c = Circuit::new(shape.clone(), 1).unwrap();
        let h = linalg::real(&[&[1.0, 1.0], &[1.0, -1.0]]).scale(std::f64::consts::FRAC_1_SQRT_2);
        c.push(Gate::new("h", h, vec![0], GateRole::Other).unwrap()).unwrap();
        c.push(crate::qubit::cx_gate(0, 1, GateRole::Other)).unwrap();
        c.push(crate::qubit::cx_gate(1, 0, GateRole::Other)).unwrap();
        (c, QuditState::basis(shape, &[0, 0]).unwrap())
    }

    #[test]
    fn weyl_operators_are_orthogonal_unitaries() {
        for d in [2, 3] {
            let ops = weyl_operators(d);
            assert_eq!(ops.len(), d * d);
            for (i, a) in ops.iter().enumerate() {
                assert!(linalg::unitarity_defect(a) < 1e-14);
                for b in &ops[i + 1..] {
                    assert!(linalg::trace(&(a.adjoint() * b)).norm() < 1e-12);
                }
            }
        }
        assert_eq!(pauli_errors(&[2, 2]).len(), 15);
        assert_eq!(pauli_errors(&[3, 3]).len(), 80);
    }

    #[test]
    fn no_noise_matches_clean() {
        let (c, psi) = bell_circuit();
        let out = noisy_probabilities(&c, &psi, &NoiseModel::none(), Method::Auto, 1).unwrap();
        let clean = c.run(&psi).unwrap().probabilities();
        for (a, b) in out.probabilities.iter().zip(&clean) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn global_depolarizing_paths_agree() {
        let (c, psi) = bell_circuit();
        let noise = NoiseModel::none().with_channel(Channel::GlobalDepolarizing { p2q: 0.2, p1q: 0.0 });
        let a = noisy_probabilities(&c, &psi, &noise, Method::Analytic, 1).unwrap().probabilities;
        let b = noisy_probabilities(&c, &psi, &noise, Method::DensityMatrix, 1).unwrap().probabilities;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
        let f = 0.8f64 * 0.8;
        assert!((a[2] - (1.0 - f) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn full_depolarization_is_uniform() {
        let (c, psi) = bell_circuit();
        let noise = NoiseModel::none().with_channel(Channel::GlobalDepolarizing { p2q: 1.0, p1q: 0.0 });
        let rec = run_noisy(&c, &psi, &noise, 1_000_000, 3, Method::Auto).unwrap();
        let counts = rec.counts.unwrap();
        let expect = 250_000.0;
        let chi2: f64 = counts.iter().map(|&k| (k as f64 - expect).powi(2) / expect).sum();
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn trajectories_match_density_matrix() {
        let (c, psi) = bell_circuit();
        let noise = NoiseModel::none()
            .with_channel(Channel::LocalDepolarizing { p2q: 0.05, p1q: 0.01 })
            .with_channel(Channel::AmplitudeDamping { gamma: 0.1, gamma1q: 0.02 });
        let exact = noisy_probabilities(&c, &psi, &noise, Method::DensityMatrix, 0).unwrap().probabilities;
        let n = 20_000;
        let traj = noisy_probabilities(&c, &psi, &noise, Method::Trajectories(n), 7).unwrap().probabilities;
        for (x, y) in exact.iter().zip(&traj) {
            let sigma = (x * (1.0 - x) / n as f64).sqrt().max(1e-4);
            assert!((x - y).abs() < 5.0 * sigma, "{x} vs {y}");
        }
    }

    #[test]
    fn trajectories_are_seed_deterministic() {
        let (c, psi) = bell_circuit();
        let noise = NoiseModel::none().with_channel(Channel::AmplitudeDamping { gamma: 0.3, gamma1q: 0.0 });
        let a = noisy_probabilities(&c, &psi, &noise, Method::Trajectories(33), 5).unwrap();
        let b = noisy_probabilities(&c, &psi, &noise, Method::Trajectories(33), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn readout_round_trip() {
        let shape = RegisterShape::new(vec![2, 3]).unwrap();
        let p: Vec<f64> = (0..6).map(|i| (i + 1) as f64 / 21.0).collect();
        let noisy = apply_readout(&shape, &p, 0.03).unwrap();
        assert!((noisy.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let back = unfold_readout(&shape, &noisy, 0.03).unwrap();
        for (a, b) in p.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rates_validated() {
        let bad = NoiseModel::none().with_channel(Channel::LocalDepolarizing { p2q: 1.5, p1q: 0.0 });
        assert!(bad.validate().is_err());
        assert_eq!(NoiseModel::preset("h1-1-like", 2).unwrap().kind(), NoiseKind::LocalDepolarizing);
        assert!(NoiseModel::preset("nope", 2).is_err());
    }
}
