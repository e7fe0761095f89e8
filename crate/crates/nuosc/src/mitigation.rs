//! Decoherence renormalization, post-selection and related estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Flavor;
use crate::record::{stream_rng, MeasurementRecord};

pub const DR_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Discard every outcome with an unphysical pair anywhere.
    Phs,
    /// Discard only outcomes where the measured neutrino is unphysical.
    Snhs,
}

/// Scalar inputs of one renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigationInput {
    pub physics: f64,
    pub identity: f64,
    pub identity_exact: f64,
    pub d_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrEstimate {
    pub value: f64,
    /// Set when the identity probability sits within the guard of `d_n`; the
    /// value is then the unmitigated physics probability.
    pub flagged: bool,
}

pub fn decoherence_renormalize(input: &MitigationInput) -> DrEstimate {
    match rescale_factor(input.identity, input.identity_exact, input.d_n) {
        Some(r) => DrEstimate { value: input.d_n + r * (input.physics - input.d_n), flagged: false },
        None => DrEstimate { value: input.physics, flagged: true },
    }
}

/// Fixed point of a single-neutrino probability under full depolarization.
pub fn decoherence_value(scheme: Scheme, n: usize, local_dim: usize) -> f64 {
    match (local_dim, scheme) {
        (3, _) => 1.0 / 3.0,
        (_, Scheme::Phs) => 3f64.powi(n as i32 - 1) / 4f64.powi(n as i32),
        (_, Scheme::Snhs) => 0.25,
    }
}

/// Fixed point of the persistence probability.
pub fn persistence_decoherence(n: usize, local_dim: usize) -> f64 {
    match local_dim {
        3 => 3f64.powi(-(n as i32)),
        _ => 4f64.powi(-(n as i32)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostSelected {
    /// Joint probability of each flavor and the kept condition.
    pub raw: [f64; 3],
    pub kept: f64,
    pub normalized: [f64; 3],
}

fn neutrino_count(record: &MeasurementRecord) -> Result<(usize, usize)> {
    let dims = &record.dims;
    if dims.iter().all(|&d| d == 3) {
        Ok((dims.len(), 3))
    } else if dims.iter().all(|&d| d == 2) && dims.len() % 2 == 0 {
        Ok((dims.len() / 2, 2))
    } else {
        Err(Error::Dimension("record is neither a qutrit nor a paired-qubit register".into()))
    }
}

/// Flavor digit of every neutrino in outcome `index`; 3 marks the unphysical pair.
fn flavors_of(index: usize, n: usize, local_dim: usize) -> impl Iterator<Item = usize> {
    let base: usize = if local_dim == 3 { 3 } else { 4 };
    (0..n).map(move |k| (index / base.pow((n - 1 - k) as u32)) % base)
}

pub fn post_select(record: &MeasurementRecord, scheme: Scheme, neutrino: usize) -> Result<PostSelected> {
    let (n, local) = neutrino_count(record)?;
    if neutrino >= n {
        return Err(Error::Invalid(format!("neutrino {neutrino} outside register of {n}")));
    }
    let mut raw = [0.0; 3];
    for (idx, &p) in record.probabilities.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let fl: Vec<usize> = flavors_of(idx, n, local).collect();
        let target = fl[neutrino];
        if target == 3 {
            continue;
        }
        if scheme == Scheme::Phs && fl.iter().any(|&f| f == 3) {
            continue;
        }
        raw[target] += p;
    }
    let kept: f64 = raw.iter().sum();
    if kept <= 0.0 {
        return Err(Error::EmptyPostSelection);
    }
    Ok(PostSelected { raw, kept, normalized: raw.map(|x| x / kept) })
}

/// Raw joint probability of every neutrino, one row per neutrino.
pub fn raw_flavors(record: &MeasurementRecord, scheme: Scheme) -> Result<Vec<[f64; 3]>> {
    let (n, _) = neutrino_count(record)?;
    (0..n).map(|k| post_select(record, scheme, k).map(|p| p.raw)).collect()
}

/// Post-selected, normalized single-neutrino probabilities without mitigation.
pub fn selected_flavors(record: &MeasurementRecord, scheme: Scheme) -> Result<Vec<[f64; 3]>> {
    let (n, _) = neutrino_count(record)?;
    (0..n).map(|k| post_select(record, scheme, k).map(|p| p.normalized)).collect()
}

/// Probability of reading back exactly the initial flavor word.
pub fn persistence(record: &MeasurementRecord, initial: &[Flavor]) -> Result<f64> {
    let (n, local) = neutrino_count(record)?;
    if initial.len() != n {
        return Err(Error::Invalid("initial word length differs from register".into()));
    }
    let base = if local == 3 { 3 } else { 4 };
    let idx = initial.iter().fold(0, |acc, f| acc * base + f.index());
    Ok(record.probabilities[idx])
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(p: &[f64]) -> Vec<f64> {
    if p.is_empty() {
        return Vec::new();
    }
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (m, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (1.0 - cumulative) / (m + 1) as f64;
        if x + candidate > 0.0 {
            shift = candidate;
        }
    }
    p.iter().map(|&x| (x + shift).max(0.0)).collect()
}

/// Average of neutrinos `i` and `N+1−i`; only meaningful for palindromic words.
pub fn symmetrize(probs: &[[f64; 3]], initial: &[Flavor]) -> Result<Vec<[f64; 3]>> {
    if !initial.iter().eq(initial.iter().rev()) {
        let word: String = initial.iter().map(|f| f.symbol()).collect::<Vec<_>>().join(" ");
        return Err(Error::NotPalindromic(word));
    }
    if probs.len() != initial.len() {
        return Err(Error::Invalid("one probability row per neutrino expected".into()));
    }
    let n = probs.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = (probs[i], probs[n - 1 - i]);
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
        })
        .collect())
}

/// Rescaling factor `(P_id^ex − d)/(P_id^noisy − d)`, or `None` inside the guard.
pub fn rescale_factor(identity: f64, identity_exact: f64, d_n: f64) -> Option<f64> {
    let denom = identity - d_n;
    (denom.abs() > DR_GUARD).then(|| (identity_exact - d_n) / denom)
}

/// One neutrino's flavor probabilities: the factor from the initial flavor of
/// the identity run is applied to every component, then the vector is
/// renormalized and projected onto the simplex.
pub fn renormalize_flavors(physics: [f64; 3], identity: [f64; 3], initial: Flavor, d_n: f64) -> [f64; 3] {
    let mut out = physics;
    if let Some(r) = rescale_factor(identity[initial.index()], 1.0, d_n) {
        out = physics.map(|p| d_n + r * (p - d_n));
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|x| *x /= total);
    }
    let p = project_to_simplex(&out);
    [p[0], p[1], p[2]]
}

/// Mitigated single-neutrino probabilities of every neutrino; `d_n = None`
/// selects the theoretical value of the scheme.
pub fn mitigate_flavors(
    physics: &MeasurementRecord,
    identity: &MeasurementRecord,
    initial: &[Flavor],
    scheme: Scheme,
    d_n: Option<f64>,
) -> Result<Vec<[f64; 3]>> {
    let (n, local) = neutrino_count(physics)?;
    if identity.dims != physics.dims || initial.len() != n {
        return Err(Error::Invalid("physics and identity records disagree".into()));
    }
    let d = d_n.unwrap_or_else(|| decoherence_value(scheme, n, local));
    let ph = raw_flavors(physics, scheme)?;
    let id = raw_flavors(identity, scheme)?;
    Ok((0..n).map(|k| renormalize_flavors(ph[k], id[k], initial[k], d)).collect())
}

/// Mitigated persistence probability.
pub fn mitigate_persistence(physics: &MeasurementRecord, identity: &MeasurementRecord, initial: &[Flavor]) -> Result<DrEstimate> {
    let (n, local) = neutrino_count(physics)?;
    let input = MitigationInput {
        physics: persistence(physics, initial)?,
        identity: persistence(identity, initial)?,
        identity_exact: 1.0,
        d_n: persistence_decoherence(n, local),
    };
    let mut est = decoherence_renormalize(&input);
    est.value = est.value.clamp(0.0, 1.0);
    Ok(est)
}

/// One time point of a decoherence-value scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub time: f64,
    /// Raw post-selected joint probabilities per neutrino.
    pub physics: Vec<[f64; 3]>,
    pub identity: Vec<[f64; 3]>,
    pub exact: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub d: f64,
    /// Mitigated probabilities, indexed by time point then neutrino.
    pub series: Vec<Vec<[f64; 3]>>,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DnScan {
    pub rows: Vec<ScanRow>,
    pub best_d: f64,
}

pub fn effective_dn_scan(points: &[ScanPoint], initial: &[Flavor], d_grid: &[f64]) -> Result<DnScan> {
    if let Some(d) = d_grid.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Error::Invalid(format!("decoherence value {d} outside (0, 1)")));
    }
    if d_grid.is_empty() || points.is_empty() {
        return Err(Error::Invalid("empty scan".into()));
    }
    let rows: Vec<ScanRow> = d_grid
        .iter()
        .map(|&d| {
            let mut sq = 0.0;
            let mut count = 0usize;
            let series = points
                .iter()
                .map(|pt| {
                    (0..initial.len())
                        .map(|k| {
                            let m = renormalize_flavors(pt.physics[k], pt.identity[k], initial[k], d);
                            for f in 0..3 {
                                sq += (m[f] - pt.exact[k][f]).powi(2);
                                count += 1;
                            }
                            m
                        })
                        .collect()
                })
                .collect();
            ScanRow { d, series, rms: (sq / count as f64).sqrt() }
        })
        .collect();
    let best_d = rows.iter().min_by(|a, b| a.rms.total_cmp(&b.rms)).map(|r| r.d).expect("non-empty grid");
    Ok(DnScan { rows, best_d })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub estimate: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub const DEFAULT_REPLICAS: usize = 200;

/// Symmetric one-sigma errors from multinomial resampling of every record.
pub fn bootstrap<F>(records: &[&MeasurementRecord], replicas: usize, seed: u64, statistic: F) -> Result<BootstrapSummary>
where
    F: Fn(&[MeasurementRecord]) -> Result<Vec<f64>> + Sync,
{
    let originals: Vec<MeasurementRecord> = records.iter().map(|r| (*r).clone()).collect();
    let estimate = statistic(&originals)?;
    if replicas < 2 {
        return Err(Error::Invalid("bootstrap needs at least two replicas".into()));
    }
    let k = records.len() as u64;
    let samples: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|b| {
            let resampled = records
                .iter()
                .enumerate()
                .map(|(r, rec)| match rec.shots {
                    Some(shots) => rec.sample_with(shots, seed, &mut stream_rng(seed, b as u64 * k + r as u64)),
                    None => Ok((*rec).clone()),
                })
                .collect::<Result<Vec<_>>>()?;
            statistic(&resampled)
        })
        .collect::<Result<_>>()?;
    let m = estimate.len();
    let mut sigma = vec![0.0; m];
    for j in 0..m {
        let mean = samples.iter().map(|s| s[j]).sum::<f64>() / replicas as f64;
        let var = samples.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / (replicas - 1) as f64;
        sigma[j] = var.sqrt();
    }
    Ok(BootstrapSummary { estimate, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::RegisterShape;
    use proptest::prelude::*;

    fn uniform_record(qubits: usize) -> MeasurementRecord {
        let shape = RegisterShape::uniform(qubits, 2).unwrap();
        let d = shape.total_dim();
        MeasurementRecord::from_probabilities(&shape, vec![1.0 / d as f64; d], "u").unwrap()
    }

    #[test]
    fn dr_examples() {
        let noisy = 0.5 * 0.8 + 0.5 * 0.0625;
        assert!((noisy - 0.43125f64).abs() < 1e-15);
        let id_noisy = 0.5 + 0.5 * 0.0625;
        let out = decoherence_renormalize(&MitigationInput { physics: noisy, identity: id_noisy, identity_exact: 1.0, d_n: 0.0625 });
        assert!((out.value - 0.8).abs() < 1e-12 && !out.flagged);
        let clean = decoherence_renormalize(&MitigationInput { physics: 0.3, identity: 1.0, identity_exact: 1.0, d_n: 0.25 });
        assert!((clean.value - 0.3).abs() < 1e-15);
        let bad = decoherence_renormalize(&MitigationInput { physics: 0.3, identity: 0.25, identity_exact: 1.0, d_n: 0.25 });
        assert!(bad.flagged);
    }

    #[test]
    fn decoherence_values() {
        assert!((decoherence_value(Scheme::Phs, 2, 2) - 0.1875).abs() < 1e-15);
        assert!((decoherence_value(Scheme::Phs, 8, 2) - 3f64.powi(7) / 4f64.powi(8)).abs() < 1e-15);
        assert!((decoherence_value(Scheme::Phs, 8, 2) - 0.0334).abs() < 1e-4);
        assert_eq!(decoherence_value(Scheme::Snhs, 8, 2), 0.25);
    }

    #[test]
    fn uniform_record_post_selection() {
        let rec = uniform_record(4);
        for scheme in [Scheme::Phs, Scheme::Snhs] {
            let p = post_select(&rec, scheme, 0).unwrap();
            for x in p.normalized {
                assert!((x - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let phs = post_select(&rec, Scheme::Phs, 0).unwrap();
        assert!((phs.raw[0] - decoherence_value(Scheme::Phs, 2, 2)).abs() < 1e-15);
        let snhs = post_select(&rec, Scheme::Snhs, 1).unwrap();
        assert!((snhs.raw[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_post_selection_flagged() {
        let shape = RegisterShape::uniform(2, 2).unwrap();
        let rec = MeasurementRecord::from_probabilities(&shape, vec![0.0, 0.0, 0.0, 1.0], "x").unwrap();
        assert_eq!(post_select(&rec, Scheme::Phs, 0), Err(Error::EmptyPostSelection));
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(project_to_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        let p = project_to_simplex(&[1.1, -0.1]);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let p = project_to_simplex(&[0.6, 0.6, -0.2]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn symmetrize_requires_palindrome() {
        let sym = Flavor::parse_word("e mu e tau tau e mu e").unwrap();
        let rows = vec![[1.0, 0.0, 0.0]; 8];
        assert!(symmetrize(&rows, &sym).is_ok());
        let asym = Flavor::parse_word("e mu e tau e mu e tau").unwrap();
        assert!(matches!(symmetrize(&rows, &asym), Err(Error::NotPalindromic(_))));
    }

    #[test]
    fn bootstrap_of_fair_coin() {
        let shape = RegisterShape::uniform(1, 2).unwrap();
        let rec = MeasurementRecord::from_counts(&shape, vec![50, 50], Some(1), "c").unwrap();
        let s = bootstrap(&[&rec], 400, 9, |r| Ok(vec![r[0].probabilities[0]])).unwrap();
        assert!((s.estimate[0] - 0.5).abs() < 1e-15);
        assert!((s.sigma[0] - 0.05).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn simplex_projection_idempotent_and_nonexpansive(
            a in prop::collection::vec(-2.0f64..2.0, 3..8),
            shift in prop::collection::vec(-0.5f64..0.5, 8),
        ) {
            let p = project_to_simplex(&a);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let pp = project_to_simplex(&p);
            for (x, y) in p.iter().zip(&pp) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
            let q = project_to_simplex(&b);
            let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(dist(&p, &q) <= dist(&a, &b) + 1e-12);
        }

        #[test]
        fn dr_exact_under_global_depolarizing(
            exact in 0.0f64..1.0,
            f in 0.05f64..1.0,
            d in prop::sample::select(vec![1.0 / 16.0, 3.0 / 16.0, 0.25, 2187.0 / 65536.0]),
        ) {
            let physics = f * exact + (1.0 - f) * d;
            let identity = f + (1.0 - f) * d;
            let out = decoherence_renormalize(&MitigationInput { physics, identity, identity_exact: 1.0, d_n: d });
            prop_assert!((out.value - exact).abs() < 1e-12);
        }
    }
}
