//! Experiment configuration, overrides and hashing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nuosc::hamiltonian::{Basis, Flavor, MixingParameters, NeutrinoSystem};
use nuosc::mitigation::Scheme;
use nuosc::noise::{Channel, Method, NoiseModel};
use nuosc::trotter::{Backend, Order, TrotterPlan};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub system: SystemConfig,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Flavor word such as `"e mu e tau"`; its length sets N.
    pub initial: String,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub mixing: MixingOverrides,
}

/// Angles in degrees, splittings in MeV².
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingOverrides {
    pub theta12_deg: Option<f64>,
    pub theta13_deg: Option<f64>,
    pub theta23_deg: Option<f64>,
    pub delta_cp_deg: Option<f64>,
    pub dm21_sq: Option<f64>,
    pub dm31_sq: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Trotter,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_order")]
    pub order: Order,
    /// Fixed number of Trotter steps at every time point.
    pub steps: Option<usize>,
    /// Fixed step size; the step count grows with `t`.
    pub dt: Option<f64>,
    #[serde(default = "default_true")]
    pub absorb_swaps: bool,
    /// Explicit time points in μ⁻¹.
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub t_start: f64,
    pub t_stop: Option<f64>,
    pub t_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `none`, `h1-1-like` or `torino-like`.
    pub preset: Option<String>,
    #[serde(default)]
    pub channels: Vec<Channel>,
    pub readout: Option<f64>,
    #[serde(default)]
    pub gate_rates: BTreeMap<String, f64>,
    /// Shots per circuit; exact outcome distributions when absent.
    pub shots: Option<u64>,
    #[serde(default = "default_method")]
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    #[serde(default)]
    pub dr: bool,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub d_n: Option<f64>,
    /// Decoherence values tried by `dn-scan`.
    pub scan: Option<Vec<f64>>,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    /// Permits more than three neutrinos.
    #[serde(default)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub stem: Option<String>,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_basis() -> Basis {
    Basis::Flavor
}
fn default_mu() -> f64 {
    1.0
}
fn default_mode() -> Mode {
    Mode::Trotter
}
fn default_backend() -> Backend {
    Backend::QubitB
}
fn default_order() -> Order {
    Order::Lo
}
fn default_true() -> bool {
    true
}
fn default_method() -> Method {
    Method::Auto
}
fn default_scheme() -> Scheme {
    Scheme::Phs
}
fn default_bootstrap() -> usize {
    nuosc::mitigation::DEFAULT_REPLICAS
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            backend: default_backend(),
            order: default_order(),
            steps: None,
            dt: None,
            absorb_swaps: true,
            times: None,
            t_start: 0.0,
            t_stop: None,
            t_count: None,
        }
    }
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self { dr: false, scheme: default_scheme(), d_n: None, scan: None, symmetrize: false, bootstrap: default_bootstrap() }
    }
}

/// Parses `key.path=value`; the value is read as a TOML literal and falls
/// back to a bare string.
pub fn parse_override(s: &str) -> CliResult<(Vec<String>, toml::Value)> {
    let (key, raw) = s.split_once('=').ok_or_else(|| CliError::Config(format!("override {s:?} lacks '='")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::Config(format!("malformed key in override {s:?}")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
    Ok((path, value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> CliResult<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for key in parents {
        let entry = cursor.entry(key.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override path {} crosses a non-table value", path.join("."))))?;
    }
    cursor.insert(last.clone(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            apply_override(&mut table, &path, value)?;
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        let word = self.initial()?;
        let system = self.system()?;
        let evo = &self.evolution;
        match (evo.steps, evo.dt) {
            (Some(_), Some(_)) => return bad("evolution: set either steps or dt, not both".into()),
            (Some(0), _) => return bad("evolution.steps must be at least 1".into()),
            (_, Some(dt)) if !(dt > 0.0 && dt.is_finite()) => return bad(format!("evolution.dt = {dt} must be positive")),
            _ => {}
        }
        let times = self.times()?;
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("evolution: time points must be finite and non-negative".into());
        }
        self.noise_model(word.len())?;
        if let Some(0) = self.noise.shots {
            return bad("noise.shots must be at least 1".into());
        }
        if let Method::Trajectories(0) = self.noise.method {
            return bad("noise.method: at least one trajectory required".into());
        }
        let m = &self.mitigation;
        if let Some(d) = m.d_n {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("mitigation.d_n = {d} outside (0, 1)"));
            }
        }
        if let Some(grid) = &m.scan {
            if grid.is_empty() || grid.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
                return bad("mitigation.scan must list values in (0, 1)".into());
            }
        }
        if m.symmetrize && !system.is_palindromic() {
            return bad(format!("mitigation.symmetrize needs a palindromic initial word, got {:?}", self.system.initial));
        }
        if m.bootstrap == 1 {
            return bad("mitigation.bootstrap must be 0 or at least 2".into());
        }
        if evo.mode == Mode::Exact && (m.dr || self.noise.shots.is_some()) {
            return bad("exact mode takes neither shots nor mitigation".into());
        }
        Ok(())
    }

    pub fn initial(&self) -> CliResult<Vec<Flavor>> {
        let word = Flavor::parse_word(&self.system.initial).map_err(|e| CliError::Config(format!("system.initial: {e}")))?;
        if word.is_empty() {
            return Err(CliError::Config("system.initial is empty".into()));
        }
        Ok(word)
    }

    pub fn mixing(&self) -> MixingParameters {
        let mut m = MixingParameters::central();
        let o = &self.system.mixing;
        if let Some(x) = o.theta12_deg {
            m.theta12 = x.to_radians();
        }
        if let Some(x) = o.theta13_deg {
            m.theta13 = x.to_radians();
        }
        if let Some(x) = o.theta23_deg {
            m.theta23 = x.to_radians();
        }
        if let Some(x) = o.delta_cp_deg {
            m.delta_cp = x.to_radians();
        }
        if let Some(x) = o.dm21_sq {
            m.dm21_sq = x;
        }
        if let Some(x) = o.dm31_sq {
            m.dm31_sq = x;
        }
        m
    }

    pub fn system(&self) -> CliResult<NeutrinoSystem> {
        let cone = NeutrinoSystem::cone(self.system.basis, self.initial()?).map_err(|e| CliError::Config(format!("system: {e}")))?;
        NeutrinoSystem::new(self.system.basis, self.mixing(), self.system.mu, cone.angles, cone.initial)
            .map_err(|e| CliError::Config(format!("system: {e}")))
    }

    pub fn times(&self) -> CliResult<Vec<f64>> {
        let e = &self.evolution;
        match (&e.times, e.t_stop, e.t_count) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                Err(CliError::Config("evolution: give either times or t_stop/t_count".into()))
            }
            (Some(list), None, None) if !list.is_empty() => Ok(list.clone()),
            (None, Some(stop), Some(count)) if count >= 1 => {
                if count == 1 {
                    return Ok(vec![e.t_start]);
                }
                let h = (stop - e.t_start) / (count - 1) as f64;
                Ok((0..count).map(|k| e.t_start + h * k as f64).collect())
            }
            _ => Err(CliError::Config("evolution: a time grid is required (times, or t_stop with t_count >= 1)".into())),
        }
    }

    pub fn steps_at(&self, t: f64) -> usize {
        match (self.evolution.steps, self.evolution.dt) {
            (Some(k), _) => k,
            (None, Some(dt)) => ((t / dt).round() as usize).max(1),
            (None, None) => 1,
        }
    }

    pub fn plan_at(&self, t: f64) -> TrotterPlan {
        let e = &self.evolution;
        TrotterPlan { order: e.order, steps: self.steps_at(t), backend: e.backend, absorb_swaps: e.absorb_swaps }
    }

    pub fn noise_model(&self, n: usize) -> CliResult<NoiseModel> {
        if self.evolution.mode != Mode::Noisy {
            return Ok(NoiseModel::none());
        }
        let nc = &self.noise;
        let mut model = match &nc.preset {
            Some(name) => NoiseModel::preset(name, n).map_err(|e| CliError::Config(format!("noise.preset: {e}")))?,
            None => NoiseModel::none(),
        };
        model.channels.extend(nc.channels.iter().cloned());
        if let Some(r) = nc.readout {
            model.readout = r;
        }
        model.gate_rates.extend(nc.gate_rates.iter().map(|(k, v)| (k.clone(), *v)));
        model.validate().map_err(|e| CliError::Config(format!("noise: {e}")))?;
        Ok(model)
    }

    /// SHA-256 of the canonical form, output block excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputConfig::default();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
