//! Experiment configuration: one TOML file with a few dotted sections.
//!
//! ```toml
//! experiment = "stability"
//! output_dir = "runs/stability"
//! seed = 0
//!
//! [model]
//! gamma = 2.0
//! mu = 1.0
//! tau = 0.01
//!
//! [waves]
//! v_plus = 1.2
//! u_plus = 0.0
//! v_m = 1.0
//! v_minus = 0.9
//!
//! [grid]
//! half_width = "auto"
//! cells = 4096
//!
//! [solver]
//! cfl = 0.9
//! end_time = 200.0
//! output_stride = 20
//!
//! [shift]
//! lambda_amp = "auto"
//!
//! [perturbation]
//! shape = "gaussian_bump"
//! amplitude = 0.01
//! center = "auto"
//! width = "auto"
//! target_fields = ["v", "u"]
//! ```
//!
//! `"auto"` selects the documented default for a knob. A `[sweep]` section
//! with `tau_list` is required for relaxation sweeps and ignored otherwise.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::solver::{Grid, SolverConfig};
use crate::waves::{relaxation_limit, WaveEndStates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Stability,
    RelaxSweep,
    ProfileOnly,
    EntropyCheck,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stability => "stability",
            Self::RelaxSweep => "relax_sweep",
            Self::ProfileOnly => "profile_only",
            Self::EntropyCheck => "entropy_check",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoKeyword {
    Auto,
}

/// A number or the keyword `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "SettingRepr", into = "SettingRepr")]
pub enum Setting {
    Value(f64),
    Auto,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum SettingRepr {
    Value(f64),
    Keyword(AutoKeyword),
}

impl From<SettingRepr> for Setting {
    fn from(r: SettingRepr) -> Self {
        match r {
            SettingRepr::Value(x) => Setting::Value(x),
            SettingRepr::Keyword(AutoKeyword::Auto) => Setting::Auto,
        }
    }
}

impl From<Setting> for SettingRepr {
    fn from(s: Setting) -> Self {
        match s {
            Setting::Value(x) => SettingRepr::Value(x),
            Setting::Auto => SettingRepr::Keyword(AutoKeyword::Auto),
        }
    }
}

impl Setting {
    pub fn resolve(self, default: impl FnOnce() -> f64) -> f64 {
        match self {
            Setting::Value(x) => x,
            Setting::Auto => default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: f64,
    pub mu: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavesSection {
    pub v_plus: f64,
    pub u_plus: f64,
    pub v_m: f64,
    pub v_minus: f64,
    /// Rarefaction smoothing; `"auto"` is `δ_R³`.
    #[serde(default = "auto")]
    pub eps: Setting,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_profile_tol")]
    pub profile_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// `"auto"` is `max(40/δ_S, 8|λ₁(v₋)|T)`.
    pub half_width: Setting,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub cfl: f64,
    pub end_time: f64,
    pub output_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSection {
    /// `"auto"` is `√δ_S`.
    pub lambda_amp: Setting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    GaussianBump,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    V,
    U,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub shape: Shape,
    pub amplitude: f64,
    /// `"auto"` is `−width`, between the fan and the shock.
    pub center: Setting,
    /// `"auto"` is `5/δ_S`.
    pub width: Setting,
    pub target_fields: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub tau_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    /// Recorded for reproducibility; the built-in perturbation shapes are
    /// deterministic.
    pub seed: u64,
    pub model: ModelSection,
    pub waves: WavesSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub shift: ShiftSection,
    pub perturbation: PerturbationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn auto() -> Setting {
    Setting::Auto
}

fn default_q() -> f64 {
    2.0
}

fn default_profile_tol() -> f64 {
    1e-10
}

/// Numbers derived from a validated configuration.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub model: GasModel,
    pub end_states: WaveEndStates,
    pub grid: Grid,
    pub lambda_amp: f64,
    pub eps: Option<f64>,
    pub center: f64,
    pub width: f64,
    /// `min{inf μ/|h′|, 1}` over the shock.
    pub tau_window: f64,
}

impl ExperimentConfig {
    /// Reference configuration for each experiment.
    pub fn preset(kind: ExperimentKind) -> Self {
        let (half_width, cells, end_time, stride) = match kind {
            ExperimentKind::Stability => (Setting::Auto, 4096, 200.0, 20),
            ExperimentKind::RelaxSweep => (Setting::Value(80.0), 1024, 2.0, 50),
            ExperimentKind::ProfileOnly => (Setting::Auto, 1024, 1.0, 1),
            ExperimentKind::EntropyCheck => (Setting::Auto, 2048, 2.0, 8),
        };
        Self {
            experiment: kind,
            output_dir: PathBuf::from(format!("runs/{kind}")),
            seed: 0,
            model: ModelSection {
                gamma: 2.0,
                mu: 1.0,
                tau: 0.01,
            },
            waves: WavesSection {
                v_plus: 1.2,
                u_plus: 0.0,
                v_m: 1.0,
                v_minus: 0.9,
                eps: Setting::Auto,
                q: default_q(),
                profile_tol: default_profile_tol(),
            },
            grid: GridSection { half_width, cells },
            solver: SolverSection {
                cfl: 0.9,
                end_time,
                output_stride: stride,
            },
            shift: ShiftSection {
                lambda_amp: Setting::Auto,
            },
            perturbation: PerturbationSection {
                shape: Shape::GaussianBump,
                amplitude: 0.01,
                center: Setting::Auto,
                width: Setting::Auto,
                target_fields: vec![Field::V, Field::U],
            },
            sweep: (kind == ExperimentKind::RelaxSweep).then(|| SweepSection {
                tau_list: vec![1e-2, 1e-3, 1e-4],
            }),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML rendering, used for the config echo and the hash.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Git blob hash of the canonical rendering.
    pub fn content_hash(&self) -> Result<String> {
        Ok(git_blob_hash(self.to_toml_string()?.as_bytes()))
    }

    /// Checks every constraint that can be checked before computing.
    pub fn validate(&self) -> Result<Resolved> {
        let m = &self.model;
        let model = GasModel::new(m.gamma, m.mu, m.tau)?;
        let w = &self.waves;
        let end_states = WaveEndStates::build(&model, w.v_plus, w.u_plus, w.v_m, w.v_minus)?;
        if !(w.q > 1.5 && w.q.is_finite()) {
            return Err(Error::Config(format!("waves.q must exceed 1.5, got {}", w.q)));
        }
        if !(w.profile_tol > 0.0 && w.profile_tol < 1e-3) {
            return Err(Error::Config(format!(
                "waves.profile_tol must lie in (0, 1e-3), got {}",
                w.profile_tol
            )));
        }
        let eps = match w.eps {
            Setting::Auto => None,
            Setting::Value(e) if e > 0.0 && e.is_finite() => Some(e),
            Setting::Value(e) => return Err(Error::Config(format!("waves.eps must be positive, got {e}"))),
        };

        let tau_window = relaxation_limit(&model, &end_states).min(1.0);
        let check_tau = |tau: f64, key: &str| -> Result<()> {
            if !(tau >= 0.0 && tau <= tau_window) {
                return Err(Error::Config(format!(
                    "{key} = {tau} lies outside the admissible window [0, {tau_window:.6}]"
                )));
            }
            Ok(())
        };
        check_tau(m.tau, "model.tau")?;
        let needs_relaxation = matches!(self.experiment, ExperimentKind::Stability | ExperimentKind::EntropyCheck);
        if needs_relaxation && m.tau == 0.0 {
            return Err(Error::Config(format!(
                "{} runs the relaxed system and needs model.tau > 0",
                self.experiment
            )));
        }
        match (&self.sweep, self.experiment) {
            (Some(s), ExperimentKind::RelaxSweep) => {
                if s.tau_list.is_empty() {
                    return Err(Error::Config("sweep.tau_list is empty".into()));
                }
                for &tau in &s.tau_list {
                    if tau == 0.0 {
                        return Err(Error::Config(
                            "sweep.tau_list entries must be positive; the classical reference is run separately".into(),
                        ));
                    }
                    check_tau(tau, "sweep.tau_list entry")?;
                }
                if s.tau_list.windows(2).any(|p| p[1] > p[0]) {
                    return Err(Error::Config("sweep.tau_list must be sorted in descending order".into()));
                }
            }
            (None, ExperimentKind::RelaxSweep) => {
                return Err(Error::Config("relax_sweep needs a [sweep] section with tau_list".into()));
            }
            _ => {}
        }

        let s = &self.solver;
        if !(s.end_time > 0.0 && s.end_time.is_finite()) {
            return Err(Error::Config(format!("solver.end_time must be positive, got {}", s.end_time)));
        }
        if s.output_stride == 0 {
            return Err(Error::Config("solver.output_stride must be at least 1".into()));
        }
        if !(s.cfl > 0.0 && s.cfl <= SolverConfig::MAX_CFL) {
            return Err(Error::Config(format!(
                "solver.cfl must lie in (0, {}], got {}",
                SolverConfig::MAX_CFL,
                s.cfl
            )));
        }

        let lambda1_minus = model.lambda1(end_states.v_minus);
        let half_width = self
            .grid
            .half_width
            .resolve(|| Grid::default_half_width(end_states.delta_s, lambda1_minus, s.end_time));
        let grid = Grid::new(half_width, self.grid.cells)?;

        let lambda_amp = self.shift.lambda_amp.resolve(|| end_states.delta_s.sqrt());
        if !(lambda_amp > 0.0 && lambda_amp.is_finite()) {
            return Err(Error::Config(format!("shift.lambda_amp must be positive, got {lambda_amp}")));
        }

        let p = &self.perturbation;
        let width = p.width.resolve(|| 5.0 / end_states.delta_s);
        let center = p.center.resolve(|| -width);
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Config(format!("perturbation.width must be positive, got {width}")));
        }
        if !center.is_finite() {
            return Err(Error::Config("perturbation.center must be finite".into()));
        }
        if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "perturbation.amplitude must be non-negative, got {}",
                p.amplitude
            )));
        }
        if p.target_fields.contains(&Field::V) && p.amplitude >= 0.5 * end_states.v_minus {
            return Err(Error::Config(format!(
                "perturbation.amplitude {} is too large to keep v positive",
                p.amplitude
            )));
        }
        Ok(Resolved {
            model,
            end_states,
            grid,
            lambda_amp,
            eps,
            center,
            width,
            tau_window,
        })
    }
}

impl Resolved {
    /// Perturbation added to the composite at `ξ`.
    pub fn bump(&self, config: &ExperimentConfig, xi: f64) -> f64 {
        let p = &config.perturbation;
        match p.shape {
            Shape::Zero => 0.0,
            Shape::GaussianBump => p.amplitude * (-((xi - self.center) / self.width).powi(2)).exp(),
        }
    }
}

/// `sha1("blob <len>\0" + data)` as lowercase hex.
pub fn git_blob_hash(data: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", data.len()).as_bytes());
    h.update(data);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
