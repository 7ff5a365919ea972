use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angular::ChannelSet;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::observables::{MomentumBins, PolarGrid};
use crate::propagator::{build_plan, AbsorberSpec, Propagation, DEFAULT_TOLERANCE};
use crate::system::{MolecularSystem, PotentialCurve, Pulse, SystemParams, Table, TransitionDipole};
use crate::thermal::{Backend, JMaxPolicy, ThermalEnsemble, DEFAULT_PRUNE_THRESHOLD};
use crate::units::{self, Dimension, Quantity};
use crate::presets;

/// A complete experiment: system, pulse, ensemble and output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub pulse: PulseConfig,
    pub thermal: ThermalConfig,
    pub propagation: PropagationConfig,
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub reduced_mass: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_cap: Option<Quantity>,
    pub grid: GridConfig,
    pub ground: CurveConfig,
    pub excited: CurveConfig,
    pub dipole: DipoleConfig,
    pub rotation: RotationConfig,
}

/// Radial grid of `points` intervals ending at `r_max`. Exactly one of
/// `r_min` and `dr` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub r_max: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Morse {
        depth: Quantity,
        width: Quantity,
        r_eq: Quantity,
        #[serde(default = "zero_energy")]
        asymptote: Quantity,
    },
    Exponential {
        amplitude: Quantity,
        decay: Quantity,
        #[serde(default = "zero_energy")]
        asymptote: Quantity,
    },
    Table(TableSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DipoleConfig {
    Constant { value: Quantity },
    Table(TableSource),
}

/// Two-column text table with the units of each column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSource {
    pub file: PathBuf,
    pub r_unit: String,
    pub value_unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationConfig {
    pub j_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub intensity: Quantity,
    pub wavelength: Quantity,
    /// FWHM of the field envelope.
    pub fwhm: Quantity,
    /// Defaults to three FWHM after `t = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cep: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub temperature: Quantity,
    pub initial_j_max: JMaxSetting,
    #[serde(default = "default_prune")]
    pub prune_threshold: f64,
}

/// `"auto"` or a fixed level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JMaxSetting {
    Fixed(u32),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

impl JMaxSetting {
    pub const AUTO: JMaxSetting = JMaxSetting::Keyword(AutoKeyword::Auto);

    pub fn policy(self) -> JMaxPolicy {
        match self {
            JMaxSetting::Fixed(j) => JMaxPolicy::Fixed(j),
            JMaxSetting::Keyword(AutoKeyword::Auto) => JMaxPolicy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    pub dt: Quantity,
    pub steps: usize,
    #[serde(default = "default_tolerance")]
    pub chebyshev_tolerance: f64,
    /// Start of the absorbing mask. Without it the box is closed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber_onset: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendSelection {
    Exact,
    Rpw,
    Both,
    Detphase,
}

impl BackendSelection {
    pub fn backends(self) -> Vec<Backend> {
        match self {
            BackendSelection::Exact => vec![Backend::Exact],
            BackendSelection::Rpw => vec![Backend::Rpw],
            BackendSelection::Both => vec![Backend::Exact, Backend::Rpw],
            BackendSelection::Detphase => vec![Backend::DeterministicPhase],
        }
    }
}

impl std::str::FromStr for BackendSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BackendSelection::Exact),
            "rpw" => Ok(BackendSelection::Rpw),
            "both" => Ok(BackendSelection::Both),
            "detphase" => Ok(BackendSelection::Detphase),
            other => Err(Error::Config(format!(
                "unknown backend `{other}` (expected exact, rpw, both or detphase)"
            ))),
        }
    }
}

/// How RPW members are evaluated. `Replay` superposes the exact members'
/// fragment amplitudes instead of propagating, which is only available
/// together with the exact backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RpwMode {
    #[default]
    Propagate,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub backend: BackendSelection,
    #[serde(default)]
    pub realizations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub rpw_mode: RpwMode,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    #[default]
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub distribution_format: MatrixFormat,
    /// Number of polar intervals; nodes run from 0 to π inclusive.
    #[serde(default = "default_theta_intervals")]
    pub theta_intervals: usize,
    #[serde(default = "yes")]
    pub distribution: bool,
    /// Also dump every member's final fragment amplitudes.
    #[serde(default)]
    pub save_states: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            distribution_format: MatrixFormat::Text,
            theta_intervals: default_theta_intervals(),
            distribution: true,
            save_states: false,
        }
    }
}

fn zero_energy() -> Quantity {
    Quantity::new(0.0, "hartree")
}

fn default_prune() -> f64 {
    DEFAULT_PRUNE_THRESHOLD
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_workers() -> usize {
    1
}

fn default_directory() -> PathBuf {
    PathBuf::from("output")
}

fn default_theta_intervals() -> usize {
    180
}

fn yes() -> bool {
    true
}

/// Reads, parses and validates an experiment file. Relative table paths are
/// resolved against the file's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.resolve_paths(base);
    Ok(config)
}

impl ExperimentConfig {
    /// Parses and validates TOML text.
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hash_text(&self.to_toml())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |src: &mut TableSource| {
            if src.file.is_relative() {
                src.file = base.join(&src.file);
            }
        };
        for curve in [&mut self.system.ground, &mut self.system.excited] {
            if let CurveConfig::Table(src) = curve {
                resolve(src);
            }
        }
        if let DipoleConfig::Table(src) = &mut self.system.dipole {
            resolve(src);
        }
    }

    /// Checks units and value constraints without building the system.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        positive(&s.reduced_mass, Dimension::Mass, "system.reduced_mass")?;
        if let Some(cap) = &s.potential_cap {
            cap.to_internal(Dimension::Energy)?;
        }
        self.grid_bounds()?;
        for (name, curve) in [("ground", &s.ground), ("excited", &s.excited)] {
            match curve {
                CurveConfig::Morse {
                    depth,
                    width,
                    r_eq,
                    asymptote,
                } => {
                    positive(depth, Dimension::Energy, &format!("system.{name}.depth"))?;
                    positive(width, Dimension::InverseLength, &format!("system.{name}.width"))?;
                    positive(r_eq, Dimension::Length, &format!("system.{name}.r_eq"))?;
                    asymptote.to_internal(Dimension::Energy)?;
                }
                CurveConfig::Exponential {
                    amplitude,
                    decay,
                    asymptote,
                } => {
                    amplitude.to_internal(Dimension::Energy)?;
                    positive(decay, Dimension::InverseLength, &format!("system.{name}.decay"))?;
                    asymptote.to_internal(Dimension::Energy)?;
                }
                CurveConfig::Table(src) => src.check(Dimension::Energy)?,
            }
        }
        match &s.dipole {
            DipoleConfig::Constant { value } => {
                value.to_internal(Dimension::Dipole)?;
            }
            DipoleConfig::Table(src) => src.check(Dimension::Dipole)?,
        }
        if let Some(m) = s.rotation.m_max {
            if m > s.rotation.j_max {
                return Err(Error::Config(format!(
                    "system.rotation.m_max = {m} exceeds j_max = {}",
                    s.rotation.j_max
                )));
            }
        }

        let p = &self.pulse;
        let intensity = p.intensity.to_internal(Dimension::Intensity)?;
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return Err(Error::Config("pulse.intensity must be non-negative".into()));
        }
        positive(&p.wavelength, Dimension::Length, "pulse.wavelength")?;
        positive(&p.fwhm, Dimension::Time, "pulse.fwhm")?;
        if let Some(c) = &p.center {
            c.to_internal(Dimension::Time)?;
        }
        if let Some(c) = &p.cep {
            c.to_internal(Dimension::Angle)?;
        }

        positive(&self.thermal.temperature, Dimension::Temperature, "thermal.temperature")?;
        if !(self.thermal.prune_threshold >= 0.0 && self.thermal.prune_threshold < 1.0) {
            return Err(Error::Config("thermal.prune_threshold must lie in [0, 1)".into()));
        }
        if let JMaxSetting::Fixed(j) = self.thermal.initial_j_max {
            if j > s.rotation.j_max {
                return Err(Error::Config(format!(
                    "thermal.initial_j_max = {j} exceeds system.rotation.j_max = {}",
                    s.rotation.j_max
                )));
            }
        }

        let pr = &self.propagation;
        positive(&pr.dt, Dimension::Time, "propagation.dt")?;
        if pr.steps == 0 {
            return Err(Error::Config("propagation.steps must be positive".into()));
        }
        if !(pr.chebyshev_tolerance > 0.0 && pr.chebyshev_tolerance < 1.0) {
            return Err(Error::Config("propagation.chebyshev_tolerance must lie in (0, 1)".into()));
        }
        if let Some(onset) = &pr.absorber_onset {
            let (r_min, r_max) = self.grid_bounds()?;
            let x = onset.to_internal(Dimension::Length)?;
            if !(x > r_min && x < r_max) {
                return Err(Error::Config(format!(
                    "propagation.absorber_onset = {onset} lies outside the grid"
                )));
            }
        }

        let e = &self.ensemble;
        let needs_k = matches!(e.backend, BackendSelection::Rpw | BackendSelection::Both);
        if needs_k && e.realizations == 0 {
            return Err(Error::Config("ensemble.realizations must be positive for RPW runs".into()));
        }
        if e.rpw_mode == RpwMode::Replay && e.backend != BackendSelection::Both {
            return Err(Error::Config(
                "ensemble.rpw_mode = \"replay\" requires backend = \"both\"".into(),
            ));
        }
        if e.workers == 0 {
            return Err(Error::Config("ensemble.workers must be positive".into()));
        }
        if let Some(ladder) = &e.k_ladder {
            if ladder.is_empty()
                || ladder[0] == 0
                || ladder.windows(2).any(|w| w[1] <= w[0])
                || *ladder.last().unwrap() > e.realizations
            {
                return Err(Error::Config(
                    "ensemble.k_ladder must be strictly increasing within 1..=realizations".into(),
                ));
            }
        }
        if self.output.theta_intervals < 2 * s.rotation.j_max as usize {
            return Err(Error::Config(format!(
                "output.theta_intervals must be at least 2 j_max = {}",
                2 * s.rotation.j_max
            )));
        }
        Ok(())
    }

    /// `(r_min, r_max)` in bohr.
    pub fn grid_bounds(&self) -> Result<(f64, f64)> {
        let g = &self.system.grid;
        if g.points < 4 {
            return Err(Error::Config("system.grid.points must be at least 4".into()));
        }
        let r_max = g.r_max.to_internal(Dimension::Length)?;
        let r_min = match (&g.r_min, &g.dr) {
            (Some(r), None) => r.to_internal(Dimension::Length)?,
            (None, Some(dr)) => r_max - g.points as f64 * positive(dr, Dimension::Length, "system.grid.dr")?,
            _ => {
                return Err(Error::Config(
                    "system.grid needs exactly one of r_min and dr".into(),
                ))
            }
        };
        if !(r_min >= 0.0 && r_max > r_min) {
            return Err(Error::Config(format!(
                "system.grid spans [{r_min}, {r_max}] bohr; need 0 <= r_min < r_max"
            )));
        }
        Ok((r_min, r_max))
    }

    pub fn dt(&self) -> Result<f64> {
        self.propagation.dt.to_internal(Dimension::Time)
    }

    pub fn pulse(&self) -> Result<Pulse> {
        let p = &self.pulse;
        let fwhm = p.fwhm.to_internal(Dimension::Time)?;
        Ok(Pulse {
            peak_field: units::field_from_intensity(p.intensity.to_internal(Dimension::Intensity)?),
            omega: units::photon_energy_from_wavelength(p.wavelength.in_unit("nm")?),
            fwhm,
            center: match &p.center {
                Some(c) => c.to_internal(Dimension::Time)?,
                None => 3.0 * fwhm,
            },
            cep: match &p.cep {
                Some(c) => c.to_internal(Dimension::Angle)?,
                None => 0.0,
            },
        })
    }

    pub fn system(&self) -> Result<MolecularSystem> {
        let s = &self.system;
        let (r_min, r_max) = self.grid_bounds()?;
        let grid = RadialGrid::new(r_min, r_max, s.grid.points)?;
        let channels = ChannelSet::new(s.rotation.j_max, s.rotation.m_max, 2)?;
        let params = SystemParams {
            reduced_mass: s.reduced_mass.to_internal(Dimension::Mass)?,
            ground: s.ground.curve()?,
            excited: s.excited.curve()?,
            dipole: s.dipole.dipole()?,
            pulse: self.pulse()?,
            potential_cap: s
                .potential_cap
                .as_ref()
                .map(|q| q.to_internal(Dimension::Energy))
                .transpose()?,
        };
        MolecularSystem::new(grid, channels, params)
    }

    pub fn propagation(&self, sys: &MolecularSystem) -> Result<Propagation> {
        let pr = &self.propagation;
        let plan = build_plan(sys, self.dt()?, pr.chebyshev_tolerance)?;
        let absorber = match &pr.absorber_onset {
            Some(onset) => AbsorberSpec::new(sys.grid(), onset.to_internal(Dimension::Length)?)?,
            None => AbsorberSpec::disabled(sys.grid()),
        };
        Ok(Propagation {
            plan,
            absorber,
            n_steps: pr.steps,
        })
    }

    pub fn ensemble(&self, sys: &MolecularSystem) -> Result<ThermalEnsemble> {
        let t = &self.thermal;
        ThermalEnsemble::new(
            sys,
            t.temperature.to_internal(Dimension::Temperature)?,
            t.initial_j_max.policy(),
            t.prune_threshold,
        )
    }

    /// The K values at which convergence rows are recorded.
    pub fn k_ladder(&self) -> Vec<usize> {
        match &self.ensemble.k_ladder {
            Some(l) => l.clone(),
            None => crate::observables::k_ladder(self.ensemble.realizations),
        }
    }

    /// Defaults from the reference parameter sheet, with the analytic
    /// stand-in curves of [`presets`].
    pub fn table1(intensity_w_cm2: f64) -> Self {
        let fwhm = presets::TABLE1_FWHM_FS;
        ExperimentConfig {
            system: SystemConfig {
                reduced_mass: Quantity::new(presets::TABLE1_REDUCED_MASS_AMU, "amu"),
                potential_cap: None,
                grid: GridConfig {
                    points: presets::TABLE1_POINTS,
                    r_max: Quantity::new(presets::TABLE1_R_MAX, "bohr"),
                    r_min: None,
                    dr: Some(Quantity::new(presets::TABLE1_DR, "bohr")),
                },
                ground: curve_config(&presets::table1_ground()),
                excited: curve_config(&presets::table1_excited()),
                dipole: DipoleConfig::Constant {
                    value: Quantity::new(1.0, "au_dipole"),
                },
                rotation: RotationConfig {
                    j_max: presets::TABLE1_J_MAX,
                    m_max: None,
                },
            },
            pulse: PulseConfig {
                intensity: Quantity::new(intensity_w_cm2, "W/cm2"),
                wavelength: Quantity::new(presets::TABLE1_WAVELENGTH_NM, "nm"),
                fwhm: Quantity::new(fwhm, "fs"),
                center: Some(Quantity::new(3.0 * fwhm, "fs")),
                cep: None,
            },
            thermal: ThermalConfig {
                temperature: Quantity::new(presets::TABLE1_TEMPERATURE_K, "K"),
                initial_j_max: JMaxSetting::AUTO,
                prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            },
            propagation: PropagationConfig {
                dt: Quantity::new(presets::TABLE1_DT_FS, "fs"),
                steps: presets::TABLE1_STEPS,
                chebyshev_tolerance: DEFAULT_TOLERANCE,
                absorber_onset: Some(Quantity::new(40.0, "bohr")),
            },
            ensemble: EnsembleConfig {
                backend: BackendSelection::Both,
                realizations: 200,
                seed: 20_240_101,
                k_ladder: None,
                rpw_mode: RpwMode::Propagate,
                workers: 1,
            },
            output: OutputConfig::default(),
        }
    }

    /// The toy system in a closed box.
    pub fn toy(intensity_w_cm2: f64) -> Self {
        let fwhm = presets::TOY_FWHM_FS;
        let r_min = presets::TOY_R_MIN;
        ExperimentConfig {
            system: SystemConfig {
                reduced_mass: Quantity::new(1.0, "amu"),
                potential_cap: None,
                grid: GridConfig {
                    points: presets::TOY_POINTS,
                    r_max: Quantity::new(r_min + presets::TOY_POINTS as f64 * presets::TOY_DR, "bohr"),
                    r_min: Some(Quantity::new(r_min, "bohr")),
                    dr: None,
                },
                ground: curve_config(&presets::toy_ground()),
                excited: curve_config(&presets::toy_excited()),
                dipole: DipoleConfig::Constant {
                    value: Quantity::new(1.0, "au_dipole"),
                },
                rotation: RotationConfig {
                    j_max: presets::TOY_J_MAX,
                    m_max: None,
                },
            },
            pulse: PulseConfig {
                intensity: Quantity::new(intensity_w_cm2, "W/cm2"),
                wavelength: Quantity::new(presets::TOY_WAVELENGTH_NM, "nm"),
                fwhm: Quantity::new(fwhm, "fs"),
                center: None,
                cep: None,
            },
            thermal: ThermalConfig {
                temperature: Quantity::new(presets::TOY_TEMPERATURE_K, "K"),
                initial_j_max: JMaxSetting::Fixed(presets::TOY_INITIAL_J_MAX),
                prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            },
            propagation: PropagationConfig {
                dt: Quantity::new(presets::TOY_DT_FS, "fs"),
                steps: presets::TOY_STEPS,
                chebyshev_tolerance: DEFAULT_TOLERANCE,
                absorber_onset: None,
            },
            ensemble: EnsembleConfig {
                backend: BackendSelection::Both,
                realizations: 200,
                seed: 7,
                k_ladder: None,
                rpw_mode: RpwMode::Replay,
                workers: 1,
            },
            output: OutputConfig {
                theta_intervals: 90,
                ..OutputConfig::default()
            },
        }
    }
}

pub(crate) fn hash_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn positive(q: &Quantity, dim: Dimension, name: &str) -> Result<f64> {
    let v = q.to_internal(dim)?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Config(format!("{name} must be positive, got {q}")));
    }
    Ok(v)
}

fn curve_config(curve: &PotentialCurve) -> CurveConfig {
    match *curve {
        PotentialCurve::Morse {
            depth,
            width,
            r_eq,
            asymptote,
        } => CurveConfig::Morse {
            depth: Quantity::new(depth, "hartree"),
            width: Quantity::new(width, "1/bohr"),
            r_eq: Quantity::new(r_eq, "bohr"),
            asymptote: Quantity::new(asymptote, "hartree"),
        },
        PotentialCurve::RepulsiveExponential {
            amplitude,
            decay,
            asymptote,
        } => CurveConfig::Exponential {
            amplitude: Quantity::new(amplitude, "hartree"),
            decay: Quantity::new(decay, "1/bohr"),
            asymptote: Quantity::new(asymptote, "hartree"),
        },
        PotentialCurve::Tabulated(_) => unreachable!("presets are analytic"),
    }
}

impl TableSource {
    fn check(&self, value_dim: Dimension) -> Result<()> {
        Quantity::new(1.0, &self.r_unit).to_internal(Dimension::Length)?;
        Quantity::new(1.0, &self.value_unit).to_internal(value_dim)?;
        Ok(())
    }

    fn load(&self, value_dim: Dimension) -> Result<Table> {
        let raw = Table::load(&self.file)?;
        let fr = Quantity::new(1.0, &self.r_unit).to_internal(Dimension::Length)?;
        let fv = Quantity::new(1.0, &self.value_unit).to_internal(value_dim)?;
        let (r, v) = raw.rows();
        Table::new(
            r.iter().map(|x| x * fr).collect(),
            v.iter().map(|x| x * fv).collect(),
        )
    }
}

impl CurveConfig {
    pub fn curve(&self) -> Result<PotentialCurve> {
        Ok(match self {
            CurveConfig::Morse {
                depth,
                width,
                r_eq,
                asymptote,
            } => PotentialCurve::Morse {
                depth: depth.to_internal(Dimension::Energy)?,
                width: width.to_internal(Dimension::InverseLength)?,
                r_eq: r_eq.to_internal(Dimension::Length)?,
                asymptote: asymptote.to_internal(Dimension::Energy)?,
            },
            CurveConfig::Exponential {
                amplitude,
                decay,
                asymptote,
            } => PotentialCurve::RepulsiveExponential {
                amplitude: amplitude.to_internal(Dimension::Energy)?,
                decay: decay.to_internal(Dimension::InverseLength)?,
                asymptote: asymptote.to_internal(Dimension::Energy)?,
            },
            CurveConfig::Table(src) => PotentialCurve::Tabulated(src.load(Dimension::Energy)?),
        })
    }
}

impl DipoleConfig {
    pub fn dipole(&self) -> Result<TransitionDipole> {
        Ok(match self {
            DipoleConfig::Constant { value } => TransitionDipole::Constant(value.to_internal(Dimension::Dipole)?),
            DipoleConfig::Table(src) => TransitionDipole::Tabulated(src.load(Dimension::Dipole)?),
        })
    }
}

/// Everything built from a config that a run needs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub system: MolecularSystem,
    pub propagation: Propagation,
    pub ensemble: ThermalEnsemble,
    pub bins: MomentumBins,
    pub polar: PolarGrid,
}

impl Experiment {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let system = config.system()?;
        let propagation = config.propagation(&system)?;
        let ensemble = config.ensemble(&system)?;
        let bins = MomentumBins::new(system.grid().len(), system.grid().dp());
        let polar = PolarGrid::new(config.output.theta_intervals)?;
        Ok(Experiment {
            config: config.clone(),
            system,
            propagation,
            ensemble,
            bins,
            polar,
        })
    }
}
