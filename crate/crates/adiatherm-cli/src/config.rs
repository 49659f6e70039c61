//! TOML experiment configs.
//!
//! Frequencies are entered as ordinary frequencies with explicit unit-suffix
//! keys (`lambda0_khz = 5.0` means λ₀/2π = 5 kHz) and converted to angular
//! rad/s here, at the boundary; everything below the CLI works in rad/s.
//! Validation collects every problem before reporting, so a config with three
//! mistakes produces three field-anchored messages in one pass.

use adiatherm::protocol::{DEFAULT_EPSILON, DEFAULT_TAIL_TOL};
use adiatherm::{
    Error, ExperimentConfig, JcModel, MotionSpec, PhysicalParams, Schedule, SweepAxis,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

/// Parsed config file, prior to unit conversion and semantic validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Must match the subcommand the config is run under.
    pub experiment: String,
    pub system: SystemSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub motion: MotionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    pub output: OutputSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub num_ions: u32,
    pub mode_freq_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_freq_mhz: Option<f64>,
    #[serde(default)]
    pub lamb_dicke: f64,
    /// "linear" or "nonlinear" drive model; default linear.
    #[serde(default = "default_model")]
    pub model: String,
}

fn default_model() -> String {
    "linear".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub lambda0_khz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0_khz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_khz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSection {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Default for MotionSection {
    fn default() -> Self {
        MotionSection {
            kind: default_kind(),
            alpha: None,
            epsilon: None,
        }
    }
}

fn default_kind() -> String {
    "thermal".to_string()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_khz: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0_khz: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_points: Option<usize>,
    /// Thermal occupations crossed with a gamma/delta0 fidelity axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_list: Option<Vec<f64>>,
    /// Ion numbers for Fisher sweeps (default: the [system] value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ion_numbers: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sector: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    /// "Much greater than" factor for the addressability criterion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

/// Config-level failure: parse error or one-or-more validation messages.
#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, msg) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// What the CLI actually executes after validation and unit conversion.
#[derive(Debug, Clone)]
pub enum Plan {
    Thermometry(ExperimentConfig),
    Fisher(ExperimentConfig, Vec<u32>),
    Fidelity(ExperimentConfig),
    Spectrum(ExperimentConfig),
    CatPhase(ExperimentConfig),
    CoherentTrace(ExperimentConfig),
    Validate(ValidatePlan),
}

#[derive(Debug, Clone)]
pub struct ValidatePlan {
    pub num_ions: u32,
    pub mode_freq: f64,
    pub axial_freq: Option<f64>,
    pub lambda0: f64,
    pub delta0: f64,
    pub threshold: f64,
}

pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(vec![format!("{}: {e}", path.display())]))?;
    toml::from_str(&text).map_err(|e| ConfigError(vec![format!("{}: {e}", path.display())]))
}

fn khz(v: f64) -> f64 {
    2.0 * PI * v * 1e3
}

fn mhz(v: f64) -> f64 {
    2.0 * PI * v * 1e6
}

struct Checker {
    errors: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker { errors: Vec::new() }
    }

    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn positive(&mut self, field: &str, v: f64) -> f64 {
        if !(v > 0.0 && v.is_finite()) {
            self.err(format!("{field}: must be > 0, got {v}"));
        }
        v
    }

    fn finish(self) -> Result<(), ConfigError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(self.errors))
        }
    }
}

impl ConfigFile {
    /// Validate against the invoked subcommand and produce an executable plan.
    pub fn build(&self, subcommand: &str) -> Result<Plan, ConfigError> {
        let mut ck = Checker::new();
        if self.experiment != subcommand {
            ck.err(format!(
                "experiment: config is for '{}' but was run under '{subcommand}'",
                self.experiment
            ));
        }

        // ---- [system] -------------------------------------------------
        if self.system.num_ions == 0 {
            ck.err("system.num_ions: must be at least 1");
        }
        ck.positive("system.mode_freq_mhz", self.system.mode_freq_mhz);
        if let Some(az) = self.system.axial_freq_mhz {
            ck.positive("system.axial_freq_mhz", az);
            if az >= self.system.mode_freq_mhz {
                ck.err(format!(
                    "system.axial_freq_mhz: must be below mode_freq_mhz ({az} >= {})",
                    self.system.mode_freq_mhz
                ));
            }
        }
        if !(self.system.lamb_dicke >= 0.0 && self.system.lamb_dicke.is_finite()) {
            ck.err(format!(
                "system.lamb_dicke: must be >= 0, got {}",
                self.system.lamb_dicke
            ));
        }
        let model = match self.system.model.as_str() {
            "linear" => JcModel::LinearJC,
            "nonlinear" => JcModel::NonlinearJC,
            other => {
                ck.err(format!(
                    "system.model: expected 'linear' or 'nonlinear', got '{other}'"
                ));
                JcModel::LinearJC
            }
        };

        // ---- [schedule] scalars ----------------------------------------
        ck.positive("schedule.lambda0_khz", self.schedule.lambda0_khz);
        if let Some(d) = self.schedule.delta0_khz {
            ck.positive("schedule.delta0_khz", d);
        }
        if let Some(g) = self.schedule.gamma_khz {
            ck.positive("schedule.gamma_khz", g);
        }

        // ---- numerics ---------------------------------------------------
        let tail_tol = self.numerics.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            ck.err(format!(
                "numerics.tail_tol: must lie in (0, 1), got {tail_tol}"
            ));
        }
        if self.numerics.steps == Some(0) {
            ck.err("numerics.steps: must be at least 1 when given");
        }
        if self.numerics.max_sector.is_some() && subcommand != "spectrum" {
            ck.err("numerics.max_sector: only used by the spectrum experiment");
        }

        // ---- sweep axis bookkeeping -------------------------------------
        let allowed: &[&str] = match subcommand {
            "thermometry" => &["nbar", "temperature_k"],
            "fisher" => &["nbar", "temperature_k", "ion_numbers"],
            "fidelity" => &["gamma_khz", "delta0_khz", "nbar_list"],
            "spectrum" | "coherent-trace" => &["time_points"],
            "cat-phase" => &["alpha"],
            "validate" => &[],
            other => {
                ck.err(format!("unknown subcommand '{other}'"));
                &[]
            }
        };
        for (key, present) in [
            ("nbar", self.sweep.nbar.is_some()),
            ("temperature_k", self.sweep.temperature_k.is_some()),
            ("gamma_khz", self.sweep.gamma_khz.is_some()),
            ("delta0_khz", self.sweep.delta0_khz.is_some()),
            ("alpha", self.sweep.alpha.is_some()),
            ("time_points", self.sweep.time_points.is_some()),
            ("nbar_list", self.sweep.nbar_list.is_some()),
            ("ion_numbers", self.sweep.ion_numbers.is_some()),
        ] {
            if present && !allowed.contains(&key) {
                ck.err(format!(
                    "sweep.{key}: not used by the {subcommand} experiment"
                ));
            }
        }

        // ---- motion -----------------------------------------------------
        let motion = match (subcommand, self.motion.kind.as_str()) {
            ("coherent-trace", "coherent") => match self.motion.alpha {
                Some(a) => MotionSpec::Coherent { alpha: a },
                None => {
                    ck.err("motion.alpha: required for coherent motion");
                    MotionSpec::Coherent { alpha: 1.0 }
                }
            },
            ("coherent-trace", other) => {
                ck.err(format!(
                    "motion.kind: coherent-trace requires 'coherent', got '{other}'"
                ));
                MotionSpec::Coherent { alpha: 1.0 }
            }
            ("cat-phase", "cat") => {
                if self.motion.alpha.is_some() {
                    ck.err("motion.alpha: cat-phase takes amplitudes from sweep.alpha");
                }
                MotionSpec::Cat {
                    epsilon: self.motion.epsilon.unwrap_or(DEFAULT_EPSILON),
                }
            }
            ("cat-phase", other) => {
                ck.err(format!(
                    "motion.kind: cat-phase requires 'cat', got '{other}'"
                ));
                MotionSpec::Cat {
                    epsilon: DEFAULT_EPSILON,
                }
            }
            (_, "thermal") => {
                if self.motion.alpha.is_some() || self.motion.epsilon.is_some() {
                    ck.err("motion: alpha/epsilon are not used with thermal motion");
                }
                MotionSpec::Thermal
            }
            (_, other) => {
                ck.err(format!(
                    "motion.kind: the {subcommand} experiment requires 'thermal', got '{other}'"
                ));
                MotionSpec::Thermal
            }
        };

        // ---- assemble ----------------------------------------------------
        let params = PhysicalParams::new(
            self.system.num_ions.max(1),
            self.system.lamb_dicke.max(0.0),
            mhz(self.system.mode_freq_mhz.abs().max(f64::MIN_POSITIVE)),
            model,
        )
        .and_then(|p| match self.system.axial_freq_mhz {
            Some(az) if az > 0.0 && az < self.system.mode_freq_mhz => {
                p.with_axial_freq(mhz(az))
            }
            _ => Ok(p),
        });
        let params = match params {
            Ok(p) => p,
            Err(e) => {
                ck.err(format!("system: {e}"));
                ck.finish()?;
                unreachable!("finish() fails when errors were recorded");
            }
        };

        let need_scalar = |ck: &mut Checker, name: &str, v: Option<f64>| -> f64 {
            match v {
                Some(x) => x,
                None => {
                    ck.err(format!(
                        "schedule.{name}: required for the {subcommand} experiment"
                    ));
                    1.0
                }
            }
        };

        let plan = match subcommand {
            "thermometry" | "fisher" => {
                let delta0 = need_scalar(&mut ck, "delta0_khz", self.schedule.delta0_khz);
                let gamma = need_scalar(&mut ck, "gamma_khz", self.schedule.gamma_khz);
                let axis = match (&self.sweep.nbar, &self.sweep.temperature_k) {
                    (Some(v), None) => SweepAxis::Nbar(v.clone()),
                    (None, Some(v)) => SweepAxis::TemperatureK(v.clone()),
                    (Some(_), Some(_)) => {
                        ck.err("sweep: give nbar or temperature_k, not both");
                        SweepAxis::Nbar(vec![1.0])
                    }
                    (None, None) => {
                        ck.err(format!(
                            "sweep: the {subcommand} experiment needs an nbar or temperature_k grid"
                        ));
                        SweepAxis::Nbar(vec![1.0])
                    }
                };
                let cfg = self.finish_config(&mut ck, params, delta0, gamma, motion, axis)?;
                if subcommand == "fisher" {
                    let ions = self
                        .sweep
                        .ion_numbers
                        .clone()
                        .unwrap_or_else(|| vec![self.system.num_ions]);
                    if ions.is_empty() || ions.contains(&0) {
                        ck.err("sweep.ion_numbers: must be a non-empty list of ions >= 1");
                    }
                    Plan::Fisher(cfg, ions)
                } else {
                    Plan::Thermometry(cfg)
                }
            }
            "fidelity" => match (&self.sweep.gamma_khz, &self.sweep.delta0_khz) {
                (Some(g), None) => {
                    if self.schedule.gamma_khz.is_some() {
                        ck.err("schedule.gamma_khz: conflicts with sweep.gamma_khz");
                    }
                    let delta0 = need_scalar(&mut ck, "delta0_khz", self.schedule.delta0_khz);
                    let nbars = self.require_nbar_list(&mut ck);
                    let values: Vec<f64> = g.iter().map(|&v| khz(v)).collect();
                    let placeholder = values.first().copied().unwrap_or(1.0);
                    let cfg = self.finish_config_angular(
                        &mut ck,
                        params,
                        khz(delta0),
                        placeholder,
                        motion,
                        SweepAxis::Gamma { values, nbars },
                    )?;
                    Plan::Fidelity(cfg)
                }
                (None, Some(d)) => {
                    if self.schedule.delta0_khz.is_some() {
                        ck.err("schedule.delta0_khz: conflicts with sweep.delta0_khz");
                    }
                    let gamma = need_scalar(&mut ck, "gamma_khz", self.schedule.gamma_khz);
                    let nbars = self.require_nbar_list(&mut ck);
                    let values: Vec<f64> = d.iter().map(|&v| khz(v)).collect();
                    let placeholder = values.first().copied().unwrap_or(1.0);
                    let cfg = self.finish_config_angular(
                        &mut ck,
                        params,
                        placeholder,
                        khz(gamma),
                        motion,
                        SweepAxis::Delta0 { values, nbars },
                    )?;
                    Plan::Fidelity(cfg)
                }
                _ => {
                    ck.err("sweep: fidelity needs exactly one of gamma_khz or delta0_khz grids");
                    ck.finish()?;
                    unreachable!("finish() fails when errors were recorded");
                }
            },
            "spectrum" | "coherent-trace" => {
                let delta0 = need_scalar(&mut ck, "delta0_khz", self.schedule.delta0_khz);
                let gamma = need_scalar(&mut ck, "gamma_khz", self.schedule.gamma_khz);
                let points = match self.sweep.time_points {
                    Some(p) if p >= 2 => p,
                    Some(p) => {
                        ck.err(format!("sweep.time_points: need at least 2, got {p}"));
                        2
                    }
                    None => {
                        ck.err(format!(
                            "sweep.time_points: required for the {subcommand} experiment"
                        ));
                        2
                    }
                };
                let cfg = self.finish_config(
                    &mut ck,
                    params,
                    delta0,
                    gamma,
                    motion,
                    SweepAxis::Time { points },
                )?;
                if subcommand == "spectrum" {
                    Plan::Spectrum(cfg)
                } else {
                    Plan::CoherentTrace(cfg)
                }
            }
            "cat-phase" => {
                let delta0 = need_scalar(&mut ck, "delta0_khz", self.schedule.delta0_khz);
                let gamma = need_scalar(&mut ck, "gamma_khz", self.schedule.gamma_khz);
                let axis = match &self.sweep.alpha {
                    Some(v) => SweepAxis::Alpha(v.clone()),
                    None => {
                        ck.err("sweep.alpha: required for the cat-phase experiment");
                        SweepAxis::Alpha(vec![1.0])
                    }
                };
                let cfg = self.finish_config(&mut ck, params, delta0, gamma, motion, axis)?;
                Plan::CatPhase(cfg)
            }
            "validate" => {
                let delta0 = need_scalar(&mut ck, "delta0_khz", self.schedule.delta0_khz);
                if self.schedule.gamma_khz.is_some() {
                    ck.err("schedule.gamma_khz: not used by the validate experiment");
                }
                let threshold = self.validate.threshold.unwrap_or(5.0);
                if !(threshold > 0.0 && threshold.is_finite()) {
                    ck.err(format!("validate.threshold: must be > 0, got {threshold}"));
                }
                Plan::Validate(ValidatePlan {
                    num_ions: self.system.num_ions,
                    mode_freq: mhz(self.system.mode_freq_mhz),
                    axial_freq: self.system.axial_freq_mhz.map(mhz),
                    lambda0: khz(self.schedule.lambda0_khz),
                    delta0: khz(delta0),
                    threshold,
                })
            }
            _ => {
                ck.finish()?;
                unreachable!("unknown subcommand already recorded an error");
            }
        };
        ck.finish()?;
        Ok(plan)
    }

    fn require_nbar_list(&self, ck: &mut Checker) -> Vec<f64> {
        match &self.sweep.nbar_list {
            Some(v) if !v.is_empty() => v.clone(),
            _ => {
                ck.err("sweep.nbar_list: fidelity needs a non-empty thermal occupation list");
                vec![1.0]
            }
        }
    }

    /// Common tail: build Schedule (kHz inputs) + ExperimentConfig, running
    /// the library-level validation and attributing its message to the config.
    fn finish_config(
        &self,
        ck: &mut Checker,
        params: PhysicalParams,
        delta0_khz: f64,
        gamma_khz: f64,
        motion: MotionSpec,
        sweep: SweepAxis,
    ) -> Result<ExperimentConfig, ConfigError> {
        self.finish_config_angular(ck, params, khz(delta0_khz), khz(gamma_khz), motion, sweep)
    }

    fn finish_config_angular(
        &self,
        ck: &mut Checker,
        params: PhysicalParams,
        delta0: f64,
        gamma: f64,
        motion: MotionSpec,
        sweep: SweepAxis,
    ) -> Result<ExperimentConfig, ConfigError> {
        let schedule = Schedule::new(
            delta0.max(f64::MIN_POSITIVE),
            khz(self.schedule.lambda0_khz.abs().max(f64::MIN_POSITIVE)),
            gamma.max(f64::MIN_POSITIVE),
        )
        .map_err(|e| {
            ck.err(format!("schedule: {e}"));
        });
        let cfg = ExperimentConfig {
            params,
            schedule: match schedule {
                Ok(s) => s,
                Err(()) => {
                    let errs = std::mem::take(&mut ck.errors);
                    return Err(ConfigError(errs));
                }
            },
            motion,
            sweep,
            steps: self.numerics.steps,
            tail_tol: self.numerics.tail_tol.unwrap_or(DEFAULT_TAIL_TOL),
            max_sector: self.numerics.max_sector,
        };
        if let Err(e) = cfg.validate() {
            match e {
                Error::Domain(msg) => ck.err(format!("sweep: {msg}")),
                other => ck.err(format!("config: {other}")),
            }
        }
        Ok(cfg)
    }
}
