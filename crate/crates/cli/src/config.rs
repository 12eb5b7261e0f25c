//! JSON configuration files for `sweep` and `tomo`, merged with command-line flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fockchan_core::protocol::{default_gain_points, linear_gain_grid, log_gain_grid};
use fockchan_core::{Complex64, NuPolicy, Probe, SweepPlan};
use serde::Deserialize;
use serde_json::json;

use crate::args::{PolicyArg, SettingsArg, SpacingArg, SweepArgs, TomoArgs};

/// Default loss levels, as intensity transmittances `τ²`.
pub const DEFAULT_TAU_SQUARED: [f64; 3] = [0.75, 0.5, 0.25];
pub const DEFAULT_GAIN_MIN: f64 = 1.0;
pub const DEFAULT_GAIN_MAX: f64 = 10.0;

/// A complex amplitude written either as a bare number or as `{ "re": …, "im": … }`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Complex {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<ComplexInput> for Complex64 {
    fn from(v: ComplexInput) -> Self {
        match v {
            ComplexInput::Real(re) => Complex64::new(re, 0.0),
            ComplexInput::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub c0: ComplexInput,
    pub c1: ComplexInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Fig4,
    Fixed,
    Naive,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fig4 => Policy::Fig4,
            PolicyArg::Fixed => Policy::Fixed,
            PolicyArg::Naive => Policy::Naive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Log => Spacing::Log,
            SpacingArg::Linear => Spacing::Linear,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepConfig {
    pub taus: Option<Vec<f64>>,
    pub gain_min: Option<f64>,
    pub gain_max: Option<f64>,
    pub gain_points: Option<usize>,
    pub spacing: Option<Spacing>,
    pub policy: Option<Policy>,
    pub nu: Option<f64>,
    pub probe: Option<ProbeConfig>,
    pub truncation: Option<usize>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid sweep configuration")
    }

    /// Explicit flags replace the corresponding configuration values.
    pub fn with_overrides(mut self, args: &SweepArgs) -> Self {
        if let Some(t) = &args.taus {
            self.taus = Some(t.clone());
        }
        self.gain_min = args.gain_min.or(self.gain_min);
        self.gain_max = args.gain_max.or(self.gain_max);
        self.gain_points = args.gain_points.or(self.gain_points);
        self.spacing = args.spacing.map(Spacing::from).or(self.spacing);
        self.policy = args.policy.map(Policy::from).or(self.policy);
        self.nu = args.nu.or(self.nu);
        self.truncation = args.truncation.or(self.truncation);
        self
    }

    pub fn to_plan(&self) -> Result<SweepPlan> {
        let taus = match &self.taus {
            Some(t) => t.clone(),
            None => DEFAULT_TAU_SQUARED.iter().map(|t2| t2.sqrt()).collect(),
        };
        if let Some(&t) = taus.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            bail!("taus: {t} is outside 0 < tau <= 1");
        }
        let gain_min = self.gain_min.unwrap_or(DEFAULT_GAIN_MIN);
        let gain_max = self.gain_max.unwrap_or(DEFAULT_GAIN_MAX.max(gain_min));
        let points = match self.gain_points {
            Some(p) => p,
            None => default_gain_points(gain_min, gain_max),
        };
        let gains = match self.spacing.unwrap_or(Spacing::Log) {
            Spacing::Log => log_gain_grid(gain_min, gain_max, points)?,
            Spacing::Linear => linear_gain_grid(gain_min, gain_max, points)?,
        };
        let nu_policy = match (self.policy.unwrap_or(Policy::Fig4), self.nu) {
            (Policy::Fixed, Some(nu)) => {
                if !(nu > 0.0 && nu <= 1.0) {
                    bail!("nu: {nu} is outside 0 < nu <= 1");
                }
                NuPolicy::Fixed(nu)
            }
            (Policy::Fixed, None) => bail!("policy fixed requires nu"),
            (_, Some(_)) => bail!("nu only applies to policy fixed"),
            (Policy::Fig4, None) => NuPolicy::Fig4,
            (Policy::Naive, None) => NuPolicy::Naive,
        };
        let probe = match self.probe {
            Some(p) => normalized_probe(p.c0.into(), p.c1.into())?,
            None => Probe::balanced(),
        };
        let plan = SweepPlan {
            taus,
            gains,
            nu_policy,
            probe,
            truncation: self.truncation.unwrap_or(1),
        };
        plan.validate()?;
        Ok(plan)
    }
}

/// Probe from amplitudes of any nonzero norm.
pub fn normalized_probe(c0: Complex64, c1: Complex64) -> Result<Probe> {
    let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        bail!("probe amplitudes must be finite and not both zero");
    }
    Ok(Probe::new(c0 / norm, c1 / norm)?)
}

/// JSON schema of [`SweepConfig`].
pub fn sweep_schema() -> serde_json::Value {
    let complex = json!({
        "oneOf": [
            { "type": "number" },
            {
                "type": "object",
                "properties": { "re": { "type": "number" }, "im": { "type": "number" } },
                "required": ["re"],
                "additionalProperties": false
            }
        ]
    });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "fockchan sweep configuration",
        "type": "object",
        "additionalProperties": false,
        "properties": {
            "taus": {
                "description": "Amplitude transmittances of the lossy line. Default: sqrt of 0.75, 0.5, 0.25.",
                "type": "array",
                "items": { "type": "number", "exclusiveMinimum": 0, "maximum": 1 },
                "minItems": 1
            },
            "gain-min": { "type": "number", "minimum": 1, "default": DEFAULT_GAIN_MIN },
            "gain-max": { "type": "number", "minimum": 1, "default": DEFAULT_GAIN_MAX },
            "gain-points": {
                "description": "Grid size. Default: 200 points per decade of gain, plus one.",
                "type": "integer",
                "minimum": 1
            },
            "spacing": { "enum": ["log", "linear"], "default": "log" },
            "policy": {
                "description": "fig4: nu = min(1/(g tau), 1); fixed: constant nu; naive: nu = 1.",
                "enum": ["fig4", "fixed", "naive"],
                "default": "fig4"
            },
            "nu": {
                "description": "Attenuation for policy fixed; not allowed otherwise.",
                "type": "number",
                "exclusiveMinimum": 0,
                "maximum": 1
            },
            "probe": {
                "description": "Probe amplitudes c0|0> + c1|1>, rescaled to unit norm. Default: balanced.",
                "type": "object",
                "properties": { "c0": complex, "c1": complex },
                "required": ["c0", "c1"],
                "additionalProperties": false
            },
            "truncation": {
                "description": "Fock truncation N of the simulated channel.",
                "type": "integer",
                "minimum": 1,
                "maximum": 16,
                "default": 1
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingsChoice {
    Canonical,
    Extended,
}

impl From<SettingsArg> for SettingsChoice {
    fn from(s: SettingsArg) -> Self {
        match s {
            SettingsArg::Canonical => SettingsChoice::Canonical,
            SettingsArg::Extended => SettingsChoice::Extended,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TomoConfig {
    pub tau: Option<f64>,
    pub nu: Option<f64>,
    pub gain: Option<f64>,
    pub counts: Option<u64>,
    pub seed: Option<u64>,
    pub ideal: Option<bool>,
    pub settings: Option<SettingsChoice>,
    pub max_iterations: Option<usize>,
}

/// Fully resolved tomography run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomoRun {
    pub tau: f64,
    pub nu: f64,
    pub gain: f64,
    pub counts: u64,
    pub seed: u64,
    pub ideal: bool,
    pub settings: SettingsChoice,
    /// Overrides the default iteration cap.
    pub max_iterations: Option<usize>,
}

impl TomoConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid tomography configuration")
    }

    pub fn resolve(self, args: &TomoArgs) -> Result<TomoRun> {
        let tau = args.tau.or(self.tau).context("--tau is required")?;
        let counts = args
            .counts
            .or(self.counts)
            .context("--counts is required")?;
        let seed = args.seed.or(self.seed).context("--seed is required")?;
        if counts == 0 {
            bail!("counts must be positive");
        }
        if args.max_iterations.or(self.max_iterations) == Some(0) {
            bail!("max-iterations must be positive");
        }
        Ok(TomoRun {
            tau,
            nu: args.nu.or(self.nu).unwrap_or(1.0),
            gain: args.gain.or(self.gain).unwrap_or(1.0),
            counts,
            seed,
            ideal: args.ideal || self.ideal.unwrap_or(false),
            settings: args
                .settings
                .map(SettingsChoice::from)
                .or(self.settings)
                .unwrap_or(SettingsChoice::Canonical),
            max_iterations: args.max_iterations.or(self.max_iterations),
        })
    }
}

pub fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}
