//! JSON run configuration, dotted-path overrides, and conversion into the
//! core library's types.

use std::f64::consts::TAU;

use num_complex::Complex64;
use pce::atoms::{coherent_thermal_atoms, phaseonium, thermal_atoms, AtomPrep, ComplexJson};
use pce::carnot::{CycleSpec, FrequencyLabeling, IsothermSpec};
use pce::micromaser::{EngineParams, Quality};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_N_MAX: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum Units {
    #[default]
    #[serde(rename = "rad/s")]
    RadPerSecond,
    #[serde(rename = "Hz")]
    Hertz,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub units: Units,
    pub engine: Option<EngineConfig>,
    /// Atom temperature for `steady-state` when the prep is thermal.
    pub t: Option<f64>,
    pub prep: Option<PrepConfig>,
    pub hot: Option<IsothermConfig>,
    pub cold: Option<IsothermConfig>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    #[serde(default)]
    pub labeling: FrequencyLabeling,
    pub sweep: Option<SweepConfig>,
    pub points_per_stroke: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// Defaults to the hot isotherm frequency in cycle commands.
    pub nu: Option<f64>,
    pub q_factor: Quality,
    pub lamb: f64,
    pub tau: f64,
    pub rate: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

/// Either explicit amplitudes, or `"thermal": true` to take the Boltzmann
/// populations of the surrounding temperature and frequency. A thermal prep
/// may add ground coherence through `xi` and `phase` (`Arg(c1 c2*)`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepConfig {
    #[serde(default)]
    pub thermal: bool,
    pub p_e: Option<f64>,
    pub c1: Option<ComplexJson>,
    pub c2: Option<ComplexJson>,
    pub xi: Option<ComplexJson>,
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsothermConfig {
    pub t: f64,
    pub nu: f64,
    #[serde(default = "thermal_prep")]
    pub prep: PrepConfig,
}

fn thermal_prep() -> PrepConfig {
    PrepConfig {
        thermal: true,
        ..PrepConfig::default()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: Option<String>,
    #[serde(default)]
    pub grid: Vec<Value>,
}

/// Reads the configuration document and applies `--set` overrides.
pub fn load(text: &str, overrides: &[String]) -> CliResult<Config> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::config(format!("line {}", e.line()), e.to_string()))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    parse(value)
}

pub fn parse(value: Value) -> CliResult<Config> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })
}

/// `a.b.c=v`; `v` is parsed as JSON when possible and kept as a string
/// otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--set expects key=value, got {spec:?}")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::usage(format!(
            "--set has an empty path segment in {path:?}"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Map::new());
            } else {
                return Err(CliError::config(
                    keys[..i].join("."),
                    "cannot set a field inside a non-object value",
                ));
            }
        }
        let obj = node.as_object_mut().expect("object checked above");
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

impl Config {
    fn freq(&self, nu: f64) -> f64 {
        match self.units {
            Units::RadPerSecond => nu,
            Units::Hertz => TAU * nu,
        }
    }

    pub fn engine_params(&self, fallback_nu: Option<f64>) -> CliResult<EngineParams> {
        let e = self
            .engine
            .as_ref()
            .ok_or_else(|| CliError::config("engine", "missing field"))?;
        let nu = match (e.nu, fallback_nu) {
            (Some(nu), _) => self.freq(nu),
            (None, Some(nu)) => nu,
            (None, None) => return Err(CliError::config("engine.nu", "missing field")),
        };
        let params = EngineParams {
            nu,
            q_factor: e.q_factor,
            lamb: e.lamb,
            tau: e.tau,
            rate: e.rate,
            n_max: e.n_max,
        };
        params
            .validate()
            .map_err(|err| CliError::config("engine", err.to_string()))?;
        Ok(params)
    }

    /// Engine and atoms for `steady-state`.
    pub fn steady_inputs(&self) -> CliResult<(EngineParams, AtomPrep)> {
        let params = self.engine_params(None)?;
        let prep = self
            .prep
            .as_ref()
            .ok_or_else(|| CliError::config("prep", "missing field"))?;
        let prep = build_prep(prep, "prep", self.t, params.nu)?;
        Ok((params, prep))
    }

    pub fn cycle_spec(&self) -> CliResult<CycleSpec> {
        let hot = self.isotherm(self.hot.as_ref(), "hot")?;
        let cold = self.isotherm(self.cold.as_ref(), "cold")?;
        let nu1 = self
            .nu1
            .ok_or_else(|| CliError::config("nu1", "missing field"))?;
        let nu2 = self
            .nu2
            .ok_or_else(|| CliError::config("nu2", "missing field"))?;
        let engine = self.engine_params(Some(hot.nu))?;
        Ok(CycleSpec {
            nu1: self.freq(nu1),
            nu2: self.freq(nu2),
            hot,
            cold,
            engine,
            labeling: self.labeling,
        })
    }

    fn isotherm(&self, iso: Option<&IsothermConfig>, name: &str) -> CliResult<IsothermSpec> {
        let iso = iso.ok_or_else(|| CliError::config(name, "missing field"))?;
        let nu = self.freq(iso.nu);
        let prep = build_prep(&iso.prep, &format!("{name}.prep"), Some(iso.t), nu)?;
        Ok(IsothermSpec { t: iso.t, prep, nu })
    }
}

pub fn build_prep(p: &PrepConfig, path: &str, t: Option<f64>, nu: f64) -> CliResult<AtomPrep> {
    let wrap =
        |field: &str, e: pce::PceError| CliError::config(format!("{path}{field}"), e.to_string());
    if p.thermal {
        for (field, set) in [
            ("p_e", p.p_e.is_some()),
            ("c1", p.c1.is_some()),
            ("c2", p.c2.is_some()),
        ] {
            if set {
                return Err(CliError::config(
                    format!("{path}.{field}"),
                    "not allowed with \"thermal\": true",
                ));
            }
        }
        let t = t.ok_or_else(|| {
            CliError::config(
                path.replace("prep", "t"),
                "thermal prep needs a temperature",
            )
        })?;
        let xi: Complex64 = p.xi.map(Into::into).unwrap_or_default();
        if xi == Complex64::default() && p.phase.is_none() {
            return thermal_atoms(t, nu).map_err(|e| wrap("", e));
        }
        return coherent_thermal_atoms(t, nu, p.phase.unwrap_or(0.0), xi).map_err(|e| wrap("", e));
    }
    let p_e = p
        .p_e
        .ok_or_else(|| CliError::config(format!("{path}.p_e"), "missing field"))?;
    let c1: Complex64 =
        p.c1.ok_or_else(|| CliError::config(format!("{path}.c1"), "missing field"))?
            .into();
    let mut c2: Complex64 =
        p.c2.ok_or_else(|| CliError::config(format!("{path}.c2"), "missing field"))?
            .into();
    let xi: Complex64 = p.xi.map(Into::into).unwrap_or(Complex64::new(1.0, 0.0));
    if let Some(phase) = p.phase {
        c2 = with_relative_phase(c1, c2, phase);
    }
    phaseonium(p_e, c1, c2, xi).map_err(|e| wrap("", e))
}

/// Rotates `c2` so that `Arg(c1 c2*) = phase`.
pub fn with_relative_phase(c1: Complex64, c2: Complex64, phase: f64) -> Complex64 {
    Complex64::from_polar(c2.norm(), c1.arg() - phase)
}
