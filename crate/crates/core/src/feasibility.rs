//! Order-of-magnitude feasibility check for three hardware platforms.
//!
//! Each platform quotes a mode frequency, a coupling, and an upper bound on
//! the quality factor. Frequencies are used at their quoted magnitudes with
//! no 2π conversion; the comparison is only meaningful to a decade.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, PceError, Result};

/// Typical photon number assumed for every platform.
pub const DEFAULT_N_SCALE: f64 = 1e2;
/// Target pulse area `λτ√n`.
pub const DEFAULT_LAMBDA_TAU_SQRT_N: f64 = 1e-1;
/// Coherence magnitude surviving dephasing.
pub const DEFAULT_COHERENCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Optical,
    Microwave,
    Circuit,
}

impl Platform {
    pub const ALL: [Platform; 3] = [Platform::Optical, Platform::Microwave, Platform::Circuit];

    pub fn name(&self) -> &'static str {
        match self {
            Platform::Optical => "optical",
            Platform::Microwave => "microwave",
            Platform::Circuit => "circuit",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Platform {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optical" => Ok(Platform::Optical),
            "microwave" => Ok(Platform::Microwave),
            "circuit" => Ok(Platform::Circuit),
            other => invalid(format!(
                "unknown platform {other:?} (expected optical, microwave, or circuit)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlatformProfile {
    pub name: Platform,
    pub nu: f64,
    pub lamb: f64,
    pub q_max: f64,
    pub n_scale: f64,
    pub lambda_tau_sqrt_n: f64,
}

impl PlatformProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("nu", self.nu),
            ("lamb", self.lamb),
            ("q_max", self.q_max),
            ("n_scale", self.n_scale),
            ("lambda_tau_sqrt_n", self.lambda_tau_sqrt_n),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("platform field {name} = {v} must be positive"));
            }
        }
        Ok(())
    }
}

pub fn platform_profile(name: &str) -> Result<PlatformProfile> {
    Ok(profile_for(name.parse()?))
}

pub fn profile_for(platform: Platform) -> PlatformProfile {
    let (nu, lamb, q_max) = match platform {
        Platform::Optical => (1e14, 1e8, 1e8),
        Platform::Microwave => (1e10, 1e4, 1e9),
        Platform::Circuit => (1e10, 1e8, 1e4),
    };
    PlatformProfile {
        name: platform,
        nu,
        lamb,
        q_max,
        n_scale: DEFAULT_N_SCALE,
        lambda_tau_sqrt_n: DEFAULT_LAMBDA_TAU_SQRT_N,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Injection {
    /// Interaction time, s.
    pub tau: f64,
    /// Largest rate with one atom in the cavity at a time, 1/s.
    pub r_max: f64,
    /// `r_max λ² τ² / 2`, 1/s.
    pub mu: f64,
}

pub fn derive_injection(profile: &PlatformProfile) -> Injection {
    let tau = profile.lambda_tau_sqrt_n / (profile.lamb * profile.n_scale.sqrt());
    let r_max = 1.0 / tau;
    Injection {
        tau,
        r_max,
        mu: 0.5 * r_max * profile.lamb.powi(2) * tau.powi(2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub loss_term: f64,
    pub coherence_term: f64,
    pub loss_dominates: bool,
    /// `log10(loss_term / coherence_term)`.
    pub log10_ratio: f64,
}

/// Compares `ν/(2μQ)` at `Q = q_max` against a coherence magnitude.
pub fn coherence_vs_loss(profile: &PlatformProfile, coherence_magnitude: f64) -> Result<Verdict> {
    profile.validate()?;
    if !(0.0..=0.5).contains(&coherence_magnitude) {
        return invalid(format!(
            "coherence magnitude {coherence_magnitude} must lie in [0, 0.5]"
        ));
    }
    let inj = derive_injection(profile);
    let loss_term = profile.nu / (2.0 * inj.mu * profile.q_max);
    Ok(Verdict {
        loss_term,
        coherence_term: coherence_magnitude,
        loss_dominates: loss_term >= coherence_magnitude,
        log10_ratio: (loss_term / coherence_magnitude).log10(),
    })
}

/// Decimal order `floor(log10 x)`, treating values within 1e-9 decades of a
/// power of ten as that power.
pub fn decimal_order(x: f64) -> i32 {
    let l = x.log10();
    let r = l.round();
    if (l - r).abs() < 1e-9 {
        r as i32
    } else {
        l.floor() as i32
    }
}
