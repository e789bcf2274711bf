//! Injected three-level atoms: phaseonium, thermal atoms, and dephasing.
//!
//! Basis order for every 3×3 atomic operator is `{|e⟩, |g1⟩, |g2⟩}`. The two
//! ground states are degenerate and sit one mode quantum `ħν` below `|e⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{invalid, Result};

const NORMALIZATION_TOL: f64 = 1e-9;
const XI_TOL: f64 = 1e-12;

/// Injection state `ρ_D = p_e|e⟩⟨e| + ρ_g` with dephased ground coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPrep {
    p_e: f64,
    c1: Complex64,
    c2: Complex64,
    xi: Complex64,
    label: String,
}

impl AtomPrep {
    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `|c1|² + |c2|²`, the total ground-manifold population.
    pub fn ground_population(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// `Re(ξ c1 c2*)`.
    pub fn coherence(&self) -> f64 {
        (self.xi * self.c1 * self.c2.conj()).re
    }

    /// `|c1|² + |c2|² + 2 Re(ξ c1 c2*)`.
    pub fn theta(&self) -> f64 {
        self.ground_population() + 2.0 * self.coherence()
    }

    /// Population of the bright ground state `(|g1⟩ + |g2⟩)/√2`, equal to θ/2.
    pub fn bright_population(&self) -> f64 {
        0.5 * self.theta()
    }

    /// Population of the dark ground state `(|g1⟩ − |g2⟩)/√2`.
    pub fn dark_population(&self) -> f64 {
        0.5 * self.ground_population() - self.coherence()
    }

    pub fn density_matrix(&self) -> Matrix3<Complex64> {
        let off = self.xi * self.c1 * self.c2.conj();
        let z = Complex64::new(0.0, 0.0);
        Matrix3::new(
            Complex64::new(self.p_e, 0.0),
            z,
            z,
            z,
            Complex64::new(self.c1.norm_sqr(), 0.0),
            off,
            z,
            off.conj(),
            Complex64::new(self.c2.norm_sqr(), 0.0),
        )
    }

    pub fn to_json(&self) -> AtomPrepJson {
        AtomPrepJson {
            p_e: self.p_e,
            c1: self.c1.into(),
            c2: self.c2.into(),
            xi: self.xi.into(),
            label: Some(self.label.clone()),
        }
    }
}

/// Phaseonium with ground amplitudes `c1`, `c2` and dephasing factor `xi`.
pub fn phaseonium(p_e: f64, c1: Complex64, c2: Complex64, xi: Complex64) -> Result<AtomPrep> {
    if !(p_e.is_finite() && (0.0..=1.0).contains(&p_e)) {
        return invalid(format!("p_e = {p_e} must lie in [0, 1]"));
    }
    if !(c1.is_finite() && c2.is_finite() && xi.is_finite()) {
        return invalid("atomic amplitudes and xi must be finite");
    }
    let total = p_e + c1.norm_sqr() + c2.norm_sqr();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return invalid(format!("p_e + |c1|^2 + |c2|^2 = {total}, expected 1"));
    }
    check_xi(xi)?;
    Ok(AtomPrep {
        p_e,
        c1,
        c2,
        xi,
        label: "phaseonium".into(),
    })
}

/// Thermal atoms at temperature `t` (K) for a transition of angular
/// frequency `nu` (rad/s). Ground amplitudes are real and equal; ξ = 0.
pub fn thermal_atoms(t: f64, nu: f64) -> Result<AtomPrep> {
    let x = boltzmann_factor(t, nu)?;
    let p_e = x / (2.0 + x);
    let c = (1.0 / (2.0 + x)).sqrt();
    Ok(AtomPrep {
        p_e,
        c1: Complex64::new(c, 0.0),
        c2: Complex64::new(c, 0.0),
        xi: Complex64::new(0.0, 0.0),
        label: "thermal".into(),
    })
}

/// Thermal populations at `(t, nu)` with ground coherence of phase
/// `Arg(c1 c2*) = phase` and dephasing factor `xi`.
pub fn coherent_thermal_atoms(t: f64, nu: f64, phase: f64, xi: Complex64) -> Result<AtomPrep> {
    let base = thermal_atoms(t, nu)?;
    let c = base.c1.re;
    phaseonium(
        base.p_e,
        Complex64::new(c, 0.0),
        Complex64::from_polar(c, -phase),
        xi,
    )
    .map(|p| p.with_label("phaseonium"))
}

/// `exp(−ħν/kT)`.
pub fn boltzmann_factor(t: f64, nu: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return invalid(format!("temperature {t} K must be positive"));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return invalid(format!("frequency {nu} rad/s must be positive"));
    }
    Ok((-HBAR * nu / (K_B * t)).exp())
}

/// Replaces the dephasing factor, keeping populations and amplitudes.
pub fn dephase(prep: &AtomPrep, xi_new: Complex64) -> Result<AtomPrep> {
    check_xi(xi_new)?;
    Ok(AtomPrep {
        xi: xi_new,
        ..prep.clone()
    })
}

fn check_xi(xi: Complex64) -> Result<()> {
    if xi.norm() > 1.0 + XI_TOL {
        return invalid(format!("|xi| = {} exceeds 1", xi.norm()));
    }
    Ok(())
}

/// Unit vector of the dark ground state in the `{|e⟩, |g1⟩, |g2⟩}` basis.
pub fn dark_state() -> [f64; 3] {
    [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]
}

/// `{"re": f, "im": f}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(c: Complex64) -> Self {
        ComplexJson { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(c: ComplexJson) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Config-file form of an atom preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomPrepJson {
    pub p_e: f64,
    pub c1: ComplexJson,
    pub c2: ComplexJson,
    pub xi: ComplexJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TryFrom<&AtomPrepJson> for AtomPrep {
    type Error = crate::error::PceError;

    fn try_from(j: &AtomPrepJson) -> Result<Self> {
        let prep = phaseonium(j.p_e, j.c1.into(), j.c2.into(), j.xi.into())?;
        Ok(match &j.label {
            Some(l) => prep.with_label(l.clone()),
            None => prep,
        })
    }
}
