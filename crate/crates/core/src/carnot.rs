//! Static thermodynamics of the photon Carnot cycle.
//!
//! The steady photon number of each isotherm is mapped onto an effective
//! field temperature `T′ = T/(1+ζ)`, where ζ collects the ground-state
//! coherence of the injected atoms and the cavity loss. The cycle itself is
//! evaluated in the high-temperature limit `⟨n⟩ ≈ kT′/ħν`, in which the
//! adiabats keep `⟨n⟩` fixed and `ν/T′` constant.
//!
//! Corners are numbered 1→2 (hot isotherm, expansion), 2→3 (adiabat),
//! 3→4 (cold isotherm, compression), 4→1 (adiabat).

use serde::{Deserialize, Serialize};

use crate::atoms::AtomPrep;
use crate::constants::{HBAR, K_B};
use crate::error::{invalid, PceError, Result};
use crate::micromaser::{mu, EngineParams};

/// Photon numbers below this make the high-temperature mapping doubtful.
pub const HIGH_T_WARNING_PHOTONS: f64 = 10.0;

const COLD_COHERENCE_TOL: f64 = 1e-12;

/// Which isotherm frequency enters ζ for each stroke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyLabeling {
    /// ζ_h uses the hot-isotherm frequency, ζ_l the cold one.
    #[default]
    Conventional,
    /// ζ_h uses the cold-isotherm frequency and vice versa, following the
    /// corner assignment `ν(1) ≈ ν_l ≈ ν(2)`.
    Swapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsothermSpec {
    /// Temperature of the injected atoms, K.
    pub t: f64,
    pub prep: AtomPrep,
    /// Representative mode frequency on this isotherm, rad/s.
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec {
    pub hot: IsothermSpec,
    pub cold: IsothermSpec,
    /// Mode frequency at corner 1, rad/s.
    pub nu1: f64,
    /// Mode frequency at corner 2, rad/s; must be below `nu1`.
    pub nu2: f64,
    pub engine: EngineParams,
    pub labeling: FrequencyLabeling,
}

impl CycleSpec {
    pub fn validate(&self) -> Result<()> {
        self.engine.validate()?;
        for (name, iso) in [("hot", &self.hot), ("cold", &self.cold)] {
            if !(iso.t.is_finite() && iso.t > 0.0) {
                return invalid(format!("{name} temperature {} K must be positive", iso.t));
            }
            if !(iso.nu.is_finite() && iso.nu > 0.0) {
                return invalid(format!(
                    "{name} frequency {} rad/s must be positive",
                    iso.nu
                ));
            }
        }
        if !(self.nu2.is_finite() && self.nu2 > 0.0 && self.nu1.is_finite() && self.nu1 > self.nu2)
        {
            return invalid(format!(
                "corner frequencies must satisfy nu1 > nu2 > 0 (got nu1 = {}, nu2 = {})",
                self.nu1, self.nu2
            ));
        }
        let cold_coh =
            (self.cold.prep.xi() * self.cold.prep.c1() * self.cold.prep.c2().conj()).norm();
        if cold_coh > COLD_COHERENCE_TOL {
            return invalid(format!(
                "cold isotherm atoms must carry no ground coherence (|xi c1 c2*| = {cold_coh:.3e})"
            ));
        }
        Ok(())
    }

    /// Frequencies entering ζ_h and ζ_l.
    pub fn zeta_frequencies(&self) -> (f64, f64) {
        match self.labeling {
            FrequencyLabeling::Conventional => (self.hot.nu, self.cold.nu),
            FrequencyLabeling::Swapped => (self.cold.nu, self.hot.nu),
        }
    }

    /// `(ζ_h, ζ_l)`.
    pub fn zetas(&self) -> Result<(f64, f64)> {
        let (nu_h, nu_l) = self.zeta_frequencies();
        let zeta_h = zeta(&self.hot.prep, &self.engine.with_nu(nu_h))?;
        let zeta_l = zeta(&self.cold.prep, &self.engine.with_nu(nu_l))?;
        Ok((zeta_h, zeta_l))
    }
}

/// `2p_e / (|c1|² + |c2|² − 2p_e)`: steady photon number without coherence
/// or loss.
pub fn bare_n(prep: &AtomPrep) -> Result<f64> {
    Ok(prep.p_e() * n_per_excitation(prep)?)
}

/// `n / p_e`, evaluated without dividing by `p_e`.
fn n_per_excitation(prep: &AtomPrep) -> Result<f64> {
    let denominator = prep.ground_population() - 2.0 * prep.p_e();
    if !(denominator > 0.0) {
        return Err(PceError::ThresholdViolation { denominator });
    }
    Ok(2.0 / denominator)
}

/// `ζ = (n/p_e) [Re(ξ c1 c2*) + ν/(2μQ)]` at `engine.nu`.
pub fn zeta(prep: &AtomPrep, engine: &EngineParams) -> Result<f64> {
    let n_over_pe = n_per_excitation(prep)?;
    Ok(n_over_pe * (prep.coherence() + loss_term(engine)?))
}

/// `ν/(2μQ)`; exactly zero for a lossless cavity.
pub fn loss_term(engine: &EngineParams) -> Result<f64> {
    if engine.q_factor.is_infinite() {
        return Ok(0.0);
    }
    let mu = mu(engine);
    if !(mu > 0.0) {
        return invalid("mu = r lambda^2 tau^2 / 2 vanishes with a lossy cavity");
    }
    Ok(engine.loss_rate() / (2.0 * mu))
}

/// `T′ = T / (1 + ζ)`.
pub fn effective_temperature(t: f64, zeta: f64) -> Result<f64> {
    let one_plus_zeta = 1.0 + zeta;
    if !(one_plus_zeta > 0.0) {
        return Err(PceError::UnphysicalZeta { one_plus_zeta });
    }
    Ok(t / one_plus_zeta)
}

/// `k ln(n+1) + ħν n / T′`, J/K.
pub fn photon_entropy(n_e: f64, nu: f64, t_eff: f64) -> f64 {
    K_B * n_e.ln_1p() + HBAR * nu * n_e / t_eff
}

/// High-temperature photon number `kT′/ħν`.
pub fn high_temperature_photons(t_eff: f64, nu: f64) -> f64 {
    K_B * t_eff / (HBAR * nu)
}

/// Temperature of the Bose distribution with mean `n_e` at frequency `nu`.
pub fn bose_temperature(n_e: f64, nu: f64) -> f64 {
    HBAR * nu / (K_B * (1.0 / n_e).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    /// rad/s
    pub nu: f64,
    /// K
    pub t_eff: f64,
    pub n_mean: f64,
    /// J/K
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub corners: [Corner; 4],
    pub zeta_h: f64,
    pub zeta_l: f64,
    pub t_h_eff: f64,
    pub t_l_eff: f64,
    /// Heat absorbed on the hot isotherm, J.
    pub q_in: f64,
    /// Heat released on the cold isotherm, J.
    pub q_out: f64,
    pub work: f64,
    pub eta: f64,
    pub positive_work: bool,
    pub warnings: Vec<String>,
}

impl CycleReport {
    /// Corner rows in the ts-diagram CSV layout; corner `i` is written as
    /// sample 0 of stroke `i`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TS_CSV_HEADER);
        for (i, c) in self.corners.iter().enumerate() {
            push_ts_row(&mut out, i as u8 + 1, 0, c.entropy, c.t_eff, c.nu, c.n_mean);
        }
        out
    }
}

pub fn run_cycle(spec: &CycleSpec) -> Result<CycleReport> {
    spec.validate()?;
    let (zeta_h, zeta_l) = spec.zetas()?;
    let t_h_eff = effective_temperature(spec.hot.t, zeta_h)?;
    let t_l_eff = effective_temperature(spec.cold.t, zeta_l)?;

    let ratio = t_l_eff / t_h_eff;
    let nu = [spec.nu1, spec.nu2, spec.nu2 * ratio, spec.nu1 * ratio];
    let n1 = high_temperature_photons(t_h_eff, nu[0]);
    let n2 = high_temperature_photons(t_h_eff, nu[1]);
    // adiabats conserve the photon number
    let n = [n1, n2, n2, n1];
    let t_eff = [t_h_eff, t_h_eff, t_l_eff, t_l_eff];
    let corners: [Corner; 4] = std::array::from_fn(|i| Corner {
        nu: nu[i],
        t_eff: t_eff[i],
        n_mean: n[i],
        entropy: photon_entropy(n[i], nu[i], t_eff[i]),
    });

    let q_in = t_h_eff * (corners[1].entropy - corners[0].entropy);
    let q_out = t_l_eff * (corners[2].entropy - corners[3].entropy);
    let work = q_in - q_out;
    let mut warnings = Vec::new();
    for (i, c) in corners.iter().enumerate() {
        if c.n_mean < HIGH_T_WARNING_PHOTONS {
            let msg = format!(
                "corner {}: <n> = {:.3} < {HIGH_T_WARNING_PHOTONS}, high-temperature limit is doubtful",
                i + 1,
                c.n_mean
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(CycleReport {
        corners,
        zeta_h,
        zeta_l,
        t_h_eff,
        t_l_eff,
        q_in,
        q_out,
        work,
        eta: work / q_in,
        positive_work: work > 0.0,
        warnings,
    })
}

/// `1 − [(1+ζ_h)/(1+ζ_l)] T_l/T_h`.
pub fn efficiency_closed_form(zeta_h: f64, zeta_l: f64, t_h: f64, t_l: f64) -> Result<f64> {
    for z in [zeta_h, zeta_l] {
        if !(1.0 + z > 0.0) {
            return Err(PceError::UnphysicalZeta {
                one_plus_zeta: 1.0 + z,
            });
        }
    }
    if !(t_h > 0.0 && t_l > 0.0) {
        return invalid("reservoir temperatures must be positive");
    }
    Ok(1.0 - (1.0 + zeta_h) / (1.0 + zeta_l) * t_l / t_h)
}

/// Efficiency in the three limiting regimes of the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyLimits {
    /// Full coherence (ξ = 1), lossless cavity.
    pub ideal: f64,
    /// Complete dephasing (ξ = 0) at the configured quality factor.
    pub dephased: f64,
    /// Q → 0.
    pub bad_cavity: f64,
}

pub fn efficiency_limits(spec: &CycleSpec) -> Result<EfficiencyLimits> {
    spec.validate()?;
    let (nu_h, nu_l) = spec.zeta_frequencies();
    let (t_h, t_l) = (spec.hot.t, spec.cold.t);
    let hot = &spec.hot.prep;
    let cold = &spec.cold.prep;

    let full_coherence = (hot.c1() * hot.c2().conj()).re;
    let ideal = 1.0 - (1.0 + n_per_excitation(hot)? * full_coherence) * t_l / t_h;

    let zeta_h = n_per_excitation(hot)? * loss_term(&spec.engine.with_nu(nu_h))?;
    let zeta_l = n_per_excitation(cold)? * loss_term(&spec.engine.with_nu(nu_l))?;
    let dephased = efficiency_closed_form(zeta_h, zeta_l, t_h, t_l)?;

    let (n_h, n_l) = (bare_n(hot)?, bare_n(cold)?);
    if !(n_l > 0.0 && hot.p_e() > 0.0) {
        return invalid("bad-cavity limit needs excited population on both isotherms");
    }
    let bad_cavity = 1.0 - (nu_h * n_h * cold.p_e()) / (nu_l * n_l * hot.p_e()) * t_l / t_h;

    Ok(EfficiencyLimits {
        ideal,
        dephased,
        bad_cavity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveWork {
    pub satisfied: bool,
    /// `T_h − [(1+ζ_h)/(1+ζ_l)] T_l`, K.
    pub margin: f64,
}

pub fn positive_work_condition(spec: &CycleSpec) -> Result<PositiveWork> {
    spec.validate()?;
    let (zeta_h, zeta_l) = spec.zetas()?;
    for z in [zeta_h, zeta_l] {
        if !(1.0 + z > 0.0) {
            return Err(PceError::UnphysicalZeta {
                one_plus_zeta: 1.0 + z,
            });
        }
    }
    let margin = spec.hot.t - (1.0 + zeta_h) / (1.0 + zeta_l) * spec.cold.t;
    Ok(PositiveWork {
        satisfied: margin > 0.0,
        margin,
    })
}

/// One point on the temperature–entropy diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TsSample {
    /// 1: hot isotherm, 2: hot→cold adiabat, 3: cold isotherm, 4: cold→hot adiabat.
    pub stroke: u8,
    pub index: usize,
    pub entropy: f64,
    pub t_eff: f64,
    pub nu: f64,
    pub n_mean: f64,
}

/// Samples the four strokes, `points_per_stroke` points each including both
/// end corners.
pub fn ts_diagram(spec: &CycleSpec, points_per_stroke: usize) -> Result<Vec<TsSample>> {
    if points_per_stroke < 2 {
        return invalid("points_per_stroke must be at least 2");
    }
    let report = run_cycle(spec)?;
    let c = &report.corners;
    let last = points_per_stroke - 1;
    let mut out = Vec::with_capacity(4 * points_per_stroke);
    for stroke in 0..4 {
        let (a, b) = (&c[stroke], &c[(stroke + 1) % 4]);
        let isotherm = stroke % 2 == 0;
        for j in 0..points_per_stroke {
            let corner = match j {
                0 => Some(a),
                j if j == last => Some(b),
                _ => None,
            };
            let (entropy, t_eff, nu, n_mean) = match corner {
                Some(k) => (k.entropy, k.t_eff, k.nu, k.n_mean),
                None => {
                    let s = j as f64 / last as f64;
                    if isotherm {
                        let nu = a.nu + s * (b.nu - a.nu);
                        let n = high_temperature_photons(a.t_eff, nu);
                        (photon_entropy(n, nu, a.t_eff), a.t_eff, nu, n)
                    } else {
                        let t = a.t_eff + s * (b.t_eff - a.t_eff);
                        let nu = a.nu * t / a.t_eff;
                        (photon_entropy(a.n_mean, nu, t), t, nu, a.n_mean)
                    }
                }
            };
            out.push(TsSample {
                stroke: stroke as u8 + 1,
                index: j,
                entropy,
                t_eff,
                nu,
                n_mean,
            });
        }
    }
    Ok(out)
}

pub const TS_CSV_HEADER: &str = "stroke,index,entropy_JperK,T_eff_K,nu_radps,n_mean\n";

/// Fixed-width scientific formatting with 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_ts_row(out: &mut String, stroke: u8, index: usize, s: f64, t: f64, nu: f64, n: f64) {
    out.push_str(&format!(
        "{stroke},{index},{},{},{},{}\n",
        sci(s),
        sci(t),
        sci(nu),
        sci(n)
    ));
}

pub fn ts_csv(samples: &[TsSample]) -> String {
    let mut out = String::from(TS_CSV_HEADER);
    for p in samples {
        push_ts_row(
            &mut out, p.stroke, p.index, p.entropy, p.t_eff, p.nu, p.n_mean,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{coherent_thermal_atoms, phaseonium, thermal_atoms};
    use crate::micromaser::Quality;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    const S38: f64 = 0.612_372_435_695_794_5;

    fn engine(q: Quality) -> EngineParams {
        EngineParams {
            nu: 1e10,
            q_factor: q,
            lamb: 1e4,
            tau: 1e-6,
            rate: 1e4,
            n_max: 10,
        }
    }

    fn spec(t_h: f64, t_l: f64, hot: AtomPrep, q: Quality) -> CycleSpec {
        let nu = 1e10;
        CycleSpec {
            hot: IsothermSpec {
                t: t_h,
                prep: hot,
                nu,
            },
            cold: IsothermSpec {
                t: t_l,
                prep: thermal_atoms(t_l, nu).unwrap(),
                nu,
            },
            nu1: nu * 1.01,
            nu2: nu,
            engine: engine(q),
            labeling: FrequencyLabeling::Conventional,
        }
    }

    #[test]
    fn bare_n_examples() {
        let p = phaseonium(0.25, c(S38), c(S38), c(1.0)).unwrap();
        assert!((bare_n(&p).unwrap() - 2.0).abs() < 1e-14);
        let g = phaseonium(0.0, c(1.0), c(0.0), c(0.0)).unwrap();
        assert_eq!(bare_n(&g).unwrap(), 0.0);
        let inverted = phaseonium(0.5, c(0.5), c(0.5), c(0.0)).unwrap();
        assert!(matches!(
            bare_n(&inverted),
            Err(PceError::ThresholdViolation { .. })
        ));
    }

    #[test]
    fn bare_n_high_temperature() {
        let nu = 1e10;
        for ratio in [0.02, 0.01, 0.001] {
            let t = HBAR * nu / (K_B * ratio);
            let n = bare_n(&thermal_atoms(t, nu).unwrap()).unwrap();
            let classical = K_B * t / (HBAR * nu);
            assert!(((n - classical) / classical).abs() < 0.02);
        }
    }

    #[test]
    fn zeta_examples() {
        let incoherent = phaseonium(0.25, c(S38), c(S38), c(0.0)).unwrap();
        assert_eq!(zeta(&incoherent, &engine(Quality::Infinite)).unwrap(), 0.0);

        let coherent = phaseonium(0.25, c(S38), c(S38), c(1.0)).unwrap();
        assert!((zeta(&coherent, &engine(Quality::Infinite)).unwrap() - 3.0).abs() < 1e-14);

        // thermal atoms with p_e = 1/5 (|c|² = 2/5 each) have n = 1, so n/p_e = 5
        let s = (0.4f64).sqrt();
        let thermal = phaseonium(0.2, c(s), c(s), c(0.0)).unwrap();
        assert!((bare_n(&thermal).unwrap() - 1.0).abs() < 1e-15);
        let e = EngineParams {
            nu: 1e10,
            q_factor: Quality::Finite(1e9),
            lamb: 1.0,
            tau: 1.0,
            rate: 1e6,
            n_max: 10,
        };
        assert!((mu(&e) - 5e5).abs() < 1e-9);
        assert!((loss_term(&e).unwrap() - 1e-5).abs() < 1e-20);
        assert!((zeta(&thermal, &e).unwrap() - 5e-5).abs() < 1e-19);
        let dead = EngineParams { rate: 0.0, ..e };
        assert!(zeta(&thermal, &dead).is_err());
    }

    #[test]
    fn effective_temperature_examples() {
        assert_eq!(effective_temperature(350.0, 0.0).unwrap(), 350.0);
        assert!((effective_temperature(600.0, 0.2).unwrap() - 500.0).abs() < 1e-12);
        assert_eq!(effective_temperature(300.0, -0.5).unwrap(), 600.0);
        assert!(matches!(
            effective_temperature(300.0, -1.0),
            Err(PceError::UnphysicalZeta { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(photon_entropy(0.0, 1e10, 300.0), 0.0);
        let nu = 1e12;
        let n: f64 = 100.0;
        let t = bose_temperature(n, nu);
        let expected = K_B * (101f64.ln() + 100.0 * (101.0f64 / 100.0).ln());
        assert!(((photon_entropy(n, nu, t) - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(efficiency_closed_form(0.0, 0.0, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(
            efficiency_closed_form(-0.5, 0.0, 300.0, 300.0).unwrap(),
            0.5
        );
        assert_eq!(efficiency_closed_form(1.0, 0.0, 2.0, 1.0).unwrap(), 0.0);
        assert!(efficiency_closed_form(-1.5, 0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn classical_cycle_is_carnot() {
        let nu = 1e10;
        let hot = thermal_atoms(600.0, nu).unwrap();
        let r = run_cycle(&spec(600.0, 300.0, hot, Quality::Infinite)).unwrap();
        assert!((r.eta - 0.5).abs() < 1e-12);
        assert!(r.positive_work);
        assert_eq!(r.t_h_eff, 600.0);
        assert_eq!(r.t_l_eff, 300.0);
    }

    #[test]
    fn coherent_single_bath_extracts_work() {
        let nu = 1e10;
        let hot = coherent_thermal_atoms(300.0, nu, std::f64::consts::PI, c(1e-4)).unwrap();
        let s = spec(300.0, 300.0, hot.clone(), Quality::Infinite);
        let r = run_cycle(&s).unwrap();
        assert!(r.eta > 0.0 && r.work > 0.0);
        let n_h = bare_n(&hot).unwrap();
        // ζ_l = 0 and T_l = T_h, so η = −ζ_h
        let expected = n_h / hot.p_e() * 1e-4 * (hot.c1() * hot.c2()).norm();
        assert!(expected > 0.3 && expected < 0.5);
        assert!((r.eta - expected).abs() < 1e-9);
        assert!(positive_work_condition(&s).unwrap().satisfied);
    }

    #[test]
    fn labeling_swaps_zeta_frequencies() {
        let mut s = spec(
            600.0,
            300.0,
            thermal_atoms(600.0, 1e10).unwrap(),
            Quality::Finite(1e9),
        );
        s.cold.nu = 2e10;
        let (zh, zl) = s.zetas().unwrap();
        s.labeling = FrequencyLabeling::Swapped;
        let (zh2, zl2) = s.zetas().unwrap();
        assert!(zh2 > zh);
        assert!(zl2 < zl);
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(
            600.0,
            300.0,
            thermal_atoms(600.0, 1e10).unwrap(),
            Quality::Infinite,
        );
        s.nu2 = s.nu1;
        assert!(run_cycle(&s).is_err());
        let mut s = spec(
            600.0,
            300.0,
            thermal_atoms(600.0, 1e10).unwrap(),
            Quality::Infinite,
        );
        s.cold.prep = coherent_thermal_atoms(300.0, 1e10, 0.0, c(1.0)).unwrap();
        assert!(run_cycle(&s).is_err());
        assert!(ts_diagram(
            &spec(
                600.0,
                300.0,
                thermal_atoms(600.0, 1e10).unwrap(),
                Quality::Infinite
            ),
            1
        )
        .is_err());
    }

    #[test]
    fn positive_work_boundary() {
        let hot = thermal_atoms(300.0, 1e10).unwrap();
        let s = spec(300.0, 300.0, hot, Quality::Infinite);
        let pw = positive_work_condition(&s).unwrap();
        assert_eq!(pw.margin, 0.0);
        assert!(!pw.satisfied);
        let r = run_cycle(&s).unwrap();
        assert_eq!(r.work, 0.0);
        assert!(!r.positive_work);
    }

    #[test]
    fn ts_diagram_rectangle() {
        let hot = thermal_atoms(600.0, 1e10).unwrap();
        let s = spec(600.0, 300.0, hot, Quality::Infinite);
        let pts = ts_diagram(&s, 5).unwrap();
        assert_eq!(pts.len(), 20);
        assert!(pts
            .iter()
            .filter(|p| p.stroke == 1)
            .all(|p| p.t_eff == 600.0));
        assert!(pts
            .iter()
            .filter(|p| p.stroke == 3)
            .all(|p| p.t_eff == 300.0));
        let csv = ts_csv(&pts);
        assert!(csv.starts_with(TS_CSV_HEADER));
        assert_eq!(csv.lines().count(), 21);
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(sci(0.5), "5.0000000000000000e-1");
        assert_eq!(sci(-1234.5), "-1.2345000000000000e3");
    }
}
