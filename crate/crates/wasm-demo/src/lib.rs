//! Browser bindings for the engine toolkit. Each export takes plain numbers
//! and returns a JSON string for the page script to plot.

use num_complex::Complex64;
use pce::atoms::{coherent_thermal_atoms, phaseonium, thermal_atoms, AtomPrep};
use pce::carnot::{self, run_cycle, CycleSpec, FrequencyLabeling, IsothermSpec, TsSample};
use pce::fock::mean_photon;
use pce::micromaser::{mean_photon_steady, steady_state, EngineParams, Quality};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const NU: f64 = 1e10;
const MAX_POINTS: usize = 512;
const MAX_N_MAX: usize = 150;

/// Thermal hot atoms carrying ground coherence at `Arg(c1 c2*) = phase`.
/// In the high-temperature regime `n/p_e` is in the thousands, so a usable
/// ξ is tiny; `strength` instead sets `|ζ_h|` from coherence alone.
fn hot_prep(t_h: f64, strength: f64, phase: f64) -> Result<AtomPrep, String> {
    if !(0.0..1.0).contains(&strength) {
        return Err("coherence strength must lie in [0, 1)".into());
    }
    let plain = thermal_atoms(t_h, NU).map_err(|e| e.to_string())?;
    let n_over_pe = 2.0 / (plain.ground_population() - 2.0 * plain.p_e());
    let xi = strength / (n_over_pe * (plain.c1() * plain.c2()).norm());
    coherent_thermal_atoms(t_h, NU, phase, Complex64::new(xi, 0.0)).map_err(|e| e.to_string())
}

fn quality(log10_q: f64) -> Quality {
    if log10_q.is_finite() {
        Quality::Finite(10f64.powf(log10_q))
    } else {
        Quality::Infinite
    }
}

fn spec(t_h: f64, t_l: f64, strength: f64, phase: f64, log10_q: f64) -> Result<CycleSpec, String> {
    Ok(CycleSpec {
        hot: IsothermSpec {
            t: t_h,
            prep: hot_prep(t_h, strength, phase)?,
            nu: NU,
        },
        cold: IsothermSpec {
            t: t_l,
            prep: thermal_atoms(t_l, NU).map_err(|e| e.to_string())?,
            nu: NU,
        },
        nu1: 2.0 * NU,
        nu2: NU,
        engine: EngineParams {
            nu: NU,
            q_factor: quality(log10_q),
            lamb: 1e5,
            tau: 1e-6,
            rate: 1e6,
            n_max: 10,
        },
        labeling: FrequencyLabeling::Conventional,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Serialize)]
struct Diagram {
    samples: Vec<TsSample>,
    eta: f64,
    carnot: f64,
    t_h_eff: f64,
    t_l_eff: f64,
    zeta_h: f64,
    zeta_l: f64,
}

/// T-S samples of one cycle. A non-finite `log10_q` means a lossless cavity.
pub fn ts_diagram_json(
    t_h: f64,
    t_l: f64,
    strength: f64,
    phase: f64,
    log10_q: f64,
    points: usize,
) -> Result<String, String> {
    let s = spec(t_h, t_l, strength, phase, log10_q)?;
    let report = run_cycle(&s).map_err(|e| e.to_string())?;
    let samples = carnot::ts_diagram(&s, points.clamp(2, MAX_POINTS)).map_err(|e| e.to_string())?;
    Ok(to_json(&Diagram {
        samples,
        eta: report.eta,
        carnot: 1.0 - t_l / t_h,
        t_h_eff: report.t_h_eff,
        t_l_eff: report.t_l_eff,
        zeta_h: report.zeta_h,
        zeta_l: report.zeta_l,
    }))
}

#[derive(Serialize)]
struct EtaPoint {
    log10_q: f64,
    eta: Option<f64>,
    error: Option<String>,
}

/// Efficiency on a log grid of Q, followed by the lossless value (`log10_q`
/// serialized as null).
pub fn efficiency_vs_q_json(
    t_h: f64,
    t_l: f64,
    strength: f64,
    phase: f64,
    log10_q_min: f64,
    log10_q_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(log10_q_max > log10_q_min) {
        return Err("log10_q_max must exceed log10_q_min".into());
    }
    let points = points.clamp(2, MAX_POINTS);
    let mut grid: Vec<f64> = (0..points)
        .map(|i| log10_q_min + (log10_q_max - log10_q_min) * i as f64 / (points - 1) as f64)
        .collect();
    grid.push(f64::INFINITY);
    let mut out = Vec::with_capacity(grid.len());
    for lq in grid {
        let r = spec(t_h, t_l, strength, phase, lq)
            .and_then(|s| run_cycle(&s).map_err(|e| e.to_string()));
        out.push(EtaPoint {
            log10_q: lq,
            eta: r.as_ref().ok().map(|r| r.eta),
            error: r.err(),
        });
    }
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct Distribution {
    populations: Vec<f64>,
    mean_photon: f64,
    analytic_mean_photon: f64,
}

/// Stationary photon distribution in scaled units (`μ = 1`, loss rate
/// `loss_over_mu`). Ground amplitudes are split evenly.
pub fn steady_distribution_json(
    p_e: f64,
    xi: f64,
    phase: f64,
    lambda_tau: f64,
    loss_over_mu: f64,
    n_max: usize,
) -> Result<String, String> {
    if !(lambda_tau > 0.0) {
        return Err("lambda_tau must be positive".into());
    }
    if !(loss_over_mu >= 0.0) {
        return Err("loss rate must be non-negative".into());
    }
    let amp = ((1.0 - p_e) / 2.0).max(0.0).sqrt();
    let prep = phaseonium(
        p_e,
        Complex64::new(amp, 0.0),
        Complex64::from_polar(amp, -phase),
        Complex64::new(xi, 0.0),
    )
    .map_err(|e| e.to_string())?;
    let params = EngineParams {
        nu: 1.0,
        q_factor: if loss_over_mu > 0.0 {
            Quality::Finite(1.0 / loss_over_mu)
        } else {
            Quality::Infinite
        },
        lamb: 1.0,
        tau: lambda_tau,
        rate: 2.0 / (lambda_tau * lambda_tau),
        n_max: n_max.clamp(1, MAX_N_MAX),
    };
    let analytic = mean_photon_steady(&params, &prep).map_err(|e| e.to_string())?;
    let rho = steady_state(&params, &prep, 1e-10).map_err(|e| e.to_string())?;
    Ok(to_json(&Distribution {
        populations: rho.populations(),
        mean_photon: mean_photon(&rho),
        analytic_mean_photon: analytic,
    }))
}

#[wasm_bindgen]
pub fn ts_diagram(
    t_h: f64,
    t_l: f64,
    strength: f64,
    phase: f64,
    log10_q: f64,
    points: usize,
) -> Result<String, JsValue> {
    ts_diagram_json(t_h, t_l, strength, phase, log10_q, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn efficiency_vs_q(
    t_h: f64,
    t_l: f64,
    strength: f64,
    phase: f64,
    log10_q_min: f64,
    log10_q_max: f64,
    points: usize,
) -> Result<String, JsValue> {
    efficiency_vs_q_json(t_h, t_l, strength, phase, log10_q_min, log10_q_max, points)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn steady_distribution(
    p_e: f64,
    xi: f64,
    phase: f64,
    lambda_tau: f64,
    loss_over_mu: f64,
    n_max: usize,
) -> Result<String, JsValue> {
    steady_distribution_json(p_e, xi, phase, lambda_tau, loss_over_mu, n_max)
        .map_err(|e| JsValue::from_str(&e))
}
