//! Coarse-grained micromaser master equation.
//!
//! ```text
//! dρ/dt = r [M(τ) − 1] ρ + (ν/2Q) [2 a ρ a† − a†a ρ − ρ a†a]
//! ```
//!
//! `M(τ)` is the exact single-atom map from [`crate::jc`]; atoms arrive as a
//! Poisson stream at rate `r`. The loss term describes a zero-temperature
//! cavity with energy decay rate `ν/Q`. Both terms map `|m⟩⟨m'|` onto the
//! same diagonal offset `m − m'`, so the generator is block diagonal in the
//! offset and the stationary state lives in the offset-zero block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::atoms::AtomPrep;
use crate::error::{invalid, PceError, Result};
use crate::fock::{mean_photon, FieldState, DEFAULT_TAIL_TOL};
use crate::jc::{ElementImage, InjectionKernel};

/// Cavity quality factor; `Infinite` is a lossless cavity and is never
/// represented by a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quality {
    Finite(f64),
    Infinite,
}

impl Quality {
    /// Energy decay rate `ν/Q`; exactly zero for a lossless cavity.
    pub fn loss_rate(&self, nu: f64) -> f64 {
        match *self {
            Quality::Finite(q) => nu / q,
            Quality::Infinite => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Quality::Infinite)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Quality::Finite(q) => q,
            Quality::Infinite => f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Quality::Finite(q) if !(q.is_finite() && q > 0.0) => invalid(format!(
                "quality factor {q} must be positive (use \"inf\" for a lossless cavity)"
            )),
            _ => Ok(()),
        }
    }
}

impl From<f64> for Quality {
    fn from(q: f64) -> Self {
        if q.is_infinite() && q > 0.0 {
            Quality::Infinite
        } else {
            Quality::Finite(q)
        }
    }
}

impl Serialize for Quality {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Quality::Finite(q) => s.serialize_f64(q),
            Quality::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Quality {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Ok(Quality::Finite(q)),
            Raw::Text(t)
                if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") =>
            {
                Ok(Quality::Infinite)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "quality factor must be a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Cavity and injection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    /// Field angular frequency, rad/s.
    pub nu: f64,
    pub q_factor: Quality,
    /// Atom–field coupling λ, rad/s.
    pub lamb: f64,
    /// Interaction time τ, s.
    pub tau: f64,
    /// Injection rate r, 1/s.
    pub rate: f64,
    pub n_max: usize,
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu", self.nu), ("lamb", self.lamb), ("tau", self.tau)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return invalid(format!("rate = {} must be non-negative", self.rate));
        }
        self.q_factor.validate()
    }

    /// Pulse area `λτ`.
    pub fn lambda_tau(&self) -> f64 {
        self.lamb * self.tau
    }

    pub fn loss_rate(&self) -> f64 {
        self.q_factor.loss_rate(self.nu)
    }

    /// True when more than one atom is expected inside the cavity at once.
    pub fn exceeds_single_atom_bound(&self) -> bool {
        self.rate * self.tau > 1.0
    }

    pub fn with_nu(&self, nu: f64) -> Self {
        EngineParams { nu, ..self.clone() }
    }

    pub fn with_q(&self, q_factor: Quality) -> Self {
        EngineParams {
            q_factor,
            ..self.clone()
        }
    }

    fn warn_if_crowded(&self) {
        if self.exceeds_single_atom_bound() {
            log::warn!(
                "r*tau = {:.3} > 1: more than one atom in the cavity on average",
                self.rate * self.tau
            );
        }
    }
}

/// `μ = r λ² τ² / 2`.
pub fn mu(params: &EngineParams) -> f64 {
    0.5 * params.rate * params.lamb.powi(2) * params.tau.powi(2)
}

/// Full master-equation generator for one field truncation, stored as
/// matrix-unit images.
#[derive(Debug, Clone)]
pub struct Generator {
    kernel: InjectionKernel,
    rate: f64,
    loss: f64,
}

impl Generator {
    pub fn new(dim: usize, params: &EngineParams, prep: &AtomPrep) -> Result<Self> {
        params.validate()?;
        Ok(Generator {
            kernel: InjectionKernel::new(dim, prep, params.lambda_tau())?,
            rate: params.rate,
            loss: params.loss_rate(),
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Image of `|m⟩⟨m2|` under the generator.
    pub fn element(&self, m: usize, m2: usize) -> ElementImage {
        let inj = self.kernel.element(m, m2);
        let r = Complex64::new(self.rate, 0.0);
        let decay = 0.5 * self.loss * (m + m2) as f64;
        let feed = self.loss * ((m * m2) as f64).sqrt();
        ElementImage {
            same: r * (inj.same - 1.0) - decay,
            up: r * inj.up,
            down: r * inj.down + feed,
        }
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for m2 in 0..n {
            for m in 0..n {
                let x = rho[(m, m2)];
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                let img = self.element(m, m2);
                out[(m, m2)] += img.same * x;
                if m + 1 < n && m2 + 1 < n {
                    out[(m + 1, m2 + 1)] += img.up * x;
                }
                if m >= 1 && m2 >= 1 {
                    out[(m - 1, m2 - 1)] += img.down * x;
                }
            }
        }
        out
    }

    /// Generator restricted to the elements `|i⟩⟨i+k|`, indexed by `i`.
    pub fn sector_matrix(&self, k: usize) -> DMatrix<Complex64> {
        let n = self.dim();
        assert!(k < n, "offset {k} outside truncation");
        let len = n - k;
        let mut a = DMatrix::zeros(len, len);
        for i in 0..len {
            let img = self.element(i, i + k);
            a[(i, i)] += img.same;
            if i + 1 < len {
                a[(i + 1, i)] += img.up;
            }
            if i >= 1 {
                a[(i - 1, i)] += img.down;
            }
        }
        a
    }

    /// Largest rate appearing in the generator, used to scale residuals.
    pub fn scale(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0f64;
        for m in 0..n {
            let img = self.element(m, m);
            s = s
                .max(img.same.norm())
                .max(img.up.norm())
                .max(img.down.norm());
        }
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

/// Time derivative `dρ/dt` at `rho`.
pub fn liouvillian_apply(
    rho: &FieldState,
    params: &EngineParams,
    prep: &AtomPrep,
) -> Result<DMatrix<Complex64>> {
    rho.check_tail(DEFAULT_TAIL_TOL)?;
    params.warn_if_crowded();
    let gen = Generator::new(rho.dim(), params, prep)?;
    Ok(gen.apply(rho.matrix()))
}

/// `d⟨n⟩/dt = Tr[n̂ L ρ]` evaluated with the full generator.
pub fn mean_photon_rate(rho: &FieldState, params: &EngineParams, prep: &AtomPrep) -> Result<f64> {
    let d = liouvillian_apply(rho, params, prep)?;
    Ok(d.diagonal()
        .iter()
        .enumerate()
        .map(|(k, z)| k as f64 * z.re)
        .sum())
}

/// `max |L ρ| / scale`: how far `rho` is from stationarity.
pub fn stationarity_residual(
    rho: &FieldState,
    params: &EngineParams,
    prep: &AtomPrep,
) -> Result<f64> {
    let gen = Generator::new(rho.dim(), params, prep)?;
    Ok(max_abs(&gen.apply(rho.matrix())) / gen.scale())
}

/// Short-time mean-photon equation of motion:
/// `μ[(2p_e − θ) n + 2p_e] − (ν/Q) n`.
pub fn mean_photon_rhs(n_avg: f64, params: &EngineParams, prep: &AtomPrep) -> f64 {
    let mu = mu(params);
    let p_e = prep.p_e();
    mu * ((2.0 * p_e - prep.theta()) * n_avg + 2.0 * p_e) - params.loss_rate() * n_avg
}

/// Stationary point of [`mean_photon_rhs`]: `2μp_e / (μ(θ − 2p_e) + ν/Q)`.
pub fn mean_photon_steady(params: &EngineParams, prep: &AtomPrep) -> Result<f64> {
    let mu = mu(params);
    let denominator = mu * (prep.theta() - 2.0 * prep.p_e()) + params.loss_rate();
    if !(denominator > 0.0) {
        return Err(PceError::RunawayGain { denominator });
    }
    Ok(2.0 * mu * prep.p_e() / denominator)
}

/// Integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Per-step relative tolerance.
    pub rel_tol: f64,
    /// Per-step absolute tolerance on matrix entries.
    pub abs_tol: f64,
    pub tail_tol: f64,
    pub max_steps: usize,
    /// Record `(t, ⟨n⟩)` after every accepted step.
    pub record: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self::with_rel_tol(1e-8)
    }
}

impl EvolveOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        EvolveOptions {
            rel_tol,
            abs_tol: rel_tol * 1e-2,
            tail_tol: DEFAULT_TAIL_TOL,
            max_steps: 10_000_000,
            record: false,
        }
    }
}

/// Sampled mean photon number along an integration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mean_photon: Vec<f64>,
}

/// Integrates the master equation from `rho0` to `t_final`.
pub fn evolve(
    rho0: &FieldState,
    params: &EngineParams,
    prep: &AtomPrep,
    t_final: f64,
    rel_tol: f64,
) -> Result<FieldState> {
    evolve_with(
        rho0,
        params,
        prep,
        t_final,
        &EvolveOptions::with_rel_tol(rel_tol),
    )
    .map(|(s, _)| s)
}

pub fn evolve_with(
    rho0: &FieldState,
    params: &EngineParams,
    prep: &AtomPrep,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<(FieldState, Trajectory)> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return invalid(format!(
            "t_final = {t_final} must be finite and non-negative"
        ));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return invalid("integrator tolerances must be positive");
    }
    rho0.check_tail(opts.tail_tol)?;
    params.warn_if_crowded();
    let gen = Generator::new(rho0.dim(), params, prep)?;
    let mut traj = Trajectory::default();
    if opts.record {
        traj.times.push(0.0);
        traj.mean_photon.push(mean_photon(rho0));
    }
    if t_final == 0.0 {
        return Ok((rho0.clone(), traj));
    }
    let rho = integrate(&gen, rho0.matrix().clone(), t_final, opts, &mut traj)?;
    let trace = rho.trace();
    let rho = rho / trace;
    let state = FieldState::from_matrix(rho)?;
    state.check_tail(opts.tail_tol)?;
    Ok((state, traj))
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn integrate(
    gen: &Generator,
    mut y: DMatrix<Complex64>,
    t_final: f64,
    opts: &EvolveOptions,
    traj: &mut Trajectory,
) -> Result<DMatrix<Complex64>> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut t = 0.0;
    let mut h = (0.01 / gen.scale()).min(t_final);
    let mut k1 = gen.apply(&y);
    let mut accepted = 0usize;
    let mut steps = 0usize;
    while t < t_final {
        steps += 1;
        if steps > opts.max_steps {
            return Err(PceError::Numerical(format!(
                "integrator exceeded {} steps at t = {t:.6e}",
                opts.max_steps
            )));
        }
        if t + h > t_final {
            h = t_final - t;
        }
        if h <= 1e-14 * t_final.max(t) {
            return Err(PceError::StepUnderflow { t, h });
        }
        let hc = c(h);
        let k2 = gen.apply(&(&y + &k1 * c(h * A21)));
        let k3 = gen.apply(&(&y + &k1 * c(h * A31) + &k2 * c(h * A32)));
        let k4 = gen.apply(&(&y + &k1 * c(h * A41) + &k2 * c(h * A42) + &k3 * c(h * A43)));
        let k5 = gen.apply(
            &(&y + &k1 * c(h * A51) + &k2 * c(h * A52) + &k3 * c(h * A53) + &k4 * c(h * A54)),
        );
        let k6 = gen.apply(
            &(&y + &k1 * c(h * A61)
                + &k2 * c(h * A62)
                + &k3 * c(h * A63)
                + &k4 * c(h * A64)
                + &k5 * c(h * A65)),
        );
        let y_new = &y + (&k1 * c(B1) + &k3 * c(B3) + &k4 * c(B4) + &k5 * c(B5) + &k6 * c(B6)) * hc;
        let k7 = gen.apply(&y_new);
        let err =
            (&k1 * c(E1) + &k3 * c(E3) + &k4 * c(E4) + &k5 * c(E5) + &k6 * c(E6) + &k7 * c(E7))
                * hc;

        let mut err_norm = 0.0f64;
        for ((e, a), b) in err.iter().zip(y.iter()).zip(y_new.iter()) {
            let scale = opts.abs_tol + opts.rel_tol * a.norm().max(b.norm());
            err_norm = err_norm.max(e.norm() / scale);
        }
        if !err_norm.is_finite() {
            return Err(PceError::Numerical(format!(
                "non-finite state at t = {t:.6e}"
            )));
        }
        if err_norm <= 1.0 {
            t += h;
            y = hermitize(y_new);
            // FSAL: k7 is the derivative at the unsymmetrized point; the
            // difference is below the step tolerance.
            k1 = k7;
            accepted += 1;
            if opts.record {
                traj.times.push(t);
                traj.mean_photon.push(
                    y.diagonal()
                        .iter()
                        .enumerate()
                        .map(|(k, z)| k as f64 * z.re)
                        .sum(),
                );
            }
            if accepted % 64 == 0 {
                let n = y.nrows() - 1;
                let tail = y[(n, n)].re;
                if tail > opts.tail_tol {
                    return Err(PceError::UnderTruncated {
                        n_max: n,
                        tail,
                        tol: opts.tail_tol,
                    });
                }
            }
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// How [`steady_state_with`] finds the stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteadyMethod {
    /// Direct solve, falling back to integration when the solve fails.
    #[default]
    Auto,
    Direct,
    Integrate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOptions {
    /// Bound on `max |L ρ| / scale` for the returned state.
    pub tol: f64,
    pub tail_tol: f64,
    pub method: SteadyMethod,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            tol: 1e-10,
            tail_tol: DEFAULT_TAIL_TOL,
            method: SteadyMethod::Auto,
        }
    }
}

// Relative singular-value floor below which a sector is treated as singular.
const SINGULAR_RATIO: f64 = 1e-13;

/// Stationary field state in the truncation `params.n_max`.
pub fn steady_state(params: &EngineParams, prep: &AtomPrep, tol: f64) -> Result<FieldState> {
    steady_state_with(
        params,
        prep,
        &SteadyOptions {
            tol,
            ..SteadyOptions::default()
        },
    )
}

pub fn steady_state_with(
    params: &EngineParams,
    prep: &AtomPrep,
    opts: &SteadyOptions,
) -> Result<FieldState> {
    params.warn_if_crowded();
    let dim = params.n_max + 1;
    let gen = Generator::new(dim, params, prep)?;
    let scale = gen.scale();

    // Coherence sectors must decay, otherwise the stationary state is not unique.
    for k in 1..dim {
        let a = gen.sector_matrix(k) / Complex64::new(scale, 0.0);
        let sv = a.singular_values();
        let (lo, hi) = min_max(sv.iter().copied());
        if hi == 0.0 || lo / hi.max(1.0) < SINGULAR_RATIO {
            return Err(PceError::AmbiguousNullSpace(format!(
                "coherence sector with offset {k} has a stationary component"
            )));
        }
    }

    let state = match opts.method {
        SteadyMethod::Integrate => integrate_to_stationarity(&gen, opts)?,
        SteadyMethod::Direct => solve_populations(&gen, opts)?,
        SteadyMethod::Auto => match solve_populations(&gen, opts) {
            Err(PceError::Numerical(msg)) => {
                log::info!("direct steady-state solve failed ({msg}); integrating instead");
                integrate_to_stationarity(&gen, opts)?
            }
            other => other?,
        },
    };

    if let Err(e) = state.check_tail(opts.tail_tol) {
        return match mean_photon_steady(params, prep) {
            Err(runaway) => Err(runaway),
            Ok(_) => Err(e),
        };
    }
    Ok(state)
}

fn solve_populations(gen: &Generator, opts: &SteadyOptions) -> Result<FieldState> {
    let dim = gen.dim();
    let scale = Complex64::new(gen.scale(), 0.0);
    let mut a = gen.sector_matrix(0) / scale;
    for j in 0..dim {
        a[(0, j)] = Complex64::new(1.0, 0.0);
    }
    let sv = a.singular_values();
    let (lo, hi) = min_max(sv.iter().copied());
    if lo / hi < SINGULAR_RATIO {
        return Err(PceError::AmbiguousNullSpace(
            "population block has more than one stationary distribution".into(),
        ));
    }
    let mut b = DVector::zeros(dim);
    b[0] = Complex64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| PceError::Numerical("population system is singular".into()))?;
    let rho = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(x[i].re, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let residual = max_abs(&gen.apply(&rho)) / gen.scale();
    if !(residual <= opts.tol) {
        return Err(PceError::Numerical(format!(
            "direct solve residual {residual:.3e} exceeds {:.1e}",
            opts.tol
        )));
    }
    FieldState::from_matrix(rho).map_err(|e| PceError::Numerical(format!("direct solve: {e}")))
}

fn integrate_to_stationarity(gen: &Generator, opts: &SteadyOptions) -> Result<FieldState> {
    let evolve_opts = EvolveOptions {
        rel_tol: (opts.tol * 1e-2).max(1e-12),
        abs_tol: (opts.tol * 1e-4).max(1e-14),
        tail_tol: f64::INFINITY,
        ..EvolveOptions::default()
    };
    let dim = gen.dim();
    let mut rho = FieldState::vacuum(dim - 1).into_matrix();
    let mut chunk = 10.0 / gen.scale();
    let mut traj = Trajectory::default();
    for _ in 0..60 {
        rho = integrate(gen, rho, chunk, &evolve_opts, &mut traj)?;
        let trace = rho.trace();
        rho /= trace;
        let residual = max_abs(&gen.apply(&rho)) / gen.scale();
        if residual <= opts.tol {
            return FieldState::from_matrix(rho);
        }
        chunk *= 2.0;
    }
    Err(PceError::Numerical(
        "long-time integration did not reach stationarity".into(),
    ))
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}
