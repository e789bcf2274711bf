//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's physics; inputs come in as plain
//! numbers or matrices.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `exp(−i H τ)` on `{|e,m−1⟩, |g1,m⟩, |g2,m⟩}` with `H = λ(|e⟩⟨G| a + h.c.)`
/// and `phase = λ√m τ`.
pub fn block_exp(phase: f64) -> Matrix3<Complex64> {
    let g = cx(0.0, -phase * FRAC_1_SQRT_2);
    let z = cx(0.0, 0.0);
    let k = Matrix3::new(z, g, g, g, z, z, g, z, z);
    k.exp()
}

/// Atom density matrix on `{e, g1, g2}` from raw amplitudes.
pub fn atom_rho(p_e: f64, c1: Complex64, c2: Complex64, xi: Complex64) -> DMatrix<Complex64> {
    let off = xi * c1 * c2.conj();
    let mut r = DMatrix::zeros(3, 3);
    r[(0, 0)] = cx(p_e, 0.0);
    r[(1, 1)] = cx(c1.norm_sqr(), 0.0);
    r[(2, 2)] = cx(c2.norm_sqr(), 0.0);
    r[(1, 2)] = off;
    r[(2, 1)] = off.conj();
    r
}

/// Interaction Hamiltonian (units of λ) on the joint space with `n` field
/// levels, index `a·n + k`.
pub fn joint_hamiltonian(n: usize) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(3 * n, 3 * n);
    for k in 1..n {
        let g = cx((k as f64).sqrt() * FRAC_1_SQRT_2, 0.0);
        for a in [1, 2] {
            h[(k - 1, a * n + k)] = g;
            h[(a * n + k, k - 1)] = g;
        }
    }
    h
}

/// `Tr_A[U (ρ_A ⊗ ρ) U†]` by dense exponentiation. `rho` must already sit in
/// the target truncation, with enough headroom that the top level stays empty.
pub fn dense_transit(
    rho: &DMatrix<Complex64>,
    rho_atom: &DMatrix<Complex64>,
    lambda_tau: f64,
) -> DMatrix<Complex64> {
    let n = rho.nrows();
    let u = (joint_hamiltonian(n) * cx(0.0, -lambda_tau)).exp();
    let joint = rho_atom.kronecker(rho);
    let evolved = &u * joint * u.adjoint();
    let mut out = DMatrix::zeros(n, n);
    for a in 0..3 {
        out += evolved.view((a * n, a * n), (n, n));
    }
    out
}

/// Random density matrix supported on the lowest `support` levels of `dim`.
pub fn random_density<R: Rng>(rng: &mut R, support: usize, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(support, support, |_, _| {
        cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let small = &g * g.adjoint();
    let tr = small.trace();
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (support, support))
        .copy_from(&(small / tr));
    out
}

/// Random normalized `(p_e, c1, c2, ξ)` with `|ξ| ≤ 1`.
pub fn random_amplitudes<R: Rng>(rng: &mut R) -> (f64, Complex64, Complex64, Complex64) {
    let p_e: f64 = rng.gen_range(0.0..1.0);
    let split: f64 = rng.gen_range(0.0..1.0);
    let g = 1.0 - p_e;
    let c1 = Complex64::from_polar(
        (g * split).sqrt(),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let c2 = Complex64::from_polar(
        (g * (1.0 - split)).sqrt(),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let xi = Complex64::from_polar(
        rng.gen_range(0.0..1.0),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    (p_e, c1, c2, xi)
}

/// Closed-form steady `⟨n⟩` of the coarse-grained rate equation.
pub fn mean_photon_closed_form(
    mu: f64,
    kappa: f64,
    p_e: f64,
    c1: Complex64,
    c2: Complex64,
    xi: Complex64,
) -> f64 {
    let theta = c1.norm_sqr() + c2.norm_sqr() + 2.0 * (xi * c1 * c2.conj()).re;
    2.0 * mu * p_e / (mu * (theta - 2.0 * p_e) + kappa)
}

/// Photon entropy of a Bose distribution with mean `n`, J/K, as
/// `k[(n+1)ln(n+1) − n ln n]` regrouped to avoid cancellation at large `n`.
pub fn canonical_entropy(n: f64) -> f64 {
    K_B * (n.ln_1p() + n * (1.0 / n).ln_1p())
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
