//! Truncated Fock-space representation of the single-mode cavity field.
//!
//! A [`FieldState`] is a density matrix over the photon-number basis
//! `|0⟩ … |n_max⟩`. Constructors validate trace, Hermiticity, and numerical
//! positivity. Tail mass (population of the highest retained level) is
//! reported through [`FieldState::is_under_truncated`]; operations that
//! generate states from a physical model reject under-truncated results.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PceError, Result};

/// Default bound on the population of the top Fock level.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Hard cap for [`thermal_state_auto`].
pub const AUTO_GROW_CAP: usize = 4096;

pub(crate) const TRACE_TOL: f64 = 1e-12;
pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const POSITIVITY_TOL: f64 = -1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    n_max: usize,
    matrix: DMatrix<Complex64>,
}

impl FieldState {
    /// Wraps a density matrix after checking trace, Hermiticity, and positivity.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return invalid(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        let state = FieldState {
            n_max: matrix.nrows() - 1,
            matrix,
        };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        FieldState {
            n_max: matrix.nrows() - 1,
            matrix,
        }
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(n_max, 0).expect("vacuum is always representable")
    }

    /// Pure number state `|k⟩⟨k|`.
    pub fn fock(n_max: usize, k: usize) -> Result<Self> {
        if k > n_max {
            return invalid(format!("Fock level {k} exceeds truncation {n_max}"));
        }
        let mut m = DMatrix::zeros(n_max + 1, n_max + 1);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Diagonal of the density matrix (photon-number distribution).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Population of the highest retained level.
    pub fn tail_mass(&self) -> f64 {
        self.matrix[(self.n_max, self.n_max)].re
    }

    pub fn is_under_truncated(&self, tail_tol: f64) -> bool {
        self.tail_mass() > tail_tol
    }

    /// Errors with [`PceError::UnderTruncated`] when the tail check fails.
    pub fn check_tail(&self, tail_tol: f64) -> Result<()> {
        if self.is_under_truncated(tail_tol) {
            return Err(PceError::UnderTruncated {
                n_max: self.n_max,
                tail: self.tail_mass(),
                tol: tail_tol,
            });
        }
        Ok(())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks trace, Hermiticity, and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        let tr_res = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_res > TRACE_TOL {
            return Err(PceError::InvalidState {
                invariant: "unit trace",
                residual: tr_res,
            });
        }
        let herm = self.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(PceError::InvalidState {
                invariant: "Hermiticity",
                residual: herm,
            });
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < POSITIVITY_TOL {
            return Err(PceError::InvalidState {
                invariant: "positivity",
                residual: min_ev,
            });
        }
        Ok(())
    }

    /// Zero-pads the state to a larger truncation.
    pub fn embed(&self, n_max: usize) -> Result<FieldState> {
        if n_max < self.n_max {
            return invalid(format!(
                "cannot embed truncation {} into smaller truncation {n_max}",
                self.n_max
            ));
        }
        let mut m = DMatrix::zeros(n_max + 1, n_max + 1);
        m.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.matrix);
        Ok(Self::from_matrix_unchecked(m))
    }

    /// Trace norm `‖ρ − σ‖₁` (sum of absolute eigenvalues of the difference).
    pub fn trace_norm_distance(&self, other: &FieldState) -> Result<f64> {
        if self.dim() != other.dim() {
            return invalid("trace distance needs equal truncations");
        }
        let d = &self.matrix - &other.matrix;
        let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum())
    }

    pub fn to_json(&self) -> FieldStateJson {
        let n = self.dim();
        let re = (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)].im).collect())
            .collect();
        FieldStateJson {
            n_max: self.n_max,
            re,
            im,
        }
    }

    pub fn from_json(json: &FieldStateJson) -> Result<Self> {
        let n = json.n_max + 1;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !rows_ok(&json.re) || !rows_ok(&json.im) {
            return invalid(format!("state JSON must hold {n}x{n} re/im arrays"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(json.re[i][j], json.im[i][j]));
        Self::from_matrix(m)
    }
}

/// Wire format: `{ "n_max": int, "re": [[...]], "im": [[...]] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStateJson {
    pub n_max: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Diagonal density matrix with the given Fock populations.
pub fn diagonal_state(populations: &[f64]) -> Result<FieldState> {
    if populations.is_empty() {
        return invalid("population list is empty");
    }
    if let Some((k, p)) = populations
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return invalid(format!(
            "population {p} at level {k} is negative or not finite"
        ));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return invalid(format!("populations sum to {total}, expected 1"));
    }
    let n = populations.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(populations[i] / total, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(FieldState::from_matrix_unchecked(m))
}

/// Truncated Bose-Einstein (geometric) distribution with nominal mean `nbar`.
///
/// The truncated distribution is renormalized, so its mean approaches `nbar`
/// from below as `n_max` grows.
pub fn thermal_state(n_max: usize, nbar: f64) -> Result<FieldState> {
    thermal_state_with_tol(n_max, nbar, DEFAULT_TAIL_TOL)
}

pub fn thermal_state_with_tol(n_max: usize, nbar: f64, tail_tol: f64) -> Result<FieldState> {
    if !nbar.is_finite() || nbar < 0.0 {
        return invalid(format!(
            "mean photon number {nbar} must be finite and non-negative"
        ));
    }
    let pops = geometric_populations(n_max, nbar);
    let state = diagonal_state(&pops)?;
    state.check_tail(tail_tol)?;
    Ok(state)
}

/// Doubles the truncation starting from `start_n_max` until the tail check
/// passes, up to [`AUTO_GROW_CAP`].
pub fn thermal_state_auto(nbar: f64, start_n_max: usize) -> Result<FieldState> {
    let mut n_max = start_n_max.max(1);
    loop {
        match thermal_state(n_max, nbar) {
            Err(PceError::UnderTruncated { .. }) if n_max < AUTO_GROW_CAP => {
                n_max = (2 * n_max).min(AUTO_GROW_CAP);
            }
            other => return other,
        }
    }
}

fn geometric_populations(n_max: usize, nbar: f64) -> Vec<f64> {
    let ratio = nbar / (nbar + 1.0);
    let mut pops = Vec::with_capacity(n_max + 1);
    let mut p = 1.0 / (nbar + 1.0);
    for _ in 0..=n_max {
        pops.push(p);
        p *= ratio;
    }
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    pops
}

/// `Tr[n̂ ρ]`.
pub fn mean_photon(state: &FieldState) -> f64 {
    state
        .matrix
        .diagonal()
        .iter()
        .enumerate()
        .map(|(k, p)| k as f64 * p.re)
        .sum()
}
