//! Resonant Jaynes–Cummings evolution of one injected atom and the
//! resulting single-atom map on the field.
//!
//! The atom couples to the field only through the bright ground state
//! `|G⟩ = (|g1⟩ + |g2⟩)/√2`, so the joint evolution splits into 3×3 blocks on
//! `V_m = span{|e, m−1⟩, |g1, m⟩, |g2, m⟩}`. The antisymmetric ground state
//! is dark in every block.
//!
//! Joint atom⊗field operators use the index `a·(n_max+1) + n` with atom
//! index `a ∈ {e, g1, g2} = {0, 1, 2}`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::atoms::AtomPrep;
use crate::error::{invalid, Result};
use crate::fock::{FieldState, DEFAULT_TAIL_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One diagonal block of the joint evolution operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitary {
    pub m: usize,
    /// Rotation angle `λ√m τ`.
    pub phase: f64,
    /// Ordered basis `{|e, m−1⟩, |g1, m⟩, |g2, m⟩}`.
    pub matrix: Matrix3<Complex64>,
}

/// The block on `V_m` for rotation angle `phase = λ√m τ`.
pub fn block_u(m: usize, phase: f64) -> Result<BlockUnitary> {
    if m < 1 {
        return invalid("block index m must be at least 1");
    }
    if !phase.is_finite() {
        return invalid(format!("block phase {phase} is not finite"));
    }
    Ok(BlockUnitary {
        m,
        phase,
        matrix: block_matrix(phase),
    })
}

/// Block on `V_m` for a given pulse area `λτ`.
pub fn block_for(m: usize, lambda_tau: f64) -> Result<BlockUnitary> {
    block_u(m, lambda_tau * (m as f64).sqrt())
}

fn block_matrix(phase: f64) -> Matrix3<Complex64> {
    let (s, c) = phase.sin_cos();
    let half = 0.5 * phase;
    let c_half2 = half.cos().powi(2);
    let s_half2 = half.sin().powi(2);
    let off = Complex64::new(0.0, -s * std::f64::consts::FRAC_1_SQRT_2);
    Matrix3::new(
        Complex64::new(c, 0.0),
        off,
        off,
        off,
        Complex64::new(c_half2, 0.0),
        Complex64::new(-s_half2, 0.0),
        off,
        Complex64::new(-s_half2, 0.0),
        Complex64::new(c_half2, 0.0),
    )
}

/// Joint unitary on the `3(n_max+1)`-dimensional atom⊗field space.
///
/// Identity on `V_0` and on the dangling state `|e, n_max⟩`, whose partner
/// lies beyond the truncation.
pub fn full_unitary(n_max: usize, lambda_tau: f64) -> Result<DMatrix<Complex64>> {
    if !lambda_tau.is_finite() {
        return invalid("lambda_tau must be finite");
    }
    let n = n_max + 1;
    let mut u = DMatrix::identity(3 * n, 3 * n);
    for m in 1..=n_max {
        let block = block_for(m, lambda_tau)?.matrix;
        let idx = [m - 1, n + m, 2 * n + m];
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                u[(ir, ic)] = block[(r, c)];
            }
        }
    }
    Ok(u)
}

/// Single-atom field map `ρ ↦ Tr_A[U (ρ ⊗ ρ_A) U†]` in a fixed truncation,
/// stored as field-operator matrix elements of the blocks.
///
/// The input element `|m⟩⟨m'|` maps onto `|m⟩⟨m'|`, `|m+1⟩⟨m'+1|`, and
/// `|m−1⟩⟨m'−1|` only, because the atom carries no `e`–`g` coherence.
#[derive(Debug, Clone)]
pub struct InjectionKernel {
    dim: usize,
    p_e: f64,
    ground: [[Complex64; 2]; 2],
    /// `⟨e|U|e⟩` acting on `|k⟩`.
    stay_excited: Vec<Complex64>,
    /// `⟨g_i|U|e⟩`: `|k⟩ → |k+1⟩`.
    emit: [Vec<Complex64>; 2],
    /// `⟨e|U|g_j⟩`: `|k⟩ → |k−1⟩`.
    absorb: [Vec<Complex64>; 2],
    /// `⟨g_i|U|g_j⟩` acting on `|k⟩`.
    stay_ground: [[Vec<Complex64>; 2]; 2],
}

/// Coefficients of the image of one matrix unit `|m⟩⟨m'|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementImage {
    pub same: Complex64,
    pub up: Complex64,
    pub down: Complex64,
}

impl InjectionKernel {
    /// Kernel for a field truncated to `dim` levels.
    pub fn new(dim: usize, prep: &AtomPrep, lambda_tau: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("field dimension must be positive");
        }
        if !lambda_tau.is_finite() {
            return invalid("lambda_tau must be finite");
        }
        let blocks: Vec<Matrix3<Complex64>> = (0..dim)
            .map(|m| {
                if m == 0 {
                    Matrix3::identity()
                } else {
                    block_matrix(lambda_tau * (m as f64).sqrt())
                }
            })
            .collect();
        let top = dim - 1;
        let stay_excited = (0..dim)
            .map(|k| if k < top { blocks[k + 1][(0, 0)] } else { ONE })
            .collect();
        let emit = [1, 2].map(|i| {
            (0..dim)
                .map(|k| if k < top { blocks[k + 1][(i, 0)] } else { ZERO })
                .collect()
        });
        let absorb = [1, 2].map(|j| {
            (0..dim)
                .map(|k| if k >= 1 { blocks[k][(0, j)] } else { ZERO })
                .collect()
        });
        let stay_ground = [1, 2].map(|i| {
            [1, 2].map(|j| {
                (0..dim)
                    .map(|k| {
                        if k >= 1 {
                            blocks[k][(i, j)]
                        } else if i == j {
                            ONE
                        } else {
                            ZERO
                        }
                    })
                    .collect()
            })
        });
        let rho_a = prep.density_matrix();
        let ground = [
            [rho_a[(1, 1)], rho_a[(1, 2)]],
            [rho_a[(2, 1)], rho_a[(2, 2)]],
        ];
        Ok(InjectionKernel {
            dim,
            p_e: prep.p_e(),
            ground,
            stay_excited,
            emit,
            absorb,
            stay_ground,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Image of `|m⟩⟨m2|` under the single-atom map.
    pub fn element(&self, m: usize, m2: usize) -> ElementImage {
        let p_e = Complex64::new(self.p_e, 0.0);
        let mut same = p_e * self.stay_excited[m] * self.stay_excited[m2].conj();
        let mut down = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                let w = self.ground[i][j];
                if w == ZERO {
                    continue;
                }
                let mut s = ZERO;
                for k in 0..2 {
                    s += self.stay_ground[k][i][m] * self.stay_ground[k][j][m2].conj();
                }
                same += w * s;
                down += w * self.absorb[i][m] * self.absorb[j][m2].conj();
            }
        }
        let up = p_e
            * (self.emit[0][m] * self.emit[0][m2].conj()
                + self.emit[1][m] * self.emit[1][m2].conj());
        ElementImage { same, up, down }
    }

    /// Applies the map to a `dim × dim` matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim;
        assert_eq!(rho.nrows(), n, "matrix does not match kernel dimension");
        let mut out = DMatrix::zeros(n, n);
        for m2 in 0..n {
            for m in 0..n {
                let x = rho[(m, m2)];
                if x == ZERO {
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
}

/// One atom transit: `M(τ)ρ = Tr_A[U (ρ ⊗ ρ_A) U†]`.
///
/// The field is first embedded with one extra level of headroom, so the
/// returned state has truncation `field.n_max() + 1`. Fails if the
/// population pushed onto the new top level exceeds the default tail
/// tolerance.
pub fn super_m(field: &FieldState, prep: &AtomPrep, lambda_tau: f64) -> Result<FieldState> {
    super_m_with_tol(field, prep, lambda_tau, DEFAULT_TAIL_TOL)
}

pub fn super_m_with_tol(
    field: &FieldState,
    prep: &AtomPrep,
    lambda_tau: f64,
    tail_tol: f64,
) -> Result<FieldState> {
    let grown = field.embed(field.n_max() + 1)?;
    let kernel = InjectionKernel::new(grown.dim(), prep, lambda_tau)?;
    let out = FieldState::from_matrix_unchecked(kernel.apply(grown.matrix()));
    out.check_tail(tail_tol)?;
    Ok(out)
}
