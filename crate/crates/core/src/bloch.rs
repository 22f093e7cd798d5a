//! Operator-states and their Bloch vectors in the `(N^2 - 1)`-dimensional
//! unit ball, via `D(r) = (I + c_N r·Λ) / N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::generators::GeneratorSet;
use crate::linalg::{self, eigh, fix_phase, trace, trace_product, vec_norm, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as non-negative.
pub const POSITIVITY_TOL: f64 = -1e-10;
const BALL_TOL: f64 = 1e-10;
const RANK_ONE_TOL: f64 = 1e-9;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let scale = matrix.max_abs().max(1.0);
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL * scale {
            return Err(BlochError::NotAState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(BlochError::NotAState(format!("trace is {tr}, not 1")));
        }
        let min = eigh(&matrix)?.eigenvalues[0];
        if min < POSITIVITY_TOL {
            return Err(BlochError::NotAState(format!("negative eigenvalue {min}")));
        }
        Ok(Self { matrix })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_trusted(ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr D^2`, computed from the matrix.
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix)
            .expect("square matrix")
            .re
    }
}

/// Real coordinates `r` of an operator `D(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    /// Hilbert-space dimension N.
    #[serde(rename = "n")]
    dim_n: usize,
    coords: Vec<f64>,
}

impl BlochVector {
    /// Requires `coords.len() == N^2 - 1` and `|r| <= 1`.
    pub fn new(dim_n: usize, coords: Vec<f64>) -> Result<Self> {
        if dim_n < 2 {
            return Err(BlochError::DimensionTooSmall { min: 2, found: dim_n });
        }
        if coords.len() != dim_n * dim_n - 1 {
            return Err(BlochError::DimensionMismatch {
                expected: dim_n * dim_n - 1,
                found: coords.len(),
            });
        }
        let norm = linalg::norm(&coords);
        if norm > 1.0 + BALL_TOL {
            return Err(BlochError::OutsideBall { norm });
        }
        Ok(Self { dim_n, coords })
    }

    pub fn zero(dim_n: usize) -> Self {
        Self {
            dim_n,
            coords: vec![0.0; dim_n * dim_n - 1],
        }
    }

    /// Unit vector along the last coordinate, `(0, .., 0, 1)`.
    pub fn last_axis(dim_n: usize) -> Self {
        let mut r = Self::zero(dim_n);
        *r.coords.last_mut().expect("N >= 2") = 1.0;
        r
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coords)
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        linalg::dot(&self.coords, &other.coords)
    }

    /// `a * self + b * other`, no ball check (used for convex combinations
    /// and straight paths inside the ball).
    pub fn affine(&self, a: f64, other: &BlochVector, b: f64) -> BlochVector {
        debug_assert_eq!(self.dim_n, other.dim_n);
        BlochVector {
            dim_n: self.dim_n,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Unit ket with its global phase fixed (first significant amplitude real
/// and positive).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Normalizes and fixes the phase.
    pub fn new(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(BlochError::InvalidArgument("ket has zero norm".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        fix_phase(&mut amplitudes);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_trusted(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut a = vec![linalg::ZERO; n];
        a[k] = linalg::ONE;
        Self { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityState {
        DensityState::from_pure(self)
    }
}

fn check_dim(g: &GeneratorSet, found: usize) -> Result<()> {
    if g.dim() == found {
        Ok(())
    } else {
        Err(BlochError::DimensionMismatch {
            expected: g.dim(),
            found,
        })
    }
}

/// Coordinates `(N / 2c_N) Re Tr(A Λ_i)` of any Hermitian operator; no
/// ball or state check.
pub(crate) fn operator_coords(a: &ComplexMatrix, g: &GeneratorSet) -> Result<Vec<f64>> {
    check_dim(g, a.dim())?;
    let factor = g.dim() as f64 / (2.0 * g.c_n());
    g.generators()
        .iter()
        .map(|l| trace_product(a, l).map(|t| factor * t.re))
        .collect()
}

pub fn state_to_bloch(d: &DensityState, g: &GeneratorSet) -> Result<BlochVector> {
    let coords = operator_coords(d.matrix(), g)?;
    // norm <= 1 holds for every density matrix; clamp rounding above 1
    let norm = linalg::norm(&coords);
    let coords = if norm > 1.0 && norm <= 1.0 + BALL_TOL {
        coords.into_iter().map(|x| x / norm).collect()
    } else {
        coords
    };
    BlochVector::new(g.dim(), coords)
}

/// `D(r) = (I + c_N Σ r_i Λ_i) / N`; Hermitian with unit trace but not
/// necessarily positive.
pub fn bloch_to_operator(r: &BlochVector, g: &GeneratorSet) -> Result<ComplexMatrix> {
    check_dim(g, r.dim_n())?;
    let n = g.dim() as f64;
    let scaled: Vec<f64> = r.coords().iter().map(|x| x * g.c_n() / n).collect();
    g.combine_real(1.0 / n, &scaled)
}

/// `Tr D(r)^2 = 1/N + (1 - 1/N) |r|^2`
pub fn purity(r: &BlochVector) -> f64 {
    let n = r.dim_n() as f64;
    let norm_sq = linalg::dot(r.coords(), r.coords());
    1.0 / n + (1.0 - 1.0 / n) * norm_sq
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateCheck {
    pub is_state: bool,
    pub min_eigenvalue: f64,
}

/// Whether `D(r)` is positive semidefinite (smallest eigenvalue `>= -1e-10`).
pub fn is_state(r: &BlochVector, g: &GeneratorSet) -> Result<StateCheck> {
    let d = bloch_to_operator(r, g)?;
    let min_eigenvalue = eigh(&d)?.eigenvalues[0];
    Ok(StateCheck {
        is_state: min_eigenvalue >= POSITIVITY_TOL,
        min_eigenvalue,
    })
}

/// Density state represented by `r`, if `D(r)` is positive.
pub fn bloch_to_state(r: &BlochVector, g: &GeneratorSet) -> Result<DensityState> {
    let check = is_state(r, g)?;
    if !check.is_state {
        return Err(BlochError::NotAState(format!(
            "negative eigenvalue {}",
            check.min_eigenvalue
        )));
    }
    Ok(DensityState::from_trusted(bloch_to_operator(r, g)?))
}

/// Recovers `|ψ>` from `P = |ψ><ψ|` as `b_l = <l|P|k> / sqrt(<k|P|k>)` with
/// `k` the first index where `<k|P|k> > 1e-12`.
pub fn projector_to_ket(p: &DensityState) -> Result<PureState> {
    let purity = p.purity();
    if (purity - 1.0).abs() > RANK_ONE_TOL {
        return Err(BlochError::NotRankOne { purity });
    }
    let m = p.matrix();
    let n = m.dim();
    let k = (0..n)
        .find(|&k| m[(k, k)].re > 1e-12)
        .ok_or(BlochError::NotRankOne { purity })?;
    let pivot = m[(k, k)].re.sqrt();
    let mut amplitudes: Vec<Complex64> = (0..n).map(|l| m[(l, k)] / pivot).collect();
    amplitudes[k].im = 0.0;
    let norm = vec_norm(&amplitudes);
    for a in &mut amplitudes {
        *a /= norm;
    }
    Ok(PureState::from_trusted(amplitudes))
}

/// `P(θ, φ)` for a qubit: `[[cos²(θ/2), sin cos e^{-iφ}], [sin cos e^{iφ}, sin²(θ/2)]]`.
pub fn pure_state_from_direction(theta: f64, phi: f64) -> DensityState {
    let (s, c) = (theta / 2.0).sin_cos();
    let off = Complex64::from_polar(s * c, -phi);
    let matrix = ComplexMatrix::from_rows(vec![
        vec![Complex64::new(c * c, 0.0), off],
        vec![off.conj(), Complex64::new(s * s, 0.0)],
    ])
    .expect("2x2");
    DensityState::from_trusted(matrix)
}
