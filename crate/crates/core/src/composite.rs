//! Two spin entities on `C^{N1} ⊗ C^{N2}`: total spin operators and the
//! coupled `(s, μ_s)` and product `(μ1, μ2)` eigenbases of `S_n`.

use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::PureState;
use crate::error::{BlochError, Result};
use crate::generators::GeneratorSet;
use crate::linalg::{eigh, kron, kron_vec, ComplexMatrix, DEGENERACY_TOL};
use crate::measurement::MeasurementSimplex;
use crate::spin::{directional, spin_along, Direction3, Spin, SpinSystem};

fn round_half(x: f64) -> f64 {
    (2.0 * x).round() / 2.0
}

/// `S_i = S_i^(1) ⊗ I + I ⊗ S_i^(2)` and `S^2` for two entities.
#[derive(Clone, Debug)]
pub struct CompositeSpinSystem {
    first: SpinSystem,
    second: SpinSystem,
    components: [ComplexMatrix; 3],
    s_squared: ComplexMatrix,
}

/// `S_n^(1) ⊗ I`, `(S^(1))^2 ⊗ I`, `I ⊗ S_n^(2)`, `I ⊗ (S^(2))^2`.
#[derive(Clone, Debug)]
pub struct OneEntityOps {
    pub first_along: ComplexMatrix,
    pub first_squared: ComplexMatrix,
    pub second_along: ComplexMatrix,
    pub second_squared: ComplexMatrix,
}

impl OneEntityOps {
    pub fn as_array(&self) -> [&ComplexMatrix; 4] {
        [&self.first_along, &self.first_squared, &self.second_along, &self.second_squared]
    }
}

pub fn build_composite(s1: Spin, s2: Spin) -> CompositeSpinSystem {
    let first = SpinSystem::new(s1);
    let second = SpinSystem::new(s2);
    let i1 = ComplexMatrix::identity(first.dim());
    let i2 = ComplexMatrix::identity(second.dim());
    let components = [0, 1, 2].map(|i| &kron(first.component(i), &i2) + &kron(&i1, second.component(i)));
    let mut s_squared = ComplexMatrix::zeros(first.dim() * second.dim());
    for c in &components {
        s_squared = &s_squared + &(c * c);
    }
    CompositeSpinSystem {
        first,
        second,
        components,
        s_squared,
    }
}

impl CompositeSpinSystem {
    pub fn new(s1: Spin, s2: Spin) -> Self {
        build_composite(s1, s2)
    }

    pub fn spins(&self) -> (Spin, Spin) {
        (self.first.spin(), self.second.spin())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.first.dim(), self.second.dim())
    }

    pub fn dim(&self) -> usize {
        self.first.dim() * self.second.dim()
    }

    pub fn entities(&self) -> (&SpinSystem, &SpinSystem) {
        (&self.first, &self.second)
    }

    pub fn component(&self, i: usize) -> &ComplexMatrix {
        &self.components[i]
    }

    pub fn components(&self) -> &[ComplexMatrix; 3] {
        &self.components
    }

    pub fn s_squared(&self) -> &ComplexMatrix {
        &self.s_squared
    }

    /// Total `S_n`.
    pub fn along(&self, n: &Direction3) -> ComplexMatrix {
        directional(&self.components, n)
    }

    pub fn one_entity_ops(&self, n: &Direction3) -> OneEntityOps {
        let i1 = ComplexMatrix::identity(self.first.dim());
        let i2 = ComplexMatrix::identity(self.second.dim());
        OneEntityOps {
            first_along: kron(&self.first.along(n), &i2),
            first_squared: kron(self.first.s_squared(), &i2),
            second_along: kron(&i1, &self.second.along(n)),
            second_squared: kron(&i1, self.second.s_squared()),
        }
    }

    /// `N1 N2 (N1^2 + N2^2 - 2) / 12`, the value of each `Tr S_i^2`.
    pub fn component_trace_sq(&self) -> f64 {
        let (a, b) = self.dims();
        let (a, b) = (a as f64, b as f64);
        a * b * (a * a + b * b - 2.0) / 12.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoupledEntry {
    pub s: f64,
    pub mu_s: f64,
    pub state: PureState,
}

/// Simultaneous eigenbasis of `S^2` and `S_n`, sorted by `(s, μ_s)`.
#[derive(Clone, Debug, Serialize)]
pub struct CoupledBasis {
    pub direction: Direction3,
    pub entries: Vec<CoupledEntry>,
}

pub fn coupled_basis(c: &CompositeSpinSystem, n: &Direction3) -> Result<CoupledBasis> {
    let dim = c.dim();
    let s_n = c.along(n);
    let squared = eigh(c.s_squared())?;
    let mut entries = Vec::with_capacity(dim);
    for block in squared.degenerate_blocks() {
        let lambda = squared.eigenvalues[block.start..block.end].iter().sum::<f64>() / block.len() as f64;
        let s = round_half(((1.0 + 4.0 * lambda).max(0.0).sqrt() - 1.0) / 2.0);
        let q: Vec<Vec<Complex64>> = block.clone().map(|k| squared.eigenvector(k)).collect();
        // S_n restricted to the eigenspace: Q† S_n Q
        let restricted = ComplexMatrix::from_fn(q.len(), |a, b| s_n.sandwich(&q[a], &q[b])).hermitian_part();
        let inner = eigh(&restricted)?;
        for k in 0..q.len() {
            let u = inner.eigenvector(k);
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            for (coef, col) in u.iter().zip(&q) {
                for (x, y) in v.iter_mut().zip(col) {
                    *x += coef * y;
                }
            }
            entries.push(CoupledEntry {
                s,
                mu_s: round_half(inner.eigenvalues[k]),
                state: PureState::new(v)?,
            });
        }
    }
    entries.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.mu_s.total_cmp(&b.mu_s)));
    Ok(CoupledBasis { direction: *n, entries })
}

impl CoupledBasis {
    /// Columns are the basis states.
    pub fn matrix(&self) -> ComplexMatrix {
        basis_matrix(self.entries.iter().map(|e| &e.state))
    }

    /// Simplex of the total `S_n` measurement; `μ_s` levels shared across
    /// different `s` form degenerate groups.
    pub fn simplex(&self, g: &GeneratorSet) -> Result<MeasurementSimplex> {
        let states = self.entries.iter().map(|e| e.state.clone()).collect();
        let values = self.entries.iter().map(|e| e.mu_s).collect();
        Ok(MeasurementSimplex::from_eigenstates(states, values, g)?.with_axis(self.direction))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductEntry {
    pub mu1: f64,
    pub mu2: f64,
    pub state: PureState,
}

/// `|n, μ1> ⊗ |n, μ2>`, ordered like the canonical product basis
/// (`μ1` descending, then `μ2` descending).
#[derive(Clone, Debug, Serialize)]
pub struct ProductBasis {
    pub direction: Direction3,
    pub entries: Vec<ProductEntry>,
}

pub fn product_basis(c: &CompositeSpinSystem, n: &Direction3) -> Result<ProductBasis> {
    let (first, second) = c.entities();
    let a = spin_along(first, n)?;
    let b = spin_along(second, n)?;
    let mut entries = Vec::with_capacity(c.dim());
    for (mu1, e1) in a.projections().into_iter().zip(&a.eigenstates).rev() {
        for (mu2, e2) in b.projections().into_iter().zip(&b.eigenstates).rev() {
            entries.push(ProductEntry {
                mu1,
                mu2,
                state: PureState::new(kron_vec(e1.amplitudes(), e2.amplitudes()))?,
            });
        }
    }
    Ok(ProductBasis { direction: *n, entries })
}

impl ProductBasis {
    pub fn matrix(&self) -> ComplexMatrix {
        basis_matrix(self.entries.iter().map(|e| &e.state))
    }

    /// Simplex of total `S_n` with eigenvalues `μ1 + μ2`.
    pub fn simplex(&self, g: &GeneratorSet) -> Result<MeasurementSimplex> {
        let states = self.entries.iter().map(|e| e.state.clone()).collect();
        let values = self.entries.iter().map(|e| e.mu1 + e.mu2).collect();
        Ok(MeasurementSimplex::from_eigenstates(states, values, g)?.with_axis(self.direction))
    }
}

fn basis_matrix<'a>(states: impl Iterator<Item = &'a PureState>) -> ComplexMatrix {
    let columns: Vec<Vec<Complex64>> = states.map(|s| s.amplitudes().to_vec()).collect();
    ComplexMatrix::from_columns(&columns).expect("basis has one column per dimension")
}

/// Largest `|A v - λ v|` over the pairs given.
pub fn eigen_residual(a: &ComplexMatrix, v: &[Complex64], lambda: f64) -> Result<f64> {
    if a.dim() != v.len() {
        return Err(BlochError::DimensionMismatch { expected: a.dim(), found: v.len() });
    }
    Ok(a.apply(v)
        .iter()
        .zip(v)
        .map(|(av, x)| (av - x * lambda).norm())
        .fold(0.0, f64::max))
}

/// Whether `v` is an eigenvector of `a`, with its Rayleigh quotient.
pub fn is_eigenvector(a: &ComplexMatrix, v: &[Complex64]) -> (bool, f64) {
    let lambda = a.sandwich(v, v).re;
    let residual = eigen_residual(a, v, lambda).unwrap_or(f64::INFINITY);
    (residual <= DEGENERACY_TOL, lambda)
}
