//! Generators of SU(N) in the `{U_jk, V_jk, W_l}` construction.
//!
//! Order is fixed: every `U_jk` for `j < k` in lexicographic order, then
//! every `V_jk` in the same order, then `W_1 .. W_{N-1}`. For N = 2 with the
//! canonical basis this reproduces the Pauli matrices, for N = 3 the
//! Gell-Mann matrices up to ordering.

use num_complex::Complex64;

use crate::error::{BlochError, Result};
use crate::linalg::{trace, trace_product, ComplexMatrix, I, ONE};

const UNITARY_TOL: f64 = 1e-10;

/// The `N^2 - 1` traceless Hermitian generators with `Tr Λ_i Λ_j = 2 δ_ij`.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<ComplexMatrix>,
    basis: ComplexMatrix,
    c_n: f64,
}

impl GeneratorSet {
    /// Generators over the canonical basis.
    pub fn new(n: usize) -> Result<Self> {
        build_generators(n, None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn get(&self, i: usize) -> &ComplexMatrix {
        &self.generators[i]
    }

    /// Columns are the basis kets `|b_1> .. |b_N>`.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// `c_N = sqrt(N (N - 1) / 2)`.
    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    /// Human-readable label of generator `i`, one-based like `U_12`, `W_1`.
    pub fn label(&self, i: usize) -> String {
        let n = self.dim;
        let pairs = n * (n - 1) / 2;
        if i < 2 * pairs {
            let (j, k) = pair_at(n, i % pairs);
            let family = if i < pairs { "U" } else { "V" };
            format!("{family}_{}{}", j + 1, k + 1)
        } else {
            format!("W_{}", i - 2 * pairs + 1)
        }
    }

    /// `identity_coeff * I + Σ coeffs_i Λ_i`
    pub fn combine(&self, identity_coeff: Complex64, coeffs: &[Complex64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.len() {
            return Err(BlochError::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut out = ComplexMatrix::identity(self.dim).scale(identity_coeff);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            out.add_scaled(*c, g);
        }
        Ok(out)
    }

    /// Real-coefficient variant of [`combine`](Self::combine).
    pub fn combine_real(&self, identity_coeff: f64, coeffs: &[f64]) -> Result<ComplexMatrix> {
        let coeffs: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.combine(Complex64::new(identity_coeff, 0.0), &coeffs)
    }
}

/// The `idx`-th pair `(j, k)`, `j < k`, in lexicographic order.
fn pair_at(n: usize, idx: usize) -> (usize, usize) {
    let mut remaining = idx;
    for j in 0..n {
        let row = n - j - 1;
        if remaining < row {
            return (j, j + 1 + remaining);
        }
        remaining -= row;
    }
    unreachable!("pair index {idx} out of range for N = {n}")
}

/// Builds the ordered generator list over `basis` (canonical when `None`).
pub fn build_generators(n: usize, basis: Option<&ComplexMatrix>) -> Result<GeneratorSet> {
    if n < 2 {
        return Err(BlochError::DimensionTooSmall { min: 2, found: n });
    }
    let basis = match basis {
        Some(b) => {
            if b.dim() != n {
                return Err(BlochError::DimensionMismatch {
                    expected: n,
                    found: b.dim(),
                });
            }
            let residual = b.unitarity_residual();
            if residual > UNITARY_TOL {
                return Err(BlochError::NotUnitary { residual });
            }
            b.clone()
        }
        None => ComplexMatrix::identity(n),
    };
    let kets: Vec<Vec<Complex64>> = (0..n).map(|j| basis.column(j)).collect();
    let ketbra = |j: usize, k: usize| ComplexMatrix::outer(&kets[j], &kets[k]);

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .collect();
    let mut generators = Vec::with_capacity(n * n - 1);
    for &(j, k) in &pairs {
        generators.push(&ketbra(j, k) + &ketbra(k, j));
    }
    for &(j, k) in &pairs {
        generators.push((&ketbra(j, k) - &ketbra(k, j)).scale(-I));
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut w = ComplexMatrix::zeros(n);
        for j in 0..l {
            w.add_scaled(ONE, &ketbra(j, j));
        }
        w.add_scaled(Complex64::new(-(l as f64), 0.0), &ketbra(l, l));
        generators.push(w.scale_real(norm));
    }

    Ok(GeneratorSet {
        dim: n,
        generators,
        basis,
        c_n: (n as f64 * (n as f64 - 1.0) / 2.0).sqrt(),
    })
}

/// Expansion coefficients of `a` on `{I, Λ_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    /// `Tr(a) / N`
    pub identity_coeff: Complex64,
    /// `Tr(a Λ_i) / 2`
    pub coeffs: Vec<Complex64>,
}

pub fn expand_on_generators(a: &ComplexMatrix, g: &GeneratorSet) -> Result<Expansion> {
    if a.dim() != g.dim() {
        return Err(BlochError::DimensionMismatch {
            expected: g.dim(),
            found: a.dim(),
        });
    }
    let coeffs = g
        .generators()
        .iter()
        .map(|l| trace_product(a, l).map(|t| t * 0.5))
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion {
        identity_coeff: trace(a) / g.dim() as f64,
        coeffs,
    })
}
