//! Seeded random inputs: density matrices, Hermitian matrices, directions.
//!
//! Streams are ChaCha8 keyed by a 64-bit seed, with the stream id selecting
//! an independent sequence per trial or sample index.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bloch::{DensityState, PureState};
use crate::linalg::{trace, ComplexMatrix};
use crate::spin::Direction3;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng))
}

/// `G†G / Tr(G†G)` with `G` complex Gaussian.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityState {
    let g = gaussian_matrix(n, rng);
    let gg = &g.dagger() * &g;
    let tr = trace(&gg).re;
    DensityState::from_trusted(gg.scale_real(1.0 / tr).hermitian_part())
}

/// Haar-distributed pure state (normalized complex Gaussian vector).
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::new(v).expect("Gaussian vector is almost surely nonzero")
}

/// `(G + G†) / 2`
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    gaussian_matrix(n, rng).hermitian_part()
}

/// Uniform on the 2-sphere via a normalized 3-d Gaussian.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction3 {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        if let Ok((d, norm)) = Direction3::normalize(v) {
            if norm > 1e-8 {
                return d;
            }
        }
    }
}
