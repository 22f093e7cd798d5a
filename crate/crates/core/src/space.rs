//! Bloch-ball representatives of spatial directions.
//!
//! For a direction `n` the vector `v(n) = d Σ_k μ_k n_k` sums the Bloch
//! vectors `n_k` of the `S_n` eigenstates weighted by their eigenvalues. The
//! constant `d` makes `v` a unit vector, and then `v(n)·v(n') = n·n'`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{bloch_to_operator, is_state, state_to_bloch, BlochVector};
use crate::composite::{coupled_basis, product_basis, CompositeSpinSystem};
use crate::error::{BlochError, Result};
use crate::generators::GeneratorSet;
use crate::linalg::{self, trace_product, ComplexMatrix};
use crate::measurement::MeasurementSimplex;
use crate::random::{random_direction, stream_rng};
use crate::spin::{spin_along, Direction3, Spin, SpinSystem};

pub const ISOMORPHISM_TOL: f64 = 1e-9;
pub const IDENTITY_TOL: f64 = 1e-10;

/// `d_N = (1/N) sqrt(12 / (N + 1))`
pub fn single_scale(n: usize) -> f64 {
    let n = n as f64;
    (12.0 / (n + 1.0)).sqrt() / n
}

/// `d_{N1,N2} = sqrt(12 (N - 1) / (N N1 N2 (N1^2 + N2^2 - 2)))` with `N = N1 N2`.
pub fn composite_scale(n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a * b;
    (12.0 * (n - 1.0) / (n * a * b * (a * a + b * b - 2.0))).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositeBasisKind {
    Coupled,
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSource {
    Single { s: Spin },
    CompositeCoupled { s1: Spin, s2: Spin },
    CompositeProduct { s1: Spin, s2: Spin },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceVector {
    pub vector: BlochVector,
    pub scale_constant: f64,
    pub source: SpaceSource,
    pub direction: Direction3,
}

impl SpaceVector {
    pub fn dim_n(&self) -> usize {
        self.vector.dim_n()
    }

    pub fn coords(&self) -> &[f64] {
        self.vector.coords()
    }

    pub fn dot(&self, other: &SpaceVector) -> f64 {
        self.vector.dot(&other.vector)
    }

    /// `N d / (N - 1)`: the eigenstate vertex of eigenvalue `μ` projects onto `v` at this times `μ`.
    pub fn projection_factor(&self) -> f64 {
        let n = self.dim_n() as f64;
        n * self.scale_constant / (n - 1.0)
    }
}

/// `d Σ_k μ_k n_k`
fn weighted_sum(n: usize, d: f64, vertices: &[BlochVector], weights: &[f64]) -> Result<BlochVector> {
    let mut coords = vec![0.0; n * n - 1];
    for (v, mu) in vertices.iter().zip(weights) {
        for (c, x) in coords.iter_mut().zip(v.coords()) {
            *c += d * mu * x;
        }
    }
    BlochVector::new(n, coords)
}

fn check_generators(g: &GeneratorSet, n: usize) -> Result<()> {
    if g.dim() == n {
        Ok(())
    } else {
        Err(BlochError::DimensionMismatch { expected: n, found: g.dim() })
    }
}

pub fn space_vector_single(sys: &SpinSystem, n: &Direction3, g: &GeneratorSet) -> Result<SpaceVector> {
    check_generators(g, sys.dim())?;
    let obs = spin_along(sys, n)?;
    let vertices = obs
        .projectors()
        .iter()
        .map(|p| state_to_bloch(p, g))
        .collect::<Result<Vec<_>>>()?;
    let d = single_scale(sys.dim());
    Ok(SpaceVector {
        vector: weighted_sum(sys.dim(), d, &vertices, &obs.projections())?,
        scale_constant: d,
        source: SpaceSource::Single { s: sys.spin() },
        direction: *n,
    })
}

pub fn space_vector_composite(
    c: &CompositeSpinSystem,
    n: &Direction3,
    basis: CompositeBasisKind,
    g: &GeneratorSet,
) -> Result<SpaceVector> {
    check_generators(g, c.dim())?;
    let (s1, s2) = c.spins();
    let (states, weights, source): (Vec<_>, Vec<f64>, _) = match basis {
        CompositeBasisKind::Coupled => {
            let b = coupled_basis(c, n)?;
            (
                b.entries.iter().map(|e| e.state.projector()).collect(),
                b.entries.iter().map(|e| e.mu_s).collect(),
                SpaceSource::CompositeCoupled { s1, s2 },
            )
        }
        CompositeBasisKind::Product => {
            let b = product_basis(c, n)?;
            (
                b.entries.iter().map(|e| e.state.projector()).collect(),
                b.entries.iter().map(|e| e.mu1 + e.mu2).collect(),
                SpaceSource::CompositeProduct { s1, s2 },
            )
        }
    };
    let vertices = states.iter().map(|p| state_to_bloch(p, g)).collect::<Result<Vec<_>>>()?;
    let (n1, n2) = c.dims();
    let d = composite_scale(n1, n2);
    Ok(SpaceVector {
        vector: weighted_sum(c.dim(), d, &vertices, &weights)?,
        scale_constant: d,
        source,
        direction: *n,
    })
}

/// Everything needed to map directions to space vectors for one system.
#[derive(Clone, Debug)]
pub enum SpaceVectorBuilder {
    Single { system: SpinSystem, generators: GeneratorSet },
    Composite { system: CompositeSpinSystem, basis: CompositeBasisKind, generators: GeneratorSet },
}

impl SpaceVectorBuilder {
    pub fn single(s: Spin) -> Result<Self> {
        Ok(Self::Single {
            system: SpinSystem::new(s),
            generators: GeneratorSet::new(s.dim())?,
        })
    }

    pub fn composite(s1: Spin, s2: Spin, basis: CompositeBasisKind) -> Result<Self> {
        let system = CompositeSpinSystem::new(s1, s2);
        let generators = GeneratorSet::new(system.dim())?;
        Ok(Self::Composite { system, basis, generators })
    }

    pub fn generators(&self) -> &GeneratorSet {
        match self {
            Self::Single { generators, .. } | Self::Composite { generators, .. } => generators,
        }
    }

    pub fn build(&self, n: &Direction3) -> Result<SpaceVector> {
        match self {
            Self::Single { system, generators } => space_vector_single(system, n, generators),
            Self::Composite { system, basis, generators } => space_vector_composite(system, n, *basis, generators),
        }
    }

    /// `S_n` for the same system.
    pub fn observable(&self, n: &Direction3) -> ComplexMatrix {
        match self {
            Self::Single { system, .. } => system.along(n),
            Self::Composite { system, .. } => system.along(n),
        }
    }
}

/// `|v(n)·v(n') - n·n'|`
pub fn verify_isomorphism(builder: &SpaceVectorBuilder, n: &Direction3, n_prime: &Direction3) -> Result<f64> {
    let v = builder.build(n)?;
    let w = builder.build(n_prime)?;
    Ok((v.dot(&w) - n.dot(n_prime)).abs())
}

/// `v·n_k` for each simplex vertex; the simplex must come from `S_n` along `v`'s direction.
pub fn eigenstate_projections(v: &SpaceVector, simplex: &MeasurementSimplex) -> Result<Vec<f64>> {
    if simplex.dim_n() != v.dim_n() {
        return Err(BlochError::DimensionMismatch { expected: v.dim_n(), found: simplex.dim_n() });
    }
    match simplex.axis() {
        Some(axis) if (axis.dot(&v.direction) - 1.0).abs() <= 1e-12 => {}
        _ => return Err(BlochError::MismatchedObservable),
    }
    Ok(simplex.vertices().iter().map(|n| v.vector.dot(n)).collect())
}

/// `(1/N)(1 - sqrt(3 (N-1)^2 / (N+1)))`
pub fn extremal_overlap_closed_form(n: usize) -> f64 {
    let n = n as f64;
    (1.0 - (3.0 * (n - 1.0).powi(2) / (n + 1.0)).sqrt()) / n
}

/// `Tr P(v) P(n_{-s})` computed on matrices, where `n_{-s}` is the vertex of
/// lowest eigenvalue.
pub fn v_overlap_with_extremal(v: &SpaceVector, simplex: &MeasurementSimplex, g: &GeneratorSet) -> Result<f64> {
    if !matches!(v.source, SpaceSource::Single { .. }) {
        return Err(BlochError::InvalidArgument("extremal overlap needs a single-entity vector".into()));
    }
    let lowest = simplex
        .eigenvalues()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(BlochError::MismatchedObservable)?;
    let pv = bloch_to_operator(&v.vector, g)?;
    let pe = simplex.eigenstates()[lowest].projector();
    Ok(trace_product(&pv, pe.matrix())?.re)
}

/// `(c_N / (N d)) Σ v_i Λ_i`, which reproduces `S_n`.
pub fn operator_from_space_vector(v: &SpaceVector, g: &GeneratorSet) -> Result<ComplexMatrix> {
    let n = g.dim() as f64;
    let factor = g.c_n() / (n * v.scale_constant);
    let coeffs: Vec<f64> = v.coords().iter().map(|x| factor * x).collect();
    g.combine_real(0.0, &coeffs)
}

/// Summary of `trials` seeded random direction pairs.
#[derive(Clone, Debug, Serialize)]
pub struct IsomorphismSweep {
    pub trials: usize,
    pub seed: u64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
}

/// Pair `k` draws its two directions from stream `k` of `seed`.
pub fn isomorphism_sweep(builder: &SpaceVectorBuilder, trials: usize, seed: u64) -> Result<IsomorphismSweep> {
    let deviations = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let a = random_direction(&mut rng);
            let b = random_direction(&mut rng);
            verify_isomorphism(builder, &a, &b)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IsomorphismSweep {
        trials,
        seed,
        max_deviation: deviations.iter().cloned().fold(0.0, f64::max),
        mean_deviation: if trials == 0 { 0.0 } else { deviations.iter().sum::<f64>() / trials as f64 },
    })
}

/// `v(x1), v(x2), v(x3)` and their Gram matrix, which should be the identity.
#[derive(Clone, Debug, Serialize)]
pub struct Triad {
    pub vectors: Vec<SpaceVector>,
    pub gram: [[f64; 3]; 3],
    pub max_gram_deviation: f64,
}

pub fn space_triad(builder: &SpaceVectorBuilder) -> Result<Triad> {
    let vectors = [Direction3::X1, Direction3::X2, Direction3::X3]
        .iter()
        .map(|n| builder.build(n))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = [[0.0; 3]; 3];
    let mut max_gram_deviation = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = vectors[i].dot(&vectors[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            max_gram_deviation = max_gram_deviation.max((gram[i][j] - expected).abs());
        }
    }
    Ok(Triad { vectors, gram, max_gram_deviation })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Proposition {
    #[serde(rename = "1")]
    Single,
    #[serde(rename = "2")]
    Coupled,
    #[serde(rename = "2bis")]
    Product,
}

impl std::str::FromStr for Proposition {
    type Err = BlochError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Self::Single),
            "2" => Ok(Self::Coupled),
            "2bis" => Ok(Self::Product),
            other => Err(BlochError::InvalidArgument(format!("unknown proposition {other:?}, expected 1, 2 or 2bis"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            deviation: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: ok,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub prop: Proposition,
    pub source: SpaceSource,
    pub trials: usize,
    pub seed: u64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub triad: Triad,
    pub pass: bool,
}

/// Which system a verification runs on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VerifyTarget {
    Single(Spin),
    Composite(Spin, Spin),
}

/// Runs the isomorphism sweep and the closed-form checks for one proposition.
pub fn verify_proposition(prop: Proposition, target: VerifyTarget, trials: usize, seed: u64) -> Result<VerifyReport> {
    let builder = match (prop, target) {
        (Proposition::Single, VerifyTarget::Single(s)) => SpaceVectorBuilder::single(s)?,
        (Proposition::Coupled, VerifyTarget::Composite(a, b)) => SpaceVectorBuilder::composite(a, b, CompositeBasisKind::Coupled)?,
        (Proposition::Product, VerifyTarget::Composite(a, b)) => SpaceVectorBuilder::composite(a, b, CompositeBasisKind::Product)?,
        (Proposition::Single, _) => return Err(BlochError::InvalidArgument("proposition 1 needs --s".into())),
        _ => return Err(BlochError::InvalidArgument("propositions 2 and 2bis need --s1 and --s2".into())),
    };
    let sweep = isomorphism_sweep(&builder, trials, seed)?;
    let g = builder.generators();
    let n = Direction3::X3;
    let v = builder.build(&n)?;
    let mut checks = vec![
        Check::new("isomorphism", sweep.max_deviation, ISOMORPHISM_TOL),
        Check::new("unit_norm", (v.vector.norm() - 1.0).abs(), IDENTITY_TOL),
    ];
    let op_residual = operator_from_space_vector(&v, g)?.max_abs_diff(&builder.observable(&n));
    checks.push(Check::new("expansion", op_residual, IDENTITY_TOL));

    match &builder {
        SpaceVectorBuilder::Single { system, generators } => {
            let simplex = crate::measurement::simplex_from_observable(&spin_along(system, &n)?, generators)?;
            let proj = eigenstate_projections(&v, &simplex)?;
            let spacing = single_scale(system.dim()) * system.dim() as f64 / (system.dim() as f64 - 1.0);
            let spacing_dev = proj
                .iter()
                .zip(simplex.eigenvalues())
                .map(|(p, mu)| (p - spacing * mu).abs())
                .fold(0.0, f64::max);
            checks.push(Check::new("projection_spacing", spacing_dev, IDENTITY_TOL));
            let overlap = v_overlap_with_extremal(&v, &simplex, generators)?;
            checks.push(Check::new(
                "extremal_overlap",
                (overlap - extremal_overlap_closed_form(system.dim())).abs(),
                IDENTITY_TOL,
            ));
            let state = is_state(&v.vector, generators)?.is_state;
            checks.push(Check::flag("state_only_for_qubit", state == (system.dim() == 2)));
        }
        SpaceVectorBuilder::Composite { system, basis, generators } => {
            let other_kind = match basis {
                CompositeBasisKind::Coupled => CompositeBasisKind::Product,
                CompositeBasisKind::Product => CompositeBasisKind::Coupled,
            };
            let w = space_vector_composite(system, &n, other_kind, generators)?;
            checks.push(Check::new("coupled_equals_product", v.vector.distance(&w.vector), IDENTITY_TOL));
            let simplex = match basis {
                CompositeBasisKind::Coupled => coupled_basis(system, &n)?.simplex(generators)?,
                CompositeBasisKind::Product => product_basis(system, &n)?.simplex(generators)?,
            };
            let proj = eigenstate_projections(&v, &simplex)?;
            let factor = v.projection_factor();
            let spacing_dev = proj
                .iter()
                .zip(simplex.eigenvalues())
                .map(|(p, mu)| (p - factor * mu).abs())
                .fold(0.0, f64::max);
            checks.push(Check::new("projection_spacing", spacing_dev, IDENTITY_TOL));
        }
    }

    let triad = space_triad(&builder)?;
    checks.push(Check::new("triad_orthonormal", triad.max_gram_deviation, ISOMORPHISM_TOL));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        prop,
        source: v.source,
        trials,
        seed,
        max_deviation: sweep.max_deviation,
        mean_deviation: sweep.mean_deviation,
        tolerance: ISOMORPHISM_TOL,
        checks,
        triad,
        pass,
    })
}

/// Euclidean distance helper for raw coordinate slices.
pub fn coord_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    linalg::norm(&diff)
}
