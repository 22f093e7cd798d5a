//! Measurements as simplices of eigenstate Bloch vectors, and the
//! hidden-measurement process that realizes the Born rule on them.
//!
//! A run has three phases:
//! 1. the state moves on a straight line from `r` to its orthogonal
//!    projection `n∥` on the simplex,
//! 2. a point `λ` is drawn uniformly on the simplex; the sub-simplex
//!    `A_i = hull({n∥} ∪ {n_j : j ≠ i})` containing it selects outcome `i`,
//! 3. for a degenerate outcome the state is carried to the Lüders state
//!    `P_G ψ P_G / Tr(P_G ψ)`, back on the surface of the ball when ψ is pure.
//!
//! In barycentric coordinates `λ ∈ A_i` exactly when `i` minimizes
//! `λ_j / w_j`, so the sampler never builds the sub-simplices explicitly.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{state_to_bloch, BlochVector, DensityState, PureState};
use crate::error::{BlochError, Result};
use crate::generators::GeneratorSet;
use crate::linalg::{self, group_sorted, inner, trace, trace_product, ComplexMatrix, DEGENERACY_TOL};
use crate::random::stream_rng;
use crate::spin::{Direction3, SpinObservable};
use rand::RngCore;

const ORTHONORMAL_TOL: f64 = 1e-9;
const WEIGHT_CLAMP: f64 = -1e-10;
const MIN_GROUP_PROBABILITY: f64 = 1e-12;

/// The `(N-1)`-simplex spanned by the Bloch vectors of an observable's
/// eigenstates.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurementSimplex {
    #[serde(rename = "n")]
    dim_n: usize,
    vertices: Vec<BlochVector>,
    eigenvalues: Vec<f64>,
    #[serde(skip)]
    eigenstates: Vec<PureState>,
    degeneracy_groups: Vec<Vec<usize>>,
    #[serde(skip)]
    axis: Option<Direction3>,
}

impl MeasurementSimplex {
    /// Requires an orthonormal eigenstate family; degenerate groups collect
    /// eigenvalues equal within 1e-9 and are ordered by ascending eigenvalue.
    pub fn from_eigenstates(eigenstates: Vec<PureState>, eigenvalues: Vec<f64>, g: &GeneratorSet) -> Result<Self> {
        let n = g.dim();
        if eigenstates.len() != n || eigenvalues.len() != n {
            return Err(BlochError::DimensionMismatch {
                expected: n,
                found: eigenstates.len().min(eigenvalues.len()),
            });
        }
        if let Some(bad) = eigenstates.iter().find(|e| e.dim() != n) {
            return Err(BlochError::DimensionMismatch { expected: n, found: bad.dim() });
        }
        let mut residual = 0.0_f64;
        for (i, a) in eigenstates.iter().enumerate() {
            for (j, b) in eigenstates.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((inner(a.amplitudes(), b.amplitudes()) - expected).norm());
            }
        }
        if residual > ORTHONORMAL_TOL {
            return Err(BlochError::NotOrthonormal { residual });
        }
        let vertices = eigenstates
            .iter()
            .map(|e| state_to_bloch(&e.projector(), g))
            .collect::<Result<Vec<_>>>()?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
        let degeneracy_groups = group_sorted(&sorted, DEGENERACY_TOL)
            .into_iter()
            .map(|range| {
                let mut members: Vec<usize> = order[range].to_vec();
                members.sort_unstable();
                members
            })
            .collect();

        Ok(Self {
            dim_n: n,
            vertices,
            eigenvalues,
            eigenstates,
            degeneracy_groups,
            axis: None,
        })
    }

    /// Tags the simplex with the spatial direction of the observable it came from.
    pub fn with_axis(mut self, axis: Direction3) -> Self {
        self.axis = Some(axis);
        self
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn vertices(&self) -> &[BlochVector] {
        &self.vertices
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenstates(&self) -> &[PureState] {
        &self.eigenstates
    }

    pub fn degeneracy_groups(&self) -> &[Vec<usize>] {
        &self.degeneracy_groups
    }

    pub fn axis(&self) -> Option<Direction3> {
        self.axis
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy_groups.len() < self.dim_n
    }

    /// Group index containing `vertex`.
    pub fn group_of(&self, vertex: usize) -> usize {
        self.degeneracy_groups
            .iter()
            .position(|g| g.contains(&vertex))
            .expect("every vertex belongs to a group")
    }

    /// Mean eigenvalue of each group.
    pub fn group_eigenvalues(&self) -> Vec<f64> {
        self.degeneracy_groups
            .iter()
            .map(|g| g.iter().map(|&i| self.eigenvalues[i]).sum::<f64>() / g.len() as f64)
            .collect()
    }

    /// `P_G = Σ_{i ∈ G} |a_i><a_i|`
    pub fn group_projector(&self, group: &[usize]) -> Result<ComplexMatrix> {
        let mut p = ComplexMatrix::zeros(self.dim_n);
        for &i in group {
            let e = self.eigenstates.get(i).ok_or_else(|| {
                BlochError::InvalidArgument(format!("vertex {i} out of range"))
            })?;
            p.add_scaled(linalg::ONE, e.projector().matrix());
        }
        Ok(p)
    }

    pub fn edge_length(&self, i: usize, j: usize) -> f64 {
        self.vertices[i].distance(&self.vertices[j])
    }

    /// `(N-1)`-dimensional volume from the Gram determinant of the edges at vertex 0.
    pub fn volume(&self) -> f64 {
        let k = self.dim_n - 1;
        let edges: Vec<Vec<f64>> = self.vertices[1..]
            .iter()
            .map(|v| v.coords().iter().zip(self.vertices[0].coords()).map(|(a, b)| a - b).collect())
            .collect();
        let gram: Vec<Vec<f64>> = edges
            .iter()
            .map(|a| edges.iter().map(|b| linalg::dot(a, b)).collect())
            .collect();
        let factorial: f64 = (1..=k).map(|x| x as f64).product();
        linalg::real_determinant(gram).max(0.0).sqrt() / factorial
    }
}

pub fn simplex_from_observable(obs: &SpinObservable, g: &GeneratorSet) -> Result<MeasurementSimplex> {
    Ok(MeasurementSimplex::from_eigenstates(obs.eigenstates.clone(), obs.eigenvalues.clone(), g)?
        .with_axis(obs.direction))
}

/// Orthogonal projection of a Bloch vector onto the simplex, with its
/// barycentric weights.
#[derive(Clone, Debug, Serialize)]
pub struct OnSimplexState {
    pub parallel: BlochVector,
    pub weights: Vec<f64>,
    pub perp_norm: f64,
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(BlochError::DimensionMismatch { expected, found })
    }
}

/// `w_i = (1 + (N-1) r·n_i) / N`, `n∥ = Σ w_i n_i`.
pub fn project_onto_simplex(r: &BlochVector, m: &MeasurementSimplex) -> Result<OnSimplexState> {
    check_dims(m.dim_n, r.dim_n())?;
    let n = m.dim_n as f64;
    let weights: Vec<f64> = m
        .vertices
        .iter()
        .map(|v| (1.0 + (n - 1.0) * r.dot(v)) / n)
        .collect();
    let mut coords = vec![0.0; r.coords().len()];
    for (w, v) in weights.iter().zip(&m.vertices) {
        for (c, x) in coords.iter_mut().zip(v.coords()) {
            *c += w * x;
        }
    }
    let perp_norm = coords
        .iter()
        .zip(r.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let parallel = BlochVector::new(m.dim_n, coords)?;
    Ok(OnSimplexState {
        parallel,
        weights,
        perp_norm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BornProbabilities {
    /// Per simplex vertex.
    pub vertex: Vec<f64>,
    /// Per degeneracy group (summed over members).
    pub group: Vec<f64>,
}

impl BornProbabilities {
    fn from_vertex(vertex: Vec<f64>, m: &MeasurementSimplex) -> Self {
        let group = m
            .degeneracy_groups
            .iter()
            .map(|g| g.iter().map(|&i| vertex[i]).sum())
            .collect();
        Self { vertex, group }
    }
}

/// Born probabilities as barycentric weights of the projected state.
pub fn born_probabilities(psi: &DensityState, m: &MeasurementSimplex, g: &GeneratorSet) -> Result<BornProbabilities> {
    check_dims(m.dim_n, psi.dim())?;
    let r = state_to_bloch(psi, g)?;
    let on = project_onto_simplex(&r, m)?;
    Ok(BornProbabilities::from_vertex(on.weights, m))
}

/// `Tr(ψ P_{a_i})` computed on matrices.
pub fn trace_probabilities(psi: &DensityState, m: &MeasurementSimplex) -> Result<BornProbabilities> {
    check_dims(m.dim_n, psi.dim())?;
    let vertex = m
        .eigenstates
        .iter()
        .map(|e| Ok(m_sandwich(psi.matrix(), e)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(BornProbabilities::from_vertex(vertex, m))
}

fn m_sandwich(rho: &ComplexMatrix, e: &PureState) -> f64 {
    rho.sandwich(e.amplitudes(), e.amplitudes()).re
}

/// `(1 + (N-1) |r| cos θ_i) / N` with `θ_i` the angle between `r` and `n_i`.
pub fn cosine_probabilities(psi: &DensityState, m: &MeasurementSimplex, g: &GeneratorSet) -> Result<BornProbabilities> {
    check_dims(m.dim_n, psi.dim())?;
    let r = state_to_bloch(psi, g)?;
    let n = m.dim_n as f64;
    let len = r.norm();
    let vertex = m
        .vertices
        .iter()
        .map(|v| {
            let cos = if len == 0.0 { 0.0 } else { r.dot(v) / (len * v.norm()) };
            (1.0 + (n - 1.0) * len * cos) / n
        })
        .collect();
    Ok(BornProbabilities::from_vertex(vertex, m))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub tau: f64,
    pub point: BlochVector,
}

/// `r(τ) = (1 - τ) r + τ n∥` at `steps` uniform values of `τ ∈ [0, 1]`.
pub fn approach_trajectory(r: &BlochVector, m: &MeasurementSimplex, steps: usize) -> Result<Vec<TrajectoryPoint>> {
    if steps < 2 {
        return Err(BlochError::InvalidArgument(format!("trajectory needs at least 2 steps, got {steps}")));
    }
    let target = project_onto_simplex(r, m)?.parallel;
    Ok((0..steps)
        .map(|k| {
            let tau = k as f64 / (steps - 1) as f64;
            let point = if k == steps - 1 { target.clone() } else { r.affine(1.0 - tau, &target, tau) };
            TrajectoryPoint { tau, point }
        })
        .collect())
}

/// Uniform point on the simplex in barycentric coordinates, as normalized
/// standard-exponential draws. Fully determined by `(seed, index)`.
pub fn sample_lambda(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, index);
    let mut lambda: Vec<f64> = (0..n)
        .map(|_| {
            // u in (0, 1]
            let u = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
            -u.ln()
        })
        .collect();
    let total: f64 = lambda.iter().sum();
    for x in &mut lambda {
        *x /= total;
    }
    lambda
}

/// Clamps numerical noise in `[-1e-10, 0)` to zero.
pub(crate) fn clamp_weights(weights: &[f64]) -> Result<Vec<f64>> {
    let clamped = weights
        .iter()
        .map(|&w| {
            if w >= 0.0 {
                Ok(w)
            } else if w >= WEIGHT_CLAMP {
                Ok(0.0)
            } else {
                Err(BlochError::InvalidArgument(format!("negative barycentric weight {w}")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if clamped.iter().all(|&w| w == 0.0) {
        return Err(BlochError::AllWeightsZero);
    }
    Ok(clamped)
}

/// Index `i` minimizing `λ_i / w_i` (`λ_i / 0 = ∞`); ties go to the lowest index.
fn argmin_ratio(lambda: &[f64], weights: &[f64]) -> usize {
    let mut best = 0;
    let mut best_ratio = f64::INFINITY;
    for (i, (&l, &w)) in lambda.iter().zip(weights).enumerate() {
        let ratio = if w > 0.0 { l / w } else { f64::INFINITY };
        if ratio < best_ratio {
            best_ratio = ratio;
            best = i;
        }
    }
    best
}

/// Outcome of the collapse phase for one disintegration point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseOutcome {
    pub lambda: Vec<f64>,
    pub vertex: usize,
    pub group: usize,
}

/// Vertex whose sub-simplex contains `lambda`.
pub fn collapse_vertex(lambda: &[f64], weights: &[f64]) -> Result<usize> {
    check_dims(weights.len(), lambda.len())?;
    Ok(argmin_ratio(lambda, &clamp_weights(weights)?))
}

pub fn sample_collapse(w: &OnSimplexState, m: &MeasurementSimplex, seed: u64, index: u64) -> Result<CollapseOutcome> {
    check_dims(m.dim_n, w.weights.len())?;
    let weights = clamp_weights(&w.weights)?;
    let lambda = sample_lambda(m.dim_n, seed, index);
    let vertex = argmin_ratio(&lambda, &weights);
    Ok(CollapseOutcome {
        group: m.group_of(vertex),
        lambda,
        vertex,
    })
}

/// `P_G ψ P_G / Tr(P_G ψ)` for the eigenprojector of `group`.
pub fn lueders_post_state(psi: &DensityState, group: &[usize], m: &MeasurementSimplex) -> Result<DensityState> {
    check_dims(m.dim_n, psi.dim())?;
    let p = m.group_projector(group)?;
    let probability = trace_product(&p, psi.matrix())?.re;
    if probability <= MIN_GROUP_PROBABILITY {
        return Err(BlochError::ZeroProbability { probability });
    }
    let projected = &(&p * psi.matrix()) * &p;
    let tr = trace(&projected).re;
    Ok(DensityState::from_trusted(projected.scale_real(1.0 / tr).hermitian_part()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasurementRecord {
    pub lambda: Vec<f64>,
    /// Degeneracy group of the outcome (the vertex index when non-degenerate).
    pub outcome_index: usize,
    pub vertex_index: usize,
    pub eigenvalue: f64,
    pub post_state: DensityState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// A prepared measurement of `psi` on a simplex: the deterministic approach
/// is computed once, and each sample index then yields one collapse.
#[derive(Clone, Debug)]
pub struct HiddenMeasurement<'a> {
    simplex: &'a MeasurementSimplex,
    initial: BlochVector,
    on_simplex: OnSimplexState,
    weights: Vec<f64>,
    post_states: Vec<Option<DensityState>>,
}

impl<'a> HiddenMeasurement<'a> {
    pub fn new(psi: &DensityState, simplex: &'a MeasurementSimplex, g: &GeneratorSet) -> Result<Self> {
        check_dims(simplex.dim_n, psi.dim())?;
        let initial = state_to_bloch(psi, g)?;
        let on_simplex = project_onto_simplex(&initial, simplex)?;
        let weights = clamp_weights(&on_simplex.weights)?;
        let post_states = simplex
            .degeneracy_groups
            .iter()
            .map(|group| match group.as_slice() {
                [i] if weights[*i] > 0.0 => Some(simplex.eigenstates[*i].projector()),
                _ => lueders_post_state(psi, group, simplex).ok(),
            })
            .collect();
        Ok(Self {
            simplex,
            initial,
            on_simplex,
            weights,
            post_states,
        })
    }

    pub fn on_simplex(&self) -> &OnSimplexState {
        &self.on_simplex
    }

    pub fn initial(&self) -> &BlochVector {
        &self.initial
    }

    pub fn trajectory(&self, steps: usize) -> Result<Vec<TrajectoryPoint>> {
        approach_trajectory(&self.initial, self.simplex, steps)
    }

    /// Vertex selected by sample `index`.
    pub fn vertex(&self, seed: u64, index: u64) -> usize {
        let lambda = sample_lambda(self.simplex.dim_n, seed, index);
        argmin_ratio(&lambda, &self.weights)
    }

    pub fn record(&self, seed: u64, index: u64, trajectory_steps: Option<usize>) -> Result<MeasurementRecord> {
        let lambda = sample_lambda(self.simplex.dim_n, seed, index);
        let vertex = argmin_ratio(&lambda, &self.weights);
        let group = self.simplex.group_of(vertex);
        let post_state = self.post_states[group]
            .clone()
            .ok_or(BlochError::ZeroProbability { probability: 0.0 })?;
        Ok(MeasurementRecord {
            lambda,
            outcome_index: group,
            vertex_index: vertex,
            eigenvalue: self.simplex.group_eigenvalues()[group],
            post_state,
            trajectory: trajectory_steps.map(|s| self.trajectory(s)).transpose()?,
        })
    }

    /// Vertex hit counts for samples `0..samples`, evaluated in parallel.
    pub fn vertex_counts(&self, seed: u64, samples: u64) -> Vec<u64> {
        let n = self.simplex.dim_n;
        (0..samples)
            .into_par_iter()
            .fold(
                || vec![0u64; n],
                |mut acc, i| {
                    acc[self.vertex(seed, i)] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub trajectory_steps: Option<usize>,
    /// Number of leading records kept in the report.
    pub records: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            trajectory_steps: None,
            records: 10,
        }
    }
}

/// Aggregate statistics of a measurement run; per-outcome vectors are
/// indexed by degeneracy group.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurementReport {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    pub born: Vec<f64>,
    pub empirical: Vec<f64>,
    pub counts: Vec<u64>,
    pub std_errors: Vec<f64>,
    pub max_dev: f64,
    pub vertex_born: Vec<f64>,
    pub vertex_empirical: Vec<f64>,
    pub on_simplex: OnSimplexState,
    pub records_sample: Vec<MeasurementRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

impl MeasurementReport {
    /// Whether every outcome lies within `max(floor, k · SE)` of its Born probability.
    pub fn within(&self, floor: f64, k: f64) -> bool {
        self.born
            .iter()
            .zip(&self.empirical)
            .zip(&self.std_errors)
            .all(|((b, e), se)| (b - e).abs() <= floor.max(k * se))
    }

    /// `tau,coord_0,..` rows for the approach trajectory.
    pub fn trajectory_csv(&self) -> Option<String> {
        let traj = self.trajectory.as_ref()?;
        let width = traj.first().map_or(0, |p| p.point.coords().len());
        let mut out = String::from("tau");
        for i in 0..width {
            out.push_str(&format!(",coord_{i}"));
        }
        out.push('\n');
        for p in traj {
            out.push_str(&format!("{:.16e}", p.tau));
            for x in p.point.coords() {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        Some(out)
    }
}

pub fn run_measurement(
    psi: &DensityState,
    simplex: &MeasurementSimplex,
    g: &GeneratorSet,
    samples: u64,
    seed: u64,
    options: RunOptions,
) -> Result<MeasurementReport> {
    if samples == 0 {
        return Err(BlochError::InvalidArgument("samples must be at least 1".into()));
    }
    let hidden = HiddenMeasurement::new(psi, simplex, g)?;
    let vertex_counts = hidden.vertex_counts(seed, samples);
    let m = samples as f64;
    let vertex_born = hidden.weights.clone();
    let groups = simplex.degeneracy_groups.clone();
    let born: Vec<f64> = groups.iter().map(|g| g.iter().map(|&i| vertex_born[i]).sum()).collect();
    let counts: Vec<u64> = groups.iter().map(|g| g.iter().map(|&i| vertex_counts[i]).sum()).collect();
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    let std_errors = born.iter().map(|p| (p * (1.0 - p)).max(0.0).sqrt() / m.sqrt()).collect();
    let max_dev = born
        .iter()
        .zip(&empirical)
        .map(|(b, e)| (b - e).abs())
        .fold(0.0, f64::max);
    let records_sample = (0..samples.min(options.records as u64))
        .map(|i| hidden.record(seed, i, None))
        .collect::<Result<Vec<_>>>()?;
    let trajectory = options.trajectory_steps.map(|s| hidden.trajectory(s)).transpose()?;

    Ok(MeasurementReport {
        n: simplex.dim_n,
        samples,
        seed,
        eigenvalues: simplex.group_eigenvalues(),
        groups,
        born,
        empirical,
        counts,
        std_errors,
        max_dev,
        vertex_empirical: vertex_counts.iter().map(|&c| c as f64 / m).collect(),
        vertex_born,
        on_simplex: hidden.on_simplex.clone(),
        records_sample,
        trajectory,
    })
}

/// Complex amplitude helper kept for callers building eigenstate families by hand.
pub fn eigenstate_family(vectors: Vec<Vec<Complex64>>) -> Result<Vec<PureState>> {
    vectors.into_iter().map(PureState::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::pure_state_from_direction;
    use crate::random::{random_density, random_hermitian, stream_rng};
    use crate::spin::{spin_along, Spin, SpinSystem};
    use approx::assert_abs_diff_eq;

    fn sz_simplex(spin: Spin) -> (GeneratorSet, MeasurementSimplex) {
        let g = GeneratorSet::new(spin.dim()).unwrap();
        let obs = spin_along(&SpinSystem::new(spin), &Direction3::X3).unwrap();
        let m = simplex_from_observable(&obs, &g).unwrap();
        (g, m)
    }

    #[test]
    fn qubit_segment() {
        let (_, m) = sz_simplex(Spin::HALF);
        assert_abs_diff_eq!(m.edge_length(0, 1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.vertices()[0].dot(&m.vertices()[1]), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.volume(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn qutrit_triangle_and_tetrahedron() {
        let (_, m) = sz_simplex(Spin::ONE);
        assert_abs_diff_eq!(m.volume(), 3.0 * 3.0_f64.sqrt() / 4.0, epsilon = 1e-12);
        let (_, m) = sz_simplex(Spin::new(1.5).unwrap());
        assert_abs_diff_eq!(m.volume(), (4.0_f64 / 3.0).powf(1.5) / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn simplex_invariants_for_random_observables() {
        let mut rng = stream_rng(11, 0);
        for n in 2..=6 {
            let g = GeneratorSet::new(n).unwrap();
            let es = linalg::eigh(&random_hermitian(n, &mut rng)).unwrap();
            let states = (0..n).map(|k| PureState::new(es.eigenvector(k)).unwrap()).collect();
            let m = MeasurementSimplex::from_eigenstates(states, es.eigenvalues.clone(), &g).unwrap();
            let edge = (2.0 * n as f64 / (n as f64 - 1.0)).sqrt();
            let mut centroid = vec![0.0; n * n - 1];
            for i in 0..n {
                assert_abs_diff_eq!(m.vertices()[i].norm(), 1.0, epsilon = 1e-10);
                for (c, x) in centroid.iter_mut().zip(m.vertices()[i].coords()) {
                    *c += x;
                }
                for j in 0..i {
                    assert_abs_diff_eq!(m.vertices()[i].dot(&m.vertices()[j]), -1.0 / (n as f64 - 1.0), epsilon = 1e-10);
                    assert_abs_diff_eq!(m.edge_length(i, j), edge, epsilon = 1e-10);
                }
            }
            assert!(linalg::norm(&centroid) < 1e-10);
            assert!(!m.is_degenerate());
        }
    }

    #[test]
    fn rejects_non_orthonormal_family() {
        let g = GeneratorSet::new(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let states = vec![PureState::basis(2, 0), PureState::new(vec![Complex64::new(h, 0.0); 2]).unwrap()];
        assert!(matches!(
            MeasurementSimplex::from_eigenstates(states, vec![0.0, 1.0], &g),
            Err(BlochError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let (_, m) = sz_simplex(Spin::ONE);
        let on = project_onto_simplex(&m.vertices()[1], &m).unwrap();
        for (i, w) in on.weights.iter().enumerate() {
            assert_abs_diff_eq!(*w, if i == 1 { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
        let on = project_onto_simplex(&BlochVector::zero(3), &m).unwrap();
        assert!(on.weights.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-15));

        let (g, m) = sz_simplex(Spin::HALF);
        let theta = 1.234;
        let r = state_to_bloch(&pure_state_from_direction(theta, 0.4), &g).unwrap();
        let on = project_onto_simplex(&r, &m).unwrap();
        // vertex 0 is μ = -1/2, vertex 1 is μ = +1/2
        assert_abs_diff_eq!(on.weights[1], (theta / 2.0).cos().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(on.weights[0], (theta / 2.0).sin().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(on.perp_norm, theta.sin(), epsilon = 1e-14);
    }

    #[test]
    fn born_routes_agree() {
        let mut rng = stream_rng(5, 0);
        for n in 2..=5 {
            let g = GeneratorSet::new(n).unwrap();
            let spin = Spin::for_dim(n).unwrap();
            let obs = spin_along(&SpinSystem::new(spin), &crate::random::random_direction(&mut rng)).unwrap();
            let m = simplex_from_observable(&obs, &g).unwrap();
            let psi = random_density(n, &mut rng);
            let a = born_probabilities(&psi, &m, &g).unwrap();
            let b = trace_probabilities(&psi, &m).unwrap();
            let c = cosine_probabilities(&psi, &m, &g).unwrap();
            for i in 0..n {
                assert_abs_diff_eq!(a.vertex[i], b.vertex[i], epsilon = 1e-10);
                assert_abs_diff_eq!(a.vertex[i], c.vertex[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn qubit_equator_is_fair() {
        let (g, m) = sz_simplex(Spin::HALF);
        let p = born_probabilities(&pure_state_from_direction(std::f64::consts::FRAC_PI_2, 0.0), &m, &g).unwrap();
        assert_abs_diff_eq!(p.vertex[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.vertex[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn trajectory_endpoints() {
        let (g, m) = sz_simplex(Spin::ONE);
        let psi = random_density(3, &mut stream_rng(2, 0));
        let r = state_to_bloch(&psi, &g).unwrap();
        let traj = approach_trajectory(&r, &m, 11).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj[0].tau, 0.0);
        assert_eq!(traj[0].point, r);
        let target = project_onto_simplex(&r, &m).unwrap().parallel;
        assert!(traj[10].point.distance(&target) < 1e-12);
        assert!(approach_trajectory(&r, &m, 1).is_err());
    }

    #[test]
    fn lambda_is_on_simplex_and_reproducible() {
        let a = sample_lambda(4, 9, 17);
        assert_eq!(a, sample_lambda(4, 9, 17));
        assert_ne!(a, sample_lambda(4, 9, 18));
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn one_hot_weights_are_certain() {
        let (_, m) = sz_simplex(Spin::ONE);
        let on = project_onto_simplex(&m.vertices()[2], &m).unwrap();
        for i in 0..200 {
            assert_eq!(sample_collapse(&on, &m, 3, i).unwrap().vertex, 2);
        }
    }

    #[test]
    fn argmin_ties_go_low() {
        assert_eq!(collapse_vertex(&[0.25, 0.25, 0.5], &[0.5, 0.5, 0.0]).unwrap(), 0);
        assert_eq!(collapse_vertex(&[0.2, 0.3, 0.5], &[0.0, 0.0, 1e-11 - 1e-11]).unwrap_err(), BlochError::AllWeightsZero);
        assert!(collapse_vertex(&[0.5, 0.5], &[1.1, -0.1]).is_err());
        assert_eq!(collapse_vertex(&[0.5, 0.5], &[1.0, -5e-11]).unwrap(), 0);
    }

    /// Solves `λ = t w + Σ_{j≠i} c_j e_j` by Cramer's rule and checks the
    /// coefficients are non-negative.
    fn in_subregion(lambda: &[f64; 3], w: &[f64; 3], i: usize) -> Option<bool> {
        let others: Vec<usize> = (0..3).filter(|&j| j != i).collect();
        let mut cols = [[0.0; 3]; 3];
        cols[0] = *w;
        for (c, &j) in others.iter().enumerate() {
            cols[c + 1] = [0.0; 3];
            cols[c + 1][j] = 1.0;
        }
        let det3 = |c: &[[f64; 3]; 3]| {
            c[0][0] * (c[1][1] * c[2][2] - c[2][1] * c[1][2]) - c[1][0] * (c[0][1] * c[2][2] - c[2][1] * c[0][2])
                + c[2][0] * (c[0][1] * c[1][2] - c[1][1] * c[0][2])
        };
        let d = det3(&cols);
        let mut coeffs = [0.0; 3];
        for k in 0..3 {
            let mut m = cols;
            m[k] = *lambda;
            coeffs[k] = det3(&m) / d;
        }
        let margin = coeffs.iter().cloned().fold(f64::INFINITY, f64::min);
        if margin.abs() < 1e-9 {
            None
        } else {
            Some(margin > 0.0)
        }
    }

    #[test]
    fn argmin_rule_matches_explicit_subregions() {
        let w = [0.2, 0.5, 0.3];
        let mut checked = 0;
        for i in 0..100_000u64 {
            let l = sample_lambda(3, 77, i);
            let lambda = [l[0], l[1], l[2]];
            let winner = collapse_vertex(&lambda, &w).unwrap();
            for region in 0..3 {
                if let Some(inside) = in_subregion(&lambda, &w, region) {
                    assert_eq!(inside, region == winner, "λ = {lambda:?}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 290_000);
    }

    #[test]
    fn lueders_examples() {
        let (_, m) = sz_simplex(Spin::ONE);
        let mixed = DensityState::maximally_mixed(3);
        let post = lueders_post_state(&mixed, &[0, 2], &m).unwrap();
        let expected = m.group_projector(&[0, 2]).unwrap().scale_real(0.5);
        assert!(post.matrix().max_abs_diff(&expected) < 1e-15);

        let post = lueders_post_state(&mixed, &[1], &m).unwrap();
        assert!(post.matrix().max_abs_diff(m.eigenstates()[1].projector().matrix()) < 1e-15);

        let psi = crate::random::random_pure(3, &mut stream_rng(8, 0)).projector();
        let post = lueders_post_state(&psi, &[0, 1], &m).unwrap();
        assert_abs_diff_eq!(post.purity(), 1.0, epsilon = 1e-10);

        let e0 = m.eigenstates()[0].projector();
        assert!(matches!(lueders_post_state(&e0, &[2], &m), Err(BlochError::ZeroProbability { .. })));
    }

    #[test]
    fn repeated_measurement_is_repeatable() {
        let (g, m) = sz_simplex(Spin::ONE);
        let psi = random_density(3, &mut stream_rng(4, 0));
        let hidden = HiddenMeasurement::new(&psi, &m, &g).unwrap();
        for i in 0..20 {
            let first = hidden.record(1, i, None).unwrap();
            let again = HiddenMeasurement::new(&first.post_state, &m, &g).unwrap();
            let on = again.on_simplex();
            assert_abs_diff_eq!(on.weights[first.vertex_index], 1.0, epsilon = 1e-10);
            for j in 0..50 {
                assert_eq!(again.vertex(2, j), first.vertex_index);
            }
        }
    }

    #[test]
    fn run_report_eigenstate_has_no_deviation() {
        let (g, m) = sz_simplex(Spin::ONE);
        let psi = m.eigenstates()[0].projector();
        let report = run_measurement(&psi, &m, &g, 1000, 0, RunOptions::default()).unwrap();
        assert_eq!(report.max_dev, 0.0);
        assert_eq!(report.counts, vec![1000, 0, 0]);
        assert_eq!(report.records_sample.len(), 10);
        assert!(run_measurement(&psi, &m, &g, 0, 0, RunOptions::default()).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let (g, m) = sz_simplex(Spin::HALF);
        let psi = pure_state_from_direction(1.0, 0.0);
        let opts = RunOptions { trajectory_steps: Some(3), records: 0 };
        let report = run_measurement(&psi, &m, &g, 10, 0, opts).unwrap();
        let csv = report.trajectory_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "tau,coord_0,coord_1,coord_2");
        assert_eq!(lines.len(), 4);
    }
}
