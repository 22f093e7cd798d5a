//! Spin-s component matrices, directional observables and the classical
//! cone picture. Units with ħ = 1 throughout.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{DensityState, PureState};
use crate::error::{BlochError, Result};
use crate::linalg::{eigh, ComplexMatrix, I};

const SPIN_TOL: f64 = 1e-9;

/// A spin quantum number `s`, stored as the integer `2s >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(BlochError::InvalidSpin(0.0));
        }
        Ok(Self { twice })
    }

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 1.0 - SPIN_TOL || (twice - twice.round()).abs() > SPIN_TOL {
            return Err(BlochError::InvalidSpin(s));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// `N = 2s + 1`
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// The spin whose Hilbert space has dimension `n`.
    pub fn for_dim(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(BlochError::DimensionTooSmall { min: 2, found: n });
        }
        Self::from_twice(n as u32 - 1)
    }

    /// `s (s + 1)`
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// `-s, -s + 1, .., s`
    pub fn projections(self) -> Vec<f64> {
        (0..=self.twice).map(|k| k as f64 - self.value()).collect()
    }

    /// Checks that `mu` is one of `-s..s`.
    pub fn check_projection(self, mu: f64) -> Result<()> {
        let offset = mu + self.value();
        if (offset - offset.round()).abs() > SPIN_TOL || offset < -SPIN_TOL || offset > self.twice as f64 + SPIN_TOL {
            return Err(BlochError::InvalidProjection { s: self.value(), mu });
        }
        Ok(())
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = f64::deserialize(deserializer)?;
        Spin::new(s).map_err(serde::de::Error::custom)
    }
}

/// Unit vector in Euclidean 3-space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Direction3 {
    components: [f64; 3],
}

impl Direction3 {
    pub const X1: Direction3 = Direction3 { components: [1.0, 0.0, 0.0] };
    pub const X2: Direction3 = Direction3 { components: [0.0, 1.0, 0.0] };
    pub const X3: Direction3 = Direction3 { components: [0.0, 0.0, 1.0] };

    /// Requires `|n| = 1` within 1e-12.
    pub fn new(components: [f64; 3]) -> Result<Self> {
        let norm = norm3(&components);
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(BlochError::InvalidDirection(format!("norm {norm} is not 1")));
        }
        Ok(Self { components })
    }

    /// Normalizes `v`, returning the direction and the original norm.
    pub fn normalize(v: [f64; 3]) -> Result<(Self, f64)> {
        let norm = norm3(&v);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(BlochError::InvalidDirection("zero or non-finite vector".into()));
        }
        Ok((Self { components: v.map(|x| x / norm) }, norm))
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            components: [st * cp, st * sp, ct],
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.components
    }

    pub fn dot(&self, other: &Direction3) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a * b).sum()
    }

    /// Polar and azimuthal angles `(θ, φ)`.
    pub fn angles(&self) -> (f64, f64) {
        let [x, y, z] = self.components;
        (z.clamp(-1.0, 1.0).acos(), y.atan2(x))
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `S_1, S_2, S_3` and `S^2` for a spin-s entity, basis ordered by `m = s, s-1, .., -s`.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    spin: Spin,
    components: [ComplexMatrix; 3],
    s_squared: ComplexMatrix,
}

/// Ladder construction: `S_3 = diag(s, .., -s)`,
/// `<m+1|S_+|m> = sqrt(s(s+1) - m(m+1))`, `S_1 = (S_+ + S_-)/2`,
/// `S_2 = (S_+ - S_-)/2i`.
pub fn build_spin_system(spin: Spin) -> SpinSystem {
    let n = spin.dim();
    let s = spin.value();
    let m_of = |i: usize| s - i as f64;
    let s3 = ComplexMatrix::from_diag(&(0..n).map(m_of).collect::<Vec<_>>());
    let mut raise = ComplexMatrix::zeros(n);
    for i in 1..n {
        let m = m_of(i);
        raise[(i - 1, i)] = Complex64::new((spin.casimir() - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.dagger();
    let s1 = (&raise + &lower).scale_real(0.5);
    let s2 = (&raise - &lower).scale(-I * 0.5);
    let s_squared = &(&(&s1 * &s1) + &(&s2 * &s2)) + &(&s3 * &s3);
    SpinSystem {
        spin,
        components: [s1, s2, s3],
        s_squared,
    }
}

impl SpinSystem {
    pub fn new(spin: Spin) -> Self {
        build_spin_system(spin)
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// `S_i` for `i` in `0..3`.
    pub fn component(&self, i: usize) -> &ComplexMatrix {
        &self.components[i]
    }

    pub fn components(&self) -> &[ComplexMatrix; 3] {
        &self.components
    }

    pub fn s_squared(&self) -> &ComplexMatrix {
        &self.s_squared
    }

    /// `S·n = n_1 S_1 + n_2 S_2 + n_3 S_3`
    pub fn along(&self, n: &Direction3) -> ComplexMatrix {
        directional(&self.components, n)
    }
}

pub(crate) fn directional(components: &[ComplexMatrix; 3], n: &Direction3) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(components[0].dim());
    for (c, &x) in components.iter().zip(&n.components()) {
        out.add_scaled(Complex64::new(x, 0.0), c);
    }
    out
}

/// `S_n` with its eigenvalues `μ = -s..s` (ascending) and eigenstates.
#[derive(Clone, Debug)]
pub struct SpinObservable {
    pub spin: Spin,
    pub direction: Direction3,
    pub matrix: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
    pub eigenstates: Vec<PureState>,
}

impl SpinObservable {
    pub fn projectors(&self) -> Vec<DensityState> {
        self.eigenstates.iter().map(PureState::projector).collect()
    }

    /// Exact projections `-s..s` matching `eigenvalues` index by index.
    pub fn projections(&self) -> Vec<f64> {
        self.spin.projections()
    }
}

pub fn spin_along(sys: &SpinSystem, n: &Direction3) -> Result<SpinObservable> {
    let matrix = sys.along(n);
    let es = eigh(&matrix)?;
    let eigenstates = (0..sys.dim())
        .map(|k| PureState::from_trusted(es.eigenvector(k)))
        .collect();
    Ok(SpinObservable {
        spin: sys.spin(),
        direction: *n,
        matrix,
        eigenvalues: es.eigenvalues,
        eigenstates,
    })
}

/// Height, slant and radius of the classical cone of vectors with length
/// `sqrt(s(s+1))` and projection `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cone {
    pub height: f64,
    pub slant: f64,
    pub radius: f64,
}

pub fn cone_parameters(spin: Spin, mu: f64) -> Result<Cone> {
    spin.check_projection(mu)?;
    let slant = spin.casimir().sqrt();
    Ok(Cone {
        height: mu,
        slant,
        radius: (spin.casimir() - mu * mu).max(0.0).sqrt(),
    })
}

impl Cone {
    /// Cone vector at azimuth `phi` around the `x_3` axis.
    pub fn vector(&self, phi: f64) -> [f64; 3] {
        [self.radius * phi.cos(), self.radius * phi.sin(), self.height]
    }
}

/// Range of orthogonal projections of all cone vectors onto the direction
/// of one fixed cone vector: `[(μ² - radius²)/slant, slant]`.
pub fn cone_projection_range(spin: Spin, mu: f64) -> Result<(f64, f64)> {
    let cone = cone_parameters(spin, mu)?;
    Ok((
        (cone.height * cone.height - cone.radius * cone.radius) / cone.slant,
        cone.slant,
    ))
}

/// Range of `|S1 + S2|` over pairs of vectors taken from the two cones
/// `(s1, μ1)` and `(s2, μ2)` sharing the `x_3` axis.
pub fn classical_resultant_range(s1: Spin, mu1: f64, s2: Spin, mu2: f64) -> Result<(f64, f64)> {
    let a = cone_parameters(s1, mu1)?;
    let b = cone_parameters(s2, mu2)?;
    let h = a.height + b.height;
    let len = |cos_dphi: f64| {
        (h * h + a.radius * a.radius + b.radius * b.radius + 2.0 * a.radius * b.radius * cos_dphi)
            .max(0.0)
            .sqrt()
    };
    Ok((len(-1.0), len(1.0)))
}

/// Azimuth difference `Δφ ∈ [0, π]` giving a resultant of length `target`,
/// or `None` when the target lies outside the achievable range.
pub fn resultant_azimuth_for_length(s1: Spin, mu1: f64, s2: Spin, mu2: f64, target: f64) -> Result<Option<f64>> {
    let a = cone_parameters(s1, mu1)?;
    let b = cone_parameters(s2, mu2)?;
    let h = a.height + b.height;
    let denom = 2.0 * a.radius * b.radius;
    let num = target * target - h * h - a.radius * a.radius - b.radius * b.radius;
    if denom == 0.0 {
        return Ok((num.abs() < 1e-12).then_some(0.0));
    }
    let cos = num / denom;
    Ok((-1.0 - 1e-12..=1.0 + 1e-12)
        .contains(&cos)
        .then(|| cos.clamp(-1.0, 1.0).acos()))
}
