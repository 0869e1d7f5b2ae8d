//! Exact 2×2 complex linear algebra for two-level systems.
//!
//! Everything here works in natural units (ħ = 1). States are 2-vectors in the
//! diabatic basis `|1⟩ = (1, 0)`, `|2⟩ = (0, 1)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::TwoLevelStatic;

/// Tolerance for Hermiticity of inputs and unit trace / normalization of states.
pub const EXACT_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix at construction.
pub const POSITIVITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex2Matrix {
    pub entries: [[C64; 2]; 2],
}

impl Complex2Matrix {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self {
            entries: [[a11, a12], [a21, a22]],
        }
    }

    pub fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    /// `[[e1, j], [j, e2]]`, the generic real symmetric two-level Hamiltonian.
    pub fn symmetric(e1: f64, j: f64, e2: f64) -> Self {
        Self::real(e1, j, j, e2)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn sigma_x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn diagonal(d1: f64, d2: f64) -> Self {
        Self::real(d1, 0.0, 0.0, d2)
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[C64; 2], b: &[C64; 2]) -> Self {
        Self::new(
            a[0] * b[0].conj(),
            a[0] * b[1].conj(),
            a[1] * b[0].conj(),
            a[1] * b[1].conj(),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn dagger(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, k: C64) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self::new(k * a, k * b, k * c, k * d)
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn apply(&self, v: &[C64; 2]) -> [C64; 2] {
        let [[a, b], [c, d]] = self.entries;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Max deviation from Hermiticity: diagonal imaginary parts and `a12 − conj(a21)`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries;
        a.im.abs().max(d.im.abs()).max((b - c.conj()).norm())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= EXACT_TOL * self.max_abs().max(1.0)
    }

    fn check_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation: self.hermiticity_deviation(),
            })
        }
    }

    /// Eigenvalues of the Hermitian part, ascending. Used for positivity checks.
    pub(crate) fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = 0.5 * (self.entries[0][1] + self.entries[1][0].conj());
        let mean = 0.5 * (a + d);
        let r = (0.5 * (a - d)).hypot(b.norm());
        [mean - r, mean + r]
    }
}

impl Add for Complex2Matrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out += rhs;
        out
    }
}

impl AddAssign for Complex2Matrix {
    fn add_assign(&mut self, rhs: Self) {
        for (row, rrow) in self.entries.iter_mut().zip(rhs.entries.iter()) {
            for (x, y) in row.iter_mut().zip(rrow.iter()) {
                *x += *y;
            }
        }
    }
}

impl Sub for Complex2Matrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Complex2Matrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for Complex2Matrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        let [[e, f], [g, h]] = rhs.entries;
        Self::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

/// A normalized pure state `c1|1⟩ + c2|2⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: [C64; 2],
}

impl PureState {
    pub fn new(c1: C64, c2: C64) -> Result<Self> {
        let norm_sqr = c1.norm_sqr() + c2.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            amplitudes: [c1, c2],
        })
    }

    /// Normalizes `(c1, c2)`; fails on the zero vector.
    pub fn normalized(c1: C64, c2: C64) -> Result<Self> {
        let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Ok(Self {
            amplitudes: [c1 / norm, c2 / norm],
        })
    }

    /// Internal constructor for integrator output, where norm drift is tracked separately.
    pub(crate) fn from_amplitudes_unchecked(amplitudes: [C64; 2]) -> Self {
        Self { amplitudes }
    }

    /// `|1⟩`
    pub fn ket1() -> Self {
        Self {
            amplitudes: [ONE, ZERO],
        }
    }

    /// `|2⟩`
    pub fn ket2() -> Self {
        Self {
            amplitudes: [ZERO, ONE],
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amplitudes
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes[0].conj() * other.amplitudes[0]
            + self.amplitudes[1].conj() * other.amplitudes[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()
    }

    /// Diabatic populations `(|c1|², |c2|²)`.
    pub fn populations(&self) -> [f64; 2] {
        [self.amplitudes[0].norm_sqr(), self.amplitudes[1].norm_sqr()]
    }

    pub fn projector(&self) -> Complex2Matrix {
        Complex2Matrix::outer(&self.amplitudes, &self.amplitudes)
    }

    /// Global phase chosen so the first component with non-negligible modulus is real positive.
    fn with_canonical_phase(self) -> Self {
        let lead = self
            .amplitudes
            .iter()
            .copied()
            .find(|c| c.norm() > 1e-15)
            .unwrap_or(ONE);
        let phase = lead.conj() / lead.norm();
        Self {
            amplitudes: [self.amplitudes[0] * phase, self.amplitudes[1] * phase],
        }
    }
}

/// A Hermitian, positive, unit-trace 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: Complex2Matrix,
}

impl DensityMatrix {
    pub fn new(matrix: Complex2Matrix) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > EXACT_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {deviation:e})"
            )));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {trace} is not 1"
            )));
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: Complex2Matrix) -> Self {
        Self { matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    /// `diag(p1, p2)`
    pub fn diagonal(p1: f64, p2: f64) -> Result<Self> {
        Self::new(Complex2Matrix::diagonal(p1, p2))
    }

    pub fn matrix(&self) -> &Complex2Matrix {
        &self.matrix
    }

    pub fn populations(&self) -> [f64; 2] {
        [self.matrix.get(0, 0).re, self.matrix.get(1, 1).re]
    }

    /// `ρ₁₂ = ⟨1|ρ|2⟩`
    pub fn coherence(&self) -> C64 {
        self.matrix.get(0, 1)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues()[0]
    }
}

/// Spectrum of a Hermitian 2×2 matrix: index 0 is the lower level `E₋`, index 1 the upper `E₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair2 {
    pub values: [f64; 2],
    pub vectors: [PureState; 2],
}

impl EigenPair2 {
    pub fn lower(&self) -> (f64, &PureState) {
        (self.values[0], &self.vectors[0])
    }

    pub fn upper(&self) -> (f64, &PureState) {
        (self.values[1], &self.vectors[1])
    }

    /// `Σ Eᵢ |vᵢ⟩⟨vᵢ|`
    pub fn reconstruct(&self) -> Complex2Matrix {
        self.values
            .iter()
            .zip(self.vectors.iter())
            .fold(Complex2Matrix::zero(), |acc, (&e, v)| {
                acc + v.projector().scale_re(e)
            })
    }
}

/// Closed-form eigen-decomposition of a Hermitian 2×2 matrix.
///
/// Writing `h = [[E + Δ, b], [b*, E − Δ]]`, the levels are `E ± √(Δ² + |b|²)`.
/// The eigenvector formula is picked by the sign of `Δ` so that no component is
/// computed by cancellation. An exactly degenerate matrix returns `|1⟩, |2⟩`.
pub fn eigen_hermitian(h: &Complex2Matrix) -> Result<EigenPair2> {
    h.check_hermitian()?;
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = h.get(0, 1);
    let mean = 0.5 * (a + d);
    let delta = 0.5 * (a - d);
    let r = delta.hypot(b.norm());
    let values = [mean - r, mean + r];

    if r == 0.0 {
        return Ok(EigenPair2 {
            values,
            vectors: [PureState::ket1(), PureState::ket2()],
        });
    }

    let (lower, upper) = if delta >= 0.0 {
        ((-b, C64::from(delta + r)), (C64::from(delta + r), b.conj()))
    } else {
        ((C64::from(r - delta), -b.conj()), (b, C64::from(r - delta)))
    };
    let lower = PureState::normalized(lower.0, lower.1)?.with_canonical_phase();
    let upper = PureState::normalized(upper.0, upper.1)?.with_canonical_phase();
    Ok(EigenPair2 {
        values,
        vectors: [lower, upper],
    })
}

/// `exp(−i t h)` assembled from the spectral decomposition of `h`.
pub fn matrix_exponential_propagator(h: &Complex2Matrix, t: f64) -> Result<Complex2Matrix> {
    let eig = eigen_hermitian(h)?;
    Ok(eig
        .values
        .iter()
        .zip(eig.vectors.iter())
        .fold(Complex2Matrix::zero(), |acc, (&e, v)| {
            acc + v.projector().scale((-I * e * t).exp())
        }))
}

/// `|⟨2| e^{−itH} |1⟩|² = J²/(J²+Δ²) · sin²(t √(J²+Δ²))` for the static Hamiltonian.
pub fn static_transition_probability(params: &TwoLevelStatic, t: f64) -> f64 {
    let splitting = params.j.hypot(params.delta);
    if splitting == 0.0 {
        return 0.0;
    }
    let weight = (params.j / splitting).powi(2);
    weight * (t * splitting).sin().powi(2)
}
