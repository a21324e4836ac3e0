//! Pure states, Pauli strings, expectation values, fidelity, and the real
//! parameter vector used as the regression target for tomography networks.
//!
//! States live on 1..=3 qubits by default (dense vectors are cheap there);
//! nothing in the representation forbids more.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit-norm comparison slack for exact algebra.
pub const NORM_TOL: f64 = 1e-12;

/// |a_1| below this cannot anchor the global phase.
pub const PIVOT_TOL: f64 = 1e-9;

/// A normalized pure state on `n` qubits over the computational basis.
///
/// Amplitude `k` belongs to the basis ket whose bits read qubit 1 first
/// (most significant) down to qubit `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<PureState> for StateJson {
    fn from(s: PureState) -> Self {
        StateJson {
            n: s.n,
            re: s.amps.iter().map(|a| a.re).collect(),
            im: s.amps.iter().map(|a| a.im).collect(),
        }
    }
}

impl TryFrom<StateJson> for PureState {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::DimensionMismatch {
                expected: j.re.len(),
                actual: j.im.len(),
            });
        }
        let amps = j
            .re
            .iter()
            .zip(&j.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        PureState::new(j.n, amps)
    }
}

impl PureState {
    /// Builds a state from raw amplitudes, renormalizing to unit norm.
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        let dim = 1usize << n;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(PureState { n, amps })
    }

    /// The computational basis ket |k⟩.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        let dim = 1usize << n;
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: k,
            });
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[k] = Complex64::ONE;
        Ok(PureState { n, amps })
    }

    /// Single-qubit state (|H⟩ + e^{iθ}|V⟩)/√2 on the Bloch equator.
    pub fn equatorial(theta: f64) -> Self {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            n: 1,
            amps: vec![
                Complex64::new(inv, 0.0),
                Complex64::from_polar(inv, theta),
            ],
        }
    }

    /// A Haar-random state: i.i.d. complex Gaussian amplitudes, normalized.
    /// Deterministic for a fixed seed.
    pub fn haar_random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random_from_rng(n, &mut rng)
    }

    /// Same as [`PureState::haar_random`] but advancing a caller-owned stream,
    /// so one stream can drive a whole dataset reproducibly.
    pub fn haar_random_from_rng<R: rand::Rng>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        let dim = 1usize << n;
        loop {
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                return Ok(PureState {
                    n,
                    amps: amps.into_iter().map(|a| a / norm).collect(),
                });
            }
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|², clamped into [0, 1]. Insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// ⟨ψ|P|ψ⟩ for a Pauli string on matching qubits. Always real.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.qubit_count() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: p.qubit_count(),
            });
        }
        let transformed = p.apply(self.n, &self.amps);
        let val: Complex64 = self
            .amps
            .iter()
            .zip(&transformed)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(val.re)
    }

    /// Real regression parameters with the global phase fixed so a_1 is
    /// real and nonnegative: (a_1r, a_2r, a_2im, ..., a_{2^n}r, a_{2^n}im).
    pub fn params(&self) -> Result<AmplitudeParams> {
        let a1 = self.amps[0];
        let mag = a1.norm();
        if mag < PIVOT_TOL {
            return Err(Error::DegenerateParameterization(mag));
        }
        let phase = a1 / mag;
        let rot = phase.conj();
        let mut values = Vec::with_capacity(2 * self.dim() - 1);
        values.push(mag);
        for a in &self.amps[1..] {
            let r = a * rot;
            values.push(r.re);
            values.push(r.im);
        }
        Ok(AmplitudeParams { values })
    }

    /// Rebuilds a normalized state from a parameter vector; the first
    /// amplitude's imaginary part is fixed at zero.
    pub fn from_params(p: &AmplitudeParams) -> Result<Self> {
        let v = &p.values;
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroParameterVector);
        }
        let dim = (v.len() + 1) / 2;
        let mut amps = Vec::with_capacity(dim);
        amps.push(Complex64::new(v[0], 0.0));
        for k in 1..dim {
            amps.push(Complex64::new(v[2 * k - 1], v[2 * k]));
        }
        PureState::new(p.qubit_count(), amps)
    }
}

/// Convenience free function mirroring [`PureState::haar_random`].
pub fn haar_random_state(n: usize, seed: u64) -> Result<PureState> {
    PureState::haar_random(n, seed)
}

pub fn params_from_state(s: &PureState) -> Result<AmplitudeParams> {
    s.params()
}

pub fn state_from_params(p: &AmplitudeParams) -> Result<PureState> {
    PureState::from_params(p)
}

/// One single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let zero = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::I;
        match self {
            Pauli::I => [[one, zero], [zero, one]],
            Pauli::X => [[zero, one], [one, zero]],
            Pauli::Y => [[zero, -i], [i, zero]],
            Pauli::Z => [[one, zero], [zero, -one]],
        }
    }
}

impl From<Pauli> for u8 {
    fn from(p: Pauli) -> u8 {
        p as u8
    }
}

impl TryFrom<u8> for Pauli {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Pauli::I),
            1 => Ok(Pauli::X),
            2 => Ok(Pauli::Y),
            3 => Ok(Pauli::Z),
            other => Err(Error::InvalidPauliIndex(other)),
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauliLetter(other)),
        }
    }
}

/// A tensor product of single-qubit Paulis, one factor per qubit; the first
/// factor acts on qubit 1 (the most significant basis bit).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ZeroQubits);
        }
        Ok(PauliString(factors))
    }

    pub fn from_indices(indices: &[u8]) -> Result<Self> {
        let factors = indices
            .iter()
            .map(|&i| Pauli::try_from(i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn qubit_count(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    pub fn indices(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.index()).collect()
    }

    /// True when every factor is the identity.
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Dense 2^n x 2^n matrix: the Kronecker product of the factors in order.
    pub fn matrix(&self) -> Array2<Complex64> {
        let mut out = Array2::from_elem((1, 1), Complex64::ONE);
        for p in &self.0 {
            out = kron2(&out, &p.matrix());
        }
        out
    }

    /// Applies the operator to an amplitude vector without materializing the
    /// matrix. Each Pauli factor permutes/phases basis states independently.
    pub(crate) fn apply(&self, n: usize, amps: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(self.0.len(), n);
        debug_assert_eq!(amps.len(), 1usize << n);
        let mut flip_mask = 0usize;
        for (k, p) in self.0.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip_mask |= 1usize << (n - 1 - k);
            }
        }
        let mut out = vec![Complex64::ZERO; amps.len()];
        for (x, &a) in amps.iter().enumerate() {
            let mut coeff = a;
            for (k, p) in self.0.iter().enumerate() {
                let bit = (x >> (n - 1 - k)) & 1;
                match p {
                    Pauli::I | Pauli::X => {}
                    Pauli::Y => {
                        // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                        coeff *= if bit == 0 { Complex64::I } else { -Complex64::I };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            coeff = -coeff;
                        }
                    }
                }
            }
            out[x ^ flip_mask] += coeff;
        }
        out
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .chars()
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

/// Kronecker product of a dense matrix with a 2x2 block.
fn kron2(a: &Array2<Complex64>, b: &[[Complex64; 2]; 2]) -> Array2<Complex64> {
    let (r, c) = a.dim();
    let mut out = Array2::from_elem((2 * r, 2 * c), Complex64::ZERO);
    for i in 0..r {
        for j in 0..c {
            let v = a[(i, j)];
            for bi in 0..2 {
                for bj in 0..2 {
                    out[(2 * i + bi, 2 * j + bj)] = v * b[bi][bj];
                }
            }
        }
    }
    out
}

/// Dense matrix for a Pauli string (free-function form).
pub fn pauli_matrix(p: &PauliString) -> Array2<Complex64> {
    p.matrix()
}

/// Real parameter vector of length 2*2^n - 1 describing a pure state with
/// its global phase fixed (first amplitude real, imaginary part dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmplitudeParams {
    values: Vec<f64>,
}

impl AmplitudeParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        param_qubit_count(values.len())?;
        Ok(AmplitudeParams { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn qubit_count(&self) -> usize {
        param_qubit_count(self.values.len()).expect("validated at construction")
    }
}

/// Number of parameters for an n-qubit pure state.
pub fn param_len(n: usize) -> usize {
    2 * (1usize << n) - 1
}

fn param_qubit_count(len: usize) -> Result<usize> {
    let dim2 = len + 1; // 2^(n+1)
    if len < 3 || !dim2.is_power_of_two() {
        return Err(Error::BadParameterLength(len));
    }
    Ok(dim2.trailing_zeros() as usize - 1)
}

/// Density matrix of an n-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: Array2<Complex64>,
}

impl DensityMatrix {
    /// ρ = ½(1 + c·σ) for a single-qubit Bloch vector c = (⟨X⟩,⟨Y⟩,⟨Z⟩).
    pub fn from_bloch(c: [f64; 3]) -> Result<Self> {
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if norm > 1.0 + 1e-9 {
            return Err(Error::NonphysicalBlochVector(norm));
        }
        let half = 0.5;
        let entries = ndarray::array![
            [
                Complex64::new(half * (1.0 + c[2]), 0.0),
                Complex64::new(half * c[0], -half * c[1])
            ],
            [
                Complex64::new(half * c[0], half * c[1]),
                Complex64::new(half * (1.0 - c[2]), 0.0)
            ],
        ];
        Ok(DensityMatrix { n: 1, entries })
    }

    /// |ψ⟩⟨ψ| of a pure state.
    pub fn from_pure(s: &PureState) -> Self {
        let dim = s.dim();
        let mut entries = Array2::from_elem((dim, dim), Complex64::ZERO);
        for (i, a) in s.amps.iter().enumerate() {
            for (j, b) in s.amps.iter().enumerate() {
                entries[(i, j)] = a * b.conj();
            }
        }
        DensityMatrix {
            n: s.qubit_count(),
            entries,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }

    /// Smallest eigenvalue; closed form for 2x2 Hermitian matrices.
    pub fn min_eigenvalue_2x2(&self) -> f64 {
        assert_eq!(self.n, 1, "closed form only for single qubits");
        let t = self.entries[(0, 0)].re + self.entries[(1, 1)].re;
        let det = (self.entries[(0, 0)] * self.entries[(1, 1)]
            - self.entries[(0, 1)] * self.entries[(1, 0)])
            .re;
        let disc = (t * t - 4.0 * det).max(0.0).sqrt();
        (t - disc) / 2.0
    }
}

/// Free-function form of [`DensityMatrix::from_bloch`].
pub fn density_from_bloch(c: [f64; 3]) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn plus_state() -> PureState {
        PureState::new(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn haar_state_is_normalized() {
        for seed in 0..20 {
            let s = PureState::haar_random(1, seed).unwrap();
            let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn haar_state_deterministic_per_seed() {
        let a = PureState::haar_random(2, 7).unwrap();
        let b = PureState::haar_random(2, 7).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c = PureState::haar_random(2, 8).unwrap();
        assert_ne!(a.amplitudes(), c.amplitudes());
    }

    #[test]
    fn haar_mean_z_vanishes() {
        // Monte-Carlo check of Haar symmetry: ⟨Z⟩ averages to 0.
        let z = PauliString::from_str("Z").unwrap();
        let mean = (0..10_000)
            .map(|seed| {
                PureState::haar_random(1, seed)
                    .unwrap()
                    .expectation(&z)
                    .unwrap()
            })
            .sum::<f64>()
            / 10_000.0;
        assert!(mean.abs() < 0.05, "mean ⟨Z⟩ = {mean}");
    }

    #[test]
    fn zero_qubits_rejected() {
        assert!(matches!(
            PureState::haar_random(0, 1),
            Err(Error::ZeroQubits)
        ));
    }

    #[test]
    fn pauli_z_matrix() {
        let z = PauliString::from_str("Z").unwrap().matrix();
        assert_eq!(z[(0, 0)], Complex64::ONE);
        assert_eq!(z[(1, 1)], -Complex64::ONE);
        assert_eq!(z[(0, 1)], Complex64::ZERO);
        assert_eq!(z[(1, 0)], Complex64::ZERO);
    }

    #[test]
    fn pauli_xz_matches_hand_kronecker() {
        // X⊗Z = [[0, Z], [Z, 0]] written out entrywise.
        let m = PauliString::from_str("XZ").unwrap().matrix();
        let one = Complex64::ONE;
        let expect = ndarray::array![
            [0.0.into(), 0.0.into(), one, 0.0.into()],
            [0.0.into(), 0.0.into(), 0.0.into(), -one],
            [one, 0.0.into(), 0.0.into(), 0.0.into()],
            [0.0.into(), -one, 0.0.into(), 0.0.into()],
        ];
        assert_eq!(m, expect);
    }

    #[test]
    fn pauli_matrices_are_involutory() {
        for n in 1..=2usize {
            for code in 0..(1usize << (2 * n)) {
                let indices: Vec<u8> =
                    (0..n).map(|k| ((code >> (2 * k)) & 3) as u8).collect();
                let p = PauliString::from_indices(&indices).unwrap();
                let m = p.matrix();
                let sq = m.dot(&m);
                let dim = 1usize << n;
                for i in 0..dim {
                    for j in 0..dim {
                        let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                        assert!((sq[(i, j)] - expect).norm() < NORM_TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn apply_agrees_with_matrix_route() {
        // Bitwise application vs dense matrix-vector product, all 2-qubit strings.
        let s = PureState::haar_random(2, 123).unwrap();
        for code in 0..16usize {
            let indices = [(code & 3) as u8, ((code >> 2) & 3) as u8];
            let p = PauliString::from_indices(&indices).unwrap();
            let fast = p.apply(2, s.amplitudes());
            let m = p.matrix();
            for i in 0..4 {
                let slow: Complex64 = (0..4).map(|j| m[(i, j)] * s.amplitudes()[j]).sum();
                assert!((fast[i] - slow).norm() < NORM_TOL);
            }
        }
    }

    #[test]
    fn expectation_eigenstates() {
        let zero = PureState::basis(1, 0).unwrap();
        let z = PauliString::from_str("Z").unwrap();
        let x = PauliString::from_str("X").unwrap();
        assert!((zero.expectation(&z).unwrap() - 1.0).abs() < NORM_TOL);
        assert!((plus_state().expectation(&x).unwrap() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn expectation_reported_equatorial_point() {
        // θ = 1.1152 gives the measurement triple (0.440, 0.898, 0).
        let s = PureState::equatorial(1.1152);
        let x = PauliString::from_str("X").unwrap();
        let y = PauliString::from_str("Y").unwrap();
        let z = PauliString::from_str("Z").unwrap();
        assert!((s.expectation(&x).unwrap() - 0.440).abs() < 5e-4);
        assert!((s.expectation(&y).unwrap() - 0.898).abs() < 5e-4);
        assert!(s.expectation(&z).unwrap().abs() < NORM_TOL);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let s = PureState::basis(1, 0).unwrap();
        let p = PauliString::from_str("XZ").unwrap();
        assert!(s.expectation(&p).is_err());
    }

    #[test]
    fn expectation_within_unit_interval() {
        for seed in 0..50 {
            let s = PureState::haar_random(2, seed).unwrap();
            for code in 1..16usize {
                let indices = [(code & 3) as u8, ((code >> 2) & 3) as u8];
                let p = PauliString::from_indices(&indices).unwrap();
                let e = s.expectation(&p).unwrap();
                assert!(e >= -1.0 - NORM_TOL && e <= 1.0 + NORM_TOL);
            }
        }
    }

    #[test]
    fn fidelity_basics() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        assert!((zero.fidelity(&zero).unwrap() - 1.0).abs() < NORM_TOL);
        assert!(zero.fidelity(&one).unwrap() < NORM_TOL);
        // Hand inner product: |⟨0|+⟩|² = 1/2.
        assert!((zero.fidelity(&plus_state()).unwrap() - 0.5).abs() < NORM_TOL);
    }

    #[test]
    fn fidelity_symmetric_and_phase_invariant() {
        let a = PureState::haar_random(2, 5).unwrap();
        let b = PureState::haar_random(2, 6).unwrap();
        assert!(
            (a.fidelity(&b).unwrap() - b.fidelity(&a).unwrap()).abs() < NORM_TOL
        );
        let phase = Complex64::from_polar(1.0, 0.7321);
        let rotated = PureState::new(
            2,
            a.amplitudes().iter().map(|&v| v * phase).collect(),
        )
        .unwrap();
        assert!((a.fidelity(&rotated).unwrap() - 1.0).abs() < NORM_TOL);
        assert!((rotated.fidelity(&b).unwrap() - a.fidelity(&b).unwrap()).abs() < NORM_TOL);
    }

    #[test]
    fn params_of_basis_state() {
        let zero = PureState::basis(1, 0).unwrap();
        assert_eq!(zero.params().unwrap().values(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn params_hand_example() {
        // (|0⟩ + i|1⟩)/√2 → (0.7071, 0, 0.7071)
        let s = PureState::new(
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        let v = s.params().unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.values()[0] - r).abs() < 1e-6);
        assert!(v.values()[1].abs() < 1e-6);
        assert!((v.values()[2] - r).abs() < 1e-6);
    }

    #[test]
    fn params_ignore_global_phase() {
        let s = PureState::haar_random(2, 99).unwrap();
        for phi in [0.3, 1.0, 2.9, -1.4] {
            let phase = Complex64::from_polar(1.0, phi);
            let rotated = PureState::new(
                2,
                s.amplitudes().iter().map(|&v| v * phase).collect(),
            )
            .unwrap();
            let a = s.params().unwrap();
            let b = rotated.params().unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn params_degenerate_pivot_rejected() {
        let s = PureState::basis(1, 1).unwrap(); // a_1 = 0
        assert!(matches!(
            s.params(),
            Err(Error::DegenerateParameterization(_))
        ));
    }

    #[test]
    fn state_from_params_basics() {
        let p = AmplitudeParams::new(vec![1.0, 0.0, 0.0]).unwrap();
        let s = PureState::from_params(&p).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < NORM_TOL);

        // Normalization divides by 2.
        let p2 = AmplitudeParams::new(vec![2.0, 0.0, 0.0]).unwrap();
        let s2 = PureState::from_params(&p2).unwrap();
        assert!((s2.amplitudes()[0].re - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn state_from_params_zero_vector_rejected() {
        let p = AmplitudeParams::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            PureState::from_params(&p),
            Err(Error::ZeroParameterVector)
        ));
    }

    #[test]
    fn params_round_trip() {
        for seed in 0..100 {
            for n in 1..=3 {
                let s = PureState::haar_random(n, 1000 + seed).unwrap();
                let p = s.params().unwrap();
                assert_eq!(p.len(), param_len(n));
                let back = PureState::from_params(&p).unwrap();
                assert!(s.fidelity(&back).unwrap() >= 1.0 - 1e-12);
                // And params ∘ state ∘ params is the identity on params.
                let p2 = back.params().unwrap();
                for (a, b) in p.values().iter().zip(p2.values()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bad_param_length_rejected() {
        assert!(AmplitudeParams::new(vec![1.0, 0.0]).is_err());
        assert!(AmplitudeParams::new(vec![1.0; 5]).is_err());
        assert!(AmplitudeParams::new(vec![1.0; 7]).is_ok());
    }

    #[test]
    fn density_from_bloch_poles() {
        let rho = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!((rho.entry(0, 0).re - 1.0).abs() < NORM_TOL);
        assert!(rho.entry(1, 1).norm() < NORM_TOL);
        assert!(rho.entry(0, 1).norm() < NORM_TOL);

        let mixed = DensityMatrix::from_bloch([0.0, 0.0, 0.0]).unwrap();
        assert!((mixed.entry(0, 0).re - 0.5).abs() < NORM_TOL);
        assert!((mixed.entry(1, 1).re - 0.5).abs() < NORM_TOL);
    }

    #[test]
    fn density_from_bloch_reported_point() {
        // θ = 1.195 equatorial Bloch vector; off-diagonal ≈ 0.1852 - 0.46457i.
        let theta: f64 = 1.195;
        let rho = DensityMatrix::from_bloch([theta.cos(), theta.sin(), 0.0]).unwrap();
        let e = rho.entry(0, 1);
        assert!((e.re - 0.1852).abs() < 5e-3);
        assert!((e.im - (-0.46457)).abs() < 5e-3);
    }

    #[test]
    fn density_from_bloch_rejects_long_vectors() {
        assert!(matches!(
            DensityMatrix::from_bloch([0.8, 0.8, 0.8]),
            Err(Error::NonphysicalBlochVector(_))
        ));
    }

    #[test]
    fn density_matches_pure_projector() {
        let x = PauliString::from_str("X").unwrap();
        let y = PauliString::from_str("Y").unwrap();
        let z = PauliString::from_str("Z").unwrap();
        for seed in 0..200 {
            let s = PureState::haar_random(1, seed).unwrap();
            let c = [
                s.expectation(&x).unwrap(),
                s.expectation(&y).unwrap(),
                s.expectation(&z).unwrap(),
            ];
            let from_bloch = DensityMatrix::from_bloch(c).unwrap();
            let projector = DensityMatrix::from_pure(&s);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (from_bloch.entry(i, j) - projector.entry(i, j)).norm() < 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn state_json_round_trip() {
        let s = PureState::haar_random(2, 31).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"re\""));
        let back: PureState = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn pauli_string_text_round_trip() {
        let p = PauliString::from_str("XIZ").unwrap();
        assert_eq!(p.to_string(), "XIZ");
        assert_eq!(p.indices(), vec![1, 0, 3]);
        assert!(PauliString::from_str("XQ").is_err());
    }
}
