//! Jones calculus for the optical qubit: waveplate preparation of
//! (|H⟩ + e^{iθ}|V⟩)/√2 and the three polarizing-beam-splitter measurement
//! units that read out ⟨X⟩, ⟨Y⟩ and ⟨Z⟩.
//!
//! Conventions, fixed once for the whole module:
//! - |H⟩ = |0⟩, |V⟩ = |1⟩; a Jones vector is the qubit's amplitude pair.
//! - A retarder with fast axis at physical angle α from horizontal is
//!   R(α)·diag(1, e^{iΓ})·R(-α) with Γ = π (half-wave) or π/2 (quarter-wave)
//!   and R the counterclockwise rotation.
//! - Stokes components are ordered (⟨X⟩, ⟨Y⟩, ⟨Z⟩), which makes the
//!   preparation path land exactly on (cos θ, sin θ, 0). Descriptions that
//!   label sphere axes with half/double angles map onto this convention by
//!   halving: the plate angle written as π/4 - θ/2 on the sphere is the
//!   physical angle π/8 + θ/4 here, mirror-oriented so θ grows toward |V⟩.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use crate::error::{Error, Result};
use crate::quantum::{Pauli, PureState};

/// A normalized polarization state (E_H, E_V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    h: Complex64,
    v: Complex64,
}

impl JonesVector {
    /// Builds and normalizes; rejects the zero field.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(JonesVector {
            h: h / norm,
            v: v / norm,
        })
    }

    pub fn horizontal() -> Self {
        JonesVector {
            h: Complex64::ONE,
            v: Complex64::ZERO,
        }
    }

    pub fn components(&self) -> (Complex64, Complex64) {
        (self.h, self.v)
    }

    /// Sends the beam through a waveplate.
    pub fn through(&self, plate: &Waveplate) -> JonesVector {
        let m = plate.matrix();
        JonesVector {
            h: m[(0, 0)] * self.h + m[(0, 1)] * self.v,
            v: m[(1, 0)] * self.h + m[(1, 1)] * self.v,
        }
    }

    /// The same state as a single-qubit ket.
    pub fn to_pure_state(&self) -> PureState {
        PureState::new(1, vec![self.h, self.v]).expect("Jones vectors are normalized")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveplateKind {
    Half,
    Quarter,
}

/// An ideal retarder at a physical fast-axis angle from horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveplate {
    pub kind: WaveplateKind,
    pub fast_axis: f64,
}

impl Waveplate {
    pub fn half(fast_axis: f64) -> Self {
        Waveplate {
            kind: WaveplateKind::Half,
            fast_axis,
        }
    }

    pub fn quarter(fast_axis: f64) -> Self {
        Waveplate {
            kind: WaveplateKind::Quarter,
            fast_axis,
        }
    }

    pub fn retardance(&self) -> f64 {
        match self.kind {
            WaveplateKind::Half => PI,
            WaveplateKind::Quarter => FRAC_PI_2,
        }
    }

    /// The 2x2 Jones matrix R(α)·diag(1, e^{iΓ})·R(-α).
    pub fn matrix(&self) -> Array2<Complex64> {
        let (s, c) = self.fast_axis.sin_cos();
        let (cs, cc) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
        let phase = Complex64::from_polar(1.0, self.retardance());
        ndarray::array![
            [cc * cc + phase * cs * cs, cs * cc * (Complex64::ONE - phase)],
            [cs * cc * (Complex64::ONE - phase), cs * cs + phase * cc * cc],
        ]
    }
}

/// Free-function form of [`Waveplate::matrix`].
pub fn waveplate_matrix(plate: &Waveplate) -> Array2<Complex64> {
    plate.matrix()
}

/// Stokes components in the module convention (s1, s2, s3) = (⟨X⟩, ⟨Y⟩, ⟨Z⟩).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }
}

/// Prepares (|H⟩ + e^{iθ}|V⟩)/√2 from horizontal light with a half-wave
/// plate at π/8 + θ/4 followed by a quarter-wave plate at π/4.
pub fn prepare_state(theta: f64) -> JonesVector {
    JonesVector::horizontal()
        .through(&Waveplate::half(FRAC_PI_8 + theta / 4.0))
        .through(&Waveplate::quarter(FRAC_PI_4))
}

/// One polarization-analysis unit: transmitted minus reflected power at a
/// PBS, measuring ⟨Z⟩ directly, ⟨X⟩ behind a half-wave plate at π/8, and
/// ⟨Y⟩ behind a quarter-wave plate at π/4.
pub fn measure_unit(beam: &JonesVector, basis: Pauli) -> Result<f64> {
    let analyzed = match basis {
        Pauli::Z => *beam,
        Pauli::X => beam.through(&Waveplate::half(FRAC_PI_8)),
        Pauli::Y => beam.through(&Waveplate::quarter(FRAC_PI_4)),
        Pauli::I => {
            return Err(Error::InvalidPauliLetter('I'));
        }
    };
    let (h, v) = analyzed.components();
    Ok(h.norm_sqr() - v.norm_sqr())
}

/// Full Stokes readout of a beam.
pub fn stokes(beam: &JonesVector) -> StokesVector {
    let (h, v) = beam.components();
    let cross = h.conj() * v;
    StokesVector {
        s1: 2.0 * cross.re,
        s2: 2.0 * cross.im,
        s3: h.norm_sqr() - v.norm_sqr(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn fidelity(a: &JonesVector, b: &JonesVector) -> f64 {
        a.to_pure_state().fidelity(&b.to_pure_state()).unwrap()
    }

    #[test]
    fn waveplates_are_unitary() {
        for k in 0..=100 {
            let angle = PI * k as f64 / 100.0;
            for plate in [Waveplate::half(angle), Waveplate::quarter(angle)] {
                let m = plate.matrix();
                for i in 0..2 {
                    for j in 0..2 {
                        let e: Complex64 =
                            (0..2).map(|t| m[(i, t)] * m[(j, t)].conj()).sum();
                        let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                        assert!((e - expect).norm() < TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn hwp_on_fast_axis_keeps_horizontal() {
        let out = JonesVector::horizontal().through(&Waveplate::half(0.0));
        assert!((fidelity(&out, &JonesVector::horizontal()) - 1.0).abs() < TOL);
    }

    #[test]
    fn hwp_at_quarter_pi_swaps_h_and_v() {
        let out = JonesVector::horizontal().through(&Waveplate::half(FRAC_PI_4));
        let vertical = JonesVector::new(Complex64::ZERO, Complex64::ONE).unwrap();
        assert!((fidelity(&out, &vertical) - 1.0).abs() < TOL);
    }

    #[test]
    fn qwp_at_quarter_pi_makes_circular_light() {
        let out = JonesVector::horizontal().through(&Waveplate::quarter(FRAC_PI_4));
        let s = stokes(&out);
        // Circular light has all its Stokes weight in the ⟨Y⟩ slot.
        assert!((s.s2.abs() - 1.0).abs() < TOL);
        assert!(s.s1.abs() < TOL);
        assert!(s.s3.abs() < TOL);
    }

    #[test]
    fn two_hwps_at_equal_angle_are_identity() {
        for k in 0..50 {
            let angle = PI * k as f64 / 50.0;
            let plate = Waveplate::half(angle);
            let s = prepare_state(0.3 + k as f64 / 50.0);
            let out = s.through(&plate).through(&plate);
            assert!((fidelity(&s, &out) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn prepare_endpoints() {
        let s0 = stokes(&prepare_state(0.0));
        assert!((s0.s1 - 1.0).abs() < TOL && s0.s2.abs() < TOL && s0.s3.abs() < TOL);
        let s1 = stokes(&prepare_state(FRAC_PI_2));
        assert!(s1.s1.abs() < TOL && (s1.s2 - 1.0).abs() < TOL && s1.s3.abs() < TOL);
    }

    #[test]
    fn prepare_reported_point() {
        let beam = prepare_state(1.1152);
        let triple = [
            measure_unit(&beam, Pauli::X).unwrap(),
            measure_unit(&beam, Pauli::Y).unwrap(),
            measure_unit(&beam, Pauli::Z).unwrap(),
        ];
        assert!((triple[0] - 0.440).abs() < 5e-4);
        assert!((triple[1] - 0.898).abs() < 5e-4);
        assert!(triple[2].abs() < 5e-4);
    }

    #[test]
    fn prepare_matches_equatorial_family_exactly() {
        for k in 0..=1000 {
            let theta = FRAC_PI_2 * k as f64 / 1000.0;
            let s = stokes(&prepare_state(theta));
            assert!((s.s1 - theta.cos()).abs() < TOL);
            assert!((s.s2 - theta.sin()).abs() < TOL);
            assert!(s.s3.abs() < TOL);
        }
    }

    #[test]
    fn measurement_units_agree_with_qubit_expectations() {
        use crate::quantum::PauliString;
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        for seed in 0..1000 {
            let state = PureState::haar_random(1, seed).unwrap();
            let beam =
                JonesVector::new(state.amplitudes()[0], state.amplitudes()[1]).unwrap();
            assert!(
                (measure_unit(&beam, Pauli::X).unwrap() - state.expectation(&x).unwrap())
                    .abs()
                    < TOL
            );
            assert!(
                (measure_unit(&beam, Pauli::Y).unwrap() - state.expectation(&y).unwrap())
                    .abs()
                    < TOL
            );
            assert!(
                (measure_unit(&beam, Pauli::Z).unwrap() - state.expectation(&z).unwrap())
                    .abs()
                    < TOL
            );
        }
    }

    #[test]
    fn measure_unit_rejects_identity() {
        assert!(measure_unit(&JonesVector::horizontal(), Pauli::I).is_err());
    }

    #[test]
    fn stokes_of_horizontal_points_along_z() {
        let s = stokes(&JonesVector::horizontal());
        assert!((s.s3 - 1.0).abs() < TOL);
        assert!(s.s1.abs() < TOL && s.s2.abs() < TOL);
    }

    #[test]
    fn stokes_norm_is_one_for_pure_polarization() {
        for seed in 0..200 {
            let state = PureState::haar_random(1, 7000 + seed).unwrap();
            let beam =
                JonesVector::new(state.amplitudes()[0], state.amplitudes()[1]).unwrap();
            assert!((stokes(&beam).norm() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn theta_recovered_from_stokes() {
        for k in 0..=500 {
            let theta = FRAC_PI_2 * k as f64 / 500.0;
            let s = stokes(&prepare_state(theta));
            let recovered = s.s2.atan2(s.s1);
            assert!((recovered - theta).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_field_rejected() {
        assert!(JonesVector::new(Complex64::ZERO, Complex64::ZERO).is_err());
    }
}
