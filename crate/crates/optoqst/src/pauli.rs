//! Measurement sets: enumeration and uniform sampling of Pauli operators,
//! the fixed UDA sets for 2 and 3 qubits, and expectation-value measurement
//! with optional binomial shot noise.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{PauliString, PureState};

/// Expectation values for an ordered Pauli set, entries in [-1, 1].
pub type MeasurementVector = Vec<f64>;

/// Largest qubit count for which sets are enumerable here.
pub const MAX_QUBITS: usize = 3;

/// An ordered, duplicate-free set of non-identity Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliSet {
    n: usize,
    members: Vec<PauliString>,
}

impl PauliSet {
    pub fn new(n: usize, members: Vec<PauliString>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroQubits);
        }
        let mut seen = std::collections::HashSet::new();
        for m in &members {
            if m.qubit_count() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.qubit_count(),
                });
            }
            if m.is_identity() {
                return Err(Error::IdentityNotAllowed);
            }
            if !seen.insert(m.clone()) {
                return Err(Error::DuplicatePauli(m.to_string()));
            }
        }
        Ok(PauliSet { n, members })
    }

    /// All 4^n - 1 non-identity strings in lexicographic index order.
    pub fn enumerate(n: usize) -> Result<Self> {
        check_qubit_range(n)?;
        let total = 1usize << (2 * n); // 4^n
        let members = (1..total)
            .map(|code| PauliString::from_indices(&code_to_indices(code, n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliSet { n, members })
    }

    /// `m` distinct strings drawn uniformly without replacement, in draw
    /// order. Deterministic per seed.
    pub fn sample(n: usize, m: usize, seed: u64) -> Result<Self> {
        check_qubit_range(n)?;
        let total = (1usize << (2 * n)) - 1;
        if m == 0 || m > total {
            return Err(Error::SetSizeOutOfRange { m, max: total });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Partial Fisher-Yates over the codes 1..=total.
        let mut codes: Vec<usize> = (1..=total).collect();
        let mut members = Vec::with_capacity(m);
        for k in 0..m {
            let pick = rng.random_range(k..codes.len());
            codes.swap(k, pick);
            members.push(PauliString::from_indices(&code_to_indices(codes[k], n))?);
        }
        Ok(PauliSet { n, members })
    }

    /// The published operator sets that determine every pure state uniquely
    /// among all states: 10 operators for 2 qubits, 30 for 3 qubits.
    pub fn uda(n: usize) -> Result<Self> {
        let letters: &[&str] = match n {
            2 => &[
                "IX", "IY", "IZ", "XI", "YX", "YY", "YZ", "ZX", "ZY", "ZZ",
            ],
            3 => &[
                "IIX", "IIY", "IIZ", "IXI", "IXX", "IXY", "IYI", "IYX", "IYY",
                "IZI", "XIZ", "XXX", "XXY", "XYX", "XYY", "XZX", "XZY", "YXX",
                "YXY", "YXZ", "YYX", "YYY", "YYZ", "YZI", "ZII", "ZXZ", "ZYZ",
                "ZZX", "ZZY", "ZZZ",
            ],
            other => {
                return Err(Error::QubitCountOutOfRange {
                    got: other,
                    min: 2,
                    max: 3,
                })
            }
        };
        let members = letters
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliSet { n, members })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PauliString] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PauliString> {
        self.members.iter()
    }

    /// Text form, e.g. "IX,YZ,ZZ".
    pub fn to_text(&self) -> String {
        self.members
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl<'a> IntoIterator for &'a PauliSet {
    type Item = &'a PauliString;
    type IntoIter = std::slice::Iter<'a, PauliString>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

fn check_qubit_range(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroQubits);
    }
    if n > MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange {
            got: n,
            min: 1,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Decodes `code` in base 4 into per-qubit indices, first qubit in the
/// highest digit so enumeration order is lexicographic in (i_1,...,i_n).
fn code_to_indices(code: usize, n: usize) -> Vec<u8> {
    (0..n)
        .map(|k| ((code >> (2 * (n - 1 - k))) & 3) as u8)
        .collect()
}

/// How expectation values are observed: exactly, or estimated from a finite
/// number of ±1 outcomes per operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotModel {
    Exact,
    Shots(u64),
}

impl ShotModel {
    pub fn shots(count: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(ShotModel::Shots(count))
    }
}

impl std::fmt::Display for ShotModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShotModel::Exact => write!(f, "exact"),
            ShotModel::Shots(k) => write!(f, "shots:{k}"),
        }
    }
}

/// Measures every operator in the set against the state, in set order.
///
/// Exact mode returns ⟨P⟩. Finite-shot mode draws k₊ ~ Binomial(shots,
/// (1+⟨P⟩)/2) independently per operator and returns (k₊ - k₋)/shots.
pub fn measure_vector(
    state: &PureState,
    set: &PauliSet,
    noise: ShotModel,
    seed: u64,
) -> Result<MeasurementVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    measure_with_rng(state, set, noise, &mut rng)
}

/// Like [`measure_vector`] but drawing shot noise from a caller-owned stream.
pub fn measure_with_rng<R: rand::Rng>(
    state: &PureState,
    set: &PauliSet,
    noise: ShotModel,
    rng: &mut R,
) -> Result<MeasurementVector> {
    if state.qubit_count() != set.qubit_count() {
        return Err(Error::DimensionMismatch {
            expected: set.qubit_count(),
            actual: state.qubit_count(),
        });
    }
    set.iter()
        .map(|p| {
            let exact = state.expectation(p)?;
            Ok(match noise {
                ShotModel::Exact => exact,
                ShotModel::Shots(shots) => {
                    let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
                    let dist = Binomial::new(shots, p_plus)
                        .expect("probability is clamped to [0,1]");
                    let k_plus = dist.sample(rng);
                    (2.0 * k_plus as f64 - shots as f64) / shots as f64
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    #[test]
    fn enumerate_single_qubit() {
        let set = PauliSet::enumerate(1).unwrap();
        let names: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, vec!["X", "Y", "Z"]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(PauliSet::enumerate(2).unwrap().len(), 15);
        let three = PauliSet::enumerate(3).unwrap();
        assert_eq!(three.len(), 63);
        for p in &three {
            assert!(!p.is_identity());
        }
    }

    #[test]
    fn enumerate_order_is_lexicographic() {
        let set = PauliSet::enumerate(2).unwrap();
        let names: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        assert_eq!(&names[..4], &["IX", "IY", "IZ", "XI"]);
        assert_eq!(names.last().unwrap(), "ZZ");
    }

    #[test]
    fn enumerate_rejects_out_of_range() {
        assert!(PauliSet::enumerate(0).is_err());
        assert!(PauliSet::enumerate(4).is_err());
    }

    #[test]
    fn sample_all_three_single_qubit() {
        let set = PauliSet::sample(1, 3, 99).unwrap();
        let mut names: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["X", "Y", "Z"]);
    }

    #[test]
    fn sample_distinct_and_deterministic() {
        let a = PauliSet::sample(2, 10, 4).unwrap();
        assert_eq!(a.len(), 10);
        let unique: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(unique.len(), 10);
        let b = PauliSet::sample(2, 10, 4).unwrap();
        assert_eq!(a, b);
        let c = PauliSet::sample(2, 10, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_size_bounds() {
        assert!(PauliSet::sample(2, 0, 1).is_err());
        assert!(PauliSet::sample(2, 16, 1).is_err());
        assert!(PauliSet::sample(2, 15, 1).is_ok());
    }

    #[test]
    fn uda_two_qubits() {
        let set = PauliSet::uda(2).unwrap();
        assert_eq!(set.len(), 10);
        assert_eq!(set.members()[0].to_string(), "IX");
        assert_eq!(set.members()[9].to_string(), "ZZ");
        // Set invariants hold by construction; double-check via validation.
        PauliSet::new(2, set.members().to_vec()).unwrap();
    }

    #[test]
    fn uda_three_qubits() {
        let set = PauliSet::uda(3).unwrap();
        assert_eq!(set.len(), 30);
        let names: Vec<String> = set.iter().map(|p| p.to_string()).collect();
        assert!(names.contains(&"XIZ".to_string()));
        assert!(!names.contains(&"XII".to_string()));
        PauliSet::new(3, set.members().to_vec()).unwrap();
    }

    #[test]
    fn uda_rejects_other_sizes() {
        assert!(PauliSet::uda(1).is_err());
        assert!(PauliSet::uda(4).is_err());
    }

    #[test]
    fn uda_byte_identical_serialization() {
        let a = serde_json::to_string(&PauliSet::uda(3).unwrap()).unwrap();
        let b = serde_json::to_string(&PauliSet::uda(3).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn set_validation_errors() {
        let x = PauliString::from_str("X").unwrap();
        let ii = PauliString::from_str("II").unwrap();
        assert!(matches!(
            PauliSet::new(2, vec![ii]),
            Err(Error::IdentityNotAllowed)
        ));
        assert!(matches!(
            PauliSet::new(1, vec![x.clone(), x.clone()]),
            Err(Error::DuplicatePauli(_))
        ));
        assert!(PauliSet::new(2, vec![x]).is_err());
    }

    #[test]
    fn measure_zero_state_exact() {
        let set = PauliSet::enumerate(1).unwrap();
        let zero = PureState::basis(1, 0).unwrap();
        let c = measure_vector(&zero, &set, ShotModel::Exact, 0).unwrap();
        assert!((c[0]).abs() < 1e-12);
        assert!((c[1]).abs() < 1e-12);
        assert!((c[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_reported_equatorial_triple() {
        let set = PauliSet::enumerate(1).unwrap();
        let s = PureState::equatorial(1.1152);
        let c = measure_vector(&s, &set, ShotModel::Exact, 0).unwrap();
        assert!((c[0] - 0.440).abs() < 5e-4);
        assert!((c[1] - 0.898).abs() < 5e-4);
        assert!(c[2].abs() < 5e-4);
    }

    #[test]
    fn finite_shots_close_to_exact() {
        // Binomial std at 10^6 shots is ≤ 10^-3 per entry.
        let set = PauliSet::enumerate(2).unwrap();
        let s = PureState::haar_random(2, 11).unwrap();
        let exact = measure_vector(&s, &set, ShotModel::Exact, 0).unwrap();
        let noisy =
            measure_vector(&s, &set, ShotModel::shots(1_000_000).unwrap(), 17).unwrap();
        for (e, n) in exact.iter().zip(&noisy) {
            assert!((e - n).abs() < 5e-3, "exact {e} vs shot {n}");
        }
    }

    #[test]
    fn finite_shots_are_grid_valued() {
        let set = PauliSet::enumerate(1).unwrap();
        let s = PureState::haar_random(1, 3).unwrap();
        let shots = 1000u64;
        let c = measure_vector(&s, &set, ShotModel::shots(shots).unwrap(), 5).unwrap();
        for v in &c {
            assert!(*v >= -1.0 && *v <= 1.0);
            let steps = (v + 1.0) * shots as f64 / 2.0;
            assert!((steps - steps.round()).abs() < 1e-9, "not on 2/shots grid");
        }
    }

    #[test]
    fn shot_noise_deterministic_per_seed() {
        let set = PauliSet::enumerate(2).unwrap();
        let s = PureState::haar_random(2, 1).unwrap();
        let model = ShotModel::shots(512).unwrap();
        let a = measure_vector(&s, &set, model, 9).unwrap();
        let b = measure_vector(&s, &set, model, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pure_single_qubit_bloch_norm_is_one() {
        let set = PauliSet::enumerate(1).unwrap();
        for seed in 0..100 {
            let s = PureState::haar_random(1, seed).unwrap();
            let c = measure_vector(&s, &set, ShotModel::Exact, 0).unwrap();
            let norm: f64 = c.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_shot_model_rejected() {
        assert!(matches!(ShotModel::shots(0), Err(Error::ZeroShots)));
    }

    #[test]
    fn pauli_set_json_shape() {
        let set = PauliSet::sample(2, 3, 7).unwrap();
        let text = serde_json::to_string(&set).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        // Members serialize as a list of index tuples.
        assert!(value["members"][0].is_array());
        let back: PauliSet = serde_json::from_str(&text).unwrap();
        assert_eq!(set, back);
    }
}
