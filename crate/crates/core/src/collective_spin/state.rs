use num_complex::Complex64 as C64;

use super::binomial::ln_binomial_pmf;
use super::operator::CollectiveOperator;
use super::rotation::YRotation;
use super::spec::OperatorSpec;
use crate::error::{Error, Result};

/// Tolerance on Σ|a|² for states that claim to be normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Index of `m_z` in the Dicke basis of `n` spins (`m_z + N/2`).
pub fn basis_index(n: usize, m_z: i64) -> Result<usize> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddSpinNumber(n));
    }
    let half = (n / 2) as i64;
    if m_z < -half || m_z > half {
        return Err(Error::MzOutOfRange { n, m_z });
    }
    Ok((m_z + half) as usize)
}

/// `m_z` value of a basis index (half-integer when N is odd).
pub fn mz_of_index(n: usize, index: usize) -> f64 {
    index as f64 - n as f64 / 2.0
}

/// Pure state of N spin-½ in the permutation-symmetric subspace.
///
/// Amplitude `i` multiplies the Dicke state |N, m_z = i − N/2⟩, i.e. the
/// uniform superposition of bit strings with N − i ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    n_spins: usize,
    amps: Vec<C64>,
}

impl CollectiveState {
    /// Normalized state from raw amplitudes. N must be even.
    pub fn new(n_spins: usize, amps: Vec<C64>) -> Result<Self> {
        check_even(n_spins)?;
        Self::new_any_parity(n_spins, amps)
    }

    /// As [`CollectiveState::new`] but accepts odd N (half-integer m_z).
    pub fn new_any_parity(n_spins: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != n_spins + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_spins + 1,
                got: amps.len(),
            });
        }
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_spins, amps })
    }

    /// Rescales `amps` to unit norm and returns the state with the
    /// squared norm it had before rescaling. `None` if the vector is zero.
    pub fn normalize_any_parity(n_spins: usize, mut amps: Vec<C64>) -> Option<(Self, f64)> {
        debug_assert_eq!(amps.len(), n_spins + 1);
        let norm = norm_sqr(&amps);
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        let scale = 1.0 / norm.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Some((Self { n_spins, amps }, norm))
    }

    pub(crate) fn from_raw(n_spins: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), n_spins + 1);
        Self { n_spins, amps }
    }

    /// Dicke state |N, m_z⟩.
    pub fn dicke(n_spins: usize, m_z: i64) -> Result<Self> {
        let idx = basis_index(n_spins, m_z)?;
        Ok(Self::basis_any_parity(n_spins, idx))
    }

    pub(crate) fn basis_any_parity(n_spins: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); n_spins + 1];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_spins, amps }
    }

    /// |+⟩^⊗N, amplitudes √(C(N, m_z + N/2) / 2^N).
    pub fn plus(n_spins: usize) -> Result<Self> {
        Self::product(n_spins, 0.5)
    }

    /// (√p |0⟩ + √(1−p) |1⟩)^⊗N with real nonnegative amplitudes.
    pub fn product(n_spins: usize, p_zero: f64) -> Result<Self> {
        check_even(n_spins)?;
        Self::product_any_parity(n_spins, p_zero)
    }

    pub fn product_any_parity(n_spins: usize, p_zero: f64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::TooFewSpins { n: n_spins, min: 1 });
        }
        if !(0.0..=1.0).contains(&p_zero) {
            return Err(crate::error::invalid("p_zero", format!("{p_zero} not in [0, 1]")));
        }
        let n = n_spins as u64;
        // index i has i zeros.
        let amps: Vec<C64> = (0..=n)
            .map(|i| C64::new((0.5 * ln_binomial_pmf(n, i, p_zero)).exp(), 0.0))
            .collect();
        let (state, _) = Self::normalize_any_parity(n_spins, amps).expect("binomial mass is nonzero");
        Ok(state)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, m_z: i64) -> Result<C64> {
        Ok(self.amps[basis_index(self.n_spins, m_z)?])
    }

    /// |amplitude|² over the basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &CollectiveState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// e^{−iθJ_y}|ψ⟩.
    pub fn rotate_y(&self, theta: f64) -> CollectiveState {
        YRotation::new(self.n_spins).rotate(self, theta)
    }

    /// Multiplies the amplitude at m_z by e^{iφ(m_z − offset)}.
    pub fn apply_jz_phase(&self, phi: f64, offset: f64) -> CollectiveState {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| a * C64::from_polar(1.0, phi * (mz_of_index(self.n_spins, i) - offset)))
            .collect();
        Self::from_raw(self.n_spins, amps)
    }

    /// Applies `op` without renormalizing; returns the raw vector.
    pub fn apply_operator(&self, op: &CollectiveOperator) -> Result<Vec<C64>> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
            });
        }
        Ok(op.apply(&self.amps))
    }

    /// ⟨ψ|Ô|ψ⟩ for a symbolic polynomial in the collective operators.
    pub fn expectation(&self, op: &OperatorSpec) -> C64 {
        let applied = op.apply(self.n_spins, &self.amps);
        self.amps.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum()
    }

    /// ⟨ψ|Ô|ψ⟩ for an explicit operator matrix.
    pub fn expectation_matrix(&self, op: &CollectiveOperator) -> Result<C64> {
        let applied = self.apply_operator(op)?;
        Ok(self.amps.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
    }

    /// ⟨N, m_z|ψ⟩|².
    pub fn fidelity(&self, m_z: i64) -> Result<f64> {
        Ok(self.amplitude(m_z)?.norm_sqr())
    }

    /// Indices with |amplitude|² above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A weighted ensemble of pure trajectories, standing in for a mixed state.
#[derive(Debug, Clone, Default)]
pub struct Ensemble {
    members: Vec<(f64, CollectiveState)>,
}

impl Ensemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, weight: f64, state: CollectiveState) {
        self.members.push((weight, state));
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// ⟨N, m_z|ρ|N, m_z⟩ with ρ = Σ w_k |ψ_k⟩⟨ψ_k| / Σ w_k.
    pub fn fidelity(&self, m_z: i64) -> Result<f64> {
        let total: f64 = self.members.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(crate::error::invalid("ensemble", "empty or zero total weight"));
        }
        let mut acc = 0.0;
        for (w, s) in &self.members {
            acc += w * s.fidelity(m_z)?;
        }
        Ok(acc / total)
    }
}

impl FromIterator<(f64, CollectiveState)> for Ensemble {
    fn from_iter<T: IntoIterator<Item = (f64, CollectiveState)>>(iter: T) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn check_even(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddSpinNumber(n));
    }
    if n < 2 {
        return Err(Error::TooFewSpins { n, min: 2 });
    }
    Ok(())
}
