//! Exact linear algebra in the N-spin permutation-symmetric subspace.
//!
//! The symmetric subspace is an (N+1)-dimensional spin-J representation,
//! J = N/2. Basis vectors are the Dicke states |N, m_z⟩ ordered by
//! m_z = −N/2 … N/2. Spin |0⟩ carries Z = +1, so |N, N/2⟩ = |0…0⟩.

pub mod binomial;
mod operator;
mod rotation;
mod spec;
mod state;

pub use operator::{build_collective_operators, ladder_coefficient, CollectiveOperator, CollectiveOperators};
pub use rotation::YRotation;
pub use spec::{Monomial, OperatorSpec, SpinAxis};
pub use state::{basis_index, mz_of_index, CollectiveState, Ensemble, NORM_TOLERANCE};

pub(crate) use state::check_even;

/// Anything with a fidelity against a Dicke basis state.
pub trait DickeFidelity {
    fn fidelity(&self, m_z: i64) -> crate::Result<f64>;
}

impl DickeFidelity for CollectiveState {
    fn fidelity(&self, m_z: i64) -> crate::Result<f64> {
        CollectiveState::fidelity(self, m_z)
    }
}

impl DickeFidelity for Ensemble {
    fn fidelity(&self, m_z: i64) -> crate::Result<f64> {
        Ensemble::fidelity(self, m_z)
    }
}

/// ⟨N, m_z|ρ|N, m_z⟩ for a pure state or a trajectory ensemble.
pub fn fidelity<S: DickeFidelity + ?Sized>(state: &S, m_z: i64) -> crate::Result<f64> {
    state.fidelity(m_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_state(n: usize, seed: &[(f64, f64)]) -> CollectiveState {
        let amps: Vec<_> = seed.iter().take(n + 1).map(|&(re, im)| num_complex::Complex64::new(re, im)).collect();
        CollectiveState::normalize_any_parity(n, amps).unwrap().0
    }

    proptest! {
        #[test]
        fn rotation_round_trip_and_norm(
            half in 1usize..10,
            theta in -6.3f64..6.3,
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21),
        ) {
            let n = 2 * half;
            prop_assume!(seed.iter().take(n + 1).any(|&(a, b)| a.abs() + b.abs() > 1e-3));
            let psi = random_state(n, &seed);
            let rot = YRotation::new(n);
            let there = rot.rotate(&psi, theta);
            prop_assert!((there.norm_sqr() - 1.0).abs() < 1e-10);
            let back = rot.rotate(&there, -theta);
            for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            let phased = psi.apply_jz_phase(theta, 0.5);
            prop_assert!((phased.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_helper_dispatches() {
        let plus = CollectiveState::plus(4).unwrap();
        assert!((fidelity(&plus, 0).unwrap() - 0.375).abs() < 1e-15);
        assert!((fidelity(&CollectiveState::dicke(4, 0).unwrap(), 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&plus, 3).is_err());
    }
}
