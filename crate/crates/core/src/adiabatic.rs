//! Phase estimation driven by an adiabatic passage through the ancilla–spin
//! avoided crossing.
//!
//! The passage leaves the conditional phase V(δt) = exp(i gδt/N (J_z² − J_z))
//! on the ancilla-|1⟩ branch. Rounds measure the integer μ = (m² − m)/2 with
//! dwell δt_j = πN·2^{−j}/g, so V(δt_j) = e^{iπ2^{1−j}μ} and the §II machinery
//! carries over with J_z replaced by μ. The m-independent part of the passage
//! phase is removed exactly.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::collective_spin::{basis_index, check_even, CollectiveOperator, CollectiveState};
use crate::error::{invalid, Error, Result};
use crate::phase_estimation::{accumulate, decoded_fidelity, measure_diagonal, round_unitary_diag, tilt_angle, PreparationRecord, MAX_ROUNDS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticParams {
    pub n_spins: usize,
    /// rad/s
    pub g: f64,
    /// NV transition frequencies, rad/s
    pub omega1: f64,
    pub omega2: f64,
}

impl AdiabaticParams {
    pub fn new(n_spins: usize, g: f64, omega1: f64, omega2: f64) -> Result<Self> {
        check_even(n_spins)?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(invalid("g", format!("{g} must be positive and finite")));
        }
        if !(omega2 > omega1) {
            return Err(invalid("omega2", format!("ω₂ = {omega2} must exceed ω₁ = {omega1}")));
        }
        Ok(Self { n_spins, g, omega1, omega2 })
    }
}

/// G(m_z) = g√(N/2(N/2+1) − m_z(m_z−1)).
pub fn effective_coupling(m_z: i64, n_spins: usize, g: f64) -> Result<f64> {
    basis_index(n_spins, m_z)?;
    let j = n_spins as f64 / 2.0;
    let m = m_z as f64;
    Ok(g * (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt())
}

/// (E₊, E₋) of the two-level block coupling |1⟩|N,m_z⟩ and |0⟩|N,m_z−1⟩.
pub fn subspace_eigenvalues(m_z: i64, omega: f64, p: &AdiabaticParams) -> Result<(f64, f64)> {
    let half = (p.n_spins / 2) as i64;
    if m_z == -half {
        return Err(invalid("m_z", "the block at m_z = −N/2 is one-dimensional"));
    }
    let gc = effective_coupling(m_z, p.n_spins, p.g)?;
    let root = (gc * gc + (0.5 * (p.omega2 - omega)).powi(2)).sqrt();
    let base = 0.5 * p.omega2 + (p.n_spins as f64 / 2.0 - m_z as f64) * p.omega1;
    Ok((base + root, base - root))
}

/// Gap E₊ − E₋.
pub fn gap(m_z: i64, omega: f64, p: &AdiabaticParams) -> Result<f64> {
    let (a, b) = subspace_eigenvalues(m_z, omega, p)?;
    Ok(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseComparison {
    /// −G(m_z)δt
    pub exact: f64,
    /// gδt((m_z² − m_z)/√(N(N+2)) − √(N(N+2))/2)
    pub taylor: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

pub fn accumulated_phase(m_z: i64, dwell: f64, n_spins: usize, g: f64) -> Result<PhaseComparison> {
    let exact = -effective_coupling(m_z, n_spins, g)? * dwell;
    let n = n_spins as f64;
    let s = (n * (n + 2.0)).sqrt();
    let m = m_z as f64;
    let taylor = g * dwell * ((m * m - m) / s - 0.5 * s);
    let abs_diff = (exact - taylor).abs();
    let rel_diff = if exact == 0.0 { 0.0 } else { abs_diff / exact.abs() };
    Ok(PhaseComparison {
        exact,
        taylor,
        abs_diff,
        rel_diff,
    })
}

/// Ancilla-|1⟩ branch of V(δt): diag exp(i gδt/N (m_z² − m_z)).
pub fn effective_unitary(n_spins: usize, g: f64, dwell: f64) -> Result<CollectiveOperator> {
    check_even(n_spins)?;
    if !(dwell >= 0.0) {
        return Err(invalid("dwell", format!("{dwell} must be non-negative")));
    }
    let half = (n_spins / 2) as i64;
    let diag = (-half..=half)
        .map(|m| {
            let k = (m * m - m) as f64;
            C64::from_polar(1.0, g * dwell / n_spins as f64 * k)
        })
        .collect();
    Ok(CollectiveOperator::Diagonal { n_spins, diag })
}

/// μ = (m² − m)/2.
pub fn triangular_label(m_z: i64) -> i64 {
    (m_z * m_z - m_z) / 2
}

/// m ≥ 1 with (m² − m)/2 = μ, or `None` if μ is not triangular or is 0.
pub fn invert_label(mu: u64) -> Option<i64> {
    if mu == 0 {
        return None;
    }
    let disc = 1 + 8 * mu;
    let r = disc.isqrt();
    if r * r != disc {
        return None;
    }
    Some(r.div_ceil(2) as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticPlan {
    pub n_spins: usize,
    pub g: f64,
    /// initial-state center m ≈ 2√N
    pub center: i64,
    /// window 0 ≤ m ≤ window_max ≈ 4√N
    pub window_max: i64,
    pub n_rounds: u32,
    /// δt_j = πN·2^{−j}/g
    pub dwell_times: Vec<f64>,
}

pub fn make_adiabatic_plan(n_spins: usize, g: f64) -> Result<AdiabaticPlan> {
    check_even(n_spins)?;
    if !(g > 0.0 && g.is_finite()) {
        return Err(invalid("g", format!("{g} must be positive and finite")));
    }
    let half = (n_spins / 2) as i64;
    let root = (n_spins as f64).sqrt();
    let center = ((2.0 * root).round() as i64).min(half);
    let window_max = ((4.0 * root).round() as i64).min(half);
    let mu_max = triangular_label(window_max).max(1) as u64;
    let n_rounds = (mu_max + 1).next_power_of_two().trailing_zeros().max(1);
    if n_rounds > MAX_ROUNDS {
        return Err(Error::OutOfRegime(format!("{n_rounds} rounds needed")));
    }
    let dwell_times = (1..=n_rounds).map(|j| PI * n_spins as f64 * 2f64.powi(-(j as i32)) / g).collect();
    Ok(AdiabaticPlan {
        n_spins,
        g,
        center,
        window_max,
        n_rounds,
        dwell_times,
    })
}

impl AdiabaticPlan {
    /// Appendix-A product state with p = center/N + ½.
    pub fn initial_state(&self) -> Result<CollectiveState> {
        let chi = tilt_angle(self.n_spins, self.center)?;
        CollectiveState::product(self.n_spins, 0.5 * (chi.cos() - chi.sin()).powi(2))
    }

    /// Probability of the initial state outside 0 ≤ m ≤ window_max.
    pub fn mass_outside_window(&self) -> Result<f64> {
        let s = self.initial_state()?;
        let half = (self.n_spins / 2) as i64;
        Ok(s.probabilities()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let m = *i as i64 - half;
                m < 0 || m > self.window_max
            })
            .map(|(_, p)| p)
            .sum())
    }
}

/// One seeded run of phase estimation on μ = (J_z² − J_z)/2.
pub fn adiabatic_preparation<R: Rng + ?Sized>(plan: &AdiabaticPlan, rng: &mut R) -> Result<PreparationRecord> {
    let half = (plan.n_spins / 2) as i64;
    let labels: Vec<i64> = (-half..=half).map(triangular_label).collect();
    let mut state = plan.initial_state()?;
    let mut a = 0u64;
    let mut bits = Vec::with_capacity(plan.n_rounds as usize);
    let mut accumulators = vec![0u64];
    let mut born = Vec::with_capacity(plan.n_rounds as usize);
    for j in 1..=plan.n_rounds {
        let u = round_unitary_diag(&labels, j, a as i64);
        let out = measure_diagonal(&state, &u, j, rng)?;
        a = accumulate(a, j, out.bit);
        bits.push(out.bit);
        accumulators.push(a);
        born.push(out.probability);
        state = out.state;
    }
    let decoded = invert_label(a).filter(|&m| m <= half);
    let (decoded_mz, fidelity, ambiguous) = match decoded {
        Some(m) => {
            let (f, bad) = decoded_fidelity(&state, m);
            (m, f, bad)
        }
        None => (0, 0.0, true),
    };
    Ok(PreparationRecord {
        n_spins: plan.n_spins,
        bits,
        accumulators,
        decoded_mz,
        final_state: state,
        fidelity,
        born_probabilities: born,
        round_logs: Vec::new(),
        accepted: !ambiguous,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coupling_examples() {
        for n in [4usize, 100, 400] {
            let g = 1.3;
            let top = effective_coupling(n as i64 / 2, n, g).unwrap();
            assert!((top - g * (n as f64).sqrt()).abs() < 1e-12 * top);
            let j = n as f64 / 2.0;
            assert!((effective_coupling(0, n, g).unwrap() - g * (j * (j + 1.0)).sqrt()).abs() < 1e-12);
            let half = n as i64 / 2;
            for m in (1 - half)..=half {
                assert_eq!(effective_coupling(m, n, g).unwrap(), effective_coupling(1 - m, n, g).unwrap());
            }
        }
        assert!(effective_coupling(3, 4, 1.0).is_err());
    }

    #[test]
    fn coupling_peaks_at_half() {
        let n = 40usize;
        let j = n as f64 / 2.0;
        let peak = (j * (j + 1.0) + 0.25).sqrt();
        for m in -20i64..=20 {
            assert!(effective_coupling(m, n, 1.0).unwrap() < peak);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let p = AdiabaticParams::new(100, 2.0, 10.0, 30.0).unwrap();
        for m in [-10i64, 0, 7, 50] {
            let gc = effective_coupling(m, 100, 2.0).unwrap();
            assert!((gap(m, p.omega2, &p).unwrap() - 2.0 * gc).abs() < 1e-12);
            assert!(gap(m, p.omega2 + 1.0, &p).unwrap() > gap(m, p.omega2, &p).unwrap());
        }
        assert!(subspace_eigenvalues(-50, 30.0, &p).is_err());
        // decoupled limit: diagonal entries (N/2−m)ω₁ + ω/2 and (N/2−m)ω₁ + ω₂ − ω/2
        let q = AdiabaticParams::new(100, 1e-12, 10.0, 30.0).unwrap();
        let (hi, lo) = subspace_eigenvalues(3, 20.0, &q).unwrap();
        assert!((hi - (47.0 * 10.0 + 30.0 - 10.0)).abs() < 1e-9);
        assert!((lo - (47.0 * 10.0 + 10.0)).abs() < 1e-9);
        // gap at crossing for m = O(√N): 2G ≈ gN, G ≈ gN/2
        let n = 10_000usize;
        let gc = effective_coupling(100, n, 1.0).unwrap();
        assert!((gc / (n as f64 / 2.0) - 1.0).abs() < 1e-3);
        assert!(AdiabaticParams::new(100, 1.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn phase_examples() {
        let z = accumulated_phase(5, 0.0, 400, 1.0).unwrap();
        assert_eq!(z.exact, 0.0);
        assert_eq!(z.taylor, 0.0);
        let c = accumulated_phase(40, 1e-3, 400, 1e6).unwrap();
        assert!(c.rel_diff < 0.01);
        assert_eq!(accumulated_phase(0, 1e-3, 400, 1e6).unwrap().exact, accumulated_phase(1, 1e-3, 400, 1e6).unwrap().exact);
        let mut prev = 0.0;
        for m in 1..=80 {
            let d = accumulated_phase(m, 1e-3, 400, 1e6).unwrap().abs_diff;
            assert!(d >= prev, "m={m}");
            prev = d;
        }
    }

    #[test]
    fn effective_unitary_examples() {
        let id = effective_unitary(10, 2.0, 0.0).unwrap();
        assert_eq!(id, CollectiveOperator::identity(10));
        let v = effective_unitary(10, 2.0, 0.7).unwrap().to_dense();
        assert_eq!(v[(5, 5)], v[(6, 6)]); // m_z = 0 and 1
        let expected = C64::from_polar(1.0, 2.0 * 0.7 / 10.0 * (25.0 / 1.0 - 5.0));
        assert!((v[(10, 10)] - expected).norm() < 1e-12);
        let a = effective_unitary(10, 2.0, 0.3).unwrap();
        let b = effective_unitary(10, 2.0, 0.4).unwrap();
        let ab = a.matmul(&b).unwrap();
        assert!(ab.max_abs_diff(&v_of(10, 2.0, 0.7)).unwrap() < 1e-12);
    }

    fn v_of(n: usize, g: f64, dt: f64) -> CollectiveOperator {
        effective_unitary(n, g, dt).unwrap()
    }

    #[test]
    fn dwell_schedule_gives_binary_phases() {
        let plan = make_adiabatic_plan(400, 3.0).unwrap();
        assert_eq!(plan.n_rounds, 12);
        assert_eq!(plan.center, 40);
        assert_eq!(plan.window_max, 80);
        for (j, &dt) in plan.dwell_times.iter().enumerate() {
            let v = effective_unitary(400, 3.0, dt).unwrap().to_dense();
            for m in [-3i64, 0, 5, 40, 77] {
                let i = (m + 200) as usize;
                let expected = crate::phase_estimation::binary_phase(j as u32 + 1, triangular_label(m));
                assert!((v[(i, i)] - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn label_inversion() {
        for m in 2..200i64 {
            assert_eq!(invert_label(triangular_label(m) as u64), Some(m));
        }
        assert_eq!(invert_label(0), None);
        assert_eq!(invert_label(2), None);
    }

    #[test]
    fn degenerate_pair_is_never_split() {
        let mut amps = vec![C64::new(0.0, 0.0); 17];
        amps[8] = C64::new(0.6, 0.0);
        amps[9] = C64::new(0.8, 0.0);
        let s = CollectiveState::new(16, amps).unwrap();
        for dt in [0.1, 0.37, 2.0] {
            let out = s.apply_operator(&effective_unitary(16, 1.0, dt).unwrap()).unwrap();
            assert!((out[8] / s.amplitudes()[8] - out[9] / s.amplitudes()[9]).norm() < 1e-12);
        }
    }

    #[test]
    fn initial_state_window_mass() {
        let plan = make_adiabatic_plan(400, 1.0).unwrap();
        assert!(plan.mass_outside_window().unwrap() < 1e-3);
    }

    #[test]
    fn preparation_runs_are_exact_when_accepted() {
        let plan = make_adiabatic_plan(100, 1.0).unwrap();
        let mut accepted = 0;
        for seed in 0..100 {
            let rec = adiabatic_preparation(&plan, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            if rec.accepted {
                accepted += 1;
                assert!(rec.fidelity > 0.99, "seed {seed}: {}", rec.fidelity);
            }
        }
        assert!(accepted > 90);
    }
}
