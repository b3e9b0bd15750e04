//! Noiseless single-ancilla phase estimation of J_z.
//!
//! Round j measures U_j = e^{iπ2^{1−j}(J_z − A_{j−1})} through the projector
//! pair P(b) = (I + (−1)^b U_j)/2. The ancilla never appears explicitly; the
//! circuit (H, controlled-U^{2^{K−j}}, R_z feedback, H, readout) is collapsed
//! into that pair. See [`crate::oracle`] for the explicit-ancilla version.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::collective_spin::{basis_index, check_even, CollectiveOperator, CollectiveState};
use crate::error::{invalid, Error, Result};
use crate::noise::RoundEventLog;

/// Largest round index supported by the exact phase reduction.
pub const MAX_ROUNDS: u32 = 62;

/// K = ⌊log₂N⌋ + 1, the fewest bits with 2^{K−1} > N/2.
pub fn bits_required(n_spins: usize) -> u32 {
    assert!(n_spins >= 1);
    n_spins.ilog2() + 1
}

/// Duration of round j, π/(2^{j−1}γ) with γ in rad/s.
pub fn round_time(j: u32, gamma: f64) -> f64 {
    PI / (2f64.powi(j as i32 - 1) * gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreparationPlan {
    pub n_spins: usize,
    /// K = ⌊log₂N⌋ + 1
    pub k: u32,
    pub n_rounds: u32,
    /// rad/s
    pub gamma: f64,
    /// seconds, `round_times[j−1] = t_j`
    pub round_times: Vec<f64>,
    /// m for post-selected preparation of |N, m⟩, 0 otherwise
    pub target_offset: i64,
}

/// Builds the round schedule; `n_rounds` defaults to K.
pub fn make_plan(n_spins: usize, gamma: f64, n_rounds: Option<u32>) -> Result<PreparationPlan> {
    check_even(n_spins)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", format!("{gamma} must be positive and finite")));
    }
    let k = bits_required(n_spins);
    let n_rounds = n_rounds.unwrap_or(k);
    if n_rounds < 1 || n_rounds > k {
        return Err(invalid("n_rounds", format!("{n_rounds} not in 1..={k}")));
    }
    Ok(PreparationPlan {
        n_spins,
        k,
        n_rounds,
        gamma,
        round_times: (1..=n_rounds).map(|j| round_time(j, gamma)).collect(),
        target_offset: 0,
    })
}

impl PreparationPlan {
    pub fn with_target_offset(mut self, m: i64) -> Result<Self> {
        basis_index(self.n_spins, m)?;
        self.target_offset = m;
        Ok(self)
    }

    /// Σ t_j.
    pub fn total_time(&self) -> f64 {
        self.round_times.iter().sum()
    }

    /// Final-round rotation angle 2π/2^K of U = e^{i2πJ_z/2^K}.
    pub fn finest_angle(&self) -> f64 {
        2.0 * PI / 2f64.powi(self.k as i32)
    }

    pub(crate) fn labels(&self) -> Vec<i64> {
        let half = (self.n_spins / 2) as i64;
        (0..=self.n_spins as i64).map(|i| i - half).collect()
    }
}

/// ϑ = π·A_{j−1}·2^{1−j}.
pub fn feedback_angle(j: u32, a_prev: u64) -> f64 {
    PI * a_prev as f64 * 2f64.powi(1 - j as i32)
}

/// e^{iπ2^{1−j}k} with exact ±1 whenever k is a multiple of 2^{j−1}.
pub(crate) fn binary_phase(j: u32, k: i64) -> C64 {
    debug_assert!((1..=MAX_ROUNDS).contains(&j));
    let period = 1i64 << j;
    let half = 1i64 << (j - 1);
    let r = k.rem_euclid(period);
    if r == 0 {
        C64::new(1.0, 0.0)
    } else if r == half {
        C64::new(-1.0, 0.0)
    } else {
        C64::from_polar(1.0, PI * r as f64 / half as f64)
    }
}

/// Diagonal of U_j = e^{iπ2^{1−j}(label − shift)} over integer eigenvalue labels.
pub(crate) fn round_unitary_diag(labels: &[i64], j: u32, shift: i64) -> Vec<C64> {
    let period = 1usize << j.min(usize::BITS - 2);
    if period >= labels.len() {
        return labels.iter().map(|&l| binary_phase(j, l - shift)).collect();
    }
    // only 2^j distinct phases
    let table: Vec<C64> = (0..period as i64).map(|r| binary_phase(j, r)).collect();
    let mask = period as i64 - 1;
    labels.iter().map(|&l| table[((l - shift) & mask) as usize]).collect()
}

/// (I + (−1)^b U)/2 from the diagonal of U.
pub(crate) fn projector_from_unitary(u: &[C64], b: u8) -> Vec<C64> {
    let sign = if b == 0 { 1.0 } else { -1.0 };
    u.iter().map(|z| (C64::new(1.0, 0.0) + z * sign) * 0.5).collect()
}

/// P(b) = (I + (−1)^b U_j)/2 with U_j = e^{iπ2^{1−j}(J_z − A_{j−1})}.
pub fn round_projector(n_spins: usize, j: u32, a_prev: u64, b: u8) -> Result<CollectiveOperator> {
    round_projector_with_offset(n_spins, j, a_prev, 0, b)
}

/// As [`round_projector`] for the operator J_z − offset.
pub fn round_projector_with_offset(n_spins: usize, j: u32, a_prev: u64, offset: i64, b: u8) -> Result<CollectiveOperator> {
    check_even(n_spins)?;
    check_round(j)?;
    if b > 1 {
        return Err(invalid("b", "bit must be 0 or 1"));
    }
    let half = (n_spins / 2) as i64;
    let labels: Vec<i64> = (0..=n_spins as i64).map(|i| i - half).collect();
    let u = round_unitary_diag(&labels, j, offset + a_prev as i64);
    Ok(CollectiveOperator::Diagonal {
        n_spins,
        diag: projector_from_unitary(&u, b),
    })
}

fn check_round(j: u32) -> Result<()> {
    if !(1..=MAX_ROUNDS).contains(&j) {
        return Err(invalid("j", format!("round {j} not in 1..={MAX_ROUNDS}")));
    }
    Ok(())
}

/// Result of one measured round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub bit: u8,
    pub state: CollectiveState,
    /// Born probability of the sampled branch.
    pub probability: f64,
    /// Born probability of outcome 0.
    pub probability_zero: f64,
}

/// Samples one binary measurement described by the diagonal unitary `u`.
///
/// One uniform variate is drawn and compared with P(b=0); this is the
/// shared-randomness discipline the full-state oracle follows too.
pub(crate) fn measure_diagonal<R: Rng + ?Sized>(state: &CollectiveState, u: &[C64], round: u32, rng: &mut R) -> Result<RoundOutcome> {
    let amps = state.amplitudes();
    let (mut p0, mut p1) = (0.0, 0.0);
    // |(1 ± u)/2|² = (1 ± Re u)/2 for unimodular u
    for (a, z) in amps.iter().zip(u) {
        let w = 0.5 * a.norm_sqr();
        p0 += w * (1.0 + z.re);
        p1 += w * (1.0 - z.re);
    }
    if p0 <= 0.0 && p1 <= 0.0 {
        return Err(Error::InconsistentRecord { round });
    }
    let prob_zero = p0 / (p0 + p1);
    let draw: f64 = rng.random();
    let (bit, sign, norm) = if draw < prob_zero { (0, 1.0, p0) } else { (1, -1.0, p1) };
    let raw: Vec<C64> = amps.iter().zip(u).map(|(a, z)| (a + a * z * sign) * 0.5).collect();
    let (state, _) = CollectiveState::normalize_any_parity(state.n_spins(), raw).ok_or(Error::InconsistentRecord { round })?;
    Ok(RoundOutcome {
        bit,
        state,
        probability: norm / (p0 + p1),
        probability_zero: prob_zero,
    })
}

/// Round j of the ideal protocol on `state` with record A_{j−1}.
pub fn run_round<R: Rng + ?Sized>(state: &CollectiveState, j: u32, a_prev: u64, rng: &mut R) -> Result<RoundOutcome> {
    run_round_with_offset(state, j, a_prev, 0, rng)
}

pub fn run_round_with_offset<R: Rng + ?Sized>(state: &CollectiveState, j: u32, a_prev: u64, offset: i64, rng: &mut R) -> Result<RoundOutcome> {
    check_even(state.n_spins())?;
    check_round(j)?;
    let half = (state.n_spins() / 2) as i64;
    let labels: Vec<i64> = (0..=state.n_spins() as i64).map(|i| i - half).collect();
    let u = round_unitary_diag(&labels, j, offset + a_prev as i64);
    measure_diagonal(state, &u, j, rng)
}

/// Eigenvalue from the K-bit record: A if A < 2^{K−1}, else A − 2^K.
pub fn decode(a: u64, k: u32) -> Result<i64> {
    if k == 0 || k > MAX_ROUNDS || a >= 1u64 << k {
        return Err(Error::AccumulatorOutOfRange { a, k });
    }
    let half = 1u64 << (k - 1);
    Ok(if a < half { a as i64 } else { a as i64 - (1i64 << k) })
}

/// A_j = A_{j−1} + 2^{j−1} b_j.
pub fn accumulate(a_prev: u64, j: u32, b: u8) -> u64 {
    a_prev + ((b as u64) << (j - 1))
}

/// Everything observed during one preparation attempt.
#[derive(Debug, Clone)]
pub struct PreparationRecord {
    pub n_spins: usize,
    /// b_1 … b_J as used for feedback (voted bits in noisy runs)
    pub bits: Vec<u8>,
    /// A_0 = 0, A_1, …, A_J
    pub accumulators: Vec<u64>,
    pub decoded_mz: i64,
    pub final_state: CollectiveState,
    /// ⟨N, decoded|ψ_final⟩|²
    pub fidelity: f64,
    /// Born probability of each sampled branch (first repetition in noisy runs)
    pub born_probabilities: Vec<f64>,
    /// Per-round noise log; empty for ideal runs.
    pub round_logs: Vec<RoundEventLog>,
    /// Post-selection verdict (always true for unconditioned runs).
    pub accepted: bool,
    /// Set when the record maps to no unique eigenvalue inside the spectrum.
    pub ambiguous: bool,
}

impl PreparationRecord {
    pub fn final_accumulator(&self) -> u64 {
        *self.accumulators.last().expect("A_0 is always present")
    }

    /// Product of the sampled-branch Born probabilities.
    pub fn path_probability(&self) -> f64 {
        self.born_probabilities.iter().product()
    }

    /// All rounds met the success conditions (noisy runs); true for ideal runs.
    pub fn all_rounds_succeeded(&self) -> bool {
        self.round_logs.iter().all(RoundEventLog::succeeded)
    }
}

/// Maps a J-round record measured on J_z − offset to m_z.
pub(crate) fn decode_with_offset(n_spins: usize, a: u64, rounds: u32, offset: i64) -> Result<i64> {
    let d = decode(a, rounds)?;
    let half = (n_spins / 2) as i64;
    let mut m = offset + d;
    // Boundary value 2^{J−1} is assigned to the negative branch; for targeted
    // runs pick the representative mod 2^J that lies in the spectrum.
    let period = 1i64 << rounds;
    if m < -half && m + period <= half {
        m += period;
    } else if m > half && m - period >= -half {
        m -= period;
    }
    Ok(m)
}

/// Fidelity against the decoded value; 0 if a corrupted record decodes
/// outside the spectrum.
pub(crate) fn decoded_fidelity(state: &CollectiveState, m: i64) -> (f64, bool) {
    match state.fidelity(m) {
        Ok(f) => (f, false),
        Err(_) => (0.0, true),
    }
}

/// Runs rounds 1..=n_rounds from |+⟩^⊗N.
pub fn run_preparation<R: Rng + ?Sized>(plan: &PreparationPlan, rng: &mut R) -> Result<PreparationRecord> {
    let initial = CollectiveState::plus(plan.n_spins)?;
    run_from(plan, initial, rng)
}

pub(crate) fn run_from<R: Rng + ?Sized>(plan: &PreparationPlan, initial: CollectiveState, rng: &mut R) -> Result<PreparationRecord> {
    let labels = plan.labels();
    let mut state = initial;
    let mut a = 0u64;
    let mut bits = Vec::with_capacity(plan.n_rounds as usize);
    let mut accumulators = vec![0u64];
    let mut born = Vec::with_capacity(plan.n_rounds as usize);
    for j in 1..=plan.n_rounds {
        let u = round_unitary_diag(&labels, j, plan.target_offset + a as i64);
        let out = measure_diagonal(&state, &u, j, rng)?;
        a = accumulate(a, j, out.bit);
        bits.push(out.bit);
        accumulators.push(a);
        born.push(out.probability);
        state = out.state;
    }
    let decoded_mz = decode_with_offset(plan.n_spins, a, plan.n_rounds, plan.target_offset)?;
    let (fidelity, ambiguous) = decoded_fidelity(&state, decoded_mz);
    Ok(PreparationRecord {
        n_spins: plan.n_spins,
        bits,
        accumulators,
        decoded_mz,
        final_state: state,
        fidelity,
        born_probabilities: born,
        round_logs: Vec::new(),
        accepted: true,
        ambiguous,
    })
}

/// χ with ½[cos χ − sin χ]² = m/N + ½, i.e. sin 2χ = −2m/N.
pub fn tilt_angle(n_spins: usize, m: i64) -> Result<f64> {
    basis_index(n_spins, m)?;
    let s = -2.0 * m as f64 / n_spins as f64;
    assert!((-1.0..=1.0).contains(&s), "|m| <= N/2 guarantees a real solution");
    Ok(0.5 * s.asin())
}

/// P̃(m_z) = C(N, m_z+N/2) p^{m_z+N/2}(1−p)^{N/2−m_z} with p = m/N + ½.
pub fn tilted_distribution(n_spins: usize, m: i64) -> Result<Vec<f64>> {
    basis_index(n_spins, m)?;
    let p = m as f64 / n_spins as f64 + 0.5;
    let n = n_spins as u64;
    Ok((0..=n).map(|i| crate::collective_spin::binomial::binomial_pmf(n, i, p)).collect())
}

/// Post-selected preparation of |N, m⟩.
///
/// Starts from e^{−i2χJ_y}|+⟩^⊗N = (√p|0⟩ + √(1−p)|1⟩)^⊗N with p = m/N + ½,
/// measures J_z − m for all K rounds and accepts iff the decoded offset is 0.
pub fn run_targeted_preparation<R: Rng + ?Sized>(n_spins: usize, m: i64, gamma: f64, rng: &mut R) -> Result<PreparationRecord> {
    let plan = make_plan(n_spins, gamma, None)?.with_target_offset(m)?;
    let chi = tilt_angle(n_spins, m)?;
    let p = 0.5 * (chi.cos() - chi.sin()).powi(2);
    let initial = CollectiveState::product(n_spins, p)?;
    let mut record = run_from(&plan, initial, rng)?;
    record.accepted = record.final_accumulator() == 0;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective_spin::binomial::binomial_pmf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn plan_examples() {
        let p = make_plan(500, 5e6, None).unwrap();
        assert_eq!(p.k, 9);
        assert!((p.finest_angle() - 0.012).abs() < 1e-3);
        // Σ_{j=1}^{K} t_j = (π/γ)(2 − 2^{1−K})
        let expected = PI / 5e6 * (2.0 - 2f64.powi(1 - 9));
        assert!((p.total_time() - expected).abs() < 1e-18);
        assert!(p.total_time() < 2.0 * PI / 5e6);
        assert_eq!(make_plan(4, 1.0, None).unwrap().k, 3);
        assert_eq!(bits_required(2), 2);
        assert_eq!(bits_required(16), 5);
        assert_eq!(bits_required(100), 7);
        assert_eq!(bits_required(1_000_000), 20);
    }

    #[test]
    fn plan_errors() {
        assert!(matches!(make_plan(5, 1.0, None), Err(Error::OddSpinNumber(5))));
        assert!(make_plan(4, 0.0, None).is_err());
        assert!(make_plan(4, -1.0, None).is_err());
        assert!(make_plan(4, 1.0, Some(0)).is_err());
        assert!(make_plan(4, 1.0, Some(4)).is_err());
    }

    #[test]
    fn feedback_angle_examples() {
        assert_eq!(feedback_angle(1, 0), 0.0);
        assert!((feedback_angle(2, 1) - PI / 2.0).abs() < 1e-15);
        assert!((feedback_angle(4, 5) - 5.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(3, 9).unwrap(), 3);
        assert_eq!(decode(509, 9).unwrap(), -3);
        assert_eq!(decode(256, 9).unwrap(), -256);
        assert!(decode(512, 9).is_err());
    }

    #[test]
    fn projector_examples() {
        let d = CollectiveState::dicke(4, 0).unwrap();
        let p0 = round_projector(4, 1, 0, 0).unwrap();
        let out = d.apply_operator(&p0).unwrap();
        assert_eq!(out, d.amplitudes().to_vec());
        // completeness
        for j in 1..=3 {
            for a in 0..(1u64 << (j - 1)) {
                let p0 = round_projector(6, j, a, 0).unwrap();
                let p1 = round_projector(6, j, a, 1).unwrap();
                let sum = p0.linear_combination(C64::new(1.0, 0.0), &p1, C64::new(1.0, 0.0)).unwrap();
                assert_eq!(sum.max_abs_diff(&CollectiveOperator::identity(6)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn projectors_orthogonal_on_reachable_support() {
        let n = 40;
        let mut r = rng(3);
        for _ in 0..20 {
            let mut state = CollectiveState::plus(n).unwrap();
            let mut a = 0;
            for j in 1..=bits_required(n) {
                let p0 = round_projector(n, j, a, 0).unwrap();
                let p1 = round_projector(n, j, a, 1).unwrap();
                let both = state.apply_operator(&p0.matmul(&p1).unwrap()).unwrap();
                assert!(both.iter().all(|z| z.norm() < 1e-12));
                let out = run_round(&state, j, a, &mut r).unwrap();
                a = accumulate(a, j, out.bit);
                state = out.state;
            }
        }
    }

    #[test]
    fn eigenstate_round_is_deterministic() {
        let d = CollectiveState::dicke(4, 0).unwrap();
        let out = run_round(&d, 1, 0, &mut rng(1)).unwrap();
        assert_eq!(out.bit, 0);
        assert_eq!(out.probability, 1.0);
        assert_eq!(out.state, d);
    }

    #[test]
    fn first_round_splits_parity() {
        let s = CollectiveState::plus(4).unwrap();
        let out = run_round(&s, 1, 0, &mut rng(1)).unwrap();
        assert!((out.probability_zero - 0.5).abs() < 1e-15);
    }

    #[test]
    fn support_invariant_after_each_round() {
        let n = 100;
        let plan = make_plan(n, 1.0, None).unwrap();
        for seed in 0..50 {
            let rec = run_preparation(&plan, &mut rng(seed)).unwrap();
            // replay to inspect intermediate states
            let mut r = rng(seed);
            let mut state = CollectiveState::plus(n).unwrap();
            for j in 1..=plan.n_rounds {
                let out = run_round(&state, j, rec.accumulators[j as usize - 1], &mut r).unwrap();
                let a_j = rec.accumulators[j as usize] as i64;
                for (i, amp) in out.state.amplitudes().iter().enumerate() {
                    let m = i as i64 - 50;
                    if amp.norm() != 0.0 {
                        assert_eq!((m - a_j).rem_euclid(1 << j), 0);
                    }
                }
                state = out.state;
            }
        }
    }

    #[test]
    fn full_rounds_end_in_basis_state_with_telescoping_probability() {
        for n in [4usize, 16, 100] {
            let plan = make_plan(n, 1.0, None).unwrap();
            for seed in 0..30 {
                let rec = run_preparation(&plan, &mut rng(seed)).unwrap();
                assert_eq!(rec.final_state.support(0.0).len(), 1);
                assert!((rec.fidelity - 1.0).abs() < 1e-10);
                let p = binomial_pmf(n as u64, (rec.decoded_mz + n as i64 / 2) as u64, 0.5);
                assert!((rec.path_probability() - p).abs() < 1e-10 * p.max(1e-300) + 1e-15);
            }
        }
    }

    #[test]
    fn determinism() {
        let plan = make_plan(64, 1.0, Some(5)).unwrap();
        let a = run_preparation(&plan, &mut rng(99)).unwrap();
        let b = run_preparation(&plan, &mut rng(99)).unwrap();
        assert_eq!(a.bits, b.bits);
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
    }

    #[test]
    fn truncation_fidelity_grows_with_rounds() {
        let n = 200;
        let k = bits_required(n);
        let mut prev = 0.0;
        for rounds in 1..=k {
            let plan = make_plan(n, 1.0, Some(rounds)).unwrap();
            let mean: f64 = (0..300).map(|s| run_preparation(&plan, &mut rng(s)).unwrap().fidelity).sum::<f64>() / 300.0;
            assert!(mean >= prev - 1e-12, "rounds={rounds}: {mean} < {prev}");
            prev = mean;
        }
        assert!((prev - 1.0).abs() < 1e-10);
    }

    #[test]
    fn targeted_zero_matches_standard_scheme() {
        assert_eq!(tilt_angle(10, 0).unwrap(), 0.0);
        let plan = make_plan(10, 1.0, None).unwrap();
        for seed in 0..20 {
            let a = run_preparation(&plan, &mut rng(seed)).unwrap();
            let b = run_targeted_preparation(10, 0, 1.0, &mut rng(seed)).unwrap();
            assert_eq!(a.bits, b.bits);
            assert_eq!(a.decoded_mz, b.decoded_mz);
            assert_eq!(b.accepted, b.decoded_mz == 0);
        }
    }

    #[test]
    fn targeted_accepted_states_are_exact() {
        let mut accepted = 0;
        for seed in 0..200 {
            let rec = run_targeted_preparation(40, 6, 1.0, &mut rng(seed)).unwrap();
            if rec.accepted {
                accepted += 1;
                assert_eq!(rec.decoded_mz, 6);
                assert!((rec.fidelity - 1.0).abs() < 1e-10);
            } else {
                assert_ne!(rec.decoded_mz, 6);
            }
        }
        assert!(accepted > 0);
    }

    #[test]
    fn targeted_decoding_covers_full_range() {
        // |m_z − m| can reach N; every outcome must decode inside the spectrum.
        let n = 16;
        for m in [-8i64, 8] {
            for seed in 0..300 {
                let rec = run_targeted_preparation(n, m, 1.0, &mut rng(seed)).unwrap();
                assert!((rec.fidelity - 1.0).abs() < 1e-10, "m={m} seed={seed}");
            }
        }
    }

    #[test]
    fn tilt_satisfies_defining_relation() {
        for (n, m) in [(100usize, 10i64), (100, -50), (100, 50), (8, 3)] {
            let chi = tilt_angle(n, m).unwrap();
            let p = 0.5 * (chi.cos() - chi.sin()).powi(2);
            assert!((p - (m as f64 / n as f64 + 0.5)).abs() < 1e-14);
        }
        let dist = tilted_distribution(100, 10).unwrap();
        let argmax = dist.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(argmax as i64 - 50, 10);
    }
}
