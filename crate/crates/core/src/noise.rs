//! Ancilla noise: dephasing as readout flips, decay during the echo-integrated
//! controlled rotation, timing jitter, and M-fold majority voting.
//!
//! Random draws per repetition, in order, each only when its channel is on:
//! decay (1, plus 2 more if it fires: decay time and recorded bit), jitter (1
//! normal), Born outcome (1), dephasing flip (1). Ties in an even vote take one
//! further draw. With every channel off only the Born draw remains, so the
//! noisy pipeline consumes the stream exactly like the ideal one.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::collective_spin::{binomial::binomial_pmf, CollectiveState};
use crate::error::{invalid, Result};
use crate::phase_estimation::{accumulate, decode_with_offset, decoded_fidelity, measure_diagonal, round_unitary_diag, PreparationPlan, PreparationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    /// seconds, `f64::INFINITY` disables decay
    pub t1: f64,
    /// seconds, `f64::INFINITY` disables dephasing
    pub t_phi: f64,
    /// rad/s
    pub gamma: f64,
    /// seconds, 0 disables jitter
    pub sigma_t: f64,
    pub repetitions: u32,
}

impl NoiseModel {
    pub fn noiseless(gamma: f64) -> Self {
        Self {
            t1: f64::INFINITY,
            t_phi: f64::INFINITY,
            gamma,
            sigma_t: 0.0,
            repetitions: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) {
            return Err(invalid("t1", format!("{} must be positive or infinite", self.t1)));
        }
        if !(self.t_phi > 0.0) {
            return Err(invalid("t_phi", format!("{} must be positive or infinite", self.t_phi)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("{} must be positive and finite", self.gamma)));
        }
        if !(self.sigma_t >= 0.0 && self.sigma_t.is_finite()) {
            return Err(invalid("sigma_t", format!("{} must be non-negative", self.sigma_t)));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "M must be at least 1"));
        }
        Ok(())
    }

    /// κ = 1/T1.
    pub fn kappa(&self) -> f64 {
        1.0 / self.t1
    }

    pub fn is_noiseless(&self) -> bool {
        self.t1.is_infinite() && self.t_phi.is_infinite() && self.sigma_t == 0.0
    }
}

/// (1 − e^{−t/T_φ})/2.
pub fn dephasing_flip_prob(t: f64, t_phi: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-0.5 * (-t / t_phi).exp_m1())
}

/// 1 − e^{−t/(2T1)}.
pub fn decay_prob(t: f64, t1: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-(-t / (2.0 * t1)).exp_m1())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("{t} must be non-negative")));
    }
    Ok(())
}

/// What happened to the ancilla during one controlled rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GateEvent {
    Survived,
    Decayed { at: f64 },
}

/// Trajectory branch of the echo-integrated controlled-e^{iγtJ_z} gate.
///
/// In the surviving branch the state is returned untouched: the ideal gate is
/// realized by the projector pair applied at readout. In the decayed branch
/// the decay time t′ ∈ [0, t] follows κe^{−κt′}/(1 − e^{−κt}) and the spins
/// pick up e^{iγt′J_z}.
pub fn noisy_controlled_rotation<R: Rng + ?Sized>(state: &CollectiveState, t: f64, noise: &NoiseModel, rng: &mut R) -> (CollectiveState, GateEvent) {
    if noise.t1.is_infinite() {
        return (state.clone(), GateEvent::Survived);
    }
    let p = decay_prob(t, noise.t1).unwrap_or(0.0);
    let u: f64 = rng.random();
    if u >= p {
        return (state.clone(), GateEvent::Survived);
    }
    let at = truncated_exponential(noise.kappa(), t, rng.random());
    (state.apply_jz_phase(noise.gamma * at, 0.0), GateEvent::Decayed { at })
}

/// Inverse CDF of κe^{−κs} restricted to [0, t].
fn truncated_exponential(kappa: f64, t: f64, u: f64) -> f64 {
    // 1 − e^{−κt} via expm1 keeps precision for κt ≪ 1.
    let mass = -(-kappa * t).exp_m1();
    let s = -(-u * mass).ln_1p() / kappa;
    s.clamp(0.0, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionEvent {
    pub decayed: bool,
    pub decay_time: Option<f64>,
    pub dephasing_flip: bool,
    pub recorded_bit: u8,
    /// Projected eigenspace bit; `None` after a decay.
    pub true_bit: Option<u8>,
    /// δt in seconds (0 when jitter is off)
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundEventLog {
    pub round: u32,
    pub repetitions: Vec<RepetitionEvent>,
    pub voted_bit: u8,
    pub tie: bool,
    /// Voted bit equals the eigenspace bit fixed by the first non-decayed repetition.
    pub vote_correct: bool,
    pub projector_applied: bool,
}

impl RoundEventLog {
    /// Conditions (i) and (ii): some repetition did not decay, and the vote is right.
    pub fn succeeded(&self) -> bool {
        self.projector_applied && self.vote_correct
    }

    pub fn reference_bit(&self) -> Option<u8> {
        self.repetitions.iter().find_map(|r| r.true_bit)
    }
}

/// One repetition of round j: gate with possible decay, jitter, readout with possible flip.
pub fn noisy_round<R: Rng + ?Sized>(state: &CollectiveState, j: u32, a_prev: u64, plan: &PreparationPlan, noise: &NoiseModel, rng: &mut R) -> Result<(u8, CollectiveState, RepetitionEvent)> {
    let labels = plan.labels();
    noisy_round_on(state, &labels, j, plan.target_offset + a_prev as i64, plan.round_times[j as usize - 1], noise, rng)
}

pub(crate) fn noisy_round_on<R: Rng + ?Sized>(
    state: &CollectiveState,
    labels: &[i64],
    j: u32,
    shift: i64,
    t: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(u8, CollectiveState, RepetitionEvent)> {
    let (after_gate, gate) = noisy_controlled_rotation(state, t, noise, rng);
    if let GateEvent::Decayed { at } = gate {
        let bit = u8::from(rng.random::<f64>() < 0.5);
        let event = RepetitionEvent {
            decayed: true,
            decay_time: Some(at),
            dephasing_flip: false,
            recorded_bit: bit,
            true_bit: None,
            jitter: 0.0,
        };
        return Ok((bit, after_gate, event));
    }
    let mut u = round_unitary_diag(labels, j, shift);
    let mut jitter = 0.0;
    if noise.sigma_t > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        jitter = noise.sigma_t * z;
        // Timing error lengthens the controlled rotation: extra e^{iγδt J_z}.
        let n = state.n_spins() as f64;
        for (i, x) in u.iter_mut().enumerate() {
            *x *= C64::from_polar(1.0, noise.gamma * jitter * (i as f64 - n / 2.0));
        }
    }
    let out = measure_diagonal(&after_gate, &u, j, rng)?;
    let mut flip = false;
    if noise.t_phi.is_finite() {
        let q = dephasing_flip_prob(t, noise.t_phi)?;
        flip = rng.random::<f64>() < q;
    }
    let recorded = out.bit ^ u8::from(flip);
    let event = RepetitionEvent {
        decayed: false,
        decay_time: None,
        dephasing_flip: flip,
        recorded_bit: recorded,
        true_bit: Some(out.bit),
        jitter,
    };
    Ok((recorded, out.state, event))
}

/// M repetitions of round j with A_{j−1} held fixed, then a majority vote.
pub fn majority_round<R: Rng + ?Sized>(state: &CollectiveState, j: u32, a_prev: u64, plan: &PreparationPlan, noise: &NoiseModel, rng: &mut R) -> Result<(u8, CollectiveState, RoundEventLog)> {
    let labels = plan.labels();
    majority_round_on(state, &labels, j, plan.target_offset + a_prev as i64, plan.round_times[j as usize - 1], noise, rng)
}

pub(crate) fn majority_round_on<R: Rng + ?Sized>(
    state: &CollectiveState,
    labels: &[i64],
    j: u32,
    shift: i64,
    t: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(u8, CollectiveState, RoundEventLog)> {
    let m = noise.repetitions;
    let mut current = state.clone();
    let mut reps = Vec::with_capacity(m as usize);
    let mut ones = 0u32;
    for _ in 0..m {
        let (bit, next, ev) = noisy_round_on(&current, labels, j, shift, t, noise, rng)?;
        ones += bit as u32;
        reps.push(ev);
        current = next;
    }
    let zeros = m - ones;
    let tie = ones == zeros;
    let voted = if tie { u8::from(rng.random::<f64>() < 0.5) } else { u8::from(ones > zeros) };
    let reference = reps.iter().find_map(|r| r.true_bit);
    let log = RoundEventLog {
        round: j,
        projector_applied: reference.is_some(),
        vote_correct: reference == Some(voted),
        voted_bit: voted,
        tie,
        repetitions: reps,
    };
    Ok((voted, current, log))
}

/// How an even-M tie enters the analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TieRule {
    /// Counts ½, matching the coin-flip vote.
    #[default]
    Coin,
    /// Counts as failure.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessBound {
    pub per_round: Vec<f64>,
    pub total: f64,
}

/// P = ∏_j P_j over K rounds with t_j = π/(2^{j−1}γ).
pub fn success_lower_bound(k: u32, m: u32, noise: &NoiseModel, tie: TieRule) -> Result<SuccessBound> {
    if k == 0 {
        return Err(invalid("k", "need at least one round"));
    }
    if m == 0 {
        return Err(invalid("repetitions", "M must be at least 1"));
    }
    let mut per_round = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let t = crate::phase_estimation::round_time(j, noise.gamma);
        let pd = if noise.t1.is_infinite() { 0.0 } else { decay_prob(t, noise.t1)? };
        let q = if noise.t_phi.is_infinite() { 0.0 } else { dephasing_flip_prob(t, noise.t_phi)? };
        per_round.push(round_success(m, pd, q, tie));
    }
    let total = per_round.iter().product();
    Ok(SuccessBound { per_round, total })
}

/// P_j: sum over d < M decays of P(d)·P(vote correct | M−d honest, d random).
fn round_success(m: u32, pd: f64, q: f64, tie: TieRule) -> f64 {
    let m64 = m as u64;
    let tie_weight = match tie {
        TieRule::Coin => 0.5,
        TieRule::Fail => 0.0,
    };
    let mut total = 0.0;
    for d in 0..m64 {
        let p_decay = binomial_pmf(m64, d, pd);
        if p_decay == 0.0 {
            continue;
        }
        let honest = m64 - d;
        let mut correct = 0.0;
        for h in 0..=honest {
            let ph = binomial_pmf(honest, h, 1.0 - q);
            if ph == 0.0 {
                continue;
            }
            for r in 0..=d {
                let pr = binomial_pmf(d, r, 0.5);
                let good = 2 * (h + r);
                correct += ph
                    * pr
                    * match good.cmp(&m64) {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => tie_weight,
                        std::cmp::Ordering::Less => 0.0,
                    };
            }
        }
        total += p_decay * correct;
    }
    total
}

/// Full noisy preparation from |+⟩^⊗N (or the tilted state for targeted plans).
pub fn run_noisy_preparation<R: Rng + ?Sized>(plan: &PreparationPlan, noise: &NoiseModel, rng: &mut R) -> Result<PreparationRecord> {
    let initial = if plan.target_offset == 0 {
        CollectiveState::plus(plan.n_spins)?
    } else {
        let chi = crate::phase_estimation::tilt_angle(plan.n_spins, plan.target_offset)?;
        CollectiveState::product(plan.n_spins, 0.5 * (chi.cos() - chi.sin()).powi(2))?
    };
    run_noisy_from(plan, noise, initial, rng)
}

pub(crate) fn run_noisy_from<R: Rng + ?Sized>(plan: &PreparationPlan, noise: &NoiseModel, initial: CollectiveState, rng: &mut R) -> Result<PreparationRecord> {
    noise.validate()?;
    if ((noise.gamma - plan.gamma) / plan.gamma).abs() > 1e-12 {
        return Err(invalid("gamma", format!("noise model γ={} differs from plan γ={}", noise.gamma, plan.gamma)));
    }
    let labels = plan.labels();
    let mut state = initial;
    let mut a = 0u64;
    let mut bits = Vec::with_capacity(plan.n_rounds as usize);
    let mut accumulators = vec![0u64];
    let mut logs = Vec::with_capacity(plan.n_rounds as usize);
    for j in 1..=plan.n_rounds {
        let (bit, next, log) = majority_round_on(&state, &labels, j, plan.target_offset + a as i64, plan.round_times[j as usize - 1], noise, rng)?;
        a = accumulate(a, j, bit);
        bits.push(bit);
        accumulators.push(a);
        logs.push(log);
        state = next;
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
        born_probabilities: Vec::new(),
        round_logs: logs,
        accepted: plan.target_offset == 0 || a == 0,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_estimation::{make_plan, run_preparation, run_round};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn within_3_sigma(hits: usize, trials: usize, p: f64) -> bool {
        let mean = hits as f64 / trials as f64;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        (mean - p).abs() <= 3.0 * sd + 1e-12
    }

    #[test]
    fn rate_examples() {
        assert_eq!(dephasing_flip_prob(0.0, 2e-6).unwrap(), 0.0);
        assert!((dephasing_flip_prob(1e3, 2e-6).unwrap() - 0.5).abs() < 1e-15);
        let t1 = PI / 5e6;
        assert!((dephasing_flip_prob(t1, 2e-6).unwrap() - 0.1347).abs() < 2e-4);
        assert!((decay_prob(t1, 50e-6).unwrap() - 0.00626).abs() < 5e-6);
        assert_eq!(decay_prob(1.0, f64::INFINITY).unwrap(), 0.0);
        assert!(decay_prob(-1.0, 1.0).is_err());
        assert!(dephasing_flip_prob(-1.0, 1.0).is_err());
    }

    #[test]
    fn validation() {
        let mut n = NoiseModel::noiseless(1.0);
        assert!(n.validate().is_ok());
        n.repetitions = 0;
        assert!(n.validate().is_err());
        n = NoiseModel::noiseless(1.0);
        n.t1 = 0.0;
        assert!(n.validate().is_err());
        n = NoiseModel::noiseless(1.0);
        n.sigma_t = -1.0;
        assert!(n.validate().is_err());
    }

    #[test]
    fn noiseless_pipeline_matches_ideal_bit_for_bit() {
        let plan = make_plan(60, 5e6, None).unwrap();
        let noise = NoiseModel::noiseless(5e6);
        for seed in 0..40 {
            let ideal = run_preparation(&plan, &mut rng(seed)).unwrap();
            let noisy = run_noisy_preparation(&plan, &noise, &mut rng(seed)).unwrap();
            assert_eq!(ideal.bits, noisy.bits);
            assert_eq!(ideal.final_state, noisy.final_state);
            assert!(noisy.all_rounds_succeeded());
        }
        let s = CollectiveState::plus(10).unwrap();
        let plan = make_plan(10, 5e6, None).unwrap();
        let (b, st, _) = noisy_round(&s, 1, 0, &plan, &noise, &mut rng(4)).unwrap();
        let ideal = run_round(&s, 1, 0, &mut rng(4)).unwrap();
        assert_eq!(b, ideal.bit);
        assert_eq!(st, ideal.state);
    }

    #[test]
    fn decay_keeps_profile_and_time_in_range() {
        let s = CollectiveState::plus(20).unwrap().rotate_y(0.3);
        let noise = NoiseModel {
            t1: 1e-9,
            ..NoiseModel::noiseless(5e6)
        };
        let t = 1e-7;
        let mut r = rng(1);
        let mut decays = 0;
        for _ in 0..200 {
            let (after, ev) = noisy_controlled_rotation(&s, t, &noise, &mut r);
            if let GateEvent::Decayed { at } = ev {
                decays += 1;
                assert!((0.0..=t).contains(&at));
                for (a, b) in s.probabilities().iter().zip(after.probabilities()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        assert!(decays > 150);
    }

    #[test]
    fn decay_frequency_matches_rate() {
        let s = CollectiveState::plus(4).unwrap();
        let noise = NoiseModel {
            t1: 50e-6,
            ..NoiseModel::noiseless(5e6)
        };
        let t = PI / 5e6;
        let mut r = rng(7);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| matches!(noisy_controlled_rotation(&s, t, &noise, &mut r).1, GateEvent::Decayed { .. }))
            .count();
        assert!(within_3_sigma(hits, trials, decay_prob(t, 50e-6).unwrap()));
    }

    #[test]
    fn truncated_exponential_mean() {
        let (kappa, t) = (2.0, 1.5);
        let mut r = rng(3);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| truncated_exponential(kappa, t, r.random())).sum::<f64>() / n as f64;
        let exact = 1.0 / kappa - t * (-kappa * t).exp() / (1.0 - (-kappa * t).exp());
        assert!((mean - exact).abs() < 5e-3);
    }

    #[test]
    fn flip_frequency_on_eigenstate() {
        let s = CollectiveState::dicke(8, 0).unwrap();
        let plan = make_plan(8, 5e6, None).unwrap();
        let noise = NoiseModel {
            t_phi: 2e-6,
            ..NoiseModel::noiseless(5e6)
        };
        let q = dephasing_flip_prob(plan.round_times[0], 2e-6).unwrap();
        let mut r = rng(11);
        let trials = 100_000;
        let flips = (0..trials).filter(|_| noisy_round(&s, 1, 0, &plan, &noise, &mut r).unwrap().0 == 1).count();
        assert!(within_3_sigma(flips, trials, q));
    }

    #[test]
    fn decayed_readout_is_uniform() {
        let s = CollectiveState::dicke(8, 0).unwrap();
        let plan = make_plan(8, 5e6, None).unwrap();
        let noise = NoiseModel {
            t1: 1e-12,
            ..NoiseModel::noiseless(5e6)
        };
        let mut r = rng(5);
        let trials = 100_000;
        let ones = (0..trials)
            .filter(|_| {
                let (b, _, ev) = noisy_round(&s, 1, 0, &plan, &noise, &mut r).unwrap();
                assert!(ev.decayed);
                b == 1
            })
            .count();
        assert!(within_3_sigma(ones, trials, 0.5));
    }

    #[test]
    fn noiseless_repetitions_are_idempotent() {
        let plan = make_plan(30, 5e6, None).unwrap();
        let noise = NoiseModel {
            repetitions: 3,
            ..NoiseModel::noiseless(5e6)
        };
        let s = CollectiveState::plus(30).unwrap();
        for seed in 0..20 {
            let (v, st, log) = majority_round(&s, 1, 0, &plan, &noise, &mut rng(seed)).unwrap();
            assert!(log.repetitions.iter().all(|e| e.recorded_bit == v));
            let once = run_round(&s, 1, 0, &mut rng(seed)).unwrap();
            for (a, b) in st.amplitudes().iter().zip(once.state.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn majority_error_matches_binomial_formula() {
        let s = CollectiveState::dicke(8, 0).unwrap();
        let plan = make_plan(8, 5e6, None).unwrap();
        let q = dephasing_flip_prob(plan.round_times[0], 2e-6).unwrap();
        for m in [3u32, 4] {
            let noise = NoiseModel {
                t_phi: 2e-6,
                repetitions: m,
                ..NoiseModel::noiseless(5e6)
            };
            let m64 = m as u64;
            let mut p_err = 0.0;
            for k in 0..=m64 {
                let pk = binomial_pmf(m64, k, q);
                if 2 * k > m64 {
                    p_err += pk;
                } else if 2 * k == m64 {
                    p_err += 0.5 * pk;
                }
            }
            let mut r = rng(m as u64);
            let trials = 100_000;
            let errs = (0..trials).filter(|_| majority_round(&s, 1, 0, &plan, &noise, &mut r).unwrap().0 == 1).count();
            assert!(within_3_sigma(errs, trials, p_err), "M={m}");
        }
    }

    #[test]
    fn bound_special_cases() {
        let b = success_lower_bound(9, 3, &NoiseModel::noiseless(5e6), TieRule::Coin).unwrap();
        assert!(b.per_round.iter().all(|&p| (p - 1.0).abs() < 1e-15));
        assert!((b.total - 1.0).abs() < 1e-14);
        let noise = NoiseModel {
            t1: 50e-6,
            t_phi: 2e-6,
            ..NoiseModel::noiseless(5e6)
        };
        let b = success_lower_bound(4, 1, &noise, TieRule::Coin).unwrap();
        for (j, p) in b.per_round.iter().enumerate() {
            let t = crate::phase_estimation::round_time(j as u32 + 1, 5e6);
            let expected = (1.0 - decay_prob(t, 50e-6).unwrap()) * (1.0 - dephasing_flip_prob(t, 2e-6).unwrap());
            assert!((p - expected).abs() < 1e-14);
        }
        for w in b.per_round.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn bound_increases_with_odd_m() {
        let noise = NoiseModel {
            t1: 50e-6,
            t_phi: 2e-6,
            ..NoiseModel::noiseless(5e6)
        };
        let vals: Vec<f64> = (0..6).map(|i| success_lower_bound(20, 2 * i + 1, &noise, TieRule::Coin).unwrap().total).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!((vals[0] - 0.73321).abs() < 5e-5);
        assert!((vals[3] - 0.99032).abs() < 5e-5);
        assert!(vals[2] < 0.99);
        let fail = success_lower_bound(20, 4, &noise, TieRule::Fail).unwrap().total;
        let coin = success_lower_bound(20, 4, &noise, TieRule::Coin).unwrap().total;
        assert!(fail < coin);
    }

    #[test]
    fn bound_monotone_in_rates() {
        let mut prev = 1.0;
        for q in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let p = round_success(5, 0.01, q, TieRule::Coin);
            assert!(p <= prev + 1e-15);
            prev = p;
        }
        prev = 1.0;
        for pd in [0.0, 0.05, 0.1, 0.3] {
            let p = round_success(5, pd, 0.1, TieRule::Coin);
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }

    #[test]
    fn monte_carlo_success_matches_bound() {
        let gamma = 5e6;
        let plan = make_plan(20, gamma, Some(5)).unwrap();
        let noise = NoiseModel {
            t1: 2e-6,
            t_phi: 2e-6,
            gamma,
            sigma_t: 0.0,
            repetitions: 3,
        };
        let bound = success_lower_bound(5, 3, &noise, TieRule::Coin).unwrap().total;
        let trials = 10_000;
        let hits = (0..trials as u64)
            .filter(|&s| run_noisy_preparation(&plan, &noise, &mut rng(s)).unwrap().all_rounds_succeeded())
            .count();
        assert!(within_3_sigma(hits, trials, bound), "{hits}/{trials} vs {bound}");
    }
}
