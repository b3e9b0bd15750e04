//! Brute-force 2^N state-vector reference with an explicit ancilla.
//!
//! Bit i of a basis index is spin i; the ancilla, when present, is bit N.
//! Spin bit 0 is |0⟩ (Z = +1), so a bitstring of Hamming weight w has
//! J_z = N/2 − w.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::collective_spin::{binomial::binomial_coefficient, CollectiveState};
use crate::error::{Error, Result};
use crate::phase_estimation::{accumulate, decode_with_offset, decoded_fidelity, feedback_angle, PreparationPlan, PreparationRecord};

/// Largest N a [`FullState`] may hold.
pub const MAX_FULL_SPINS: usize = 12;
/// Largest N for circuit runs.
pub const MAX_RUN_SPINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n_spins: usize,
    with_ancilla: bool,
    amps: Vec<C64>,
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooLargeForOracle { n, max });
    }
    if n == 0 {
        return Err(Error::TooFewSpins { n, min: 1 });
    }
    Ok(())
}

impl FullState {
    pub fn new(n_spins: usize, with_ancilla: bool, amps: Vec<C64>) -> Result<Self> {
        check_size(n_spins, MAX_FULL_SPINS)?;
        let dim = 1usize << (n_spins + with_ancilla as usize);
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: amps.len() });
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_spins, with_ancilla, amps })
    }

    /// |+⟩^⊗N.
    pub fn plus(n_spins: usize) -> Result<Self> {
        check_size(n_spins, MAX_FULL_SPINS)?;
        let dim = 1usize << n_spins;
        let a = C64::new((dim as f64).powf(-0.5), 0.0);
        Ok(Self {
            n_spins,
            with_ancilla: false,
            amps: vec![a; dim],
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn with_ancilla(&self) -> bool {
        self.with_ancilla
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Appends an ancilla in |0⟩.
    pub fn attach_ancilla(&self) -> Self {
        if self.with_ancilla {
            return self.clone();
        }
        let mut amps = self.amps.clone();
        amps.resize(2 * self.amps.len(), C64::new(0.0, 0.0));
        Self {
            n_spins: self.n_spins,
            with_ancilla: true,
            amps,
        }
    }

    /// Drops an ancilla that is in |0⟩ (its |1⟩ half is discarded).
    pub fn spins_only(&self) -> Self {
        if !self.with_ancilla {
            return self.clone();
        }
        let half = 1usize << self.n_spins;
        Self {
            n_spins: self.n_spins,
            with_ancilla: false,
            amps: self.amps[..half].to_vec(),
        }
    }
}

/// Hamming weights of the spin part of every basis index.
fn spin_weights(n_spins: usize) -> Vec<u32> {
    (0..1usize << n_spins).map(|x| x.count_ones()).collect()
}

/// |N, m_z⟩ ↦ uniform superposition of weight-(N/2 − m_z) bitstrings.
pub fn embed(state: &CollectiveState) -> Result<FullState> {
    let n = state.n_spins();
    check_size(n, MAX_FULL_SPINS)?;
    let weights = spin_weights(n);
    let scale: Vec<f64> = (0..=n).map(|w| binomial_coefficient(n as u64, w as u64).powf(-0.5)).collect();
    // Dicke index i has i zeros, i.e. weight N − i.
    let amps = weights
        .iter()
        .map(|&w| {
            let w = w as usize;
            state.amplitudes()[n - w] * scale[w]
        })
        .collect();
    Ok(FullState {
        n_spins: n,
        with_ancilla: false,
        amps,
    })
}

/// Adjoint of [`embed`]: raw (unnormalized) Dicke-basis amplitudes.
pub fn project_raw(full: &FullState) -> Vec<C64> {
    let spins = full.spins_only();
    let n = spins.n_spins;
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    for (x, a) in spins.amps.iter().enumerate() {
        out[n - x.count_ones() as usize] += *a;
    }
    for (w, o) in out.iter_mut().rev().enumerate() {
        *o *= binomial_coefficient(n as u64, w as u64).powf(-0.5);
    }
    out
}

/// Projection onto the symmetric subspace, renormalized.
pub fn project(full: &FullState) -> Result<CollectiveState> {
    let raw = project_raw(full);
    CollectiveState::normalize_any_parity(full.n_spins, raw)
        .map(|(s, _)| s)
        .ok_or(Error::NotNormalized(0.0))
}

/// max over i of ‖SWAP_{i,i+1}ψ − ψ‖ acting on the spins.
pub fn symmetrize_check(full: &FullState) -> f64 {
    let n = full.n_spins;
    let mut worst: f64 = 0.0;
    for i in 0..n.saturating_sub(1) {
        let (bi, bj) = (1usize << i, 1usize << (i + 1));
        let dev: f64 = full
            .amps
            .iter()
            .enumerate()
            .map(|(x, a)| {
                let xi = x & bi != 0;
                let xj = x & bj != 0;
                let y = if xi == xj { x } else { x ^ bi ^ bj };
                (full.amps[y] - a).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dev);
    }
    worst
}

/// A literal circuit run together with per-round diagnostics.
#[derive(Debug, Clone)]
pub struct FullRunRecord {
    pub record: PreparationRecord,
    /// P(b_j = 0) each round
    pub prob_zero: Vec<f64>,
    /// Spins after the last round (ancilla reset and dropped).
    pub full_state: FullState,
    pub symmetry_deviation: f64,
}

/// Options for the literal circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitOptions {
    /// Keep the e^{−i(γ/2)tJ_z} factor of the interaction propagator.
    pub unconditional_phase: bool,
}

impl Default for CircuitOptions {
    fn default() -> Self {
        Self { unconditional_phase: true }
    }
}

/// Fig.-1 circuit with uniform coupling.
pub fn full_pe_run<R: Rng + ?Sized>(plan: &PreparationPlan, rng: &mut R) -> Result<FullRunRecord> {
    full_pe_run_with(plan, &vec![0.0; plan.n_spins], CircuitOptions::default(), rng)
}

/// Circuit with per-spin couplings γ_i = γ(1 + δ_i), δ_i = δγ_i/γ.
pub fn full_pe_run_with<R: Rng + ?Sized>(plan: &PreparationPlan, deviations: &[f64], opts: CircuitOptions, rng: &mut R) -> Result<FullRunRecord> {
    let n = plan.n_spins;
    check_size(n, MAX_RUN_SPINS)?;
    if deviations.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: deviations.len() });
    }
    let dim = 1usize << n;
    // h(x) = Σ_i (1 + δ_i) z_i / 2, the H_z eigenvalue of bitstring x.
    let h: Vec<f64> = (0..dim)
        .map(|x| {
            (0..n)
                .map(|i| {
                    let z = if x >> i & 1 == 0 { 1.0 } else { -1.0 };
                    0.5 * (1.0 + deviations[i]) * z
                })
                .sum()
        })
        .collect();
    let mut state = FullState::plus(n)?.attach_ancilla();
    let frac = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = 0u64;
    let mut bits = Vec::new();
    let mut accumulators = vec![0u64];
    let mut born = Vec::new();
    let mut prob_zero = Vec::new();
    for j in 1..=plan.n_rounds {
        let t = plan.round_times[j as usize - 1];
        let gt = plan.gamma * t;
        let theta = feedback_angle(j, a) + std::f64::consts::PI * plan.target_offset as f64 * 2f64.powi(1 - j as i32);
        let amps = &mut state.amps;
        for x in 0..dim {
            let (lo, hi) = (amps[x], amps[x + dim]);
            // Hadamard on the ancilla (which starts each round in |0⟩)
            let mut a0 = (lo + hi) * frac;
            let mut a1 = (lo - hi) * frac;
            // e^{−i(γ/2)tH_z}(|0⟩⟨0|⊗I + |1⟩⟨1|⊗e^{iγtH_z})
            a1 *= C64::from_polar(1.0, gt * h[x]);
            if opts.unconditional_phase {
                let u = C64::from_polar(1.0, -0.5 * gt * h[x]);
                a0 *= u;
                a1 *= u;
            }
            // R_z feedback: |1⟩ picks up e^{−iϑ} relative to |0⟩
            a1 *= C64::from_polar(1.0, -theta);
            amps[x] = (a0 + a1) * frac;
            amps[x + dim] = (a0 - a1) * frac;
        }
        let p0: f64 = amps[..dim].iter().map(|z| z.norm_sqr()).sum();
        let p1: f64 = amps[dim..].iter().map(|z| z.norm_sqr()).sum();
        let pz = p0 / (p0 + p1);
        let u: f64 = rng.random();
        let bit = u8::from(u >= pz);
        let (keep, norm) = if bit == 0 { (0..dim, p0) } else { (dim..2 * dim, p1) };
        let scale = 1.0 / norm.sqrt();
        let kept: Vec<C64> = amps[keep].iter().map(|z| z * scale).collect();
        // reset the ancilla to |0⟩
        amps[..dim].copy_from_slice(&kept);
        amps[dim..].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        prob_zero.push(pz);
        born.push(norm / (p0 + p1));
        a = accumulate(a, j, bit);
        bits.push(bit);
        accumulators.push(a);
    }
    let spins = state.spins_only();
    let symmetry_deviation = symmetrize_check(&spins);
    let raw = project_raw(&spins);
    let sym_weight: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    let final_state = CollectiveState::normalize_any_parity(n, raw).map(|(s, _)| s).ok_or(Error::InconsistentRecord { round: plan.n_rounds })?;
    let decoded_mz = decode_with_offset(n, a, plan.n_rounds, plan.target_offset)?;
    let (f, ambiguous) = decoded_fidelity(&final_state, decoded_mz);
    Ok(FullRunRecord {
        record: PreparationRecord {
            n_spins: n,
            bits,
            accumulators,
            decoded_mz,
            final_state,
            // overlap with the decoded Dicke vector in the full space
            fidelity: f * sym_weight,
            born_probabilities: born,
            round_logs: Vec::new(),
            accepted: true,
            ambiguous,
        },
        prob_zero,
        full_state: spins,
        symmetry_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonuniformReport {
    pub bits: Vec<u8>,
    /// |⟨N, m_z|ψ⟩|² for m_z = −N/2 … N/2
    pub dicke_overlaps: Vec<f64>,
    pub max_overlap: f64,
    pub argmax_mz: i64,
    pub symmetry_deviation: f64,
    /// Σ|δγ_i/(2γ)|
    pub perturbation_sum: f64,
    /// perturbation_sum below [`SMALL_PERTURBATION`]
    pub small_regime: bool,
}

/// Threshold standing in for Σ|δγ_i/(2γ)| ≪ 1.
pub const SMALL_PERTURBATION: f64 = 0.1;

pub fn nonuniform_pe_run<R: Rng + ?Sized>(plan: &PreparationPlan, deviations: &[f64], rng: &mut R) -> Result<NonuniformReport> {
    let run = full_pe_run_with(plan, deviations, CircuitOptions::default(), rng)?;
    let raw = project_raw(&run.full_state);
    let dicke_overlaps: Vec<f64> = raw.iter().map(|z| z.norm_sqr()).collect();
    let (arg, max_overlap) = dicke_overlaps
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("N ≥ 1");
    let perturbation_sum: f64 = deviations.iter().map(|d| (d / 2.0).abs()).sum();
    Ok(NonuniformReport {
        bits: run.record.bits,
        dicke_overlaps,
        max_overlap,
        argmax_mz: arg as i64 - (plan.n_spins / 2) as i64,
        symmetry_deviation: run.symmetry_deviation,
        perturbation_sum,
        small_regime: perturbation_sum < SMALL_PERTURBATION,
    })
}
