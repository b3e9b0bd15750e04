//! Permutation-invariant code words and preparation of their |+_L⟩ probe.
//!
//! Works for either parity of N. Basis index i = m_z + N/2 throughout; the code
//! lives on indices g·j, j = 0..n.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::collective_spin::{binomial::binomial_coefficient, CollectiveOperator, CollectiveState, YRotation};
use crate::error::{invalid, Result};

/// Angle of the single Y-projector for the 9-qubit (3,3,1) code.
pub const NINE_QUBIT_ANGLE: f64 = 0.57056;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PiCodeParams {
    pub g: usize,
    pub n: usize,
    /// u = u_num / u_den ≥ 1
    pub u_num: usize,
    pub u_den: usize,
}

impl PiCodeParams {
    pub fn new(g: usize, n: usize, u_num: usize, u_den: usize) -> Result<Self> {
        if g < 2 {
            return Err(invalid("g", format!("{g} must exceed 1")));
        }
        if n < 2 {
            return Err(invalid("n", format!("{n} must exceed 1")));
        }
        if u_den == 0 || u_num < u_den {
            return Err(invalid("u", format!("{u_num}/{u_den} must be a rational ≥ 1")));
        }
        if !(g * n * u_num).is_multiple_of(u_den) {
            return Err(invalid("u", format!("N = {g}·{n}·{u_num}/{u_den} is not an integer")));
        }
        Ok(Self { g, n, u_num, u_den })
    }

    pub fn nine_qubit() -> Self {
        Self {
            g: 3,
            n: 3,
            u_num: 1,
            u_den: 1,
        }
    }

    /// N = g·n·u.
    pub fn n_spins(&self) -> usize {
        self.g * self.n * self.u_num / self.u_den
    }

    /// Basis indices g·j, j = 0..n.
    pub fn support(&self) -> Vec<usize> {
        (0..=self.n).map(|j| self.g * j).collect()
    }

    /// Largest t with g, n > 2t + 1.
    pub fn correctable_errors(&self) -> usize {
        let m = self.g.min(self.n);
        if m < 2 {
            0
        } else {
            (m - 2) / 2
        }
    }
}

fn code_state(p: &PiCodeParams, keep: impl Fn(usize) -> bool) -> CollectiveState {
    let n_spins = p.n_spins();
    let mut amps = vec![C64::new(0.0, 0.0); n_spins + 1];
    for j in (0..=p.n).filter(|&j| keep(j)) {
        amps[p.g * j] = C64::new(binomial_coefficient(p.n as u64, j as u64).sqrt(), 0.0);
    }
    CollectiveState::normalize_any_parity(n_spins, amps).expect("code words are nonzero").0
}

/// (|0_L⟩, |1_L⟩): even / odd j with amplitude √(C(n,j)/2^{n−1}).
pub fn codewords(p: &PiCodeParams) -> (CollectiveState, CollectiveState) {
    (code_state(p, |j| j % 2 == 0), code_state(p, |j| j % 2 == 1))
}

/// |+_L⟩ with amplitude √(C(n,j)/2^n) at index g·j.
pub fn probe_state(p: &PiCodeParams) -> CollectiveState {
    code_state(p, |_| true)
}

/// (e^{−iθJ_y} + e^{iθJ_y})/2 as an explicit matrix.
pub fn y_projector(n_spins: usize, theta: f64) -> CollectiveOperator {
    YRotation::new(n_spins).average_matrix(theta)
}

/// Phase e^{i2πa·i/g} of S(a) = e^{i(2aπ/g)(J_z + N/2)} on basis index i.
fn stabilizer_phase(g: usize, a: i64, index: usize) -> C64 {
    let r = (a * index as i64).rem_euclid(g as i64);
    if r == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::from_polar(1.0, 2.0 * PI * r as f64 / g as f64)
    }
}

/// S(a) as a diagonal operator.
pub fn stabilizer(p: &PiCodeParams, a: i64) -> CollectiveOperator {
    let n_spins = p.n_spins();
    CollectiveOperator::Diagonal {
        n_spins,
        diag: (0..=n_spins).map(|i| stabilizer_phase(p.g, a, i)).collect(),
    }
}

/// Measures "S(a) phase = 1" against "phase ≠ 1" using the kernel projector of S(a) − I.
///
/// Returns +1 or −1 and the renormalized post-measurement state.
pub fn stabilizer_measure<R: Rng + ?Sized>(state: &CollectiveState, p: &PiCodeParams, a: i64, rng: &mut R) -> Result<(i8, CollectiveState)> {
    if state.n_spins() != p.n_spins() {
        return Err(crate::Error::DimensionMismatch {
            expected: p.n_spins() + 1,
            got: state.dim(),
        });
    }
    let zero = C64::new(0.0, 0.0);
    let (mut keep, mut reject) = (Vec::with_capacity(state.dim()), Vec::with_capacity(state.dim()));
    for (i, amp) in state.amplitudes().iter().enumerate() {
        if (a * i as i64).rem_euclid(p.g as i64) == 0 {
            keep.push(*amp);
            reject.push(zero);
        } else {
            keep.push(zero);
            reject.push(*amp);
        }
    }
    let p_plus: f64 = keep.iter().map(|z| z.norm_sqr()).sum();
    let u: f64 = rng.random();
    let (outcome, raw) = if u < p_plus { (1, keep) } else { (-1, reject) };
    let (post, _) = CollectiveState::normalize_any_parity(state.n_spins(), raw).ok_or(crate::Error::InconsistentRecord { round: 0 })?;
    Ok((outcome, post))
}

/// Outcome of a deterministic post-selected preparation.
#[derive(Debug, Clone, Serialize)]
pub struct PiCodePreparation {
    #[serde(skip)]
    pub state: CollectiveState,
    /// |⟨+_L|ψ⟩|²
    pub fidelity: f64,
    /// |⟨+_L|ψ⟩|
    pub overlap: f64,
    /// Product of every post-selection probability.
    pub p_succ: f64,
    /// Post-selection probability of the Y-projector stage alone.
    pub p_projectors: f64,
}

/// Applies ∏_l Y(θ_l) to |+⟩^⊗N (renormalized), then for `repetitions` sweeps
/// over `schedule` applies the literal operator (I + S(a))/2 and renormalizes.
pub fn prepare(p: &PiCodeParams, angles: &[f64], schedule: &[i64], repetitions: u32) -> Result<PiCodePreparation> {
    let n_spins = p.n_spins();
    let plus = CollectiveState::product_any_parity(n_spins, 0.5)?;
    let rot = YRotation::new(n_spins);
    let mut v = plus.into_amplitudes();
    for &th in angles {
        v = rot.average_raw(&v, th);
    }
    let (mut state, p_projectors) = CollectiveState::normalize_any_parity(n_spins, v).ok_or_else(|| invalid("angles", "Y-projectors annihilate the input"))?;
    let mut p_succ = p_projectors;
    for _ in 0..repetitions {
        for &a in schedule {
            let raw: Vec<C64> = state
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, z)| z * (C64::new(1.0, 0.0) + stabilizer_phase(p.g, a, i)) * 0.5)
                .collect();
            let (next, w) = CollectiveState::normalize_any_parity(n_spins, raw).ok_or_else(|| invalid("schedule", "stabilizer filter annihilates the state"))?;
            p_succ *= w;
            state = next;
        }
    }
    let overlap = probe_state(p).inner(&state)?.norm();
    Ok(PiCodePreparation {
        state,
        fidelity: overlap * overlap,
        overlap,
        p_succ,
        p_projectors,
    })
}

/// Y(0.57056) on |+⟩^⊗9, then [(1 − e^{i2π/3·J_z})/2]^M.
pub fn prepare_9qubit(repetitions: u32) -> Result<PiCodePreparation> {
    // For N = 9, (1 − e^{i2π/3·J_z})/2 = (I + S(1))/2.
    prepare(&PiCodeParams::nine_qubit(), &[NINE_QUBIT_ANGLE], &[1], repetitions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSearch {
    pub angles: Vec<f64>,
    pub residual: f64,
    /// Residual of the unprojected plus state.
    pub initial_residual: f64,
    pub converged: bool,
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
const RESTARTS: usize = 32;
const SEARCH_SEED: u64 = 0x5eed_a27e;

/// Σ_j (a_{gj}/a_0 − √C(n,j))² after ∏_l Y(θ_l) on |+⟩^⊗N.
pub fn ratio_residual(p: &PiCodeParams, rot: &YRotation, plus: &[C64], angles: &[f64]) -> f64 {
    let mut v = plus.to_vec();
    for &th in angles {
        v = rot.average_raw(&v, th);
    }
    let a0 = v[0];
    if a0.norm() < 1e-300 {
        return f64::INFINITY;
    }
    (0..=p.n)
        .map(|j| {
            let r = v[p.g * j] / a0;
            (r - binomial_coefficient(p.n as u64, j as u64).sqrt()).norm_sqr()
        })
        .sum()
}

/// Finds L angles in [0, π/2] matching the code amplitude ratios.
///
/// Seeded multistart Nelder–Mead followed by coordinate-wise golden-section
/// polishing. Non-convergence is reported through `converged`.
pub fn find_angles(p: &PiCodeParams, n_projectors: usize) -> Result<AngleSearch> {
    if n_projectors == 0 {
        return Err(invalid("n_projectors", "need at least one projector"));
    }
    let n_spins = p.n_spins();
    let rot = YRotation::new(n_spins);
    let plus = CollectiveState::product_any_parity(n_spins, 0.5)?.into_amplitudes();
    let f = |x: &[f64]| ratio_residual(p, &rot, &plus, x);
    let initial_residual = f(&[]);
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let hi = PI / 2.0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..RESTARTS {
        let start: Vec<f64> = (0..n_projectors).map(|_| rng.random::<f64>() * hi).collect();
        let (mut x, mut fx) = nelder_mead(&f, start, 0.0, hi);
        for _ in 0..4 {
            for k in 0..x.len() {
                let g = |t: f64| {
                    let mut y = x.clone();
                    y[k] = t;
                    f(&y)
                };
                let lo_k = (x[k] - 0.05).max(0.0);
                let hi_k = (x[k] + 0.05).min(hi);
                let (t, ft) = crate::metrology::golden_section(&g, lo_k, hi_k, 1e-12);
                if ft < fx {
                    x[k] = t;
                    fx = ft;
                }
            }
        }
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    let (mut angles, residual) = best.expect("at least one restart");
    angles.sort_by(f64::total_cmp);
    Ok(AngleSearch {
        angles,
        residual,
        initial_residual,
        converged: residual < RESIDUAL_TOLERANCE,
    })
}

/// Box-constrained Nelder–Mead (points are clamped into [lo, hi]).
fn nelder_mead(f: &impl Fn(&[f64]) -> f64, start: Vec<f64>, lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let dim = start.len();
    let clamp = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x.clamp(lo, hi)).collect() };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.clone(), f(&start)));
    for k in 0..dim {
        let mut v = start.clone();
        v[k] += if v[k] + 0.1 <= hi { 0.1 } else { -0.1 };
        let v = clamp(v);
        let fv = f(&v);
        simplex.push((v, fv));
    }
    for _ in 0..2000 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let size = simplex.iter().map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread.abs() < 1e-16 && size < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..dim).map(|k| simplex[..dim].iter().map(|(v, _)| v[k]).sum::<f64>() / dim as f64).collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| clamp(centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect());
        let refl = along(1.0);
        let fr = f(&refl);
        if fr < simplex[0].1 {
            let exp = along(2.0);
            let fe = f(&exp);
            simplex[dim] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (refl, fr);
        } else {
            let con = along(if fr < worst.1 { 0.5 } else { -0.5 });
            let fc = f(&con);
            if fc < worst.1.min(fr) {
                simplex[dim] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = entry.0.iter().zip(&best).map(|(x, b)| b + 0.5 * (x - b)).collect();
                    let fv = f(&v);
                    *entry = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
