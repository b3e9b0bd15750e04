use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentKind, RunConfig};
use super::output::{aggregate, Aggregate, Cell, Provenance, RunResult, RNG_SCHEME};
use crate::adiabatic::{adiabatic_preparation, make_adiabatic_plan};
use crate::collective_spin::CollectiveState;
use crate::error::{invalid, Result};
use crate::noise::{decay_prob, dephasing_flip_prob, run_noisy_from, success_lower_bound, NoiseModel};
use crate::oracle::full_pe_run;
use crate::phase_estimation::{make_plan, round_time, run_from, run_preparation, run_targeted_preparation, tilt_angle, PreparationPlan, PreparationRecord};
use crate::pi_code::{find_angles, prepare, prepare_9qubit, PiCodeParams, NINE_QUBIT_ANGLE};

/// Environment variable bounding the worker pool.
pub const WORKERS_ENV: &str = "DICKE_WORKERS";

/// `DICKE_WORKERS` if set to a positive integer, else rayon's default.
pub fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&w| w > 0)
}

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Runs `f` for every `(point, trial)` on a bounded pool; results come back in input order.
pub fn run_trials<T, F>(jobs: &[(usize, u64)], master_seed: u64, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let body = || {
        jobs.par_iter()
            .map(|&(point, trial)| f(point, trial, &mut trial_rng(master_seed, trial)))
            .collect::<Result<Vec<T>>>()
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?
            .install(body),
        None => body(),
    }
}

pub fn monte_carlo(cfg: &RunConfig) -> Result<RunResult> {
    monte_carlo_with_workers(cfg, worker_count())
}

pub fn monte_carlo_with_workers(cfg: &RunConfig, workers: Option<usize>) -> Result<RunResult> {
    cfg.validate()?;
    let (header, rows, aggregates) = match cfg.kind {
        ExperimentKind::Prepare | ExperimentKind::Targeted | ExperimentKind::JitterSweep | ExperimentKind::Adiabatic => trajectories(cfg, workers)?,
        ExperimentKind::DephasingRates => dephasing_rates(cfg)?,
        ExperimentKind::FidelityBound => fidelity_bound(cfg)?,
        ExperimentKind::Picode => picode(cfg)?,
        ExperimentKind::OracleCheck => oracle_check(cfg, workers)?,
    };
    Ok(RunResult {
        header,
        rows,
        aggregates,
        provenance: Provenance {
            config: cfg.clone(),
            code_version: env!("CARGO_PKG_VERSION"),
            master_seed: cfg.master_seed,
            rng: RNG_SCHEME,
        },
    })
}

type Table = (Vec<&'static str>, Vec<Vec<Cell>>, Vec<Aggregate>);

const TRIAL_HEADER: [&str; 13] = ["point", "trial", "n", "sigma_t", "m", "decoded_mz", "fidelity", "accepted", "ambiguous", "success", "decays", "flips", "ties"];

struct TrialRow {
    point: usize,
    trial: u64,
    sigma_t: f64,
    m: u32,
    decoded_mz: i64,
    fidelity: f64,
    accepted: bool,
    ambiguous: bool,
    success: bool,
    decays: u64,
    flips: u64,
    ties: u64,
}

impl TrialRow {
    fn from_record(point: usize, trial: u64, noise: &NoiseModel, rec: &PreparationRecord) -> Self {
        let reps = rec.round_logs.iter().flat_map(|l| &l.repetitions);
        let count = |f: fn(&crate::noise::RepetitionEvent) -> bool| reps.clone().filter(|r| f(r)).count() as u64;
        Self {
            point,
            trial,
            sigma_t: noise.sigma_t,
            m: noise.repetitions,
            decoded_mz: rec.decoded_mz,
            fidelity: rec.fidelity,
            accepted: rec.accepted,
            ambiguous: rec.ambiguous,
            success: rec.accepted && !rec.ambiguous && rec.all_rounds_succeeded(),
            decays: count(|r| r.decayed),
            flips: count(|r| r.dephasing_flip),
            ties: rec.round_logs.iter().filter(|l| l.tie).count() as u64,
        }
    }

    fn cells(&self, n: usize) -> Vec<Cell> {
        vec![
            self.point.into(),
            self.trial.into(),
            n.into(),
            self.sigma_t.into(),
            self.m.into(),
            self.decoded_mz.into(),
            self.fidelity.into(),
            self.accepted.into(),
            self.ambiguous.into(),
            self.success.into(),
            self.decays.into(),
            self.flips.into(),
            self.ties.into(),
        ]
    }
}

/// Sweep points as (label, noise). Only `jitter-sweep` has more than one.
fn sweep_points(cfg: &RunConfig) -> Vec<(String, NoiseModel)> {
    let base = cfg.noise();
    if cfg.kind != ExperimentKind::JitterSweep {
        return vec![(cfg.kind.name().to_string(), base)];
    }
    let sigmas = if cfg.sigmas.is_empty() { vec![cfg.sigma_t] } else { cfg.sigmas.clone() };
    let ms = if cfg.m_values.is_empty() { vec![cfg.repetitions] } else { cfg.m_values.clone() };
    let mut out = Vec::new();
    for &m in &ms {
        for &s in &sigmas {
            out.push((format!("sigma_t={s:e},m={m}"), NoiseModel { sigma_t: s, repetitions: m, ..base }));
        }
    }
    out
}

fn trajectories(cfg: &RunConfig, workers: Option<usize>) -> Result<Table> {
    let points = sweep_points(cfg);
    for (_, noise) in &points {
        noise.validate()?;
    }
    let plan = match cfg.kind {
        ExperimentKind::Adiabatic => None,
        ExperimentKind::Targeted => Some(make_plan(cfg.n, cfg.gamma, cfg.rounds)?.with_target_offset(cfg.target)?),
        _ => Some(make_plan(cfg.n, cfg.gamma, cfg.rounds)?),
    };
    let adiabatic = match cfg.kind {
        ExperimentKind::Adiabatic => Some(make_adiabatic_plan(cfg.n, cfg.g)?),
        _ => None,
    };
    let initial = match &plan {
        Some(p) if p.target_offset == 0 => Some(CollectiveState::plus(p.n_spins)?),
        Some(p) => {
            let chi = tilt_angle(p.n_spins, p.target_offset)?;
            Some(CollectiveState::product(p.n_spins, 0.5 * (chi.cos() - chi.sin()).powi(2))?)
        }
        None => None,
    };
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let rows = run_trials(&jobs, cfg.master_seed, workers, |point, trial, rng| {
        let noise = &points[point].1;
        let rec = match (&adiabatic, &plan, &initial) {
            (Some(ap), _, _) => adiabatic_preparation(ap, rng)?,
            (None, Some(plan), Some(init)) => trajectory(cfg, plan, init, noise, rng)?,
            _ => unreachable!("trajectory experiments carry a plan"),
        };
        Ok(TrialRow::from_record(point, trial, noise, &rec))
    })?;
    let aggregates = points
        .iter()
        .enumerate()
        .map(|(p, (label, _))| {
            let mine: Vec<&TrialRow> = rows.iter().filter(|r| r.point == p).collect();
            let f: Vec<f64> = mine.iter().map(|r| r.fidelity).collect();
            let s: Vec<bool> = mine.iter().map(|r| r.success).collect();
            let a: Vec<bool> = mine.iter().map(|r| r.accepted).collect();
            aggregate(p, label.clone(), &f, &s, &a)
        })
        .collect();
    let cells = rows.iter().map(|r| r.cells(cfg.n)).collect();
    Ok((TRIAL_HEADER.to_vec(), cells, aggregates))
}

fn trajectory(cfg: &RunConfig, plan: &PreparationPlan, initial: &CollectiveState, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Result<PreparationRecord> {
    let ideal = noise.is_noiseless() && noise.repetitions == 1;
    match cfg.kind {
        ExperimentKind::Targeted if ideal && cfg.rounds.is_none() => run_targeted_preparation(cfg.n, cfg.target, cfg.gamma, rng),
        _ if ideal && plan.target_offset == 0 => run_from(plan, initial.clone(), rng),
        _ => run_noisy_from(plan, noise, initial.clone(), rng),
    }
}

fn dephasing_rates(cfg: &RunConfig) -> Result<Table> {
    let noise = cfg.device_noise();
    let gammas = if cfg.gammas.is_empty() { vec![cfg.gamma] } else { cfg.gammas.clone() };
    let rounds = cfg.rounds.unwrap_or(8);
    let mut rows = Vec::new();
    for &g in &gammas {
        if !(g > 0.0 && g.is_finite()) {
            return Err(invalid("gammas", format!("{g} must be positive and finite")));
        }
        for j in 1..=rounds {
            let t = round_time(j, g);
            rows.push(vec![
                g.into(),
                j.into(),
                t.into(),
                dephasing_flip_prob(t, noise.t_phi)?.into(),
                decay_prob(t, noise.t1)?.into(),
            ]);
        }
    }
    Ok((vec!["gamma", "j", "t_j", "p_tphi", "p_t1"], rows, Vec::new()))
}

fn fidelity_bound(cfg: &RunConfig) -> Result<Table> {
    let noise = cfg.device_noise();
    let ms = if cfg.m_values.is_empty() { (1..=15).step_by(2).collect() } else { cfg.m_values.clone() };
    let mut rows = Vec::new();
    for &m in &ms {
        let b = success_lower_bound(cfg.k, m, &noise, cfg.tie)?;
        let worst = b.per_round.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(vec![cfg.k.into(), m.into(), b.total.into(), worst.into()]);
    }
    Ok((vec!["k", "m", "p_success", "worst_round"], rows, Vec::new()))
}

fn picode(cfg: &RunConfig) -> Result<Table> {
    let mut rows = Vec::new();
    let fixed = prepare_9qubit(cfg.repetitions)?;
    rows.push(vec![Cell::Text("fixed".into()), NINE_QUBIT_ANGLE.into(), cfg.repetitions.into(), fixed.fidelity.into(), fixed.overlap.into(), fixed.p_succ.into(), f64::NAN.into()]);
    if cfg.find_angles {
        let p = PiCodeParams::nine_qubit();
        let search = find_angles(&p, 1)?;
        let found = prepare(&p, &search.angles, &[1], cfg.repetitions)?;
        rows.push(vec![Cell::Text("searched".into()), search.angles[0].into(), cfg.repetitions.into(), found.fidelity.into(), found.overlap.into(), found.p_succ.into(), search.residual.into()]);
    }
    Ok((vec!["source", "theta", "m", "fidelity", "overlap", "p_succ", "residual"], rows, Vec::new()))
}

fn oracle_check(cfg: &RunConfig, workers: Option<usize>) -> Result<Table> {
    let ns = if cfg.n_values.is_empty() { vec![2, 4, 6, 8, 10] } else { cfg.n_values.clone() };
    let plans = ns.iter().map(|&n| make_plan(n, cfg.gamma, cfg.rounds)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..ns.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let rows = run_trials(&jobs, cfg.master_seed, workers, |point, trial, _| {
        let plan = &plans[point];
        // both simulators consume identical copies of the trial stream
        let full = full_pe_run(plan, &mut trial_rng(cfg.master_seed, trial))?;
        let coll = run_preparation(plan, &mut trial_rng(cfg.master_seed, trial))?;
        let diff = full
            .record
            .born_probabilities
            .iter()
            .zip(&coll.born_probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let same = full.record.bits == coll.bits;
        Ok((point, trial, diff, same, full.record.fidelity, full.symmetry_deviation))
    })?;
    let aggregates = ns
        .iter()
        .enumerate()
        .map(|(p, n)| {
            let mine: Vec<_> = rows.iter().filter(|r| r.0 == p).collect();
            let f: Vec<f64> = mine.iter().map(|r| r.4).collect();
            let ok: Vec<bool> = mine.iter().map(|r| r.3 && r.2 < 1e-10).collect();
            aggregate(p, format!("n={n}"), &f, &ok, &vec![true; mine.len()])
        })
        .collect();
    let cells = rows
        .iter()
        .map(|&(p, t, d, same, f, sym)| vec![p.into(), t.into(), ns[p].into(), d.into(), same.into(), f.into(), sym.into()])
        .collect();
    Ok((vec!["point", "trial", "n", "max_prob_diff", "bits_equal", "fidelity", "symmetry_deviation"], cells, aggregates))
}
