use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke_core::harness::{monte_carlo, parse_config_text, ExperimentKind, RunConfig};
use dicke_core::Error;

#[derive(Parser)]
#[command(name = "dicke", version, about = "Dicke-state preparation by phase estimation")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Subcommand)]
enum Experiment {
    /// Untargeted preparation from |+⟩^⊗N
    Prepare(Flags),
    /// Post-selected preparation of a chosen m_z
    Targeted(Flags),
    /// Per-round dephasing and decay probabilities
    DephasingRates(Flags),
    /// Analytic success bound versus repetitions M
    FidelityBound(Flags),
    /// Mean fidelity versus timing jitter and M
    JitterSweep(Flags),
    /// Nine-qubit permutation-invariant code state
    Picode(Flags),
    /// Adiabatic-gate variant on (J_z² − J_z)/2
    Adiabatic(Flags),
    /// Full-state versus collective simulator agreement
    OracleCheck(Flags),
}

impl Experiment {
    fn split(self) -> (ExperimentKind, Flags) {
        use Experiment::*;
        match self {
            Prepare(f) => (ExperimentKind::Prepare, f),
            Targeted(f) => (ExperimentKind::Targeted, f),
            DephasingRates(f) => (ExperimentKind::DephasingRates, f),
            FidelityBound(f) => (ExperimentKind::FidelityBound, f),
            JitterSweep(f) => (ExperimentKind::JitterSweep, f),
            Picode(f) => (ExperimentKind::Picode, f),
            Adiabatic(f) => (ExperimentKind::Adiabatic, f),
            OracleCheck(f) => (ExperimentKind::OracleCheck, f),
        }
    }
}

/// Values accept units, e.g. `--gamma "5 MHz"`, `--tphi 2us`.
#[derive(Args)]
struct Flags {
    /// key = value file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    t1: Option<String>,
    #[arg(long)]
    tphi: Option<String>,
    /// one value, or a comma list for jitter-sweep
    #[arg(long)]
    sigma: Option<String>,
    /// repetitions M; a list or range like 1..15 for sweeps
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// target m_z
    #[arg(long, allow_hyphen_values = true)]
    target: Option<String>,
    /// adiabatic coupling
    #[arg(long)]
    g: Option<String>,
    /// rounds K for the bound
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    gammas: Option<String>,
    /// spin numbers for oracle-check
    #[arg(long)]
    ns: Option<String>,
    /// coin | fail
    #[arg(long)]
    tie: Option<String>,
    #[arg(long)]
    find_angles: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// directory for default output names
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("n", &self.n);
        push("gamma", &self.gamma);
        push("t1", &self.t1);
        push("tphi", &self.tphi);
        push("sigma", &self.sigma);
        push("m", &self.m);
        push("rounds", &self.rounds);
        push("trials", &self.trials);
        push("seed", &self.seed);
        push("target", &self.target);
        push("g", &self.g);
        push("k", &self.k);
        push("gammas", &self.gammas);
        push("ns", &self.ns);
        push("tie", &self.tie);
        if self.find_angles {
            out.push(("find_angles", "true".into()));
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        if let Some(p) = path(&self.csv) {
            out.push(("csv", p));
        }
        if let Some(p) = path(&self.json) {
            out.push(("json", p));
        }
        out
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn build_config(kind: ExperimentKind, flags: &Flags) -> Result<RunConfig, Failure> {
    let file = match &flags.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            parse_config_text(&text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => Default::default(),
    };
    let cli = flags.pairs();
    let mut pairs: Vec<(&str, &str)> = file.iter().filter(|(k, _)| *k != "experiment").map(|(k, v)| (k.as_str(), v.as_str())).collect();
    pairs.extend(cli.iter().map(|(k, v)| (*k, v.as_str())));
    let mut cfg = RunConfig::new(kind);
    for (k, v) in pairs {
        cfg.set(k, v).map_err(|e| Failure::Config(e.to_string()))?;
    }
    cfg.csv.get_or_insert_with(|| flags.out_dir.join(format!("{kind}.csv")));
    cfg.json.get_or_insert_with(|| flags.out_dir.join(format!("{kind}.json")));
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(kind: ExperimentKind, flags: &Flags) -> Result<String, Failure> {
    let cfg = build_config(kind, flags)?;
    let res = monte_carlo(&cfg).map_err(|e| match e {
        Error::InvalidParameter { .. } | Error::OddSpinNumber(_) | Error::TooFewSpins { .. } | Error::MzOutOfRange { .. } | Error::TooLargeForOracle { .. } => {
            Failure::Config(e.to_string())
        }
        _ => Failure::Runtime(e.to_string()),
    })?;
    res.write(cfg.csv.as_deref(), cfg.json.as_deref()).map_err(|e| Failure::Runtime(format!("writing output: {e}")))?;
    Ok(res.summary())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = cli.experiment.split();
    match run(kind, &flags) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
