//! Run configuration and the flat `key = value` format shared by files and CLI flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::noise::{NoiseModel, TieRule};

/// T1 of the ancilla (Table 1 of the device parameters).
pub const DEFAULT_T1: f64 = 50e-6;
/// Pure dephasing away from the sweet spot.
pub const DEFAULT_T_PHI: f64 = 2e-6;
/// Coupling used for the noise studies, rad/s.
pub const DEFAULT_GAMMA: f64 = 5e6;
pub const DEFAULT_TRIALS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Prepare,
    Targeted,
    DephasingRates,
    FidelityBound,
    JitterSweep,
    Picode,
    Adiabatic,
    OracleCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::Prepare,
        Self::Targeted,
        Self::DephasingRates,
        Self::FidelityBound,
        Self::JitterSweep,
        Self::Picode,
        Self::Adiabatic,
        Self::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Prepare => "prepare",
            Self::Targeted => "targeted",
            Self::DephasingRates => "dephasing-rates",
            Self::FidelityBound => "fidelity-bound",
            Self::JitterSweep => "jitter-sweep",
            Self::Picode => "picode",
            Self::Adiabatic => "adiabatic",
            Self::OracleCheck => "oracle-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Everything a run depends on. Same config, same bytes out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// rad/s
    pub gamma: f64,
    /// `None` means the experiment default (see [`RunConfig::noise`]).
    pub t1: Option<f64>,
    pub t_phi: Option<f64>,
    pub sigma_t: f64,
    /// M
    pub repetitions: u32,
    pub rounds: Option<u32>,
    pub trials: u64,
    pub master_seed: u64,
    /// target m_z for `targeted`
    pub target: i64,
    /// adiabatic coupling g, rad/s
    pub g: f64,
    /// K for `fidelity-bound`
    pub k: u32,
    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub m_values: Vec<u32>,
    pub n_values: Vec<usize>,
    pub tie: TieRule,
    pub find_angles: bool,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            n: 500,
            gamma: DEFAULT_GAMMA,
            t1: None,
            t_phi: None,
            sigma_t: 0.0,
            repetitions: 1,
            rounds: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            target: 0,
            g: 1.0,
            k: 20,
            gammas: Vec::new(),
            sigmas: Vec::new(),
            m_values: Vec::new(),
            n_values: Vec::new(),
            tie: TieRule::Coin,
            find_angles: false,
            csv: None,
            json: None,
        }
    }

    /// Builds a config from ordered `(key, value)` pairs; later pairs win.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let kind = pairs
            .iter()
            .rev()
            .find(|(k, _)| *k == "experiment")
            .ok_or_else(|| invalid("experiment", "missing experiment kind"))?
            .1
            .parse()?;
        let mut cfg = Self::new(kind);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => self.kind = v.parse()?,
            "n" => self.n = parse_int("n", v)?,
            "gamma" => self.gamma = parse_quantity(v, Dimension::Rate)?,
            "t1" => self.t1 = Some(parse_quantity(v, Dimension::Time)?),
            "tphi" | "t_phi" => self.t_phi = Some(parse_quantity(v, Dimension::Time)?),
            "sigma" if v.contains(',') => self.sigmas = parse_list(v, |s| parse_quantity(s, Dimension::Time))?,
            "sigma" | "sigma_t" => self.sigma_t = parse_quantity(v, Dimension::Time)?,
            "sigmas" => self.sigmas = parse_list(v, |s| parse_quantity(s, Dimension::Time))?,
            "m" if v.contains(',') || v.contains("..") => self.m_values = parse_int_list("m", v)?,
            "m" | "repetitions" => self.repetitions = parse_int("m", v)?,
            "rounds" => self.rounds = Some(parse_int("rounds", v)?),
            "trials" => self.trials = parse_int("trials", v)?,
            "seed" | "master_seed" => self.master_seed = parse_int("seed", v)?,
            "target" => self.target = parse_int("target", v)?,
            "g" => self.g = parse_quantity(v, Dimension::Rate)?,
            "k" => self.k = parse_int("k", v)?,
            "gammas" => self.gammas = parse_list(v, |s| parse_quantity(s, Dimension::Rate))?,
            "ns" => self.n_values = parse_int_list("ns", v)?,
            "tie" => {
                self.tie = match v {
                    "coin" => TieRule::Coin,
                    "fail" => TieRule::Fail,
                    _ => return Err(invalid("tie", format!("`{v}` is not coin|fail"))),
                }
            }
            "find_angles" | "find-angles" => self.find_angles = parse_bool(v)?,
            "csv" => self.csv = Some(PathBuf::from(v)),
            "json" => self.json = Some(PathBuf::from(v)),
            _ => return Err(invalid("config", format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Noise for the trajectory experiments: decoherence is off unless set.
    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            t1: self.t1.unwrap_or(f64::INFINITY),
            t_phi: self.t_phi.unwrap_or(f64::INFINITY),
            gamma: self.gamma,
            sigma_t: self.sigma_t,
            repetitions: self.repetitions,
        }
    }

    /// Noise for the analytic rate and bound experiments: Table 1 defaults.
    pub fn device_noise(&self) -> NoiseModel {
        NoiseModel {
            t1: self.t1.unwrap_or(DEFAULT_T1),
            t_phi: self.t_phi.unwrap_or(DEFAULT_T_PHI),
            ..self.noise()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "need at least one trial"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("{} must be positive and finite", self.gamma)));
        }
        self.noise().validate()?;
        self.device_noise().validate()
    }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid("config", format!("line {}: expected key = value", lineno + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// seconds; accepts s, ms, us, µs, ns, ps and `inf`
    Time,
    /// s⁻¹ (rad/s); accepts Hz, kHz, MHz, GHz
    Rate,
}

/// "5 MHz" → 5e6, "2us" → 2e-6, "1e-9" → 1e-9.
pub fn parse_quantity(s: &str, dim: Dimension) -> Result<f64> {
    let s = s.trim();
    let name = match dim {
        Dimension::Time => "time",
        Dimension::Rate => "rate",
    };
    if dim == Dimension::Time && matches!(s, "inf" | "infinity" | "none") {
        return Ok(f64::INFINITY);
    }
    let split = s
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && c != 'e' && c != 'E' || (c == 'e' || c == 'E') && !is_exponent(s, i))
        .map_or(s.len(), |(i, _)| i);
    let (num, unit) = s.split_at(split);
    let x: f64 = num.trim().parse().map_err(|_| invalid(name, format!("cannot parse `{s}`")))?;
    let scale = match (dim, unit.trim()) {
        (_, "") => 1.0,
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "ms") => 1e-3,
        (Dimension::Time, "us" | "µs" | "μs") => 1e-6,
        (Dimension::Time, "ns") => 1e-9,
        (Dimension::Time, "ps") => 1e-12,
        (Dimension::Rate, "Hz") => 1.0,
        (Dimension::Rate, "kHz") => 1e3,
        (Dimension::Rate, "MHz") => 1e6,
        (Dimension::Rate, "GHz") => 1e9,
        (_, u) => return Err(invalid(name, format!("unknown unit `{u}` in `{s}`"))),
    };
    if !x.is_finite() {
        return Err(invalid(name, format!("`{s}` is not finite")));
    }
    Ok(x * scale)
}

// an `e` is an exponent marker when a digit precedes it and a digit or sign follows
fn is_exponent(s: &str, i: usize) -> bool {
    let b = s.as_bytes();
    i > 0 && (b[i - 1].is_ascii_digit() || b[i - 1] == b'.') && b.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
}

fn parse_int<T: FromStr>(name: &'static str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| invalid(name, format!("`{s}` is not a valid integer")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid("find_angles", format!("`{s}` is not a boolean"))),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| f(x.trim())).collect()
}

/// Comma list whose items may be inclusive ranges `a..b`.
pub fn parse_int_list<T>(name: &'static str, s: &str) -> Result<Vec<T>>
where
    T: FromStr + TryFrom<u64>,
{
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = parse_int(name, a)?;
            let b: u64 = parse_int(name, b.trim_start_matches('='))?;
            if a > b {
                return Err(invalid(name, format!("empty range `{item}`")));
            }
            for x in a..=b {
                out.push(T::try_from(x).map_err(|_| invalid(name, format!("{x} out of range")))?);
            }
        } else {
            out.push(parse_int(name, item)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities() {
        assert_eq!(parse_quantity("5 MHz", Dimension::Rate).unwrap(), 5e6);
        assert_eq!(parse_quantity("5e6", Dimension::Rate).unwrap(), 5e6);
        assert_eq!(parse_quantity("2us", Dimension::Time).unwrap(), 2e-6);
        assert_eq!(parse_quantity("0.5e-9", Dimension::Time).unwrap(), 0.5e-9);
        assert_eq!(parse_quantity("10 ns", Dimension::Time).unwrap(), 10e-9);
        assert!(parse_quantity("inf", Dimension::Time).unwrap().is_infinite());
        assert!(parse_quantity("5 MHz", Dimension::Time).is_err());
        assert!(parse_quantity("abc", Dimension::Time).is_err());
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_int_list::<u32>("m", "1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_int_list::<u32>("m", "1,3,5").unwrap(), vec![1, 3, 5]);
        assert!(parse_int_list::<u32>("m", "5..1").is_err());
    }

    #[test]
    fn file_and_overrides() {
        let text = "# jitter study\nexperiment = jitter-sweep\nn = 500\nsigma = 0.5e-9, 1e-9\nm = 1,3,5 # votes\ntrials = 20\n";
        let map = parse_config_text(text).unwrap();
        let mut pairs: Vec<(&str, &str)> = map.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        pairs.push(("trials", "7"));
        let cfg = RunConfig::from_pairs(pairs).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::JitterSweep);
        assert_eq!(cfg.sigmas, vec![0.5e-9, 1e-9]);
        assert_eq!(cfg.m_values, vec![1, 3, 5]);
        assert_eq!(cfg.trials, 7);
        assert!(parse_config_text("novalue").is_err());
        assert!(RunConfig::from_pairs([("n", "4")]).is_err());
        assert!(RunConfig::from_pairs([("experiment", "prepare"), ("bogus", "1")]).is_err());
    }

    #[test]
    fn noise_defaults() {
        let cfg = RunConfig::new(ExperimentKind::Prepare);
        assert!(cfg.noise().is_noiseless());
        let dev = cfg.device_noise();
        assert_eq!((dev.t1, dev.t_phi), (DEFAULT_T1, DEFAULT_T_PHI));
    }
}
