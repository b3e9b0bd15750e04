//! Phase sensitivity of Dicke probes under a J_y rotation.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::collective_spin::{basis_index, CollectiveState, OperatorSpec};
use crate::error::{invalid, Error, Result};

/// ⟨J_z(θ)⟩ = (N/2) sin θ for the Ramsey state e^{−i(θ−π/2)J_y}|0…0⟩.
pub fn ramsey_expectation(n_spins: usize, theta: f64) -> f64 {
    0.5 * n_spins as f64 * theta.sin()
}

/// e^{iπ/2·J_y}|0…0⟩.
pub fn ramsey_state(n_spins: usize) -> Result<CollectiveState> {
    let top = CollectiveState::dicke(n_spins, n_spins as i64 / 2)?;
    Ok(top.rotate_y(-std::f64::consts::FRAC_PI_2))
}

/// (Δθ)², or a divergence marker when ∂_θ⟨M⟩ vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Sensitivity {
    Finite(f64),
    Divergent,
}

impl Sensitivity {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Divergent => None,
        }
    }
}

const DERIVATIVE_FLOOR: f64 = 1e-10;

/// (ΔM)²/|∂_θ⟨M⟩|² on e^{−iθJ_y}|ψ⟩, with ∂_θ⟨M⟩ = ⟨i[J_y, M]⟩.
pub fn error_propagation(state: &CollectiveState, measured: &OperatorSpec, theta: f64) -> Sensitivity {
    let rotated = state.rotate_y(theta);
    let mean = rotated.expectation(measured).re;
    let second = rotated.expectation(&measured.pow(2)).re;
    let gen = OperatorSpec::jy().commutator(measured).scale(C64::new(0.0, 1.0));
    let deriv = rotated.expectation(&gen).re;
    if deriv.abs() < DERIVATIVE_FLOOR {
        return Sensitivity::Divergent;
    }
    Sensitivity::Finite((second - mean * mean).max(0.0) / (deriv * deriv))
}

/// Moments of |N, m_z⟩ entering the J_z² estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DickeMoments {
    pub jx2: f64,
    pub jy2: f64,
    pub jz2: f64,
    pub jz_jx2_jz: f64,
    /// (ΔJ_x²)² = ⟨J_x⁴⟩ − ⟨J_x²⟩²
    pub var_jx2: f64,
    /// (ΔJ_z²)² = ⟨J_z⁴⟩ − ⟨J_z²⟩²
    pub var_jz2: f64,
}

/// Moments by explicit operator products on the Dicke vector.
pub fn dicke_moments(n_spins: usize, m_z: i64) -> Result<DickeMoments> {
    let d = CollectiveState::dicke(n_spins, m_z)?;
    let ev = |op: &OperatorSpec| d.expectation(op).re;
    let (jx, jy, jz) = (OperatorSpec::jx(), OperatorSpec::jy(), OperatorSpec::jz());
    let jx2 = ev(&jx.pow(2));
    let jz2 = ev(&jz.pow(2));
    Ok(DickeMoments {
        jx2,
        jy2: ev(&jy.pow(2)),
        jz2,
        jz_jx2_jz: ev(&(&(&jz * &jx.pow(2)) * &jz)),
        var_jx2: ev(&jx.pow(4)) - jx2 * jx2,
        var_jz2: ev(&jz.pow(4)) - jz2 * jz2,
    })
}

/// (Δθ)² for measuring J_z² on e^{−iθJ_y}|N, m_z⟩, evaluated term by term.
pub fn jz2_variance(n_spins: usize, m_z: i64, theta: f64) -> Result<f64> {
    let mo = dicke_moments(n_spins, m_z)?;
    jz2_variance_from(&mo, theta)
}

fn jz2_variance_from(mo: &DickeMoments, theta: f64) -> Result<f64> {
    let t2 = theta.tan().powi(2);
    if t2 == 0.0 || !t2.is_finite() {
        return Err(Error::DivergentSensitivity);
    }
    let denom = 4.0 * (mo.jx2 - mo.jz2).powi(2);
    if denom == 0.0 {
        return Err(Error::DivergentSensitivity);
    }
    // (ΔJ_x²)² f(θ) with f(θ) = (ΔJ_z²)²/((ΔJ_x²)² tan²θ) + tan²θ
    let f_term = mo.var_jz2 / t2 + mo.var_jx2 * t2;
    let num = f_term + 4.0 * mo.jx2 - 3.0 * mo.jy2 - 2.0 * mo.jz2 * (1.0 + mo.jx2) + 6.0 * mo.jz_jx2_jz;
    Ok(num / denom)
}

fn regime_denominator(n_spins: usize, m_z: i64) -> Result<f64> {
    basis_index(n_spins, m_z)?;
    let n = n_spins as f64;
    let m = m_z as f64;
    let d = n * n + 2.0 * n - 12.0 * m * m;
    if d <= 0.0 {
        return Err(Error::OutOfRegime(format!("N²+2N−12m_z² = {d} for N={n_spins}, m_z={m_z}")));
    }
    Ok(d)
}

/// Closed form (2m²+2)/D + (64m⁴−16m²)/D², D = N²+2N−12m².
pub fn min_variance(n_spins: usize, m_z: i64) -> Result<f64> {
    let d = regime_denominator(n_spins, m_z)?;
    let m2 = (m_z * m_z) as f64;
    Ok((2.0 * m2 + 2.0) / d + (64.0 * m2 * m2 - 16.0 * m2) / (d * d))
}

/// θ → 0 limit of [`jz2_variance`] for a Dicke probe: (8m²+2)/D + (64m⁴−16m²)/D².
///
/// Agrees with [`min_variance`] only at m_z = 0.
pub fn small_angle_limit(n_spins: usize, m_z: i64) -> Result<f64> {
    let d = regime_denominator(n_spins, m_z)?;
    let m2 = (m_z * m_z) as f64;
    Ok((8.0 * m2 + 2.0) / d + (64.0 * m2 * m2 - 16.0 * m2) / (d * d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub n_spins: usize,
    pub m_z: i64,
    pub theta_opt: f64,
    pub variance_at_opt: f64,
    pub closed_form_min: f64,
    pub small_angle_limit: f64,
    pub moments: DickeMoments,
}

impl SensitivityReport {
    /// |numeric − closed form| / closed form.
    pub fn relative_gap(&self) -> f64 {
        (self.variance_at_opt - self.closed_form_min).abs() / self.closed_form_min
    }
}

pub const THETA_LOWER: f64 = 1e-6;
pub const THETA_TOL: f64 = 1e-8;

/// Minimizes [`jz2_variance`] over θ ∈ (0, π/2).
pub fn minimize_jz2_variance(n_spins: usize, m_z: i64) -> Result<SensitivityReport> {
    let mo = dicke_moments(n_spins, m_z)?;
    let f = |t: f64| jz2_variance_from(&mo, t).unwrap_or(f64::INFINITY);
    let hi = std::f64::consts::FRAC_PI_2 - THETA_LOWER;
    let (mut theta, mut value) = golden_section(&f, THETA_LOWER, hi, THETA_TOL);
    // Unimodality check: a coarse scan must not beat the golden-section result.
    let steps = 400;
    let width = (hi - THETA_LOWER) / steps as f64;
    let (best_i, best) = (0..=steps)
        .map(|i| (i, f(THETA_LOWER + i as f64 * width)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    if best < value {
        let c = THETA_LOWER + best_i as f64 * width;
        let (t, v) = golden_section(&f, (c - width).max(THETA_LOWER), (c + width).min(hi), THETA_TOL);
        theta = t;
        value = v;
    }
    if !value.is_finite() || value <= 0.0 {
        return Err(invalid("m_z", format!("no finite minimum for N={n_spins}, m_z={m_z}")));
    }
    Ok(SensitivityReport {
        n_spins,
        m_z,
        theta_opt: theta,
        variance_at_opt: value,
        closed_form_min: min_variance(n_spins, m_z)?,
        small_angle_limit: small_angle_limit(n_spins, m_z)?,
        moments: mo,
    })
}

/// Golden-section search for a minimum on [a, b]; returns (x, f(x)).
pub fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // the endpoints may beat the interior probes when the minimum sits on the boundary
    [(a, f(a)), (b, f(b)), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("four candidates")
}
