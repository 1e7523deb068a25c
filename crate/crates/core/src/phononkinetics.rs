//! Phonon-bath rates: orbital up/down transitions, a dephasing estimate and
//! the three spin-relaxation channels.
//!
//! `chi_rho` is kept in model units: with `Delta` in GHz, a rate is
//! `2 pi chi_rho Delta^n` times an occupation factor, in GHz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant over Planck constant, GHz/K.
pub const KB_OVER_H: f64 = 20.836_619_12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateModel {
    /// Kelvin.
    pub temperature: f64,
    pub chi_rho: f64,
    /// Density-of-states exponent; 3 for bulk, about 1.9 for the cantilever.
    pub dos_exponent: f64,
    /// Use `dos_exponent` in the single-phonon spin channel as well.
    pub geometry_corrected: bool,
}

impl Default for RateModel {
    fn default() -> Self {
        RateModel {
            temperature: 4.0,
            chi_rho: 1e-7,
            dos_exponent: 3.0,
            geometry_corrected: false,
        }
    }
}

impl RateModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid(
                "temperature",
                format!("must be > 0 K, got {}", self.temperature),
            ));
        }
        if !(1.0..=4.0).contains(&self.dos_exponent) {
            return Err(Error::invalid(
                "dos_exponent",
                format!("must lie in [1, 4], got {}", self.dos_exponent),
            ));
        }
        if !self.chi_rho.is_finite() || self.chi_rho < 0.0 {
            return Err(Error::invalid(
                "chi_rho",
                format!("must be finite and >= 0, got {}", self.chi_rho),
            ));
        }
        Ok(())
    }

    /// `k_B T / h` in GHz.
    pub fn thermal_frequency(&self) -> f64 {
        KB_OVER_H * self.temperature
    }

    pub fn with_chi_rho(self, chi_rho: f64) -> Self {
        RateModel { chi_rho, ..self }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {v}")))
    }
}

/// Bose-Einstein occupation of a mode at `nu` GHz and `t` K.
pub fn n_th(nu: f64, t: f64) -> Result<f64> {
    positive("frequency", nu)?;
    positive("temperature", t)?;
    Ok(1.0 / (nu / (KB_OVER_H * t)).exp_m1())
}

fn spectral_weight(delta: f64, m: &RateModel) -> f64 {
    2.0 * PI * m.chi_rho * delta.powf(m.dos_exponent)
}

/// Phonon absorption rate from the lower to the upper orbital branch, GHz.
pub fn gamma_up(delta: f64, m: &RateModel) -> Result<f64> {
    m.validate()?;
    Ok(spectral_weight(delta, m) * n_th(delta, m.temperature)?)
}

/// Phonon emission rate from the upper to the lower orbital branch, GHz.
pub fn gamma_down(delta: f64, m: &RateModel) -> Result<f64> {
    m.validate()?;
    Ok(spectral_weight(delta, m) * (n_th(delta, m.temperature)? + 1.0))
}

/// `gamma_up` plus a constant floor standing in for other dephasing.
pub fn dephasing_rate(delta: f64, m: &RateModel, floor: f64) -> Result<f64> {
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(Error::invalid("dephasing floor", format!("must be >= 0, got {floor}")));
    }
    Ok(gamma_up(delta, m)? + floor)
}

/// Splitting at which `gamma_up` peaks: the root of `n = x / (1 - e^-x)` with
/// `x = h Delta / k_B T`. There is no interior maximum for `n <= 1`.
pub fn gamma_up_peak(m: &RateModel) -> Result<f64> {
    m.validate()?;
    let n = m.dos_exponent;
    if n <= 1.0 {
        return Err(Error::Degenerate("gamma_up has no interior maximum for n <= 1".into()));
    }
    let g = |x: f64| x / -(-x).exp_m1() - n;
    let (mut lo, mut hi) = (1e-12, n + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi) * m.thermal_frequency())
}

/// Strain-susceptibility ratios entering the spin channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinFlipFactors {
    pub d_flip_over_d: f64,
    pub d_spin_over_d: f64,
}

impl SpinFlipFactors {
    pub fn new(d_flip_over_d: f64, d_spin_over_d: f64) -> Result<Self> {
        for (name, v) in [("d_flip_over_d", d_flip_over_d), ("d_spin_over_d", d_spin_over_d)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(SpinFlipFactors {
            d_flip_over_d,
            d_spin_over_d,
        })
    }

    /// First-order model `d_flip / d = min(c / Delta_gs, 1)`.
    pub fn inverse_splitting(flip_scale: f64, delta_gs: f64, d_spin_over_d: f64) -> Result<Self> {
        positive("delta_gs", delta_gs)?;
        if !(flip_scale.is_finite() && flip_scale >= 0.0) {
            return Err(Error::invalid("flip_scale", format!("must be >= 0, got {flip_scale}")));
        }
        Self::new((flip_scale / delta_gs).min(1.0), d_spin_over_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinT1Rates {
    pub single: f64,
    pub orbach: f64,
    pub offres: f64,
    pub total: f64,
}

/// Single-phonon, resonant two-phonon (Orbach) and off-resonant two-phonon
/// spin relaxation rates, GHz.
pub fn spin_t1_rates(omega_s: f64, delta_gs: f64, m: &RateModel, factors: &SpinFlipFactors) -> Result<SpinT1Rates> {
    positive("omega_s", omega_s)?;
    positive("delta_gs", delta_gs)?;
    let factors = SpinFlipFactors::new(factors.d_flip_over_d, factors.d_spin_over_d)?;
    m.validate()?;
    let exponent = if m.geometry_corrected { m.dos_exponent } else { 3.0 };
    let spin2 = factors.d_spin_over_d.powi(2);
    let flip2 = factors.d_flip_over_d.powi(2);

    let single = 2.0 * PI * spin2 * m.chi_rho * omega_s.powf(exponent) * n_th(omega_s, m.temperature)?;
    let orbach = 4.0 * flip2 * gamma_up(delta_gs, m)?;
    let offres = 8.0 * PI.powi(3) * flip2 * m.chi_rho.powi(2) * omega_s.powi(2) * m.thermal_frequency().powi(3);
    Ok(SpinT1Rates {
        single,
        orbach,
        offres,
        total: single + orbach + offres,
    })
}

/// Which rate expression observed data are assumed to follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateChannel {
    GammaUp,
    GammaDown,
    /// Orbach spin relaxation with `d_flip / d = min(flip_scale / Delta_gs, 1)`.
    Orbach {
        flip_scale: f64,
    },
}

impl RateChannel {
    fn unit_rate(&self, delta: f64, m: &RateModel) -> Result<f64> {
        let unit = m.with_chi_rho(1.0);
        match *self {
            RateChannel::GammaUp => gamma_up(delta, &unit),
            RateChannel::GammaDown => gamma_down(delta, &unit),
            RateChannel::Orbach { flip_scale } => {
                let f = SpinFlipFactors::inverse_splitting(flip_scale, delta, 0.0)?;
                Ok(4.0 * f.d_flip_over_d.powi(2) * gamma_up(delta, &unit)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateObservation {
    pub delta_gs: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiRhoFit {
    pub chi_rho: f64,
    pub std_err: f64,
    /// `ln(observed) - ln(model)` per row, in input order.
    pub log_residuals: Vec<f64>,
}

/// Least-squares estimate of `chi_rho` in log space.
///
/// Every channel is proportional to `chi_rho`, so the optimum is the mean log
/// ratio of observed to unit-coupling rates. A single row is an exact solve.
pub fn fit_chi_rho(observed: &[RateObservation], template: &RateModel, channel: RateChannel) -> Result<ChiRhoFit> {
    if observed.is_empty() {
        return Err(Error::Underdetermined { rows: 0, needed: 1 });
    }
    let mut logs = Vec::with_capacity(observed.len());
    for (i, row) in observed.iter().enumerate() {
        if !(row.rate.is_finite() && row.rate > 0.0) {
            return Err(Error::Schema {
                row: i as u64 + 1,
                reason: format!("rate must be positive, got {}", row.rate),
            });
        }
        let unit = channel.unit_rate(row.delta_gs, template)?;
        if unit <= 0.0 {
            return Err(Error::Degenerate(format!(
                "model rate vanishes at delta_gs = {}",
                row.delta_gs
            )));
        }
        logs.push(row.rate.ln() - unit.ln());
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let log_residuals: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let chi_rho = mean.exp();
    let std_err = if logs.len() > 1 {
        let s2 = log_residuals.iter().map(|r| r * r).sum::<f64>() / (n - 1.0);
        chi_rho * (s2 / n).sqrt()
    } else {
        0.0
    };
    Ok(ChiRhoFit {
        chi_rho,
        std_err,
        log_residuals,
    })
}

/// Lag-1 autocorrelation of a residual sequence, a whiteness indicator.
pub fn lag1_autocorrelation(residuals: &[f64]) -> f64 {
    let n = residuals.len();
    if n < 2 {
        return 0.0;
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let var: f64 = residuals.iter().map(|r| (r - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = residuals.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}
