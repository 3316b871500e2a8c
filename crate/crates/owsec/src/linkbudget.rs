//! Inter-satellite link design around a security link margin.
//!
//! Conventions: losses are stored as positive dB magnitudes and subtracted,
//! gains are added; linear quantities are converted with `db`/`from_db`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::{Error, Result};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 2.997_924_58e8;

pub fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(decibels: f64) -> f64 {
    10f64.powf(decibels / 10.0)
}

/// Physical parameters of one inter-satellite link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Laser wavelength in meters.
    pub lambda_m: f64,
    /// Pulse rate B in pulses per second.
    pub pulse_rate_hz: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Transmitter optical efficiency.
    pub eta_t: f64,
    /// Receiver optical efficiency.
    pub eta_r: f64,
    /// Telescope gains (linear); `None` means "use the optimized gain".
    pub g_t: Option<f64>,
    pub g_r: Option<f64>,
    /// Inter-satellite distance in meters.
    pub range_m: f64,
    /// Maximum pointing error in radians (deterministic pointing model).
    pub theta_max_rad: f64,
    /// Pointing jitter standard deviation in radians, for the outage formula.
    pub sigma_theta_rad: Option<f64>,
    /// Other losses as a positive dB magnitude.
    pub l_other_db: f64,
    /// Fraction of Bob's photon energy gathered by Eve.
    pub gamma: f64,
}

impl LinkParams {
    fn validate(&self) -> Result<()> {
        for (name, v, lo) in [
            ("lambda_m", self.lambda_m, f64::MIN_POSITIVE),
            ("pulse_rate_hz", self.pulse_rate_hz, f64::MIN_POSITIVE),
            ("range_m", self.range_m, f64::MIN_POSITIVE),
        ] {
            if !v.is_finite() || v < lo {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        for (name, v) in [("eta_d", self.eta_d), ("eta_t", self.eta_t), ("eta_r", self.eta_r)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        if self.theta_max_rad < 0.0 || self.l_other_db < 0.0 || self.gamma < 0.0 {
            return Err(Error::Config(
                "theta_max, l_other_db and gamma must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn eta_eff(&self) -> f64 {
        self.eta_t * self.eta_r
    }
}

/// Parses the flat `key = value` link configuration.
///
/// Required keys (units as stated): lambda_nm, pulse_rate_ghz, eta_d, eta_t,
/// eta_r, theta_max_urad, l_other_db. Optional: sigma_theta_urad, gamma
/// (default 1), range_km (default 1000), g_t_db, g_r_db.
pub fn parse_link_config(text: &str) -> Result<LinkParams> {
    let mut kv = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected key = value, got {raw:?}",
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        let value: f64 = v.trim().parse().map_err(|_| {
            Error::Config(format!("line {}: value for {key} is not a number", lineno + 1))
        })?;
        kv.insert(key, value);
    }

    let required = [
        "lambda_nm",
        "pulse_rate_ghz",
        "eta_d",
        "eta_t",
        "eta_r",
        "theta_max_urad",
        "l_other_db",
    ];
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|k| !kv.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing config keys: {}", missing.join(", "))));
    }

    let params = LinkParams {
        lambda_m: kv["lambda_nm"] * 1e-9,
        pulse_rate_hz: kv["pulse_rate_ghz"] * 1e9,
        eta_d: kv["eta_d"],
        eta_t: kv["eta_t"],
        eta_r: kv["eta_r"],
        g_t: kv.get("g_t_db").map(|&d| from_db(d)),
        g_r: kv.get("g_r_db").map(|&d| from_db(d)),
        range_m: kv.get("range_km").copied().unwrap_or(1000.0) * 1e3,
        theta_max_rad: kv["theta_max_urad"] * 1e-6,
        sigma_theta_rad: kv.get("sigma_theta_urad").map(|&u| u * 1e-6),
        l_other_db: kv["l_other_db"],
        gamma: kv.get("gamma").copied().unwrap_or(1.0),
    };
    params.validate()?;
    Ok(params)
}

/// Gaussian-beam pointing loss factor e^{-G theta^2}.
pub fn pointing_loss(g: f64, theta: f64) -> f64 {
    debug_assert!(g > 0.0 && theta >= 0.0);
    (-g * theta * theta).exp()
}

/// End-to-end efficiency before the unity clamp.
pub fn end_to_end_efficiency_raw(p: &LinkParams, g: f64) -> f64 {
    let free_space = (p.lambda_m / (4.0 * std::f64::consts::PI * p.range_m)).powi(2);
    let l_p_tot = pointing_loss(g, p.theta_max_rad).powi(2);
    p.eta_d * g * p.eta_t * g * p.eta_r * free_space * l_p_tot * from_db(-p.l_other_db)
}

/// End-to-end efficiency eta, clamped to at most 1.
///
/// A raw value above 1 marks a non-physical parameter set; callers that need
/// to surface it compare against [`end_to_end_efficiency_raw`].
pub fn end_to_end_efficiency(p: &LinkParams, g: f64) -> f64 {
    end_to_end_efficiency_raw(p, g).min(1.0)
}

/// Effective gain in dB at a symmetric telescope gain `g`.
pub fn effective_gain_db(p: &LinkParams, g: f64) -> f64 {
    2.0 * db(g * p.eta_eff()) + 2.0 * db(pointing_loss(g, p.theta_max_rad))
}

/// Maximizes the effective gain over the telescope gain.
///
/// The stationary point sits at g = 1/theta_max^2; the scalar search is
/// seeded there and returns (g_star, G_eff(g_star) in dB).
pub fn optimize_effective_gain(p: &LinkParams) -> Result<(f64, f64)> {
    if p.theta_max_rad <= 0.0 {
        return Err(Error::Domain("theta_max must be positive to optimize the gain".into()));
    }
    let seed = 1.0 / (p.theta_max_rad * p.theta_max_rad);
    let (lg_star, g_eff) = crate::opt::golden_max(
        |lg| effective_gain_db(p, 10f64.powf(lg)),
        seed.log10() - 2.0,
        seed.log10() + 2.0,
        1e-12,
    );
    Ok((10f64.powf(lg_star), g_eff))
}

/// Outage probability of the pointing loss budget, evaluated verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageResult {
    /// Clamped to [0, 1] for reporting.
    pub value: f64,
    pub raw: f64,
    /// False when the raw formula left [0, 1]; the formula's exponent is
    /// dimensionally suspect, so out-of-range results are surfaced, not fixed.
    pub in_domain: bool,
}

/// P_out = (1 + K / (2 sigma^2 eta_eff G)) e^{-K / (2 sigma^2 eta_eff)} with
/// K = ln(10)/10 * L_p[dB].
pub fn outage_probability(sigma_theta: f64, g: f64, eta_eff: f64, l_p_db: f64) -> OutageResult {
    let k = std::f64::consts::LN_10 / 10.0 * l_p_db;
    let two_sigma_sq = 2.0 * sigma_theta * sigma_theta;
    let raw = (1.0 + k / (two_sigma_sq * eta_eff * g)) * (-k / (two_sigma_sq * eta_eff)).exp();
    OutageResult {
        value: raw.clamp(0.0, 1.0),
        raw,
        in_domain: (0.0..=1.0).contains(&raw),
    }
}

/// Security link margin in mean photons: gamma * eta * n_t at the optimal gain.
pub fn security_link_margin(p: &LinkParams, n_t: f64) -> Result<f64> {
    let (g_star, _) = optimize_effective_gain(p)?;
    Ok(p.gamma * end_to_end_efficiency(p, g_star) * n_t)
}

/// One row of the required-transmit table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RangePoint {
    pub range_m: f64,
    /// Transmit photons per pulse needed for n_b_star photons at the
    /// operating point, security margin included.
    pub n_t: f64,
    pub power_w: f64,
    pub eta: f64,
    /// Security link margin gamma * eta * n_t in mean photons.
    pub slm: f64,
}

/// Single-photon energy h c / lambda in joules.
pub fn photon_energy(lambda_m: f64) -> f64 {
    PLANCK * LIGHT_SPEED / lambda_m
}

/// Transmit photons per pulse and optical power over a range grid.
///
/// n_t(R) = n_b_star / (eta(R) (1 + gamma)); power = n_t * B * h c / lambda.
pub fn required_transmit(
    p: &LinkParams,
    n_b_star: f64,
    range_grid: &[f64],
) -> Result<Vec<RangePoint>> {
    if n_b_star <= 0.0 {
        return Err(Error::Domain(format!("n_b_star = {n_b_star} must be positive")));
    }
    p.validate()?;
    let g_star = match (p.g_t, p.g_r) {
        (Some(gt), Some(gr)) => (gt * gr).sqrt(),
        _ => optimize_effective_gain(p)?.0,
    };
    let e_photon = photon_energy(p.lambda_m);
    let mut rows = Vec::with_capacity(range_grid.len());
    for &range_m in range_grid {
        if !(range_m > 0.0) {
            return Err(Error::Domain(format!("range {range_m} must be positive")));
        }
        let mut at_range = *p;
        at_range.range_m = range_m;
        let eta = end_to_end_efficiency(&at_range, g_star);
        if eta <= 0.0 || !eta.is_finite() {
            return Err(Error::Numerical(format!("range {range_m} m is unreachable: eta = {eta}")));
        }
        let n_t = n_b_star / (eta * (1.0 + p.gamma));
        rows.push(RangePoint {
            range_m,
            n_t,
            power_w: n_t * p.pulse_rate_hz * e_photon,
            eta,
            slm: p.gamma * eta * n_t,
        });
    }
    Ok(rows)
}

/// Summary of a designed link at the reference range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkDesign {
    pub eta: f64,
    pub g_star: f64,
    pub g_eff_star_db: f64,
    pub slm_photons: f64,
    pub n_t_required: f64,
    pub power_w: f64,
    pub outage: Option<OutageResult>,
    /// True when the raw efficiency product exceeded unity and was clamped.
    pub eta_clamped: bool,
}

/// Designs the link at `p.range_m` for a target operating point `n_b_star`.
pub fn design(p: &LinkParams, n_b_star: f64) -> Result<LinkDesign> {
    p.validate()?;
    let (g_star, g_eff_star_db) = optimize_effective_gain(p)?;
    let eta_raw = end_to_end_efficiency_raw(p, g_star);
    let eta = eta_raw.min(1.0);
    let row = required_transmit(p, n_b_star, &[p.range_m])?.remove(0);
    let outage = p.sigma_theta_rad.map(|sigma| {
        let l_p_db = -db(pointing_loss(g_star, p.theta_max_rad).powi(2));
        outage_probability(sigma, g_star, p.eta_eff(), l_p_db)
    });
    Ok(LinkDesign {
        eta,
        g_star,
        g_eff_star_db,
        slm_photons: p.gamma * eta * row.n_t,
        n_t_required: row.n_t,
        power_w: row.power_w,
        outage,
        eta_clamped: eta_raw > 1.0,
    })
}

/// Abort predicate: the observed photon number departed from the calibrated
/// margin by more than `tolerance`.
pub fn should_abort(n_b_observed: f64, n_b_calibrated: f64, tolerance: f64) -> bool {
    (n_b_observed - n_b_calibrated).abs() > tolerance
}
