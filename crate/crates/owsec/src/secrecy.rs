//! Wiretap scenario engines: closed-form rates where available, multistart
//! derivative-free optimization over the decoy parameters otherwise.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_decoy, bpsk_helstrom_channel, bpsk_homodyne_hard_channel, eve_raw_channel,
    holevo_leakage, ook_helstrom_channel, ook_photon_counting_channel, DecoyPolicy, DetectorNoise,
    EveOverlapLaw, Modulation, PhotonBudget,
};
use crate::infotheory::{
    compose, h2, is_stochastically_degraded, mutual_information, BinaryChannel, Prior,
};
use crate::opt::{golden_max, nelder_mead_max_box};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Bob and Eve both apply optimal quantum detection.
    Qq,
    /// Bob uses classical detection, Eve optimal quantum detection.
    Cq,
    /// Bob uses classical detection, Eve is bounded only by the Holevo limit.
    Dw,
}

/// Full description of a wiretap evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub modulation: Modulation,
    pub scenario: Scenario,
    pub budget: PhotonBudget,
    /// Photon-counter imperfections; only consulted when Bob photon-counts
    /// (OOK in the CQ and DW scenarios).
    pub noise: DetectorNoise,
    /// When false, the optimizer holds (a, b) = (0, 1) and tunes the prior only.
    pub use_decoys: bool,
    pub eve_law: EveOverlapLaw,
}

impl ScenarioSpec {
    pub fn new(modulation: Modulation, scenario: Scenario, budget: PhotonBudget) -> Self {
        Self {
            modulation,
            scenario,
            budget,
            noise: DetectorNoise::default(),
            use_decoys: true,
            eve_law: EveOverlapLaw::default(),
        }
    }

    pub fn with_noise(mut self, noise: DetectorNoise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_decoys(mut self, use_decoys: bool) -> Self {
        self.use_decoys = use_decoys;
        self
    }

    pub fn with_eve_law(mut self, law: EveOverlapLaw) -> Self {
        self.eve_law = law;
        self
    }

    pub fn with_n_bob(mut self, n_bob: f64) -> Self {
        self.budget.n_bob = n_bob;
        self
    }
}

/// A secrecy rate together with the policy that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// Signed secrecy rate in bits per channel use; negative means the
    /// protocol must abort. Consumers clamp at zero for display.
    pub rate: f64,
    pub policy_star: DecoyPolicy,
    pub i_bob: f64,
    /// I(V:Z) for QQ/CQ, the Holevo leakage for DW.
    pub i_eve_or_holevo: f64,
    /// Whether Eve's raw measured channel is a stochastically degraded
    /// version of Bob's raw channel at this operating point.
    pub degraded: bool,
    /// False when the local refinement hit its iteration cap and the result
    /// fell back to the best coarse-grid value.
    pub converged: bool,
}

/// Bob's detector channel before the decoy cascade.
fn raw_bob_channel(spec: &ScenarioSpec, q_plus: Prior) -> BinaryChannel {
    match (spec.scenario, spec.modulation) {
        (Scenario::Qq, Modulation::Ook) => ook_helstrom_channel(spec.budget, false, q_plus),
        (Scenario::Qq, Modulation::Bpsk) => bpsk_helstrom_channel(spec.budget, false, q_plus),
        (_, Modulation::Ook) => ook_photon_counting_channel(spec.budget, spec.noise),
        (_, Modulation::Bpsk) => bpsk_homodyne_hard_channel(spec.budget),
    }
}

fn eve_raw(spec: &ScenarioSpec, policy: DecoyPolicy) -> BinaryChannel {
    match spec.scenario {
        // QQ pins Eve to the constellation-matched overlap regardless of the
        // configured law; the closed form below depends on it.
        Scenario::Qq => eve_raw_channel(policy, spec.budget, spec.modulation, EveOverlapLaw::Matched),
        _ => eve_raw_channel(policy, spec.budget, spec.modulation, spec.eve_law),
    }
}

pub(crate) fn raw_bob_channel_for(spec: &ScenarioSpec, q_plus: Prior) -> BinaryChannel {
    raw_bob_channel(spec, q_plus)
}

pub(crate) fn eve_raw_channel_for(spec: &ScenarioSpec, policy: DecoyPolicy) -> BinaryChannel {
    eve_raw(spec, policy)
}

/// Signed rate only, for optimizer inner loops.
fn rate_only(spec: &ScenarioSpec, policy: DecoyPolicy) -> f64 {
    let (decoy, q_plus) = apply_decoy(policy);
    let bob = compose(decoy, raw_bob_channel(spec, q_plus));
    let prior_v = Prior { q0: policy.q_v0 };
    let i_bob = mutual_information(bob, prior_v);
    let leakage = match spec.scenario {
        Scenario::Dw => holevo_leakage(spec.modulation, spec.eve_law, spec.budget),
        _ => {
            let eve = compose(decoy, eve_raw(spec, policy));
            mutual_information(eve, prior_v)
        }
    };
    i_bob - leakage
}

/// Rate plus diagnostics at one decoy policy.
pub fn secrecy_rate_at(spec: &ScenarioSpec, policy: DecoyPolicy) -> RateResult {
    let (decoy, q_plus) = apply_decoy(policy);
    let raw_bob = raw_bob_channel(spec, q_plus);
    let bob = compose(decoy, raw_bob);
    let prior_v = Prior { q0: policy.q_v0 };
    let i_bob = mutual_information(bob, prior_v);
    let raw_eve = eve_raw(spec, policy);
    let leakage = match spec.scenario {
        Scenario::Dw => holevo_leakage(spec.modulation, spec.eve_law, spec.budget),
        _ => mutual_information(compose(decoy, raw_eve), prior_v),
    };
    RateResult {
        rate: i_bob - leakage,
        policy_star: policy,
        i_bob,
        i_eve_or_holevo: leakage,
        degraded: is_stochastically_degraded(raw_bob, raw_eve),
        converged: true,
    }
}

/// Closed-form QQ secrecy capacity: h(eps_eve) - h(eps_bob) at uniform input.
pub fn secrecy_capacity_qq(modulation: Modulation, budget: PhotonBudget) -> RateResult {
    let u = Prior::uniform();
    let (bob, eve) = match modulation {
        Modulation::Ook => (
            ook_helstrom_channel(budget, false, u),
            ook_helstrom_channel(budget, true, u),
        ),
        Modulation::Bpsk => (
            bpsk_helstrom_channel(budget, false, u),
            bpsk_helstrom_channel(budget, true, u),
        ),
    };
    RateResult {
        rate: h2(eve.e01) - h2(bob.e01),
        policy_star: DecoyPolicy::no_decoy(0.5),
        i_bob: 1.0 - h2(bob.e01),
        i_eve_or_holevo: 1.0 - h2(eve.e01),
        degraded: is_stochastically_degraded(bob, eve),
        converged: true,
    }
}

/// Best rate over the prior alone, holding (a, b) = (0, 1).
fn optimize_prior_only(spec: &ScenarioSpec) -> RateResult {
    let f = |q: f64| rate_only(spec, DecoyPolicy::no_decoy(q));
    let mut best_q = 0.5;
    let mut best = f(0.5);
    for i in 0..=200 {
        let q = i as f64 / 200.0;
        let v = f(q);
        if v > best {
            best = v;
            best_q = q;
        }
    }
    let lo = (best_q - 0.01).max(0.0);
    let hi = (best_q + 0.01).min(1.0);
    let (q_star, _) = golden_max(f, lo, hi, 1e-10);
    let q_star = if f(q_star) >= best { q_star } else { best_q };
    secrecy_rate_at(spec, DecoyPolicy::no_decoy(q_star))
}

const GRID_POINTS: usize = 21;

/// Maximize the secrecy rate over (a, b, q_v0).
///
/// Multistart coarse grid, then simplex refinement from the top grid points
/// and from the prior-only optimum; ties within 1e-9 prefer the least decoy
/// perturbation. The QQ scenario short-circuits to the closed form.
pub fn optimize_decoy(spec: &ScenarioSpec) -> RateResult {
    if spec.scenario == Scenario::Qq {
        let closed = secrecy_capacity_qq(spec.modulation, spec.budget);
        // Degenerate priors dominate once Eve's channel is the better one.
        let fallback = optimize_prior_only(spec);
        if fallback.rate > closed.rate + 1e-9 {
            return fallback;
        }
        return closed;
    }

    let baseline = optimize_prior_only(spec);
    if !spec.use_decoys {
        return baseline;
    }

    let f = |x: [f64; 3]| {
        rate_only(
            spec,
            DecoyPolicy { a: x[0], b: x[1], q_v0: x[2] },
        )
    };

    let mut cells: Vec<([f64; 3], f64)> = Vec::with_capacity(GRID_POINTS.pow(3));
    for ia in 0..GRID_POINTS {
        for ib in 0..GRID_POINTS {
            for iq in 0..GRID_POINTS {
                let x = [
                    ia as f64 / (GRID_POINTS - 1) as f64,
                    ib as f64 / (GRID_POINTS - 1) as f64,
                    iq as f64 / (GRID_POINTS - 1) as f64,
                ];
                cells.push((x, f(x)));
            }
        }
    }
    cells.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));

    let mut starts: Vec<[f64; 3]> = cells.iter().take(5).map(|(x, _)| *x).collect();
    let p = baseline.policy_star;
    starts.push([p.a, p.b, p.q_v0]);

    // candidates: (rate, policy, converged)
    let mut candidates: Vec<(f64, DecoyPolicy, bool)> = vec![
        (cells[0].1, DecoyPolicy { a: cells[0].0[0], b: cells[0].0[1], q_v0: cells[0].0[2] }, true),
        (baseline.rate, baseline.policy_star, true),
    ];
    let mut any_refined = false;
    for x0 in starts {
        let r = nelder_mead_max_box(f, x0, 0.05, 400);
        any_refined |= r.converged;
        candidates.push((
            r.value,
            DecoyPolicy { a: r.x[0], b: r.x[1], q_v0: r.x[2] },
            r.converged,
        ));
    }

    let best_rate = candidates
        .iter()
        .map(|c| c.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let winner = candidates
        .iter()
        .filter(|c| c.0 >= best_rate - 1e-9)
        .min_by(|a, b| {
            a.1.perturbation()
                .partial_cmp(&b.1.perturbation())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("candidate list is never empty");

    let mut result = secrecy_rate_at(spec, winner.1);
    result.converged = winner.2 || any_refined;
    result
}

/// Default photon-number grid: 60 log-spaced points in [0.01, 10].
pub fn default_photon_grid() -> Vec<f64> {
    log_spaced(0.01, 10.0, 60)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Maximize the optimized rate over the received photon number.
///
/// Grid scan followed by a golden-section polish between the neighbors of the
/// best grid point.
pub fn optimal_photon_number(
    template: &ScenarioSpec,
    gamma: f64,
    n_grid: &[f64],
) -> Result<(f64, RateResult)> {
    if n_grid.is_empty() {
        return Err(Error::Domain("photon-number grid is empty".into()));
    }
    if n_grid.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::Domain("photon-number grid must be positive".into()));
    }
    let at = |n: f64| {
        let mut spec = *template;
        spec.budget = PhotonBudget { n_bob: n, gamma };
        optimize_decoy(&spec)
    };
    let results: Vec<RateResult> = n_grid.par_iter().map(|&n| at(n)).collect();
    let best_idx = results
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.rate.partial_cmp(&b.1.rate).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .expect("grid is nonempty");

    let lo = if best_idx == 0 { n_grid[0] } else { n_grid[best_idx - 1] };
    let hi = if best_idx + 1 == n_grid.len() { n_grid[best_idx] } else { n_grid[best_idx + 1] };
    let (n_star, _) = golden_max(|n| at(n).rate, lo, hi, 1e-4 * (hi - lo).max(1e-6));

    let refined = at(n_star);
    if refined.rate >= results[best_idx].rate {
        Ok((n_star, refined))
    } else {
        Ok((n_grid[best_idx], results[best_idx]))
    }
}

/// One evaluated grid point of a parameter sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub n_bob: f64,
    pub rate: f64,
    pub policy: DecoyPolicy,
    pub i_bob: f64,
    pub i_eve: f64,
}

/// Optimize every (gamma, n_bob) grid point; rows are ordered gamma-major.
pub fn sweep(template: &ScenarioSpec, gamma_grid: &[f64], n_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if gamma_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::Domain("sweep grids must be nonempty".into()));
    }
    let points: Vec<(f64, f64)> = gamma_grid
        .iter()
        .flat_map(|&g| n_grid.iter().map(move |&n| (g, n)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(gamma, n_bob)| {
            let mut spec = *template;
            spec.budget = PhotonBudget { n_bob, gamma };
            let r = optimize_decoy(&spec);
            SweepRow {
                gamma,
                n_bob,
                rate: r.rate,
                policy: r.policy_star,
                i_bob: r.i_bob,
                i_eve: r.i_eve_or_holevo,
            }
        })
        .collect())
}
