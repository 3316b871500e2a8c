//! Pulse-by-pulse stochastic oracle for the decoy -> modulation -> detection
//! pipeline.
//!
//! Sampling uses ChaCha8 seeded from a single 64-bit value, with a fixed
//! per-pulse draw order (v, x, Bob, Eve), so runs are reproducible from
//! (seed, config) alone. Helstrom detection has no measurement model here and
//! is sampled as its induced binary symmetric channel; photon counting is
//! sampled physically (Poisson thinning plus a dark-count Bernoulli) and
//! homodyne hard decision as a unit-variance Gaussian threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_decoy, decoy_bob_channel, DecoyPolicy, Modulation};
use crate::infotheory::{compose, mutual_information, BinaryChannel, Prior};
use crate::secrecy::{Scenario, ScenarioSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: ScenarioSpec,
    pub policy: DecoyPolicy,
    pub n_samples: u64,
    pub seed: u64,
}

/// Empirical estimate of one cascade channel V -> output.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelEstimate {
    /// Estimated P(output = 0 | V = v); 0 when v was never drawn.
    pub e00: f64,
    pub e01: f64,
    /// Binomial standard errors; absent for unsampled rows.
    pub se00: Option<f64>,
    pub se01: Option<f64>,
    /// Sample counts per V value.
    pub n_v0: u64,
    pub n_v1: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub empirical_bob: ChannelEstimate,
    pub empirical_eve: ChannelEstimate,
    /// Plug-in mutual informations from the empirical joints, in bits.
    pub mi_bob: f64,
    pub mi_eve: f64,
    pub analytic_bob: BinaryChannel,
    pub analytic_eve: BinaryChannel,
    pub analytic_mi_bob: f64,
    pub analytic_mi_eve: f64,
    /// Entrywise |empirical - analytic| for (bob.e00, bob.e01, eve.e00, eve.e01).
    pub deltas: [f64; 4],
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    uniform(rng) < p
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    // Knuth's product-of-uniforms method; means here stay small
    let floor = (-mean).exp();
    let mut k = 0u32;
    let mut p = 1.0;
    loop {
        p *= uniform(rng);
        if p <= floor {
            return k;
        }
        k += 1;
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 shifted away from zero
    let u1 = (uniform(rng) + f64::MIN_POSITIVE).min(1.0);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

struct Tally {
    n_v: [u64; 2],
    n_out0: [u64; 2],
}

impl Tally {
    fn new() -> Self {
        Self { n_v: [0; 2], n_out0: [0; 2] }
    }

    fn record(&mut self, v: usize, out_is_zero: bool) {
        self.n_v[v] += 1;
        if out_is_zero {
            self.n_out0[v] += 1;
        }
    }

    fn estimate(&self) -> ChannelEstimate {
        let p = |v: usize| {
            if self.n_v[v] == 0 {
                0.0
            } else {
                self.n_out0[v] as f64 / self.n_v[v] as f64
            }
        };
        let se = |v: usize| {
            (self.n_v[v] > 0).then(|| {
                let ph = p(v);
                (ph * (1.0 - ph) / self.n_v[v] as f64).sqrt()
            })
        };
        ChannelEstimate {
            e00: p(0),
            e01: p(1),
            se00: se(0),
            se01: se(1),
            n_v0: self.n_v[0],
            n_v1: self.n_v[1],
        }
    }

    /// Plug-in mutual information of the (V, output) joint, in bits.
    fn plugin_mi(&self, total: u64) -> f64 {
        let total = total as f64;
        let mut mi = 0.0;
        for v in 0..2 {
            for out0 in [true, false] {
                let joint = if out0 {
                    self.n_out0[v] as f64
                } else {
                    (self.n_v[v] - self.n_out0[v]) as f64
                } / total;
                if joint <= 0.0 {
                    continue;
                }
                let pv = self.n_v[v] as f64 / total;
                let pout = ((self.n_out0[0] + self.n_out0[1]) as f64 / total).clamp(0.0, 1.0);
                let pout = if out0 { pout } else { 1.0 - pout };
                mi += joint * (joint / (pv * pout)).log2();
            }
        }
        mi
    }
}

/// Samples the full pipeline and compares against the closed forms.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    let spec = &cfg.spec;
    if spec.scenario == Scenario::Dw {
        return Err(Error::Unsupported(
            "the DW Holevo leakage has no sampling model; simulate QQ or CQ".into(),
        ));
    }

    let policy = cfg.policy;
    let (decoy, q_plus) = apply_decoy(policy);
    let raw_bob = super::secrecy::raw_bob_channel_for(spec, q_plus);
    let raw_eve = super::secrecy::eve_raw_channel_for(spec, policy);
    let analytic_bob = decoy_bob_channel(policy, raw_bob);
    let analytic_eve = compose(decoy, raw_eve);

    // physical sampling parameters for Bob
    let on_mean = 2.0 * spec.budget.n_bob + spec.noise.delta;
    let off_mean = spec.noise.delta;
    let homodyne_mean = 2.0 * spec.budget.n_bob.sqrt();
    let eve_eps = raw_eve.e01;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bob = Tally::new();
    let mut eve = Tally::new();

    for _ in 0..cfg.n_samples {
        let v = usize::from(!bernoulli(&mut rng, policy.q_v0));
        let p_x0 = if v == 0 { 1.0 - policy.a } else { 1.0 - policy.b };
        let x = usize::from(!bernoulli(&mut rng, p_x0));

        let y_is_zero = match (spec.scenario, spec.modulation) {
            (Scenario::Cq, Modulation::Ook) => {
                let mean = if x == 1 { on_mean } else { off_mean };
                let clicked = poisson(&mut rng, mean) >= 1 || bernoulli(&mut rng, spec.noise.p_dark);
                !clicked
            }
            (Scenario::Cq, Modulation::Bpsk) => {
                let centre = if x == 0 { homodyne_mean } else { -homodyne_mean };
                centre + gaussian(&mut rng) > 0.0
            }
            // QQ: Helstrom sampled as its induced BSC
            _ => {
                let flip = bernoulli(&mut rng, raw_bob.e01);
                if x == 0 {
                    !flip
                } else {
                    flip
                }
            }
        };
        bob.record(v, y_is_zero);

        let flip = bernoulli(&mut rng, eve_eps);
        let z_is_zero = if x == 0 { !flip } else { flip };
        eve.record(v, z_is_zero);
    }

    let prior_v = Prior { q0: policy.q_v0 };
    let empirical_bob = bob.estimate();
    let empirical_eve = eve.estimate();
    Ok(SimReport {
        config: *cfg,
        mi_bob: bob.plugin_mi(cfg.n_samples),
        mi_eve: eve.plugin_mi(cfg.n_samples),
        deltas: [
            (empirical_bob.e00 - analytic_bob.e00).abs(),
            (empirical_bob.e01 - analytic_bob.e01).abs(),
            (empirical_eve.e00 - analytic_eve.e00).abs(),
            (empirical_eve.e01 - analytic_eve.e01).abs(),
        ],
        empirical_bob,
        empirical_eve,
        analytic_bob,
        analytic_eve,
        analytic_mi_bob: mutual_information(analytic_bob, prior_v),
        analytic_mi_eve: mutual_information(analytic_eve, prior_v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{DetectorNoise, PhotonBudget};

    fn cq_config(seed: u64, n_samples: u64) -> SimConfig {
        SimConfig {
            spec: ScenarioSpec::new(
                Modulation::Ook,
                Scenario::Cq,
                PhotonBudget::new(1.0, 0.5).unwrap(),
            )
            .with_noise(DetectorNoise::new(1e-3, 0.01).unwrap()),
            policy: DecoyPolicy::new(0.2, 0.8, 0.5).unwrap(),
            n_samples,
            seed,
        }
    }

    #[test]
    fn same_seed_same_report() {
        let a = simulate(&cq_config(42, 20_000)).unwrap();
        let b = simulate(&cq_config(42, 20_000)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = simulate(&cq_config(43, 20_000)).unwrap();
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn single_sample_is_degenerate_but_legal() {
        let r = simulate(&cq_config(7, 1)).unwrap();
        for e in [r.empirical_bob.e00, r.empirical_bob.e01, r.empirical_eve.e00, r.empirical_eve.e01]
        {
            assert!(e == 0.0 || e == 1.0);
        }
        assert_eq!(r.empirical_bob.n_v0 + r.empirical_bob.n_v1, 1);
    }

    #[test]
    fn dw_is_unsupported() {
        let mut cfg = cq_config(1, 10);
        cfg.spec.scenario = Scenario::Dw;
        assert!(matches!(simulate(&cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn empirical_matches_analytic_within_4_sigma() {
        let r = simulate(&cq_config(2024, 1_000_000)).unwrap();
        let checks = [
            (r.empirical_bob.e00, r.analytic_bob.e00, r.empirical_bob.n_v0),
            (r.empirical_bob.e01, r.analytic_bob.e01, r.empirical_bob.n_v1),
            (r.empirical_eve.e00, r.analytic_eve.e00, r.empirical_eve.n_v0),
            (r.empirical_eve.e01, r.analytic_eve.e01, r.empirical_eve.n_v1),
        ];
        for (emp, ana, n) in checks {
            let sigma = (ana * (1.0 - ana) / n as f64).sqrt();
            assert!((emp - ana).abs() <= 4.0 * sigma, "emp {emp} ana {ana} sigma {sigma}");
        }
        assert!((r.mi_bob - r.analytic_mi_bob).abs() < 0.01);
        assert!((r.mi_eve - r.analytic_mi_eve).abs() < 0.01);
    }

    #[test]
    fn qq_and_bpsk_paths_sample_correctly() {
        let mut cfg = cq_config(5, 400_000);
        cfg.spec.modulation = Modulation::Bpsk;
        let r = simulate(&cfg).unwrap();
        assert!((r.empirical_bob.e00 - r.analytic_bob.e00).abs() < 0.005);

        let mut cfg = cq_config(6, 400_000);
        cfg.spec.scenario = Scenario::Qq;
        let r = simulate(&cfg).unwrap();
        assert!((r.empirical_bob.e01 - r.analytic_bob.e01).abs() < 0.005);
    }
}
