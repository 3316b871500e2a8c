//! Physical detection models for OOK and BPSK pulses.
//!
//! Each constructor maps a detector onto a [`BinaryChannel`] in the
//! output-0 orientation, and the decoy constructors realize the preprocessing
//! cascade placed in front of both Bob's and Eve's channels.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::infotheory::{compose, h2, BinaryChannel, Prior};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    /// On-off keying: vacuum vs. a coherent pulse.
    Ook,
    /// Binary phase-shift keying: antipodal coherent pulses.
    Bpsk,
}

/// Mean photon numbers of the legitimate link and of the eavesdropper's tap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    /// Mean photon number per pulse arriving at Bob's detector.
    pub n_bob: f64,
    /// Eve gathers `gamma * n_bob` mean photons per pulse.
    pub gamma: f64,
}

impl PhotonBudget {
    pub fn new(n_bob: f64, gamma: f64) -> Result<Self> {
        if !n_bob.is_finite() || n_bob < 0.0 {
            return Err(Error::Domain(format!("n_bob = {n_bob} must be >= 0")));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Domain(format!("gamma = {gamma} must be >= 0")));
        }
        Ok(Self { n_bob, gamma })
    }

    pub fn n_eve(&self) -> f64 {
        self.gamma * self.n_bob
    }
}

/// Photon-counting detector imperfections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorNoise {
    /// Dark-count probability per gate.
    pub p_dark: f64,
    /// Mean noise photons per pulse reaching the counter.
    pub delta: f64,
}

impl DetectorNoise {
    pub fn new(p_dark: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_dark) || !p_dark.is_finite() {
            return Err(Error::Domain(format!("p_dark = {p_dark} must lie in [0, 1]")));
        }
        if delta < 0.0 || !delta.is_finite() {
            return Err(Error::Domain(format!("delta = {delta} must be >= 0")));
        }
        Ok(Self { p_dark, delta })
    }
}

impl Default for DetectorNoise {
    fn default() -> Self {
        Self { p_dark: 1e-6, delta: 0.0 }
    }
}

/// Decoy preprocessing channel V -> X plus the prior on V.
///
/// `a = 1 - P(X=0 | V=0)` and `b = 1 - P(X=0 | V=1)`; the no-decoy point is
/// `(a, b) = (0, 1)`, where X = V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoyPolicy {
    pub a: f64,
    pub b: f64,
    pub q_v0: f64,
}

impl DecoyPolicy {
    pub fn new(a: f64, b: f64, q_v0: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("q_v0", q_v0)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        Ok(Self { a, b, q_v0 })
    }

    pub fn no_decoy(q_v0: f64) -> Self {
        Self { a: 0.0, b: 1.0, q_v0 }
    }

    /// Distance from the no-decoy point, used for tie-breaking.
    pub fn perturbation(&self) -> f64 {
        self.a + (1.0 - self.b)
    }
}

/// Overlap law for the pair of states Eve intercepts.
///
/// `OnOff` assigns the on-off pair overlap `e^{-gamma n}` to both modulations;
/// `Matched` uses the coherent overlap of the actual constellation,
/// `e^{-gamma n}` for OOK and `e^{-2 gamma n}` for BPSK. The two laws coincide
/// for OOK. `OnOff` is the default operating point of the rate engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EveOverlapLaw {
    #[default]
    OnOff,
    Matched,
}

impl EveOverlapLaw {
    /// |<z0|z1>| for Eve's intercepted pair at tap energy gamma * n_bob.
    pub fn overlap(self, modulation: Modulation, budget: PhotonBudget) -> f64 {
        let m = budget.n_eve();
        match (self, modulation) {
            (_, Modulation::Ook) | (EveOverlapLaw::OnOff, Modulation::Bpsk) => (-m).exp(),
            (EveOverlapLaw::Matched, Modulation::Bpsk) => (-2.0 * m).exp(),
        }
    }
}

/// Minimum discrimination error between two pure states.
///
/// `overlap_sq` is |<psi0|psi1>|^2; the radicand is clamped at zero against
/// rounding. Result lies in [0, 1/2].
pub fn helstrom_error(overlap_sq: f64, prior: Prior) -> f64 {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&overlap_sq));
    let radicand = (1.0 - 4.0 * prior.q0 * prior.q1() * overlap_sq).max(0.0);
    0.5 * (1.0 - radicand.sqrt())
}

fn helstrom_bsc(overlap_sq: f64, prior: Prior) -> BinaryChannel {
    let eps = helstrom_error(overlap_sq, prior);
    BinaryChannel { e00: 1.0 - eps, e01: eps }
}

/// Helstrom-detection channel for OOK at Bob (`at_eve = false`) or Eve.
pub fn ook_helstrom_channel(budget: PhotonBudget, at_eve: bool, prior: Prior) -> BinaryChannel {
    let m = if at_eve { budget.n_eve() } else { budget.n_bob };
    helstrom_bsc((-2.0 * m).exp(), prior)
}

/// Helstrom-detection channel for BPSK at Bob or Eve.
pub fn bpsk_helstrom_channel(budget: PhotonBudget, at_eve: bool, prior: Prior) -> BinaryChannel {
    let m = if at_eve { budget.n_eve() } else { budget.n_bob };
    helstrom_bsc((-4.0 * m).exp(), prior)
}

/// Threshold single-photon detection of OOK. Output 0 means "no click".
///
/// The on pulse carries mean photon number `2 n_bob`, so that the average
/// under uniform signaling is `n_bob`.
pub fn ook_photon_counting_channel(budget: PhotonBudget, noise: DetectorNoise) -> BinaryChannel {
    let no_dark = 1.0 - noise.p_dark;
    BinaryChannel {
        e00: no_dark * (-noise.delta).exp(),
        e01: no_dark * (-(2.0 * budget.n_bob + noise.delta)).exp(),
    }
}

/// Hard-decision homodyne detection of BPSK.
pub fn bpsk_homodyne_hard_channel(budget: PhotonBudget) -> BinaryChannel {
    let p_e = 0.5 * libm::erfc((2.0 * budget.n_bob).sqrt());
    BinaryChannel { e00: 1.0 - p_e, e01: p_e }
}

/// The decoy channel W_D(1-a, 1-b) and the effective prior it induces on X.
pub fn apply_decoy(policy: DecoyPolicy) -> (BinaryChannel, Prior) {
    let decoy = BinaryChannel { e00: 1.0 - policy.a, e01: 1.0 - policy.b };
    let q_x_plus = policy.q_v0 * (1.0 - policy.a) + (1.0 - policy.q_v0) * (1.0 - policy.b);
    (decoy, Prior { q0: q_x_plus.clamp(0.0, 1.0) })
}

/// Bob's cascade channel V -> Y: the decoy channel followed by his detector.
pub fn decoy_bob_channel(policy: DecoyPolicy, raw_bob: BinaryChannel) -> BinaryChannel {
    let (decoy, _) = apply_decoy(policy);
    compose(decoy, raw_bob)
}

/// Eve's raw Helstrom channel at the decoy-induced prior, under an overlap law.
pub fn eve_raw_channel(
    policy: DecoyPolicy,
    budget: PhotonBudget,
    modulation: Modulation,
    law: EveOverlapLaw,
) -> BinaryChannel {
    let (_, q_plus) = apply_decoy(policy);
    let s = law.overlap(modulation, budget);
    helstrom_bsc(s * s, q_plus)
}

/// Eve's cascade channel V -> Z: the decoy channel followed by her detector.
pub fn decoy_eve_channel(
    policy: DecoyPolicy,
    budget: PhotonBudget,
    modulation: Modulation,
    law: EveOverlapLaw,
) -> BinaryChannel {
    let (decoy, _) = apply_decoy(policy);
    compose(decoy, eve_raw_channel(policy, budget, modulation, law))
}

/// Holevo quantity of an equiprobable pure-state pair with overlap `s`.
pub fn pure_state_holevo(overlap: f64) -> f64 {
    h2(0.5 * (1.0 + overlap.abs().min(1.0)))
}

/// Holevo bound on Eve's extractable information, constellation-matched overlap.
pub fn holevo_bound(modulation: Modulation, budget: PhotonBudget) -> f64 {
    pure_state_holevo(EveOverlapLaw::Matched.overlap(modulation, budget))
}

/// Holevo leakage under a chosen overlap law; used by the DW rate engine.
pub fn holevo_leakage(modulation: Modulation, law: EveOverlapLaw, budget: PhotonBudget) -> f64 {
    pure_state_holevo(law.overlap(modulation, budget))
}

/// The entropy argument (1 + s)/2 itself, exposed for diagnostics only.
/// It is 1 for identical states and 1/2 for orthogonal ones, so it is not a
/// leakage measure; see [`holevo_bound`] for the operational quantity.
pub fn holevo_bound_unwrapped(modulation: Modulation, budget: PhotonBudget) -> f64 {
    0.5 * (1.0 + EveOverlapLaw::Matched.overlap(modulation, budget))
}

/// Ensemble-weighted Holevo variant h((1 + sqrt(1 - 4 q0 q1 (1 - s^2)))/2).
///
/// Opt-in alternative to the prior-free [`holevo_bound`]; it accounts for a
/// skewed input prior on the pure-state pair.
pub fn holevo_bound_weighted(modulation: Modulation, budget: PhotonBudget, prior: Prior) -> f64 {
    let s = EveOverlapLaw::Matched.overlap(modulation, budget);
    let radicand = (1.0 - 4.0 * prior.q0 * prior.q1() * (1.0 - s * s)).max(0.0);
    h2(0.5 * (1.0 + radicand.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::mutual_information;

    const U: Prior = Prior { q0: 0.5 };

    #[test]
    fn helstrom_reference_points() {
        assert_eq!(helstrom_error(1.0, U), 0.5);
        assert_eq!(helstrom_error(0.0, U), 0.0);
        let e = helstrom_error((-1.0f64).exp(), U);
        assert!((e - 0.102_469_951_189_675).abs() < 1e-12);
    }

    #[test]
    fn helstrom_monotone_in_overlap() {
        let mut last = -1.0;
        for i in 0..=100 {
            let s2 = i as f64 / 100.0;
            let e = helstrom_error(s2, U);
            assert!(e >= last);
            assert!((0.0..=0.5).contains(&e));
            last = e;
        }
    }

    #[test]
    fn ook_helstrom_reference_points() {
        let b = PhotonBudget::new(1.0, 0.5).unwrap();
        let ch = ook_helstrom_channel(b, false, U);
        assert!((ch.e01 - 0.035_063_252_483_903).abs() < 1e-12);
        assert!((ch.e00 - (1.0 - ch.e01)).abs() < 1e-15);

        let eve = ook_helstrom_channel(b, true, U);
        assert!((eve.e01 - 0.102_469_951_189_675).abs() < 1e-12);

        let zero = ook_helstrom_channel(PhotonBudget::new(0.0, 0.5).unwrap(), false, U);
        assert_eq!(zero.e01, 0.5);
    }

    #[test]
    fn bpsk_helstrom_reference_points() {
        let b = PhotonBudget::new(1.0, 1.0).unwrap();
        let bob = bpsk_helstrom_channel(b, false, U);
        assert!((bob.e01 - 0.004_600_070_369_589).abs() < 1e-12);

        // same energy means the same channel
        let eve = bpsk_helstrom_channel(b, true, U);
        assert_eq!(bob, eve);

        let zero = bpsk_helstrom_channel(PhotonBudget::new(0.0, 1.0).unwrap(), false, U);
        assert_eq!(zero.e01, 0.5);
    }

    #[test]
    fn photon_counting_reference_points() {
        let b = PhotonBudget::new(1.0, 0.5).unwrap();
        let n = DetectorNoise::new(0.0, 0.01).unwrap();
        let ch = ook_photon_counting_channel(b, n);
        assert!((ch.e00 - 0.990_049_833_749_168).abs() < 1e-12);
        assert!((ch.e01 - 0.133_988_674_668_805).abs() < 1e-12);

        let silent = ook_photon_counting_channel(
            PhotonBudget::new(0.0, 0.0).unwrap(),
            DetectorNoise::new(0.0, 0.0).unwrap(),
        );
        assert_eq!(silent, BinaryChannel { e00: 1.0, e01: 1.0 });

        let blind = ook_photon_counting_channel(b, DetectorNoise::new(1.0, 0.0).unwrap());
        assert_eq!(blind, BinaryChannel { e00: 0.0, e01: 0.0 });
    }

    #[test]
    fn photon_counting_keeps_orientation() {
        for i in 0..200 {
            let n_bob = i as f64 * 0.05;
            let noise = DetectorNoise::new((i as f64 / 200.0) * 0.9, (i as f64) * 0.01).unwrap();
            let ch = ook_photon_counting_channel(PhotonBudget::new(n_bob, 0.3).unwrap(), noise);
            assert!(ch.e00 >= ch.e01);
            assert!(ch.is_valid());
        }
    }

    #[test]
    fn homodyne_reference_points() {
        let ch = bpsk_homodyne_hard_channel(PhotonBudget::new(1.0, 0.5).unwrap());
        assert!((ch.e01 - 0.022_750_131_948_179).abs() < 1e-12);
        let zero = bpsk_homodyne_hard_channel(PhotonBudget::new(0.0, 0.5).unwrap());
        assert!((zero.e01 - 0.5).abs() < 1e-15);
        let big = bpsk_homodyne_hard_channel(PhotonBudget::new(50.0, 0.5).unwrap());
        assert!(big.e01 < 1e-12);
    }

    #[test]
    fn erfc_against_reference_table() {
        // (x, erfc(x)) at 1e-12 relative accuracy
        let table = [
            (0.0, 1.0),
            (0.1, 0.887_537_083_981_715_1),
            (0.5, 0.479_500_122_186_953_46),
            (1.0, 0.157_299_207_050_285_13),
            (std::f64::consts::SQRT_2, 0.045_500_263_896_358_4),
            (2.0, 0.004_677_734_981_047_266),
            (3.0, 2.209_049_699_858_544e-5),
            (5.0, 1.537_459_794_428_035e-12),
        ];
        for (x, want) in table {
            let got = libm::erfc(x);
            let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            assert!(rel < 1e-12, "erfc({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn decoy_reference_points() {
        let (ch, q) = apply_decoy(DecoyPolicy::new(0.0, 1.0, 0.3).unwrap());
        assert_eq!(ch, BinaryChannel::IDENTITY);
        assert!((q.q0 - 0.3).abs() < 1e-15);

        let (flip, q) = apply_decoy(DecoyPolicy::new(1.0, 0.0, 0.3).unwrap());
        assert_eq!(flip, BinaryChannel { e00: 0.0, e01: 1.0 });
        assert!((q.q0 - 0.7).abs() < 1e-15);

        let (ch, q) = apply_decoy(DecoyPolicy::new(0.2, 0.6, 0.5).unwrap());
        assert!((ch.e00 - 0.8).abs() < 1e-15);
        assert!((ch.e01 - 0.4).abs() < 1e-15);
        assert!((q.q0 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn decoy_bob_reference_points() {
        let raw = BinaryChannel::new(0.99, 0.13).unwrap();
        assert_eq!(decoy_bob_channel(DecoyPolicy::no_decoy(0.5), raw), raw);

        let ch = decoy_bob_channel(DecoyPolicy::new(0.2, 0.6, 0.5).unwrap(), raw);
        assert!((ch.e00 - 0.818).abs() < 1e-15);
        assert!((ch.e01 - 0.474).abs() < 1e-15);

        // a == b decouples V from X: both rows coincide
        let flat = decoy_bob_channel(DecoyPolicy::new(0.4, 0.4, 0.5).unwrap(), raw);
        assert!((flat.e00 - flat.e01).abs() < 1e-15);
    }

    #[test]
    fn decoy_eve_reference_points() {
        let budget = PhotonBudget::new(1.0, 0.5).unwrap();
        let nd = DecoyPolicy::no_decoy(0.5);
        let eve = decoy_eve_channel(nd, budget, Modulation::Ook, EveOverlapLaw::Matched);
        assert!((eve.e01 - 0.102_469_951_189_675).abs() < 1e-12);

        // gamma = 0 with uniform effective prior is a useless channel
        let b0 = PhotonBudget::new(1.0, 0.0).unwrap();
        let eve = decoy_eve_channel(nd, b0, Modulation::Ook, EveOverlapLaw::Matched);
        assert!((eve.e00 - 0.5).abs() < 1e-15);
        assert!((eve.e01 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoy_closed_forms_match_composition() {
        // beta00 = (1-a) e0 + a e1 and beta01 = (1-b) e0 + b e1 against compose()
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let policy = DecoyPolicy::new(next(), next(), next()).unwrap();
            let raw = BinaryChannel::new(next(), next()).unwrap();
            let composed = decoy_bob_channel(policy, raw);
            let b00 = (1.0 - policy.a) * raw.e00 + policy.a * raw.e01;
            let b01 = (1.0 - policy.b) * raw.e00 + policy.b * raw.e01;
            assert!((composed.e00 - b00).abs() < 1e-15);
            assert!((composed.e01 - b01).abs() < 1e-15);

            let budget = PhotonBudget::new(next() * 5.0, next()).unwrap();
            for law in [EveOverlapLaw::OnOff, EveOverlapLaw::Matched] {
                for modulation in [Modulation::Ook, Modulation::Bpsk] {
                    let raw_eve = eve_raw_channel(policy, budget, modulation, law);
                    let eps = raw_eve.e01;
                    let composed = decoy_eve_channel(policy, budget, modulation, law);
                    let z00 = (1.0 - policy.a) * (1.0 - eps) + policy.a * eps;
                    let z01 = (1.0 - policy.b) * (1.0 - eps) + policy.b * eps;
                    assert!((composed.e00 - z00).abs() < 1e-15);
                    assert!((composed.e01 - z01).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn holevo_reference_points() {
        let flat = holevo_bound(Modulation::Ook, PhotonBudget::new(0.0, 1.0).unwrap());
        assert_eq!(flat, 0.0);
        let leaky = holevo_bound(Modulation::Ook, PhotonBudget::new(1e9, 1.0).unwrap());
        assert!((leaky - 1.0).abs() < 1e-12);
        // h(0.5 (1 + e^-1)) for gamma * n_bob = 1
        let mid = holevo_bound(Modulation::Ook, PhotonBudget::new(1.0, 1.0).unwrap());
        assert!((mid - 0.900_045_591_523_535).abs() < 1e-12);
        // BPSK uses the squared-amplitude overlap
        let bpsk = holevo_bound(Modulation::Bpsk, PhotonBudget::new(0.5, 1.0).unwrap());
        assert!((bpsk - mid).abs() < 1e-15);
    }

    #[test]
    fn holevo_unwrapped_is_inverted_diagnostic() {
        let b = PhotonBudget::new(0.0, 1.0).unwrap();
        assert_eq!(holevo_bound_unwrapped(Modulation::Ook, b), 1.0);
    }

    #[test]
    fn holevo_weighted_reduces_to_uniform() {
        let b = PhotonBudget::new(1.3, 0.7).unwrap();
        for m in [Modulation::Ook, Modulation::Bpsk] {
            let w = holevo_bound_weighted(m, b, Prior::uniform());
            assert!((w - holevo_bound(m, b)).abs() < 1e-14);
            // skewing the prior can only shrink the ensemble entropy
            assert!(holevo_bound_weighted(m, b, Prior::new(0.9).unwrap()) <= w + 1e-14);
        }
    }

    #[test]
    fn holevo_dominates_helstrom_information() {
        // on a grid of tap energies, the Holevo bound dominates the mutual
        // information of the measured Helstrom channel at uniform prior
        for modulation in [Modulation::Ook, Modulation::Bpsk] {
            for i in 1..=60 {
                let b = PhotonBudget::new(i as f64 * 0.1, 1.0).unwrap();
                let measured = match modulation {
                    Modulation::Ook => ook_helstrom_channel(b, true, U),
                    Modulation::Bpsk => bpsk_helstrom_channel(b, true, U),
                };
                let acc = mutual_information(measured, U);
                assert!(
                    holevo_bound(modulation, b) >= acc - 1e-12,
                    "{modulation:?} n={}",
                    b.n_bob
                );
            }
        }
    }

    #[test]
    fn overlap_laws_agree_on_ook() {
        let b = PhotonBudget::new(1.7, 0.4).unwrap();
        assert_eq!(
            EveOverlapLaw::OnOff.overlap(Modulation::Ook, b),
            EveOverlapLaw::Matched.overlap(Modulation::Ook, b)
        );
        assert!(
            EveOverlapLaw::Matched.overlap(Modulation::Bpsk, b)
                < EveOverlapLaw::OnOff.overlap(Modulation::Bpsk, b)
        );
    }
}
