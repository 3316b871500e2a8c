//! Truncated Fock-basis engine for displaced squeezed states.
//!
//! States are built with the two-term ladder recursion
//! `c_{n+1} = (lambda c_n - nu sqrt(n) c_{n-1}) / (mu sqrt(n+1))` where
//! `mu = cosh r`, `nu = e^{i theta} sinh r`, `lambda = alpha mu + conj(alpha) nu`,
//! then renormalized. With `theta = 0` the squeezed quadrature lies along the
//! real axis, the orientation that sharpens discrimination of real-displaced
//! constellations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{helstrom_error, Modulation, PhotonBudget};
use crate::infotheory::{h2, Prior};
use crate::secrecy::{secrecy_capacity_qq, RateResult};
use crate::{Error, Result};

/// A displaced squeezed state expanded over |0>..|n_max>.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedState {
    pub alpha: Complex64,
    pub r: f64,
    pub theta: f64,
    pub amps: Vec<Complex64>,
}

impl SqueezedState {
    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }
}

/// Energy split between displacement and squeezing at fixed mean photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeBudget {
    /// Ensemble mean photon number per pulse at the point of measurement.
    pub n_t: f64,
    /// Fraction of the energy carried by squeezing: xi = sinh^2(r) / n_t.
    pub xi: f64,
}

impl SqueezeBudget {
    pub fn new(n_t: f64, xi: f64) -> Result<Self> {
        if !n_t.is_finite() || n_t < 0.0 {
            return Err(Error::Domain(format!("n_t = {n_t} must be >= 0")));
        }
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::Domain(format!("xi = {xi} must lie in [0, 1)")));
        }
        Ok(Self { n_t, xi })
    }
}

/// Truncation order that captures at least 1 - 1e-10 of the norm for
/// mean photon numbers up to about 10.
pub fn default_n_max(n_mean: f64) -> usize {
    let guess = (n_mean + 10.0 * (n_mean + 1.0).sqrt()).ceil() as usize;
    guess.max(32)
}

/// Builds |alpha, r, theta> over |0>..|n_max> and renormalizes.
///
/// Fails with a truncation error when the first n_max + 1 levels hold less
/// than 1 - 1e-8 of the state's norm.
pub fn build_squeezed_state(
    alpha: Complex64,
    r: f64,
    theta: f64,
    n_max: usize,
) -> Result<SqueezedState> {
    if n_max < 1 {
        return Err(Error::Domain("n_max must be >= 1".into()));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("r = {r} must be >= 0")));
    }

    let mu = r.cosh();
    let nu = Complex64::from_polar(r.sinh(), theta);
    let lambda = alpha * mu + alpha.conj() * nu;

    let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
    amps[0] = Complex64::new(1.0, 0.0);
    amps[1] = lambda / mu;
    for n in 1..n_max {
        amps[n + 1] = (lambda * amps[n] - nu * (n as f64).sqrt() * amps[n - 1])
            / (mu * ((n + 1) as f64).sqrt());
    }

    let partial: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    // |<0|psi>|^2 in closed form gives the exact total of the unnormalized sum
    let vac_sqr = (-(alpha.norm_sqr())
        - (alpha.conj() * alpha.conj() * Complex64::from_polar(r.tanh(), theta)).re)
        .exp()
        / mu;
    let captured = partial * vac_sqr;
    if captured < 1.0 - 1e-8 {
        let n_mean = alpha.norm_sqr() + r.sinh().powi(2);
        return Err(Error::Truncation {
            n_max,
            suggested: default_n_max(n_mean).max(2 * n_max),
        });
    }

    let norm = partial.sqrt();
    for c in &mut amps {
        *c /= norm;
    }
    Ok(SqueezedState { alpha, r, theta, amps })
}

/// <s1|s2> over the common truncation (the shorter vector is zero-padded).
pub fn overlap(s1: &SqueezedState, s2: &SqueezedState) -> Complex64 {
    s1.amps
        .iter()
        .zip(s2.amps.iter())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

/// Mean photon number from the amplitude vector.
pub fn mean_photon(state: &SqueezedState) -> f64 {
    state
        .amps
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .sum()
}

/// Displacement magnitude squared and squeeze parameter meeting the energy
/// constraint: the ensemble mean photon number equals `budget.n_t`.
///
/// BPSK uses the pair {|-alpha, r>, |alpha, r>}, OOK {|0, r>, |alpha, r>};
/// each squeezed component carries sinh^2(r) photons on top of |alpha|^2.
pub fn energy_normalize(
    budget: SqueezeBudget,
    modulation: Modulation,
    prior: Prior,
) -> Result<(f64, f64)> {
    let r = (budget.xi * budget.n_t).sqrt().asinh();
    let displaced_energy = budget.n_t * (1.0 - budget.xi);
    let alpha_sq = match modulation {
        Modulation::Bpsk => displaced_energy,
        Modulation::Ook => {
            if prior.q1() <= 1e-12 {
                return Err(Error::Domain(
                    "OOK prior puts no mass on the on pulse; displacement is unbounded".into(),
                ));
            }
            displaced_energy / prior.q1()
        }
    };
    Ok((alpha_sq, r))
}

/// |<psi0|psi1>|^2 of the signaling pair at a given ensemble energy.
fn pair_overlap_sq(modulation: Modulation, energy: f64, xi: f64) -> Result<f64> {
    if energy <= 0.0 {
        return Ok(1.0);
    }
    let budget = SqueezeBudget::new(energy, xi)?;
    let (alpha_sq, r) = energy_normalize(budget, modulation, Prior::uniform())?;
    let alpha = alpha_sq.sqrt();
    let n_max = default_n_max(alpha_sq + r.sinh().powi(2));
    let (s0, s1) = match modulation {
        Modulation::Bpsk => (
            build_squeezed_state(Complex64::new(-alpha, 0.0), r, 0.0, n_max)?,
            build_squeezed_state(Complex64::new(alpha, 0.0), r, 0.0, n_max)?,
        ),
        Modulation::Ook => (
            build_squeezed_state(Complex64::new(0.0, 0.0), r, 0.0, n_max)?,
            build_squeezed_state(Complex64::new(alpha, 0.0), r, 0.0, n_max)?,
        ),
    };
    Ok(overlap(&s0, &s1).norm_sqr().min(1.0))
}

/// QQ secrecy rate with squeezed signaling.
///
/// Bob's pair is built at `n_t`, Eve's at `gamma * n_t` with the same
/// squeezing fraction (pure-state scaling of both components; how loss
/// actually transforms the squeezed ensemble is a modeling choice). The
/// xi = 0 case reduces exactly to the coherent closed form.
pub fn squeezed_qq_rate(
    modulation: Modulation,
    budget: SqueezeBudget,
    gamma: f64,
) -> Result<RateResult> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain(format!("gamma = {gamma} must be >= 0")));
    }
    if budget.xi == 0.0 {
        return Ok(secrecy_capacity_qq(
            modulation,
            PhotonBudget::new(budget.n_t, gamma)?,
        ));
    }
    let u = Prior::uniform();
    let eps_bob = helstrom_error(pair_overlap_sq(modulation, budget.n_t, budget.xi)?, u);
    let eps_eve = helstrom_error(
        pair_overlap_sq(modulation, gamma * budget.n_t, budget.xi)?,
        u,
    );
    Ok(RateResult {
        rate: h2(eps_eve) - h2(eps_bob),
        policy_star: crate::channels::DecoyPolicy::no_decoy(0.5),
        i_bob: 1.0 - h2(eps_bob),
        i_eve_or_holevo: 1.0 - h2(eps_eve),
        degraded: eps_eve >= eps_bob,
        converged: true,
    })
}
