//! Exact binary information-theoretic primitives.
//!
//! Everything here works on binary-input binary-output stochastic maps in the
//! "probability of output 0" orientation: `e00 = P(0|0)`, `e01 = P(0|1)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A binary-input binary-output channel stored as its output-0 column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryChannel {
    /// P(output = 0 | input = 0)
    pub e00: f64,
    /// P(output = 0 | input = 1)
    pub e01: f64,
}

impl BinaryChannel {
    pub const IDENTITY: BinaryChannel = BinaryChannel { e00: 1.0, e01: 0.0 };

    pub fn new(e00: f64, e01: f64) -> Result<Self> {
        for (name, v) in [("e00", e00), ("e01", e01)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        Ok(Self { e00, e01 })
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(1.0 - eps, eps)
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.e00) && (0.0..=1.0).contains(&self.e01)
    }
}

/// Input distribution on a binary alphabet, stored as P(symbol = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub q0: f64,
}

impl Prior {
    pub fn new(q0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q0) || !q0.is_finite() {
            return Err(Error::Domain(format!("q0 = {q0} must lie in [0, 1]")));
        }
        Ok(Self { q0 })
    }

    pub fn uniform() -> Self {
        Self { q0: 0.5 }
    }

    pub fn q1(&self) -> f64 {
        1.0 - self.q0
    }
}

/// Binary entropy in bits with the convention 0 log 0 = 0. Assumes p in [0, 1].
pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Domain(format!("p = {p} must lie in [0, 1]")));
    }
    Ok(h2(p))
}

/// Mutual information I(X:Y) in bits of a binary channel under a prior.
pub fn mutual_information(ch: BinaryChannel, prior: Prior) -> f64 {
    let alpha = prior.q0 * ch.e00 + prior.q1() * ch.e01;
    h2(alpha) - prior.q0 * h2(ch.e00) - prior.q1() * h2(ch.e01)
}

/// Cascade `first` then `second`: P(z|x) = sum_y P2(z|y) P1(y|x).
pub fn compose(first: BinaryChannel, second: BinaryChannel) -> BinaryChannel {
    BinaryChannel {
        e00: second.e00 * first.e00 + second.e01 * (1.0 - first.e00),
        e01: second.e00 * first.e01 + second.e01 * (1.0 - first.e01),
    }
}

/// Push a prior through a channel: the output distribution's P(0).
pub fn push_prior(prior: Prior, ch: BinaryChannel) -> Prior {
    Prior {
        q0: (prior.q0 * ch.e00 + prior.q1() * ch.e01).clamp(0.0, 1.0),
    }
}

/// Channel capacity in bits together with the maximizing prior q0.
///
/// Mutual information is concave in the prior for a fixed channel, so a
/// golden-section search on q0 is exact to the stated interval tolerance.
pub fn channel_capacity(ch: BinaryChannel) -> (f64, f64) {
    if (ch.e00 - ch.e01).abs() < 1e-12 {
        // degenerate channel: zero capacity at every prior
        return (0.0, 0.5);
    }
    let (q0, c) = crate::opt::golden_max(
        |q| mutual_information(ch, Prior { q0: q }),
        0.0,
        1.0,
        1e-9,
    );
    (c.max(0.0), q0)
}

/// The stochastic map `q` with eve = compose(bob, q), if one exists.
///
/// Returns (q00, q10) = (Q(0|0), Q(0|1)). Membership of Eve's output-0 column
/// in the parallelogram spanned by (0,0), (e00,e01), (1,1), (1-e00,1-e01) is
/// decided by solving the 2x2 linear system and checking stochasticity.
pub fn degrading_map(bob: BinaryChannel, eve: BinaryChannel) -> Option<(f64, f64)> {
    const TOL: f64 = 1e-9;
    let det = bob.e00 - bob.e01;
    if det.abs() < 1e-12 {
        // Bob's rows coincide: reachable Eve points are exactly the diagonal.
        if (eve.e00 - eve.e01).abs() <= TOL {
            let t = eve.e00.clamp(0.0, 1.0);
            return Some((t, t));
        }
        return None;
    }
    let q00 = (eve.e00 * (1.0 - bob.e01) - eve.e01 * (1.0 - bob.e00)) / det;
    let q10 = (bob.e00 * eve.e01 - bob.e01 * eve.e00) / det;
    if (-TOL..=1.0 + TOL).contains(&q00) && (-TOL..=1.0 + TOL).contains(&q10) {
        Some((q00.clamp(0.0, 1.0), q10.clamp(0.0, 1.0)))
    } else {
        None
    }
}

/// True iff Eve's channel equals Bob's followed by some stochastic map.
pub fn is_stochastically_degraded(bob: BinaryChannel, eve: BinaryChannel) -> bool {
    degrading_map(bob, eve).is_some()
}

/// Side-by-side result of the membership test and the ratio-inequality test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DegradationReport {
    pub degraded: bool,
    /// Verdict of the ratio inequalities, when the orientation assumptions
    /// (e00 >= e01 for both channels) hold.
    pub ratio_inequality: Option<bool>,
    /// False when the two tests disagree; such inputs land in the regime
    /// where the ratio form is misleading and the membership test governs.
    pub consistent: bool,
    pub q_map: Option<(f64, f64)>,
}

/// Runs both degradation tests and surfaces any disagreement.
pub fn degradation_report(bob: BinaryChannel, eve: BinaryChannel) -> DegradationReport {
    let q_map = degrading_map(bob, eve);
    let degraded = q_map.is_some();
    let oriented = bob.e00 >= bob.e01 && eve.e00 >= eve.e01;
    let ratio_inequality = if oriented {
        Some(if eve.e00 <= bob.e00 {
            // 0/0 ratios are resolved by cross-multiplication
            eve.e01 * bob.e00 >= bob.e01 * eve.e00
        } else {
            (1.0 - eve.e01) * (1.0 - bob.e00) >= (1.0 - bob.e01) * (1.0 - eve.e00)
        })
    } else {
        None
    };
    DegradationReport {
        degraded,
        ratio_inequality,
        consistent: ratio_inequality.map_or(true, |r| r == degraded),
        q_map,
    }
}
