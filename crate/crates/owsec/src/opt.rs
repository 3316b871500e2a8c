//! Scalar and small-dimension derivative-free maximizers.

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
///
/// Returns (x_star, f(x_star)) with the final bracket width below `xtol`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx >= fc && fx >= fd {
        (x, fx)
    } else if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Outcome of a Nelder-Mead run.
pub struct SimplexResult {
    pub x: [f64; 3],
    pub value: f64,
    pub converged: bool,
}

fn clamp01(x: [f64; 3]) -> [f64; 3] {
    [x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0), x[2].clamp(0.0, 1.0)]
}

/// Nelder-Mead maximization over the unit cube, clamping trial points to the box.
pub fn nelder_mead_max_box<F: FnMut([f64; 3]) -> f64>(
    mut f: F,
    x0: [f64; 3],
    step: f64,
    max_iter: usize,
) -> SimplexResult {
    let mut eval = |x: [f64; 3]| f(clamp01(x));
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    let v0 = eval(x0);
    simplex.push((clamp01(x0), v0));
    for i in 0..3 {
        let mut x = x0;
        // step away from the box edge when the start sits on it
        x[i] = if x[i] + step <= 1.0 { x[i] + step } else { x[i] - step };
        let x = clamp01(x);
        let v = eval(x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1 - simplex[3].1;
        let size: f64 = (0..3)
            .map(|i| {
                simplex
                    .iter()
                    .map(|(x, _)| (x[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < 1e-14 && size < 1e-10 {
            converged = true;
            break;
        }

        let mut centroid = [0.0; 3];
        for (x, _) in simplex.iter().take(3) {
            for i in 0..3 {
                centroid[i] += x[i] / 3.0;
            }
        }
        let worst = simplex[3];
        let refl = std::array::from_fn(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]));
        let refl = clamp01(refl);
        let f_refl = eval(refl);

        if f_refl > simplex[0].1 {
            let exp = std::array::from_fn(|i| centroid[i] + gamma * (refl[i] - centroid[i]));
            let exp = clamp01(exp);
            let f_exp = eval(exp);
            simplex[3] = if f_exp > f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl > simplex[2].1 {
            simplex[3] = (refl, f_refl);
        } else {
            let con = std::array::from_fn(|i| centroid[i] + rho * (worst.0[i] - centroid[i]));
            let con = clamp01(con);
            let f_con = eval(con);
            if f_con > worst.1 {
                simplex[3] = (con, f_con);
            } else {
                let best = simplex[0].0;
                for k in 1..4 {
                    let x = std::array::from_fn(|i| best[i] + sigma * (simplex[k].0[i] - best[i]));
                    let x = clamp01(x);
                    let v = eval(x);
                    simplex[k] = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    SimplexResult {
        x: simplex[0].0,
        value: simplex[0].1,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0);
    }

    #[test]
    fn simplex_finds_interior_peak() {
        let f = |x: [f64; 3]| {
            -(x[0] - 0.2).powi(2) - 2.0 * (x[1] - 0.7).powi(2) - (x[2] - 0.5).powi(2)
        };
        let r = nelder_mead_max_box(f, [0.5, 0.5, 0.5], 0.1, 500);
        assert!((r.x[0] - 0.2).abs() < 1e-5);
        assert!((r.x[1] - 0.7).abs() < 1e-5);
        assert!((r.x[2] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn simplex_respects_box() {
        let f = |x: [f64; 3]| x[0] + x[1] + x[2];
        let r = nelder_mead_max_box(f, [0.9, 0.9, 0.9], 0.2, 500);
        assert!(r.x.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(r.value <= 3.0 + 1e-12);
    }
}
