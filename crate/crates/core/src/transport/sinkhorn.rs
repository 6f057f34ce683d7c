//! Log-domain entropic transport for instances above the exact-solver cap.

use super::DiscreteMeasure;
use crate::error::{Error, Result};

/// Largest `|mu| * |nu|` accepted; the cost matrix is held in memory.
pub const SINKHORN_MAX_ENTRIES: usize = 16_000_000;
/// Target marginal violation (L1) at the final regularization level.
const FINAL_TOL: f64 = 1e-8;
/// Looser target at the warm-start levels.
const WARM_TOL: f64 = 1e-5;
/// Violation above which the result is rejected.
pub const MAX_VIOLATION: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// `<plan, cost>` of the final plan.
    pub cost: f64,
    /// L1 distance between the plan's row sums and `mu`; columns are exact.
    pub violation: f64,
    pub iterations: usize,
    pub reg: f64,
}

/// Entropic transport at `reg`, warm-started through the schedule
/// `0.1, 0.01, ...` down to `reg`, at most `max_iter` sweeps per level.
pub fn sinkhorn(mu: &DiscreteMeasure, nu: &DiscreteMeasure, reg: f64, max_iter: usize) -> Result<SinkhornResult> {
    if !(reg.is_finite() && reg > 0.0) {
        return Err(Error::Domain(format!("regularization must be positive, got {reg}")));
    }
    super::check_pair(mu, nu)?;
    let (n1, n2) = (mu.len(), nu.len());
    if n1.saturating_mul(n2) > SINKHORN_MAX_ENTRIES {
        return Err(Error::TooLarge(n1.max(n2), SINKHORN_MAX_ENTRIES / n1.min(n2).max(1)));
    }
    let cost = |i: usize, j: usize| super::dist(mu.point(i), nu.point(j));
    let log_a: Vec<f64> = mu.masses().iter().map(|m| m.ln()).collect();
    let log_b: Vec<f64> = nu.masses().iter().map(|m| m.ln()).collect();

    let mut schedule = Vec::new();
    let mut r = 0.1f64;
    while r > reg * (1.0 + 1e-12) {
        schedule.push(r);
        r /= 10.0;
    }
    schedule.push(reg);

    let c: Vec<f64> = (0..n1 * n2).map(|k| cost(k / n2, k % n2)).collect();
    let mut f = vec![0.0; n1];
    let mut g = vec![0.0; n2];
    let mut f_next = vec![0.0; n1];
    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    let mut buf = vec![0.0; n2.max(n1)];
    for (level, &eps) in schedule.iter().enumerate() {
        for sweep in 0..max_iter {
            // the f-update reveals the row marginals of the current plan:
            // row i sums to a_i exp((f_i - f_next_i) / eps)
            for i in 0..n1 {
                let ci = &c[i * n2..(i + 1) * n2];
                for j in 0..n2 {
                    buf[j] = (g[j] - ci[j]) / eps + log_b[j];
                }
                f_next[i] = -eps * log_sum_exp(&buf[..n2]);
            }
            if sweep > 0 || level > 0 {
                violation = (0..n1).map(|i| mu.masses()[i] * ((f[i] - f_next[i]) / eps).exp_m1().abs()).sum();
                let tol = if level + 1 == schedule.len() { FINAL_TOL } else { WARM_TOL };
                if violation < tol {
                    break;
                }
            }
            iterations += 1;
            std::mem::swap(&mut f, &mut f_next);
            for j in 0..n2 {
                for i in 0..n1 {
                    buf[i] = (f[i] - c[i * n2 + j]) / eps + log_a[i];
                }
                g[j] = -eps * log_sum_exp(&buf[..n1]);
            }
        }
    }
    if violation > MAX_VIOLATION {
        return Err(Error::NotConverged(violation));
    }
    let mut total = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            let cij = c[i * n2 + j];
            total += ((f[i] + g[j] - cij) / reg + log_a[i] + log_b[j]).exp() * cij;
        }
    }
    Ok(SinkhornResult { cost: total, violation, iterations, reg })
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
