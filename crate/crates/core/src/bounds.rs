//! Closed-form size bounds for generators of `n`-tiled histograms.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pushforward::{choose_s, default_width, guarantee, predicted_accounting};

/// `Gamma(k / 2)` for `k >= 1`, by the recursion `Gamma(z + 1) = z Gamma(z)`
/// from `Gamma(1/2) = sqrt(pi)` and `Gamma(1) = 1`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "Gamma(0) is undefined");
    let (mut z, mut g) = if k % 2 == 1 { (0.5, PI.sqrt()) } else { (1.0, 1.0) };
    while z < k as f64 / 2.0 {
        g *= z;
        z += 1.0;
    }
    g
}

/// `C(d) = d/(d-1) * (2 Gamma((d+1)/2) Gamma(3/2) / (pi^(d/2) sqrt(d)))^(1/(d-1))`
pub fn c_constant(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    let df = d as f64;
    let inner = 2.0 * gamma_half(d + 1) * gamma_half(3) / (PI.powf(df / 2.0) * df.sqrt());
    Ok(df / (df - 1.0) * inner.powf(1.0 / (df - 1.0)))
}

/// `ln((e (N/L + 1))^L)`
pub fn ln_zeta_cap(size: usize, depth: usize) -> Result<f64> {
    if depth == 0 || size < depth {
        return Err(Error::Domain(format!("need N >= L >= 1, got N={size}, L={depth}")));
    }
    let l = depth as f64;
    Ok(l * (1.0 + (size as f64 / l + 1.0).ln()))
}

/// Cap `(e (N/L + 1))^L` on the number of affine pieces of any depth-`L`,
/// size-`N` network on an interval. Overflows to infinity for large `L`;
/// see [`ln_zeta_cap`].
pub fn zeta_cap(size: usize, depth: usize) -> Result<f64> {
    ln_zeta_cap(size, depth).map(f64::exp)
}

/// `max{L, L((1/e)(C(d)/(n eps))^((d-1)/L) - 1)}`: fewest neurons of any
/// depth-`L` network pushing `U[0,1]` within `eps` of every `n`-tiled histogram.
pub fn lower_bound_size(n: usize, epsilon: f64, depth: usize, d: u32) -> Result<f64> {
    if n == 0 || depth == 0 || !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain("n, epsilon and L must be positive".into()));
    }
    let c = c_constant(d)?;
    let l = depth as f64;
    let ratio = c / (n as f64 * epsilon);
    let exponent = (d as f64 - 1.0) / l;
    Ok(l.max(l * (ratio.powf(exponent) / E - 1.0)))
}

/// `C(d) zeta^(-1/(d-1)) / n`: Wasserstein floor for pushforwards supported
/// on `zeta` lines.
pub fn w_floor(n: usize, zeta: f64, d: u32) -> Result<f64> {
    if !(zeta >= 1.0) {
        return Err(Error::Domain(format!("zeta must be at least 1, got {zeta}")));
    }
    w_floor_ln(n, zeta.ln(), d)
}

/// [`w_floor`] with `ln zeta` given, for caps beyond `f64` range.
pub fn w_floor_ln(n: usize, ln_zeta: f64, d: u32) -> Result<f64> {
    if n == 0 || !(ln_zeta >= 0.0) {
        return Err(Error::Domain("need n >= 1 and zeta >= 1".into()));
    }
    let c = c_constant(d)?;
    Ok(c * (-ln_zeta / (d as f64 - 1.0)).exp() / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub epsilon: f64,
    #[serde(rename = "L")]
    pub depth: usize,
    pub d: u32,
    pub upper_size: usize,
    pub upper_depth: usize,
    pub lower_size: f64,
    pub zeta_cap: f64,
    pub ln_zeta_cap: f64,
    pub w_floor: f64,
    pub c_d: f64,
}

impl BoundsReport {
    /// `zeta_cap` and `w_floor` are evaluated at size `ceil(lower_size)` and depth `L`.
    pub fn new(n: usize, epsilon: f64, depth: usize, d: u32) -> Result<Self> {
        let (deep, _) = predicted_accounting(n, epsilon, default_width(n))?;
        let lower_size = lower_bound_size(n, epsilon, depth, d)?;
        let ln_cap = ln_zeta_cap(lower_size.ceil() as usize, depth)?;
        Ok(Self {
            n,
            epsilon,
            depth,
            d,
            upper_size: deep.size,
            upper_depth: deep.depth,
            lower_size,
            zeta_cap: ln_cap.exp(),
            ln_zeta_cap: ln_cap,
            w_floor: w_floor_ln(n, ln_cap, d)?,
            c_d: c_constant(d)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub n: usize,
    pub epsilon: f64,
    pub deep_n: usize,
    pub deep_l: usize,
    pub base_n: usize,
    pub base_l: usize,
    pub lb_at_deep_l: f64,
    pub lb_at_base_l: f64,
    pub guarantee: f64,
}

pub const REGIME_HEADER: &str = "n,epsilon,deep_N,deep_L,base_N,base_L,lb_at_deep_L,lb_at_base_L,guarantee";

impl RegimeRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.epsilon,
            self.deep_n,
            self.deep_l,
            self.base_n,
            self.base_l,
            self.lb_at_deep_l,
            self.lb_at_base_l,
            self.guarantee
        )
    }
}

/// Predicted sizes of both builders for generic histograms, with the lower
/// bound at each depth evaluated at the certified accuracy.
pub fn regime_table(cases: &[(usize, f64)]) -> Result<Vec<RegimeRow>> {
    cases
        .iter()
        .map(|&(n, epsilon)| {
            let (deep, base) = predicted_accounting(n, epsilon, default_width(n))?;
            let g = guarantee(n, choose_s(n, epsilon)?);
            Ok(RegimeRow {
                n,
                epsilon,
                deep_n: deep.size,
                deep_l: deep.depth,
                base_n: base.size,
                base_l: base.depth,
                lb_at_deep_l: lower_bound_size(n, g, deep.depth, 2)?,
                lb_at_base_l: lower_bound_size(n, g, base.depth, 2)?,
                guarantee: g,
            })
        })
        .collect()
}
