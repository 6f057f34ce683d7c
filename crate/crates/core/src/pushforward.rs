//! Generators `phi: [0,1] -> [0,1]^2` pushing `U[0,1]` close to a 2-D histogram.
//!
//! The first output is the marginal quantile function `phi_marg`. The second
//! is `sum_i phi_i(g_s(n * phi_marg(x) - i))`, where `phi_i` is the quantile
//! function of row `i` and the sawtooth `g_s` sweeps each marginal tile
//! `2^s` times. Only the branch of the tile containing `phi_marg(x)` is
//! nonzero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::Histogram2D;
use crate::pwl::{inverse_cdf, PiecewiseAffine};
use crate::relunet::{
    add, add_bounded, compose, parallel, sawtooth, spline_deep, spline_deep_shape, spline_shallow, LayerBuilder,
    ReluNet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Deep,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub n: usize,
    pub epsilon: f64,
    pub s: usize,
    pub size: usize,
    pub depth: usize,
    /// Hidden width of the deep splines; `None` for the baseline.
    #[serde(rename = "W")]
    pub width: Option<usize>,
    pub guarantee: f64,
    pub variant: Variant,
}

impl BuildReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// `2 sqrt(2) / (n 2^s)`
pub fn guarantee(n: usize, s: usize) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / (n as f64 * (s as f64).exp2())
}

/// Smallest admissible `s >= 1` with `guarantee(n, s) <= epsilon`.
pub fn choose_s(n: usize, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let ratio = 2.0 * std::f64::consts::SQRT_2 / (n as f64 * epsilon);
    let mut s = ratio.log2().ceil().max(1.0) as usize;
    while guarantee(n, s) > epsilon {
        s += 1;
    }
    Ok(s)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// `max(8, ceil(sqrt(n)))`
pub fn default_width(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    r.max(8)
}

/// The quantile functions behind `phi`: marginal first, then one per row.
#[derive(Debug, Clone)]
pub struct Splines {
    pub marginal: PiecewiseAffine,
    pub rows: Vec<PiecewiseAffine>,
}

impl Splines {
    pub fn of(p: &Histogram2D) -> Result<Self> {
        let marginal = inverse_cdf(&p.marginal_first());
        let rows = (0..p.n())
            .map(|i| p.conditional_second(i).map(|h| inverse_cdf(&h)))
            .collect::<Result<Vec<_>>>()?;
        for (i, f) in rows.iter().enumerate() {
            if f.values()[0] != 0.0 {
                return Err(Error::Internal(format!("row {i} quantile function does not vanish at 0")));
            }
        }
        Ok(Self { marginal, rows })
    }

    /// Breakpoint counts: marginal first.
    pub fn breakpoints(&self) -> (usize, Vec<usize>) {
        (self.marginal.breakpoints(), self.rows.iter().map(PiecewiseAffine::breakpoints).collect())
    }

    /// `phi(x)` evaluated from the quantile functions and the closed-form sawtooth.
    pub fn eval_phi(&self, s: usize, x: f64) -> (f64, f64) {
        let n = self.rows.len();
        let y = self.marginal.eval_unchecked(x.clamp(0.0, 1.0));
        let mut second = 0.0;
        for (i, f) in self.rows.iter().enumerate() {
            let t = n as f64 * y - i as f64;
            if (0.0..=1.0).contains(&t) {
                second += f.eval_unchecked(sawtooth_value(s, t));
            }
        }
        (y, second)
    }
}

/// `g_s(t)` for `t` in `[0,1]`: the tent map iterated `s` times.
fn sawtooth_value(s: usize, t: f64) -> f64 {
    let mut v = t;
    for _ in 0..s {
        v = if v <= 0.5 { 2.0 * v } else { 2.0 - 2.0 * v };
    }
    v
}

/// Deep construction at the accuracy `epsilon`.
pub fn build_phi(p: &Histogram2D, epsilon: f64, width: Option<usize>) -> Result<(ReluNet, BuildReport)> {
    let s = choose_s(p.n(), epsilon)?;
    let (net, mut report) = build_phi_with_s(p, s, width)?;
    report.epsilon = epsilon;
    Ok((net, report))
}

/// Deep construction with an explicit sawtooth order `s`; the report's
/// `epsilon` is the guarantee.
pub fn build_phi_with_s(p: &Histogram2D, s: usize, width: Option<usize>) -> Result<(ReluNet, BuildReport)> {
    let n = p.n();
    check_s(s)?;
    let width = width.unwrap_or_else(|| default_width(n));
    if width < 8 {
        return Err(Error::WidthTooSmall(width));
    }
    let splines = Splines::of(p)?;
    let phi_marg = spline_deep(&splines.marginal, width)?;
    let g = sawtooth(s);
    let mut branches = Vec::with_capacity(n);
    for (i, f) in splines.rows.iter().enumerate() {
        let inner = compose(&g, &phi_marg, n as f64, -(i as f64))?;
        branches.push(compose(&spline_deep(f, width)?, &inner, 1.0, 0.0)?);
    }
    // every branch takes values in [0,1]
    let sum = if n == 1 { add(&branches)? } else { add_bounded(&branches, n as f64)? };
    drop(branches);
    let net = parallel(&phi_marg, &sum)?;
    let report = report_for(&net, n, s, Some(width), Variant::Deep);
    Ok((net, report))
}

fn check_s(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    Ok(())
}

fn report_for(net: &ReluNet, n: usize, s: usize, width: Option<usize>, variant: Variant) -> BuildReport {
    BuildReport {
        n,
        epsilon: guarantee(n, s),
        s,
        size: net.size(),
        depth: net.depth(),
        width,
        guarantee: guarantee(n, s),
        variant,
    }
}

/// Wide construction of the same function: depth `s + 3`.
pub fn build_phi_baseline(p: &Histogram2D, epsilon: f64) -> Result<(ReluNet, BuildReport)> {
    let s = choose_s(p.n(), epsilon)?;
    let (net, mut report) = build_phi_baseline_with_s(p, s)?;
    report.epsilon = epsilon;
    Ok((net, report))
}

/// Layout: the shallow marginal spline's hidden layer; `s` layers holding
/// three sawtooth neurons per branch plus a copy of `phi_marg`; one layer of
/// shallow row-spline neurons per branch plus that copy; a two-neuron output.
pub fn build_phi_baseline_with_s(p: &Histogram2D, s: usize) -> Result<(ReluNet, BuildReport)> {
    check_s(s)?;
    let n = p.n();
    let splines = Splines::of(p)?;
    let marg = spline_shallow(&splines.marginal);
    let (marg_hidden, marg_out) = (&marg.layers()[0], &marg.layers()[1]);
    let marg_row: Vec<(usize, f64)> = marg_out.row(0).collect();
    let marg_bias = marg_out.bias()[0];
    let tri_bias = [0.0, -0.5, -1.0];
    let tri_out = [2.0, -4.0, 2.0];

    let mut layers = vec![marg_hidden.clone()];

    // first sawtooth layer reads n * phi_marg - i through the marginal output row
    let mut b = LayerBuilder::new(marg_hidden.out_dim());
    b.push_row(marg_row.iter().copied(), marg_bias);
    let nf = n as f64;
    for i in 0..n {
        for tb in tri_bias {
            b.push_row(marg_row.iter().map(|&(c, v)| (c, nf * v)), nf * marg_bias - i as f64 + tb);
        }
    }
    layers.push(b.finish());

    // column 0 carries phi_marg, branch i occupies columns 1 + 3i .. 4 + 3i
    for _ in 1..s {
        let mut b = LayerBuilder::new(1 + 3 * n);
        b.push_row([(0, 1.0)], 0.0);
        for i in 0..n {
            for tb in tri_bias {
                b.push_row((0..3).map(|k| (1 + 3 * i + k, tri_out[k])), tb);
            }
        }
        layers.push(b.finish());
    }

    let mut b = LayerBuilder::new(1 + 3 * n);
    b.push_row([(0, 1.0)], 0.0);
    let mut out_row: Vec<(usize, f64)> = Vec::new();
    let mut out_bias = 0.0;
    for (i, f) in splines.rows.iter().enumerate() {
        let e = f.relu_expansion();
        let saw: Vec<(usize, f64)> = (0..3).map(|k| (1 + 3 * i + k, tri_out[k])).collect();
        let r = b.push_row(saw.iter().copied(), 0.0);
        out_row.push((r, e.slope));
        for &(beta, delta) in &e.kinks {
            let r = b.push_row(saw.iter().copied(), -beta);
            out_row.push((r, delta));
        }
        out_bias += e.offset;
    }
    let last_hidden = b.finish();
    let width = last_hidden.out_dim();
    layers.push(last_hidden);

    let mut b = LayerBuilder::new(width);
    b.push_row([(0, 1.0)], 0.0);
    b.push_row(out_row, out_bias);
    layers.push(b.finish());

    let net = ReluNet::new(layers)?;
    let report = report_for(&net, n, s, None, Variant::Baseline);
    Ok((net, report))
}

/// `(size, depth)` the builders produce, from the combinator formulas alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accounting {
    pub size: usize,
    pub depth: usize,
}

/// Deep-builder accounting for the given spline breakpoint counts.
pub fn predicted_deep(m_marg: usize, m_rows: &[usize], s: usize, width: usize) -> Result<Accounting> {
    let n = m_rows.len();
    if n == 0 {
        return Err(Error::EmptyList);
    }
    let (nm, lm) = spline_deep_shape(m_marg, width)?;
    let (ng, lg) = (3 * s + 1, s + 1);
    let (ni, li) = (ng + nm - 1, lg + lm - 1);
    let mut branches = Vec::with_capacity(n);
    for &m in m_rows {
        let (nf, lf) = spline_deep_shape(m, width)?;
        branches.push((nf + ni - 1, lf + li - 1));
    }
    let (ns, ls) = if n == 1 {
        branches[0]
    } else {
        let size = branches.iter().map(|&(nb, lb)| nb + 2 * lb - 2).sum::<usize>() - n + 1;
        let depth = branches.iter().map(|&(_, lb)| lb).sum::<usize>() - n + 1;
        (size, depth)
    };
    Ok(Accounting { size: nm + ns + lm.abs_diff(ls), depth: lm.max(ls) })
}

/// Baseline accounting for the given spline breakpoint counts.
pub fn predicted_baseline(m_marg: usize, m_rows: &[usize], s: usize) -> Accounting {
    let n = m_rows.len();
    let last: usize = m_rows.iter().map(|m| m + 1).sum::<usize>() + 1;
    Accounting { size: (m_marg + 1) + s * (3 * n + 1) + last + 2, depth: s + 3 }
}

/// Accounting for a histogram whose quantile functions all have the
/// generic `n - 1` breakpoints (pairwise distinct adjacent weights).
pub fn predicted_accounting(n: usize, epsilon: f64, width: usize) -> Result<(Accounting, Accounting)> {
    let s = choose_s(n, epsilon)?;
    let rows = vec![n - 1; n];
    Ok((predicted_deep(n - 1, &rows, s, width)?, predicted_baseline(n - 1, &rows, s)))
}

/// Accounting for a specific histogram.
pub fn predicted_for(p: &Histogram2D, s: usize, width: usize) -> Result<(Accounting, Accounting)> {
    let (m_marg, m_rows) = Splines::of(p)?.breakpoints();
    Ok((predicted_deep(m_marg, &m_rows, s, width)?, predicted_baseline(m_marg, &m_rows, s)))
}
