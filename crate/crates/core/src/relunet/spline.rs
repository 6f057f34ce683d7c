//! Exact ReLU realizations of continuous piecewise-affine functions on `[0,1]`.

use super::{LayerBuilder, ReluNet};
use crate::error::{Error, Result};
use crate::pwl::PiecewiseAffine;

/// One hidden layer with a unit per breakpoint plus one for the linear part.
///
/// Size `m + 2`, depth 2. Exact for `x >= 0`.
pub fn spline_shallow(f: &PiecewiseAffine) -> ReluNet {
    let e = f.relu_expansion();
    let mut hidden = LayerBuilder::new(1);
    hidden.push_row([(0, 1.0)], 0.0);
    for &(beta, _) in &e.kinks {
        hidden.push_row([(0, 1.0)], -beta);
    }
    let hidden = hidden.finish();
    let mut out = LayerBuilder::new(hidden.out_dim());
    out.push_row(
        std::iter::once((0, e.slope)).chain(e.kinks.iter().enumerate().map(|(j, &(_, d))| (j + 1, d))),
        e.offset,
    );
    ReluNet::new(vec![hidden, out.finish()]).expect("static shape")
}

/// Breakpoints handled per pair of width-`width` layers.
pub fn breakpoints_per_block(width: usize) -> usize {
    let p = width.saturating_sub(2);
    p * (p / 6)
}

/// `(size, depth)` of [`spline_deep`] for `m` breakpoints at width `width`.
pub fn spline_deep_shape(m: usize, width: usize) -> Result<(usize, usize)> {
    if width < 8 {
        return Err(Error::WidthTooSmall(width));
    }
    let depth = (2 * m.div_ceil(breakpoints_per_block(width)) + 1).max(2);
    Ok((width * (depth - 1) + 1, depth))
}

/// Fixed-width realization: every hidden layer has exactly `width` neurons.
///
/// Breakpoints are processed in consecutive chunks of
/// `(W-2) * floor((W-2)/6)`, two layers per chunk. Two neurons per layer
/// carry `x` and a running sum; the rest build, in the first layer, hinge
/// functions of `x`, and in the second, ReLUs of piecewise-affine
/// combinations of them that each cross zero at up to `floor((W-2)/6)`
/// breakpoints. Hinges of those combinations that fall outside their zero
/// set are cancelled through the sum channel.
///
/// Exact for `x` in `[0,1]`.
pub fn spline_deep(f: &PiecewiseAffine, width: usize) -> Result<ReluNet> {
    let (_, depth) = spline_deep_shape(f.breakpoints(), width)?;
    let e = f.relu_expansion();
    let p = width - 2;
    let q = p / 6;
    let chunk_len = breakpoints_per_block(width);

    let blocks: Vec<Block> = e.kinks.chunks(chunk_len).map(|c| Block::plan(c, q)).collect();

    // sup-norm bound on every partial sum carried by the sum channel
    let shift = 1.0
        + e.offset.abs()
        + e.slope.abs()
        + blocks.iter().map(Block::magnitude).sum::<f64>();

    let mut layers = Vec::with_capacity(depth);
    if blocks.is_empty() {
        let mut hidden = LayerBuilder::new(1);
        hidden.push_row([(0, 1.0)], 0.0);
        pad(&mut hidden, width);
        let hidden = hidden.finish();
        let mut out = LayerBuilder::new(width);
        out.push_row([(0, e.slope)], e.offset);
        layers.push(hidden);
        layers.push(out.finish());
        return ReluNet::new(layers);
    }

    // contributions of the previous block's second layer to the sum
    let mut carry: Vec<(usize, f64)> = Vec::new();
    for (bi, block) in blocks.iter().enumerate() {
        let first = bi == 0;
        let in_dim = if first { 1 } else { width };
        let mut l1 = LayerBuilder::new(in_dim);
        l1.push_row([(0, 1.0)], 0.0);
        if first {
            l1.push_row([(0, e.slope)], shift + e.offset);
        } else {
            l1.push_row(std::iter::once((1, 1.0)).chain(carry.iter().copied()), 0.0);
        }
        for &t in &block.hinges {
            l1.push_row([(0, 1.0)], -t);
        }
        pad(&mut l1, width);
        layers.push(l1.finish());

        let mut l2 = LayerBuilder::new(width);
        l2.push_row([(0, 1.0)], 0.0);
        l2.push_row(
            std::iter::once((1, 1.0)).chain(block.direct.iter().map(|&(h, w)| (h + 2, w))),
            0.0,
        );
        carry.clear();
        for (k, unit) in block.units.iter().enumerate() {
            l2.push_row(
                std::iter::once((0, unit.slope0)).chain(unit.hinge_weights.iter().map(|&(h, w)| (h + 2, w))),
                unit.value0,
            );
            carry.push((k + 2, unit.sign));
        }
        pad(&mut l2, width);
        layers.push(l2.finish());
    }
    let mut out = LayerBuilder::new(width);
    out.push_row(std::iter::once((1, 1.0)).chain(carry.iter().copied()), -shift);
    layers.push(out.finish());
    debug_assert_eq!(layers.len(), depth);
    ReluNet::new(layers)
}

fn pad(b: &mut LayerBuilder, width: usize) {
    while b.len() < width {
        b.push_row(std::iter::empty(), 0.0);
    }
}

/// Second-layer unit `sign * relu(g(x))` with
/// `g(x) = value0 + slope0 * x + sum_h w_h relu(x - t_h)`.
#[derive(Debug)]
struct Unit {
    sign: f64,
    value0: f64,
    slope0: f64,
    hinge_weights: Vec<(usize, f64)>,
    /// `max |g|` over `[0,1]`
    sup: f64,
}

#[derive(Debug)]
struct Block {
    /// First-layer hinge locations.
    hinges: Vec<f64>,
    /// `(hinge index, weight)` added straight into the sum channel.
    direct: Vec<(usize, f64)>,
    units: Vec<Unit>,
}

impl Block {
    fn plan(kinks: &[(f64, f64)], q: usize) -> Self {
        let mut block = Block { hinges: Vec::new(), direct: Vec::new(), units: Vec::new() };
        let pos: Vec<(f64, f64)> = kinks.iter().copied().filter(|k| k.1 > 0.0).collect();
        let neg: Vec<(f64, f64)> = kinks.iter().copied().filter(|k| k.1 < 0.0).collect();
        for (family, sign) in [(pos, 1.0), (neg, -1.0)] {
            block.plan_family(&family, q, sign);
        }
        block
    }

    fn plan_family(&mut self, family: &[(f64, f64)], q: usize, sign: f64) {
        let u = family.len() / q;
        let used = u * q;
        for &(beta, delta) in &family[used..] {
            self.hinges.push(beta);
            self.direct.push((self.hinges.len() - 1, delta));
        }
        if u == 0 {
            return;
        }
        // two hinges inside each gap between consecutive rows
        let mut gap_hinges = Vec::with_capacity(q - 1);
        for i in 0..q - 1 {
            let a = family[i * u + u - 1].0;
            let b = family[(i + 1) * u].0;
            let t1 = a + (b - a) / 3.0;
            let t2 = a + 2.0 * (b - a) / 3.0;
            self.hinges.push(t1);
            self.hinges.push(t2);
            gap_hinges.push((self.hinges.len() - 2, t1, self.hinges.len() - 1, t2));
        }
        for k in 0..u {
            let zeros: Vec<(f64, f64)> = (0..q)
                .map(|i| {
                    let (beta, delta) = family[i * u + k];
                    let slope = if i % 2 == 0 { delta.abs() } else { -delta.abs() };
                    (beta, slope)
                })
                .collect();
            let line = |i: usize, x: f64| zeros[i].1 * (x - zeros[i].0);
            let mut hinge_weights = Vec::with_capacity(2 * (q - 1));
            let mut sup = line(0, 0.0).abs().max(line(q - 1, 1.0).abs());
            for (i, &(h1, t1, h2, t2)) in gap_hinges.iter().enumerate() {
                let (v1, v2) = (line(i, t1), line(i + 1, t2));
                let mid = (v2 - v1) / (t2 - t1);
                let d1 = mid - zeros[i].1;
                let d2 = zeros[i + 1].1 - mid;
                sup = sup.max(v1.abs()).max(v2.abs());
                hinge_weights.push((h1, d1));
                hinge_weights.push((h2, d2));
                // the segment through [t1, t2] has constant sign, equal to that of v1
                if v1 > 0.0 {
                    self.direct.push((h1, -sign * d1));
                    self.direct.push((h2, -sign * d2));
                }
            }
            self.units.push(Unit { sign, value0: line(0, 0.0), slope0: zeros[0].1, hinge_weights, sup });
        }
    }

    fn magnitude(&self) -> f64 {
        let direct: f64 = self.direct.iter().map(|&(h, w)| w.abs() * (1.0 - self.hinges[h]).max(0.0)).sum();
        let units: f64 = self.units.iter().map(|u| u.sup).sum();
        direct + units
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::Histogram1D;
    use crate::pwl::inverse_cdf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pwl(m: usize, seed: u64) -> PiecewiseAffine {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..=m).map(|_| rng.random_range(0.2..3.0)).collect();
        let total: f64 = w.iter().sum();
        let n = w.len() as f64;
        inverse_cdf(&Histogram1D::new(w.iter().map(|v| v * n / total).collect()).unwrap())
    }

    fn max_err(net: &ReluNet, f: &PiecewiseAffine) -> f64 {
        let mut xs: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
        xs.extend_from_slice(f.knots());
        xs.iter().map(|&x| (net.eval1(x)[0] - f.eval(x).unwrap()).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn shallow_is_exact() {
        for m in [0, 1, 5, 40] {
            let f = random_pwl(m, m as u64);
            let net = spline_shallow(&f);
            assert_eq!((net.size(), net.depth()), (m + 2, 2));
            assert!(max_err(&net, &f) < 1e-12);
        }
    }

    #[test]
    fn shape_formula() {
        assert_eq!(spline_deep_shape(0, 8).unwrap(), (9, 2));
        assert_eq!(spline_deep_shape(6, 8).unwrap(), (17, 3));
        assert_eq!(spline_deep_shape(7, 8).unwrap(), (33, 5));
        assert_eq!(breakpoints_per_block(14), 24);
        assert!(matches!(spline_deep_shape(3, 7), Err(Error::WidthTooSmall(7))));
    }

    #[test]
    fn deep_is_exact() {
        for (m, width) in [(0, 8), (1, 8), (6, 8), (13, 8), (30, 14), (24, 14), (100, 20), (200, 32), (255, 16)] {
            let f = random_pwl(m, 7 + m as u64);
            assert_eq!(f.breakpoints(), m);
            let net = spline_deep(&f, width).unwrap();
            let (size, depth) = spline_deep_shape(m, width).unwrap();
            assert_eq!((net.size(), net.depth()), (size, depth));
            assert!(net.layers()[..depth - 1].iter().all(|l| l.out_dim() == width));
            let err = max_err(&net, &f);
            assert!(err < 1e-9, "m={m} W={width} err={err}");
        }
    }

    #[test]
    fn deep_handles_one_sided_families() {
        // convex: every slope change positive
        let knots: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let values: Vec<f64> = knots.iter().map(|x| x * x).collect();
        let f = PiecewiseAffine::new(knots, values).unwrap();
        for width in [8, 14, 26] {
            let net = spline_deep(&f, width).unwrap();
            assert!(max_err(&net, &f) < 1e-10);
        }
    }
}
