//! Reference computations that avoid the code paths they check.

use histopush::relunet::{AffineLayer, PieceDecomposition, ReluNet};
use histopush::transport::DiscreteMeasure;
use histopush::{Histogram1D, Histogram2D, PiecewiseAffine, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// `g_s` on `[0,1]` by its tooth formula: `2^s x - 2k` on the rising half of
/// tooth `k`, `2(k+1) - 2^s x` on the falling half.
pub fn sawtooth_closed(s: usize, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    let y = x * (1u64 << s) as f64;
    let k = (y / 2.0).floor();
    let local = y - 2.0 * k;
    if local <= 1.0 {
        local
    } else {
        2.0 - local
    }
}

/// `C(d)` through a general-purpose Gamma function.
pub fn c_constant_gamma(d: u32) -> f64 {
    use statrs::function::gamma::gamma;
    let df = d as f64;
    let inner = 2.0 * gamma((df + 1.0) / 2.0) * gamma(1.5) / (PI.powf(df / 2.0) * df.sqrt());
    df / (df - 1.0) * inner.powf(1.0 / (df - 1.0))
}

/// `int_0^1 |F_P - F_Q|` by the midpoint rule on `points` nodes, where `F`
/// is the CDF of the piecewise-constant density.
pub fn w1_quadrature(p: &Histogram1D, q: &Histogram1D, points: usize) -> f64 {
    let cdf_p = cdf_table(p);
    let cdf_q = cdf_table(q);
    let h = 1.0 / points as f64;
    let mut total = 0.0;
    for j in 0..points {
        let x = (j as f64 + 0.5) * h;
        total += (cdf_at(&cdf_p, x) - cdf_at(&cdf_q, x)).abs();
    }
    total * h
}

fn cdf_table(p: &Histogram1D) -> Vec<f64> {
    let n = p.n() as f64;
    let mut acc = vec![0.0];
    let mut s = 0.0;
    for w in p.weights() {
        s += w / n;
        acc.push(s);
    }
    acc
}

fn cdf_at(table: &[f64], x: f64) -> f64 {
    let n = table.len() - 1;
    let k = ((x * n as f64) as usize).min(n - 1);
    let frac = x * n as f64 - k as f64;
    table[k] + frac * (table[k + 1] - table[k])
}

/// Affine pieces of the generator for `p` at sawtooth depth `s`, assembled
/// tile by tile from the histogram masses.
///
/// Inside column tile `i` (domain `[c_i, c_i + a_i]`, `a_i` its mass) the
/// first coordinate rises linearly across the column while the second
/// follows the row quantile function through `2^s` teeth.
pub fn reference_pieces(p: &Histogram2D, s: usize) -> Result<PieceDecomposition> {
    let n = p.n();
    let nf = n as f64;
    let teeth = 1usize << s;
    let mut bps = Vec::new();
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut c = 0.0;
    for i in 0..n {
        let a: f64 = (0..n).map(|k| p.mass(i, k)).sum();
        let row: Vec<f64> = (0..n).map(|k| p.mass(i, k) / a).collect();
        let mut d = vec![0.0];
        for b in &row {
            d.push(d.last().unwrap() + b);
        }
        let first = (1.0 / (nf * a), i as f64 / nf - c / (nf * a));
        for j in 0..teeth {
            let rising = j % 2 == 0;
            // u(x) = sigma * 2^s (x - c) / a + tau
            let sigma = if rising { 1.0 } else { -1.0 };
            let tau = if rising { -(j as f64) } else { (j + 1) as f64 };
            let slope_u = sigma * teeth as f64 / a;
            let order: Vec<usize> = if rising { (0..n).collect() } else { (0..n).rev().collect() };
            for k in order {
                let seg_slope = 1.0 / (row[k] * nf);
                // phi_i(u) = k/n + (u - d_k) seg_slope
                let slope = seg_slope * slope_u;
                let intercept = k as f64 / nf + seg_slope * (tau - sigma * teeth as f64 * c / a - d[k]);
                if !pieces.is_empty() {
                    let u_start = if rising { d[k] } else { d[k + 1] };
                    bps.push(c + a * (sigma * (u_start - tau)) / teeth as f64);
                }
                pieces.push(vec![first, (slope, intercept)]);
            }
        }
        c += a;
    }
    fuse(&mut bps, &mut pieces);
    PieceDecomposition::from_parts(0.0, 1.0, bps, pieces)
}

fn fuse(bps: &mut Vec<f64>, pieces: &mut Vec<Vec<(f64, f64)>>) {
    let same = |u: &[(f64, f64)], v: &[(f64, f64)]| {
        u.iter().zip(v).all(|(a, b)| (a.0 - b.0).abs() <= 1e-10 * a.0.abs().max(b.0.abs()).max(1.0))
    };
    let mut keep_bps = Vec::with_capacity(bps.len());
    let mut keep = vec![pieces[0].clone()];
    for (t, piece) in bps.iter().zip(pieces.iter().skip(1)) {
        if !same(keep.last().unwrap(), piece) {
            keep_bps.push(*t);
            keep.push(piece.clone());
        }
    }
    *bps = keep_bps;
    *pieces = keep;
}

/// Cost of the north-west-corner coupling after sorting both measures by
/// `key`. Any coupling bounds `W` from above.
pub fn sorted_coupling_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, key: impl Fn(&[f64]) -> (usize, f64)) -> f64 {
    let order = |m: &DiscreteMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&x, &y| {
            let (kx, ky) = (key(m.point(x)), key(m.point(y)));
            kx.0.cmp(&ky.0).then(kx.1.total_cmp(&ky.1))
        });
        idx
    };
    let (a, b) = (order(mu), order(nu));
    let scale = mu.total_mass() / nu.total_mass();
    let (mut i, mut j) = (0, 0);
    let mut left_a = mu.masses()[a[0]];
    let mut left_b = nu.masses()[b[0]] * scale;
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let moved = left_a.min(left_b);
        let (x, y) = (mu.point(a[i]), nu.point(b[j]));
        cost += moved * x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        left_a -= moved;
        left_b -= moved;
        if left_a <= left_b {
            i += 1;
            if i < a.len() {
                left_a = mu.masses()[a[i]];
            }
        } else {
            j += 1;
            if j < b.len() {
                left_b = nu.masses()[b[j]] * scale;
            }
        }
    }
    cost
}

/// Random net `1 -> out_dim` with `depth` layers, hidden widths in `1..=5`,
/// weights in `[-1, 1]`.
pub fn random_net(rng: &mut ChaCha8Rng, out_dim: usize, depth: usize) -> ReluNet {
    let mut dims = vec![1];
    for _ in 1..depth {
        dims.push(rng.random_range(1..=5));
    }
    dims.push(out_dim);
    let layers = dims
        .windows(2)
        .map(|w| {
            let matrix: Vec<Vec<f64>> =
                (0..w[1]).map(|_| (0..w[0]).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
            let bias = (0..w[1]).map(|_| rng.random_range(-0.5..=0.5)).collect();
            AffineLayer::from_dense(&matrix, bias).expect("consistent shapes")
        })
        .collect();
    ReluNet::new(layers).expect("consistent dimensions")
}

/// Random continuous PWL on `[0,1]` with exactly `m` breakpoints.
pub fn random_pwl(rng: &mut ChaCha8Rng, m: usize) -> PiecewiseAffine {
    loop {
        // knots jittered around an even grid keep gaps away from zero
        let mut knots = vec![0.0];
        for k in 1..=m {
            knots.push((k as f64 + rng.random_range(-0.3..0.3)) / (m + 1) as f64);
        }
        knots.push(1.0);
        let values: Vec<f64> = (0..m + 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = PiecewiseAffine::new(knots, values).expect("valid knots");
        if f.breakpoints() == m {
            return f;
        }
    }
}

/// Least-squares line `y = a + b x`; returns `(b, r^2)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (b, r2)
}
