//! Size/depth-accounted network combinators.
//!
//! | combinator | size | depth |
//! |---|---|---|
//! | `pass(f, L')` | `N + (L' - L)` | `L'` |
//! | `parallel(f, g)` | `N1 + N2 + abs(L1 - L2)` | `max(L1, L2)` |
//! | `compose(f, g, p, q)` | `N1 + N2 - 1` | `L1 + L2 - 1` |
//! | `add(f_1..f_l)`, `l >= 2` | `sum(N_i + 2 L_i - 2) - l + 1` | `sum(L_i) - l + 1` |

use super::{extract_pieces, AffineLayer, LayerBuilder, ReluNet};
use crate::error::{Error, Result};

/// Pads `net` to depth `target` with identity layers.
///
/// The former output layer becomes a hidden layer, so the function is only
/// preserved where every output is nonnegative. Each added layer has
/// `out_dim` neurons (one for the scalar case).
pub fn pass(net: &ReluNet, target: usize) -> Result<ReluNet> {
    let depth = net.depth();
    if target < depth {
        return Err(Error::DepthTooSmall { target, depth });
    }
    let width = net.out_dim();
    let mut layers = net.layers().to_vec();
    for _ in depth..target {
        let mut b = LayerBuilder::new(width);
        for k in 0..width {
            b.push_row([(k, 1.0)], 0.0);
        }
        layers.push(b.finish());
    }
    ReluNet::new(layers)
}

/// Stacks `f` and `g` side by side on a shared input: `x -> (f(x), g(x))`.
///
/// The shallower net is padded with [`pass`] first, which requires its
/// outputs to be nonnegative on the domain of interest.
pub fn parallel(f: &ReluNet, g: &ReluNet) -> Result<ReluNet> {
    if f.in_dim() != g.in_dim() {
        return Err(Error::InputDimMismatch(f.in_dim(), g.in_dim()));
    }
    let depth = f.depth().max(g.depth());
    let f = pass(f, depth)?;
    let g = pass(g, depth)?;
    let mut layers = Vec::with_capacity(depth);
    for (k, (lf, lg)) in f.layers().iter().zip(g.layers()).enumerate() {
        let in_dim = if k == 0 { f.in_dim() } else { lf.in_dim() + lg.in_dim() };
        let mut b = LayerBuilder::new(in_dim);
        b.push_block(lf, 0);
        b.push_block(lg, if k == 0 { 0 } else { lf.in_dim() });
        layers.push(b.finish());
    }
    ReluNet::new(layers)
}

/// `x -> f(p * g(x) + q)`, fusing the output layer of `g` into the first
/// layer of `f`.
pub fn compose(f: &ReluNet, g: &ReluNet, p: f64, q: f64) -> Result<ReluNet> {
    if f.in_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.in_dim() });
    }
    if g.out_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: g.out_dim() });
    }
    let g_layers = g.layers();
    let (g_out, g_hidden) = g_layers.split_last().unwrap();
    let (f_in, f_rest) = f.layers().split_first().unwrap();

    let g_row: Vec<(usize, f64)> = g_out.row(0).collect();
    let g_bias = g_out.bias()[0];
    let mut merged = LayerBuilder::new(g_out.in_dim());
    for r in 0..f_in.out_dim() {
        let a = f_in.row(r).next().map_or(0.0, |(_, v)| v);
        merged.push_row(g_row.iter().map(|&(c, v)| (c, p * a * v)), (p * g_bias + q) * a + f_in.bias()[r]);
    }

    let mut layers: Vec<AffineLayer> = g_hidden.to_vec();
    layers.push(merged.finish());
    layers.extend_from_slice(f_rest);
    ReluNet::new(layers)
}

/// Sum of scalar nets `sum_i f_i(x)` for `x` in `[0,1]`.
///
/// The nets are chained in series; every hidden layer carries two extra
/// neurons, one forwarding `x` and one holding the running sum shifted by a
/// constant so that it survives the ReLU. The shift is derived from the
/// exact piece decomposition of each summand on `[0,1]`.
///
/// A single net is returned unchanged.
pub fn add(nets: &[ReluNet]) -> Result<ReluNet> {
    check_summands(nets)?;
    if nets.len() == 1 {
        return Ok(nets[0].clone());
    }
    let mut bound = 0.0;
    for net in nets {
        bound += extract_pieces(net, 0.0, 1.0)?.max_abs()[0];
    }
    add_bounded(nets, bound)
}

/// [`add`] with a caller-supplied bound `bound >= sum_i max_[0,1] |f_i|`.
///
/// Unlike [`add`], a single net still receives the channel layout, so the
/// size formula holds for every `l >= 1`.
pub fn add_bounded(nets: &[ReluNet], bound: f64) -> Result<ReluNet> {
    check_summands(nets)?;
    let shift = 1.0 + bound;
    let mut layers: Vec<AffineLayer> = Vec::new();
    let mut frontier_dim = 1;
    let mut x_col = 0;
    // running sum plus `shift`, as a linear functional of the frontier
    let mut sum_terms: Vec<(usize, f64)> = Vec::new();
    let mut sum_const = shift;

    for net in nets {
        let net_layers = net.layers();
        let (out, hidden) = net_layers.split_last().unwrap();
        for (k, layer) in hidden.iter().enumerate() {
            let mut b = LayerBuilder::new(frontier_dim);
            b.push_row([(x_col, 1.0)], 0.0);
            b.push_row(sum_terms.iter().copied(), sum_const);
            if k == 0 {
                for r in 0..layer.out_dim() {
                    b.push_row(layer.row(r).map(|(_, v)| (x_col, v)), layer.bias()[r]);
                }
            } else {
                b.push_block(layer, 2);
            }
            let l = b.finish();
            frontier_dim = l.out_dim();
            layers.push(l);
            x_col = 0;
            sum_terms = vec![(1, 1.0)];
            sum_const = 0.0;
        }
        if hidden.is_empty() {
            sum_terms.extend(out.row(0).map(|(_, v)| (x_col, v)));
        } else {
            sum_terms.extend(out.row(0).map(|(c, v)| (c + 2, v)));
        }
        sum_const += out.bias()[0];
    }
    let mut b = LayerBuilder::new(frontier_dim);
    b.push_row(sum_terms, sum_const - shift);
    layers.push(b.finish());
    ReluNet::new(layers)
}

fn check_summands(nets: &[ReluNet]) -> Result<()> {
    if nets.is_empty() {
        return Err(Error::EmptyList);
    }
    for net in nets {
        if net.in_dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: net.in_dim() });
        }
        if net.out_dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: net.out_dim() });
        }
    }
    Ok(())
}
