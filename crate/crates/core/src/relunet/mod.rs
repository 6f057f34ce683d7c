//! Fully connected ReLU networks with explicit, analytically chosen weights.
//!
//! A network of depth `L` is a chain of affine layers `M_1, ..., M_L` with a
//! ReLU after every layer except the last. Its size is the total number of
//! neurons over all layers, output layer included and input excluded.
//!
//! Layers are stored row-sparse: the combinators in this module produce
//! block-structured matrices whose dense form would be mostly zeros.

mod combinators;
mod pieces;
mod sawtooth;
mod spline;

pub use combinators::{add, add_bounded, compose, parallel, pass};
pub use pieces::{extract_pieces, extract_pieces_exact, PieceDecomposition};
pub use sawtooth::{sawtooth, triangle};
pub use spline::{breakpoints_per_block, spline_deep, spline_deep_shape, spline_shallow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    in_dim: usize,
    bias: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl AffineLayer {
    pub fn from_dense(matrix: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        if matrix.len() != bias.len() {
            return Err(Error::DimensionMismatch { expected: matrix.len(), got: bias.len() });
        }
        let in_dim = matrix.first().map_or(0, Vec::len);
        let mut builder = LayerBuilder::new(in_dim);
        for row in matrix {
            if row.len() != in_dim {
                return Err(Error::DimensionMismatch { expected: in_dim, got: row.len() });
            }
            builder.push_row(row.iter().copied().enumerate(), 0.0);
        }
        let mut layer = builder.finish();
        layer.bias = bias;
        Ok(layer)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Nonzero entries `(column, weight)` of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.vals[span].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.out_dim())
            .map(|r| {
                let mut dense = vec![0.0; self.in_dim];
                for (c, v) in self.row(r) {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }

    /// `M x`, without activation.
    pub fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.out_dim()).map(|r| {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            acc + self.bias[r]
        }));
    }
}

/// Incremental row-by-row construction of an [`AffineLayer`].
#[derive(Debug)]
pub(crate) struct LayerBuilder {
    layer: AffineLayer,
}

impl LayerBuilder {
    pub fn new(in_dim: usize) -> Self {
        Self {
            layer: AffineLayer { in_dim, bias: Vec::new(), row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() },
        }
    }

    /// Appends a row; exact zeros are dropped. Returns the row index.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, bias: f64) -> usize {
        let l = &mut self.layer;
        for (c, v) in entries {
            debug_assert!(c < l.in_dim);
            if v != 0.0 {
                l.cols.push(c as u32);
                l.vals.push(v);
            }
        }
        l.row_ptr.push(l.cols.len());
        l.bias.push(bias);
        l.bias.len() - 1
    }

    /// Appends all rows of `other`, reading its inputs at `col_offset`.
    pub fn push_block(&mut self, other: &AffineLayer, col_offset: usize) {
        for r in 0..other.out_dim() {
            self.push_row(other.row(r).map(|(c, v)| (c + col_offset, v)), other.bias[r]);
        }
    }

    pub fn len(&self) -> usize {
        self.layer.out_dim()
    }

    pub fn finish(self) -> AffineLayer {
        self.layer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluNet {
    layers: Vec<AffineLayer>,
}

impl ReluNet {
    pub fn new(layers: Vec<AffineLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyList);
        }
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::DimensionMismatch { expected: w[0].out_dim(), got: w[1].in_dim() });
            }
        }
        Ok(Self { layers })
    }

    /// `x -> a x + b` as a one-layer net.
    pub fn affine(a: f64, b: f64) -> Self {
        let mut builder = LayerBuilder::new(1);
        builder.push_row([(0, a)], b);
        Self { layers: vec![builder.finish()] }
    }

    pub fn identity() -> Self {
        Self::affine(1.0, 0.0)
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Total neuron count, output layer included.
    pub fn size(&self) -> usize {
        self.layers.iter().map(AffineLayer::out_dim).sum()
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), got: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates a scalar-input net.
    pub fn eval1(&self, x: f64) -> Vec<f64> {
        assert_eq!(self.in_dim(), 1, "eval1 needs a scalar-input net");
        self.eval_unchecked(&[x])
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn to_json(&self) -> String {
        let file = NetFile {
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile { matrix: l.to_dense(), bias: l.bias.clone() })
                .collect(),
        };
        serde_json::to_string(&file).expect("net serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetFile = serde_json::from_str(text)
            .map_err(|e| Error::parse(crate::histogram::json_location(&e), &e))?;
        if file.layers.is_empty() {
            return Err(Error::parse("layers", "at least one layer is required"));
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        for (i, lf) in file.layers.iter().enumerate() {
            let layer = AffineLayer::from_dense(&lf.matrix, lf.bias.clone()).map_err(|e| {
                Error::parse(format!("layers[{i}]"), e)
            })?;
            if layer.out_dim() == 0 {
                return Err(Error::parse(format!("layers[{i}].matrix"), "layer has no rows"));
            }
            if let Some(prev) = layers.last() {
                let prev: &AffineLayer = prev;
                if prev.out_dim() != layer.in_dim() {
                    return Err(Error::DimensionMismatch { expected: prev.out_dim(), got: layer.in_dim() });
                }
            }
            layers.push(layer);
        }
        Self::new(layers)
    }
}

#[derive(Serialize, Deserialize)]
struct NetFile {
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    matrix: Vec<Vec<f64>>,
    bias: Vec<f64>,
}
