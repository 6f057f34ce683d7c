//! Exact piece decomposition of scalar-input networks by layer-wise
//! propagation of affine forms.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::ReluNet;
use crate::error::{Error, Result};
use crate::pwl::PiecewiseAffine;

/// Zero crossings closer than this to each other or to an interval end are merged.
pub const DEDUP_TOL: f64 = 1e-10;
/// Adjacent pieces whose slopes differ by less than this (relative to
/// `max(1, |slope|)`) in every coordinate are fused.
pub const FUSE_TOL: f64 = 1e-10;
/// Relative tolerance for treating adjacent image segments as collinear.
pub const LINE_TOL: f64 = 1e-9;

/// Breakpoints of a network's realized function on `[a,b]` together with
/// the affine form `slope * x + intercept` of every output coordinate on
/// each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceDecomposition {
    a: f64,
    b: f64,
    breakpoints: Vec<f64>,
    /// `pieces[j][c] = (slope, intercept)`
    pieces: Vec<Vec<(f64, f64)>>,
}

impl PieceDecomposition {
    /// Assembles a decomposition from its parts; `pieces` needs one entry more than `breakpoints`.
    pub fn from_parts(a: f64, b: f64, breakpoints: Vec<f64>, pieces: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} pieces for {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        if !(a < b) || breakpoints.iter().any(|&t| !(t > a && t < b)) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must increase strictly inside (a, b)".into()));
        }
        let dim = pieces[0].len();
        if let Some(p) = pieces.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        Ok(Self { a, b, breakpoints, pieces })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<(f64, f64)>] {
        &self.pieces
    }

    pub fn count(&self) -> usize {
        self.pieces.len()
    }

    pub fn out_dim(&self) -> usize {
        self.pieces[0].len()
    }

    /// Domain interval of piece `j`.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let lo = if j == 0 { self.a } else { self.breakpoints[j - 1] };
        let hi = if j == self.breakpoints.len() { self.b } else { self.breakpoints[j] };
        (lo, hi)
    }

    fn piece_at(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&t| t < x)
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.pieces[self.piece_at(x)].iter().map(|&(s, c)| s * x + c).collect()
    }

    /// Largest `|f_c|` over `[a,b]` per output coordinate.
    pub fn max_abs(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.out_dim()];
        for j in 0..self.count() {
            let (lo, hi) = self.interval(j);
            for (c, &(s, i)) in self.pieces[j].iter().enumerate() {
                out[c] = out[c].max((s * lo + i).abs()).max((s * hi + i).abs());
            }
        }
        out
    }

    /// Image length `sum_j |slope_j| (hi_j - lo_j)` of each piece, Euclidean in the output space.
    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.count())
            .map(|j| {
                let (lo, hi) = self.interval(j);
                speed(&self.pieces[j]) * (hi - lo)
            })
            .collect()
    }

    /// Coordinate `coord` as a [`PiecewiseAffine`]; requires `[a,b] = [0,1]`.
    pub fn to_pwl(&self, coord: usize) -> Result<PiecewiseAffine> {
        if self.a != 0.0 || self.b != 1.0 {
            return Err(Error::Domain("piecewise-affine functions live on [0, 1]".into()));
        }
        let mut knots = vec![0.0];
        knots.extend_from_slice(&self.breakpoints);
        knots.push(1.0);
        let values = knots
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let (s, i) = self.pieces[k.min(self.count() - 1)][coord];
                s * x + i
            })
            .collect();
        PiecewiseAffine::new(knots, values)
    }

    /// Number of image segments after merging adjacent collinear ones.
    ///
    /// Constant pieces collapse to a point and never open a new line.
    pub fn image_lines(&self) -> usize {
        let mut lines = 0;
        let mut current: Option<Vec<f64>> = None;
        for piece in &self.pieces {
            let dir: Vec<f64> = piece.iter().map(|p| p.0).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let same = current.as_ref().is_some_and(|d| parallel(d, &dir));
            if !same {
                lines += 1;
                current = Some(dir);
            }
        }
        lines.max(1)
    }
}

fn speed(piece: &[(f64, f64)]) -> f64 {
    piece.iter().map(|p| p.0 * p.0).sum::<f64>().sqrt()
}

fn parallel(u: &[f64], v: &[f64]) -> bool {
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let uv: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
    // squared sine of the angle between u and v
    let sin2 = ((uu * vv - uv * uv) / (uu * vv)).max(0.0);
    sin2.sqrt() <= LINE_TOL
}

/// Floating-point extraction on `[a,b]`.
pub fn extract_pieces(net: &ReluNet, a: f64, b: f64) -> Result<PieceDecomposition> {
    check(net, a, b)?;
    let raw = propagate(net, a, b, DEDUP_TOL);
    let fused = fuse(raw, |p, q| {
        p.iter()
            .zip(q)
            .all(|(x, y)| (x.0 - y.0).abs() <= FUSE_TOL * 1f64.max(x.0.abs()).max(y.0.abs()))
    });
    Ok(PieceDecomposition { a, b, breakpoints: fused.breakpoints, pieces: fused.pieces })
}

/// Extraction in exact rational arithmetic, starting from the (exactly
/// representable) stored weights. Slow; intended for small nets.
pub fn extract_pieces_exact(net: &ReluNet, a: f64, b: f64) -> Result<PieceDecomposition> {
    check(net, a, b)?;
    let raw = propagate(net, Exact::from_f64(a), Exact::from_f64(b), Exact::zero());
    let fused = fuse(raw, |p, q| p.iter().zip(q).all(|(x, y)| x.0 == y.0));
    Ok(PieceDecomposition {
        a,
        b,
        breakpoints: fused.breakpoints.iter().map(Exact::to_f64).collect(),
        pieces: fused
            .pieces
            .iter()
            .map(|p| p.iter().map(|(s, i)| (s.to_f64(), i.to_f64())).collect())
            .collect(),
    })
}

fn check(net: &ReluNet, a: f64, b: f64) -> Result<()> {
    if net.in_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: net.in_dim() });
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("[{a}, {b}] is not a proper interval")));
    }
    Ok(())
}

trait Scalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, PartialOrd)]
struct Exact(BigRational);

impl Add for Exact {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Exact(self.0 + o.0)
    }
}
impl Sub for Exact {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Exact(self.0 - o.0)
    }
}
impl Mul for Exact {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Exact(self.0 * o.0)
    }
}
impl Div for Exact {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Exact(self.0 / o.0)
    }
}
impl Neg for Exact {
    type Output = Self;
    fn neg(self) -> Self {
        Exact(-self.0)
    }
}

impl Scalar for Exact {
    fn from_f64(v: f64) -> Self {
        Exact(BigRational::from_float(v).expect("finite weight"))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // numerator and denominator may each overflow f64
            let shift = self.0.numer().bits().max(self.0.denom().bits()).saturating_sub(1000);
            let scale = BigInt::from(1) << shift;
            let n = (self.0.numer() / &scale).to_f64().unwrap();
            let d = (self.0.denom() / &scale).to_f64().unwrap();
            if d == 0.0 {
                if n.is_sign_negative() { f64::NEG_INFINITY } else { f64::INFINITY }
            } else {
                n / d
            }
        })
    }
    fn zero() -> Self {
        Exact(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

struct RawPieces<T> {
    breakpoints: Vec<T>,
    pieces: Vec<Vec<(T, T)>>,
}

struct Interval<T> {
    lo: T,
    hi: T,
    forms: Vec<(T, T)>,
}

fn propagate<T: Scalar>(net: &ReluNet, a: T, b: T, tol: T) -> RawPieces<T> {
    let two = T::from_f64(2.0);
    let mut intervals = vec![Interval { lo: a, hi: b, forms: vec![(T::from_f64(1.0), T::zero())] }];
    let last = net.depth() - 1;
    for (li, layer) in net.layers().iter().enumerate() {
        let weights: Vec<Vec<(usize, T)>> =
            (0..layer.out_dim()).map(|r| layer.row(r).map(|(c, v)| (c, T::from_f64(v))).collect()).collect();
        let biases: Vec<T> = layer.bias().iter().map(|&v| T::from_f64(v)).collect();
        let mut next = Vec::with_capacity(intervals.len());
        for iv in intervals {
            let pre: Vec<(T, T)> = weights
                .iter()
                .zip(&biases)
                .map(|(row, bias)| {
                    let mut s = T::zero();
                    let mut c = bias.clone();
                    for (col, w) in row {
                        let (fs, fc) = &iv.forms[*col];
                        if !fs.is_zero() {
                            s = s + w.clone() * fs.clone();
                        }
                        if !fc.is_zero() {
                            c = c + w.clone() * fc.clone();
                        }
                    }
                    (s, c)
                })
                .collect();
            if li == last {
                next.push(Interval { lo: iv.lo, hi: iv.hi, forms: pre });
                continue;
            }
            let lo_bound = iv.lo.clone() + tol.clone();
            let hi_bound = iv.hi.clone() - tol.clone();
            let mut roots: Vec<T> = pre
                .iter()
                .filter(|(s, _)| !s.is_zero())
                .map(|(s, c)| -c.clone() / s.clone())
                .filter(|x| *x > lo_bound && *x < hi_bound)
                .collect();
            roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut cuts: Vec<T> = Vec::with_capacity(roots.len());
            for r in roots {
                if cuts.last().is_none_or(|l: &T| r.clone() - l.clone() > tol) {
                    cuts.push(r);
                }
            }
            let mut lo = iv.lo;
            for hi in cuts.into_iter().chain(std::iter::once(iv.hi)) {
                let mid = (lo.clone() + hi.clone()) / two.clone();
                let forms = pre
                    .iter()
                    .map(|(s, c)| {
                        if s.clone() * mid.clone() + c.clone() > T::zero() {
                            (s.clone(), c.clone())
                        } else {
                            (T::zero(), T::zero())
                        }
                    })
                    .collect();
                next.push(Interval { lo: lo.clone(), hi: hi.clone(), forms });
                lo = hi;
            }
        }
        intervals = next;
    }
    let breakpoints = intervals[1..].iter().map(|iv| iv.lo.clone()).collect();
    let pieces = intervals.into_iter().map(|iv| iv.forms).collect();
    RawPieces { breakpoints, pieces }
}

fn fuse<T: Clone>(raw: RawPieces<T>, same: impl Fn(&[(T, T)], &[(T, T)]) -> bool) -> RawPieces<T> {
    let mut breakpoints = Vec::new();
    let mut pieces: Vec<Vec<(T, T)>> = Vec::new();
    for (j, piece) in raw.pieces.into_iter().enumerate() {
        match pieces.last() {
            Some(prev) if same(prev, &piece) => {}
            Some(_) => {
                breakpoints.push(raw.breakpoints[j - 1].clone());
                pieces.push(piece);
            }
            None => pieces.push(piece),
        }
    }
    RawPieces { breakpoints, pieces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relunet::{add, compose, parallel, sawtooth, spline_deep, triangle};

    #[test]
    fn sawtooth_pieces() {
        let p = extract_pieces(&sawtooth(2), 0.0, 1.0).unwrap();
        assert_eq!(p.count(), 4);
        assert_eq!(p.breakpoints(), &[0.25, 0.5, 0.75]);
        for s in 1..=8 {
            let p = extract_pieces(&sawtooth(s), 0.0, 1.0).unwrap();
            assert_eq!(p.count(), 1 << s);
            for piece in p.pieces() {
                assert_eq!(piece[0].0.abs(), (1u64 << s) as f64);
            }
        }
        let wide = extract_pieces(&triangle(), -1.0, 2.0).unwrap();
        assert_eq!(wide.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(wide.pieces()[0][0], (0.0, 0.0));
    }

    #[test]
    fn affine_net_has_one_piece() {
        let p = extract_pieces(&ReluNet::affine(3.0, -1.0), 0.0, 1.0).unwrap();
        assert_eq!(p.count(), 1);
        assert_eq!(p.pieces()[0][0], (3.0, -1.0));
        assert_eq!(p.image_lines(), 1);
    }

    #[test]
    fn exact_matches_float() {
        let nets = [sawtooth(4), add(&[triangle(), sawtooth(3)]).unwrap(), compose(&sawtooth(2), &triangle(), 0.5, 0.25).unwrap()];
        for net in &nets {
            let f = extract_pieces(net, 0.0, 1.0).unwrap();
            let e = extract_pieces_exact(net, 0.0, 1.0).unwrap();
            assert_eq!(f.count(), e.count());
            for (x, y) in f.breakpoints().iter().zip(e.breakpoints()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pieces_reproduce_spline_knots() {
        let knots = vec![0.0, 0.1, 0.35, 0.4, 0.8, 1.0];
        let f = PiecewiseAffine::new(knots.clone(), vec![0.0, 0.3, 0.35, 0.6, 0.7, 1.0]).unwrap();
        let p = extract_pieces(&spline_deep(&f, 8).unwrap(), 0.0, 1.0).unwrap();
        assert_eq!(p.breakpoints().len(), 4);
        for (x, y) in p.breakpoints().iter().zip(&knots[1..5]) {
            assert!((x - y).abs() < 1e-9);
        }
        let back = p.to_pwl(0).unwrap();
        assert!(crate::pwl::l1_distance(&back, &f) < 1e-12);
    }

    #[test]
    fn image_lines_merge_collinear() {
        // (x, 2x) folded: direction flips but stays on one line
        let net = parallel(&triangle(), &compose(&ReluNet::affine(2.0, 0.0), &triangle(), 1.0, 0.0).unwrap()).unwrap();
        let p = extract_pieces(&net, 0.0, 1.0).unwrap();
        assert_eq!(p.count(), 2);
        assert_eq!(p.image_lines(), 1);
        let curve = parallel(&ReluNet::identity(), &triangle()).unwrap();
        let p = extract_pieces(&curve, 0.0, 1.0).unwrap();
        assert_eq!(p.image_lines(), 2);
        let len: f64 = p.segment_lengths().iter().sum();
        assert!((len - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(extract_pieces(&triangle(), 1.0, 0.0), Err(Error::Domain(_))));
        let two_in = ReluNet::new(vec![super::super::AffineLayer::from_dense(&[vec![1.0, 1.0]], vec![0.0]).unwrap()]).unwrap();
        assert!(extract_pieces(&two_in, 0.0, 1.0).is_err());
    }
}
