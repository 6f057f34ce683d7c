//! Continuous piecewise-affine functions on `[0,1]`, inverse CDFs of 1-D
//! histograms and the exact 1-D Wasserstein distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{json_location, Histogram1D};

/// Knots closer than this are rejected as degenerate.
pub const MIN_KNOT_GAP: f64 = 1e-12;
/// Interior knots whose slope change is below this are merged by [`PiecewiseAffine::simplify`].
pub const COLLINEAR_TOL: f64 = 1e-12;

/// A continuous function on `[0,1]`, affine between consecutive knots.
///
/// Values rather than slopes are stored, so continuity holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffine {
    knots: Vec<f64>,
    values: Vec<f64>,
}

/// `f(x) = offset + slope * x + sum_j delta_j * relu(x - beta_j)` on `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluExpansion {
    pub offset: f64,
    pub slope: f64,
    /// `(beta_j, delta_j)` with `beta_j` strictly inside `(0,1)`, ascending.
    pub kinks: Vec<(f64, f64)>,
}

impl PiecewiseAffine {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 2 || knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::Domain("knots must start at 0 and end at 1".into()));
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[1] - w[0] >= MIN_KNOT_GAP)) {
            return Err(Error::Domain(format!("knots {} and {} are not strictly increasing", w[0], w[1])));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite value".into()));
        }
        Ok(Self { knots, values })
    }

    pub(crate) fn from_parts_unchecked(knots: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        Self { knots, values }
    }

    pub fn identity() -> Self {
        Self { knots: vec![0.0, 1.0], values: vec![0.0, 1.0] }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of interior knots as stored (collinear knots included).
    pub fn interior_knots(&self) -> usize {
        self.knots.len() - 2
    }

    /// Breakpoint count `m` after merging collinear knots.
    pub fn breakpoints(&self) -> usize {
        self.simplify().interior_knots()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("{x} is outside [0, 1]")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        // index of the first knot strictly greater than x
        let hi = self.knots.partition_point(|&k| k <= x);
        if hi == 0 {
            return self.values[0];
        }
        let lo = hi - 1;
        if hi == self.knots.len() || self.knots[lo] == x {
            return self.values[lo.min(self.knots.len() - 1)];
        }
        let (x0, x1) = (self.knots[lo], self.knots[hi]);
        let (y0, y1) = (self.values[lo], self.values[hi]);
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    /// Drops interior knots where the slope changes by less than [`COLLINEAR_TOL`].
    pub fn simplify(&self) -> Self {
        let slopes = self.slopes();
        let mut knots = vec![self.knots[0]];
        let mut values = vec![self.values[0]];
        let mut last_slope = slopes[0];
        for j in 1..self.knots.len() - 1 {
            let next = slopes[j];
            if (next - last_slope).abs() >= COLLINEAR_TOL {
                knots.push(self.knots[j]);
                values.push(self.values[j]);
                last_slope = next;
            }
        }
        knots.push(*self.knots.last().unwrap());
        values.push(*self.values.last().unwrap());
        Self { knots, values }
    }

    /// Slope-change expansion of the simplified function.
    pub fn relu_expansion(&self) -> ReluExpansion {
        let s = self.simplify();
        let slopes = s.slopes();
        let kinks = (1..s.knots.len() - 1)
            .map(|j| (s.knots[j], slopes[j] - slopes[j - 1]))
            .collect();
        ReluExpansion { offset: s.values[0], slope: slopes[0], kinks }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pwl serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            knots: Vec<f64>,
            values: Vec<f64>,
        }
        let f: File = serde_json::from_str(text).map_err(|e| Error::parse(json_location(&e), &e))?;
        Self::new(f.knots, f.values)
    }
}

impl ReluExpansion {
    pub fn eval(&self, x: f64) -> f64 {
        self.offset
            + self.slope * x
            + self.kinks.iter().map(|&(b, d)| d * (x - b).max(0.0)).sum::<f64>()
    }
}

/// Quantile function `F_P^{-1}` of a 1-D histogram; it pushes `U[0,1]` onto `P`.
pub fn inverse_cdf(p: &Histogram1D) -> PiecewiseAffine {
    let n = p.n() as f64;
    let knots = p.cumulative();
    let values = (0..=p.n()).map(|k| k as f64 / n).collect();
    PiecewiseAffine::from_parts_unchecked(knots, values)
}

/// Exact `int_0^1 |f - g|`.
pub fn l1_distance(f: &PiecewiseAffine, g: &PiecewiseAffine) -> f64 {
    let mut xs: Vec<f64> = f.knots.iter().chain(g.knots.iter()).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let diffs: Vec<f64> = xs.iter().map(|&x| f.eval_unchecked(x) - g.eval_unchecked(x)).collect();
    xs.windows(2)
        .zip(diffs.windows(2))
        .map(|(x, d)| segment_abs_integral(x[1] - x[0], d[0], d[1]))
        .sum()
}

/// `int |d|` over a segment of length `h` on which `d` is affine with end values `a`, `b`.
fn segment_abs_integral(h: f64, a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        h * (a + b).abs() / 2.0
    } else {
        h * (a * a + b * b) / (2.0 * (a.abs() + b.abs()))
    }
}

/// Wasserstein-1 distance between 1-D histograms via the quantile coupling.
pub fn wasserstein1d(p: &Histogram1D, q: &Histogram1D) -> f64 {
    l1_distance(&inverse_cdf(p), &inverse_cdf(q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(w: &[f64]) -> Histogram1D {
        Histogram1D::new(w.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(PiecewiseAffine::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(PiecewiseAffine::new(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewiseAffine::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err());
        assert!(PiecewiseAffine::new(vec![0.0, 0.5, 0.5 + 1e-13, 1.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn evaluation() {
        let id = PiecewiseAffine::identity();
        assert_eq!(id.eval(0.3).unwrap(), 0.3);
        let f = PiecewiseAffine::new(vec![0.0, 0.75, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert!((f.eval(0.9).unwrap() - 0.8).abs() < 1e-15);
        for (k, v) in f.knots().iter().zip(f.values()) {
            assert_eq!(f.eval(*k).unwrap(), *v);
        }
        assert!(matches!(f.eval(1.5), Err(Error::Domain(_))));
        assert!(f.eval(-1e-9).is_err());
    }

    #[test]
    fn inverse_cdf_examples() {
        assert_eq!(inverse_cdf(&h(&[1.0])), PiecewiseAffine::identity());
        let f = inverse_cdf(&h(&[1.5, 0.5]));
        assert_eq!(f.knots(), &[0.0, 0.75, 1.0]);
        assert_eq!(f.values(), &[0.0, 0.5, 1.0]);
        let u = inverse_cdf(&h(&[1.0; 4]));
        assert_eq!(u.knots(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(u.breakpoints(), 0);
        assert_eq!(u.simplify(), PiecewiseAffine::identity());
    }

    #[test]
    fn relu_expansion_matches() {
        let f = inverse_cdf(&h(&[1.5, 0.5, 1.0, 1.0]));
        let e = f.relu_expansion();
        assert_eq!(e.kinks.len(), 2);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((e.eval(x) - f.eval(x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn l1_examples() {
        let id = PiecewiseAffine::identity();
        let g = inverse_cdf(&h(&[1.5, 0.5]));
        assert_eq!(l1_distance(&id, &id), 0.0);
        assert!((l1_distance(&id, &g) - 0.125).abs() < 1e-15);
        assert_eq!(l1_distance(&id, &g), l1_distance(&g, &id));
        assert!((wasserstein1d(&h(&[1.0, 1.0]), &h(&[1.5, 0.5])) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn l1_crossing_segment() {
        // f = x, g = 1 - x: int |2x - 1| = 1/2
        let f = PiecewiseAffine::identity();
        let g = PiecewiseAffine::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!((l1_distance(&f, &g) - 0.5).abs() < 1e-15);
    }
}
