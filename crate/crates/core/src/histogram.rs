//! `n`-tiled histogram densities on `[0,1]` and `[0,1]^2`.
//!
//! A 2-D histogram assigns a constant density `w[k1][k2] > 0` to each tile
//! `[k1/n, (k1+1)/n] x [k2/n, (k2+1)/n]`, with the weights summing to `n^2`.
//! The 1-D variant has `n` weights summing to `n`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Post-normalization tolerance on the weight sum.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Relative deviation of the raw weight sum that is silently renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    n: usize,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    n: usize,
    /// Row-major, `weights[k1 * n + k2]`.
    weights: Vec<f64>,
}

fn normalize(weights: &mut [f64], expected: f64) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    let dev = (sum - expected).abs();
    if dev > RENORMALIZE_TOL * expected {
        return Err(Error::BadNormalization { sum, expected });
    }
    if dev > 0.0 {
        let scale = expected / sum;
        weights.iter_mut().for_each(|w| *w *= scale);
    }
    Ok(())
}

impl Histogram1D {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("histogram needs at least one tile".into()));
        }
        let mut weights = weights;
        for (k, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { index: (k, 0), value: w });
            }
        }
        normalize(&mut weights, n as f64)?;
        Ok(Self { n, weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { n, weights: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability mass of tile `k`.
    pub fn mass(&self, k: usize) -> f64 {
        self.weights[k] / self.n as f64
    }

    /// CDF values at the tile boundaries `0, 1/n, ..., 1`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for k in 0..self.n {
            acc += self.mass(k);
            out.push(acc);
        }
        // pin the endpoint; the partial sums drift by a few ulp
        *out.last_mut().unwrap() = 1.0;
        out
    }

    pub fn to_json(&self) -> String {
        let file = Hist1DFile { n: self.n, weights: self.weights.clone() };
        serde_json::to_string(&file).expect("histogram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Hist1DFile =
            serde_json::from_str(text).map_err(|e| Error::parse(json_location(&e), &e))?;
        if file.weights.len() != file.n {
            return Err(Error::ShapeMismatch(format!(
                "n = {} but {} weights given",
                file.n,
                file.weights.len()
            )));
        }
        Self::new(file.weights)
    }
}

impl Histogram2D {
    /// Validates an `n x n` weight matrix. Entry `(k1, k2)` is the density on
    /// the tile whose first coordinate lies in `[k1/n, (k1+1)/n]`.
    pub fn new(n: usize, weights: &[Vec<f64>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("n must be at least 1".into()));
        }
        if weights.len() != n {
            return Err(Error::ShapeMismatch(format!("expected {n} rows, got {}", weights.len())));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &w) in row.iter().enumerate() {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::NonPositiveWeight { index: (i, j), value: w });
                }
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    pub fn from_flat(n: usize, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} weights, got {}",
                n * n,
                weights.len()
            )));
        }
        if let Some((k, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::NonPositiveWeight { index: (k / n, k % n), value: w });
        }
        normalize(&mut weights, (n * n) as f64)?;
        Ok(Self { n, weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { n, weights: vec![1.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, k1: usize, k2: usize) -> f64 {
        self.weights[k1 * self.n + k2]
    }

    pub fn row(&self, k1: usize) -> &[f64] {
        &self.weights[k1 * self.n..(k1 + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Probability mass of tile `(k1, k2)`.
    pub fn mass(&self, k1: usize, k2: usize) -> f64 {
        self.weight(k1, k2) / (self.n * self.n) as f64
    }

    /// Marginal density of the first coordinate.
    pub fn marginal_first(&self) -> Histogram1D {
        let n = self.n as f64;
        let weights = (0..self.n).map(|i| self.row(i).iter().sum::<f64>() / n).collect();
        Histogram1D::new(weights).expect("marginal of a valid histogram is valid")
    }

    /// Density of the second coordinate given that the first lies in tile `i`.
    pub fn conditional_second(&self, i: usize) -> Result<Histogram1D> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        let row = self.row(i);
        let total: f64 = row.iter().sum();
        let n = self.n as f64;
        Histogram1D::new(row.iter().map(|w| n * w / total).collect())
    }

    /// Draws `count` i.i.d. points; pure in `(self, count, seed)`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tiles = WeightedIndex::new(&self.weights).expect("weights are positive");
        let n = self.n as f64;
        (0..count)
            .map(|_| {
                let k = tiles.sample(&mut rng);
                let (k1, k2) = (k / self.n, k % self.n);
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                [(k1 as f64 + u) / n, (k2 as f64 + v) / n]
            })
            .collect()
    }

    /// Log-normal weights `exp(spread * z)` rescaled to sum to `n^2`.
    /// `spread = 0` gives the uniform histogram.
    pub fn random(n: usize, seed: u64, spread: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("n must be at least 1".into()));
        }
        if !(spread >= 0.0) || !spread.is_finite() {
            return Err(Error::Domain(format!("spread must be a nonnegative number, got {spread}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n * n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (spread * z).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let scale = (n * n) as f64 / total;
        Self::from_flat(n, raw.into_iter().map(|w| w * scale).collect())
    }

    pub fn to_json(&self) -> String {
        let file = Hist2DFile { n: self.n, weights: self.rows() };
        serde_json::to_string(&file).expect("histogram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Hist2DFile =
            serde_json::from_str(text).map_err(|e| Error::parse(json_location(&e), &e))?;
        Self::new(file.n, &file.weights)
    }
}

#[derive(Serialize, Deserialize)]
struct Hist1DFile {
    n: usize,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Hist2DFile {
    n: usize,
    weights: Vec<Vec<f64>>,
}

pub(crate) fn json_location(e: &serde_json::Error) -> String {
    format!("line {} column {}", e.line(), e.column())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Histogram2D {
        Histogram2D::new(2, &[vec![2.0, 1.0], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Histogram2D::new(1, &[vec![1.0]]).is_ok());
        assert!(matches!(
            Histogram2D::new(2, &[vec![2.0, 1.0], vec![0.5, 0.4]]),
            Err(Error::BadNormalization { .. })
        ));
        assert!(matches!(
            Histogram2D::new(2, &[vec![3.0, 1.0], vec![0.0, 0.0]]),
            Err(Error::NonPositiveWeight { index: (1, 0), .. })
        ));
        assert!(matches!(
            Histogram2D::new(2, &[vec![2.0, 1.0, 1.0], vec![0.5, 0.5]]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(Histogram1D::new(vec![1.5, -0.5]), Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn small_roundoff_is_renormalized() {
        let h = Histogram2D::new(2, &[vec![2.0000001, 1.0], vec![0.5, 0.5]]).unwrap();
        let sum: f64 = h.rows().iter().flatten().sum();
        assert!((sum - 4.0).abs() < NORMALIZATION_TOL);
    }

    #[test]
    fn marginal_and_conditional() {
        let h = example();
        assert_eq!(h.marginal_first().weights(), &[1.5, 0.5]);
        let c0 = h.conditional_second(0).unwrap();
        assert!((c0.weights()[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((c0.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h.conditional_second(1).unwrap().weights(), &[1.0, 1.0]);
        assert!(matches!(h.conditional_second(2), Err(Error::IndexOutOfRange { .. })));

        let u = Histogram2D::uniform(4);
        assert_eq!(u.marginal_first().weights(), &[1.0; 4]);
        assert_eq!(Histogram2D::uniform(3).conditional_second(2).unwrap().weights(), &[1.0; 3]);
        assert_eq!(Histogram2D::uniform(1).marginal_first().weights(), &[1.0]);
    }

    #[test]
    fn chain_rule_reconstruction() {
        for seed in 0..20 {
            let h = Histogram2D::random(1 + seed as usize % 7, seed, 0.8).unwrap();
            let marg = h.marginal_first();
            for i in 0..h.n() {
                let cond = h.conditional_second(i).unwrap();
                for k in 0..h.n() {
                    let rebuilt = cond.weights()[k] * marg.weights()[i];
                    assert!((rebuilt - h.weight(i, k)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_supported() {
        let h = Histogram2D::uniform(1);
        let pts = h.sample(4, 7);
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| p.iter().all(|c| (0.0..=1.0).contains(c))));
        assert_eq!(example().sample(100, 3), example().sample(100, 3));
    }

    #[test]
    fn sampled_tile_frequencies() {
        let delta = 0.01;
        let h = Histogram2D::new(2, &[vec![4.0 - 3.0 * delta, delta], vec![delta, delta]]).unwrap();
        let count = 100_000;
        let pts = h.sample(count, 11);
        let mut hits = [[0usize; 2]; 2];
        for p in &pts {
            hits[(p[0] * 2.0) as usize][(p[1] * 2.0) as usize] += 1;
        }
        for k1 in 0..2 {
            for k2 in 0..2 {
                let p = h.mass(k1, k2);
                let sigma = (count as f64 * p * (1.0 - p)).sqrt();
                let dev = (hits[k1][k2] as f64 - count as f64 * p).abs();
                assert!(dev <= 4.0 * sigma, "tile ({k1},{k2}): dev {dev} sigma {sigma}");
            }
        }
    }

    #[test]
    fn random_histograms() {
        let a = Histogram2D::random(5, 9, 0.5).unwrap();
        assert_eq!(a, Histogram2D::random(5, 9, 0.5).unwrap());
        assert!(Histogram2D::new(5, &a.rows()).is_ok());
        let flat = Histogram2D::random(5, 9, 0.0).unwrap();
        assert_eq!(flat, Histogram2D::uniform(5));
        let tight = Histogram2D::random(5, 9, 1e-9).unwrap();
        assert!(tight.rows().iter().flatten().all(|w| (w - 1.0).abs() < 1e-7));
    }

    #[test]
    fn json_round_trip() {
        let h = Histogram2D::random(3, 1, 1.0).unwrap();
        assert_eq!(Histogram2D::from_json(&h.to_json()).unwrap(), h);
        let one = Histogram1D::new(vec![1.5, 0.5]).unwrap();
        assert_eq!(Histogram1D::from_json(&one.to_json()).unwrap(), one);
        let err = Histogram2D::from_json("{\"n\": 2, \"weights\": [[1, 1], [1,").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(Histogram2D::from_json(r#"{"n": 2, "weights": [[2,1],[0.5,0.4]]}"#).is_err());
    }
}
