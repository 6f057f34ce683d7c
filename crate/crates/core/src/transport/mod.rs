//! Wasserstein-1 distance between a histogram and a network pushforward of
//! `U[0,1]`, bracketed by certified discretization slack.
//!
//! Both measures are replaced by finite ones: the histogram by cell-center
//! atoms of a refined grid, the pushforward by the images of midpoints. The
//! discrete problem is solved exactly (or entropically above the size cap),
//! and the triangle inequality turns the discretization errors into slack.

mod simplex;
mod sinkhorn;

pub use sinkhorn::{sinkhorn, SinkhornResult, MAX_VIOLATION, SINKHORN_MAX_ENTRIES};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::Histogram2D;
use crate::relunet::{extract_pieces, PieceDecomposition, ReluNet};

/// Largest support size accepted by [`exact_ot`].
pub const EXACT_MAX_ATOMS: usize = 5000;
/// Mass sums of the two measures may differ by at most this.
pub const MASS_TOL: f64 = 1e-7;
/// Tolerance of the optimality certificate.
pub const CERTIFICATE_TOL: f64 = 1e-7;
/// Mean distance from the center of the unit square to a uniform point in it.
pub const SQUARE_MEAN_DISTANCE: f64 = 0.382_597_858_232_106_2;
/// Regularization used when the exact solver is out of range.
pub const SINKHORN_REG: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: &[Vec<f64>], masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::ShapeMismatch(format!("{} points but {} masses", points.len(), masses.len())));
        }
        if points.is_empty() {
            return Err(Error::EmptyList);
        }
        let dim = points[0].len();
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::NonPositiveWeight { index: (i, 0), value: masses[i] });
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadNormalization { sum, expected: 1.0 });
        }
        Ok(Self { dim, coords, masses })
    }

    /// Builds a measure whose masses may sum to anything; [`exact_ot`] checks balance.
    pub fn unnormalized(points: &[Vec<f64>], masses: Vec<f64>) -> Result<Self> {
        let sum: f64 = masses.iter().sum();
        let scaled: Vec<f64> = masses.iter().map(|m| m / sum).collect();
        let mut m = Self::new(points, scaled)?;
        m.masses = masses;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub(crate) fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    Ok(())
}

/// An optimal coupling, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// `(i, j, mass)` for every positive entry, ordered by `(i, j)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Value of the dual objective at the certifying potentials.
    pub dual: f64,
    pub pivots: usize,
}

impl TransportPlan {
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
        }
        m
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for &(i, _, v) in &self.entries {
            s[i] += v;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, j, v) in &self.entries {
            s[j] += v;
        }
        s
    }
}

/// Exact optimal transport for the Euclidean ground cost.
///
/// `nu` is rescaled to the mass of `mu` before solving. Optimality is
/// certified by dual feasibility and a vanishing duality gap, both at
/// [`CERTIFICATE_TOL`].
pub fn exact_ot(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<TransportPlan> {
    check_pair(mu, nu)?;
    for m in [mu, nu] {
        if m.len() > EXACT_MAX_ATOMS {
            return Err(Error::TooLarge(m.len(), EXACT_MAX_ATOMS));
        }
    }
    let (sa, sb) = (mu.total_mass(), nu.total_mass());
    if (sa - sb).abs() > MASS_TOL {
        return Err(Error::InfeasibleMass(sa, sb));
    }
    let b: Vec<f64> = nu.masses().iter().map(|v| v * sa / sb).collect();
    let cost = |i: usize, j: usize| dist(mu.point(i), nu.point(j));
    let sol = simplex::solve(mu.masses(), &b, &cost);
    let gap = (sol.cost - sol.dual).abs();
    if sol.min_reduced_cost < -CERTIFICATE_TOL || gap > CERTIFICATE_TOL * sol.cost.max(1.0) {
        return Err(Error::Internal(format!(
            "optimality certificate failed: reduced cost {:e}, duality gap {:e}",
            sol.min_reduced_cost, gap
        )));
    }
    Ok(TransportPlan {
        rows: mu.len(),
        cols: nu.len(),
        entries: sol.flows,
        cost: sol.cost,
        dual: sol.dual,
        pivots: sol.pivots,
    })
}

/// Cell-center atoms of the grid refining every tile `r x r` times.
///
/// Atoms are ordered by first coordinate, then second.
pub fn discretize_histogram(p: &Histogram2D, r: usize) -> Result<DiscreteMeasure> {
    if r == 0 {
        return Err(Error::Domain("refinement must be positive".into()));
    }
    let k = p.n() * r;
    let h = 1.0 / k as f64;
    let cell = 1.0 / (k * k) as f64;
    let mut coords = Vec::with_capacity(2 * k * k);
    let mut masses = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            coords.push((a as f64 + 0.5) * h);
            coords.push((b as f64 + 0.5) * h);
            masses.push(p.weight(a / r, b / r) * cell);
        }
    }
    Ok(DiscreteMeasure { dim: 2, coords, masses })
}

/// `W(P, discretize_histogram(P, r))` is at most this.
pub fn histogram_slack(n: usize, r: usize) -> f64 {
    SQUARE_MEAN_DISTANCE / (n * r) as f64
}

/// Images of the midpoints `(j - 1/2)/m`, mass `1/m` each.
pub fn discretize_pushforward(net: &ReluNet, m: usize) -> Result<DiscreteMeasure> {
    if net.in_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: net.in_dim() });
    }
    if net.out_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: net.out_dim() });
    }
    if m == 0 {
        return Err(Error::Domain("atom count must be positive".into()));
    }
    let mut coords = Vec::with_capacity(2 * m);
    for j in 0..m {
        coords.extend(net.eval1(midpoint(j, m)));
    }
    Ok(DiscreteMeasure { dim: 2, coords, masses: vec![1.0 / m as f64; m] })
}

fn midpoint(j: usize, m: usize) -> f64 {
    (j as f64 + 0.5) / m as f64
}

/// Upper bound on `W(phi#U, discretize_pushforward(phi, m))`.
///
/// Couples each cell `[(j-1)/m, j/m]` with its midpoint image and returns
/// the exact cost `sum_j int_cell |phi(x) - phi(x_j)| dx` of that coupling,
/// integrated in closed form on every affine piece.
pub fn curve_slack(pieces: &PieceDecomposition, m: usize) -> f64 {
    let bps = pieces.breakpoints();
    let mut total = 0.0;
    let mut k = 0;
    for j in 0..m {
        let lo = j as f64 / m as f64;
        let hi = (j + 1) as f64 / m as f64;
        let center = pieces.eval(midpoint(j, m));
        while k < bps.len() && bps[k] <= lo {
            k += 1;
        }
        let mut xs = vec![lo];
        let mut t = k;
        while t < bps.len() && bps[t] < hi {
            xs.push(bps[t]);
            t += 1;
        }
        xs.push(hi);
        for w in xs.windows(2) {
            let piece = &pieces.pieces()[piece_index(bps, 0.5 * (w[0] + w[1]))];
            let start: Vec<f64> = piece.iter().zip(&center).map(|(&(a, b), c)| a * w[0] + b - c).collect();
            let dir: Vec<f64> = piece.iter().map(|p| p.0).collect();
            total += distance_integral(&start, &dir, w[1] - w[0]);
        }
    }
    total
}

fn piece_index(bps: &[f64], x: f64) -> usize {
    bps.partition_point(|&b| b <= x)
}

/// `int_0^h |p + v t| dt`.
fn distance_integral(p: &[f64], v: &[f64], h: f64) -> f64 {
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let pp: f64 = p.iter().map(|x| x * x).sum();
    if vv == 0.0 {
        return h * pp.sqrt();
    }
    let speed = vv.sqrt();
    // |p + v t| = speed * sqrt((t + b)^2 + c2)
    let b = p.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / vv;
    let c2 = (pp / vv - b * b).max(0.0);
    let antiderivative = |u: f64| {
        let r = (u * u + c2).sqrt();
        if c2 == 0.0 {
            0.5 * u * r
        } else {
            0.5 * (u * r + c2 * (u / c2.sqrt()).asinh())
        }
    };
    let exact = speed * (antiderivative(h + b) - antiderivative(b));
    // on a convex integrand the trapezoid value is an upper bound; keep the
    // smaller of the two so cancellation in the closed form cannot inflate it
    let end: f64 = p.iter().zip(v).map(|(x, y)| (x + y * h) * (x + y * h)).sum::<f64>().sqrt();
    exact.min(0.5 * h * (pp.sqrt() + end)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sinkhorn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub slack: f64,
    pub lower: f64,
    pub upper: f64,
    pub r: usize,
    pub m: usize,
    pub method: Method,
}

impl Estimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}

/// Brackets `W(P, net#U)` as `estimate +- slack`.
pub fn estimate_w(p: &Histogram2D, net: &ReluNet, r: usize, m: usize) -> Result<Estimate> {
    let pieces = extract_pieces(net, 0.0, 1.0)?;
    estimate_w_with_pieces(p, net, &pieces, r, m)
}

/// [`estimate_w`] with a precomputed piece decomposition of `net` on `[0,1]`.
pub fn estimate_w_with_pieces(
    p: &Histogram2D,
    net: &ReluNet,
    pieces: &PieceDecomposition,
    r: usize,
    m: usize,
) -> Result<Estimate> {
    let mu = discretize_histogram(p, r)?;
    let nu = discretize_pushforward(net, m)?;
    // pieces and net disagree only by rounding; account for it anyway
    let mut drift = 0.0f64;
    for j in 0..m {
        drift = drift.max(dist(nu.point(j), &pieces.eval(midpoint(j, m))));
    }
    let mut slack = histogram_slack(p.n(), r) + curve_slack(pieces, m) + drift;
    let (estimate, method) = if mu.len() <= EXACT_MAX_ATOMS && nu.len() <= EXACT_MAX_ATOMS {
        (exact_ot(&mu, &nu)?.cost, Method::Exact)
    } else {
        let res = sinkhorn(&mu, &nu, SINKHORN_REG, 10_000)?;
        slack += res.reg * (mu.len().min(nu.len()) as f64).ln() + res.violation * diameter(&mu, &nu);
        (res.cost, Method::Sinkhorn)
    };
    Ok(Estimate { estimate, slack, lower: estimate - slack, upper: estimate + slack, r, m, method })
}

fn diameter(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut lo = vec![f64::INFINITY; mu.dim()];
    let mut hi = vec![f64::NEG_INFINITY; mu.dim()];
    for meas in [mu, nu] {
        for i in 0..meas.len() {
            for (d, &v) in meas.point(i).iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
    }
    dist(&lo, &hi)
}

/// Resolution `(r, m)` with total slack at most `target` and both supports
/// within [`EXACT_MAX_ATOMS`], minimizing `(n r)^2 * m`. `None` if no such
/// pair exists.
pub fn choose_resolution(n: usize, pieces: &PieceDecomposition, target: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let mut r = 1;
    while (n * r) * (n * r) <= EXACT_MAX_ATOMS {
        let budget = target - histogram_slack(n, r);
        if budget > 0.0 && curve_slack(pieces, EXACT_MAX_ATOMS) <= budget {
            // smallest m meeting the budget, assuming the slack decreases in m
            let (mut lo, mut hi) = (1, EXACT_MAX_ATOMS);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if curve_slack(pieces, mid) <= budget {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let mut m = lo;
            while curve_slack(pieces, m) > budget {
                m += 1;
            }
            let work = (n * r) * (n * r) * m;
            if best.is_none_or(|b| work < b.2) {
                best = Some((r, m, work));
            }
        }
        r += 1;
    }
    best.map(|b| (b.0, b.1))
}

/// Finest resolution within the exact-solver cap.
pub fn finest_resolution(n: usize) -> (usize, usize) {
    let mut r = 1;
    while (n * (r + 1)) * (n * (r + 1)) <= EXACT_MAX_ATOMS {
        r += 1;
    }
    (r, EXACT_MAX_ATOMS)
}
