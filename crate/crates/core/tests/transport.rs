use histopush::pushforward::build_phi_with_s;
use histopush::relunet::{extract_pieces, parallel, sawtooth};
use histopush::transport::{
    curve_slack, discretize_histogram, discretize_pushforward, estimate_w, exact_ot, histogram_slack, sinkhorn,
    DiscreteMeasure, SQUARE_MEAN_DISTANCE,
};
use histopush::{pwl, Error, Histogram1D, Histogram2D, ReluNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_measure(rng: &mut ChaCha8Rng, k: usize, dim: usize) -> DiscreteMeasure {
    let pts: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    DiscreteMeasure::new(&pts, w.iter().map(|v| v / s).collect()).unwrap()
}

/// Brute force over all permutations for uniform measures of equal size.
fn assignment_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    fn rec(i: usize, used: &mut Vec<bool>, mu: &DiscreteMeasure, nu: &DiscreteMeasure, acc: f64, best: &mut f64) {
        if i == mu.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..nu.len() {
            if !used[j] {
                used[j] = true;
                let d: f64 = mu.point(i).iter().zip(nu.point(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                rec(i + 1, used, mu, nu, acc + d / mu.len() as f64, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, &mut vec![false; nu.len()], mu, nu, 0.0, &mut best);
    best
}

#[test]
fn identical_measures_cost_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mu = random_measure(&mut rng, 40, 2);
    assert!(exact_ot(&mu, &mu).unwrap().cost.abs() < 1e-12);
}

#[test]
fn crossing_pair_uses_the_monotone_matching() {
    let mu = DiscreteMeasure::new(&[vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
    let nu = DiscreteMeasure::new(&[vec![1.0, 0.1], vec![0.0, 0.1]], vec![0.5, 0.5]).unwrap();
    let plan = exact_ot(&mu, &nu).unwrap();
    assert!((plan.cost - 0.1).abs() < 1e-12);
}

#[test]
fn matches_brute_force_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let k = 6;
        let pts = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> { (0..k).map(|_| vec![rng.random(), rng.random()]).collect() };
        let mu = DiscreteMeasure::new(&pts(&mut rng), vec![1.0 / k as f64; k]).unwrap();
        let nu = DiscreteMeasure::new(&pts(&mut rng), vec![1.0 / k as f64; k]).unwrap();
        let plan = exact_ot(&mu, &nu).unwrap();
        assert!((plan.cost - assignment_cost(&mu, &nu)).abs() < 1e-12);
    }
}

#[test]
fn plan_marginals_and_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (k1, k2) in [(1, 1), (1, 7), (30, 50), (200, 150)] {
        let mu = random_measure(&mut rng, k1, 2);
        let nu = random_measure(&mut rng, k2, 2);
        let plan = exact_ot(&mu, &nu).unwrap();
        for (s, m) in plan.row_sums().iter().zip(mu.masses()) {
            assert!((s - m).abs() < 1e-7);
        }
        for (s, m) in plan.col_sums().iter().zip(nu.masses()) {
            assert!((s - m).abs() < 1e-7);
        }
        assert!(plan.entries.iter().all(|e| e.2 >= 0.0));
        let recomputed: f64 = plan
            .entries
            .iter()
            .map(|&(i, j, v)| {
                v * mu.point(i).iter().zip(nu.point(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            })
            .sum();
        assert!((recomputed - plan.cost).abs() < 1e-12);
        assert!((plan.cost - plan.dual).abs() < 1e-7);
    }
}

#[test]
fn one_dimensional_supports_match_quantile_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let n = rng.random_range(1..12);
        let wp: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let wq: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
        let norm = |w: &Vec<f64>| -> Vec<f64> {
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        };
        let (mp, mq) = (norm(&wp), norm(&wq));
        let pts: Vec<Vec<f64>> = (0..n).map(|k| vec![(k as f64 + 0.5) / n as f64]).collect();
        let plan = exact_ot(
            &DiscreteMeasure::new(&pts, mp.clone()).unwrap(),
            &DiscreteMeasure::new(&pts, mq.clone()).unwrap(),
        )
        .unwrap();
        // |F - G| integrated over atom spacing
        let (mut fp, mut fq, mut w1) = (0.0, 0.0, 0.0);
        for k in 0..n - 1 {
            fp += mp[k];
            fq += mq[k];
            w1 += (fp - fq).abs() / n as f64;
        }
        assert!((plan.cost - w1).abs() < 1e-9, "{} vs {}", plan.cost, w1);
    }
}

#[test]
fn metric_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let a = random_measure(&mut rng, 25, 2);
        let b = random_measure(&mut rng, 30, 2);
        let c = random_measure(&mut rng, 20, 2);
        let ab = exact_ot(&a, &b).unwrap().cost;
        let ba = exact_ot(&b, &a).unwrap().cost;
        let bc = exact_ot(&b, &c).unwrap().cost;
        let ac = exact_ot(&a, &c).unwrap().cost;
        assert!((ab - ba).abs() < 1e-9);
        assert!(ac <= ab + bc + 1e-9);
    }
}

#[test]
fn errors() {
    let mu = DiscreteMeasure::new(&[vec![0.0, 0.0]], vec![1.0]).unwrap();
    let big = DiscreteMeasure::new(&vec![vec![0.0, 0.0]; 5001], vec![1.0 / 5001.0; 5001]).unwrap();
    assert!(matches!(exact_ot(&mu, &big), Err(Error::TooLarge(5001, 5000))));
    let light = DiscreteMeasure::unnormalized(&[vec![0.0, 0.0]], vec![0.9]).unwrap();
    assert!(matches!(exact_ot(&mu, &light), Err(Error::InfeasibleMass(..))));
    assert!(DiscreteMeasure::new(&[vec![0.0]], vec![0.5]).is_err());
}

#[test]
fn sinkhorn_tracks_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..3 {
        let mu = random_measure(&mut rng, 100, 2);
        let nu = random_measure(&mut rng, 100, 2);
        let exact = exact_ot(&mu, &nu).unwrap().cost;
        let approx = sinkhorn(&mu, &nu, 1e-3, 20_000).unwrap();
        assert!((approx.cost - exact).abs() <= 5e-3, "{} vs {}", approx.cost, exact);
        assert!(approx.violation <= 1e-5);
    }
    let mu = random_measure(&mut rng, 50, 2);
    let costs: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&r| sinkhorn(&mu, &mu, r, 20_000).unwrap().cost).collect();
    assert!(costs[0] > costs[1] && costs[1] > costs[2]);
    assert!(sinkhorn(&mu, &mu, 0.0, 10).is_err());
}

#[test]
fn histogram_discretization() {
    let one = discretize_histogram(&Histogram2D::uniform(1), 1).unwrap();
    assert_eq!((one.len(), one.point(0), one.masses()[0]), (1, &[0.5, 0.5][..], 1.0));
    let p = Histogram2D::new(2, &[vec![2.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let d = discretize_histogram(&p, 2).unwrap();
    assert_eq!(d.len(), 16);
    let tile00: f64 = (0..16)
        .filter(|&i| d.point(i)[0] < 0.5 && d.point(i)[1] < 0.5)
        .map(|i| d.masses()[i])
        .sum();
    assert!((tile00 - 0.5).abs() < 1e-15);
    assert!((d.total_mass() - 1.0).abs() < 1e-15);
    assert!((histogram_slack(1, 1) - SQUARE_MEAN_DISTANCE).abs() < 1e-15);
}

#[test]
fn square_mean_distance_by_quadrature() {
    // midpoint rule over a fine grid of the unit square centered at the origin
    let k = 2000;
    let mut s = 0.0;
    for a in 0..k {
        for b in 0..k {
            let x = (a as f64 + 0.5) / k as f64 - 0.5;
            let y = (b as f64 + 0.5) / k as f64 - 0.5;
            s += (x * x + y * y).sqrt();
        }
    }
    assert!((s / (k * k) as f64 - SQUARE_MEAN_DISTANCE).abs() < 1e-6);
}

#[test]
fn pushforward_discretization() {
    let id = ReluNet::identity();
    let pair = parallel(&id, &id).unwrap();
    let d = discretize_pushforward(&pair, 2).unwrap();
    assert_eq!(d.point(0), &[0.25, 0.25]);
    assert_eq!(d.point(1), &[0.75, 0.75]);
    assert_eq!(d.masses(), &[0.5, 0.5]);
    assert!(matches!(discretize_pushforward(&id, 3), Err(Error::DimensionMismatch { .. })));

    let curve = parallel(&ReluNet::identity(), &sawtooth(3)).unwrap();
    let pieces = extract_pieces(&curve, 0.0, 1.0).unwrap();
    let d = discretize_pushforward(&curve, 97).unwrap();
    for j in 0..97 {
        let x = (j as f64 + 0.5) / 97.0;
        let y = pieces.eval(x);
        assert!((d.point(j)[0] - y[0]).abs() < 1e-9 && (d.point(j)[1] - y[1]).abs() < 1e-9);
    }
}

#[test]
fn curve_slack_of_a_straight_line() {
    // phi(x) = (x, x): slack is sqrt(2)/(4m)
    let id = ReluNet::identity();
    let pieces = extract_pieces(&parallel(&id, &id).unwrap(), 0.0, 1.0).unwrap();
    for m in [1, 2, 10, 333] {
        let expected = std::f64::consts::SQRT_2 / (4.0 * m as f64);
        assert!((curve_slack(&pieces, m) - expected).abs() < 1e-14);
    }
}

#[test]
fn curve_slack_bounds_true_distance() {
    // 1-D check: phi#U for phi = (g_s, 0) against the m-point discretization
    let s = 2;
    let curve = parallel(&sawtooth(s), &histopush::relunet::compose(&ReluNet::affine(0.0, 0.0), &sawtooth(1), 1.0, 0.0).unwrap()).unwrap();
    let pieces = extract_pieces(&curve, 0.0, 1.0).unwrap();
    for m in [3, 8, 50] {
        let d = discretize_pushforward(&curve, m).unwrap();
        // g_s # U is uniform; W1 to the atoms in 1-D via quantiles
        let mut xs: Vec<f64> = (0..m).map(|j| d.point(j)[0]).collect();
        xs.sort_by(f64::total_cmp);
        let steps = 100_000;
        let mut w = 0.0;
        for k in 0..steps {
            let u = (k as f64 + 0.5) / steps as f64;
            let q = xs[((u * m as f64) as usize).min(m - 1)];
            w += (u - q).abs() / steps as f64;
        }
        assert!(w <= curve_slack(&pieces, m) + 1e-6, "m={m}: {w} > {}", curve_slack(&pieces, m));
    }
}

#[test]
fn curve_slack_is_the_midpoint_coupling_cost() {
    let p = Histogram2D::random(3, 4, 1.0).unwrap();
    let (net, _) = build_phi_with_s(&p, 2, None).unwrap();
    let pieces = extract_pieces(&net, 0.0, 1.0).unwrap();
    for m in [7, 40] {
        let steps = 4000;
        let mut cost = 0.0;
        for j in 0..m {
            let c = pieces.eval((j as f64 + 0.5) / m as f64);
            for k in 0..steps {
                let x = (j as f64 + (k as f64 + 0.5) / steps as f64) / m as f64;
                let y = pieces.eval(x);
                cost += ((y[0] - c[0]).powi(2) + (y[1] - c[1]).powi(2)).sqrt() / (steps * m) as f64;
            }
        }
        let slack = curve_slack(&pieces, m);
        assert!((slack - cost).abs() <= 1e-6 * cost, "m={m}: {slack} vs {cost}");
    }
}

#[test]
fn estimate_brackets_shrink_with_resolution() {
    let p = Histogram2D::new(2, &[vec![2.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let (net, report) = build_phi_with_s(&p, 2, None).unwrap();
    let coarse = estimate_w(&p, &net, 4, 200).unwrap();
    let fine = estimate_w(&p, &net, 8, 800).unwrap();
    assert!(fine.slack < coarse.slack);
    assert!(coarse.lower <= fine.upper + 1e-9 && fine.lower <= coarse.upper + 1e-9);
    assert!(fine.lower <= report.guarantee);
    let uniform = Histogram2D::uniform(1);
    let (net, report) = build_phi_with_s(&uniform, 1, None).unwrap();
    let e = estimate_w(&uniform, &net, 10, 400).unwrap();
    assert!(e.estimate <= report.guarantee + e.slack);
}

#[test]
fn wasserstein1d_is_consistent_with_exact_solver() {
    let p = Histogram1D::new(vec![1.5, 0.5]).unwrap();
    let q = Histogram1D::new(vec![1.0, 1.0]).unwrap();
    assert!((pwl::wasserstein1d(&p, &q) - 0.125).abs() < 1e-15);
}
