use histopush::pushforward::{build_phi_with_s, choose_s, guarantee, Splines};
use histopush::pwl::inverse_cdf;
use histopush::relunet::{compose, extract_pieces, sawtooth, spline_deep, triangle};
use histopush::transport::estimate_w;
use histopush::{build_phi, Histogram1D, Histogram2D, ReluNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn small_net_examples() {
    let g1 = triangle();
    assert_eq!(g1.eval1(0.25), vec![0.5]);
    assert_eq!(g1.eval1(-1.0), vec![0.0]);
    assert_eq!(ReluNet::identity().eval1(0.4), vec![0.4]);
    assert_eq!(extract_pieces(&sawtooth(3), 0.0, 1.0).unwrap().count(), 8);
    assert_eq!(extract_pieces(&ReluNet::affine(2.0, 1.0), 0.0, 1.0).unwrap().count(), 1);
}

#[test]
fn choose_s_examples() {
    assert_eq!(choose_s(4, 1.0).unwrap(), 1);
    assert_eq!(choose_s(2, 0.1).unwrap(), 4);
    for n in 1..20 {
        for eps in [1.0, 0.3, 0.01, 1e-4] {
            assert!(guarantee(n, choose_s(n, eps).unwrap()) <= eps);
        }
    }
}

#[test]
fn uniform_target_pushes_to_uniform_coordinates() {
    let (net, _) = build_phi(&Histogram2D::uniform(1), 0.3, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let count = 100_000;
    let (mut a, mut b) = (Vec::with_capacity(count), Vec::with_capacity(count));
    for _ in 0..count {
        let y = net.eval1(rng.random());
        a.push(y[0]);
        b.push(y[1]);
    }
    let gate = 1.63 / (count as f64).sqrt();
    assert!(ks_uniform(a) < gate);
    assert!(ks_uniform(b) < gate);
}

#[test]
fn two_by_two_example_meets_its_guarantee() {
    let p = Histogram2D::new(2, &[vec![2.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let (net, report) = build_phi(&p, 0.1, None).unwrap();
    assert_eq!(report.s, 4);
    assert!((report.guarantee - 0.0884).abs() < 1e-4);
    let est = estimate_w(&p, &net, 8, 2000).unwrap();
    assert!(est.lower <= report.guarantee, "{est:?}");
}

#[test]
fn first_coordinate_is_the_marginal_quantile() {
    let p = Histogram2D::random(6, 2, 1.0).unwrap();
    let (net, _) = build_phi(&p, 0.05, None).unwrap();
    let q = inverse_cdf(&p.marginal_first());
    for k in 0..=1000 {
        let x = k as f64 / 1000.0;
        assert!((net.eval1(x)[0] - q.eval(x).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn inverse_cdf_pushes_uniform_onto_the_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [3usize, 17, 64] {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let total: f64 = raw.iter().sum();
        let h = Histogram1D::new(raw.iter().map(|w| w * n as f64 / total).collect()).unwrap();
        let f = inverse_cdf(&h);
        let count = 100_000;
        let mut hits = vec![0usize; n];
        for _ in 0..count {
            let y = f.eval(rng.random()).unwrap();
            hits[((y * n as f64) as usize).min(n - 1)] += 1;
        }
        for k in 0..n {
            let p = h.mass(k);
            let sigma = (count as f64 * p * (1.0 - p)).sqrt();
            assert!((hits[k] as f64 - count as f64 * p).abs() <= 4.0 * sigma, "n={n} k={k}");
        }
    }
}

#[test]
fn off_tile_branches_vanish() {
    let n = 4;
    let s = 2;
    let p = Histogram2D::random(n, 8, 1.0).unwrap();
    let splines = Splines::of(&p).unwrap();
    let marg = spline_deep(&splines.marginal, 8).unwrap();
    let cum = p.marginal_first().cumulative();
    for i in 0..n {
        let inner = compose(&sawtooth(s), &marg, n as f64, -(i as f64)).unwrap();
        let branch = compose(&spline_deep(&splines.rows[i], 8).unwrap(), &inner, 1.0, 0.0).unwrap();
        for k in 0..=400 {
            let x = k as f64 / 400.0;
            let inside = cum[i] - 1e-9 <= x && x <= cum[i + 1] + 1e-9;
            if !inside {
                assert!(branch.eval1(x)[0].abs() < 1e-12, "branch {i} at {x}");
            }
        }
    }
}

#[test]
fn net_matches_the_closed_form() {
    let p = Histogram2D::random(5, 31, 1.5).unwrap();
    let splines = Splines::of(&p).unwrap();
    for s in 1..=4 {
        let (net, _) = build_phi_with_s(&p, s, Some(9)).unwrap();
        for k in 0..=2000 {
            let x = k as f64 / 2000.0;
            let (a, b) = splines.eval_phi(s, x);
            let y = net.eval1(x);
            assert!((y[0] - a).abs() < 1e-9 && (y[1] - b).abs() < 1e-9);
        }
    }
}
