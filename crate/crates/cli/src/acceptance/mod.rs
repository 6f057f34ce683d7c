//! The acceptance suite behind `histopush verify` and the `acceptance` test target.
//!
//! Criteria 4 to 6 build networks and record what criteria 7 and 8 need, so
//! those two reuse the builds instead of repeating them.

pub mod oracles;

use std::fmt;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use histopush::bounds::{c_constant, ln_zeta_cap, lower_bound_size, w_floor};
use histopush::pushforward::{
    build_phi, build_phi_baseline, build_phi_with_s, default_width, guarantee, predicted_for, BuildReport,
};
use histopush::pwl::wasserstein1d;
use histopush::relunet::{add, compose, extract_pieces, parallel, pass, sawtooth, spline_deep, PieceDecomposition};
use histopush::transport::{
    choose_resolution, curve_slack, discretize_histogram, discretize_pushforward, estimate_w_with_pieces,
    finest_resolution, histogram_slack, EXACT_MAX_ATOMS,
};
use histopush::{Histogram1D, Histogram2D, ReluNet, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracles::*;

const FN_TOL: f64 = 1e-9;
const SPLINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict} {}: {} [{:.1}s]", self.id, self.name, self.detail, self.seconds)
    }
}

/// What criteria 7 and 8 need from one built network.
#[derive(Debug, Clone)]
pub struct BuildRecord {
    pub label: String,
    pub n: usize,
    pub guarantee: f64,
    pub size: usize,
    pub depth: usize,
    pub pieces: usize,
    /// Image segments after merging collinear neighbours.
    pub lines: usize,
    /// Upper end of a sound bracket on `W(P, net#U)`.
    pub upper: f64,
    /// Set when the net's measured pieces disagree with the reference count.
    pub piece_mismatch: bool,
}

fn report(id: usize, name: &'static str, start: Instant, passed: bool, detail: String) -> CriterionReport {
    CriterionReport { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn grid(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |k| a + (b - a) * k as f64 / (count - 1) as f64)
}

fn max_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Pieces of `net`, measured on the net when `n <= 64` and taken from the
/// reference decomposition otherwise.
fn measure_pieces(p: &Histogram2D, s: usize, net: &ReluNet) -> Result<(PieceDecomposition, bool)> {
    let reference = reference_pieces(p, s)?;
    if p.n() > 64 {
        return Ok((reference, false));
    }
    let measured = extract_pieces(net, 0.0, 1.0)?;
    let mismatch = measured.count() != reference.count();
    Ok((measured, mismatch))
}

/// Upper end of a bracket on `W(P, net#U)`: exact transport when the grid
/// fits the solver, otherwise a sorted coupling plus the same slack terms.
fn upper_bracket(p: &Histogram2D, net: &ReluNet, pieces: &PieceDecomposition, m: usize) -> Result<f64> {
    let n = p.n();
    if n * n <= EXACT_MAX_ATOMS {
        let mut r = 1;
        while r < 4 && (n * (r + 1)).pow(2) <= EXACT_MAX_ATOMS {
            r += 1;
        }
        return Ok(estimate_w_with_pieces(p, net, pieces, r, m)?.upper);
    }
    let mu = discretize_histogram(p, 1)?;
    let nu = discretize_pushforward(net, m)?;
    let mut drift = 0.0f64;
    for j in 0..m {
        let x = (j as f64 + 0.5) / m as f64;
        let v = pieces.eval(x);
        let y = nu.point(j);
        drift = drift.max(((v[0] - y[0]).powi(2) + (v[1] - y[1]).powi(2)).sqrt());
    }
    let column = |x: &[f64]| (((x[0] * n as f64) as usize).min(n - 1), x[1]);
    let cost = sorted_coupling_cost(&mu, &nu, column);
    Ok(cost + histogram_slack(n, 1) + curve_slack(pieces, m) + drift)
}

fn record(label: String, p: &Histogram2D, s: usize, net: &ReluNet, rep: &BuildReport, m: usize) -> Result<BuildRecord> {
    let (pieces, piece_mismatch) = measure_pieces(p, s, net)?;
    let upper = upper_bracket(p, net, &pieces, m)?;
    Ok(BuildRecord {
        label,
        n: p.n(),
        guarantee: rep.guarantee,
        size: rep.size,
        depth: rep.depth,
        pieces: pieces.count(),
        lines: pieces.image_lines(),
        upper,
        piece_mismatch,
    })
}

pub fn criterion_1() -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = Vec::new();
    let wide: Vec<f64> = grid(-1.0, 2.0, 1000).collect();
    let unit: Vec<f64> = grid(0.0, 1.0, 1000).collect();
    let relu = |v: f64| v.max(0.0);

    for case in 0..200 {
        let depth = rng.random_range(1..=4);
        let f = random_net(&mut rng, 1, depth);
        let target = depth + rng.random_range(0..=3);
        let h = pass(&f, target).unwrap();
        let shape_ok = (h.size(), h.depth()) == (f.size() + target - depth, target);
        let err = wide
            .iter()
            .map(|&x| {
                let v = f.eval1(x)[0];
                let want = if target > depth { relu(v) } else { v };
                (h.eval1(x)[0] - want).abs()
            })
            .fold(0.0, f64::max);
        if !shape_ok || err > FN_TOL {
            failures.push(format!("pass#{case}"));
        }
    }

    for case in 0..200 {
        let (l1, l2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let f = random_net(&mut rng, 1, l1);
        let g = random_net(&mut rng, 1, l2);
        let h = parallel(&f, &g).unwrap();
        let shape_ok = (h.size(), h.depth()) == (f.size() + g.size() + l1.abs_diff(l2), l1.max(l2));
        let pad = |v: f64, l: usize| if l < l1.max(l2) { relu(v) } else { v };
        let err = wide
            .iter()
            .map(|&x| {
                let want = [pad(f.eval1(x)[0], l1), pad(g.eval1(x)[0], l2)];
                max_diff(&h.eval1(x), &want)
            })
            .fold(0.0, f64::max);
        if !shape_ok || err > FN_TOL {
            failures.push(format!("parallel#{case}"));
        }
    }

    for case in 0..200 {
        let (l1, l2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let out_dim = rng.random_range(1..=2);
        let f = random_net(&mut rng, out_dim, l1);
        let g = random_net(&mut rng, 1, l2);
        let (p, q) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let h = compose(&f, &g, p, q).unwrap();
        let shape_ok = (h.size(), h.depth()) == (f.size() + g.size() - 1, l1 + l2 - 1);
        let err = wide
            .iter()
            .map(|&x| max_diff(&h.eval1(x), &f.eval1(p * g.eval1(x)[0] + q)))
            .fold(0.0, f64::max);
        if !shape_ok || err > FN_TOL {
            failures.push(format!("compose#{case}"));
        }
    }

    for case in 0..200 {
        let count = rng.random_range(2..=5);
        let nets: Vec<ReluNet> = (0..count)
            .map(|_| {
                let l = rng.random_range(1..=4);
                random_net(&mut rng, 1, l)
            })
            .collect();
        let h = add(&nets).unwrap();
        let size: usize = nets.iter().map(|f| f.size() + 2 * f.depth() - 2).sum::<usize>() - count + 1;
        let depth: usize = nets.iter().map(ReluNet::depth).sum::<usize>() - count + 1;
        let shape_ok = (h.size(), h.depth()) == (size, depth);
        let err = unit
            .iter()
            .map(|&x| (h.eval1(x)[0] - nets.iter().map(|f| f.eval1(x)[0]).sum::<f64>()).abs())
            .fold(0.0, f64::max);
        if !shape_ok || err > FN_TOL {
            failures.push(format!("add#{case}"));
        }
    }

    let detail = if failures.is_empty() {
        "800 cases: sizes, depths and values match".to_string()
    } else {
        format!("{} of 800 cases failed, first {:?}", failures.len(), &failures[..failures.len().min(5)])
    };
    report(1, "combinator algebra", start, failures.is_empty(), detail)
}

pub fn criterion_2() -> CriterionReport {
    let start = Instant::now();
    let probes = [-10.0, -2.0, -1.0, -0.5, -0.1, -0.01, 1.01, 1.1, 1.5, 2.0, 3.0, 10.0];
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for s in 1..=10 {
        let net = sawtooth(s);
        let err = grid(0.0, 1.0, 10_000)
            .map(|x| (net.eval1(x)[0] - sawtooth_closed(s, x)).abs())
            .fold(0.0, f64::max);
        let outside = probes.iter().map(|&x| net.eval1(x)[0].abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        if (net.size(), net.depth()) != (3 * s + 1, s + 1) || err > FN_TOL || outside > FN_TOL {
            bad.push(s);
        }
    }
    let detail = format!("s=1..10, max grid error {worst:.2e}, failing s {bad:?}");
    report(2, "sawtooth", start, bad.is_empty(), detail)
}

pub fn criterion_3() -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for width in [8usize, 10, 16] {
        for m in (0..=200).step_by(7) {
            cases += 1;
            let f = random_pwl(&mut rng, m);
            let net = spline_deep(&f, width).unwrap();
            let per_block = (width - 2) * ((width - 2) / 6);
            let depth = 2usize.max(2 * m.div_ceil(per_block) + 1);
            let size = width * (depth - 1) + 1;
            let mut xs: Vec<f64> = grid(0.0, 1.0, 10_000).collect();
            for &k in f.knots() {
                xs.extend([k, (k - 1e-7).max(0.0), (k + 1e-7).min(1.0)]);
            }
            let err = xs
                .iter()
                .map(|&x| (net.eval1(x)[0] - f.eval(x).unwrap()).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            if (net.size(), net.depth()) != (size, depth) || err > SPLINE_TOL {
                bad.push((m, width));
            }
        }
    }
    let detail = format!("{cases} (m, W) pairs, max error {worst:.2e}, failing {bad:?}");
    report(3, "spline construction", start, bad.is_empty(), detail)
}

/// Criterion 4 plus the records of every net it built.
pub fn criterion_4() -> (CriterionReport, Vec<BuildRecord>) {
    let start = Instant::now();
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut passed = true;
    for n in [2usize, 4, 8] {
        for s in 1..=3 {
            let g = guarantee(n, s);
            let (mut ok, mut slack_ok, mut worst_gap, mut worst_slack) = (0, 0, f64::NEG_INFINITY, 0.0f64);
            for seed in 0..20 {
                let p = Histogram2D::random(n, 4000 + seed, 1.0).unwrap();
                let (net, rep) = build_phi_with_s(&p, s, None).unwrap();
                let (pieces, mismatch) = measure_pieces(&p, s, &net).unwrap();
                let (r, m) = choose_resolution(n, &pieces, 0.2 * g).unwrap_or_else(|| finest_resolution(n));
                let est = estimate_w_with_pieces(&p, &net, &pieces, r, m).unwrap();
                let gap = est.lower - g;
                worst_gap = worst_gap.max(gap);
                worst_slack = worst_slack.max(est.slack / g);
                ok += usize::from(gap <= 0.0);
                slack_ok += usize::from(est.slack <= 0.2 * g);
                records.push(BuildRecord {
                    label: format!("map n={n} s={s} seed={seed}"),
                    n,
                    guarantee: g,
                    size: rep.size,
                    depth: rep.depth,
                    pieces: pieces.count(),
                    lines: pieces.image_lines(),
                    upper: est.upper,
                    piece_mismatch: mismatch,
                });
            }
            passed &= ok == 20 && slack_ok == 20;
            lines.push(format!(
                "(n={n},s={s}) bound {ok}/20, slack {slack_ok}/20, max (est-slack)-g {worst_gap:.2e}, max slack/g {worst_slack:.3}"
            ));
        }
    }
    (report(4, "pushforward guarantee", start, passed, lines.join("; ")), records)
}

/// Criterion 5 plus the records of every net it built.
pub fn criterion_5() -> (CriterionReport, Vec<BuildRecord>) {
    let start = Instant::now();
    let epsilon = 0.05;
    let ns = [16usize, 64, 256, 1024];
    let mut records = Vec::new();
    let (mut deep, mut base) = (Vec::new(), Vec::new());
    let mut accounting_ok = true;
    for &n in &ns {
        let p = Histogram2D::random(n, 5000 + n as u64, 1.0).unwrap();
        let (net, rep) = build_phi(&p, epsilon, None).unwrap();
        let (bnet, brep) = build_phi_baseline(&p, epsilon).unwrap();
        let (pd, pb) = predicted_for(&p, rep.s, default_width(n)).unwrap();
        accounting_ok &= (pd.size, pd.depth) == (rep.size, rep.depth) && (pb.size, pb.depth) == (brep.size, brep.depth);
        deep.push(rep.size as f64);
        base.push(brep.size as f64);
        let m = if n <= 256 { 1000 } else { 300 };
        records.push(record(format!("deep n={n}"), &p, rep.s, &net, &rep, m).unwrap());
        drop(net);
        records.push(record(format!("baseline n={n}"), &p, brep.s, &bnet, &brep, m).unwrap());
    }
    let ln_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let (deep_slope, _) = fit_line(&ln_n, &ln(&deep));
    let (base_slope, _) = fit_line(&ln_n, &ln(&base));
    let passed = accounting_ok && (1.35..=1.65).contains(&deep_slope) && (1.85..=2.15).contains(&base_slope);
    let detail = format!(
        "deep sizes {deep:?} slope {deep_slope:.3} (want 1.35..1.65), baseline sizes {base:?} slope {base_slope:.3} (want 1.85..2.15), accounting {}",
        if accounting_ok { "matches" } else { "MISMATCH" }
    );
    (report(5, "size scaling in n", start, passed, detail), records)
}

/// Criterion 6 plus the records of every net it built.
pub fn criterion_6() -> (CriterionReport, Vec<BuildRecord>) {
    let start = Instant::now();
    let n = 8;
    let p = Histogram2D::random(n, 6000, 1.0).unwrap();
    let mut records = Vec::new();
    let (mut xs, mut deep, mut base) = (Vec::new(), Vec::new(), Vec::new());
    for k in 3..=12 {
        let epsilon = 0.5f64.powi(k);
        let (net, rep) = build_phi(&p, epsilon, None).unwrap();
        let (bnet, brep) = build_phi_baseline(&p, epsilon).unwrap();
        xs.push(k as f64);
        deep.push(rep.size as f64);
        base.push(brep.size as f64);
        records.push(record(format!("deep n=8 eps=2^-{k}"), &p, rep.s, &net, &rep, 1000).unwrap());
        records.push(record(format!("baseline n=8 eps=2^-{k}"), &p, brep.s, &bnet, &brep, 1000).unwrap());
    }
    let (_, deep_r2) = fit_line(&xs, &deep);
    let (_, base_r2) = fit_line(&xs, &base);
    let passed = deep_r2 >= 0.99 && base_r2 >= 0.99;
    let detail = format!("R^2 deep {deep_r2:.5}, baseline {base_r2:.5} over eps=2^-3..2^-12");
    (report(6, "size scaling in epsilon", start, passed, detail), records)
}

pub fn criterion_7(records: &[BuildRecord]) -> CriterionReport {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut tightest = f64::INFINITY;
    for rec in records {
        let cap_ok = (rec.pieces as f64).ln() <= ln_zeta_cap(rec.size, rec.depth).unwrap();
        let floor = w_floor(rec.n, rec.lines as f64, 2).unwrap();
        tightest = tightest.min(rec.upper / floor);
        if !cap_ok || rec.upper < floor || rec.piece_mismatch {
            bad.push(rec.label.clone());
        }
    }
    let detail = format!(
        "{} nets, min (estimate+slack)/floor {tightest:.3e}, failing {:?}",
        records.len(),
        &bad[..bad.len().min(5)]
    );
    report(7, "piece cap and Wasserstein floor", start, bad.is_empty(), detail)
}

pub fn criterion_8(records: &[BuildRecord]) -> CriterionReport {
    let start = Instant::now();
    let mut bad: Vec<String> = records
        .iter()
        .filter(|rec| (rec.size as f64) < lower_bound_size(rec.n, rec.guarantee, rec.depth, 2).unwrap().ceil())
        .map(|rec| rec.label.clone())
        .collect();
    let c2 = c_constant(2).unwrap();
    let c2_err = (c2 - c_constant_gamma(2)).abs().max((c2 - std::f64::consts::FRAC_1_SQRT_2).abs());
    if c2_err > 1e-12 {
        bad.push(format!("C(2) off by {c2_err:.2e}"));
    }
    let cd_err = (3..=10).map(|d| (c_constant(d).unwrap() - c_constant_gamma(d)).abs()).fold(0.0, f64::max);
    if cd_err > 1e-12 {
        bad.push(format!("C(d) off by {cd_err:.2e}"));
    }
    let detail = format!(
        "{} builds above the lower bound at their guarantee, C(2) error {c2_err:.1e}, C(3..10) error {cd_err:.1e}, failing {:?}",
        records.len(),
        &bad[..bad.len().min(5)]
    );
    report(8, "bound consistency", start, bad.is_empty(), detail)
}

pub fn criterion_9() -> CriterionReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst = 0.0f64;
    let draw = |rng: &mut ChaCha8Rng, n: usize| {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        Histogram1D::new(raw.iter().map(|w| w * n as f64 / total).collect()).unwrap()
    };
    for _ in 0..50 {
        let n = rng.random_range(2..=64);
        let p = draw(&mut rng, n);
        let q = draw(&mut rng, n);
        let exact = wasserstein1d(&p, &q);
        let quad = w1_quadrature(&p, &q, 1_000_000);
        worst = worst.max((exact - quad).abs() / quad);
    }
    report(9, "1-D Wasserstein oracle", start, worst <= 1e-6, format!("50 pairs, max relative error {worst:.2e}"))
}

/// Serialization round trip, then byte-identical CLI output across two runs.
pub fn criterion_10(exe: &Path) -> CriterionReport {
    let start = Instant::now();
    let mut problems = Vec::new();

    let p = Histogram2D::random(4, 10, 1.0).unwrap();
    let (net, _) = build_phi(&p, 0.05, None).unwrap();
    let back = ReluNet::from_json(&net.to_json()).unwrap();
    let drift = grid(0.0, 1.0, 1000)
        .filter(|&x| {
            net.eval1(x).iter().zip(back.eval1(x)).any(|(a, b)| a.to_bits() != b.to_bits())
        })
        .count();
    if drift > 0 {
        problems.push(format!("{drift} grid points drift after round trip"));
    }

    match cli_determinism(exe) {
        Ok(runs) => {
            if !runs.1.is_empty() {
                problems.push(format!("differing outputs {:?}", runs.1));
            }
            let detail = if problems.is_empty() {
                format!("0-ulp round trip on 1000 points, {} CLI invocations byte-identical", runs.0)
            } else {
                problems.join("; ")
            };
            report(10, "determinism and round trip", start, problems.is_empty(), detail)
        }
        Err(e) => report(10, "determinism and round trip", start, false, format!("CLI run failed: {e}")),
    }
}

/// Runs every subcommand twice; returns the invocation count and the ones
/// whose stdout or written files differ.
fn cli_determinism(exe: &Path) -> std::result::Result<(usize, Vec<String>), String> {
    let dir = std::env::temp_dir().join(format!("histopush-verify-{}", std::process::id()));
    let mut differing = Vec::new();
    let mut count = 0;
    let mut outputs = Vec::new();
    for round in 0..2 {
        let d = dir.join(round.to_string());
        std::fs::create_dir_all(&d).map_err(|e| e.to_string())?;
        let path = |name: &str| d.join(name).to_string_lossy().into_owned();
        std::fs::write(d.join("cases.csv"), "n,epsilon\n4,0.1\n8,0.05\n").map_err(|e| e.to_string())?;
        let runs: Vec<(String, Vec<String>, Vec<String>)> = vec![
            ("gen".into(), vec!["gen", "--n", "4", "--seed", "7", "--out", &path("h.json")].into_iter().map(String::from).collect(), vec![path("h.json")]),
            (
                "build".into(),
                ["build", "--hist", &path("h.json"), "--epsilon", "0.1", "--out-net", &path("net.json"), "--out-report", &path("report.json"), "--dump-splines", &path("splines.json")]
                    .into_iter()
                    .map(String::from)
                    .collect(),
                vec![path("net.json"), path("report.json"), path("splines.json")],
            ),
            ("eval".into(), ["eval", "--net", &path("net.json"), "--grid", "11"].into_iter().map(String::from).collect(), vec![]),
            ("sample".into(), ["sample", "--hist", &path("h.json"), "--count", "50", "--seed", "3"].into_iter().map(String::from).collect(), vec![]),
            ("sample-net".into(), ["sample", "--net", &path("net.json"), "--count", "50", "--seed", "3"].into_iter().map(String::from).collect(), vec![]),
            ("pieces".into(), ["pieces", "--net", &path("net.json")].into_iter().map(String::from).collect(), vec![]),
            (
                "distance".into(),
                ["distance", "--hist", &path("h.json"), "--net", &path("net.json"), "--r", "2", "--m", "200"].into_iter().map(String::from).collect(),
                vec![],
            ),
            ("bounds".into(), ["bounds", "--n", "10", "--epsilon", "1e-5", "--L", "2", "--d", "2"].into_iter().map(String::from).collect(), vec![]),
            ("table".into(), ["table", "--cases", &path("cases.csv")].into_iter().map(String::from).collect(), vec![]),
        ];
        let mut this_round = Vec::new();
        for (name, args, files) in runs {
            let out = Command::new(exe).args(&args).output().map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!("{name} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
            }
            count += 1;
            let mut bytes = out.stdout;
            for f in files {
                bytes.extend(std::fs::read(&f).map_err(|e| e.to_string())?);
            }
            this_round.push((name, bytes));
        }
        outputs.push(this_round);
    }
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        if a.1 != b.1 {
            differing.push(a.0.clone());
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((count, differing))
}

/// Runs all ten criteria in order.
pub fn run_all(exe: &Path) -> Vec<CriterionReport> {
    run_all_with(exe, |_| {})
}

/// [`run_all`], handing each report to `sink` as soon as it is ready.
pub fn run_all_with(exe: &Path, mut sink: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let mut push = |r: CriterionReport, out: &mut Vec<CriterionReport>| {
        sink(&r);
        out.push(r);
    };
    push(criterion_1(), &mut out);
    push(criterion_2(), &mut out);
    push(criterion_3(), &mut out);
    let mut records = Vec::new();
    for f in [criterion_4, criterion_5, criterion_6] {
        let (r, recs) = f();
        records.extend(recs);
        push(r, &mut out);
    }
    push(criterion_7(&records), &mut out);
    push(criterion_8(&records), &mut out);
    push(criterion_9(), &mut out);
    push(criterion_10(exe), &mut out);
    out
}
