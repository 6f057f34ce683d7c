//! Subcommand implementations. Each returns the text destined for stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use histopush::bounds::{regime_table, zeta_cap, ln_zeta_cap, BoundsReport, REGIME_HEADER};
use histopush::pushforward::{build_phi, build_phi_baseline, Splines};
use histopush::relunet::{extract_pieces, extract_pieces_exact};
use histopush::transport::estimate_w;
use histopush::{BuildReport, Error, Histogram2D, ReluNet, Result, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Parser)]
#[command(name = "histopush", version, about = "ReLU pushforward generators for 2-D histograms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Write a random histogram.
    Gen(GenArgs),
    /// Build a generator network for a histogram.
    Build(BuildArgs),
    /// Evaluate a network at points or on a grid.
    Eval(EvalArgs),
    /// Draw samples from a histogram or from a network's pushforward.
    Sample(SampleArgs),
    /// Affine pieces of a scalar-input network.
    Pieces(PiecesArgs),
    /// Bracket the Wasserstein distance between a histogram and a network's pushforward.
    Distance(DistanceArgs),
    /// Upper and lower size bounds.
    Bounds(BoundsArgs),
    /// Regime table for a list of (n, epsilon) cases.
    Table(TableArgs),
    /// Run the acceptance suite.
    Verify,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Log-normal spread of the weights; 0 gives the uniform histogram.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Deep,
    Baseline,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub hist: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "deep")]
    pub variant: VariantArg,
    /// Hidden width of the deep splines.
    #[arg(long = "width", short = 'W')]
    pub width: Option<usize>,
    #[arg(long)]
    pub out_net: PathBuf,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long)]
    pub dump_splines: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Evaluation points (scalar-input networks).
    #[arg(long, num_args = 1.., allow_negative_numbers = true, conflicts_with = "grid")]
    pub x: Vec<f64>,
    /// Number of equally spaced points on [a, b].
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, required_unless_present = "net", conflicts_with = "net")]
    pub hist: Option<PathBuf>,
    /// Push uniform draws through this network instead.
    #[arg(long)]
    pub net: Option<PathBuf>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PiecesArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub hist: PathBuf,
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub r: usize,
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Build report of the network; defaults to the net path with extension `report.json` when present.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long = "L")]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// CSV with columns `n,epsilon`; a header line is optional.
    #[arg(long)]
    pub cases: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_net(path: &Path) -> Result<ReluNet> {
    ReluNet::from_json(&read(path)?)
}

fn load_hist(path: &Path) -> Result<Histogram2D> {
    Histogram2D::from_json(&read(path)?)
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Runs `cmd`, returning stdout text and any warnings for stderr.
pub fn run(cmd: &Cmd) -> Result<(String, Vec<String>)> {
    let mut warnings = Vec::new();
    let out = match cmd {
        Cmd::Gen(a) => {
            let h = Histogram2D::random(a.n, a.seed, a.spread)?;
            let text = h.to_json();
            match &a.out {
                Some(p) => {
                    write(p, &text)?;
                    String::new()
                }
                None => text + "\n",
            }
        }
        Cmd::Build(a) => build(a)?,
        Cmd::Eval(a) => eval(a)?,
        Cmd::Sample(a) => sample(a)?,
        Cmd::Pieces(a) => pieces(a)?,
        Cmd::Distance(a) => distance(a, &mut warnings)?,
        Cmd::Bounds(a) => BoundsReport::new(a.n, a.epsilon, a.depth, a.d)?.to_json() + "\n",
        Cmd::Table(a) => table(a)?,
        Cmd::Verify => unreachable!("verify is dispatched by the binary"),
    };
    Ok((out, warnings))
}

fn build(a: &BuildArgs) -> Result<String> {
    let p = load_hist(&a.hist)?;
    let (net, report) = match a.variant {
        VariantArg::Deep => build_phi(&p, a.epsilon, a.width)?,
        VariantArg::Baseline => build_phi_baseline(&p, a.epsilon)?,
    };
    write(&a.out_net, &net.to_json())?;
    if let Some(path) = &a.out_report {
        write(path, &report.to_json())?;
    }
    if let Some(path) = &a.dump_splines {
        let s = Splines::of(&p)?;
        let parse = |t: String| serde_json::from_str::<serde_json::Value>(&t).expect("pwl json");
        let doc = serde_json::json!({
            "marginal": parse(s.marginal.to_json()),
            "rows": s.rows.iter().map(|f| parse(f.to_json())).collect::<Vec<_>>(),
        });
        write(path, &doc.to_string())?;
    }
    Ok(report.to_json() + "\n")
}

fn eval(a: &EvalArgs) -> Result<String> {
    let net = load_net(&a.net)?;
    let xs: Vec<f64> = match a.grid {
        Some(0) => return Err(Error::Domain("grid needs at least one point".into())),
        Some(1) => vec![a.a],
        Some(k) => (0..k).map(|i| a.a + (a.b - a.a) * i as f64 / (k - 1) as f64).collect(),
        None if a.x.is_empty() => return Err(Error::Domain("give --x or --grid".into())),
        None => a.x.clone(),
    };
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("evaluation points must be finite".into()));
    }
    let mut out = String::new();
    for x in xs {
        writeln!(out, "{}", csv_row(&net.eval(&[x])?)).unwrap();
    }
    Ok(out)
}

fn sample(a: &SampleArgs) -> Result<String> {
    let mut out = String::new();
    if let Some(path) = &a.net {
        let net = load_net(path)?;
        if net.in_dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: net.in_dim() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for _ in 0..a.count {
            let u: f64 = rng.random();
            writeln!(out, "{}", csv_row(&net.eval1(u))).unwrap();
        }
    } else {
        let h = load_hist(a.hist.as_deref().expect("clap enforces one source"))?;
        for p in h.sample(a.count, a.seed) {
            writeln!(out, "{}", csv_row(&p)).unwrap();
        }
    }
    Ok(out)
}

fn exact_requested() -> bool {
    std::env::var("HISTOPUSH_EXACT").is_ok_and(|v| v == "1")
}

fn pieces(a: &PiecesArgs) -> Result<String> {
    let net = load_net(&a.net)?;
    let pd = if exact_requested() { extract_pieces_exact(&net, a.a, a.b)? } else { extract_pieces(&net, a.a, a.b)? };
    let cap = zeta_cap(net.size(), net.depth())?;
    let ln_cap = ln_zeta_cap(net.size(), net.depth())?;
    Ok(match a.format {
        Format::Json => {
            let doc = serde_json::json!({
                "a": a.a,
                "b": a.b,
                "breakpoints": pd.breakpoints(),
                "pieces": pd.pieces(),
                "zeta": pd.count(),
                "lines": pd.image_lines(),
                "size": net.size(),
                "depth": net.depth(),
                "zeta_cap": cap,
                "ln_zeta_cap": ln_cap,
            });
            doc.to_string() + "\n"
        }
        Format::Csv => {
            let mut out = String::from("lo,hi");
            for c in 0..pd.out_dim() {
                write!(out, ",slope{c},intercept{c}").unwrap();
            }
            out.push('\n');
            for (j, piece) in pd.pieces().iter().enumerate() {
                let (lo, hi) = pd.interval(j);
                let coeffs: Vec<f64> = piece.iter().flat_map(|&(s, b)| [s, b]).collect();
                writeln!(out, "{lo},{hi},{}", csv_row(&coeffs)).unwrap();
            }
            out
        }
    })
}

fn distance(a: &DistanceArgs, warnings: &mut Vec<String>) -> Result<String> {
    let p = load_hist(&a.hist)?;
    let net = load_net(&a.net)?;
    let sidecar = a.report.clone().or_else(|| {
        let guess = a.net.with_extension("report.json");
        guess.exists().then_some(guess)
    });
    let report: Option<BuildReport> = match &sidecar {
        Some(path) => Some(
            serde_json::from_str(&read(path)?).map_err(|e| Error::parse(path.display().to_string(), e))?,
        ),
        None => None,
    };
    let est = estimate_w(&p, &net, a.r, a.m)?;
    let mut doc = serde_json::to_value(&est).expect("estimate serializes");
    if let Some(rep) = report {
        if rep.n != p.n() {
            warnings.push(format!("report was built for n={}, histogram has n={}", rep.n, p.n()));
        }
        doc["guarantee"] = rep.guarantee.into();
        doc["pass"] = (est.lower <= rep.guarantee).into();
        if rep.variant == Variant::Baseline {
            doc["variant"] = "baseline".into();
        }
    }
    Ok(doc.to_string() + "\n")
}

fn table(a: &TableArgs) -> Result<String> {
    let text = read(&a.cases)?;
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let loc = format!("{}:{}", a.cases.display(), i + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::parse(loc, "expected two fields n,epsilon"));
        }
        let n = fields[0].parse::<usize>().map_err(|e| Error::parse(loc.clone(), e))?;
        let eps = fields[1].parse::<f64>().map_err(|e| Error::parse(loc.clone(), e))?;
        cases.push((n, eps));
    }
    let mut out = String::from(REGIME_HEADER);
    out.push('\n');
    for row in regime_table(&cases)? {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    Ok(out)
}
