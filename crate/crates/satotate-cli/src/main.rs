//! Command-line surface for the `satotate` library: point counts, dataset
//! scans, Sato-Tate group reports, moment statistics, and histograms, as
//! JSON/CSV on stdout or simple SVG files.
//!
//! Every command is deterministic given its flags (including `--seed`) and
//! the cache state. Errors exit nonzero with a one-line JSON object on
//! stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satotate::counting::{count_points, count_points_naive};
use satotate::ltrace::{
    build_dataset, histogram, numerical_moments, A1Dataset, HistFilter,
};
use satotate::moments::{exact_a1_moment, mc_moments, McConfig};
use satotate::stgroup::{
    component_order, conjugate_alpha, exponent_set, galois_action_of, gamma_matrix_of,
    is_generator, is_symplectic, matrix_order, smallest_generator,
};

/// Fixed default RNG seed so runs are reproducible out of the box.
const DEFAULT_SEED: u64 = 42;

/// Environment variable naming a directory for default cache files
/// (`a1-l<L>.csv` per family parameter).
const CACHE_DIR_ENV: &str = "SATOTATE_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "satotate",
    about = "Point counts and Sato-Tate statistics for the curves y^l = x(x^l - 1)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count points of C_l over F_q and report the normalized a1.
    Count {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long = "q")]
        q: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Build the a1 dataset for all good primes up to a bound (CSV).
    Scan {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long)]
        bound: u64,
        /// Worker threads for the prime scan.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the exponent calculus and the component-group generator gamma.
    Group {
        #[arg(long = "l")]
        ell: u64,
        /// Galois element (default: smallest generator of (Z/l^2 Z)*).
        #[arg(long = "n")]
        n: Option<u64>,
    },
    /// Moment statistics, theoretical and numerical.
    Moments {
        #[command(subcommand)]
        kind: MomentsCommand,
    },
    /// Histogram of a1 values as CSV or SVG.
    Hist {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 101)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = FilterArg::All)]
        filter: FilterArg,
        /// Output path; `.svg` emits a bar chart, anything else CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MomentsCommand {
    /// Exact a1-moments of the Sato-Tate group, as "num/den" strings.
    Theory {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long)]
        nmax: u32,
    },
    /// Moments averaged over the a1 dataset up to a bound.
    Numeric {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        nmax: u32,
        /// Average only over primes p = 1 mod l^2.
        #[arg(long)]
        restrict: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Monte-Carlo moments of a_1..a_kmax from sampled group elements.
    Mc {
        #[arg(long = "l")]
        ell: u64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        nmax: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    Res1,
}

impl From<FilterArg> for HistFilter {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::All => HistFilter::All,
            FilterArg::Res1 => HistFilter::Res1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::FAILURE
        }
    }
}

type CmdResult<T = ()> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

fn run(command: Command) -> CmdResult {
    match command {
        Command::Count { ell, q, method } => {
            let record = match method {
                MethodArg::Auto => count_points(ell, q)?,
                MethodArg::Naive => count_points_naive(ell, q)?,
            };
            let report = CountReport {
                l: ell,
                q,
                count: record.count,
                method: record.method.as_str(),
                a1: json_number(record.a1()),
            };
            println!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
        Command::Scan {
            ell,
            bound,
            jobs,
            cache,
            out,
        } => {
            let cache = resolve_cache(cache, ell);
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(jobs) = jobs {
                builder = builder.num_threads(jobs);
            }
            let pool = builder.build()?;
            let (dataset, _) = pool.install(|| build_dataset(ell, bound, cache.as_deref()))?;
            match out {
                Some(path) => std::fs::write(path, dataset_csv(&dataset))?,
                None => print!("{}", dataset_csv(&dataset)),
            }
            Ok(())
        }
        Command::Group { ell, n } => single_threaded(move || cmd_group(ell, n)),
        Command::Moments { kind } => match kind {
            MomentsCommand::Theory { ell, nmax } => {
                single_threaded(move || cmd_theory(ell, nmax))
            }
            MomentsCommand::Numeric {
                ell,
                bound,
                nmax,
                restrict,
                cache,
            } => single_threaded(move || cmd_numeric(ell, bound, nmax, restrict, cache)),
            MomentsCommand::Mc {
                ell,
                samples,
                seed,
                kmax,
                nmax,
            } => single_threaded(move || cmd_mc(ell, samples, seed, kmax, nmax)),
        },
        Command::Hist {
            ell,
            bound,
            bins,
            filter,
            out,
            cache,
        } => single_threaded(move || cmd_hist(ell, bound, bins, filter, out, cache)),
    }
}

/// Run a command body on a single worker thread; only `scan` is parallel.
fn single_threaded(f: impl FnOnce() -> CmdResult + Send) -> CmdResult {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    pool.install(f)
}

fn cmd_group(ell: u64, n: Option<u64>) -> CmdResult {
    let data = exponent_set(ell)?;
    let n = match n {
        Some(n) => n,
        None => smallest_generator(ell)?,
    };
    let gamma = gamma_matrix_of(&data, n)?;
    let action = galois_action_of(&data, n)?;
    let conj = conjugate_alpha(&gamma, &data.e)?;
    let report = GroupReport {
        l: ell,
        n,
        n_is_generator: is_generator(ell, n)?,
        genus: data.params.genus,
        component_count: data.params.component_count,
        basis: data.forms.iter().map(|f| [f.a, f.b]).collect(),
        alpha_exponents: data.e.clone(),
        exponent_set: data.set(),
        galois_targets: action
            .targets
            .iter()
            .map(|t| TargetReport {
                exponent: t.exponent,
                conjugated: t.conjugated,
            })
            .collect(),
        gamma_blocks: gamma
            .nonzero_blocks()
            .into_iter()
            .map(|(row, col, tag)| BlockReport {
                row,
                col,
                block: tag.as_str(),
            })
            .collect(),
        is_symplectic: is_symplectic(&gamma),
        conjugation_matches_galois: conj == action.targets,
        component_order: component_order(&gamma)?,
        matrix_order: matrix_order(&gamma)?,
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_theory(ell: u64, nmax: u32) -> CmdResult {
    let mut entries = std::collections::BTreeMap::new();
    for n in 0..=nmax {
        let m = exact_a1_moment(ell, n)?;
        let text = if m.is_integer() {
            m.numer().to_string()
        } else {
            format!("{}/{}", m.numer(), m.denom())
        };
        entries.insert(n, text);
    }
    let report = TheoryReport {
        l: ell,
        moments: entries,
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_numeric(ell: u64, bound: u64, nmax: u32, restrict: bool, cache: Option<PathBuf>) -> CmdResult {
    let cache = resolve_cache(cache, ell);
    let (dataset, _) = build_dataset(ell, bound, cache.as_deref())?;
    let moments = numerical_moments(&dataset, nmax, restrict)?;
    let report = NumericReport {
        l: ell,
        bound,
        restrict,
        records: moments.records_used,
        moments: moments
            .values()
            .iter()
            .map(|(&n, &v)| (n, round_sig(v, 12)))
            .collect(),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_mc(ell: u64, samples: u64, seed: u64, kmax: usize, nmax: u32) -> CmdResult {
    let table = mc_moments(&McConfig {
        ell,
        k_max: kmax,
        n_max: nmax,
        samples,
        seed,
        component: None,
    })?;
    let mut moments = std::collections::BTreeMap::new();
    for k in 1..=kmax {
        let mut per_n = std::collections::BTreeMap::new();
        for n in 1..=nmax {
            per_n.insert(
                n,
                McEntry {
                    value: round_sig(table.mean(k, n), 12),
                    std_err: round_sig(table.std_err(k, n), 12),
                },
            );
        }
        moments.insert(k, per_n);
    }
    let report = McReport {
        l: ell,
        samples,
        seed,
        moments,
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_hist(
    ell: u64,
    bound: u64,
    bins: usize,
    filter: FilterArg,
    out: Option<PathBuf>,
    cache: Option<PathBuf>,
) -> CmdResult {
    let cache = resolve_cache(cache, ell);
    let (dataset, _) = build_dataset(ell, bound, cache.as_deref())?;
    let hist = histogram(&dataset, bins, filter.into())?;
    let is_svg = out
        .as_deref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    let text = if is_svg {
        hist_svg(&hist, bound)
    } else {
        hist_csv(&hist)
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Default cache path from `SATOTATE_CACHE_DIR` when none was given.
fn resolve_cache(cache: Option<PathBuf>, ell: u64) -> Option<PathBuf> {
    cache.or_else(|| {
        std::env::var_os(CACHE_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("a1-l{ell}.csv")))
    })
}

#[derive(Serialize)]
struct CountReport {
    l: u64,
    q: u64,
    count: u64,
    method: &'static str,
    a1: serde_json::Number,
}

#[derive(Serialize)]
struct GroupReport {
    l: u64,
    n: u64,
    n_is_generator: bool,
    genus: usize,
    component_count: usize,
    basis: Vec<[u64; 2]>,
    alpha_exponents: Vec<u64>,
    exponent_set: Vec<u64>,
    galois_targets: Vec<TargetReport>,
    gamma_blocks: Vec<BlockReport>,
    is_symplectic: bool,
    conjugation_matches_galois: bool,
    component_order: usize,
    matrix_order: usize,
}

#[derive(Serialize)]
struct TargetReport {
    exponent: u64,
    conjugated: bool,
}

#[derive(Serialize)]
struct BlockReport {
    row: usize,
    col: usize,
    block: &'static str,
}

#[derive(Serialize)]
struct TheoryReport {
    l: u64,
    moments: std::collections::BTreeMap<u32, String>,
}

#[derive(Serialize)]
struct NumericReport {
    l: u64,
    bound: u64,
    restrict: bool,
    records: usize,
    moments: std::collections::BTreeMap<u32, f64>,
}

#[derive(Serialize)]
struct McReport {
    l: u64,
    samples: u64,
    seed: u64,
    moments: std::collections::BTreeMap<usize, std::collections::BTreeMap<u32, McEntry>>,
}

#[derive(Serialize)]
struct McEntry {
    value: f64,
    std_err: f64,
}

/// Integer-valued results serialize as JSON integers (`"a1":0`), everything
/// else as floats.
fn json_number(x: f64) -> serde_json::Number {
    if x == x.trunc() && x.abs() < 1e15 {
        serde_json::Number::from(x as i64)
    } else {
        serde_json::Number::from_f64(x).expect("finite a1")
    }
}

/// Round to `digits` significant decimal digits.
fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

fn dataset_csv(dataset: &A1Dataset) -> String {
    let mut out = String::from("l,p,count\n");
    for r in &dataset.records {
        out.push_str(&format!("{},{},{}\n", dataset.ell, r.q, r.count));
    }
    out
}

fn hist_csv(hist: &satotate::ltrace::HistogramData) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, &count) in hist.counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            hist.edges[i],
            hist.edges[i + 1],
            count
        ));
    }
    out
}

/// Minimal static SVG bar chart: axes, bars, title. No interactivity.
fn hist_svg(hist: &satotate::ltrace::HistogramData, bound: u64) -> String {
    const W: f64 = 900.0;
    const H: f64 = 520.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 50.0;
    const MB: f64 = 50.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;
    let max_count = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let lo = hist.edges[0];
    let hi = *hist.edges.last().expect("at least two edges");
    let span = hi - lo;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">a1 histogram: l={}, bound={}, filter={}</text>\n",
        W / 2.0,
        hist.ell,
        bound,
        hist.filter.as_str()
    ));
    for (i, &count) in hist.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let x0 = ML + (hist.edges[i] - lo) / span * plot_w;
        let x1 = ML + (hist.edges[i + 1] - lo) / span * plot_w;
        let h = count as f64 / max_count * plot_h;
        svg.push_str(&format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\"/>\n",
            x0,
            MT + plot_h - h,
            (x1 - x0).max(0.5),
            h
        ));
    }
    svg.push_str(&format!(
        "  <line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MT + plot_h,
        W - MR,
        MT + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        MT + plot_h
    ));
    for i in 0..=4 {
        let v = lo + span * i as f64 / 4.0;
        let x = ML + plot_w * i as f64 / 4.0;
        svg.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{v}</text>\n",
            MT + plot_h + 18.0
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        ML - 6.0,
        MT + 4.0,
        max_count as u64
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">0</text>\n",
        ML - 6.0,
        MT + plot_h + 4.0
    ));
    svg.push_str("</svg>\n");
    svg
}
