//! `cubefreq`: command-line front end for the cubefreq experiments.
//!
//! Exit codes: 0 success or feasible, 1 infeasible or degenerate, 2 malformed
//! input, 3 scale limit exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cubefreq::arrangements::chain_counts;
use cubefreq::experiments::{fraction_exact, fraction_monte_carlo, fraction_rows_csv, shared_low_spectrum};
use cubefreq::format::{parse_arrangement, parse_certificate, parse_real_table, parse_sign_table, write_certificate};
use cubefreq::sampling::{monte_carlo_lower_bound, selector_tail_experiment, tenth_of_cube, threshold_d};
use cubefreq::witness::{
    build_fprime, distribution_witness, find_sign_witness, find_sign_witness_fast, marginal_polytope_range,
    verify_certificate,
};
use cubefreq::{DistributionTable, Error, FunctionTable, Mode, Rational, Scalar};
use serde_json::json;

/// Largest `p` for which exact arithmetic is the default.
const EXACT_DEFAULT_MAX_P: usize = 8;

#[derive(Parser, Debug)]
#[command(name = "cubefreq", version, about = "Low-frequency non-uniqueness experiments on the discrete cube")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Arithmetic: exact rationals or double precision. Defaults to exact for p <= 8.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Worker threads for independent trials (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find h in H with f*h > 0 and emit the certificate f' = f - h/max|h|.
    Witness {
        /// Sign table file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Degree: H is spanned by Walsh functions of degree above d.
        #[arg(long)]
        d: usize,
    },
    /// Re-check a certificate against the sign table it was built for.
    Verify {
        /// Sign table file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Certificate file.
        #[arg(long)]
        cert: PathBuf,
        /// Degree to check; defaults to the certificate's own.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Range of Pr{Y = theta0} over distributions sharing the low-dimensional
    /// marginals of X, or a witness Y for a uniform support.
    Polytope {
        /// Distribution file (real table of probabilities).
        #[arg(long = "in", conflicts_with = "support", required_unless_present = "support")]
        input: Option<PathBuf>,
        /// Comma-separated support indices of a uniform X; requires --p.
        #[arg(long, value_delimiter = ',', requires = "p")]
        support: Option<Vec<usize>>,
        /// Cube dimension of the support.
        #[arg(long)]
        p: Option<usize>,
        /// Degree: H is spanned by Walsh functions of degree above d.
        #[arg(long)]
        d: usize,
        /// Point to query (default: every point).
        #[arg(long)]
        theta0: Option<usize>,
    },
    /// Fraction of sign tables admitting a witness.
    Fraction {
        /// Cube dimension.
        #[arg(long)]
        p: usize,
        /// Degree (default: every d in 0..=p).
        #[arg(long)]
        d: Option<usize>,
        /// Sample this many random tables instead of enumerating all of them.
        #[arg(long)]
        trials: Option<u64>,
        /// Also count sign tables sharing their low spectrum with another one.
        #[arg(long)]
        shared: bool,
    },
    /// Regions, intersection subspaces and resilient subsets of an arrangement.
    Arrangement {
        /// Arrangement file.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Extreme eigenvalues of Gram matrices of random point sets, or the
    /// selector tail experiment.
    Sampling {
        /// Cube dimension.
        #[arg(long)]
        p: usize,
        /// Degree: H is spanned by Walsh functions of degree above d.
        #[arg(long)]
        d: usize,
        /// Number of independent trials.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Where to write the JSON summary when the report is CSV (default: stderr).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Run the selector tail experiment instead.
        #[arg(long)]
        selector: bool,
    },
    /// Largest d with sum_{i<=d} C(p, i) < 0.09 * 2^p.
    Threshold {
        /// Cube dimension.
        #[arg(long)]
        p: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_scale_limit() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult = std::result::Result<Outcome, Failure>;

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Success,
    Negative,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.global.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn emit(global: &Global, text: &str) -> std::result::Result<(), Failure> {
    match &global.out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn mode_for(global: &Global, p: usize) -> Mode {
    global.mode.unwrap_or(if p <= EXACT_DEFAULT_MAX_P { Mode::Exact } else { Mode::Double })
}

/// Reads the `p=` header so the arithmetic mode can be chosen before parsing.
fn peek_p(text: &str) -> std::result::Result<usize, Failure> {
    parse_sign_table::<f64>(text)
        .map(|f| f.p())
        .or_else(|_| parse_real_table::<f64>(text).map(|f| f.p()))
        .map_err(Failure::from)
}

fn run(cli: &Cli) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::Witness { input, d } => {
            let text = read(input)?;
            let p = peek_p(&text)?;
            match mode_for(g, p) {
                Mode::Exact => witness::<Rational>(g, &text, *d),
                Mode::Double => witness::<f64>(g, &text, *d),
            }
        }
        Command::Verify { input, cert, d } => {
            let f_text = read(input)?;
            let c_text = read(cert)?;
            let p = peek_p(&f_text)?;
            match mode_for(g, p) {
                Mode::Exact => verify::<Rational>(g, &f_text, &c_text, *d),
                Mode::Double => verify::<f64>(g, &f_text, &c_text, *d),
            }
        }
        Command::Polytope {
            input,
            support,
            p,
            d,
            theta0,
        } => {
            if let Some(support) = support {
                let p = p.expect("clap enforces --p with --support");
                return match mode_for(g, p) {
                    Mode::Exact => polytope_support::<Rational>(g, p, support, *d),
                    Mode::Double => polytope_support::<f64>(g, p, support, *d),
                };
            }
            let input = input.as_ref().expect("clap enforces --in or --support");
            let text = read(input)?;
            let p = peek_p(&text)?;
            match mode_for(g, p) {
                Mode::Exact => polytope_range::<Rational>(g, &text, *d, *theta0),
                Mode::Double => polytope_range::<f64>(g, &text, *d, *theta0),
            }
        }
        Command::Fraction { p, d, trials, shared } => fraction(g, *p, *d, *trials, *shared),
        Command::Arrangement { input } => {
            let text = read(input)?;
            let arr = parse_arrangement::<Rational>(&text)?;
            let counts = chain_counts(&arr)?;
            let body = match g.format {
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "regions": counts.regions,
                        "intersection_subspaces": counts.intersection_subspaces,
                        "resilient_subsets": counts.resilient_subsets,
                        "buck_bound": counts.buck_bound,
                        "chain_holds": counts.chain_holds(),
                    })
                ),
                Format::Csv => format!(
                    "regions,intersection_subspaces,resilient_subsets,buck_bound,chain_holds\n{},{},{},{},{}\n",
                    counts.regions,
                    counts.intersection_subspaces,
                    counts.resilient_subsets,
                    counts.buck_bound,
                    counts.chain_holds()
                ),
            };
            emit(g, &body)?;
            Ok(Outcome::Success)
        }
        Command::Sampling {
            p,
            d,
            trials,
            summary,
            selector,
        } => {
            if *selector {
                return selector_report(g, *p, *d, *trials);
            }
            let report = monte_carlo_lower_bound(*p, *d, *trials, g.seed)?;
            match g.format {
                Format::Json => {
                    let value = json!({ "summary": report.summary(), "records": report.records });
                    emit(g, &format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")))?;
                }
                Format::Csv => {
                    emit(g, &report.to_csv()?)?;
                    let s = report.summary_json();
                    match summary {
                        Some(path) => fs::write(path, s + "\n").map_err(|e| io_failure(path, e))?,
                        None => eprintln!("{s}"),
                    }
                }
            }
            Ok(Outcome::Success)
        }
        Command::Threshold { p } => {
            let d = threshold_d(*p);
            let body = match g.format {
                Format::Json => format!("{}\n", json!({ "p": p, "threshold_d": d })),
                Format::Csv => d.map_or_else(|| "none\n".to_string(), |d| format!("{d}\n")),
            };
            emit(g, &body)?;
            Ok(Outcome::Success)
        }
    }
}

fn witness<S: Scalar>(g: &Global, text: &str, d: usize) -> CliResult {
    let f: FunctionTable<S> = parse_sign_table(text)?;
    let h = match S::MODE {
        Mode::Exact => find_sign_witness(&f, d)?,
        Mode::Double => find_sign_witness_fast(&f.to_f64(), d)?.map(|h| h.map(|v| S::from_f64(*v).expect("finite"))),
    };
    let Some(h) = h else {
        eprintln!("infeasible: no h in H with f*h > 0 at d={d}");
        return Ok(Outcome::Negative);
    };
    let cert = build_fprime(&f, &h, d)?;
    let report = verify_certificate(&f, &cert, d, &S::tolerance())?;
    if !report.accepted {
        return Err(Failure {
            code: 2,
            message: format!("internal: certificate failed re-verification: {:?}", report.failures),
        });
    }
    emit(g, &write_certificate(&cert))?;
    Ok(Outcome::Success)
}

fn verify<S: Scalar>(g: &Global, f_text: &str, c_text: &str, d: Option<usize>) -> CliResult {
    let f: FunctionTable<S> = parse_sign_table(f_text)?;
    let cert = parse_certificate::<S>(c_text)?;
    let d = d.unwrap_or(cert.d);
    let report = verify_certificate(&f, &cert, d, &S::tolerance())?;
    let failures: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
    let body = match g.format {
        Format::Json => format!(
            "{}\n",
            json!({
                "accepted": report.accepted,
                "margin": report.margin.to_text(),
                "low_freq_residual": report.low_freq_residual.to_text(),
                "failures": failures,
            })
        ),
        Format::Csv => format!(
            "accepted,margin,low_freq_residual,failures\n{},{},{},\"{}\"\n",
            report.accepted,
            report.margin.to_text(),
            report.low_freq_residual.to_text(),
            failures.join("; ")
        ),
    };
    emit(g, &body)?;
    Ok(if report.accepted { Outcome::Success } else { Outcome::Negative })
}

fn polytope_range<S: Scalar>(g: &Global, text: &str, d: usize, theta0: Option<usize>) -> CliResult {
    let table: FunctionTable<S> = parse_real_table(text)?;
    let x = DistributionTable::from_table(table)?;
    let points: Vec<usize> = match theta0 {
        Some(t) => vec![t],
        None => (0..1usize << x.p()).collect(),
    };
    let mut rows = Vec::with_capacity(points.len());
    let mut all_degenerate = true;
    for t in points {
        let (lo, hi) = marginal_polytope_range(&x, d, t)?;
        let width = hi.clone() - &lo;
        all_degenerate &= width.is_negligible();
        rows.push((t, lo, hi, width));
    }
    let body = match g.format {
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(t, lo, hi, w)| json!({"theta0": t, "lo": lo.to_text(), "hi": hi.to_text(), "width": w.to_text()}))
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&items).expect("serializable"))
        }
        Format::Csv => {
            let mut s = String::from("theta0,lo,hi,width\n");
            for (t, lo, hi, w) in &rows {
                s += &format!("{t},{},{},{}\n", lo.to_text(), hi.to_text(), w.to_text());
            }
            s
        }
    };
    emit(g, &body)?;
    Ok(if all_degenerate { Outcome::Negative } else { Outcome::Success })
}

fn polytope_support<S: Scalar>(g: &Global, p: usize, support: &[usize], d: usize) -> CliResult {
    match distribution_witness::<S>(p, support, d)? {
        Some(y) => {
            emit(g, &cubefreq::format::write_real_table(y.as_table()))?;
            Ok(Outcome::Success)
        }
        None => {
            eprintln!("degenerate: no distribution strictly inside (0, 1/|S|) shares the marginals at d={d}");
            Ok(Outcome::Negative)
        }
    }
}

fn fraction(g: &Global, p: usize, d: Option<usize>, trials: Option<u64>, shared: bool) -> CliResult {
    let degrees: Vec<usize> = match d {
        Some(d) => vec![d],
        None => (0..=p).collect(),
    };
    if shared {
        let rows = degrees
            .iter()
            .map(|&d| shared_low_spectrum(p, d))
            .collect::<cubefreq::Result<Vec<_>>>()?;
        let body = match g.format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows).expect("serializable")),
            Format::Csv => {
                let mut s = String::from("p,d,tables,classes,shared_tables,largest_class\n");
                for r in &rows {
                    s += &format!("{},{},{},{},{},{}\n", r.p, r.d, r.tables, r.classes, r.shared_tables, r.largest_class);
                }
                s
            }
        };
        emit(g, &body)?;
        return Ok(Outcome::Success);
    }
    let rows = degrees
        .iter()
        .map(|&d| match trials {
            Some(n) => fraction_monte_carlo(p, d, n, g.seed, mode_for(g, p)),
            None => fraction_exact(p, d),
        })
        .collect::<cubefreq::Result<Vec<_>>>()?;
    let body = match g.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&rows).expect("serializable")),
        Format::Csv => fraction_rows_csv(&rows)?,
    };
    emit(g, &body)?;
    Ok(Outcome::Success)
}

fn selector_report(g: &Global, p: usize, d: usize, trials: u64) -> CliResult {
    let n = tenth_of_cube(p);
    let exp = selector_tail_experiment(p, d, n, trials, g.seed, None)?;
    let body = match g.format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "k": exp.k,
                "delta": exp.delta,
                "M": exp.m,
                "sigma2": exp.sigma2,
                "trials": trials,
                "seed": g.seed,
                "bound_holds": exp.bound_holds(),
                "points": exp.points,
            }))
            .expect("serializable")
        ),
        Format::Csv => {
            let mut s = String::from("t,empirical,bound,bound_clamped\n");
            for pt in &exp.points {
                s += &format!("{},{},{},{}\n", pt.t, pt.empirical, pt.bound, pt.bound_clamped);
            }
            s
        }
    };
    emit(g, &body)?;
    Ok(Outcome::Success)
}
