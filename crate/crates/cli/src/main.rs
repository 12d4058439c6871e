use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wonc_core::corpus::{generate_corpus, CorpusSpec, Ensemble};
use wonc_core::io::{parse_norm_input, MatrixJson};
use wonc_core::norms::{banach_renorm, luxemburg_norm, phi_moment, weak_lp_norm, weak_orlicz_norm, weak_orlicz_norm_lambda};
use wonc_core::orlicz::{DEFAULT_GRID_MAX, DEFAULT_GRID_MIN, DEFAULT_GRID_POINTS};
use wonc_core::report::{Verdict, VerificationReport};
use wonc_core::suites::{self, baseline_name, envelope_from_baseline, run_suite, RegimeChoice, Suite, SuiteOptions};
use wonc_core::{Error, Exec, OrliczFunction};

#[derive(Parser)]
#[command(name = "wonc", version, about = "Weak Orlicz norms and noncommutative martingale inequality checks")]
struct Cli {
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Run every sweep on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one functional of a matrix or spectrum given as JSON.
    Norm {
        #[arg(long)]
        phi: OrliczFunction,
        /// Matrix JSON ({"n","w","re","im"}) or spectrum JSON ({"values","weights"}).
        #[arg(long)]
        matrix: PathBuf,
        /// weak, lambda, moment, luxemburg, banach or weak-lp:<p>.
        #[arg(long, default_value = "weak")]
        form: String,
    },
    /// Matuszewska-Orlicz type indices of Φ, closed form and grid estimate.
    Indices {
        #[arg(long)]
        phi: OrliczFunction,
        #[arg(long, default_value_t = DEFAULT_GRID_MIN)]
        grid_min: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_MAX)]
        grid_max: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
    },
    /// Run a verification suite and write a report.
    Verify(VerifyArgs),
    /// Write a seeded corpus as one matrix JSON file per instance.
    Gen {
        /// Corpus spec JSON: {"seed","instances","dim","ensemble","scale"}.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// norms, interp, transform, stein, bg, khintchine, fourier or indices.
    suite: String,
    #[arg(long)]
    phi: OrliczFunction,
    #[arg(long, default_value_t = suites::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = suites::DEFAULT_INSTANCES)]
    instances: usize,
    #[arg(long, default_value_t = suites::DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value = "complex_ginibre")]
    ensemble: Ensemble,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Operator for the interp suite: hardy, identity, adjoint or condexp:<k>.
    #[arg(long, default_value = "hardy")]
    op: String,
    #[arg(long, default_value_t = suites::DEFAULT_LEVELS)]
    levels: usize,
    #[arg(long, default_value_t = suites::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value = "auto")]
    regime: RegimeChoice,
    #[arg(long, default_value_t = suites::DEFAULT_DEGREE)]
    degree: usize,
    /// Evaluation budget of the column/row decomposition search.
    #[arg(long, default_value_t = suites::DEFAULT_BUDGET)]
    budget: usize,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-instance records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory of committed baseline reports.
    #[arg(long, env = "WONC_BASELINE_DIR")]
    baseline_dir: Option<PathBuf>,
    /// Skip baseline lookup (used to regenerate baselines).
    #[arg(long)]
    no_envelope: bool,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::PreconditionViolation(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.workers {
        Some(0) => Err(Error::InvalidArgument("--workers must be at least 1".into()).into()),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building worker pool")?;
            pool.install(|| dispatch(cli.command, exec))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            eprintln!("warning: built without the parallel feature, --workers ignored");
            dispatch(cli.command, exec)
        }
        None => dispatch(cli.command, exec),
    }
}

fn dispatch(command: Command, exec: Exec) -> anyhow::Result<u8> {
    match command {
        Command::Norm { phi, matrix, form } => norm(&phi, &matrix, &form),
        Command::Indices { phi, grid_min, grid_max, points } => indices(&phi, grid_min, grid_max, points),
        Command::Verify(args) => verify(args, exec),
        Command::Gen { spec, out } => gen(&spec, &out, exec),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn norm(phi: &OrliczFunction, matrix: &Path, form: &str) -> anyhow::Result<u8> {
    let s = parse_norm_input(&read(matrix)?)?;
    let result = match form {
        "weak" => weak_orlicz_norm(&s, phi),
        "lambda" => weak_orlicz_norm_lambda(&s, phi),
        "moment" => phi_moment(&s, phi),
        "luxemburg" => luxemburg_norm(&s, phi),
        "banach" => banach_renorm(&s, phi),
        other => match other.strip_prefix("weak-lp:") {
            Some(p) => {
                let p: f64 = if p == "inf" {
                    f64::INFINITY
                } else {
                    p.parse().map_err(|_| Error::InvalidArgument(format!("bad exponent {p:?}")))?
                };
                weak_lp_norm(&s, p)?
            }
            None => return Err(Error::InvalidArgument(format!("unknown norm form {other:?}")).into()),
        },
    };
    println!("{}", serde_json::to_string(&result)?);
    Ok(0)
}

fn indices(phi: &OrliczFunction, grid_min: f64, grid_max: f64, points: usize) -> anyhow::Result<u8> {
    let estimate = phi.indices_estimate(grid_min, grid_max, points)?;
    let out = json!({
        "phi": phi.to_string(),
        "closed_form": phi.indices_closed_form(),
        "estimate": estimate,
        "regime": phi.indices().regime(),
        "delta2": phi.delta2_check(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

/// Without an explicit directory, fall back to the baselines shipped in the
/// source tree when they are present.
fn baseline_dir(explicit: Option<PathBuf>) -> Option<PathBuf> {
    explicit.or_else(|| {
        let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/baselines");
        p.is_dir().then_some(p)
    })
}

fn verify(args: VerifyArgs, exec: Exec) -> anyhow::Result<u8> {
    let suite: Suite = args.suite.parse()?;
    let opts = SuiteOptions {
        suite,
        phi: args.phi,
        corpus: CorpusSpec {
            seed: args.seed,
            instances: args.instances,
            dim: args.dim,
            ensemble: args.ensemble,
            scale: args.scale,
        },
        op: args.op,
        levels: args.levels,
        k: args.k,
        regime: args.regime,
        degree: args.degree,
        budget: args.budget,
        exec,
    };
    let mut report = run_suite(&opts)?;
    if !args.no_envelope {
        apply_baseline(&mut report, &opts, baseline_dir(args.baseline_dir))?;
    }
    let text = report.to_canonical_json()?;
    match &args.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.csv {
        let (header, rows) = report.csv_table();
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    for (name, c) in report.checks.iter().filter(|(_, c)| c.violations > 0) {
        eprintln!("check {name}: {} of {} violated, worst {}", c.violations, c.evaluated, c.worst);
    }
    eprintln!("verdict: {}", report.verdict);
    Ok(match report.verdict {
        Verdict::Fail => 1,
        Verdict::Pass | Verdict::Informative => 0,
    })
}

fn apply_baseline(report: &mut VerificationReport, opts: &SuiteOptions, dir: Option<PathBuf>) -> anyhow::Result<()> {
    let Some(dir) = dir else { return Ok(()) };
    let path = dir.join(baseline_name(opts));
    if !path.is_file() {
        return Ok(());
    }
    let text = read(&path)?;
    if report.to_canonical_json()? == text {
        eprintln!("reproduced baseline {}", path.display());
    } else {
        eprintln!("note: output differs from baseline {}", path.display());
    }
    let baseline = VerificationReport::from_json(&text)?;
    let source = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    report.apply_envelope(envelope_from_baseline(opts.suite, &baseline, &source));
    Ok(())
}

fn gen(spec_path: &Path, out: &Path, exec: Exec) -> anyhow::Result<u8> {
    let spec: CorpusSpec = serde_json::from_str(&read(spec_path)?)
        .map_err(|e| Error::InvalidArgument(format!("corpus spec: {e}")))?;
    let corpus = generate_corpus(&spec, exec)?;
    if out.exists() && !out.is_dir() {
        bail!("{} exists and is not a directory", out.display());
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let width = (spec.instances - 1).to_string().len().max(4);
    for (i, x) in corpus.iter().enumerate() {
        let text = serde_json::to_string(&MatrixJson::from_tracial(x))?;
        write(&out.join(format!("instance_{i:0width$}.json")), &(text + "\n"))?;
    }
    write(&out.join("spec.json"), &(serde_json::to_string_pretty(&spec)? + "\n"))?;
    eprintln!("wrote {} matrices to {}", corpus.len(), out.display());
    Ok(0)
}
