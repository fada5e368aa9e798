use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mflab::scenario::{Expect, Job, PdeJob, Scenario};
use mflab::{run_file, run_scenario, Error, RunOptions, Summary};
use mflab_core::pde::{parse_expr, parse_pde_on, Domain, EpsPolicy, Variant};
use mflab_core::wasserstein::w1;
use mflab_core::{DiscreteMeasure, Metric};

/// Convergence sweeps and certificate suites for mean-field particle systems.
#[derive(Parser, Debug)]
#[command(name = "mflab", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Solve a PDE with the mollified particle scheme.
    Pde {
        /// e.g. "dt y = dx^2 y"
        #[arg(long)]
        pde: String,
        /// Particle counts, comma separated.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// `C=<value>` for eps_N = (C / ln N)^(1/(p+2)).
        #[arg(long = "eps-schedule", conflicts_with = "eps")]
        eps_schedule: Option<String>,
        /// Fixed eps for every N.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "t", default_value_t = 0.25)]
        t: f64,
        /// Largest RK4 step; smaller steps are used when stability needs them.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Initial datum, an expression in x.
        #[arg(long, default_value = "sin(2*pi*x)")]
        y0: String,
        #[arg(long, default_value = "torus")]
        domain: String,
        /// Use the Gaussian kernel variant (interval domain only).
        #[arg(long)]
        gaussian: bool,
    },
    /// Exact W1 between two measures stored as `weight,x,xi_1,..` CSV.
    W1 {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "interval")]
        metric: String,
    },
}

fn print_summary(s: &Summary) {
    println!("{s}");
    for n in &s.notes {
        eprintln!("  {n}");
    }
}

/// Shows a parse error under the offending input.
fn caret(input: &str, err: mflab_core::Error) -> Error {
    match err {
        mflab_core::Error::Parse { column, message } => {
            Error::Usage(format!("{input}\n{}^\nparse error at column {column}: {message}", " ".repeat(column.saturating_sub(1))))
        }
        other => other.into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn pde_command(
    pde: &str,
    n: Vec<usize>,
    eps_schedule: Option<String>,
    eps: Option<f64>,
    t: f64,
    dt: f64,
    y0: &str,
    domain: &str,
    gaussian: bool,
    opts: &RunOptions,
) -> mflab::Result<Summary> {
    let domain = Domain::parse(domain)?;
    let spec = parse_pde_on(pde, domain).map_err(|e| caret(pde, e))?;
    let policy = match (eps_schedule, eps) {
        (Some(s), None) => {
            let c = s.trim().strip_prefix("C=").unwrap_or(s.trim());
            EpsPolicy::Schedule(c.parse().map_err(|_| Error::Usage(format!("--eps-schedule expects C=<number>, got '{s}'")))?)
        }
        (None, Some(e)) => EpsPolicy::Fixed(e),
        _ => return Err(Error::Usage("give one of --eps-schedule C=<value> or --eps <value>".into())),
    };
    let job = PdeJob {
        spec,
        variant: if gaussian { Variant::Gaussian } else { Variant::Polynomial },
        policy,
        n_list: n,
        y0: parse_expr(y0, &["x"]).map_err(|e| caret(y0, e))?,
        t_end: t,
        dt,
    };
    let expect = Expect { monotone: job.n_list.len() > 1, ..Expect::default() };
    let s = Scenario { name: "pde".into(), seed: 0, output: None, expect, job: Job::Pde(job) };
    let sum = run_scenario(&s, opts)?;
    for f in &sum.files {
        if let Ok(text) = std::fs::read_to_string(f) {
            if f.to_string_lossy().ends_with("_schedule.csv") {
                print!("{text}");
            }
        }
    }
    Ok(sum)
}

fn w1_command(a: &Path, b: &Path, metric: &str) -> mflab::Result<f64> {
    let metric = Metric::parse(metric)?;
    let ma = DiscreteMeasure::read_csv(a)?;
    let mb = DiscreteMeasure::read_csv(b)?;
    Ok(w1(&ma, &mb, metric)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { out_dir: cli.out.clone(), seed: cli.seed, threads: cli.threads };
    let result = match cli.cmd {
        Cmd::Run { scenarios } => {
            let mut all_ok = true;
            for path in &scenarios {
                match run_file(path, &opts) {
                    Ok(s) => {
                        print_summary(&s);
                        all_ok &= s.ok();
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            Ok(all_ok)
        }
        Cmd::Pde { pde, n, eps_schedule, eps, t, dt, y0, domain, gaussian } => {
            pde_command(&pde, n, eps_schedule, eps, t, dt, &y0, &domain, gaussian, &opts).map(|s| {
                print_summary(&s);
                s.ok()
            })
        }
        Cmd::W1 { a, b, metric } => w1_command(&a, &b, &metric).map(|d| {
            println!("{d}");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
