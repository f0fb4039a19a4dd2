//! Command-line front end for star-quiver stability and iPCA estimation.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` usage error, `3` inconclusive.

pub mod config;
pub mod scan;

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use ipca_core::ipca_solver::{ipc_scores, read_csv, shape_header, solve_mle, FitStatus, MleOptions};
use ipca_core::lr_oracle::{lr_decide, Partition};
use ipca_core::quiver_core::DimensionVector;
use ipca_core::random_cert::{algorithm1, DEFAULT_ENTRY_BOUND, DEFAULT_TRIALS};
use ipca_core::stability_engine::{decide_equal_legs, decide_with, Certificate, DecideOptions};
use thiserror::Error;

use config::ConfigFile;
use scan::{non_convexity_witness, render_svg, scan_cone, to_csv, ScanConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "ipca", version, about = "Generic existence and uniqueness of iPCA via star-quiver stability")]
pub struct Cli {
    #[command(flatten)]
    pub flags: GlobalFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalFlags {
    /// File of key=value lines; keys are the long flag names.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random samples drawn by the randomized test.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Entries of random samples lie in [-bound, bound].
    #[arg(long, global = true)]
    pub bound: Option<i64>,
    /// Balance residual at which the likelihood solver stops.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Grid points per slice axis.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Largest entry of the integer vector each scanned ray is rounded to.
    #[arg(long, global = true)]
    pub denominator_cap: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub svg: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability type of a dimension vector, e.g. `decide 2 1 1 1 1`.
    Decide {
        /// Center dimension followed by the leg dimensions.
        #[arg(required = true, num_args = 1..)]
        dims: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Equal-legs verdicts as CSV with columns p,q,k,verdict,gamma.
    Table {
        #[arg(long, default_value_t = 6)]
        max_p: u64,
        #[arg(long, default_value_t = 6)]
        max_q: u64,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Positivity of a Littlewood-Richardson coefficient, e.g. `lr "2 | 2 ; 2,2"`.
    ///
    /// Factors are separated by `|`, the target follows `;`, parts are comma-separated.
    Lr {
        query: String,
        /// Number of rows of the general linear group; defaults to the longest listed partition.
        #[arg(long)]
        ambient: Option<usize>,
    },
    /// Flip-flop likelihood fit of a data file with header `p,q1,...,qk`.
    Mle { file: String },
    /// Randomized stabilizer test with its per-trial transcript.
    Certify {
        #[arg(required = true, num_args = 1..)]
        dims: Vec<String>,
    },
    /// Classify rays on a random 3-dimensional slice of the positive orthant.
    ///
    /// CSV columns: grid indices i,j,l; slice coordinates u,v,w; ambient
    /// coordinates x0..xk; primitive integer vector a0..ak (empty when a
    /// rounded entry is zero); verdict (or `outside`); deciding branch.
    ScanCone {
        #[arg(long)]
        k: Option<usize>,
        /// Half-width of the coordinate box in slice coordinates.
        #[arg(long)]
        extent: Option<f64>,
        /// Also search the scan for two stable rays whose sum is not stable.
        #[arg(long)]
        witness: bool,
    },
}

struct Settings {
    file: ConfigFile,
    flags: GlobalFlags,
}

impl Settings {
    fn new(flags: GlobalFlags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Settings { file, flags })
    }

    fn decide_options(&self) -> Result<DecideOptions, CliError> {
        let options = DecideOptions {
            trials: self.file.pick(self.flags.trials, "trials", DEFAULT_TRIALS)?,
            entry_bound: self.file.pick(self.flags.bound, "bound", DEFAULT_ENTRY_BOUND)?,
            seed: self.file.pick(self.flags.seed, "seed", 0)?,
            ..DecideOptions::default()
        };
        if options.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if options.entry_bound < 1 {
            return Err(usage("bound must be at least 1"));
        }
        Ok(options)
    }

    fn out(&self) -> Option<String> {
        self.file.pick_path(self.flags.out.clone(), "out")
    }
}

fn parse_dims(dims: &[String]) -> Result<DimensionVector, CliError> {
    dims.join(" ").parse().map_err(usage)
}

fn emit(settings: &Settings, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match settings.out() {
        Some(path) => std::fs::write(&path, text).map_err(|e| io(format!("{path}: {e}"))),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

/// Runs one parsed command, writing results to `out` and notes to `err`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let settings = Settings::new(cli.flags)?;
    match cli.command {
        Command::Decide { dims, json } => cmd_decide(&settings, &dims, json, out),
        Command::Table { max_p, max_q, k } => cmd_table(&settings, max_p, max_q, k, out),
        Command::Lr { query, ambient } => cmd_lr(&query, ambient, out),
        Command::Mle { file } => cmd_mle(&settings, &file, out),
        Command::Certify { dims } => cmd_certify(&settings, &dims, out),
        Command::ScanCone { k, extent, witness } => cmd_scan_cone(&settings, k, extent, witness, out, err),
    }
}

/// Parses `args` (including the program name) and runs; usage errors map to exit code 2.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "ipca: {e}");
            e.exit_code()
        }
    }
}

fn cmd_decide(settings: &Settings, dims: &[String], json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let alpha = parse_dims(dims)?;
    let result = decide_with(&alpha, &settings.decide_options()?);
    let inconclusive = matches!(&result.certificate, Certificate::Randomized { report, .. } if !report.unanimous);
    let text = if json {
        serde_json::to_string_pretty(&result).map_err(io)? + "\n"
    } else {
        let mut t = format!(
            "alpha: {alpha}\nverdict: {}\ninterpretation: {}\nbranch: {}\nrandomized: {}\n",
            result.verdict,
            result.verdict.interpretation(),
            result.branch,
            result.randomized
        );
        if inconclusive {
            t.push_str("status: inconclusive (random trials disagreed)\n");
        }
        t
    };
    emit(settings, &text, out)?;
    Ok(if inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK })
}

fn cmd_table(
    settings: &Settings,
    max_p: u64,
    max_q: u64,
    k: Option<u64>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let k = settings.file.pick(k, "k", 4)?;
    if k == 0 || max_p == 0 || max_q == 0 {
        return Err(usage("k, max-p and max-q must be positive"));
    }
    let mut text = String::from("p,q,k,verdict,gamma\n");
    for p in 1..=max_p {
        for q in 1..=max_q {
            let v = decide_equal_legs(p, q, k);
            let gamma = ipca_core::quiver_core::gamma(p, q, k);
            text.push_str(&format!("{p},{q},{k},{},{gamma}\n", v.verdict));
        }
    }
    emit(settings, &text, out)?;
    Ok(EXIT_OK)
}

/// Parses `"l1 | l2 | ... ; nu"` into factors and target, padded to a common ambient length.
pub fn parse_lr_query(query: &str, ambient: Option<usize>) -> Result<(Vec<Partition>, Partition, usize), CliError> {
    let (factors, target) =
        query.split_once(';').ok_or_else(|| usage("expected factors separated by `|`, then `;` and the target"))?;
    let factors: Vec<Partition> = factors.split('|').map(|f| f.parse().map_err(usage)).collect::<Result<_, _>>()?;
    let target: Partition = target.parse().map_err(usage)?;
    let longest = factors.iter().chain(std::iter::once(&target)).map(|p| p.length()).max().unwrap_or(0);
    let m = ambient.unwrap_or(longest.max(1));
    let pad = |p: &Partition| p.with_ambient(m).map_err(usage);
    let factors = factors.iter().map(pad).collect::<Result<Vec<_>, _>>()?;
    let target = pad(&target)?;
    Ok((factors, target, m))
}

fn cmd_lr(query: &str, ambient: Option<usize>, out: &mut dyn Write) -> Result<i32, CliError> {
    let (factors, target, m) = parse_lr_query(query, ambient)?;
    let decision = lr_decide(&factors, &target, m).map_err(usage)?;
    let word = if decision.positive { "positive" } else { "zero" };
    writeln!(out, "{word}").map_err(io)?;
    Ok(EXIT_OK)
}

fn cmd_mle(settings: &Settings, path: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
    let data = read_csv(&text).map_err(usage)?;
    let options = MleOptions {
        tol: settings.file.pick(settings.flags.tol, "tol", MleOptions::default().tol)?,
        max_iter: settings.file.pick(settings.flags.max_iter, "max-iter", MleOptions::default().max_iter)?,
        ..MleOptions::default()
    };
    let (estimate, report) = solve_mle(&data, &options).map_err(usage)?;
    let mut t = format!(
        "shape: {}\nstatus: {:?}\niterations: {}\nlog-likelihood: {:.12e}\nresidual: {:.3e}\n",
        shape_header(&data),
        report.status,
        report.iterations,
        report.log_likelihood,
        report.residual
    );
    match report.status {
        FitStatus::Converged => {
            t.push_str("theta:\n");
            for r in 0..estimate.theta.nrows() {
                let row: Vec<String> = estimate.theta.row(r).iter().map(|v| format!("{v:.9}")).collect();
                t.push_str(&format!("  {}\n", row.join(",")));
            }
            t.push_str("scores (ascending eigenvalue):\n");
            for s in ipc_scores(&estimate) {
                let row: Vec<String> = s.iter().map(|v| format!("{v:.9}")).collect();
                t.push_str(&format!("  {}\n", row.join(",")));
            }
        }
        FitStatus::Diverged => {
            let reason = report.divergence.as_deref().unwrap_or("divergence");
            t.push_str(&format!(
                "advisory: model unbounded ({reason}); the maximum-likelihood estimate does not exist\n"
            ));
        }
        FitStatus::BudgetExhausted => {
            t.push_str("advisory: no convergence within the iteration budget\n");
        }
    }
    emit(settings, &t, out)?;
    Ok(EXIT_OK)
}

fn cmd_certify(settings: &Settings, dims: &[String], out: &mut dyn Write) -> Result<i32, CliError> {
    let alpha = parse_dims(dims)?;
    let options = settings.decide_options()?;
    let report = algorithm1(&alpha, options.trials, options.entry_bound, options.seed).map_err(usage)?;
    let mut t = format!("alpha: {alpha}\n");
    for trial in &report.trials {
        let kernel = trial.kernel_dim.map_or("-".to_string(), |d| d.to_string());
        t.push_str(&format!(
            "trial seed={} semistable={} kernel_dim={kernel} answer={:?}\n",
            trial.seed, trial.semistable, trial.answer
        ));
    }
    t.push_str(&format!("answer: {:?}\nunanimous: {}\n", report.answer, report.unanimous));
    emit(settings, &t, out)?;
    Ok(if report.unanimous { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cmd_scan_cone(
    settings: &Settings,
    k: Option<usize>,
    extent: Option<f64>,
    witness: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let file = &settings.file;
    let flags = &settings.flags;
    let defaults = ScanConfig::new(5, 0);
    let config = ScanConfig {
        k: file.pick(k, "k", defaults.k)?,
        seed: file.pick(flags.seed, "seed", defaults.seed)?,
        resolution: file.pick(flags.resolution, "resolution", defaults.resolution)?,
        extent: file.pick(extent, "extent", defaults.extent)?,
        denominator_cap: file.pick(flags.denominator_cap, "denominator-cap", defaults.denominator_cap)?,
        decide: settings.decide_options()?,
    };
    let result = scan_cone(&config)?;
    emit(settings, &to_csv(&result), out)?;
    if let Some(path) = file.pick_path(flags.svg.clone(), "svg") {
        std::fs::write(&path, render_svg(&result)).map_err(|e| io(format!("{path}: {e}")))?;
    }
    writeln!(err, "scanned {} points in the positive orthant", result.rows.len()).map_err(io)?;
    if witness {
        match non_convexity_witness(&result) {
            Some(w) => writeln!(
                err,
                "non-convexity witness: {} and {} are stable, {} is {}",
                w.first, w.second, w.midpoint, w.midpoint_verdict
            ),
            None => writeln!(err, "no non-convexity witness on this grid"),
        }
        .map_err(io)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lr_query_parsing() {
        let (factors, target, m) = parse_lr_query("2 | 2 ; 2,2", None).unwrap();
        assert_eq!(m, 2);
        assert_eq!(factors.len(), 2);
        assert_eq!(target.parts(), &[2, 2]);
        assert!(parse_lr_query("2 | 2", None).is_err());
        assert!(parse_lr_query("1,2 ; 3", None).is_err());
    }
}
