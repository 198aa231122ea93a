//! `plfilter` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{detect_crossover, fit_inplay_dof, mode_crossover_temperature};
use crate::error::{Error, Result};
use crate::geometry::{geodesic_displacement, geodesic_path, path_length, FilteredSpace, GeodesicSpec};
use crate::io::{
    fmt_f64, read_problem_file, read_sweep_csv, write_landau_csv, write_sweep_csv, write_table, write_transform_csv,
};
use crate::model::{Objective, ProblemSpec};
use crate::sampler::{beta_sweep, brute_force_z, landau_histogram, metropolis_chain, Bins, ChainConfig};
use crate::transform::{lp_mode_sum, qp_mode_sum, qp_partition_function, volume_model_z, MomentReport, VolumeModel};

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  invalid argument or value (also command-line usage errors)
   3  problem file schema or JSON error
   4  I/O or CSV error
  10  feasible region is empty
  11  feasible region is unbounded
  12  feasible region is not full-dimensional
  20  sampler found no feasible starting point
  21  too few samples for an estimate
  22  grid quadrature beyond 3 dimensions
  30  too few sweep rows for a fit
  31  no crossover temperature found

Environment:
  PLFILTER_THREADS  maximum number of threads used by sampler chains
  RUST_LOG          log level (warn by default)";

#[derive(Debug, Parser)]
#[command(name = "plfilter", version, about = "Laplace-transform filtering of optimization problems", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input file (problem JSON, sweep CSV or parameter JSON, by command).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Vec<f64>,
    /// Log-spaced β grid `start:stop:count`.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Chains {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Metropolis steps per chain and β, burn-in included.
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 4_000)]
    pub burn_in: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact transform of a linear or quadratic program: sweep CSV, or the
    /// mode sum with `--format json`.
    Transform(#[command(flatten)] Common),
    /// Metropolis β sweep: `beta,T,mean_O,stderr_O,var_O[,cov_ij]`.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chains: Chains,
    },
    /// Landau free energy of the objective at one β: `bin_lo,bin_hi,count,betaF`.
    Landau {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chains: Chains,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// In-play degrees of freedom and crossover analysis of a sweep CSV.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Temperature window `T_lo,T_hi` for the low-T fit.
        #[arg(long, value_delimiter = ',', value_name = "T_LO,T_HI")]
        window: Option<Vec<f64>>,
    },
    /// Transform of a model volume function: `beta,T,logZ,mean_O`.
    Modes(#[command(flatten)] Common),
    /// Transverse displacement of filtered geodesics: `beta,T,delta_x,length`.
    Geodesic(#[command(flatten)] Common),
    /// Brute-force grid transform: `beta,T,Z,logZ`.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Grid points per axis.
        #[arg(long, default_value_t = 400)]
        resolution: usize,
    },
}

/// Geodesic parameters file for the `geodesic` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicInput {
    pub dimension: usize,
    pub o1: f64,
    pub o2: f64,
    pub alpha: f64,
}

/// `n` log-spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn parse_schedule(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::input(format!("schedule `{s}` is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n >= 1) {
        return Err(Error::input("schedule needs 0 < start < stop and count >= 1"));
    }
    Ok(log_grid(lo, hi, n))
}

/// β values from `--beta`, else `--schedule`, else 40 log-spaced points over
/// `[1e-2, 1e2]`. Always positive and strictly ascending.
pub fn beta_grid(c: &Common) -> Result<Vec<f64>> {
    let mut betas = if !c.beta.is_empty() {
        c.beta.clone()
    } else if let Some(s) = &c.schedule {
        parse_schedule(s)?
    } else {
        log_grid(1e-2, 1e2, 40)
    };
    if betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::input("beta values must be positive and finite"));
    }
    betas.sort_by(f64::total_cmp);
    if betas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::input("beta values must be distinct"));
    }
    Ok(betas)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn chain_config(ch: &Chains) -> Result<ChainConfig> {
    let cfg = ChainConfig {
        n_steps: ch.steps,
        burn_in: ch.burn_in,
        seed: ch.seed,
        n_chains: ch.chains,
        ..ChainConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run_transform(c: &Common) -> Result<()> {
    let p = read_problem_file(&c.input)?;
    if p.objectives().len() != 1 {
        return Err(Error::input("transform handles single-objective problems"));
    }
    let betas = beta_grid(c)?;
    let format = c.format.unwrap_or(Format::Csv);
    match p.objective() {
        Objective::Linear(lin) => {
            let modes = lp_mode_sum(p.constraints(), lin)?;
            if format == Format::Json {
                return write_json(c.output.as_deref(), &modes);
            }
            let rows = betas
                .iter()
                .map(|&b| Ok((modes.log_z(b)?, modes.moments(b)?)))
                .collect::<Result<Vec<_>>>()?;
            write_transform_csv(open_output(c.output.as_deref())?, &rows)
        }
        Objective::Quadratic(q) => {
            if !p.constraints().is_empty() {
                log::warn!("quadratic transform ignores constraints; use `oracle` or `sample` for constrained problems");
            }
            if format == Format::Json {
                let modes = qp_mode_sum(q)
                    .ok_or_else(|| Error::input("quadratic mode sum exists only for even dimension"))?;
                return write_json(c.output.as_deref(), &modes);
            }
            let rows = betas
                .iter()
                .map(|&b| {
                    let t = qp_partition_function(q, b)?;
                    Ok((t.log_z, MomentReport::scalar(b, t.mean, t.variance)))
                })
                .collect::<Result<Vec<_>>>()?;
            write_transform_csv(open_output(c.output.as_deref())?, &rows)
        }
        Objective::BlackBox(_) => Err(Error::input(
            "transform needs a linear or quadratic objective; use `sample` for general problems",
        )),
    }
}

fn run_sample(c: &Common, ch: &Chains) -> Result<()> {
    let p = read_problem_file(&c.input)?;
    let sweep = beta_sweep(&p, &beta_grid(c)?, &chain_config(ch)?)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => write_sweep_csv(open_output(c.output.as_deref())?, &sweep),
        Format::Json => write_json(c.output.as_deref(), &sweep),
    }
}

fn run_landau(c: &Common, ch: &Chains, bins: usize) -> Result<()> {
    let p = read_problem_file(&c.input)?;
    let beta = match c.beta.as_slice() {
        [b] if *b > 0.0 && b.is_finite() => *b,
        [] => 1.0,
        _ => return Err(Error::input("landau takes a single positive --beta")),
    };
    let batch = metropolis_chain(&p, &[beta], &chain_config(ch)?)?;
    let obj = p.objective().clone();
    let prof = landau_histogram(&batch, |x| obj.eval(x), Bins::Count(bins))?;
    if prof.degenerate {
        log::warn!("all samples fell into one bin");
    }
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => write_landau_csv(open_output(c.output.as_deref())?, &prof),
        Format::Json => write_json(c.output.as_deref(), &prof),
    }
}

fn run_analyze(c: &Common, window: Option<&[f64]>) -> Result<()> {
    let sweep = read_sweep_csv(File::open(&c.input)?)?;
    let window = match window {
        None => None,
        Some([lo, hi]) if *lo >= 0.0 && hi > lo => Some((*lo, *hi)),
        Some(_) => return Err(Error::input("--window needs 0 <= T_lo < T_hi")),
    };
    let dof = fit_inplay_dof(&sweep, window)?;
    let crossover = match detect_crossover(&sweep) {
        Ok(r) => Some(r),
        Err(e @ Error::InsufficientData { .. }) => {
            log::warn!("crossover analysis skipped: {e}");
            None
        }
        Err(e) => return Err(e),
    };
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(c.output.as_deref(), &json!({ "dof_fit": dof, "crossover": crossover })),
        Format::Csv => {
            // aligned key/value table
            let mut w = open_output(c.output.as_deref())?;
            let mut line = |k: &str, v: String| writeln!(w, "{k:<22} {v}");
            line("o_min_estimate", fmt_f64(dof.o_min_estimate))?;
            line("inplay_slope", fmt_f64(dof.slope))?;
            line("inplay_slope_stderr", fmt_f64(dof.slope_stderr))?;
            line("fit_t_lo", fmt_f64(dof.t_lo))?;
            line("fit_t_hi", fmt_f64(dof.t_hi))?;
            line("fit_rows", dof.rows.to_string())?;
            if let Some(r) = &crossover {
                line("crossover", r.crossover.to_string())?;
                line("t_star_estimate", fmt_f64(r.t_star_estimate))?;
                line("low_slope", fmt_f64(r.low_slope))?;
                line("high_slope", fmt_f64(r.high_slope))?;
                line("high_intercept", fmt_f64(r.high_intercept))?;
                line("p_value", fmt_f64(r.p_value))?;
                line("method", r.method.clone())?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn run_modes(c: &Common) -> Result<()> {
    let vm: VolumeModel = serde_json::from_reader(File::open(&c.input)?)?;
    vm.validate()?;
    let betas = beta_grid(c)?;
    let rows = betas
        .iter()
        .map(|&b| {
            let t = volume_model_z(&vm, b)?;
            Ok(vec![b, 1.0 / b, t.log_z, t.mean])
        })
        .collect::<Result<Vec<_>>>()?;
    let t_cross = match vm {
        VolumeModel::TwoMinima { .. } => match mode_crossover_temperature(&vm) {
            Ok(t) => Some(t),
            Err(Error::NoCrossing { upper }) => {
                log::warn!("no mode crossover below T = {upper}");
                None
            }
            Err(e) => return Err(e),
        },
        _ => None,
    };
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            if let Some(t) = t_cross {
                eprintln!("crossover temperature: {}", fmt_f64(t));
            }
            write_table(open_output(c.output.as_deref())?, &["beta", "T", "logZ", "mean_O"], &rows)
        }
        Format::Json => {
            let table: Vec<_> = rows
                .iter()
                .map(|r| json!({"beta": r[0], "T": r[1], "logZ": r[2], "mean_O": r[3]}))
                .collect();
            write_json(
                c.output.as_deref(),
                &json!({"model": vm, "crossover_temperature": t_cross, "table": table}),
            )
        }
    }
}

fn run_geodesic(c: &Common) -> Result<()> {
    let gi: GeodesicInput = serde_json::from_reader(File::open(&c.input)?)?;
    let g = GeodesicSpec::planar(gi.o1, gi.o2, gi.alpha)?;
    let betas = beta_grid(c)?;
    let rows = betas
        .iter()
        .map(|&b| {
            let fs = FilteredSpace::new(gi.dimension, b)?;
            let path = geodesic_path(&fs, &g, 257)?;
            Ok(vec![b, 1.0 / b, geodesic_displacement(&fs, &g), path_length(&fs, &path)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let header = ["beta", "T", "delta_x", "length"];
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => write_table(open_output(c.output.as_deref())?, &header, &rows),
        Format::Json => {
            let table: Vec<_> = rows
                .iter()
                .map(|r| json!({"beta": r[0], "T": r[1], "delta_x": r[2], "length": r[3]}))
                .collect();
            write_json(c.output.as_deref(), &table)
        }
    }
}

fn run_oracle(c: &Common, resolution: usize) -> Result<()> {
    if resolution < 10 {
        return Err(Error::input("--resolution must be >= 10"));
    }
    let p: ProblemSpec = read_problem_file(&c.input)?;
    let betas = beta_grid(c)?;
    let rows = betas
        .iter()
        .map(|&b| {
            let z = brute_force_z(&p, b, resolution)?;
            Ok(vec![b, 1.0 / b, z, z.ln()])
        })
        .collect::<Result<Vec<_>>>()?;
    write_table(open_output(c.output.as_deref())?, &["beta", "T", "Z", "logZ"], &rows)
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Transform(c) => run_transform(c),
        Command::Sample { common, chains } => run_sample(common, chains),
        Command::Landau { common, chains, bins } => run_landau(common, chains, *bins),
        Command::Analyze { common, window } => run_analyze(common, window.as_deref()),
        Command::Modes(c) => run_modes(c),
        Command::Geodesic(c) => run_geodesic(c),
        Command::Oracle { common, resolution } => run_oracle(common, *resolution),
    }
}
