//! Command-line front end.
//!
//! Settings come from flags, then an optional `key=value` config file, then
//! defaults. The cache directory may also be set through `PILLOWCASE_CACHE`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::limitshape::{self, fmt12};
use crate::oracle;
use crate::partitions::Partition;
use crate::qseries::{self, SubstitutionTable};
use crate::volumes::{self, BlockCache, ExpectationEngine, ObservableId};
use crate::weights;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "PILLOWCASE_CACHE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MATH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pillowcase", version, about = "Pillowcase weights, characters and asymptotics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GlobalArgs {
    /// `key=value` file with defaults for the options below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Bound for exhaustive enumerations.
    #[arg(long, global = true)]
    pub bound: Option<u32>,
    /// JSON substitution table replacing the default.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// w(lambda) from characters and from hook lengths.
    Weight {
        #[arg(allow_hyphen_values = true)]
        partition: String,
    },
    /// g_nu(lambda) directly and through the 2-quotient.
    G {
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Weighted sums by half-size, cached per block, written as one file.
    Expect {
        #[arg(long = "f")]
        observable: String,
        /// Half-size truncation M.
        #[arg(long)]
        max: Option<usize>,
    },
    /// Asymptotic expansion of an expectation.
    Asym {
        #[arg(long = "f")]
        observable: String,
        #[arg(long)]
        max: Option<usize>,
        /// Largest number of Eisenstein factors in a monomial.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Brute-force tuple census against the character sum.
    Oracle {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        nu: String,
    },
    /// Finite-size limit-shape diagnostics as CSV.
    Limitshape {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, value_enum)]
        report: Report,
        /// Thresholds for the concentration report.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0])]
        eps: Vec<f64>,
        /// Power for the trend report.
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
    /// Numerical check of the substitution table.
    ValidateTable {
        /// Number of q-coefficients summed.
        #[arg(long, default_value_t = 3000)]
        terms: usize,
    },
    /// Coefficients of prod (1 - q^{2i})^{-1/2}.
    Zseries {
        #[arg(long)]
        max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Concentration,
    Curve,
    Distance,
    Trend,
    Weights,
}

/// Resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Half-size truncation M.
    pub max_half: usize,
    /// Basis depth D.
    pub depth: usize,
    pub cache_dir: PathBuf,
    pub workers: usize,
    /// Overrides the per-command enumeration bound when set.
    pub bound: Option<u32>,
    pub table: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_half: 30,
            depth: 5,
            cache_dir: PathBuf::from("pillowcase-cache"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            bound: None,
            table: None,
        }
    }
}

impl RunConfig {
    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        let data_err = |reason: String| Error::Data {
            path: origin.to_path_buf(),
            reason,
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| data_err(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| {
                v.parse::<u64>()
                    .ok()
                    .filter(|&x| x > 0)
                    .ok_or_else(|| data_err(format!("line {}: {key} must be a positive integer", lineno + 1)))
            };
            match key {
                "max" => self.max_half = number(value)? as usize,
                "depth" => self.depth = number(value)? as usize,
                "workers" => self.workers = number(value)? as usize,
                "bound" => self.bound = Some(number(value)? as u32),
                "cache_dir" => self.cache_dir = PathBuf::from(value),
                "table" => self.table = Some(PathBuf::from(value)),
                other => return Err(data_err(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(())
    }

    /// Defaults, then the config file, then the environment, then flags.
    pub fn resolve(global: &GlobalArgs, env_cache: Option<String>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &global.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_config_text(&text, path)?;
        }
        if let Some(dir) = env_cache.filter(|d| !d.is_empty()) {
            cfg.cache_dir = PathBuf::from(dir);
        }
        if let Some(dir) = &global.cache_dir {
            cfg.cache_dir = dir.clone();
        }
        if let Some(w) = global.workers {
            cfg.workers = w;
        }
        if let Some(b) = global.bound {
            cfg.bound = Some(b);
        }
        if let Some(t) = &global.table {
            cfg.table = Some(t.clone());
        }
        if cfg.workers == 0 || cfg.bound == Some(0) {
            return Err(Error::invalid("workers and bound must be positive"));
        }
        Ok(cfg)
    }

    fn substitution_table(&self) -> Result<SubstitutionTable> {
        match &self.table {
            Some(path) => SubstitutionTable::load(path),
            None => Ok(SubstitutionTable::default()),
        }
    }

    fn engine(&self) -> Result<ExpectationEngine> {
        Ok(ExpectationEngine::new(Some(BlockCache::new(&self.cache_dir)?)))
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Data { .. } => EXIT_IO,
        e if e.is_mathematical() => EXIT_MATH,
        _ => EXIT_USAGE,
    }
}

fn parse_partition(text: &str) -> Result<Partition> {
    text.parse()
}

/// Runs a parsed command; the returned text is the command's main output.
/// Progress notes go to `log`.
pub fn run(cli: &Cli, cfg: &RunConfig, log: &mut dyn std::io::Write) -> Result<String> {
    let mut out = String::new();
    match &cli.command {
        Command::Weight { partition } => {
            let lambda = parse_partition(partition)?;
            let direct = weights::pillowcase_weight(&lambda);
            match weights::pillowcase_weight_hooks(&lambda) {
                Ok(hooks) => writeln!(out, "{direct} {hooks}").unwrap(),
                Err(_) => writeln!(out, "{direct} (unbalanced)").unwrap(),
            }
        }
        Command::G { nu, lambda } => {
            let nu = parse_partition(nu)?;
            let lambda = parse_partition(lambda)?;
            let direct = volumes::g_direct(&nu, &lambda)?;
            let structural = volumes::g_structural(&nu, &lambda)?;
            writeln!(out, "{direct} {structural}").unwrap();
        }
        Command::Expect { observable, max } => {
            let f: ObservableId = observable.parse()?;
            let max_half = max.unwrap_or(cfg.max_half);
            let engine = cfg.engine()?;
            let (mut series, stats) = engine.series_many(std::slice::from_ref(&f), max_half)?;
            let series = series.remove(0);
            let cache = engine.cache().expect("engine has a cache");
            let path = cli
                .global
                .out
                .clone()
                .unwrap_or_else(|| cache.default_aggregate_path(&f, max_half));
            cache.write_aggregate(&series, &path)?;
            if stats.reused > 0 {
                let _ = writeln!(log, "{} blocks of {} were already done", stats.reused, f.canonical());
            }
            let _ = writeln!(log, "{} blocks computed", stats.computed);
            writeln!(out, "{}", path.display()).unwrap();
            return Ok(out);
        }
        Command::Asym {
            observable,
            max,
            depth,
        } => {
            let f: ObservableId = observable.parse()?;
            let max_half = max.unwrap_or(cfg.max_half);
            let depth = depth.unwrap_or(cfg.depth);
            let table = cfg.substitution_table()?;
            let series = cfg.engine()?.series(&f, max_half)?;
            let analysis = qseries::build_basis(depth, 2 * max_half)
                .and_then(|basis| qseries::analyze_series(&series, &basis, &table))
                .map_err(with_max_hint)?;
            writeln!(out, "{}", analysis.asymptotics).unwrap();
            writeln!(
                out,
                "{}",
                serde_json::to_string(&analysis.asymptotics.to_json()).expect("serializable")
            )
            .unwrap();
        }
        Command::Oracle { d, nu } => {
            let nu = parse_partition(nu)?;
            let bound = cfg.bound.unwrap_or(oracle::DEFAULT_ORACLE_BOUND);
            let census = oracle::census(*d, &nu, bound)?;
            let (count, character) = oracle::burnside_check(&census, bound)?;
            if cli.global.out.is_some() {
                out = oracle::census_csv(&[(census.clone(), character.clone())]);
            } else {
                writeln!(
                    out,
                    "raw={} normalized={} character={} {}",
                    census.raw_count,
                    census.normalized,
                    character,
                    if count == character { "OK" } else { "MISMATCH" }
                )
                .unwrap();
            }
            if count != character {
                emit(&cli.global, &out)?;
                return Err(Error::Domain(format!(
                    "census {count} differs from character sum {character}"
                )));
            }
        }
        Command::Limitshape { n, report, eps, k } => {
            let bound = cfg.bound.unwrap_or(limitshape::DEFAULT_SWEEP_BOUND);
            out = limitshape_report(n, *report, eps, *k, bound)?;
        }
        Command::ValidateTable { terms } => {
            writeln!(out, "table,generator,power,fitted,tabulated,status").unwrap();
            let mut tables = vec![("configured", cfg.substitution_table()?)];
            if cfg.table.is_none() {
                tables.push(("appendix", SubstitutionTable::appendix()));
            }
            for (label, table) in tables {
                for fit in qseries::validate_substitution_table(&table, *terms, &qseries::DEFAULT_H_GRID)? {
                    for (j, (a, b)) in fit.fitted.iter().zip(&fit.table).enumerate() {
                        let status = if fit.mismatched_powers.contains(&(j as u32)) {
                            "MISMATCH"
                        } else {
                            "ok"
                        };
                        writeln!(out, "{label},{},{j},{},{},{status}", fit.name, fmt12(*a), fmt12(*b)).unwrap();
                    }
                }
            }
        }
        Command::Zseries { max } => {
            let z = weights::weight_partition_function_series(*max);
            for (k, c) in z.coeffs().iter().enumerate() {
                writeln!(out, "{k} {c}").unwrap();
            }
        }
    }
    emit(&cli.global, &out)?;
    Ok(out)
}

/// Adds the half-size that would supply enough coefficients.
fn with_max_hint(e: Error) -> Error {
    match e {
        Error::RankDeficient {
            reason,
            required,
            available,
        } => Error::RankDeficient {
            reason: format!("{reason}; rerun with --max {} or more", required.div_ceil(2)),
            required,
            available,
        },
        other => other,
    }
}

fn emit(global: &GlobalArgs, text: &str) -> Result<()> {
    if let Some(path) = &global.out {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn limitshape_report(ns: &[u32], report: Report, eps: &[f64], k: u32, bound: u32) -> Result<String> {
    let mut out = String::new();
    match report {
        Report::Concentration => return limitshape::concentration_csv(ns, eps, bound),
        Report::Curve => {
            for &n in ns {
                let csv = limitshape::curve_csv(n, bound)?;
                if out.is_empty() {
                    out.push_str("n,");
                    out.push_str(csv.lines().next().unwrap_or_default());
                    out.push('\n');
                }
                for line in csv.lines().skip(1) {
                    writeln!(out, "{n},{line}").unwrap();
                }
            }
        }
        Report::Distance => {
            out.push_str("n,distance\n");
            for &n in ns {
                writeln!(out, "{n},{}", fmt12(limitshape::mean_contour_distance(n, bound)?)).unwrap();
            }
        }
        Report::Trend => {
            out.push_str("k,n,mean,normalized,limit,gap\n");
            let limit = limitshape::p_k_limit(k);
            for point in limitshape::p_k_trend(k, ns, bound)? {
                writeln!(
                    out,
                    "{k},{},{},{},{},{}",
                    point.n,
                    point.mean,
                    fmt12(point.normalized),
                    fmt12(limit),
                    fmt12(point.gap)
                )
                .unwrap();
            }
        }
        Report::Weights => {
            out.push_str("n,max,argmax,weighted_mean\n");
            for &n in ns {
                let w = limitshape::weight_estimate(n, bound)?;
                writeln!(out, "{n},{},\"{}\",{}", fmt12(w.max), w.argmax, fmt12(w.weighted_mean)).unwrap();
            }
        }
    }
    Ok(out)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match RunConfig::resolve(&cli.global, std::env::var(CACHE_ENV).ok()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()
    {
        eprintln!("warning: worker pool already initialized: {e}");
    }
    let mut stderr = std::io::stderr();
    match run(&cli, &cfg, &mut stderr) {
        Ok(text) => {
            if cli.global.out.is_none() {
                print!("{text}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
