//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{
    demand_probability, demands_in_class, enumerate_demand_classes, leader_group, non_redundant_subsets, DemandVector,
    UserSubset,
};
use crate::error::Error;
use crate::lp::{build, solve_problem, to_lp_format, LpStatus, ProblemKind};
use crate::model::{validate_placement, zipf_popularity, InstanceConfig, Placement, PopularitySpec, ProblemInstance};
use crate::rates::{avg_rate_lb, avg_rate_mccs, padded_length, rate_lb, rate_mccs};
use crate::simulator::{
    decode_and_verify, default_file_bits, deliver, simulate_all, DecodeReport, LogExport, Simulation,
};

pub const CSV_HEADER: &str = "theta,M,rate_p0,rate_p1,rate_p2,gap_p2,status_p0,status_p1,status_p2";

#[derive(Debug, Parser)]
#[command(
    name = "mccs",
    version,
    about = "Placement optimization, converse bounds and bit-level simulation for coded caching"
)]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the MCCS placement and print it with its average rate.
    Optimize(InstanceArgs),
    /// Sweep the cache size and compare the MCCS with both bounds (CSV).
    SweepM(SweepArgs),
    /// Sweep the Zipf exponent and compare the MCCS with both bounds (CSV).
    SweepTheta(SweepArgs),
    /// Per demand class gap between the MCCS and the bound at the bound's optimum.
    Gap(InstanceArgs),
    /// Run every demand through the bit-level simulator.
    Simulate(SimulateArgs),
    /// Print one of the linear programs in LP format.
    DumpLp(DumpLpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// JSON instance file; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub files: Option<usize>,
    /// Number of users [default: 4].
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub cache: Option<f64>,
    #[arg(long, conflicts_with = "popularity")]
    pub zipf: Option<f64>,
    /// Comma-separated request probabilities.
    #[arg(long, value_delimiter = ',')]
    pub popularity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON instance file; only its file and user counts are used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of files [default: 4].
    #[arg(long)]
    pub files: Option<usize>,
    /// Number of users [default: 4].
    #[arg(long)]
    pub users: Option<usize>,
    /// Zipf exponents: the fixed curves of sweep-m, or the points of sweep-theta.
    #[arg(long, value_delimiter = ',')]
    pub zipf: Option<Vec<f64>>,
    /// Cache sizes: the points of sweep-m, or the fixed curves of sweep-theta.
    #[arg(long, value_delimiter = ',')]
    pub cache: Option<Vec<f64>>,
    /// Swept axis as START:STOP:STEP (inclusive).
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File size in bits [default: 2^K * 1024].
    #[arg(long)]
    pub file_bits: Option<u64>,
    /// Print the transmission log and decode report of this demand
    /// (comma-separated 1-based file labels) instead of the summary.
    #[arg(long, value_delimiter = ',')]
    pub demand: Option<Vec<usize>>,
    /// Include per-demand outcomes in the summary.
    #[arg(long)]
    pub per_demand: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    P0,
    P1,
    P2,
}

impl From<ProblemArg> for ProblemKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::P0 => ProblemKind::P0,
            ProblemArg::P1 => ProblemKind::P1,
            ProblemArg::P2 => ProblemKind::P2,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DumpLpArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "p0")]
    pub problem: ProblemArg,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{failed} of {total} demands failed to decode")]
    Decode { failed: usize, total: usize },
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for solver failures, 4 for decode failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::Solver { .. } | Error::InvalidPlacement { .. }) => 3,
            CliError::Model(_) => 2,
            CliError::Decode { .. } => 4,
            CliError::Output(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Model(Error::Config(msg.into()))
}

fn read_config(path: &PathBuf) -> CliResult<InstanceConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    InstanceConfig::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

impl InstanceArgs {
    pub fn resolve(&self) -> CliResult<ProblemInstance> {
        let base = self.config.as_ref().map(read_config).transpose()?;
        let popularity = match (&self.popularity, self.zipf, &base) {
            (Some(p), _, _) => PopularitySpec::Explicit(p.clone()),
            (None, Some(theta), _) => PopularitySpec::Zipf { zipf_theta: theta },
            (None, None, Some(cfg)) => cfg.popularity.clone(),
            (None, None, None) => return Err(config_error("one of --zipf, --popularity or --config is required")),
        };
        let n_files = self
            .files
            .or(base.as_ref().map(|c| c.n_files))
            .or(match &popularity {
                PopularitySpec::Explicit(p) => Some(p.len()),
                PopularitySpec::Zipf { .. } => None,
            })
            .unwrap_or(4);
        let cfg = InstanceConfig {
            n_files,
            k_users: self.users.or(base.as_ref().map(|c| c.k_users)).unwrap_or(4),
            cache_size: self
                .cache
                .or(base.as_ref().map(|c| c.cache_size))
                .ok_or_else(|| config_error("--cache is required"))?,
            popularity,
        };
        Ok(cfg.to_instance()?)
    }
}

/// Inclusive arithmetic grid from `START:STOP:STEP`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| config_error(format!("grid '{spec}': {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(config_error(format!("grid '{spec}' must be START:STOP:STEP")));
    };
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(config_error(format!("grid '{spec}' needs STEP > 0 and STOP >= START")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(config_error(format!("grid '{spec}' has {count} points")));
    }
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

/// C-style `%.9g`.
pub fn format_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub cache_size: f64,
    pub rates: [f64; 3],
    pub statuses: [LpStatus; 3],
}

impl SweepRow {
    pub fn gap_p2(&self) -> f64 {
        self.rates[0] - self.rates[2]
    }

    pub fn to_csv(&self) -> String {
        let mut line = String::new();
        let numbers = [self.theta, self.cache_size, self.rates[0], self.rates[1], self.rates[2], self.gap_p2()];
        for x in numbers {
            let _ = write!(line, "{},", format_g9(x));
        }
        let _ = write!(line, "{},{},{}", self.statuses[0], self.statuses[1], self.statuses[2]);
        line
    }
}

/// Solves P0, P1 and P2 at one point. A failed solve leaves `NaN` and its
/// status in the row; malformed instances are errors.
pub fn sweep_point(n_files: usize, k_users: usize, theta: f64, cache_size: f64) -> crate::Result<SweepRow> {
    let instance = ProblemInstance::new(n_files, k_users, cache_size, zipf_popularity(n_files, theta))?;
    let mut rates = [f64::NAN; 3];
    let mut statuses = [LpStatus::Optimal; 3];
    for (i, kind) in [ProblemKind::P0, ProblemKind::P1, ProblemKind::P2].into_iter().enumerate() {
        match solve_problem(&instance, kind) {
            Ok(sol) => rates[i] = sol.optimal_rate,
            Err(Error::Solver { status, .. }) => statuses[i] = status,
            Err(Error::InvalidPlacement { .. }) => statuses[i] = LpStatus::Malformed,
            Err(e) => return Err(e),
        }
    }
    Ok(SweepRow { theta, cache_size, rates, statuses })
}

/// Evaluates `(theta, M)` points in parallel; rows come back in input order.
pub fn run_sweep(n_files: usize, k_users: usize, points: &[(f64, f64)]) -> crate::Result<Vec<SweepRow>> {
    points.par_iter().map(|&(theta, m)| sweep_point(n_files, k_users, theta, m)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// `M in {0.1, ..., 4.0}`.
pub fn default_cache_grid() -> Vec<f64> {
    parse_grid("0.1:4.0:0.1").expect("valid grid")
}

/// `theta in {0.0, ..., 2.0}`.
pub fn default_theta_grid() -> Vec<f64> {
    parse_grid("0:2:0.1").expect("valid grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CacheSize,
    Theta,
}

/// `(N, K, [(theta, M)])`.
type SweepPlan = (usize, usize, Vec<(f64, f64)>);

fn sweep_points(args: &SweepArgs, axis: SweepAxis) -> CliResult<SweepPlan> {
    let base = args.config.as_ref().map(read_config).transpose()?;
    let n = args.files.or(base.as_ref().map(|c| c.n_files)).unwrap_or(4);
    let k = args.users.or(base.as_ref().map(|c| c.k_users)).unwrap_or(4);
    let grid = args.grid.as_deref().map(parse_grid).transpose()?;
    let points = match axis {
        SweepAxis::CacheSize => {
            let thetas = args.zipf.clone().unwrap_or_else(|| vec![0.8, 1.4]);
            let caches = match (grid, &args.cache) {
                (Some(_), Some(_)) => return Err(config_error("use either --grid or --cache for the cache sizes")),
                (Some(g), None) => g,
                (None, Some(c)) => c.clone(),
                (None, None) => default_cache_grid(),
            };
            thetas.iter().flat_map(|&t| caches.iter().map(move |&m| (t, m))).collect::<Vec<_>>()
        }
        SweepAxis::Theta => {
            let caches = args.cache.clone().unwrap_or_else(|| vec![0.9, 2.1]);
            let thetas = match (grid, &args.zipf) {
                (Some(_), Some(_)) => return Err(config_error("use either --grid or --zipf for the exponents")),
                (Some(g), None) => g,
                (None, Some(t)) => t.clone(),
                (None, None) => default_theta_grid(),
            };
            caches.iter().flat_map(|&m| thetas.iter().map(move |&t| (t, m))).collect()
        }
    };
    if points.is_empty() {
        return Err(config_error("empty sweep grid"));
    }
    if let Some(&(t, _)) = points.iter().find(|(t, _)| !t.is_finite() || *t < 0.0) {
        return Err(config_error(format!("zipf exponent {t} must be >= 0")));
    }
    Ok((n, k, points))
}

/// Gap between the MCCS and the popularity-first bound for one class of
/// demands sharing a distinct-request set.
#[derive(Debug, Clone, Serialize)]
pub struct ClassGap {
    pub distinct_set: Vec<usize>,
    pub weight: f64,
    /// 1: two users; 2: every user asks for a different file; 3: repeated requests.
    pub region: u8,
    pub rate_lb: f64,
    /// Probability-weighted mean of `rate_mccs(d)` within the class.
    pub avg_rate_mccs: f64,
    pub avg_gap: f64,
    pub max_gap: f64,
    pub worst_demand: Vec<usize>,
    /// Messages of the worst demand that contain a non-leader user and
    /// pad subfiles of unequal length.
    pub padded_subsets: Vec<UserSubset>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub placement: Placement,
    pub rate_p2: f64,
    pub avg_rate_mccs: f64,
    pub avg_rate_lb: f64,
    pub classes: Vec<ClassGap>,
}

pub fn region_of(k_users: usize, n_distinct: usize) -> u8 {
    if k_users == 2 {
        1
    } else if n_distinct == k_users {
        2
    } else {
        3
    }
}

/// Subsets of `d`'s messages that mix in a non-leader and zero-pad.
pub fn padded_subsets(placement: &Placement, d: &DemandVector) -> Vec<UserSubset> {
    let leaders = leader_group(d);
    non_redundant_subsets(d)
        .into_iter()
        .filter(|s| !s.is_subset_of(leaders))
        .filter(|&s| {
            let level = s.len() - 1;
            let shortest = s.users().map(|k| placement.get(d.file_of(k), level)).fold(f64::INFINITY, f64::min);
            padded_length(placement, d, s) - shortest > 1e-12
        })
        .collect()
}

/// Per-class gaps at the optimum of the popularity-first bound.
pub fn gap_report(instance: &ProblemInstance) -> crate::Result<GapReport> {
    let p2 = solve_problem(instance, ProblemKind::P2)?;
    let a = &p2.placement;
    let k = instance.k_users();
    let classes = enumerate_demand_classes(instance)?
        .into_par_iter()
        .map(|class| {
            let bound = rate_lb(instance, a, &class.distinct_set)?;
            let mut weighted = 0.0;
            let mut mass = 0.0;
            let mut worst: Option<(f64, DemandVector)> = None;
            for d in demands_in_class(k, &class.distinct_set) {
                let rate = rate_mccs(instance, a, &d)?.total;
                let prob = demand_probability(instance, &d);
                weighted += prob * rate;
                mass += prob;
                if worst.as_ref().is_none_or(|(g, _)| rate - bound > *g) {
                    worst = Some((rate - bound, d));
                }
            }
            let (max_gap, worst) = worst.expect("classes are nonempty");
            let avg = if mass > 0.0 { weighted / mass } else { f64::NAN };
            Ok(ClassGap {
                distinct_set: class.labels(),
                weight: class.weight,
                region: region_of(k, class.distinct_set.len()),
                rate_lb: bound,
                avg_rate_mccs: avg,
                avg_gap: avg - bound,
                max_gap,
                padded_subsets: padded_subsets(a, &worst),
                worst_demand: worst.labels(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(GapReport {
        avg_rate_mccs: avg_rate_mccs(instance, a)?,
        avg_rate_lb: avg_rate_lb(instance, a, true)?,
        rate_p2: p2.optimal_rate,
        placement: p2.placement,
        classes,
    })
}

#[derive(Debug, Serialize)]
struct OptimizeOutput<'a> {
    n_files: usize,
    k_users: usize,
    cache_size: f64,
    /// Popularity in decreasing order; rows of `placement` follow it.
    popularity: &'a [f64],
    /// `file_order[i]`: input position of the i-th most popular file.
    file_order: &'a [usize],
    placement: &'a Placement,
    optimal_rate: f64,
    status: LpStatus,
    iterations: usize,
    validation: crate::model::ValidationReport,
}

#[derive(Debug, Serialize)]
struct SingleDemandOutput {
    demand: Vec<usize>,
    log: LogExport,
    decode: DecodeReport,
}

fn to_json(value: &impl Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Runs one command and returns what it prints. A decode failure still
/// writes the report before failing.
pub fn execute(command: &Command, sink: &mut dyn Write) -> CliResult<()> {
    let emit = |sink: &mut dyn Write, text: String| sink.write_all(text.as_bytes()).map_err(CliError::Output);
    match command {
        Command::Optimize(args) => {
            let instance = args.resolve()?;
            let sol = solve_problem(&instance, ProblemKind::P0)?;
            let validation = validate_placement(&instance, &sol.placement, true)?;
            emit(
                sink,
                to_json(&OptimizeOutput {
                    n_files: instance.n_files(),
                    k_users: instance.k_users(),
                    cache_size: instance.cache_size(),
                    popularity: instance.popularity(),
                    file_order: instance.permutation(),
                    placement: &sol.placement,
                    optimal_rate: sol.optimal_rate,
                    status: sol.status,
                    iterations: sol.iterations,
                    validation,
                })?,
            )
        }
        Command::SweepM(args) | Command::SweepTheta(args) => {
            let axis = if matches!(command, Command::SweepM(_)) { SweepAxis::CacheSize } else { SweepAxis::Theta };
            let (n, k, points) = sweep_points(args, axis)?;
            let rows = run_sweep(n, k, &points)?;
            emit(sink, sweep_csv(&rows))
        }
        Command::Gap(args) => {
            let report = gap_report(&args.resolve()?)?;
            emit(sink, to_json(&report)?)
        }
        Command::Simulate(args) => {
            let instance = args.instance.resolve()?;
            let f = args.file_bits.unwrap_or_else(|| default_file_bits(instance.k_users()));
            let sol = solve_problem(&instance, ProblemKind::P0)?;
            if let Some(labels) = &args.demand {
                let d = DemandVector::from_labels(labels, instance.n_files())?;
                if d.k_users() != instance.k_users() {
                    return Err(config_error(format!(
                        "demand lists {} users, instance has {}",
                        d.k_users(),
                        instance.k_users()
                    )));
                }
                let sim = Simulation::new(&instance, &sol.placement, f, args.seed)?;
                let log = deliver(&sim.layout, &sim.library, &d)?;
                let decode = decode_and_verify(&sim.layout, &sim.library, &sim.caches, &log, &d)?;
                let ok = decode.all_succeeded();
                emit(
                    sink,
                    to_json(&SingleDemandOutput { demand: d.labels(), log: log.export(f, args.seed), decode })?,
                )?;
                return if ok { Ok(()) } else { Err(CliError::Decode { failed: 1, total: 1 }) };
            }
            let mut summary = simulate_all(&instance, &sol.placement, f, args.seed)?;
            let (failed, total) = (summary.demands - summary.decoded, summary.demands);
            if !args.per_demand {
                summary.outcomes.clear();
            }
            emit(sink, to_json(&summary)?)?;
            if failed > 0 {
                return Err(CliError::Decode { failed, total });
            }
            Ok(())
        }
        Command::DumpLp(args) => {
            let instance = args.instance.resolve()?;
            let kind: ProblemKind = args.problem.into();
            let lp = build(&instance, kind)?;
            let title = format!(
                "{kind} N={} K={} M={}",
                instance.n_files(),
                instance.k_users(),
                format_g9(instance.cache_size())
            );
            emit(sink, to_lp_format(&lp, &title))
        }
    }
}

/// Runs `cli` on its own thread pool and writes to its output target.
pub fn run(cli: &Cli) -> CliResult<()> {
    let go = || -> CliResult<()> {
        match &cli.out {
            Some(path) => {
                let mut buffer = Vec::new();
                let result = execute(&cli.command, &mut buffer);
                std::fs::write(path, &buffer).map_err(CliError::Output)?;
                result
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                execute(&cli.command, &mut lock)
            }
        }
    };
    match cli.jobs {
        Some(0) => Err(config_error("--jobs must be positive")),
        Some(j) => {
            rayon::ThreadPoolBuilder::new().num_threads(j).build().map_err(|e| config_error(e.to_string()))?.install(go)
        }
        None => go(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        assert_eq!(format_g9(0.1), "0.1");
        assert_eq!(format_g9(1.48), "1.48");
        assert_eq!(format_g9(2.0), "2");
        assert_eq!(format_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_g9(123456789.0), "123456789");
        assert_eq!(format_g9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_g9(1.5e-7), "1.5e-07");
        assert_eq!(format_g9(0.0001), "0.0001");
        assert_eq!(format_g9(-2.5e-16), "-2.5e-16");
        assert_eq!(format_g9(0.30000000000000004), "0.3");
        assert_eq!(format_g9(0.0), "0");
        assert_eq!(format_g9(f64::NAN), "nan");
    }

    #[test]
    fn grids() {
        let m = default_cache_grid();
        assert_eq!(m.len(), 40);
        assert_eq!(m[2], 0.3);
        assert_eq!(*m.last().unwrap(), 4.0);
        let t = default_theta_grid();
        assert_eq!(t.len(), 21);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[20], 2.0);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn sweep_row_format() {
        let row = SweepRow {
            theta: 0.8,
            cache_size: 1.0,
            rates: [1.5, 1.25, 1.5],
            statuses: [LpStatus::Optimal, LpStatus::Optimal, LpStatus::Infeasible],
        };
        assert_eq!(row.to_csv(), "0.8,1,1.5,1.25,1.5,0,optimal,optimal,infeasible");
    }

    #[test]
    fn exit_codes() {
        let solver = CliError::Model(Error::Solver { problem: "P0".into(), status: LpStatus::IterationLimit });
        assert_eq!(solver.exit_code(), 3);
        assert_eq!(CliError::Decode { failed: 1, total: 4 }.exit_code(), 4);
        assert_eq!(config_error("x").exit_code(), 2);
    }

    #[test]
    fn regions() {
        assert_eq!(region_of(2, 1), 1);
        assert_eq!(region_of(3, 3), 2);
        assert_eq!(region_of(3, 2), 3);
    }

    #[test]
    fn resolve_needs_popularity_and_cache() {
        let args = InstanceArgs {
            config: None,
            files: Some(2),
            users: Some(2),
            cache: Some(1.0),
            zipf: None,
            popularity: None,
        };
        assert_eq!(args.resolve().unwrap_err().exit_code(), 2);
        let args = InstanceArgs { popularity: Some(vec![0.6, 0.4]), files: None, ..args };
        let inst = args.resolve().unwrap();
        assert_eq!(inst.n_files(), 2);
        assert_eq!(inst.k_users(), 2);
    }
}
