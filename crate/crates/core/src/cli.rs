//! The `qht` command-line driver.
//!
//! Exit codes: 0 success, 1 property failure (or a runtime error such as an
//! exhausted atom budget), 2 usage or parse error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bounds::{
    chernoff_bound, keli_beta_bound_from_spectrum, min_bayes_risk_closed_form, quasi_entropy,
};
use crate::error::{Error, Result};
use crate::hypothesis::{
    bayes_risk, error_pair, keli_test_from_spectrum, keli_test_spanning, neyman_pearson_test,
    random_test,
};
use crate::iid::{iid_keli_beta_bound, stein_experiment, tensor_beta_bound_direct};
use crate::linalg::{default_rank_tol, max_abs_diff, IND_TOL};
use crate::measure::MERGE_TOL;
use crate::modular::modular_spectrum;
use crate::pair_file::read_state_pair;
use crate::rng;
use crate::states::{random_commuting_pair, StatePair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default grid for `verify`.
pub const DEFAULT_EPS_GRID: [f64; 6] = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0];
/// Random projector tests per instance in the optimality check.
pub const RANDOM_TESTS_PER_INSTANCE: usize = 1000;
/// `eps` closer than this to an eigenvalue of `Δ` skips the equivalence checks.
pub const BOUNDARY_BAND: f64 = 1e-9;
/// Agreement required between two constructions of the same projector.
pub const PROJECTOR_TOL: f64 = 1e-8;
const QUASI_ROUTE_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "qht", version, about = "Quantum hypothesis testing with the relative modular operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep seeded random pairs and check every bound and optimality property.
    Verify(RunArgs),
    /// Error/bound tradeoff table for a state pair, one row per eps.
    Tradeoff(RunArgs),
    /// Second-order Stein table for i.i.d. copies of a state pair.
    Stein(RunArgs),
    /// Convolution path vs explicit tensor powers on random qubit pairs.
    Oracle(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Hilbert-space dimension (verify: cycles 2..=6 when omitted).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Comma-separated copy counts.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// State-pair JSON file.
    #[arg(long)]
    pub pair: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Atoms lighter than this are pruned into the defect during convolution.
    #[arg(long = "prune-tol", default_value_t = 0.0)]
    pub prune_tol: f64,
    /// Slack allowed on every inequality check.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub dim: Option<usize>,
    pub trials: usize,
    pub eps_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    pub ind_tol: f64,
    pub rank_tol: Option<f64>,
    pub merge_tol: f64,
    pub prune_tol: f64,
    pub check_tol: f64,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

struct Usage(String);

impl RunConfig {
    fn from_args(
        args: &RunArgs,
        default_trials: usize,
        default_eps: Option<&[f64]>,
        default_n: &[usize],
    ) -> std::result::Result<Self, Usage> {
        let trials = args.trials.unwrap_or(default_trials);
        if trials == 0 {
            return Err(Usage("--trials must be ≥ 1".into()));
        }
        let eps_grid = match (&args.eps, default_eps) {
            (Some(v), _) => v.clone(),
            (None, Some(d)) => d.to_vec(),
            (None, None) => return Err(Usage("--eps is required".into())),
        };
        if eps_grid.is_empty() {
            return Err(Usage("eps grid is empty".into()));
        }
        if eps_grid.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Usage("eps values must be finite and > 0".into()));
        }
        let n_list = args.n.clone().unwrap_or_else(|| default_n.to_vec());
        if n_list.is_empty() || n_list.contains(&0) {
            return Err(Usage("--n values must be ≥ 1".into()));
        }
        if args.dim == Some(0) {
            return Err(Usage("--dim must be ≥ 1".into()));
        }
        if !(args.prune_tol >= 0.0) || !(args.tol >= 0.0) {
            return Err(Usage("tolerances must be ≥ 0".into()));
        }
        Ok(Self {
            seed: args.seed,
            dim: args.dim,
            trials,
            eps_grid,
            n_list,
            ind_tol: IND_TOL,
            rank_tol: args.dim.map(default_rank_tol),
            merge_tol: MERGE_TOL,
            prune_tol: args.prune_tol,
            check_tol: args.tol,
            out: args.out.clone(),
            timestamp: !args.no_timestamp,
        })
    }
}

/// Parse `args` (including the program name) and run, writing results to `out`
/// unless `--out` redirects them. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => RunConfig::from_args(a, 100, Some(&DEFAULT_EPS_GRID), &[1])
            .map(|c| cmd_verify(&c)),
        Command::Tradeoff(a) => match &a.pair {
            None => Err(Usage("--pair is required".into())),
            Some(p) => RunConfig::from_args(a, 1, None, &[1]).map(|c| cmd_tradeoff(&c, p)),
        },
        Command::Stein(a) => match &a.pair {
            None => Err(Usage("--pair is required".into())),
            Some(p) => RunConfig::from_args(a, 1, Some(&[0.05, 0.2]), &[25, 100, 400])
                .and_then(|c| {
                    if c.eps_grid.iter().any(|&e| e >= 1.0) {
                        Err(Usage("stein needs eps in (0,1)".into()))
                    } else {
                        Ok(c)
                    }
                })
                .map(|c| cmd_stein(&c, p)),
        },
        Command::Oracle(a) => {
            RunConfig::from_args(a, 20, Some(&[0.25, 0.8, 2.0]), &[2, 3]).map(|c| cmd_oracle(&c))
        }
    };
    match outcome {
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::InvalidInput(_) | Error::InvalidState { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
        Ok(Ok(CommandOutput { text, passed })) => {
            if let Err(e) = emit(&cli.command, &text, out) {
                eprintln!("error: {e}");
                return EXIT_FAILURE;
            }
            if passed {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn emit(command: &Command, text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    let args = match command {
        Command::Verify(a) | Command::Tradeoff(a) | Command::Stein(a) | Command::Oracle(a) => a,
    };
    match &args.out {
        Some(path) => std::fs::write(path, text),
        None => out.write_all(text.as_bytes()),
    }
}

/// Rendered output of a subcommand and whether its properties held.
pub struct CommandOutput {
    pub text: String,
    pub passed: bool,
}

fn real(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn with_timestamp(mut report: Value, config: &RunConfig) -> String {
    if config.timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report["timestamp"] = json!(secs);
    }
    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
    s.push('\n');
    s
}

/// Accumulates `lhs − rhs` per named inequality; a check fails when that
/// exceeds the allowed tolerance.
#[derive(Default)]
struct Ledger {
    max_excess: BTreeMap<&'static str, f64>,
    failures: Vec<Value>,
    checks: usize,
}

impl Ledger {
    fn check(&mut self, name: &'static str, lhs: f64, rhs: f64, tol: f64, context: Value) {
        let excess = lhs - rhs;
        self.checks += 1;
        let slot = self.max_excess.entry(name).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(excess);
        if !(excess <= tol) {
            let mut c = context;
            c["check"] = json!(name);
            c["lhs"] = json!(lhs);
            c["rhs"] = json!(rhs);
            self.failures.push(c);
        }
    }
}

/// Run every test/bound property on one state pair.
fn check_instance(
    ledger: &mut Ledger,
    pair: &StatePair,
    commuting: bool,
    config: &RunConfig,
    seed: u64,
    context: &Value,
) -> Result<()> {
    let tol = config.check_tol;
    let spec = modular_spectrum(pair);
    let ctx = |eps: f64| {
        let mut c = context.clone();
        c["eps"] = json!(eps);
        c
    };

    let s_grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let mut quasi = Vec::with_capacity(s_grid.len());
    for &s in &s_grid {
        let direct = quasi_entropy(pair, s)?;
        let via_spec: f64 = spec.pairs().map(|p| p.weight_sigma * p.ratio.powf(s)).sum();
        ledger.check("quasi_entropy_routes", (direct - via_spec).abs(), 0.0, QUASI_ROUTE_TOL, ctx(s));
        quasi.push(direct);
    }

    // random projector tests, scored once and reused for every prior
    let mut gen = rng::generator(seed);
    let random_errors: Vec<_> = (0..RANDOM_TESTS_PER_INSTANCE)
        .map(|_| error_pair(pair, &random_test(&mut gen, pair.dim())))
        .collect::<Result<_>>()?;

    let mut grid = config.eps_grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut previous_bound: Option<f64> = None;
    for &eps in &grid {
        let test = keli_test_from_spectrum(&spec, eps)?;
        let errs = error_pair(pair, &test)?;
        let bound = keli_beta_bound_from_spectrum(&spec, eps)?;
        ledger.check("keli_alpha_bound", errs.alpha, eps, tol, ctx(eps));
        ledger.check("keli_beta_bound", errs.beta, bound, tol, ctx(eps));
        if let Some(prev) = previous_bound {
            ledger.check("keli_bound_monotone", bound, prev, tol, ctx(eps));
        }
        previous_bound = Some(bound);

        let off_boundary = !spec.near_ratio(eps, BOUNDARY_BAND);
        if off_boundary {
            let spanning = keli_test_spanning(pair, eps)?;
            let diff = max_abs_diff(test.matrix(), spanning.matrix());
            ledger.check("keli_route_equivalence", diff, 0.0, PROJECTOR_TOL, ctx(eps));
        }

        for (&s, &q) in s_grid.iter().zip(&quasi) {
            let mut c = ctx(eps);
            c["s"] = json!(s);
            ledger.check("markov_dominance", bound, eps.powf(-s) * q, tol, c);
        }

        let p = 1.0 / (1.0 + eps);
        let np = neyman_pearson_test(pair, p)?;
        let np_risk = bayes_risk(pair, p, &np)?;
        let min_risk = min_bayes_risk_closed_form(pair, p)?;
        ledger.check("np_closed_form", (np_risk - min_risk).abs(), 0.0, tol, ctx(eps));
        let best_random = random_errors
            .iter()
            .map(|e| p * e.alpha + (1.0 - p) * e.beta)
            .fold(f64::INFINITY, f64::min);
        ledger.check("np_optimal_vs_random", np_risk, best_random, tol, ctx(eps));
        let chernoff = chernoff_bound(pair, p)?;
        ledger.check("chernoff_dominates_min_risk", min_risk, chernoff.value, tol, ctx(eps));
        ledger.check("chernoff_dominates_np_risk", np_risk, chernoff.value, tol, ctx(eps));

        if commuting {
            ledger.check("commuting_tightness", (errs.beta - bound).abs(), 0.0, tol, ctx(eps));
            if off_boundary {
                let diff = max_abs_diff(test.matrix(), np.matrix());
                ledger.check("commuting_keli_equals_np", diff, 0.0, PROJECTOR_TOL, ctx(eps));
            }
        }
    }
    Ok(())
}

pub fn cmd_verify(config: &RunConfig) -> Result<CommandOutput> {
    let mut ledger = Ledger::default();
    let mut instances = 0usize;
    for trial in 0..config.trials {
        let dim = config.dim.unwrap_or(2 + trial % 5);
        let trial_seed = rng::derive_seed(config.seed, trial as u64);
        let generic = StatePair::random(dim, rng::derive_seed(trial_seed, 0))?;
        let commuting = random_commuting_pair(dim, rng::derive_seed(trial_seed, 1))?;
        for (kind, pair, is_commuting) in [("generic", generic, false), ("commuting", commuting, true)] {
            let ctx = json!({"trial": trial, "kind": kind, "dim": dim});
            let seed = rng::derive_seed(trial_seed, if is_commuting { 3 } else { 2 });
            check_instance(&mut ledger, &pair, is_commuting, config, seed, &ctx)?;
            instances += 1;
        }
    }
    let passed = ledger.failures.is_empty();
    let report = json!({
        "command": "verify",
        "seed": config.seed,
        "dim": config.dim,
        "trials": config.trials,
        "eps_grid": config.eps_grid,
        "tol": config.check_tol,
        "instances": instances,
        "checks": ledger.checks,
        "failures": ledger.failures,
        "max_slacks": ledger.max_excess,
    });
    Ok(CommandOutput {
        text: with_timestamp(report, config),
        passed,
    })
}

pub const TRADEOFF_HEADER: &str = "eps,alpha_keli,beta_keli,keli_bound,alpha_np,beta_np,bayes_risk_min,chernoff_value,chernoff_s_star";

pub fn cmd_tradeoff(config: &RunConfig, pair_path: &std::path::Path) -> Result<CommandOutput> {
    let pair = read_state_pair(pair_path)?;
    let spec = modular_spectrum(&pair);
    let mut text = String::from(TRADEOFF_HEADER);
    text.push('\n');
    let mut passed = true;
    for &eps in &config.eps_grid {
        let kl = error_pair(&pair, &keli_test_from_spectrum(&spec, eps)?)?;
        let bound = keli_beta_bound_from_spectrum(&spec, eps)?;
        let p = 1.0 / (1.0 + eps);
        let np = error_pair(&pair, &neyman_pearson_test(&pair, p)?)?;
        let min_risk = min_bayes_risk_closed_form(&pair, p)?;
        let chernoff = chernoff_bound(&pair, p)?;
        if kl.beta > bound + config.check_tol || kl.alpha > eps + config.check_tol {
            passed = false;
        }
        let row = [
            eps,
            kl.alpha,
            kl.beta,
            bound,
            np.alpha,
            np.beta,
            min_risk,
            chernoff.value,
            chernoff.s_star,
        ];
        text.push_str(&row.map(real).join(","));
        text.push('\n');
    }
    Ok(CommandOutput { text, passed })
}

pub const STEIN_HEADER: &str = "eps,n,log_eps_n,alpha_lower,alpha_upper,minus_log_beta,predicted";

pub fn cmd_stein(config: &RunConfig, pair_path: &std::path::Path) -> Result<CommandOutput> {
    let pair = read_state_pair(pair_path)?;
    let mut text = String::from(STEIN_HEADER);
    text.push('\n');
    let mut passed = true;
    for &eps in &config.eps_grid {
        for row in stein_experiment(&pair, eps, &config.n_list, config.prune_tol)? {
            passed &= row.alpha_tail.lower <= row.alpha_tail.upper;
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                real(eps),
                row.n,
                real(row.log_eps_n),
                real(row.alpha_tail.lower),
                real(row.alpha_tail.upper),
                real(row.minus_log_beta),
                real(row.predicted),
            ));
        }
    }
    Ok(CommandOutput { text, passed })
}

pub fn cmd_oracle(config: &RunConfig) -> Result<CommandOutput> {
    let dim = config.dim.unwrap_or(2);
    let mut failures = Vec::new();
    let mut max_width = 0.0f64;
    let mut max_gap = 0.0f64;
    let mut comparisons = 0usize;
    for trial in 0..config.trials {
        let pair = StatePair::random(dim, rng::derive_seed(config.seed, trial as u64))?;
        for &n in &config.n_list {
            for &eps in &config.eps_grid {
                let interval = iid_keli_beta_bound(&pair, eps, n, config.prune_tol)?;
                let direct = tensor_beta_bound_direct(&pair, eps, n)?;
                let gap = (direct - interval.lower).max(interval.lower - direct).max(0.0);
                max_width = max_width.max(interval.width());
                max_gap = max_gap.max((direct - interval.midpoint()).abs());
                comparisons += 1;
                if !interval.contains(direct, ORACLE_TOL) || interval.width() > ORACLE_TOL {
                    failures.push(json!({
                        "trial": trial, "n": n, "eps": eps,
                        "lower": interval.lower, "upper": interval.upper,
                        "direct": direct, "gap": gap,
                    }));
                }
            }
        }
    }
    let passed = failures.is_empty();
    let report = json!({
        "command": "oracle",
        "seed": config.seed,
        "dim": dim,
        "trials": config.trials,
        "eps_grid": config.eps_grid,
        "n": config.n_list,
        "prune_tol": config.prune_tol,
        "comparisons": comparisons,
        "max_interval_width": max_width,
        "max_midpoint_gap": max_gap,
        "failures": failures,
    });
    Ok(CommandOutput {
        text: with_timestamp(report, config),
        passed,
    })
}
