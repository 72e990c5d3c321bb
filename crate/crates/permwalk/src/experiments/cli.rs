//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on a violated bound or runtime failure,
//! 2 on usage errors.

use super::config::ExperimentConfig;
use super::run_experiment;
use crate::digraph::{self, PermutedDigraph, VertexSet};
use crate::error::{Error, Result};
use crate::expansion::{
    self, counting_bound, phi_star_exact, phi_star_search, ratio_bound, union_bound_sum,
    GraphLabel, UnionBoundForm, WitnessMethod, N_MAX_EXACT,
};
use crate::markov::{
    all_pairs_hitting, hitting_times, kernel, mixing_profile, worst_case_of, WalkMode,
};
use crate::montecarlo::{self, simulate_hit, wilson_interval};
use crate::perm::Permutation;
use crate::rng::RngSeed;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "permwalk",
    version,
    about = "Permuted random walks on [-n, n]: walk digraphs, exact hitting times, bottleneck ratios, and reproducible experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Interval half-width n (the state space is [-n, n])
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Master seed; permutations are sampled deterministically from it
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Permutation JSON file {"n": .., "image": [..]}; overrides --seed
    #[arg(long, global = true)]
    sigma_file: Option<PathBuf>,

    /// Experiment configuration JSON file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; experiment reports derive .json/.csv/_agg.csv from it
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for experiment reports on stdout
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Walk mode
    #[arg(long, global = true, value_enum, default_value_t = CliMode::Simple)]
    mode: CliMode,

    /// Worker threads; results are identical for any value
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Simple,
    Lazy,
}

impl From<CliMode> for WalkMode {
    fn from(m: CliMode) -> WalkMode {
        match m {
            CliMode::Simple => WalkMode::Simple,
            CliMode::Lazy => WalkMode::Lazy,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a uniform permutation and emit it as JSON
    GenPerm,
    /// Build the walk digraph and print structural statistics; --out writes
    /// the edge list
    GraphStats {
        /// Report on the square graph instead
        #[arg(long)]
        square: bool,
    },
    /// Exact expected hitting time of a target from a start
    Hit {
        /// Target vertex ("3", "-7") or set ("set:-10,10")
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_negative_numbers = true)]
        start: i64,
    },
    /// Worst-case expected hitting time over all ordered pairs
    HitAll,
    /// Bottleneck ratio of an explicit vertex set
    Phi {
        /// Comma-separated vertices, e.g. "-3,-2,-1"
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Measure on the square graph
        #[arg(long)]
        square: bool,
    },
    /// Minimum bottleneck ratio: exact enumeration when n allows it,
    /// heuristic upper bound otherwise
    PhiStar {
        #[arg(long)]
        square: bool,
        /// Force the heuristic search even when exact is possible
        #[arg(long)]
        search: bool,
        /// Random restarts for the search
        #[arg(long, default_value_t = 8)]
        budget: usize,
    },
    /// Total-variation and sup-norm mixing trace of the lazy walk
    Mix {
        /// Steps to trace (default 4(2n+1))
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Monte Carlo hitting-time runs; --out writes raw per-run rows
    McHit {
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_negative_numbers = true)]
        start: i64,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        /// Per-run step cap (default 100(2n+1)^2)
        #[arg(long)]
        step_cap: Option<usize>,
    },
    /// Binomial counting bounds and the union-bound sum
    Bounds {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.005)]
        eps: f64,
        /// Evaluate the component-product variant of the union-bound sum
        #[arg(long)]
        variant: bool,
    },
    /// Run a named experiment (linear-hitting, lower-bound,
    /// universal-bound, expansion, mixing-distance)
    Experiment {
        name: String,
        #[arg(long)]
        num_sigmas: Option<usize>,
        #[arg(long)]
        pairs_per_sigma: Option<usize>,
        #[arg(long)]
        horizon_factor: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Enumerate all permutations (universal-bound, n <= 3)
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        budget: Option<usize>,
    },
}

/// Entry point shared by the binary and the tests.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidArgument(format!("bad --jobs value: {e}"))),
        },
        None => dispatch(&cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(Error::InvalidArgument(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(Error::BoundViolation(msg)) => {
            eprintln!("bound violated: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenPerm => gen_perm(cli),
        Command::GraphStats { square } => graph_stats(cli, *square),
        Command::Hit { target, start } => hit(cli, target, *start),
        Command::HitAll => hit_all(cli),
        Command::Phi { set, square } => phi_cmd(cli, set, *square),
        Command::PhiStar {
            square,
            search,
            budget,
        } => phi_star_cmd(cli, *square, *search, *budget),
        Command::Mix { t_max } => mix(cli, *t_max),
        Command::McHit {
            target,
            start,
            runs,
            step_cap,
        } => mc_hit(cli, target, *start, *runs, *step_cap),
        Command::Bounds { m, eps, variant } => bounds(cli, *m, *eps, *variant),
        Command::Experiment {
            name,
            num_sigmas,
            pairs_per_sigma,
            horizon_factor,
            eps,
            exhaustive,
            budget,
        } => experiment(
            cli,
            name,
            *num_sigmas,
            *pairs_per_sigma,
            *horizon_factor,
            *eps,
            *exhaustive,
            *budget,
        ),
    }
}

fn require_n(cli: &Cli) -> Result<usize> {
    cli.n
        .ok_or_else(|| Error::InvalidArgument("--n is required for this command".into()))
}

/// Resolves the permutation: an explicit file wins, then a seeded sample,
/// then the identity.
fn resolve_sigma(cli: &Cli) -> Result<Permutation> {
    if let Some(path) = &cli.sigma_file {
        let text = std::fs::read_to_string(path)?;
        let sigma: Permutation = serde_json::from_str(&text)?;
        if let Some(n) = cli.n {
            if n != sigma.half_width() {
                return Err(Error::InvalidArgument(format!(
                    "--n {n} does not match the n={} permutation in {}",
                    sigma.half_width(),
                    path.display()
                )));
            }
        }
        return Ok(sigma);
    }
    let n = require_n(cli)?;
    match cli.seed {
        Some(seed) => Permutation::sample_uniform(n, RngSeed::new(seed, 0)),
        None => Permutation::identity(n),
    }
}

fn parse_target(raw: &str, n: usize) -> Result<VertexSet> {
    let body = raw.strip_prefix("set:").unwrap_or(raw);
    let vertices: Vec<i64> = body
        .split(',')
        .map(|s| {
            s.trim().parse::<i64>().map_err(|_| {
                Error::InvalidArgument(format!("cannot parse vertex {s:?} in target {raw:?}"))
            })
        })
        .collect::<Result<_>>()?;
    VertexSet::from_vertices(n, &vertices)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_perm(cli: &Cli) -> Result<()> {
    let n = require_n(cli)?;
    let seed = cli.seed.unwrap_or(0);
    let sigma = Permutation::sample_uniform(n, RngSeed::new(seed, 0))?;
    let mut text = serde_json::to_string(&sigma)?;
    text.push('\n');
    emit(&cli.out, &text)
}

fn graph_stats(cli: &Cli, square: bool) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma.clone())?;
    let n = g.half_width();
    let half = n as i64;
    let self_loops: usize = (-half..=half)
        .filter(|&v| g.out_neighbors(v).contains(&v))
        .count();
    let stats = serde_json::json!({
        "n": n,
        "vertices": 2 * n + 1,
        "graph": if square { "G2" } else { "G" },
        "out_degree": if square { 4 } else { 2 },
        "strongly_connected": true,
        "self_loops": self_loops,
        "shift_fixed_points": sigma.shift_fixed_points(),
    });
    println!("{}", serde_json::to_string_pretty(&stats)?);
    if cli.out.is_some() {
        let mut buf = Vec::new();
        if square {
            digraph::write_edge_list(&g.square(), &mut buf)?;
        } else {
            digraph::write_edge_list(&g, &mut buf)?;
        }
        emit(&cli.out, &String::from_utf8(buf).expect("ascii edge list"))?;
    }
    Ok(())
}

fn hit(cli: &Cli, target: &str, start: i64) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    let k = kernel(&g, cli.mode.into());
    let target = parse_target(target, g.half_width())?;
    let table = hitting_times(&k, &target)?;
    // Stdout gets a 9-decimal rounding of the solve; CSV keeps full bits.
    println!("{:?}", (table.value_at(start) * 1e9).round() / 1e9);
    if cli.out.is_some() {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        emit(&cli.out, &String::from_utf8(buf).expect("ascii csv"))?;
    }
    Ok(())
}

fn hit_all(cli: &Cli) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    let mode: WalkMode = cli.mode.into();
    let k = kernel(&g, mode);
    let table = all_pairs_hitting(&k)?;
    let worst = worst_case_of(&table);
    println!("{}", serde_json::to_string_pretty(&worst)?);
    if cli.out.is_some() {
        let half = g.half_width() as i64;
        let mut text = String::from("start,target,mode,expected_steps,residual\n");
        for y in -half..=half {
            for x in -half..=half {
                text.push_str(&format!(
                    "{x},{y},{mode},{:?},{:?}\n",
                    table.value(x, y),
                    table.max_scaled_residual
                ));
            }
        }
        emit(&cli.out, &text)?;
    }
    Ok(())
}

fn phi_cmd(cli: &Cli, set: &str, square: bool) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    let a = parse_target(set, g.half_width())?;
    let seed = cli.seed.map(|s| RngSeed::new(s, 0));
    let report = if square {
        expansion::phi(&a, &g.square())?.report(GraphLabel::Square, seed, WitnessMethod::Direct)
    } else {
        expansion::phi(&a, &g)?.report(GraphLabel::Walk, seed, WitnessMethod::Direct)
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(&cli.out, &text)
}

fn phi_star_cmd(cli: &Cli, square: bool, force_search: bool, budget: usize) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    let n = g.half_width();
    let seed = cli.seed.map(|s| RngSeed::new(s, 0));
    let search_seed = RngSeed::new(cli.seed.unwrap_or(0), 1);
    let use_search = force_search || n > N_MAX_EXACT;
    let (witness, method) = if square {
        let sq = g.square();
        if use_search {
            (phi_star_search(&sq, search_seed, budget)?, WitnessMethod::Search)
        } else {
            (phi_star_exact(&sq)?, WitnessMethod::Exact)
        }
    } else if use_search {
        (phi_star_search(&g, search_seed, budget)?, WitnessMethod::Search)
    } else {
        (phi_star_exact(&g)?, WitnessMethod::Exact)
    };
    let label = if square { GraphLabel::Square } else { GraphLabel::Walk };
    let mut text = serde_json::to_string_pretty(&witness.report(label, seed, method))?;
    text.push('\n');
    emit(&cli.out, &text)
}

fn mix(cli: &Cli, t_max: Option<usize>) -> Result<()> {
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    // Mixing diagnostics are defined for the lazy walk regardless of --mode.
    let k = kernel(&g, WalkMode::Lazy);
    let t_max = t_max.unwrap_or(4 * (2 * g.half_width() + 1));
    let profile = mixing_profile(&k, t_max)?;
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    emit(&cli.out, &String::from_utf8(buf).expect("ascii csv"))
}

fn mc_hit(cli: &Cli, target: &str, start: i64, runs: usize, step_cap: Option<usize>) -> Result<()> {
    if runs == 0 {
        return Err(Error::InvalidArgument("--runs must be >= 1".into()));
    }
    let sigma = resolve_sigma(cli)?;
    let g = PermutedDigraph::build(sigma)?;
    let mode: WalkMode = cli.mode.into();
    let target_set = parse_target(target, g.half_width())?;
    let cap = step_cap.unwrap_or_else(|| montecarlo::default_step_cap(g.half_width()));
    let base = RngSeed::new(cli.seed.unwrap_or(0), 2);

    // Comma-free target label keeps the CSV columns intact for set targets.
    let label = {
        let vs: Vec<String> = target_set.iter().map(|v| v.to_string()).collect();
        if vs.len() == 1 {
            vs[0].clone()
        } else {
            format!("set:{}", vs.join(" "))
        }
    };
    let mut raw = String::from("run_index,start,target,mode,hit_time,censored\n");
    let mut hits = 0usize;
    let mut hit_sum = 0.0f64;
    for run in 0..runs {
        let outcome = simulate_hit(&g, start, &target_set, mode, base.child(run as u64), cap)?;
        match outcome.hit_time {
            Some(t) => {
                hits += 1;
                hit_sum += t as f64;
                raw.push_str(&format!("{run},{start},{label},{mode},{t},0\n"));
            }
            None => raw.push_str(&format!("{run},{start},{label},{mode},,1\n")),
        }
    }
    let (lo, hi) = wilson_interval(hits, runs);
    let summary = serde_json::json!({
        "runs": runs,
        "step_cap": cap,
        "hits": hits,
        "censored": runs - hits,
        "mean_hit_time": if hits > 0 { Some(hit_sum / hits as f64) } else { None },
        "hit_fraction": hits as f64 / runs as f64,
        "wilson_low": lo,
        "wilson_high": hi,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if cli.out.is_some() {
        emit(&cli.out, &raw)?;
    }
    Ok(())
}

fn bounds(cli: &Cli, m: usize, eps: f64, variant: bool) -> Result<()> {
    let n = require_n(cli)?;
    let counting = counting_bound(n, m, eps)?;
    let ratio = ratio_bound(n, m, eps)?;
    let form = if variant {
        UnionBoundForm::ComponentProduct
    } else {
        UnionBoundForm::FourthPower
    };
    let union_ln = if eps < 0.125 {
        Some(union_bound_sum(n, eps, form)?)
    } else {
        None
    };
    let out = serde_json::json!({
        "n": n,
        "m": m,
        "eps": eps,
        "counting_bound": counting,
        "ratio_bound": ratio,
        "union_bound_form": form,
        "union_bound_ln": union_ln,
    });
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    emit(&cli.out, &text)
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    cli: &Cli,
    name: &str,
    num_sigmas: Option<usize>,
    pairs_per_sigma: Option<usize>,
    horizon_factor: Option<f64>,
    eps: Option<f64>,
    exhaustive: bool,
    budget: Option<usize>,
) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = name.to_string();
    if let Some(n) = cli.n {
        cfg.n_values = vec![n];
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(v) = num_sigmas {
        cfg.num_sigmas = v;
    }
    if let Some(v) = pairs_per_sigma {
        cfg.pairs_per_sigma = v;
    }
    if let Some(v) = horizon_factor {
        cfg.horizon_factor = v;
    }
    if let Some(v) = eps {
        cfg.eps = v;
    }
    if exhaustive {
        cfg.exhaustive = true;
    }
    if let Some(v) = budget {
        cfg.search_budget = v;
    }
    cfg.validate()?;

    let started = std::time::Instant::now();
    let report = run_experiment(&cfg)?;
    eprintln!(
        "experiment {name} finished in {:.3}s ({} per-sigma records)",
        started.elapsed().as_secs_f64(),
        report.per_sigma.len()
    );
    match &cli.out {
        Some(path) => report.save(path)?,
        None => match cli.format {
            OutputFormat::Json => print!("{}", report.to_json_string()?),
            OutputFormat::Csv => print!("{}", report.to_sigma_csv()),
        },
    }
    if !report.all_assertions_passed() {
        eprintln!("note: some statistical assertions failed; see the report");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_target_forms() {
        let single = parse_target("3", 5).unwrap();
        assert_eq!(single.to_vec(), vec![3]);
        let set = parse_target("set:-5,5", 5).unwrap();
        assert_eq!(set.to_vec(), vec![-5, 5]);
        assert!(parse_target("set:x", 5).is_err());
        assert!(parse_target("9", 5).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(cli_main(["permwalk", "no-such-command"]), 2);
        assert_eq!(cli_main(["permwalk", "hit", "--bogus-flag"]), 2);
        // Missing --n for gen-perm is a usage error.
        assert_eq!(cli_main(["permwalk", "gen-perm"]), 2);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(cli_main(["permwalk", "--help"]), 0);
    }

    #[test]
    fn exhaustive_universal_bound_exits_zero() {
        assert_eq!(
            cli_main(["permwalk", "experiment", "universal-bound", "--n", "2", "--exhaustive"]),
            0
        );
    }
}
