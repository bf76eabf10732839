use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sharpe_mdp::bench::{emit_bench_csv, run_bench};
use sharpe_mdp::eval::{evaluate, Discount, DEFAULT_BIG_M};
use sharpe_mdp::generator::gen_random_mdp;
use sharpe_mdp::mdp::DEFAULT_POLICY_CAP;
use sharpe_mdp::oracle::PolicyTable;
use sharpe_mdp::report::{emit_frontier_csv, emit_trace_csv};
use sharpe_mdp::srpi::{solve, Algorithm, SolverConfig, DEFAULT_KAPPA_TOL};
use sharpe_mdp::{Error, Result, Setting, ValidatedMdp};

#[derive(Parser)]
#[command(
    name = "sharpe-mdp",
    version,
    about = "Sharpe-ratio optimization for finite MDPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean, variance and Sharpe ratio of one policy.
    Evaluate {
        #[arg(long)]
        mdp: PathBuf,
        /// Comma-separated action ids, one per state.
        #[arg(long)]
        policy: String,
        #[command(flatten)]
        setting: SettingArgs,
        #[arg(long, default_value_t = DEFAULT_BIG_M)]
        big_m: f64,
    },
    /// Find a Sharpe-optimal deterministic policy.
    Solve {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Srpi)]
        algorithm: AlgorithmArg,
        #[command(flatten)]
        setting: SettingArgs,
        #[arg(long)]
        initial_policy: Option<String>,
        #[arg(long, default_value_t = DEFAULT_KAPPA_TOL)]
        kappa_tol: f64,
        #[arg(long, default_value_t = DEFAULT_BIG_M)]
        big_m: f64,
        /// Write the per-subproblem trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Subtract a risk-free rate from every reward before solving.
        #[arg(long)]
        risk_free: Option<f64>,
    },
    /// Enumerate all policies and write the efficient frontier as CSV.
    Frontier {
        #[arg(long)]
        mdp: PathBuf,
        #[command(flatten)]
        setting: SettingArgs,
        #[arg(long, default_value_t = DEFAULT_BIG_M)]
        big_m: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        actions: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare solve counts of both algorithms on random instances.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "3,10")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Srpi,
    #[value(name = "srpi+")]
    SrpiPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingKind {
    Avg,
    Disc,
}

#[derive(Args)]
struct SettingArgs {
    #[arg(long, value_enum, default_value_t = SettingKind::Avg)]
    setting: SettingKind,
    /// Discount factor, required for `disc`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated initial distribution; uniform by default.
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
}

impl SettingArgs {
    fn resolve(&self, n_states: usize) -> Result<Setting> {
        match self.setting {
            SettingKind::Avg => Ok(Setting::Average),
            SettingKind::Disc => {
                let alpha = self.alpha.ok_or_else(|| {
                    Error::InvalidArgument("--alpha is required with --setting disc".into())
                })?;
                let disc = match &self.mu {
                    Some(mu) => Discount::new(alpha, mu.clone())?,
                    None => Discount::uniform(alpha, n_states)?,
                };
                let setting = Setting::Discounted(disc);
                setting.check(n_states)?;
                Ok(setting)
            }
        }
    }
}

fn load(path: &Path) -> Result<ValidatedMdp> {
    ValidatedMdp::from_json(&fs::read_to_string(path)?)
}

fn print_metrics(label: &str, m: &sharpe_mdp::PolicyMetrics) {
    println!("{label}");
    println!("  mean          {:.4}", m.eta);
    println!("  variance      {:.4}", m.zeta);
    println!("  second moment {:.4}", m.second_moment);
    println!("  sharpe        {:.4}", m.sharpe);
    if let Some(cv) = m.cv {
        println!("  cv            {cv:.4}");
    }
    if m.zero_variance {
        println!("  (zero variance, replaced by big-M)");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate {
            mdp,
            policy,
            setting,
            big_m,
        } => {
            let mdp = load(&mdp)?;
            let setting = setting.resolve(mdp.n_states())?;
            let d = mdp.parse_policy(&policy)?;
            let m = evaluate(&mdp, &d, &setting, big_m)?;
            print_metrics(&mdp.format_policy(&d), &m);
        }
        Command::Solve {
            mdp,
            algorithm,
            setting,
            initial_policy,
            kappa_tol,
            big_m,
            trace,
            risk_free,
        } => {
            let mut mdp = load(&mdp)?;
            if let Some(rf) = risk_free {
                mdp = mdp.subtract_reward(rf);
            }
            let algorithm = match algorithm {
                AlgorithmArg::Srpi => Algorithm::Srpi,
                AlgorithmArg::SrpiPlus => Algorithm::SrpiPlus,
            };
            let mut cfg = SolverConfig::new(algorithm, setting.resolve(mdp.n_states())?);
            cfg.kappa_tol = kappa_tol;
            cfg.big_m = big_m;
            cfg.initial_policy = initial_policy.map(|p| mdp.parse_policy(&p)).transpose()?;
            let report = solve(&mdp, &cfg)?;

            println!("{:>12} {:>6} {:>12}", "kappa", "probes", "kappa'");
            for row in &report.outer_rows {
                println!(
                    "{:>12.4} {:>6} {:>12.4}",
                    row.kappa, row.solution.aux_solve_count, row.solution.kappa_prime
                );
            }
            print_metrics(
                &format!(
                    "{} optimal policy {}",
                    algorithm.name(),
                    mdp.format_policy(&report.optimal_policy)
                ),
                &report.optimal_metrics,
            );
            println!("  kappa*        {:.4}", report.kappa_star);
            println!("  sharpe*       {:.4}", report.sharpe_star);
            println!("  mdps solved   {}", report.mdps_solved);
            println!("  pi sweeps     {}", report.pi_sweeps);
            println!("  wall time     {:.3?}", report.wall_time);
            if let Some(path) = trace {
                fs::write(path, emit_trace_csv(&report, &mdp)?)?;
            }
        }
        Command::Frontier {
            mdp,
            setting,
            big_m,
            out,
        } => {
            let mdp = load(&mdp)?;
            let setting = setting.resolve(mdp.n_states())?;
            let table = PolicyTable::build(&mdp, &setting, big_m, DEFAULT_POLICY_CAP)?;
            let frontier = table.frontier();
            for p in &frontier {
                println!(
                    "{}  zeta {:.4}  E[Q^2] {:.4}  sharpe {:.4}",
                    mdp.format_policy(&p.policy),
                    p.zeta,
                    p.second_moment,
                    p.sharpe
                );
            }
            fs::write(out, emit_frontier_csv(&mdp, &frontier, &table.entries)?)?;
        }
        Command::Gen {
            states,
            actions,
            seed,
            out,
        } => {
            if states == 0 || actions == 0 {
                return Err(Error::InvalidArgument(
                    "--states and --actions must be at least 1".into(),
                ));
            }
            fs::write(out, gen_random_mdp(states, actions, seed).to_json())?;
        }
        Command::Bench {
            sizes,
            trials,
            seed,
            out,
        } => {
            if trials == 0 || sizes.is_empty() || sizes.contains(&0) {
                return Err(Error::InvalidArgument(
                    "need at least one trial and positive sizes".into(),
                ));
            }
            let report = run_bench(&sizes, trials, seed);
            for r in &report.rows {
                println!(
                    "size {:>3}  SRPI {:.2} ± {:.2}  SRPI+ {:.2} ± {:.2}  SRPI+ <= SRPI {:.2}  failures {}",
                    r.size,
                    r.srpi_mean,
                    r.srpi_sd,
                    r.srpi_plus_mean,
                    r.srpi_plus_sd,
                    r.plus_le_fraction,
                    r.failures
                );
            }
            fs::write(out, emit_bench_csv(&report)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
