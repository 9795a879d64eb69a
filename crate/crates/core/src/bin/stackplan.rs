//! Command-line front end.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stackplan::baselines::FollowerModel;
use stackplan::episode::{EpisodeReport, PlannerKind};
use stackplan::harness::{
    compare_cases, emit_utility_plot, load_cases, load_scenario, run_experiment, write_comparison_csv, write_report,
    PlotSeries, RunOverrides,
};
use stackplan::stage::{format_stage_game, parse_stage_game, StageSolverKind};
use stackplan::{Error, Result};

#[derive(Parser)]
#[command(name = "stackplan", version, about = "Leader-follower Stackelberg planning for object rearrangement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one matrix Stackelberg game given as two labelled matrices.
    Solve {
        #[arg(long = "stage-game")]
        stage_game: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverArg::Milp)]
        solver: SolverArg,
    },
    /// Run one scenario and write its JSON report and per-round CSV.
    Run(RunArgs),
    /// Run both planners on every scenario in a directory.
    Compare {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot stage-wise utility of one or more reports.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Milp,
    MilpBb,
    MultiLp,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Sgcm,
    Greedy,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum)]
    planner: Option<PlannerArg>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long = "pfail-a")]
    pfail_a: Option<f64>,
    #[arg(long = "pfail-b")]
    pfail_b: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-rounds")]
    max_rounds: Option<usize>,
    /// Rounds (1-based) in which the follower deviates at random.
    #[arg(long = "disturb-rounds", value_delimiter = ',', conflicts_with_all = ["disturb_prob", "zero_trust"])]
    disturb_rounds: Option<Vec<usize>>,
    /// Per-round probability of a random follower deviation.
    #[arg(long = "disturb-prob", conflicts_with = "zero_trust")]
    disturb_prob: Option<f64>,
    /// The follower ignores recommendations and acts greedily.
    #[arg(long = "zero-trust")]
    zero_trust: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn solve(path: &PathBuf, solver: SolverArg) -> Result<()> {
    let m = parse_stage_game(&std::fs::read_to_string(path)?)?;
    let kind = match solver {
        SolverArg::Milp => StageSolverKind::Milp,
        SolverArg::MilpBb => StageSolverKind::MilpBranchAndBound,
        SolverArg::MultiLp => StageSolverKind::MultiLp,
    };
    let sol = kind.solve(&m)?;
    print!("{}", format_stage_game(&m));
    let policy: Vec<String> = sol.leader_policy.probs().iter().map(|p| format!("{p:.6}")).collect();
    println!("leader_policy {}", policy.join(" "));
    println!("follower_action {}", sol.follower_action.index());
    println!("leader_value {:.6}", sol.leader_value);
    println!("follower_value {:.6}", sol.follower_value);
    if sol.follower_tie(&m) {
        println!("note: follower is indifferent between several best responses");
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let mut config = load_scenario(&args.scenario)?;
    let follower_model = if args.zero_trust {
        Some(FollowerModel::ZeroTrust)
    } else if let Some(p) = args.disturb_prob {
        Some(FollowerModel::RandomWithProb { p })
    } else {
        args.disturb_rounds.as_ref().map(|r| FollowerModel::RandomAtRounds { rounds: r.iter().copied().collect::<BTreeSet<_>>() })
    };
    let overrides = RunOverrides {
        planner: args.planner.map(|p| match p {
            PlannerArg::Sgcm => PlannerKind::Sgcm,
            PlannerArg::Greedy => PlannerKind::Greedy,
        }),
        horizon: args.horizon,
        p_fail_leader: args.pfail_a,
        p_fail_follower: args.pfail_b,
        seed: args.seed,
        max_rounds: args.max_rounds,
        follower_model,
    };
    overrides.apply(&mut config)?;
    let report = run_experiment(&config)?;
    let stem = args.scenario.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let (json, csv) = write_report(&report, &args.out, &format!("{stem}_{}", config.planner))?;
    println!(
        "{} {}: {} in {} rounds, total utility {}",
        stem, config.planner, report.status, report.rounds, report.total_utility_a
    );
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn compare(dir: &PathBuf, out: &PathBuf) -> Result<()> {
    let cases = load_cases(dir)?;
    if cases.is_empty() {
        return Err(Error::Validation(format!("no scenario files in {}", dir.display())));
    }
    let outcomes = compare_cases(&cases);
    let rows: Vec<_> = outcomes.iter().map(|o| o.row.clone()).collect();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_comparison_csv(&rows, std::fs::File::create(out)?)?;
    write_comparison_csv(&rows, std::io::stdout())?;
    for o in &outcomes {
        for e in &o.errors {
            eprintln!("{}: {e}", o.row.case);
        }
    }
    Ok(())
}

fn plot(reports: &[PathBuf], out: &PathBuf) -> Result<()> {
    let mut series = Vec::with_capacity(reports.len());
    for path in reports {
        let report = EpisodeReport::from_json(&std::fs::read_to_string(path)?)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        series.push(PlotSeries::from_report(stem, &report));
    }
    let csv = emit_utility_plot(&series, out)?;
    println!("wrote {} and {}", out.display(), csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve { stage_game, solver } => solve(stage_game, *solver),
        Command::Run(args) => run(args),
        Command::Compare { cases, out } => compare(cases, out),
        Command::Plot { reports, out } => plot(reports, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
