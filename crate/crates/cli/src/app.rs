//! Argument parsing and terminal output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use critnls_core::verify::{ExperimentReport, Verdict};

use crate::config::Experiment;
use crate::error::{io, Result};
use crate::manifest::{Command, Request, RunManifest};
use crate::plot;
use crate::run::{exit_code, run};

#[derive(Debug, Parser)]
#[command(name = "critnls", version, about = "Numerical experiments for the energy-critical NLS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Solve one initial value problem and store the trajectory.
    Solve(RunArgs),
    /// Run a verification experiment.
    Check(CheckArgs),
    /// Perturbation experiments: stability exponent or Lipschitz bound.
    Stability(StabilityArgs),
    /// Scattering states and their continuity in the data.
    Scatter(RunArgs),
    /// Summarize finished runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: a name derived from the request, under the output root).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root for default output directories.
    #[arg(long, env = "CRITNLS_OUT", default_value = "runs")]
    pub out_root: PathBuf,
    /// Offset added to every random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
    /// Restrict to one dimension.
    #[arg(long = "n", value_name = "N")]
    pub dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Use seeds 1..=K.
    #[arg(long, value_name = "K")]
    pub seeds: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Fit the Lipschitz bound instead of the stability exponent.
    #[arg(long)]
    pub lipschitz: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories or report files.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Redraw the plot of a single report into this file.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn tag(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Inconclusive => "INCONCLUSIVE",
        Verdict::Fail => "FAIL",
    }
}

fn relation(r: critnls_core::verify::Relation) -> &'static str {
    match r {
        critnls_core::verify::Relation::AtMost => "<=",
        critnls_core::verify::Relation::AtLeast => ">=",
    }
}

/// One line per check, then the verdict.
pub fn summary(report: &ExperimentReport, location: &Path) -> String {
    let mut s = String::new();
    for c in &report.checks {
        s += &format!("{:<12} {}: {:.6e} {} {:.6e}\n", tag(c.verdict), c.name, c.measured, relation(c.relation), c.threshold);
    }
    for n in &report.notes {
        s += &format!("note         {n}\n");
    }
    s += &format!("{}: {} ({})\n", report.id, tag(report.verdict).to_lowercase(), location.display());
    s
}

fn launch(command: Command, args: RunArgs, experiment: Option<Experiment>, seeds: Option<usize>) -> Result<u8> {
    let req = Request { experiment, config: args.config, out: args.out, seed: args.seed, dim: args.dim, seeds };
    let manifest = RunManifest::resolve(command, req, &args.out_root)?;
    let outcome = run(&manifest, args.force)?;
    print!("{}", summary(&outcome.report, &outcome.out));
    Ok(exit_code(outcome.report.verdict))
}

fn report(args: ReportArgs) -> Result<u8> {
    let mut worst = Verdict::Pass;
    for p in &args.paths {
        let file = if p.is_dir() { p.join("report.json") } else { p.clone() };
        let text = fs::read_to_string(&file).map_err(io(&file))?;
        let r = ExperimentReport::from_json(&text)?;
        print!("{}", summary(&r, p));
        worst = worst.max(r.verdict);
        if let Some(out) = &args.plot {
            if args.paths.len() > 1 {
                return Err(crate::CliError::Usage("--plot takes a single report".into()));
            }
            match plot::render(&r)? {
                Some(svg) => fs::write(out, svg).map_err(io(out))?,
                None => eprintln!("{}: nothing to plot", p.display()),
            }
        }
    }
    Ok(exit_code(worst))
}

/// Run the parsed command line; the result is the process exit code.
pub fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Commands::Solve(a) => launch(Command::Solve, a, None, None),
        Commands::Check(a) => launch(Command::Check, a.run, a.experiment, a.seeds),
        Commands::Stability(a) => {
            let e = if a.lipschitz { Some(Experiment::Lipschitz) } else { None };
            launch(Command::Stability, a.run, e, None)
        }
        Commands::Scatter(a) => launch(Command::Scatter, a, None, None),
        Commands::Report(a) => report(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn check_flags_parse() {
        let cli =
            Cli::try_parse_from(["critnls", "check", "--experiment", "strichartz", "--n", "3", "--seeds", "20", "--threads", "2"]).unwrap();
        assert_eq!(cli.threads, Some(2));
        let Commands::Check(a) = cli.command else { panic!() };
        assert_eq!((a.experiment, a.run.dim, a.seeds), (Some(Experiment::Strichartz), Some(3), Some(20)));
    }
}
