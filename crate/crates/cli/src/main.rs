use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dispersim_cli::{plot, run, CliError, Experiment, RunOptions};

/// Dispersive-decay experiments on lattices and metric graphs.
#[derive(Parser)]
#[command(name = "dispersim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Result CSV written by a run.
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice kernel values K_t(j).
    Kernel(RunArgs),
    /// Whole-lattice evolution.
    Line(RunArgs),
    /// Half-lattice evolution with a Dirichlet or Neumann end.
    Halfline(RunArgs),
    /// Two half-lattices with different speeds joined at a junction.
    Coupled(RunArgs),
    /// Continuum line with a piecewise-constant coefficient.
    Stepline(RunArgs),
    /// Star graph with a Kirchhoff, δ or δ′ vertex.
    Star(RunArgs),
    /// Line with point interactions.
    DeltaLine(RunArgs),
    /// Small-time sup norm of trigonometric polynomials.
    Torus(RunArgs),
    /// Decay of the lattice kernel in ℓᵖ.
    Alphap(RunArgs),
    /// Power-law fit of a column in an earlier result.
    Fit(RunArgs),
    /// Van der Corput margin of the lattice phase.
    Vdc(RunArgs),
    /// The junction oscillatory integral over a parameter grid.
    Oscint(RunArgs),
    /// Self-adjointness test for vertex conditions.
    CouplingCheck(RunArgs),
    /// Gnuplot script for a result CSV.
    PlotScript(PlotArgs),
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::config(e.kind().to_string() + ": " + e.render().to_string().lines().next().unwrap_or_default())),
    };
    let (experiment, args) = match cli.command {
        Command::PlotScript(p) => {
            return match plot::emit_plot_script(&p.csv, p.out.as_deref()) {
                Ok(path) => {
                    println!("{}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            };
        }
        Command::Kernel(a) => (Experiment::Kernel, a),
        Command::Line(a) => (Experiment::Line, a),
        Command::Halfline(a) => (Experiment::Halfline, a),
        Command::Coupled(a) => (Experiment::Coupled, a),
        Command::Stepline(a) => (Experiment::Stepline, a),
        Command::Star(a) => (Experiment::Star, a),
        Command::DeltaLine(a) => (Experiment::DeltaLine, a),
        Command::Torus(a) => (Experiment::Torus, a),
        Command::Alphap(a) => (Experiment::Alphap, a),
        Command::Fit(a) => (Experiment::Fit, a),
        Command::Vdc(a) => (Experiment::Vdc, a),
        Command::Oscint(a) => (Experiment::Oscint, a),
        Command::CouplingCheck(a) => (Experiment::CouplingCheck, a),
    };
    let opts = RunOptions {
        out_dir: args.out,
        threads: args.threads,
    };
    match run(experiment, &args.config, &opts) {
        Ok(outcome) => {
            if let Some(s) = &outcome.summary {
                println!("{s}");
            }
            for flag in &outcome.manifest.flags {
                eprintln!("flagged: {} = {:e} exceeds {:e}", flag.diagnostic, flag.value, flag.threshold);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
