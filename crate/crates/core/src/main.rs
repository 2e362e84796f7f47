use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use climattr::io::write_csv;
use climattr::pipeline::{run_file, Command, Overrides};
use climattr::report::{emit_plot_data, write_outputs};
use climattr::Error;

#[derive(Parser)]
#[command(name = "climattr", version, about = "Climate detection and attribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the counterfactual regression and report coefficients.
    Fit(Common),
    /// Fit, then estimate scenario changes, factor changes and risk ratios.
    Attribute(Common),
    /// Run the configured Granger-causality tests.
    Granger(Common),
    /// Run the configured fingerprint regressions.
    Fingerprint(Common),
    /// Run the synthetic size/power experiment in `[synth]`.
    Simulate(Common),
    /// Everything above, plus plot data.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Analysis config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `inference.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Overrides `inference.level`.
    #[arg(long)]
    level: Option<f64>,
}

fn execute(command: Command, args: &Common) -> Result<(), Error> {
    let over = Overrides {
        seed: args.seed,
        level: args.level,
    };
    let run = run_file(&args.config, command, over)?;
    write_outputs(&run.report, &args.out)?;
    if command == Command::Report {
        if let (Some(ds), Some(model)) = (&run.dataset, &run.model) {
            emit_plot_data(ds, model, &run.forcing, &args.out.join("plot"))?;
        }
    }
    if let Some(sim) = &run.simulated {
        let dir = args.out.join("simulated");
        std::fs::create_dir_all(&dir)?;
        write_csv(sim.response(), dir.join(format!("{}.csv", sim.response().name())))?;
        for (s, _) in sim.covariates() {
            write_csv(s, dir.join(format!("{}.csv", s.name())))?;
        }
    }
    print!("{}", run.report.summary());
    println!("outputs written to {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Fit(a) => (Command::Fit, a),
        Cmd::Attribute(a) => (Command::Attribute, a),
        Cmd::Granger(a) => (Command::Granger, a),
        Cmd::Fingerprint(a) => (Command::Fingerprint, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
