use std::process::ExitCode;

use clap::Parser;

use netopt_cli::{run, Cli, ExperimentSpec, Report};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> netopt_cli::Result<()> {
    let spec = ExperimentSpec::from_cli(cli)?;
    let report = run(&spec)?;
    let (out, wall) = report.write_files(&spec.out)?;
    match &report {
        Report::Convergence(r) => {
            for run in &r.runs {
                println!(
                    "{:>5} lr={:<6} iterations={:<5} sum_rate={:.4}",
                    run.label(),
                    run.lr,
                    run.trace.iterations_run(),
                    run.sum_rate
                );
            }
        }
        Report::Runs(r) => {
            for s in r.summaries() {
                println!(
                    "{} {:<10} restarts={:<2} mean_rate={:.4} mean_iterations={:.1} mean_wall={:.4}s",
                    s.dims, s.method, s.restarts, s.mean_rate, s.mean_iterations, s.mean_wall_time
                );
            }
        }
    }
    println!("wrote {} and {}", out.display(), wall.display());
    Ok(())
}
