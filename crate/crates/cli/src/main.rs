use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccch_core::config::{parse_config, ScenarioConfig};
use ccch_core::error::Error;
use ccch_core::scenario::{check_scenario, parse_vary, run_scenario, sweep, ExitStatus};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccch", version, about = "Two-component Camassa-Holm simulations and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Integrate a single peakon pair.
    Peakons {
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, allow_hyphen_values = true)]
        r0: f64,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Trajectory CSV path.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a config once per value of a parameter, in parallel.
    Sweep {
        config: PathBuf,
        /// `key=start:end:count`
        #[arg(long)]
        vary: String,
    },
    /// Validate a config without running it.
    Check { config: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn fail(error: &Error) -> ExitCode {
    eprintln!("error: {error}");
    ExitCode::from(ExitStatus::of_error(error).code() as u8)
}

fn thread_cap() -> Option<usize> {
    std::env::var("CCCH_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn run(cfg: &ScenarioConfig) -> ExitCode {
    let report = run_scenario(cfg);
    print!("{}", report.summary_table());
    if let Some(m) = &report.message {
        if report.status != ExitStatus::Ok {
            eprintln!("error: {m}");
        }
    }
    ExitCode::from(report.status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match load(&config) {
            Ok(cfg) => run(&cfg),
            Err(e) => fail(&e),
        },
        Command::Peakons { m1, n1, q0, r0, t_end, dt, out } => {
            let mut text = format!(
                "kind=peakon\nm_amps={m1}\nn_amps={n1}\nq={q0}\nr={r0}\nt_end={t_end}\ndt={dt}\n"
            );
            if let Some(path) = out {
                text.push_str(&format!("output={path}\n"));
            }
            match parse_config(&text) {
                Ok(cfg) => run(&cfg),
                Err(e) => fail(&e),
            }
        }
        Command::Sweep { config, vary } => {
            let (base, (key, values)) = match load(&config).and_then(|c| Ok((c, parse_vary(&vary)?))) {
                Ok(v) => v,
                Err(e) => return fail(&e),
            };
            if let Err(e) = base.with_override(&key, &values[0].to_string()) {
                return fail(&e);
            }
            let runs = sweep(&base, &key, &values, thread_cap());
            let mut worst = 0;
            println!("{key},exit_status,message");
            for r in &runs {
                let code = r.report.status.code();
                worst = worst.max(code);
                let msg = r.report.message.as_deref().unwrap_or("").replace(',', ";");
                println!("{},{code},{msg}", r.value);
            }
            ExitCode::from(worst as u8)
        }
        Command::Check { config } => match load(&config).and_then(|c| check_scenario(&c)) {
            Ok(()) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
