use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fbmc_mimo::harness::{emit, preset, run_scenario, Format, Scenario, PRESETS};
use fbmc_mimo::Error;

/// Monte Carlo link-level experiments for FBMC-OQAM massive MIMO uplink.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Named experiment (fig2a, fig2b, fig3a, fig3b, fig5a, fig5b, fig6a, fig6b, fig8a, fig9b).
    #[arg(long, conflicts_with = "config", required_unless_present_any = ["config", "list"])]
    preset: Option<String>,
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "csv", value_parser = ["csv", "plotdata"])]
    format: String,
    /// Print the preset names and exit.
    #[arg(long)]
    list: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::Unsupported(_) => 2,
        Error::Numeric(_) => 3,
        Error::Io(_) => 4,
    }
}

fn load(args: &Args) -> Result<Scenario, Error> {
    let mut s = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => Scenario::from_json(&std::fs::read_to_string(path)?)?,
        (None, None) => return Err(Error::InvalidParameter("give --preset or --config".into())),
    };
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    if let Some(t) = args.trials {
        s.trials = t;
    }
    s.validate()?;
    Ok(s)
}

fn run(args: &Args) -> Result<(), Error> {
    let s = load(args)?;
    let format = Format::from_name(&args.format)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let curves = pool.install(|| run_scenario(&s))?;
    for p in emit(&curves, &args.out, format)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for p in PRESETS {
            println!("{p}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simulate: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
