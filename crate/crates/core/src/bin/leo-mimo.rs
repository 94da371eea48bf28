use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leo_mimo::channel::ArrayKind;
use leo_mimo::crowding::{bin_count, classify_regime, predicted_max_load, ScalingPoint};
use leo_mimo::experiments::output::write_report;
use leo_mimo::experiments::plot::figures;
use leo_mimo::experiments::{run, Driver, ExperimentConfig};
use leo_mimo::{Error, Result};

/// LEO multiuser MIMO downlink experiments.
#[derive(Parser)]
#[command(name = "leo-mimo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ZF and STAB sum-rate distributions per cell size.
    Cdf(RunArgs),
    /// Empirical rate against the eigenvalue bound chain per maximum load.
    BoundChain(RunArgs),
    /// Mean STAB gain over ZF across the (p, q) exponent plane.
    GainMap(RunArgs),
    /// Scheduled sum rates against transmit power.
    PowerSweep(RunArgs),
    /// Empirical maximum load against the balls-and-bins prediction.
    Maxload(RunArgs),
    /// Grid search for the SDS and SUS selection thresholds.
    TuneAlpha(RunArgs),
    /// Crowding regime and predicted rate scaling of an exponent triple.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file overriding the driver preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory for CSV, metadata and the resolved config.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write SVG figures.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, value_enum, default_value = "ula")]
    array: ArrayArg,
    /// Array size used for the bin count and load prediction.
    #[arg(long, default_value_t = 256)]
    m: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ArrayArg {
    Ula,
    Upa,
}

fn execute(driver: Driver, args: &RunArgs) -> Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(driver, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    let report = run(driver, &cfg)?;
    let paths = write_report(&args.out, driver, &cfg, &report.tables)?;
    if args.plot {
        for (stem, svg) in figures(driver, &report) {
            std::fs::write(args.out.join(format!("{stem}.svg")), svg)?;
        }
    }
    for note in &report.notes {
        println!("{note}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn classify(args: &ClassifyArgs) -> Result<()> {
    let array = match args.array {
        ArrayArg::Ula => ArrayKind::Ula,
        ArrayArg::Upa => ArrayKind::Upa,
    };
    let point = ScalingPoint::new(args.p, args.q, args.r, array).map_err(|e| Error::Config(e.to_string()))?;
    let class = classify_regime(&point)?;
    let load = predicted_max_load(&point, args.m)?;
    println!("regime: {}", class.regime);
    println!("stab: {}", class.stab);
    println!("threshold: {}", class.threshold);
    println!("rate scaling: {}", class.rate_scaling);
    println!("bins at M = {}: {}", args.m, bin_count(&point, args.m)?);
    println!(
        "predicted max load at M = {}: {}{}",
        args.m,
        load.value,
        if load.proxy { " (O(1) placeholder)" } else { "" }
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cdf(a) => execute(Driver::Cdf, a),
        Command::BoundChain(a) => execute(Driver::BoundChain, a),
        Command::GainMap(a) => execute(Driver::GainMap, a),
        Command::PowerSweep(a) => execute(Driver::PowerSweep, a),
        Command::Maxload(a) => execute(Driver::Maxload, a),
        Command::TuneAlpha(a) => execute(Driver::TuneAlpha, a),
        Command::Classify(a) => classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
