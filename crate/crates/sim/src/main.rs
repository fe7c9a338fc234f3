use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mimo_cnc_sim::sweeps;
use mimo_cnc_sim::{write_records, ScenarioConfig, SimError, SweepRecord};

#[derive(Parser)]
#[command(
    name = "mimo-cnc",
    version,
    about = "Massive-MIMO OFDM clipping-noise cancellation sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER against Eb/N0 for each receiver and iteration count
    BerSweep(Common),
    /// Received signal-to-distortion ratio against IBO
    SdrSweep(Common),
    /// Per-antenna Bussgang gain, empirical against analytic
    AlphaCheck(Common),
    /// BER after I iterations against the BER of the first detection
    BerinBerout(Common),
    /// BER after every iteration up to the largest configured count
    Convergence(Common),
    /// Operation counts per receiver
    Complexity(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig, SimError> {
        let mut c = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }

    fn output(&self) -> Result<Box<dyn Write>, SimError> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }
}

type Runner = fn(&ScenarioConfig) -> Result<Vec<SweepRecord>, SimError>;

fn run(cli: Cli) -> Result<(), SimError> {
    let (common, runner): (&Common, Runner) = match &cli.command {
        Command::BerSweep(c) => (c, sweeps::run_ber_sweep),
        Command::SdrSweep(c) => (c, sweeps::run_sdr_sweep),
        Command::AlphaCheck(c) => (c, sweeps::run_alpha_check),
        Command::BerinBerout(c) => (c, sweeps::run_berin_berout),
        Command::Convergence(c) => (c, sweeps::run_convergence),
        Command::Complexity(c) => {
            let rows = sweeps::complexity_report(&c.scenario()?)?;
            return sweeps::write_complexity(c.output()?, &rows);
        }
    };
    let scenario = common.scenario()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    let start = Instant::now();
    let records = pool.install(|| runner(&scenario))?;
    write_records(common.output()?, &records)?;
    let mut last = None;
    for r in &records {
        if last != Some(r.point) {
            eprintln!("point {:>4}: {:.3} s", r.point, r.wall_time_s);
            last = Some(r.point);
        }
    }
    eprintln!(
        "{} rows in {:.3} s",
        records.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
