use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parbound::config::AssignmentMode;
use parbound::{CliError, Command, Invocation, OracleOverrides};

#[derive(Parser)]
#[command(name = "parbound", version, about = "ML decoding bounds over parallel binary-input channels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bhattacharyya parameter, capacity and cutoff rate per channel.
    Channels,
    /// Distance spectrum (and IOWE) of an ensemble or explicit code.
    Spectrum,
    /// Union, DS2 and 1961 Gallager bounds over a channel sweep.
    Bound,
    /// Attainable-region boundary scan with capacity and cutoff references.
    Region,
    /// Monte-Carlo ML decoding of an explicit code.
    Oracle {
        /// Code file, one codeword per line.
        #[arg(long)]
        code: Option<PathBuf>,
        /// Channel-set file.
        #[arg(long)]
        channels: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_enum)]
        assignment: Option<AssignmentMode>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let (command, oracle) = match cli.command {
        Cmd::Channels => (Command::Channels, OracleOverrides::default()),
        Cmd::Spectrum => (Command::Spectrum, OracleOverrides::default()),
        Cmd::Bound => (Command::Bound, OracleOverrides::default()),
        Cmd::Region => (Command::Region, OracleOverrides::default()),
        Cmd::Oracle { code, channels, trials, assignment } => {
            (Command::Oracle, OracleOverrides { code, channels, trials, assignment })
        }
    };
    let config = cli.config.ok_or_else(|| CliError::Usage("--config <file> is required".into()))?;
    let mut inv = Invocation::new(command, config, cli.out);
    inv.seed = cli.seed;
    inv.oracle = oracle;
    parbound::run(&inv)
}
