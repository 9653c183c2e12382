use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use layerheat_cli::commands::{self, Failure, Suite};

/// Heat conduction in layered media by integral transforms.
#[derive(Parser)]
#[command(name = "layerheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at every probe and time; writes solution.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites against the configured medium.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Compare the spectral solution with the finite-difference oracle.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "fd-h")]
        fd_h: f64,
        #[arg(long = "fd-dt")]
        fd_dt: f64,
        /// Largest acceptable relative L2 error.
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
        /// Also write compare.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the transform kernels on a grid such as
    /// `rho=0.5,2;x=-1:1:5;xi=-0.5;s=0,1`.
    Kernels {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Roundtrip,
    Theorem1,
    Kernels,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config, out } => {
            let loaded = commands::load(&config)?;
            let out = out
                .or_else(|| loaded.config.output.as_ref().map(PathBuf::from))
                .ok_or_else(|| Failure::Usage("no output directory: pass --out or set `output` in the config".into()))?;
            println!("{}", commands::solve(&loaded, &out)?);
        }
        Command::Verify { config, suite } => {
            let loaded = commands::load(&config)?;
            let suite = match suite {
                SuiteArg::All => Suite::All,
                SuiteArg::Roundtrip => Suite::Roundtrip,
                SuiteArg::Theorem1 => Suite::Theorem1,
                SuiteArg::Kernels => Suite::Kernels,
            };
            for line in commands::verify(&loaded, suite)? {
                println!("{line}");
            }
        }
        Command::Compare { config, fd_h, fd_dt, tolerance, out } => {
            let loaded = commands::load(&config)?;
            let (csv, summary) = commands::compare_fd(&loaded, fd_h, fd_dt, tolerance)?;
            if let Some(dir) = out {
                let path = dir.join("compare.csv");
                std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::write(&path, &csv))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            print!("{csv}");
            eprintln!("{summary}");
        }
        Command::Kernels { config, grid } => {
            let loaded = commands::load(&config)?;
            let grid = commands::parse_kernel_grid(&grid).map_err(Failure::Usage)?;
            print!("{}", commands::kernels(&loaded, &grid)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in f.lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
