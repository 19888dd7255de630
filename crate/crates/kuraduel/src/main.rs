use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kuraduel::exp::config::parse;
use kuraduel::exp::runner::{
    cmd_fragmentation, cmd_optimize, cmd_rerun, cmd_simulate, cmd_spectrum, realize,
};
use kuraduel::exp::RunError;

/// Blue-vs-Red two-network frustrated Kuramoto toolkit.
#[derive(Parser)]
#[command(name = "kuraduel", version, about)]
struct Cli {
    /// Worker pool size for sweeps (default: number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the full system and emit trajectory + measures CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the lowest super-Laplacian eigenvalue over the centroid angle.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Angle grid as lo:hi:step (values may carry a `pi` suffix).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Scan the stable centroid angle over Blue's frustration.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Sweep the cross coupling and locate the fragmentation thresholds.
    Fragmentation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Reproduce a previous run from its manifest and verify checksums.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), RunError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| RunError::Config(format!("bad --jobs value: {e}")))?;
    }
    let seed_override = match std::env::var("KURADUEL_SEED") {
        Ok(v) => Some(
            v.parse::<u64>()
                .map_err(|_| RunError::Config(format!("bad KURADUEL_SEED {v:?}")))?,
        ),
        Err(_) => None,
    };

    let prepare = |config: &PathBuf,
                   out: &Option<PathBuf>|
     -> Result<(kuraduel::exp::runner::Realized, PathBuf), RunError> {
        let text = std::fs::read_to_string(config)?;
        let cfg = parse(&text).map_err(|e| RunError::Config(e.to_string()))?;
        let base = config.parent().unwrap_or(std::path::Path::new("."));
        let out_dir = out
            .clone()
            .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
            .ok_or_else(|| {
                RunError::Config("no output directory: pass --out or set [output] dir".into())
            })?;
        let realized = realize(&cfg, base, seed_override)?;
        Ok((realized, out_dir))
    };

    match &cli.cmd {
        Cmd::Simulate { config, out } => {
            let (r, out_dir) = prepare(config, out)?;
            cmd_simulate(&r, &out_dir, seed_override)?;
            println!("simulate: wrote {}", out_dir.display());
        }
        Cmd::Spectrum { config, out, grid } => {
            let (r, out_dir) = prepare(config, out)?;
            cmd_spectrum(&r, &out_dir, grid.as_deref(), seed_override)?;
            println!("spectrum: wrote {}", out_dir.display());
        }
        Cmd::Optimize { config, out, grid } => {
            let (r, out_dir) = prepare(config, out)?;
            cmd_optimize(&r, &out_dir, grid.as_deref(), seed_override)?;
            println!("optimize: wrote {}", out_dir.display());
        }
        Cmd::Fragmentation { config, out, grid } => {
            let (r, out_dir) = prepare(config, out)?;
            cmd_fragmentation(&r, &out_dir, grid.as_deref(), seed_override)?;
            println!("fragmentation: wrote {}", out_dir.display());
        }
        Cmd::Rerun { manifest, out } => {
            cmd_rerun(manifest, out)?;
            println!("rerun: outputs verified against {}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
