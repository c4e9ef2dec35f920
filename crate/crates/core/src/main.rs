use std::path::PathBuf;

use clap::{Parser, Subcommand};

use rwrange::codec;
use rwrange::error::Result;
use rwrange::extractor;
use rwrange::geometry::range_of;
use rwrange::harness::{self, Config};
use rwrange::rng::derive_stream;
use rwrange::walk::simulate_walk;

/// Random-walk-range workbench: simulation, lossless range compression,
/// entropy bounds, potential-kernel checks, bit extraction, and fractal
/// percolation comparisons.
#[derive(Parser)]
#[command(name = "rwrange", version)]
struct Cli {
    /// Config file (flat key=value lines).
    #[arg(long, global = true, env = "RWRANGE_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed; required for every Monte Carlo experiment.
    #[arg(long, global = true, env = "RWRANGE_SEED")]
    seed: Option<u64>,

    /// Replica count.
    #[arg(long, global = true, env = "RWRANGE_REPS")]
    reps: Option<u64>,

    /// Output directory for CSV/JSON result files.
    #[arg(long, global = true, env = "RWRANGE_OUT")]
    out: Option<PathBuf>,

    /// Worker thread count; affects speed only, never results.
    #[arg(long, global = true, env = "RWRANGE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate walks; report range and boundary sizes.
    Simulate {
        #[arg(long, default_value_t = 2)]
        d: u64,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Encode d=2 walk ranges; writes the replica-0 stream as a file.
    Encode {
        #[arg(long)]
        n: Option<u64>,
        /// Path for the encoded stream (default <out>/range.rwrc).
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Decode an encoded range file and print its parameters.
    Decode { file: PathBuf },
    /// Entropy estimates: exact enumeration, sandwich bounds, or scaling.
    Entropy {
        #[arg(long, default_value_t = 2)]
        d: u64,
        #[arg(long)]
        n: Option<u64>,
        /// exact | sandwich | scaling
        #[arg(long)]
        mode: Option<String>,
        /// Comma-separated n values for scaling mode.
        #[arg(long)]
        n_grid: Option<String>,
    },
    /// Monte Carlo checks of the hitting/exit probability estimates.
    LemmaCheck {
        /// One of the named estimates, or "all".
        #[arg(long, default_value = "all")]
        lemma: String,
    },
    /// Extract near-uniform bits from walk ranges.
    Extract {
        #[arg(long)]
        n: Option<u64>,
        /// Print replica-0 bits as hex.
        #[arg(long)]
        hex: bool,
    },
    /// Sample fractal percolation trees and their entropy statistics.
    Percolation {
        #[arg(long)]
        l: Option<u64>,
    },
    /// Intersection-equivalence ratios against the walk range.
    Intersect {
        #[arg(long)]
        l: Option<u64>,
        /// Semicolon-separated target specs: point(x,y) | ball(x,y,r) | rect(x0,y0,x1,y1).
        #[arg(long)]
        targets: Option<String>,
    },
    /// Summarize result CSV files.
    Report { files: Vec<PathBuf> },
}

fn base_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.set("master_seed", seed);
    }
    if let Some(reps) = cli.reps {
        config.set("reps", reps);
    }
    Ok(config)
}

fn print_rows(out: &harness::RunOutput) {
    println!("{}", harness::CSV_HEADER);
    for row in &out.rows {
        println!("{}", row.csv_line());
    }
    if let Some(path) = &out.csv_path {
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &out.json_path {
        eprintln!("wrote {}", path.display());
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| rwrange::Error::Config(format!("thread pool: {e}")))?;
    }
    let out_dir = cli.out.clone();
    let mut config = base_config(&cli)?;

    match &cli.command {
        Command::Simulate { d, n } => {
            config.set("experiment", "simulate");
            config.set("d", d);
            if let Some(n) = n {
                config.set("n", n);
            }
            print_rows(&harness::run(&config, out_dir.as_deref())?);
        }
        Command::Encode { n, file } => {
            config.set("experiment", "encode");
            if let Some(n) = n {
                config.set("n", n);
            }
            let out = harness::run(&config, out_dir.as_deref())?;
            print_rows(&out);
            // Also persist the replica-0 stream as an actual file.
            let n = config.require_u64("n")?;
            let seed = config.master_seed()?;
            let mut rng = derive_stream(seed, 0);
            let traj = simulate_walk(2, n, &mut rng)?;
            let stream = codec::encode_range(&range_of(&traj), n)?;
            let path = match file {
                Some(p) => p.clone(),
                None => out_dir.clone().unwrap_or_else(|| PathBuf::from(".")).join("range.rwrc"),
            };
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&path, stream.to_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        Command::Decode { file } => {
            let bytes = std::fs::read(file)?;
            let stream = codec::RangeBitStream::from_bytes(&bytes)?;
            let (range, n) = codec::decode_range(&stream)?;
            println!("n={n}");
            println!("range_size={}", range.len());
            println!("boundary_size={}", rwrange::inner_boundary(&range).len());
        }
        Command::Entropy { d, n, mode, n_grid } => {
            config.set("experiment", "entropy");
            config.set("d", d);
            if let Some(n) = n {
                config.set("n", n);
            }
            if let Some(mode) = mode {
                config.set("mode", mode);
            }
            if let Some(grid) = n_grid {
                config.set("n_grid", grid);
            }
            print_rows(&harness::run(&config, out_dir.as_deref())?);
        }
        Command::LemmaCheck { lemma } => {
            config.set("experiment", "lemma-check");
            config.set("lemma", lemma);
            print_rows(&harness::run(&config, out_dir.as_deref())?);
        }
        Command::Extract { n, hex } => {
            config.set("experiment", "extract");
            if let Some(n) = n {
                config.set("n", n);
            }
            let out = harness::run(&config, out_dir.as_deref())?;
            print_rows(&out);
            if *hex {
                let n = config.require_u64("n")?;
                let seed = config.master_seed()?;
                let mut rng = derive_stream(seed, 0);
                let traj = simulate_walk(2, n, &mut rng)?;
                let result =
                    extractor::extract_bits(&range_of(&traj), &extractor::default_templates())?;
                println!("bits_hex={}", result.to_hex());
            }
        }
        Command::Percolation { l } => {
            config.set("experiment", "percolation");
            if let Some(l) = l {
                config.set("L", l);
            }
            print_rows(&harness::run(&config, out_dir.as_deref())?);
        }
        Command::Intersect { l, targets } => {
            config.set("experiment", "intersection");
            if let Some(l) = l {
                config.set("L", l);
            }
            if let Some(t) = targets {
                config.set("targets", t);
            }
            print_rows(&harness::run(&config, out_dir.as_deref())?);
        }
        Command::Report { files } => {
            print!("{}", harness::report(files)?);
        }
    }
    Ok(())
}
