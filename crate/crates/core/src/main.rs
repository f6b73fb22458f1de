use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stbc::cli;
use stbc::error::{Error, Result};
use stbc::fastdecode::SplitPolicy;
use stbc::sim::{parse_snr_list, Shaping, SimConfig};

#[derive(Parser)]
#[command(name = "stbc", version, about = "Space-time lattice codes: analysis, decoding and simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Best,
    Half,
}

#[derive(Subcommand)]
enum Cmd {
    /// Catalogue of built-in codes with rate, decoding complexity and NVD status.
    ListCodes,
    /// Gram matrix, volume, minimum determinant and normalized delta.
    Analyze {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 1)]
        range: i64,
        #[arg(long, default_value_t = stbc::lattice::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical orthogonality mask and complexity estimate.
    Pattern {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = cli::PATTERN_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Policy::Best)]
        policy: Policy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sphere decoder versus exhaustive search on random trials.
    DecodeTest {
        #[arg(long)]
        code: String,
        #[arg(long, default_value = "pam:2")]
        alphabet: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        snr: f64,
        /// Decode without the grouped structure.
        #[arg(long)]
        flat: bool,
    },
    /// Monte-Carlo block error rate; writes CSV and a `.meta` sidecar.
    Simulate {
        /// key=value configuration file; flags override its entries.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        snr: Option<String>,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        n_r: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discriminant and delta lower bounds for a center and index.
    Bounds {
        #[arg(long, default_value = "Q")]
        center: String,
        #[arg(long)]
        index: u64,
        /// Bound for algebras ramified at every real place.
        #[arg(long)]
        all_real: bool,
    },
    /// Admissibility, index and discriminant of a Hasse invariant set.
    Hasse {
        /// Lines `finite LABEL NORM A M` and `real COUNT`.
        #[arg(long, required_unless_present = "table")]
        file: Option<PathBuf>,
        /// Instantiate every row of the invariant table instead.
        #[arg(long)]
        table: bool,
    },
    /// Exact basis matrices in a plain-text form.
    Datasheet {
        #[arg(long)]
        code: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate_config(
    config: Option<PathBuf>,
    code: Option<String>,
    alphabet: Option<String>,
    snr: Option<String>,
    frames: Option<u64>,
    n_r: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<SimConfig> {
    let mut cfg = match (&config, &code) {
        (Some(p), _) => SimConfig::parse(&std::fs::read_to_string(p)?)?,
        (None, Some(c)) => {
            let n_r = stbc::codebook::by_name(c)?.n_r;
            SimConfig::new(c, n_r, Shaping::Linear { pam: 2 }, vec![10.0], 1000, stbc::sim::DEFAULT_SEED)
        }
        (None, None) => return Err(Error::InvalidArgument("simulate needs --config or --code".into())),
    };
    if let (Some(c), Some(_)) = (code, &config) {
        cfg.code = c;
    }
    if let Some(a) = alphabet {
        cfg.shaping = Shaping::parse(&a)?;
    }
    if let Some(s) = snr {
        cfg.snr_db = parse_snr_list(&s)?;
    }
    if let Some(f) = frames {
        cfg.frames = f;
    }
    if let Some(n) = n_r {
        cfg.n_r = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::ListCodes => emit(&cli::list_codes()?, None),
        Cmd::Analyze { code, range, seed, out } => emit(&cli::analyze_report(&code, range, seed)?, out.as_ref()),
        Cmd::Pattern {
            code,
            samples,
            seed,
            policy,
            out,
        } => {
            let policy = match policy {
                Policy::Best => SplitPolicy::BestPrefix,
                Policy::Half => SplitPolicy::HalfTail,
            };
            emit(&cli::pattern_report(&code, samples, seed, policy)?, out.as_ref())
        }
        Cmd::DecodeTest {
            code,
            alphabet,
            trials,
            seed,
            snr,
            flat,
        } => emit(&cli::decode_test_report(&code, &alphabet, trials, seed, snr, !flat)?, None),
        Cmd::Simulate {
            config,
            code,
            alphabet,
            snr,
            frames,
            n_r,
            seed,
            workers,
            out,
        } => {
            let cfg = simulate_config(config, code, alphabet, snr, frames, n_r, seed, workers)?;
            let (csv, meta) = cli::simulate(&cfg)?;
            match out {
                Some(p) => {
                    std::fs::write(&p, &csv)?;
                    let mut m = p.into_os_string();
                    m.push(".meta");
                    std::fs::write(m, &meta)?;
                    Ok(())
                }
                None => {
                    print!("{csv}");
                    for line in meta.lines() {
                        println!("# {line}");
                    }
                    Ok(())
                }
            }
        }
        Cmd::Bounds { center, index, all_real } => emit(&cli::bounds_report(&center, index, all_real)?, None),
        Cmd::Hasse { file, table } => {
            if table {
                return emit(&cli::hasse_table()?, None);
            }
            let path = file.ok_or_else(|| Error::InvalidArgument("--file required".into()))?;
            let inv = cli::parse_invariants(&std::fs::read_to_string(path)?)?;
            emit(&cli::hasse_report(&inv)?, None)
        }
        Cmd::Datasheet { code, out } => emit(&cli::datasheet_report(&code)?, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
