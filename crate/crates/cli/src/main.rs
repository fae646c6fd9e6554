//! Batch front-end: builds and caches weight tables, runs the named
//! verification suites, and emits CSV/SVG reports. Exit codes: 0 all
//! assertions passed, 1 an assertion failed (or a runtime error), 2 usage.

mod config;
mod suites;

use clap::{Parser, Subcommand};
use config::RunConfig;
use ntlab::report::write_text;
use ntlab::sieve::build_spf;
use ntlab::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "ntlab", version, about = "multiplicative-function and exponential-sum lab")]
struct Cli {
    /// flat key=value config file; CLI flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    limit: Option<u64>,
    /// family id: sigma_ratio | phi_ratio | sigma_over_phi | singular | tau_alpha | phi_raw
    #[arg(long, global = true)]
    family: Option<String>,
    /// exponent, e.g. "1", "-1", "0.5+0.5i"
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// output directory for CSV/SVG reports
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads; 0 = automatic
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// cache directory (also settable via NTLAB_CACHE)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// modulus parameter Q for exponential-sum windows
    #[arg(long, global = true)]
    q: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// build and cache the configured family's weight table
    Sieve,
    /// run a verification suite
    Verify {
        /// vaughan | vaaler | kusmin | conditions | tau | partition
        suite: String,
    },
    /// exponential sums over dyadic windows with envelope columns
    Expsum,
    /// summatory error profile for the configured family
    Profile,
    /// main-term coefficients: fitted and analytic, side by side
    Coeffs,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = cli.limit {
        cfg.limit = v;
    }
    if let Some(v) = &cli.family {
        cfg.family = v.clone();
    }
    if let Some(v) = &cli.alpha {
        cfg.alpha = v.clone();
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.threads {
        cfg.threads = v;
    }
    if let Some(v) = &cli.cache {
        cfg.cache = v.clone();
    }
    if let Some(v) = cli.q {
        cfg.q = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = build_config(cli)?;
    if cfg.threads > 0 {
        // a later global-pool error just means a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    match &cli.cmd {
        Cmd::Sieve => {
            let (hit, path) = suites::cmd_sieve(&cfg)?;
            println!(
                "{} {}",
                if hit { "cache hit:" } else { "built:" },
                path.display()
            );
            Ok(true)
        }
        Cmd::Verify { suite } => {
            let (pass, csv) = match suite.as_str() {
                "vaughan" => suites::suite_vaughan(&cfg)?,
                "vaaler" => suites::suite_vaaler(&cfg)?,
                "kusmin" => suites::suite_kusmin(&cfg)?,
                "conditions" => suites::suite_conditions(&cfg)?,
                "tau" => suites::suite_tau(&cfg)?,
                "partition" => suites::suite_partition(&cfg)?,
                other => return Err(Error::Usage(format!("unknown suite '{other}'"))),
            };
            let path = cfg.out.join(format!("verify_{suite}.csv"));
            write_text(&path, &csv)?;
            println!("{suite}: {} ({})", if pass { "pass" } else { "FAIL" }, path.display());
            Ok(pass)
        }
        Cmd::Expsum => {
            let (pass, csv) = suites::cmd_expsum(&cfg)?;
            let path = cfg.out.join("expsum.csv");
            write_text(&path, &csv)?;
            println!("expsum: {}", path.display());
            Ok(pass)
        }
        Cmd::Profile => {
            let t = build_spf(cfg.limit)?;
            let out = suites::cmd_profile(&cfg, &t)?;
            let path = cfg.out.join("profile.csv");
            write_text(&path, &out.csv)?;
            println!("profile: {} ({})", if out.pass { "pass" } else { "FAIL" }, path.display());
            if let Some(svg) = &out.svg {
                let spath = cfg.out.join("profile.svg");
                write_text(&spath, svg)?;
                println!("chart: {}", spath.display());
            }
            Ok(out.pass)
        }
        Cmd::Coeffs => {
            let t = build_spf(cfg.limit)?;
            let (pass, csv) = suites::cmd_coeffs(&cfg, &t)?;
            let path = cfg.out.join("coeffs.csv");
            write_text(&path, &csv)?;
            println!("coeffs: {} ({})", if pass { "agree" } else { "DISAGREE" }, path.display());
            Ok(pass)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}
