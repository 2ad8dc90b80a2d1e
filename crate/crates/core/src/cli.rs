//! Command-line front end. Each subcommand has a pure core returning the
//! file contents, so tests can check outputs without a process boundary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::bits::BitString;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extractor::{conv_extract, parse_header};
use crate::protocol::run;
use crate::quantum::optimize::optimize_s_tilde;
use crate::rates::{eta_opt, EatParams};
use crate::rng::Streams;
use crate::sources::MdlParams;

pub const RATE_HEADER: &str = "mu_min,mu_max,n,delta_est,eps_s,eps_ea,s_exp,eta_opt,s_t_star,status";
pub const TRANSCRIPT_HEADER: &str = "i,x,y,a,b,c";
pub const SUMMARY_HEADER: &str = "c_bar,aborted,m,secrecy_eps,eta_opt,s_t_star";

#[derive(Debug, Parser)]
#[command(
    name = "randamp",
    version,
    about = "Device-independent randomness amplification toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite-size entropy rates over a parameter grid (CSV).
    Rate(ConfigArgs),
    /// Quantum maximum of the source-independent MDL functional.
    Optimize(ConfigArgs),
    /// Run the protocol; writes transcript.csv, summary.csv and key.bin.
    Simulate(SimulateArgs),
    /// Apply the convolution extractor to packed bit files.
    Extract(ExtractArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// First source, little-endian packed bits.
    #[arg(long)]
    pub x: PathBuf,
    /// Second source (seed), little-endian packed bits.
    #[arg(long)]
    pub z: PathBuf,
    /// Sidecar header holding "N m".
    #[arg(long)]
    pub header: PathBuf,
    /// Output directory; the key goes to `extracted.bin`.
    #[arg(long)]
    pub out: PathBuf,
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        None => print!("{contents}"),
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rate(a) => emit(a.out.as_deref(), "rate.csv", &rate_csv(&load(&a.config, a.seed)?)?),
        Command::Optimize(a) => emit(
            a.out.as_deref(),
            "optimize.txt",
            &optimize_report(&load(&a.config, a.seed)?)?,
        ),
        Command::Simulate(a) => {
            let files = simulate(&load(&a.config, a.seed)?)?;
            fs::create_dir_all(&a.out)?;
            fs::write(a.out.join("transcript.csv"), files.transcript)?;
            fs::write(a.out.join("summary.csv"), files.summary)?;
            fs::write(a.out.join("key.bin"), files.key)?;
            Ok(())
        }
        Command::Extract(a) => {
            let header = fs::read_to_string(&a.header)?;
            let key = extract_bytes(&fs::read(&a.x)?, &fs::read(&a.z)?, &header)?;
            fs::create_dir_all(&a.out)?;
            fs::write(a.out.join("extracted.bin"), key)?;
            Ok(())
        }
    }
}

struct RateRow {
    mu: [f64; 2],
    n: u64,
    s_exp: f64,
    result: std::result::Result<(f64, f64, bool), String>,
}

/// One row per `(μ, n, S_exp)` grid point, sorted by those keys. Infeasible
/// points keep their row with empty rate fields and the reason in `status`.
pub fn rate_csv(cfg: &RunConfig) -> Result<String> {
    let r = cfg.rate_section()?;
    let s_values = r.s_exp_values();
    let mut points = Vec::new();
    for &mu in &r.mu {
        for &n in &r.n {
            for &s in &s_values {
                points.push((mu, n, s));
            }
        }
    }
    points.sort_by(|a, b| {
        a.0[0]
            .total_cmp(&b.0[0])
            .then(a.0[1].total_cmp(&b.0[1]))
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    let rows: Vec<RateRow> = points
        .into_par_iter()
        .map(|(mu, n, s_exp)| {
            let result = MdlParams::new(mu[0], mu[1])
                .and_then(|p| {
                    let eat = EatParams::new(n as u128, s_exp, r.delta_est, r.eps_s, r.eps_ea)?;
                    eta_opt(&eat, &p)
                })
                .map(|res| (res.eta_opt, res.s_t_star, res.is_positive()))
                .map_err(|e| e.to_string());
            RateRow { mu, n, s_exp, result }
        })
        .collect();

    let mut out = String::from(RATE_HEADER);
    out.push('\n');
    for row in rows {
        let prefix = format!(
            "{},{},{},{},{},{},{}",
            row.mu[0], row.mu[1], row.n, r.delta_est, r.eps_s, r.eps_ea, row.s_exp
        );
        match row.result {
            Ok((eta, s_t, positive)) => {
                let status = if positive { "ok" } else { "nonpositive" };
                writeln!(out, "{prefix},{eta},{s_t},{status}").expect("write to String");
            }
            Err(reason) => {
                let reason = reason.replace([',', '\n'], ";");
                writeln!(out, "{prefix},,,infeasible: {reason}").expect("write to String");
            }
        }
    }
    Ok(out)
}

pub fn optimize_report(cfg: &RunConfig) -> Result<String> {
    let (params, config) = cfg.optimizer()?;
    let opt = optimize_s_tilde(&params, &config)?;
    let m = opt.strategy.measurements();
    let spectrum = opt.strategy.state.spectrum();
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let angles: Vec<f64> = m.iter().map(|x| x.angle).collect();
    let azimuths: Vec<f64> = m.iter().map(|x| x.azimuth).collect();

    let mut out = String::new();
    writeln!(
        out,
        "S-tilde maximum for mu_min = {}, mu_max = {}",
        params.mu_min(),
        params.mu_max()
    )
    .ok();
    writeln!(out, "  value      {:.9}", opt.value).ok();
    writeln!(
        out,
        "  Alice      theta0 = {:+.6}  theta1 = {:+.6}",
        angles[0], angles[1]
    )
    .ok();
    writeln!(
        out,
        "  Bob        theta0 = {:+.6}  theta1 = {:+.6}",
        angles[2], angles[3]
    )
    .ok();
    writeln!(
        out,
        "  restarts   {} ({} converged, best #{})",
        config.restarts, opt.restarts_converged, opt.best_restart
    )
    .ok();
    writeln!(out).ok();
    writeln!(out, "[result]").ok();
    writeln!(out, "s_tilde_star={}", opt.value).ok();
    writeln!(out, "angles={}", join(&angles)).ok();
    writeln!(out, "azimuths={}", join(&azimuths)).ok();
    writeln!(out, "state_spectrum={}", join(&spectrum)).ok();
    writeln!(out, "converged={}", opt.converged).ok();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationFiles {
    pub transcript: String,
    pub summary: String,
    pub key: Vec<u8>,
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulationFiles> {
    let source = cfg.source_model()?;
    let device = cfg.device_model()?;
    let eat = cfg.eat_params()?;
    let ext = cfg.extractor_config()?;
    let outcome = run(&device, &source, &eat, &ext, &Streams::new(cfg.seed))?;

    let mut transcript = String::with_capacity(24 * outcome.rounds.len() + 16);
    transcript.push_str(TRANSCRIPT_HEADER);
    transcript.push('\n');
    for r in &outcome.rounds {
        writeln!(transcript, "{},{},{},{},{},{}", r.i, r.x, r.y, r.a, r.b, r.c).expect("write to String");
    }
    let summary = format!(
        "{SUMMARY_HEADER}\n{},{},{},{},{},{}\n",
        outcome.c_bar,
        outcome.aborted,
        outcome.key_length(),
        outcome.secrecy_eps,
        outcome.rate.eta_opt,
        outcome.rate.s_t_star
    );
    Ok(SimulationFiles {
        transcript,
        summary,
        key: outcome.key.map(|k| k.to_le_bytes()).unwrap_or_default(),
    })
}

/// Extracts from packed inputs; both are read as `N`-bit strings.
pub fn extract_bytes(x: &[u8], z: &[u8], header: &str) -> Result<Vec<u8>> {
    let (n, m) = parse_header(header.trim())?;
    let x = BitString::from_le_bytes(x, n)?;
    let z = BitString::from_le_bytes(z, n)?;
    Ok(conv_extract(&x, &z, m)?.to_le_bytes())
}
