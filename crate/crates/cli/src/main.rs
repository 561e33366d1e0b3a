use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use scanprobe_cli::output::run_staged;
use scanprobe_cli::{calibrate, fig3, scan, sensitivity, squeeze, ScenarioConfig};

#[derive(Parser)]
#[command(name = "scanprobe", version, about = "Squeezed scanning-probe interferometer scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Shots per measured point.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Calibrate the twist strength and emit ξ²(μ).
    Squeeze,
    /// Phase noise against Ramsey time for squeezed and coherent input.
    Fig3,
    /// Microwave phase shift and squeezing along the transport ramp.
    Scan,
    /// Convert phase noise into field sensitivity.
    Sensitivity,
    /// Fit the imaging gain from coherent-state noise.
    Calibrate,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting the thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    if let Some(s) = cli.shots {
        cfg.shots = s;
    }
    cfg.validate()?;

    let dir = match cli.command {
        Command::Squeeze => {
            let (o, dir) = run_staged(&cfg, "squeeze", |out| {
                let o = squeeze::compute(&cfg)?;
                squeeze::write(&o, out)?;
                Ok(o)
            })?;
            let s = &o.summary;
            println!("N = {}: mu* = {:.6e} rad gives xi2 = {:.3} dB", s.atom_count, s.mu_star_rad, s.xi2_db_at_mu_star);
            println!("optimum {:.3} dB at mu = {:.6e} rad", s.xi2_db_optimal, s.mu_optimal_rad);
            dir
        }
        Command::Fig3 => {
            let (o, dir) = run_staged(&cfg, "fig3", |out| {
                let o = fig3::compute(&cfg)?;
                fig3::write(&o, out)?;
                Ok(o)
            })?;
            let s = &o.summary;
            let ms = |t: Option<f64>| t.map_or("none".to_string(), |t| format!("{:.1} ms", 1e3 * t));
            println!("SQL crossing: {} (uncorrected {})", ms(s.mean_crossing_time_s), ms(s.mean_crossing_time_uncorrected_s));
            println!(
                "short T_R: squeezed {:.2} dB, coherent {:+.2} dB",
                s.squeezed_short_xi2_db, s.coherent_short_xi2_db
            );
            dir
        }
        Command::Scan => {
            let (o, dir) = run_staged(&cfg, "scan", |out| {
                let o = scan::compute(&cfg)?;
                scan::write(&o, out)?;
                Ok(o)
            })?;
            for p in &o.positions {
                println!(
                    "eta {:.2}  d = {:5.1} um  dphi = {:+.3} rad  xi2 = {:+.2} dB",
                    p.eta,
                    1e6 * p.distance_m,
                    p.delta_phi_rad,
                    p.xi2_db
                );
            }
            println!(
                "<xi2> = {:.2} dB (uncorrected {:.2} dB)",
                o.summary.mean_xi2_db, o.summary.mean_xi2_uncorrected_db
            );
            dir
        }
        Command::Sensitivity => {
            let (o, dir) = run_staged(&cfg, "sensitivity", |out| {
                let o = sensitivity::compute(&cfg)?;
                sensitivity::write(&o, out)?;
                Ok(o)
            })?;
            let r = &o.report;
            println!("{}", o.source);
            println!(
                "delta_nu = {:.4} Hz, delta_B = {:.2} pT, {:.2} pT/sqrt(Hz)",
                r.delta_nu_hz,
                1e12 * r.delta_b_nearres_t,
                1e12 * r.per_root_hz_t
            );
            if let Some(q) = r.delta_b_quadratic_t {
                println!("quadratic-shift delta_B = {:.3e} T", q);
            }
            dir
        }
        Command::Calibrate => {
            let (o, dir) = run_staged(&cfg, "calibrate", |out| {
                let o = calibrate::compute(&cfg)?;
                calibrate::write(&o, out)?;
                Ok(o)
            })?;
            let s = &o.summary;
            println!(
                "alpha = {:.3} +- {:.3} (mean of {}), injected {} covered {}/{}",
                s.mean_alpha, s.mean_half_width, s.repetitions, s.injected_alpha, s.covered, s.repetitions
            );
            dir
        }
    };
    println!("wrote {}", dir.display());
    Ok(())
}
