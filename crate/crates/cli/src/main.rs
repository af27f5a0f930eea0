use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dbar_eit::config::PipelineConfig;
use dbar_eit::pipeline::{Workspace, OUTPUT_ENV};
use dbar_eit::Execution;
use std::path::PathBuf;

/// D-bar EIT reconstruction pipeline.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Output root; each config writes to `<root>/<name>/`.
    #[arg(long, global = true, env = OUTPUT_ENV, default_value = "out")]
    out: PathBuf,
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh the domain and simulate noisy electrode voltages.
    Simulate(Base),
    /// Build the DN maps of the data and of the unit admittivity.
    Dnmap(Base),
    /// Compute the measured scattering transform.
    Scatter {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        recon: Recon,
    },
    /// Standard and prior-weighted D-bar reconstructions.
    Reconstruct {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        recon: Recon,
    },
    /// Write conductivity and permittivity heatmaps of a reconstruction run.
    Render {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        recon: Recon,
        /// One color scale shared by truth and all reconstructions.
        #[arg(long)]
        common_scale: bool,
        /// Draw the true region outlines.
        #[arg(long)]
        overlay_truth: bool,
    },
    /// All stages in order.
    Run {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        recon: Recon,
    },
}

#[derive(Args)]
struct Base {
    /// Pipeline config (TOML).
    config: PathBuf,
}

#[derive(Args, Default)]
struct Recon {
    /// Truncation radius of the measured scattering.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Radius of the spliced scattering.
    #[arg(long = "R2")]
    r2: Option<f64>,
    /// Weight of the constant terms, 1 = standard.
    #[arg(long)]
    alpha: Option<f64>,
    /// Drop measured scattering above this magnitude.
    #[arg(long)]
    threshold: Option<f64>,
    /// Standard method only.
    #[arg(long)]
    no_prior: bool,
    /// Region file for the prior.
    #[arg(long)]
    prior_file: Option<PathBuf>,
}

impl Recon {
    fn apply(&self, cfg: &mut PipelineConfig) -> dbar_eit::Result<()> {
        let rc = &mut cfg.reconstruction;
        if let Some(r) = self.r {
            rc.r = r;
            if self.r2.is_none() && rc.r2 < r {
                rc.r2 = r;
            }
        }
        if let Some(r2) = self.r2 {
            rc.r2 = r2;
        }
        if let Some(a) = self.alpha {
            rc.alpha = a;
        }
        if let Some(t) = self.threshold {
            rc.threshold = Some(t);
        }
        if self.no_prior {
            rc.prior = false;
        }
        if let Some(p) = &self.prior_file {
            rc.prior_file = Some(p.clone());
        }
        cfg.validate()
    }
}

fn workspace(cli: &Cli, base: &Base, recon: Option<&Recon>) -> Result<Workspace> {
    let mut cfg = PipelineConfig::read(&base.config).with_context(|| format!("reading {}", base.config.display()))?;
    if let Some(r) = recon {
        r.apply(&mut cfg)?;
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let ws = Workspace::new(cfg, Some(&cli.out), exec)?;
    log::info!("output directory {}", ws.dir.display());
    Ok(ws)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(base) => {
            let sim = workspace(&cli, base, None)?.simulate()?;
            println!("{} triangles, {} patterns", sim.mesh.triangles.len(), sim.data.currents.len());
        }
        Command::Dnmap(base) => {
            let maps = workspace(&cli, base, None)?.dnmap()?;
            println!("gamma0 {} {}", maps.gamma0().re, maps.gamma0().im);
        }
        Command::Scatter { base, recon } => {
            let s = workspace(&cli, base, Some(recon))?.scatter()?;
            println!("{} active points, max |S| {:.4}", s.active_count(), s.max_abs());
        }
        Command::Reconstruct { base, recon } | Command::Run { base, recon } => {
            let ws = workspace(&cli, base, Some(recon))?;
            let rec = if matches!(cli.command, Command::Run { .. }) { ws.run()? } else { ws.reconstruct()? };
            let invalid =
                rec.gamma_new.gamma.valid.iter().zip(&ws.setup.grid.omega_mask).filter(|(v, o)| **o && !**v).count();
            println!("wrote {} ({invalid} invalid pixels)", ws.run_dir().display());
            if let Some(m) = rec.metrics {
                print!("{}", m.to_text());
            }
        }
        Command::Render { base, recon, common_scale, overlay_truth } => {
            let ws = workspace(&cli, base, Some(recon))?;
            for p in ws.render(*common_scale, *overlay_truth)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
