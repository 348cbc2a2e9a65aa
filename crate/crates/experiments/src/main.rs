use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use robust_lowrank_experiments::commands::{
    converge, instance, landscape, phase, ratecurve, riprobe, stepgrid,
};
use robust_lowrank_experiments::config::{merge, read_json, Scale};
use robust_lowrank_experiments::error::{ExpError, Result};
use robust_lowrank_experiments::plot::{render_file, PlotSpec};
use robust_lowrank_experiments::pool::default_workers;

#[derive(Parser)]
#[command(name = "rlr", version, about = "Robust low-rank recovery experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for instances and trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Paper)]
    scale: Scale,
    /// JSON object overriding the command's configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance into the output directory.
    Gen,
    /// Run one solve on an instance directory.
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Write initial factors for an instance directory.
    Init {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Final distance over a (mu0, rho) grid.
    Stepgrid,
    /// Distance traces for each step-size schedule.
    Converge,
    /// Success rate over outlier ratio and measurement budget.
    Phase,
    /// Loss landscapes of the l1 and l2 objectives.
    Landscape,
    /// Lower bound on the decay rate against the initial step.
    Ratecurve,
    /// Empirical RIP deviation against the measurement budget.
    Riprobe,
    /// Render a CSV table to SVG.
    Plot {
        csv: PathBuf,
        /// Output file (defaults to the CSV name with .svg in the output
        /// directory).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Heatmap of --value over (--x, --y) instead of line plots.
        #[arg(long)]
        heatmap: bool,
        #[arg(long, default_value = "k")]
        x: String,
        /// Comma-separated columns (line) or the row axis (heatmap).
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        #[arg(long, default_value = "success_rate")]
        value: String,
        #[arg(long)]
        log_y: bool,
    },
}

fn overrides(global: &Global) -> Result<Option<Value>> {
    global.config.as_deref().map(read_json).transpose()
}

fn workers(global: &Global) -> Result<usize> {
    match global.workers {
        Some(0) => Err(ExpError::config("--workers must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

fn out_file(global: &Global, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&global.out)?;
    Ok(global.out.join(name))
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let over = overrides(g)?;
    let over = over.as_ref();
    match cli.command {
        Command::Gen => {
            let cfg = merge(instance::default_problem(g.scale, g.seed)?, over)?;
            instance::gen(&cfg, &g.out)?;
            announce(&g.out);
        }
        Command::Solve { instance: dir } => {
            let cfg = merge(instance::SolveConfig::default(), over)?;
            let inst = instance::load(&dir)?;
            let outcome = instance::solve(&cfg, &inst)?;
            instance::write_solve(&g.out, &inst, &outcome)?;
            println!("{}", serde_json::to_string_pretty(&outcome.report)?);
        }
        Command::Init { instance: dir } => {
            let spec: instance::InitSpec = match over {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| ExpError::config(format!("bad init configuration: {e}")))?,
                None => instance::InitSpec::default(),
            };
            let inst = instance::load(&dir)?;
            let out = instance::init(&spec, &inst)?;
            instance::write_init(&g.out, &out)?;
            println!("status: {:?}, kept: {}", out.status, out.kept);
        }
        Command::Stepgrid => {
            let cfg = merge(stepgrid::StepgridConfig::defaults(g.scale, g.seed), over)?;
            let cells = stepgrid::run(&cfg, workers(g)?)?;
            let path = out_file(g, "stepgrid.csv")?;
            stepgrid::write(&path, &cells)?;
            announce(&path);
        }
        Command::Converge => {
            let cfg = merge(converge::ConvergeConfig::defaults(g.scale, g.seed), over)?;
            let result = converge::run(&cfg, workers(g)?)?;
            let path = out_file(g, "converge.csv")?;
            converge::write(&path, &result)?;
            announce(&path);
        }
        Command::Phase => {
            let cfg = merge(phase::PhaseConfig::defaults(g.scale, g.seed), over)?;
            let result = phase::run(&cfg, workers(g)?)?;
            let path = out_file(g, "phase.csv")?;
            phase::write(&path, &result.subgm)?;
            announce(&path);
            if let Some(l2) = &result.l2 {
                let path = out_file(g, "phase_l2.csv")?;
                phase::write(&path, l2)?;
                announce(&path);
            }
        }
        Command::Landscape => {
            let cfg = merge(landscape::LandscapeConfig::defaults(g.seed), over)?;
            let panels = landscape::run(&cfg)?;
            std::fs::create_dir_all(&g.out)?;
            landscape::write(&g.out, &panels)?;
            for p in &panels {
                println!(
                    "p={:.2} {:?}: argmax ({:.3}, {:.3}) at_truth={}",
                    p.p, p.loss, p.argmax.0, p.argmax.1, p.at_truth
                );
            }
        }
        Command::Ratecurve => {
            let cfg = merge(ratecurve::RatecurveConfig::default(), over)?;
            let points = ratecurve::run(&cfg)?;
            let path = out_file(g, "ratecurve.csv")?;
            ratecurve::write(&path, &points)?;
            announce(&path);
        }
        Command::Riprobe => {
            let cfg = merge(riprobe::RiprobeConfig::defaults(g.scale, g.seed), over)?;
            let points = riprobe::run(&cfg, workers(g)?)?;
            let path = out_file(g, "riprobe.json")?;
            riprobe::write(&path, &points)?;
            announce(&path);
        }
        Command::Plot {
            csv,
            svg,
            heatmap,
            x,
            y,
            value,
            log_y,
        } => {
            let spec = match over {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| ExpError::config(format!("bad plot specification: {e}")))?,
                None if heatmap => PlotSpec::Heatmap {
                    x,
                    y: y.into_iter().next().unwrap_or_else(|| "m_over_nr".into()),
                    value,
                },
                None => PlotSpec::Line { x, y, log_y },
            };
            let path = match svg {
                Some(p) => p,
                None => {
                    let stem = csv
                        .file_stem()
                        .ok_or_else(|| ExpError::config("CSV path has no file name"))?;
                    out_file(g, &format!("{}.svg", stem.to_string_lossy()))?
                }
            };
            render_file(&csv, &spec, &path)?;
            announce(&path);
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
