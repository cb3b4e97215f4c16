use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use kvis::grid::io::{export_grayscale, export_walls};
use kvis::{dense_inverse, CellIndex, KField, WallMode};
use kvis_cli::pipeline::{
    evaluate, load_floorplan, map, read_map, read_thresholds, read_trajectory, report_json,
    simulate, thresholds, thresholds_json, write_trajectory, Outputs,
};
use kvis_cli::{run_pipeline, ExperimentConfig};

#[derive(Parser)]
#[command(name = "kvis", version, about = "Occupancy maps from WiFi signal strength")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wall likelihood shape along a ray part.
    #[arg(long, global = true, value_parser = ["gaussian-midpoint", "literal-eq4"])]
    mode: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the trajectory and simulated readings (rssi.csv).
    Simulate,
    /// Fit per-router thresholds from an RSSI log (thresholds.json).
    Fit {
        #[arg(long)]
        rssi: PathBuf,
    },
    /// Build the belief map from an RSSI log (map.pgm).
    Map {
        #[arg(long)]
        rssi: PathBuf,
        /// Thresholds file; without it the config's source is used.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Recover walls from a complete k-field (walls.pgm).
    Dense {
        #[arg(long)]
        kfield: PathBuf,
        /// Router cell as `x,y`.
        #[arg(long, value_parser = parse_cell)]
        router: CellIndex,
    },
    /// Score a map against the config's floorplan (report.json, report.txt).
    Eval {
        #[arg(long)]
        map: PathBuf,
        /// RSSI log for the k-value rows; needs --thresholds.
        #[arg(long, requires = "thresholds")]
        rssi: Option<PathBuf>,
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Run every stage end to end.
    Pipeline,
}

fn parse_cell(s: &str) -> Result<CellIndex, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok(CellIndex::new(parse(x)?, parse(y)?))
}

impl Cli {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| anyhow!("this command needs --config"))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(mode) = &self.mode {
            cfg.mapper.wall_mode = mode.parse::<WallMode>()?;
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Pipeline => {
            let out = run_pipeline(&cli.experiment()?)?;
            print!("{}", out.report);
        }
        Command::Simulate => {
            let cfg = cli.experiment()?;
            let plan = load_floorplan(&cfg.floorplan, cfg.resolution, cfg.router_cells())?;
            let traj = simulate(&cfg, &plan).context("stage `simulate` failed")?;
            let mut out = Outputs::new(&cfg.output_dir)?;
            write_trajectory(&mut out, "rssi.csv", &plan, &traj)?;
            out.commit();
        }
        Command::Fit { rssi } => {
            let cfg = cli.experiment()?;
            let plan = load_floorplan(&cfg.floorplan, cfg.resolution, cfg.router_cells())?;
            let traj = read_trajectory(rssi, &plan)?.filtered(cfg.filter_window)?;
            let th = thresholds(&cfg, &traj).context("stage `fit` failed")?;
            let mut out = Outputs::new(&cfg.output_dir)?;
            out.text("thresholds.json", &thresholds_json(&th)?)?;
            out.commit();
        }
        Command::Map { rssi, thresholds } => {
            let cfg = cli.experiment()?;
            let plan = load_floorplan(&cfg.floorplan, cfg.resolution, cfg.router_cells())?;
            let raw = read_trajectory(rssi, &plan)?;
            let th = thresholds.as_deref().map(read_thresholds).transpose()?;
            let (_, _, outcome) =
                map(&cfg, &plan, &raw, th.as_deref()).context("stage `map` failed")?;
            let mut out = Outputs::new(&cfg.output_dir)?;
            out.write("map.pgm", |p| Ok(export_grayscale(&outcome.belief, p)?))?;
            out.commit();
        }
        Command::Dense { kfield, router } => {
            let file = std::fs::File::open(kfield)
                .with_context(|| format!("opening {}", kfield.display()))?;
            let field = KField::read_csv(file, *router)?;
            let walls = dense_inverse(&field).context("stage `dense` failed")?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let mut out = Outputs::new(&dir)?;
            out.write("walls.pgm", |p| {
                Ok(export_walls(&walls.walls, walls.width, walls.height, p)?)
            })?;
            out.commit();
            println!("{} wall cells", walls.count());
        }
        Command::Eval {
            map: map_path,
            rssi,
            thresholds,
        } => {
            let cfg = cli.experiment()?;
            let plan = load_floorplan(&cfg.floorplan, cfg.resolution, cfg.router_cells())?;
            let belief = read_map(map_path)?;
            let classified = match (rssi, thresholds) {
                (Some(r), Some(t)) => {
                    let mut traj = read_trajectory(r, &plan)?.filtered(cfg.filter_window)?;
                    traj.classify(&read_thresholds(t)?)?;
                    Some(traj)
                }
                _ => None,
            };
            let report =
                evaluate(&plan, &belief, classified.as_ref()).context("stage `eval` failed")?;
            let mut out = Outputs::new(&cfg.output_dir)?;
            out.text("report.json", &report_json(&report)?)?;
            out.text("report.txt", &report.to_string())?;
            out.commit();
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
