//! Command-line front end: generate road grids, score them, render
//! them to images, and run the method-comparison benchmark.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use roadnet::bench::{
    format_verdicts, rank_check, records_to_csv, run_experiment_with, ExperimentSpec, Method,
    RunOutcome, RunRecord,
};
use roadnet::evo::{evolve, EvoConfig};
use roadnet::fitness::evaluate;
use roadnet::metrics::MetricReport;
use roadnet::render::{load_tileset, render, render_with_variants, synth_tileset};
use roadnet::swarm::{run_swarm, SwarmConfig, SwarmMethod};
use roadnet::wfc::{generate, WfcConfig};
use roadnet::{Fitness, Grid, Weights};

/// Like `print!`, but a closed stdout (e.g. piping into `head`) ends the
/// program quietly instead of panicking.
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if write!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "roadnet",
    version,
    about = "Tile-based road network generation, analysis, and rendering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a road grid with one of the five methods.
    Generate(GenerateArgs),
    /// Score a stored grid: metrics plus fitness.
    Metrics(MetricsArgs),
    /// Render a stored grid to an RGB map with segmentation masks.
    Render(RenderArgs),
    /// Run every method over a seed matrix and compare the results.
    Bench(BenchArgs),
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("'{s}' is not a size; expected HxW, e.g. 12x12"))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("'{v}' is not a positive dimension"))
    };
    Ok((parse(h)?, parse(w)?))
}

#[derive(Args)]
struct GenerateArgs {
    /// One of wfc, pso, gwo, ea, map-elites.
    #[arg(long, value_parser = Method::from_str)]
    method: Method,
    /// Grid size as HxW.
    #[arg(long, value_parser = parse_size, default_value = "12x12")]
    size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file overriding fitness weights, as {"weights": {...}}.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Collapse attempts before giving up (wfc only).
    #[arg(long, default_value_t = 10)]
    attempts: usize,
    /// Forbid outward connections on the border (wfc only).
    #[arg(long)]
    hard_boundary: bool,
    /// Generations for the iterative methods.
    #[arg(long, default_value_t = 200)]
    generations: usize,
    /// Swarm or population size for the iterative methods.
    #[arg(long, default_value_t = 40)]
    population: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Grid JSON file, as written by generate.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Grid JSON file, as written by generate.
    #[arg(long)]
    grid: PathBuf,
    /// Tileset directory; omit to use the built-in synthetic tiles.
    #[arg(long)]
    tileset: Option<PathBuf>,
    /// Tile edge in pixels for the synthetic tileset.
    #[arg(long, default_value_t = 32)]
    tile_px: u32,
    /// Seed for palette jitter and variant picks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw a random tile variant per cell instead of the primary one.
    #[arg(long)]
    variants: bool,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated subset of wfc,pso,gwo,ea,map-elites.
    #[arg(
        long,
        value_parser = Method::from_str,
        value_delimiter = ',',
        default_value = "wfc,pso,gwo,ea,map-elites"
    )]
    methods: Vec<Method>,
    /// Grid size as HxW.
    #[arg(long, value_parser = parse_size, default_value = "12x12")]
    size: (usize, usize),
    /// Runs per method.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Master seed; per-run seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Generations for the iterative methods.
    #[arg(long, default_value_t = 200)]
    generations: usize,
    /// Swarm or population size for the iterative methods.
    #[arg(long, default_value_t = 40)]
    population: usize,
    /// Collapse attempts before giving up (wfc only).
    #[arg(long, default_value_t = 10)]
    attempts: usize,
    /// Forbid outward connections on the border (wfc only).
    #[arg(long)]
    hard_boundary: bool,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Render(args) => cmd_render(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn load_weights(path: Option<&Path>) -> Result<Weights> {
    match path {
        None => Ok(Weights::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Weights::from_config_json(&text)
                .with_context(|| format!("parsing weights from {}", p.display()))
        }
    }
}

fn load_grid(path: &Path) -> Result<Grid> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Grid::from_json(&text).with_context(|| format!("parsing grid from {}", path.display()))
}

fn report_doc(report: &MetricReport, fitness: Fitness) -> serde_json::Value {
    json!({
        "metrics": report,
        "fitness": if fitness.is_valid() { json!(fitness.value()) } else { json!(null) },
        "valid": fitness.is_valid(),
    })
}

fn write_pretty(path: &Path, doc: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).expect("document serializes");
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut out = String::from("generation,best_fitness\n");
    for (generation, value) in trace.iter().enumerate() {
        out.push_str(&format!("{generation},{value}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let (height, width) = args.size;
    let weights = load_weights(args.weights.as_deref())?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut trace: Option<Vec<f64>> = None;
    let mut archive_doc: Option<serde_json::Value> = None;
    let grid = match args.method {
        Method::Wfc => {
            let cfg = WfcConfig {
                max_attempts: args.attempts,
                hard_boundary: args.hard_boundary,
                seed: args.seed,
                ..WfcConfig::default()
            };
            match generate(height, width, &cfg) {
                Ok(grid) => grid,
                Err(failure) => bail!("wfc gave up: {failure}"),
            }
        }
        Method::Pso | Method::Gwo => {
            let rule = if args.method == Method::Pso {
                SwarmMethod::Pso
            } else {
                SwarmMethod::Gwo
            };
            let cfg = SwarmConfig {
                population: args.population,
                generations: args.generations,
                seed: args.seed,
                ..SwarmConfig::default()
            };
            let run = run_swarm(rule, height, width, &cfg, &weights);
            trace = Some(run.trace);
            run.grid
        }
        Method::Ea | Method::MapElites => {
            let cfg = EvoConfig {
                mu: args.population,
                lambda: args.population,
                generations: args.generations,
                map_elites: args.method == Method::MapElites,
                seed: args.seed,
                ..EvoConfig::default()
            };
            let result = evolve(height, width, &cfg, &weights);
            trace = Some(result.trace);
            if args.method == Method::MapElites {
                let entries: Vec<serde_json::Value> = result
                    .archive
                    .iter()
                    .map(|(niche, individual)| {
                        json!({
                            "niche": niche,
                            "fitness": individual.fitness.value(),
                            "descriptor": individual.descriptor,
                            "grid": individual.grid,
                        })
                    })
                    .collect();
                archive_doc = Some(json!(entries));
            }
            result.best.grid
        }
    };

    let (report, fitness) = evaluate(&grid, &weights);
    fs::write(args.out.join("grid.json"), grid.to_json())
        .with_context(|| format!("writing {}", args.out.join("grid.json").display()))?;
    write_pretty(&args.out.join("report.json"), &report_doc(&report, fitness))?;
    if let Some(trace) = &trace {
        write_trace(&args.out.join("trace.csv"), trace)?;
    }
    if let Some(doc) = &archive_doc {
        write_pretty(&args.out.join("archive.json"), doc)?;
    }
    emit!(
        "{} {}x{} seed {}: fitness {:.1}, wrote {}\n",
        args.method,
        height,
        width,
        args.seed,
        fitness.value(),
        args.out.display()
    );
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let grid = load_grid(&args.grid)?;
    let weights = load_weights(args.weights.as_deref())?;
    let (report, fitness) = evaluate(&grid, &weights);
    let doc = report_doc(&report, fitness);
    emit!(
        "{}\n",
        serde_json::to_string_pretty(&doc).expect("document serializes")
    );
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let grid = load_grid(&args.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let tileset = match &args.tileset {
        Some(dir) => load_tileset(dir).with_context(|| format!("loading {}", dir.display()))?,
        None => synth_tileset(args.tile_px, &mut rng),
    };
    let map = if args.variants {
        render_with_variants(&grid, &tileset, &mut rng)
    } else {
        render(&grid, &tileset)
    };
    map.save(&args.out)?;
    emit!(
        "rendered {}x{} cells at {}px into {}\n",
        grid.height(),
        grid.width(),
        tileset.tile_px(),
        args.out.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let weights = load_weights(args.weights.as_deref())?;
    let spec = ExperimentSpec {
        methods: args.methods.clone(),
        sizes: vec![args.size],
        runs: args.runs,
        master_seed: args.seed,
        weights,
        wfc: WfcConfig {
            max_attempts: args.attempts,
            hard_boundary: args.hard_boundary,
            ..WfcConfig::default()
        },
        swarm: SwarmConfig {
            population: args.population,
            generations: args.generations,
            ..SwarmConfig::default()
        },
        evo: EvoConfig {
            mu: args.population,
            lambda: args.population,
            generations: args.generations,
            ..EvoConfig::default()
        },
    };

    let records_dir = args.out.join("records");
    fs::create_dir_all(&records_dir)
        .with_context(|| format!("creating {}", records_dir.display()))?;
    let mut write_error = None;
    let records = run_experiment_with(&spec, |record| {
        eprintln!(
            "{} {}x{} run {}: {}",
            record.method,
            record.height,
            record.width,
            record.run_index,
            match &record.outcome {
                RunOutcome::Success { fitness, .. } => format!("fitness {fitness:.1}"),
                RunOutcome::Failed { reason } => format!("failed ({reason})"),
            }
        );
        if write_error.is_none() {
            write_error = write_record(&records_dir, record).err();
        }
    });
    if let Some(err) = write_error {
        return Err(err);
    }

    fs::write(args.out.join("records.csv"), records_to_csv(&records))
        .with_context(|| format!("writing {}", args.out.join("records.csv").display()))?;
    let table = roadnet::bench::summarize(&records)?;
    fs::write(args.out.join("summary.csv"), table.to_csv())
        .with_context(|| format!("writing {}", args.out.join("summary.csv").display()))?;
    fs::write(args.out.join("summary.md"), table.to_markdown())
        .with_context(|| format!("writing {}", args.out.join("summary.md").display()))?;

    let verdict_text = if Method::ALL.iter().all(|m| spec.methods.contains(m)) {
        let verdicts = rank_check(&table, args.hard_boundary)?;
        format_verdicts(&verdicts, table.min_successes())
    } else {
        "rank checks skipped: they need all five methods\n".to_string()
    };
    fs::write(args.out.join("verdicts.txt"), &verdict_text)
        .with_context(|| format!("writing {}", args.out.join("verdicts.txt").display()))?;
    emit!("{verdict_text}");
    emit!("wrote benchmark artifacts to {}\n", args.out.display());
    Ok(())
}

fn write_record(dir: &Path, record: &RunRecord) -> Result<()> {
    let name = format!(
        "{}-{}x{}-run{}.json",
        record.method, record.height, record.width, record.run_index
    );
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(record).expect("record serializes");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
