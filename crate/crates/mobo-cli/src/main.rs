//! Command-line front end: run campaigns, recompute metrics from stored
//! artefacts, print optimal fronts, and inspect aerofoil geometries.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use mobo::aerofoil::{self, ExternalEvaluator};
use mobo::archive::{nondominated_set, Archive};
use mobo::metrics::{
    empirical_attainment, hypervolume_percent, ideal_point, integrated_eaf_difference,
    reference_point, EafGrid,
};
use mobo::problems::Problem;
use mobo::runner::{run_campaign, EafDifference, Method, MethodSummary, RunConfig};
use mobo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mobo",
    version,
    about = "Multi-objective Bayesian optimisation with hypervolume-based infill"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimisation campaign and print its summary as JSON.
    Run(RunArgs),
    /// Recompute metrics from a campaign's stored run artefacts.
    Metrics(MetricsArgs),
    /// Print a problem's optimal front as CSV on standard output.
    Front(FrontArgs),
    /// Build an aerofoil from a decision vector and report its properties.
    AerofoilEval(AerofoilEvalArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; every field is optional and defaults apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem name (overrides the configuration file).
    #[arg(long)]
    problem: Option<String>,
    /// Decision-space dimension override.
    #[arg(long)]
    dimensions: Option<usize>,
    /// Comma-separated methods to compare: xhvi, hypi, ehvi.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Total evaluation budget, including the initial design.
    #[arg(long)]
    budget: Option<usize>,
    /// Initial design size.
    #[arg(long)]
    n_init: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Directory for campaign artefacts.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// External aerodynamic evaluator command (aerofoil problem).
    #[arg(long)]
    evaluator: Option<String>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Campaign problem directory (contains per-method run directories).
    #[arg(long)]
    runs: PathBuf,
    /// Problem name the archives belong to.
    #[arg(long)]
    problem: String,
    /// Decision-space dimension override used when the campaign ran.
    #[arg(long)]
    dimensions: Option<usize>,
    /// Attainment grid resolution.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Reference-point inflation beyond the front's nadir.
    #[arg(long, default_value_t = 0.1)]
    inflation: f64,
}

#[derive(Args)]
struct FrontArgs {
    /// Problem name.
    #[arg(long)]
    problem: String,
    /// Decision-space dimension override.
    #[arg(long)]
    dimensions: Option<usize>,
    /// Number of front points.
    #[arg(long, default_value_t = 256)]
    n: usize,
}

#[derive(Args)]
struct AerofoilEvalArgs {
    /// Comma-separated decision vector (13 values); defaults to the
    /// middle of every bound.
    #[arg(long)]
    decision: Option<String>,
    /// Write the surface coordinates to this file.
    #[arg(long)]
    shape_out: Option<PathBuf>,
    /// Also run the external aerodynamic evaluator on the shape.
    #[arg(long)]
    with_aero: bool,
    /// Evaluator command (falls back to MOBO_AEROFOIL_EVALUATOR).
    #[arg(long)]
    evaluator: Option<String>,
    /// Evaluator timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Front(args) => cmd_front(args),
        Command::AerofoilEval(args) => cmd_aerofoil_eval(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut config: RunConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(problem) = &args.problem {
        config.problem = problem.clone();
    }
    if args.dimensions.is_some() {
        config.dimensions = args.dimensions;
    }
    if let Some(methods) = &args.methods {
        config.methods = methods
            .iter()
            .map(|m| Method::parse(m))
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(budget) = args.budget {
        config.budget = budget;
    }
    if let Some(n_init) = args.n_init {
        config.n_init = n_init;
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = Some(dir.clone());
    }
    if let Some(evaluator) = &args.evaluator {
        config.evaluator_command = Some(evaluator.clone());
    }
    let campaign = run_campaign(&config)?;
    println!("{}", serde_json::to_string_pretty(&campaign.summary)?);
    Ok(())
}

/// Metrics recomputed from persisted archives alone (so timing fields
/// stay empty).
#[derive(serde::Serialize)]
struct MetricsReport {
    problem: String,
    methods: Vec<MethodSummary>,
    eaf_differences: Vec<EafDifference>,
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let problem = Problem::by_name(&args.problem, args.dimensions)?;
    let mut methods: Vec<Method> = Vec::new();
    let mut objectives_per_method: Vec<Vec<Vec<Vec<f64>>>> = Vec::new();
    for method in [Method::Xhvi, Method::Hypi, Method::Ehvi] {
        let dir = args.runs.join(method.as_str());
        if !dir.is_dir() {
            continue;
        }
        let mut seeds: Vec<(u64, PathBuf)> = Vec::new();
        for entry in std::fs::read_dir(&dir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(seed) = name.strip_prefix("seed_").and_then(|s| s.parse().ok()) {
                seeds.push((seed, entry.path().join("archive.csv")));
            }
        }
        seeds.sort_by_key(|(seed, _)| *seed);
        let mut all_objectives = Vec::new();
        for (_, path) in &seeds {
            let archive = Archive::read_csv(path)?;
            all_objectives.push(archive.objectives());
        }
        if !all_objectives.is_empty() {
            methods.push(method);
            objectives_per_method.push(all_objectives);
        }
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument(
            "no run artefacts found under the runs directory".into(),
        ));
    }

    let fronts_per_method: Vec<Vec<Vec<Vec<f64>>>> = objectives_per_method
        .iter()
        .map(|runs| {
            runs.iter()
                .map(|objs| {
                    Ok(nondominated_set(objs)?
                        .into_iter()
                        .map(|i| objs[i].clone())
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let true_front = if problem.has_true_front() {
        Some(problem.true_front(1000)?)
    } else {
        None
    };
    let grid = match &true_front {
        Some(front) => {
            let ideal = ideal_point(front)?;
            let reference = reference_point(front, args.inflation)?;
            EafGrid::new([ideal[0], ideal[1]], [reference[0], reference[1]], args.grid)?
        }
        None => {
            let sets: Vec<&[Vec<f64>]> = fronts_per_method
                .iter()
                .flat_map(|m| m.iter().map(|f| f.as_slice()))
                .collect();
            EafGrid::covering(&sets, args.grid)?
        }
    };

    let mut summaries = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        let hv_percent_per_seed = match &true_front {
            Some(front) => {
                let reference = reference_point(front, args.inflation)?;
                let mut scores = Vec::new();
                for objs in &objectives_per_method[mi] {
                    scores.push(hypervolume_percent(objs, front, &reference)?);
                }
                Some(scores)
            }
            None => None,
        };
        let median_hv_percent = hv_percent_per_seed.as_ref().and_then(|scores| {
            let mut sorted = scores.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            (n > 0).then(|| {
                if n % 2 == 1 {
                    sorted[n / 2]
                } else {
                    0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
                }
            })
        });
        let mean_nondominated = fronts_per_method[mi]
            .iter()
            .map(|f| f.len() as f64)
            .sum::<f64>()
            / fronts_per_method[mi].len().max(1) as f64;
        summaries.push(MethodSummary {
            method,
            hv_percent_per_seed,
            median_hv_percent,
            mean_iteration_secs: None,
            mean_nondominated,
        });
        // Exercise the attainment surface so a malformed archive fails
        // loudly here rather than in the difference pass.
        empirical_attainment(&fronts_per_method[mi], &grid)?;
    }
    let mut eaf_differences = Vec::new();
    for a in 0..methods.len() {
        for b in (a + 1)..methods.len() {
            eaf_differences.push(EafDifference {
                method_a: methods[a],
                method_b: methods[b],
                integrated_difference: integrated_eaf_difference(
                    &fronts_per_method[a],
                    &fronts_per_method[b],
                    &grid,
                )?,
            });
        }
    }
    let report = MetricsReport {
        problem: problem.name().to_string(),
        methods: summaries,
        eaf_differences,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_front(args: &FrontArgs) -> Result<()> {
    let problem = Problem::by_name(&args.problem, args.dimensions)?;
    let front = problem.true_front(args.n)?;
    let mut out = String::from("f1,f2\n");
    for point in front {
        out.push_str(&format!("{},{}\n", point[0], point[1]));
    }
    print!("{out}");
    Ok(())
}

fn cmd_aerofoil_eval(args: &AerofoilEvalArgs) -> Result<()> {
    let decision: Vec<f64> = match &args.decision {
        Some(text) => text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad decision component {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => aerofoil::mid_bounds_decision(),
    };
    let shape = aerofoil::build_shape(&decision)?;
    let thickness = aerofoil::max_thickness(&shape);
    let stiffness = aerofoil::stiffness(&shape)?;
    if let Some(path) = &args.shape_out {
        aerofoil::write_shape_file(&shape, path)?;
    }
    let aero = if args.with_aero {
        let command = args
            .evaluator
            .clone()
            .or_else(|| std::env::var("MOBO_AEROFOIL_EVALUATOR").ok())
            .ok_or_else(|| {
                Error::InvalidArgument(
                    "aerodynamic evaluation needs --evaluator or MOBO_AEROFOIL_EVALUATOR".into(),
                )
            })?;
        let evaluator = ExternalEvaluator::from_command_string(
            &command,
            Duration::from_secs(args.timeout_secs),
        )?;
        Some(evaluator.evaluate(&shape)?)
    } else {
        None
    };
    let report = serde_json::json!({
        "decision": decision,
        "thickness": thickness,
        "crest_upper": [shape.crest_upper.0, shape.crest_upper.1],
        "crest_lower": [shape.crest_lower.0, shape.crest_lower.1],
        "stiffness": stiffness,
        "aero": aero,
        "shape_points": shape.upper.len() + shape.lower.len() - 1,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
