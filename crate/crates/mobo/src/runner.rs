//! Optimisation campaign runner.
//!
//! [`run_one`] executes a single run: a Latin hypercube initial design
//! followed by model-based iterations in which the chosen infill method
//! fits its surrogate(s) on the archive, maximises its acquisition over
//! the unit box, and evaluates the proposal. [`run_campaign`] repeats
//! this across methods and seeds (in parallel), pairs the comparisons by
//! giving every method the same initial design per seed, aggregates
//! hypervolume and attainment summaries, and persists artefacts.
//!
//! Determinism: every random stream is derived from the run seed, so a
//! repeated run reproduces its archive CSV and iteration log byte for
//! byte. Wall-clock timings are reported only in `result.json` and the
//! campaign summary, never in the deterministic artefacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    ehvi_mc, expected_improvement, propose_next, EhviSampler, ProposalSettings,
};
use crate::aerofoil::ExternalEvaluator;
use crate::archive::{nondominated_set, Archive, Phase};
use crate::design::{derive_seed, latin_hypercube, role, stream_rng, to_native};
use crate::error::{Error, Result};
use crate::metrics::{
    empirical_attainment, hypervolume_percent, ideal_point, integrated_eaf_difference,
    reference_point, EafGrid,
};
use crate::problems::{Kind, Problem};
use crate::scalarize::{hypi_all, normalise_objectives, xhvi_all};
use crate::surrogate::{self, SurrogateModel};

/// Infill strategy of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Mono-surrogate: GP + expected improvement on the exclusive
    /// hypervolume improvement scalarisation.
    Xhvi,
    /// Mono-surrogate: GP + expected improvement on the shell-joining
    /// hypervolume scalarisation.
    Hypi,
    /// Multi-surrogate: one GP per objective, Monte-Carlo expected
    /// hypervolume improvement.
    Ehvi,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Xhvi => "xhvi",
            Method::Hypi => "hypi",
            Method::Ehvi => "ehvi",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "xhvi" => Ok(Method::Xhvi),
            "hypi" => Ok(Method::Hypi),
            "ehvi" => Ok(Method::Ehvi),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method {s:?} (expected xhvi, hypi, or ehvi)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full configuration of a run or campaign. Serialisable, with defaults
/// for every field, so partial JSON configs work.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Problem name (see [`Problem::by_name`]).
    pub problem: String,
    /// Decision-space dimension override; `None` keeps the problem default.
    pub dimensions: Option<usize>,
    /// Methods a campaign compares.
    pub methods: Vec<Method>,
    /// Total evaluation budget, including the initial design.
    pub budget: usize,
    /// Initial design size (at least two).
    pub n_init: usize,
    /// Seeds a campaign repeats over; runs with the same seed share their
    /// initial design across methods.
    pub seeds: Vec<u64>,
    /// Mean-shift blend of the GP target normalisation, in `[0, 1]`.
    pub xi: f64,
    /// Exploration margin of expected improvement (scalarised methods).
    pub zeta: f64,
    /// Restarts of the acquisition maximiser.
    pub proposal_restarts: usize,
    /// Ascent iterations per acquisition restart.
    pub proposal_iters: usize,
    /// Finite-difference step of the acquisition maximiser.
    pub fd_step: f64,
    /// Monte-Carlo samples of the expected hypervolume improvement.
    pub mc_samples: usize,
    /// How far beyond the front's nadir the metric reference point sits,
    /// as a fraction of the front's extent.
    pub hv_ref_inflation: f64,
    /// Attainment-surface grid resolution (cells per objective axis).
    pub eaf_resolution: usize,
    /// Where campaign artefacts are written; `None` keeps them in memory.
    pub output_dir: Option<PathBuf>,
    /// External aerodynamic evaluator command for the aerofoil problem
    /// (falls back to the `MOBO_AEROFOIL_EVALUATOR` environment variable).
    pub evaluator_command: Option<String>,
    /// Timeout for one external evaluation, in seconds.
    pub evaluator_timeout_secs: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "zdt1".into(),
            dimensions: None,
            methods: vec![Method::Xhvi, Method::Hypi, Method::Ehvi],
            budget: 60,
            n_init: 20,
            seeds: vec![1, 2, 3, 4, 5],
            xi: 0.0,
            zeta: 0.0,
            proposal_restarts: 10,
            proposal_iters: 40,
            fd_step: 1e-6,
            mc_samples: 1000,
            hv_ref_inflation: 0.1,
            eaf_resolution: 64,
            output_dir: None,
            evaluator_command: None,
            evaluator_timeout_secs: 60,
        }
    }
}

fn validate_config(config: &RunConfig) -> Result<()> {
    if config.n_init < 2 {
        return Err(Error::invalid("n_init must be at least 2"));
    }
    if config.budget < config.n_init {
        return Err(Error::invalid("budget must be at least n_init"));
    }
    if !(0.0..=1.0).contains(&config.xi) {
        return Err(Error::invalid("xi must lie in [0, 1]"));
    }
    if !config.zeta.is_finite() || config.zeta < 0.0 {
        return Err(Error::invalid("zeta must be finite and non-negative"));
    }
    if config.proposal_restarts == 0 {
        return Err(Error::invalid("proposal_restarts must be at least 1"));
    }
    if config.mc_samples == 0 {
        return Err(Error::invalid("mc_samples must be at least 1"));
    }
    if config.eaf_resolution == 0 {
        return Err(Error::invalid("eaf_resolution must be at least 1"));
    }
    if !config.hv_ref_inflation.is_finite() || config.hv_ref_inflation < 0.0 {
        return Err(Error::invalid("hv_ref_inflation must be non-negative"));
    }
    Ok(())
}

/// Materialises the problem named by a configuration, attaching the
/// external evaluator to the aerofoil problem when one is configured.
pub fn build_problem(config: &RunConfig) -> Result<Problem> {
    let problem = Problem::by_name(&config.problem, config.dimensions)?;
    if problem.kind() == Kind::Aerofoil {
        let command = config
            .evaluator_command
            .clone()
            .or_else(|| std::env::var("MOBO_AEROFOIL_EVALUATOR").ok());
        if let Some(cmd) = command {
            let evaluator = ExternalEvaluator::from_command_string(
                &cmd,
                Duration::from_secs(config.evaluator_timeout_secs),
            )?;
            return Ok(problem.with_evaluator(Some(evaluator)));
        }
    }
    Ok(problem)
}

/// One model-based iteration, as persisted in `iterations.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Zero-based iteration; the evaluation index is `n_init + iteration`.
    pub iteration: usize,
    /// Native decision vector that was evaluated.
    pub x: Vec<f64>,
    /// Objectives stored in the archive (penalty values when the
    /// evaluation failed).
    pub objectives: Vec<f64>,
    /// Acquisition value at the accepted proposal; absent when the
    /// surrogate could not be trained and a random point was used.
    pub acquisition_value: Option<f64>,
    /// Log marginal likelihood of each fitted model: one entry for the
    /// scalarised methods, one per objective for ehvi, empty on fallback.
    pub model_lml: Vec<f64>,
    /// The raw proposal duplicated an archive point and was displaced.
    pub duplicate_perturbed: bool,
    /// The evaluation failed and penalty objectives were recorded.
    pub evaluation_penalised: bool,
    /// Surrogate training failed; the point is random, not model-chosen.
    pub surrogate_fallback: bool,
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub problem: String,
    pub method: Method,
    pub seed: u64,
    pub archive: Archive,
    pub iterations: Vec<IterationRecord>,
    /// Archive indices of initial-design points whose evaluation failed
    /// and was penalised.
    pub penalised_init: Vec<usize>,
    /// Wall-clock seconds per model iteration. Reported in `result.json`
    /// as a mean; never part of the deterministic artefacts.
    pub iteration_secs: Vec<f64>,
}

/// Worst observed value per objective plus a tenth of the observed spread
/// (with a small floor so the penalty stays strictly worse even under a
/// degenerate spread). Used in place of objectives when an evaluation
/// fails, so failures repel the optimiser without poisoning the archive.
pub fn penalty_objectives(objs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if objs.is_empty() {
        return Err(Error::EmptyInput("penalty needs at least one observation"));
    }
    let m = objs[0].len();
    let mut worst = vec![f64::NEG_INFINITY; m];
    let mut best = vec![f64::INFINITY; m];
    for p in objs {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.len(),
            });
        }
        for j in 0..m {
            worst[j] = worst[j].max(p[j]);
            best[j] = best[j].min(p[j]);
        }
    }
    Ok((0..m)
        .map(|j| worst[j] + 0.1 * (worst[j] - best[j]).max(1e-6))
        .collect())
}

fn find_unit_duplicate(unit_xs: &[Vec<f64>], candidate: &[f64], tol: f64) -> Option<usize> {
    unit_xs.iter().position(|u| {
        u.iter()
            .zip(candidate.iter())
            .all(|(a, b)| (a - b).abs() <= tol)
    })
}

/// Fits the method's surrogate(s) on the archive and maximises its
/// acquisition. Returns the proposed unit-box point, the acquisition
/// value there, and the fitted models' log marginal likelihoods.
fn model_based_proposal(
    method: Method,
    unit_xs: &[Vec<f64>],
    normalised_objs: &[Vec<f64>],
    config: &RunConfig,
    settings: &ProposalSettings,
    seed: u64,
    iter: u64,
) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let d = unit_xs[0].len();
    let m = normalised_objs[0].len();
    let reference = vec![1.0; m];
    // Anchor some restarts at non-dominated decision vectors, keeping at
    // least two uniform restarts for exploration.
    let front_idx = nondominated_set(normalised_objs)?;
    let mut anchors: Vec<Vec<f64>> = front_idx.iter().map(|&i| unit_xs[i].clone()).collect();
    anchors.truncate(settings.restarts.saturating_sub(2).max(1));
    let propose_seed = derive_seed(seed, &[role::PROPOSE, iter]);

    match method {
        Method::Xhvi | Method::Hypi => {
            let fitness = match method {
                Method::Xhvi => xhvi_all(normalised_objs, &reference)?,
                Method::Hypi => hypi_all(normalised_objs, &reference)?,
                Method::Ehvi => unreachable!(),
            };
            // The GP minimises, so model the negated (higher-is-better)
            // fitness; target normalisation happens inside the fit.
            let raw_targets: Vec<f64> = fitness.iter().map(|f| -f).collect();
            let model = surrogate::fit(
                unit_xs,
                &raw_targets,
                config.xi,
                derive_seed(seed, &[role::FIT, iter]),
            )?;
            let y_best = model.best_target();
            let zeta = config.zeta;
            let mut acquisition = |x: &[f64]| -> Result<f64> {
                let (mean, variance) = model.predict(x)?;
                expected_improvement(mean, variance, y_best, zeta)
            };
            let x = propose_next(&mut acquisition, d, &anchors, settings, propose_seed)?;
            let value = acquisition(&x)?;
            Ok((x, value, vec![model.log_marginal_likelihood()]))
        }
        Method::Ehvi => {
            let mut models: Vec<SurrogateModel> = Vec::with_capacity(m);
            for j in 0..m {
                let column: Vec<f64> = normalised_objs.iter().map(|p| p[j]).collect();
                models.push(surrogate::fit(
                    unit_xs,
                    &column,
                    config.xi,
                    derive_seed(seed, &[role::FIT, iter, j as u64]),
                )?);
            }
            let front: Vec<Vec<f64>> = front_idx
                .iter()
                .map(|&i| normalised_objs[i].clone())
                .collect();
            // One sampler per iteration: common random numbers across every
            // acquisition evaluation of this proposal step.
            let sampler = EhviSampler::new(
                &front,
                &reference,
                config.mc_samples,
                derive_seed(seed, &[role::MC, iter]),
            )?;
            let mut acquisition = |x: &[f64]| ehvi_mc(&models, x, &sampler);
            let x = propose_next(&mut acquisition, d, &anchors, settings, propose_seed)?;
            let value = acquisition(&x)?;
            let lml = models
                .iter()
                .map(|model| model.log_marginal_likelihood())
                .collect();
            Ok((x, value, lml))
        }
    }
}

/// Executes one optimisation run: `n_init` Latin hypercube evaluations,
/// then `budget - n_init` model-based acquisitions.
pub fn run_one(config: &RunConfig, method: Method, seed: u64) -> Result<RunResult> {
    validate_config(config)?;
    let problem = build_problem(config)?;
    let d = problem.decision_dim();
    let m = problem.objective_count();
    let bounds = problem.bounds().to_vec();

    let mut archive = Archive::new(d, m)?;
    let mut unit_xs: Vec<Vec<f64>> = Vec::with_capacity(config.budget);
    let mut penalised_init = Vec::new();

    // Initial design. The seed (not the method) determines it, so methods
    // compared under the same seed start from identical archives.
    let design = latin_hypercube(config.n_init, d, seed)?;
    let mut outcomes: Vec<std::result::Result<Vec<f64>, Error>> =
        Vec::with_capacity(design.len());
    for unit in &design {
        outcomes.push(problem.evaluate(&to_native(unit, &bounds)));
    }
    let successes: Vec<Vec<f64>> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().ok().cloned())
        .collect();
    if successes.is_empty() {
        return Err(Error::EvaluationFailure(
            "every initial-design evaluation failed".into(),
        ));
    }
    let init_penalty = penalty_objectives(&successes)?;
    for (i, (unit, outcome)) in design.into_iter().zip(outcomes).enumerate() {
        let y = match outcome {
            Ok(y) => y,
            Err(_) => {
                penalised_init.push(i);
                init_penalty.clone()
            }
        };
        archive.push(to_native(&unit, &bounds), y, Phase::InitialDesign)?;
        unit_xs.push(unit);
    }

    let settings = ProposalSettings {
        restarts: config.proposal_restarts,
        max_iters: config.proposal_iters,
        fd_step: config.fd_step,
    };
    let mut iterations = Vec::with_capacity(config.budget - config.n_init);
    let mut iteration_secs = Vec::with_capacity(config.budget - config.n_init);

    for iter in 0..(config.budget - config.n_init) {
        let started = Instant::now();
        let it = iter as u64;
        let objs = archive.objectives();
        let (normalised, _) = normalise_objectives(&objs)?;

        let (proposal, acquisition_value, model_lml, surrogate_fallback) =
            match model_based_proposal(
                method, &unit_xs, &normalised, config, &settings, seed, it,
            ) {
                Ok((x, value, lml)) => (x, Some(value), lml, false),
                Err(Error::Conditioning { .. }) => {
                    // The surrogate cannot be trained on this archive; fall
                    // back to a random point so the run can continue.
                    let mut rng = stream_rng(seed, &[role::FALLBACK, it]);
                    let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                    (x, None, Vec::new(), true)
                }
                Err(e) => return Err(e),
            };

        // Displace proposals that duplicate an archive point: widening
        // uniform perturbations, then a uniform redraw as a last resort.
        let mut candidate = proposal.clone();
        let mut duplicate_perturbed = false;
        let mut attempt: u64 = 0;
        while find_unit_duplicate(&unit_xs, &candidate, 1e-9).is_some() {
            duplicate_perturbed = true;
            let mut rng = stream_rng(seed, &[role::PERTURB, it, attempt]);
            if attempt < 8 {
                let radius = 1e-6 * 10f64.powi(attempt as i32);
                candidate = proposal
                    .iter()
                    .map(|&v| (v + rng.gen_range(-radius..=radius)).clamp(0.0, 1.0))
                    .collect();
            } else {
                candidate = (0..d).map(|_| rng.gen::<f64>()).collect();
            }
            attempt += 1;
            if attempt > 24 {
                return Err(Error::invalid(
                    "unable to displace a duplicate proposal",
                ));
            }
        }

        let native = to_native(&candidate, &bounds);
        let (objectives, evaluation_penalised) = match problem.evaluate(&native) {
            Ok(y) => (y, false),
            Err(_) => (penalty_objectives(&objs)?, true),
        };
        archive.push(native.clone(), objectives.clone(), Phase::Acquired)?;
        unit_xs.push(candidate);
        iterations.push(IterationRecord {
            iteration: iter,
            x: native,
            objectives,
            acquisition_value,
            model_lml,
            duplicate_perturbed,
            evaluation_penalised,
            surrogate_fallback,
        });
        iteration_secs.push(started.elapsed().as_secs_f64());
    }

    Ok(RunResult {
        problem: problem.name().to_string(),
        method,
        seed,
        archive,
        iterations,
        penalised_init,
        iteration_secs,
    })
}

/// Per-run report persisted as `result.json` (the only artefact that
/// carries wall-clock figures).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub method: Method,
    pub seed: u64,
    pub decision_dim: usize,
    pub budget: usize,
    pub n_init: usize,
    pub nondominated: usize,
    pub penalised_evaluations: usize,
    /// Hypervolume percentage against the known optimal front, when one
    /// exists.
    pub hv_percent: Option<f64>,
    pub wall_secs: f64,
    pub mean_iteration_secs: Option<f64>,
}

/// One run inside a campaign, with its wall-clock duration.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub wall_secs: f64,
}

/// Per-method aggregation across seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Final hypervolume percentage per seed (configuration order), when
    /// the problem has a known front.
    pub hv_percent_per_seed: Option<Vec<f64>>,
    pub median_hv_percent: Option<f64>,
    pub mean_iteration_secs: Option<f64>,
    pub mean_nondominated: f64,
}

/// Integrated difference of two methods' empirical attainment surfaces;
/// positive favours `method_a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EafDifference {
    pub method_a: Method,
    pub method_b: Method,
    pub integrated_difference: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub problem: String,
    pub decision_dim: usize,
    pub budget: usize,
    pub n_init: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodSummary>,
    pub eaf_differences: Vec<EafDifference>,
}

/// All campaign outputs: the raw runs (methods in configuration order,
/// seeds in configuration order within each method) and the aggregated
/// summary.
#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub runs: Vec<RunOutcome>,
    pub summary: CampaignSummary,
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Final non-dominated objective vectors of a run.
fn final_front(result: &RunResult) -> Result<Vec<Vec<f64>>> {
    let objs = result.archive.objectives();
    Ok(nondominated_set(&objs)?
        .into_iter()
        .map(|i| objs[i].clone())
        .collect())
}

/// Runs every configured method on every configured seed (in parallel),
/// aggregates metrics, and (when an output directory is configured)
/// persists all artefacts.
pub fn run_campaign(config: &RunConfig) -> Result<CampaignResult> {
    validate_config(config)?;
    if config.methods.is_empty() {
        return Err(Error::invalid("a campaign needs at least one method"));
    }
    if config.seeds.is_empty() {
        return Err(Error::invalid("a campaign needs at least one seed"));
    }
    let problem = build_problem(config)?;

    let pairs: Vec<(Method, u64)> = config
        .methods
        .iter()
        .flat_map(|&m| config.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let runs: Vec<RunOutcome> = pairs
        .par_iter()
        .map(|&(method, seed)| {
            let started = Instant::now();
            let result = run_one(config, method, seed)?;
            Ok(RunOutcome {
                result,
                wall_secs: started.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Shared metric scaffolding: the optimal front when known, otherwise
    // everything is measured over the union of what the runs found.
    let true_front = if problem.has_true_front() {
        Some(problem.true_front(TRUE_FRONT_POINTS)?)
    } else {
        None
    };
    let metric_reference = true_front
        .as_ref()
        .map(|front| reference_point(front, config.hv_ref_inflation))
        .transpose()?;

    let fronts_per_run: Vec<Vec<Vec<f64>>> = runs
        .iter()
        .map(|r| final_front(&r.result))
        .collect::<Result<Vec<_>>>()?;
    let grid = match (&true_front, &metric_reference) {
        (Some(front), Some(reference)) => {
            let ideal = ideal_point(front)?;
            EafGrid::new(
                [ideal[0], ideal[1]],
                [reference[0], reference[1]],
                config.eaf_resolution,
            )?
        }
        _ => {
            let sets: Vec<&[Vec<f64>]> =
                fronts_per_run.iter().map(|f| f.as_slice()).collect();
            EafGrid::covering(&sets, config.eaf_resolution)?
        }
    };

    let n_seeds = config.seeds.len();
    let mut method_summaries = Vec::with_capacity(config.methods.len());
    let mut fronts_per_method: Vec<Vec<Vec<Vec<f64>>>> = Vec::with_capacity(config.methods.len());
    for (mi, &method) in config.methods.iter().enumerate() {
        let slice = &runs[mi * n_seeds..(mi + 1) * n_seeds];
        let fronts: Vec<Vec<Vec<f64>>> =
            fronts_per_run[mi * n_seeds..(mi + 1) * n_seeds].to_vec();
        let hv_percent_per_seed = match (&true_front, &metric_reference) {
            (Some(front), Some(reference)) => {
                let mut scores = Vec::with_capacity(slice.len());
                for run in slice {
                    scores.push(hypervolume_percent(
                        &run.result.archive.objectives(),
                        front,
                        reference,
                    )?);
                }
                Some(scores)
            }
            _ => None,
        };
        let median_hv_percent = hv_percent_per_seed.as_deref().and_then(median);
        let iteration_secs: Vec<f64> = slice
            .iter()
            .flat_map(|r| r.result.iteration_secs.iter().copied())
            .collect();
        let mean_iteration_secs = if iteration_secs.is_empty() {
            None
        } else {
            Some(iteration_secs.iter().sum::<f64>() / iteration_secs.len() as f64)
        };
        let mean_nondominated = fronts.iter().map(|f| f.len() as f64).sum::<f64>()
            / fronts.len().max(1) as f64;
        method_summaries.push(MethodSummary {
            method,
            hv_percent_per_seed,
            median_hv_percent,
            mean_iteration_secs,
            mean_nondominated,
        });
        fronts_per_method.push(fronts);
    }

    let mut eaf_differences = Vec::new();
    for a in 0..config.methods.len() {
        for b in (a + 1)..config.methods.len() {
            eaf_differences.push(EafDifference {
                method_a: config.methods[a],
                method_b: config.methods[b],
                integrated_difference: integrated_eaf_difference(
                    &fronts_per_method[a],
                    &fronts_per_method[b],
                    &grid,
                )?,
            });
        }
    }

    let summary = CampaignSummary {
        problem: problem.name().to_string(),
        decision_dim: problem.decision_dim(),
        budget: config.budget,
        n_init: config.n_init,
        seeds: config.seeds.clone(),
        methods: method_summaries,
        eaf_differences,
    };

    if let Some(dir) = &config.output_dir {
        persist_campaign(dir, config, &runs, &summary, &fronts_per_method, &grid)?;
    }

    Ok(CampaignResult { runs, summary })
}

/// Points used to discretise a known optimal front for metrics.
const TRUE_FRONT_POINTS: usize = 1000;

/// Writes one run's artefacts (`archive.csv`, `iterations.json`,
/// `result.json`) into `dir`.
pub fn write_run_artifacts(
    dir: &Path,
    config: &RunConfig,
    run: &RunOutcome,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let result = &run.result;
    result.archive.write_csv(&dir.join("archive.csv"))?;
    let iterations = serde_json::to_string_pretty(&result.iterations)?;
    std::fs::write(dir.join("iterations.json"), iterations + "\n")?;

    let problem = build_problem(config)?;
    let hv_percent = if problem.has_true_front() {
        let front = problem.true_front(TRUE_FRONT_POINTS)?;
        let reference = reference_point(&front, config.hv_ref_inflation)?;
        Some(hypervolume_percent(
            &result.archive.objectives(),
            &front,
            &reference,
        )?)
    } else {
        None
    };
    let mean_iteration_secs = if result.iteration_secs.is_empty() {
        None
    } else {
        Some(result.iteration_secs.iter().sum::<f64>() / result.iteration_secs.len() as f64)
    };
    let report = RunReport {
        problem: result.problem.clone(),
        method: result.method,
        seed: result.seed,
        decision_dim: result.archive.decision_dim(),
        budget: config.budget,
        n_init: config.n_init,
        nondominated: result.archive.nondominated()?.len(),
        penalised_evaluations: result.penalised_init.len()
            + result
                .iterations
                .iter()
                .filter(|r| r.evaluation_penalised)
                .count(),
        hv_percent,
        wall_secs: run.wall_secs,
        mean_iteration_secs,
    };
    let report_json = serde_json::to_string_pretty(&report)?;
    std::fs::write(dir.join("result.json"), report_json + "\n")?;
    Ok(())
}

fn attainment_csv(grid: &EafGrid, values: &[f64], value_name: &str) -> String {
    let mut out = String::from("f1,f2,");
    out.push_str(value_name);
    out.push('\n');
    let r = grid.resolution();
    for j in 0..r {
        for i in 0..r {
            let (z1, z2) = grid.centre(i, j);
            out.push_str(&format!("{z1},{z2},{}\n", values[j * r + i]));
        }
    }
    out
}

fn persist_campaign(
    dir: &Path,
    config: &RunConfig,
    runs: &[RunOutcome],
    summary: &CampaignSummary,
    fronts_per_method: &[Vec<Vec<Vec<f64>>>],
    grid: &EafGrid,
) -> Result<()> {
    let problem_dir = dir.join(&summary.problem);
    std::fs::create_dir_all(&problem_dir)?;
    for run in runs {
        let run_dir = problem_dir
            .join(run.result.method.as_str())
            .join(format!("seed_{}", run.result.seed));
        write_run_artifacts(&run_dir, config, run)?;
    }
    let summary_json = serde_json::to_string_pretty(summary)?;
    std::fs::write(problem_dir.join("summary.json"), summary_json + "\n")?;

    for (mi, &method) in config.methods.iter().enumerate() {
        let values = empirical_attainment(&fronts_per_method[mi], grid)?;
        std::fs::write(
            problem_dir.join(format!("eaf_{method}.csv")),
            attainment_csv(grid, &values, "attainment"),
        )?;
    }
    for a in 0..config.methods.len() {
        for b in (a + 1)..config.methods.len() {
            let va = empirical_attainment(&fronts_per_method[a], grid)?;
            let vb = empirical_attainment(&fronts_per_method[b], grid)?;
            let diff: Vec<f64> = va.iter().zip(vb.iter()).map(|(x, y)| x - y).collect();
            std::fs::write(
                problem_dir.join(format!(
                    "eaf_diff_{}_{}.csv",
                    config.methods[a], config.methods[b]
                )),
                attainment_csv(grid, &diff, "difference"),
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> RunConfig {
        RunConfig {
            problem: "zdt1".into(),
            dimensions: Some(3),
            budget: 11,
            n_init: 8,
            seeds: vec![3],
            mc_samples: 64,
            proposal_restarts: 4,
            proposal_iters: 15,
            ..RunConfig::default()
        }
    }

    #[test]
    fn degenerate_budget_runs_the_initial_design_only() {
        let config = RunConfig {
            budget: 6,
            n_init: 6,
            ..tiny_config()
        };
        let run = run_one(&config, Method::Xhvi, 11).unwrap();
        assert_eq!(run.archive.len(), 6);
        assert!(run.iterations.is_empty());
        assert!(run
            .archive
            .entries()
            .iter()
            .all(|e| e.phase == Phase::InitialDesign));
    }

    #[test]
    fn scalarised_methods_acquire_points() {
        let config = tiny_config();
        for method in [Method::Hypi, Method::Xhvi] {
            let run = run_one(&config, method, 3).unwrap();
            assert_eq!(run.archive.len(), 11);
            assert_eq!(run.iterations.len(), 3);
            let phases: Vec<Phase> =
                run.archive.entries().iter().map(|e| e.phase).collect();
            assert!(phases[..8].iter().all(|&p| p == Phase::InitialDesign));
            assert!(phases[8..].iter().all(|&p| p == Phase::Acquired));
            for record in &run.iterations {
                assert!(!record.surrogate_fallback);
                assert!(!record.evaluation_penalised);
                let value = record.acquisition_value.unwrap();
                assert!(value.is_finite() && value >= 0.0);
                assert_eq!(record.model_lml.len(), 1);
            }
            let bounds = build_problem(&config).unwrap().bounds().to_vec();
            for entry in run.archive.entries() {
                for (v, (lo, hi)) in entry.x.iter().zip(bounds.iter()) {
                    assert!(*v >= *lo && *v <= *hi);
                }
            }
        }
    }

    #[test]
    fn ehvi_fits_one_model_per_objective() {
        let run = run_one(&tiny_config(), Method::Ehvi, 3).unwrap();
        assert_eq!(run.archive.len(), 11);
        for record in &run.iterations {
            assert_eq!(record.model_lml.len(), 2);
            assert!(record.acquisition_value.unwrap() >= 0.0);
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        let config = tiny_config();
        let a = run_one(&config, Method::Hypi, 9).unwrap();
        let b = run_one(&config, Method::Hypi, 9).unwrap();
        assert_eq!(a.archive.to_csv(), b.archive.to_csv());
        assert_eq!(
            serde_json::to_string(&a.iterations).unwrap(),
            serde_json::to_string(&b.iterations).unwrap()
        );
        let c = run_one(&config, Method::Hypi, 10).unwrap();
        assert_ne!(a.archive.to_csv(), c.archive.to_csv());
    }

    #[test]
    fn methods_share_the_initial_design_per_seed() {
        let config = tiny_config();
        let a = run_one(&config, Method::Hypi, 5).unwrap();
        let b = run_one(&config, Method::Ehvi, 5).unwrap();
        for (ea, eb) in a.archive.entries()[..8]
            .iter()
            .zip(b.archive.entries()[..8].iter())
        {
            assert_eq!(ea.x, eb.x);
            assert_eq!(ea.y, eb.y);
        }
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = tiny_config();
            f(&mut c);
            run_one(&c, Method::Hypi, 1)
        };
        assert!(bad(|c| c.budget = 7).is_err()); // budget < n_init
        assert!(bad(|c| c.n_init = 1).is_err());
        assert!(bad(|c| c.xi = 1.5).is_err());
        assert!(bad(|c| c.zeta = -0.1).is_err());
        assert!(bad(|c| c.mc_samples = 0).is_err());
        assert!(bad(|c| c.proposal_restarts = 0).is_err());
        assert!(bad(|c| c.problem = "zdt9".into()).is_err());
        let empty_methods = RunConfig {
            methods: vec![],
            ..tiny_config()
        };
        assert!(run_campaign(&empty_methods).is_err());
        let empty_seeds = RunConfig {
            seeds: vec![],
            ..tiny_config()
        };
        assert!(run_campaign(&empty_seeds).is_err());
    }

    #[test]
    fn penalty_sits_beyond_the_worst_observation() {
        let objs = vec![vec![1.0, 5.0], vec![3.0, 2.0]];
        let p = penalty_objectives(&objs).unwrap();
        assert!((p[0] - 3.2).abs() < 1e-12);
        assert!((p[1] - 5.3).abs() < 1e-12);
        // Degenerate spread still penalises strictly.
        let flat = vec![vec![2.0, 2.0]];
        let p = penalty_objectives(&flat).unwrap();
        assert!(p[0] > 2.0 && p[1] > 2.0);
        assert!(penalty_objectives(&[]).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for method in [Method::Xhvi, Method::Hypi, Method::Ehvi] {
            assert_eq!(Method::parse(method.as_str()).unwrap(), method);
            let json = serde_json::to_string(&method).unwrap();
            assert_eq!(json, format!("\"{method}\""));
            assert_eq!(serde_json::from_str::<Method>(&json).unwrap(), method);
        }
        assert!(Method::parse("spam").is_err());
    }

    #[test]
    fn campaign_writes_expected_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            problem: "zdt1".into(),
            dimensions: Some(2),
            methods: vec![Method::Hypi, Method::Ehvi],
            budget: 8,
            n_init: 6,
            seeds: vec![1, 2],
            mc_samples: 32,
            proposal_restarts: 3,
            proposal_iters: 10,
            eaf_resolution: 8,
            output_dir: Some(dir.path().to_path_buf()),
            ..RunConfig::default()
        };
        let campaign = run_campaign(&config).unwrap();
        assert_eq!(campaign.runs.len(), 4);
        assert_eq!(campaign.summary.methods.len(), 2);
        assert_eq!(campaign.summary.eaf_differences.len(), 1);
        let hv = campaign.summary.methods[0]
            .hv_percent_per_seed
            .as_ref()
            .unwrap();
        assert_eq!(hv.len(), 2);
        assert!(hv.iter().all(|v| *v > 0.0 && *v <= 100.0));

        let base = dir.path().join("zdt1");
        for file in [
            "summary.json",
            "eaf_hypi.csv",
            "eaf_ehvi.csv",
            "eaf_diff_hypi_ehvi.csv",
        ] {
            assert!(base.join(file).is_file(), "missing {file}");
        }
        for method in ["hypi", "ehvi"] {
            for seed in ["seed_1", "seed_2"] {
                let run_dir = base.join(method).join(seed);
                for file in ["archive.csv", "iterations.json", "result.json"] {
                    assert!(run_dir.join(file).is_file(), "missing {method}/{seed}/{file}");
                }
            }
        }
        let summary_text = std::fs::read_to_string(base.join("summary.json")).unwrap();
        let parsed: CampaignSummary = serde_json::from_str(&summary_text).unwrap();
        assert_eq!(parsed.problem, "zdt1");
        let report_text = std::fs::read_to_string(
            base.join("hypi").join("seed_1").join("result.json"),
        )
        .unwrap();
        let report: RunReport = serde_json::from_str(&report_text).unwrap();
        assert_eq!(report.seed, 1);
        assert!(report.wall_secs >= 0.0);
        // The archive artefact survives a byte-level round trip.
        let archive_path = base.join("hypi").join("seed_1").join("archive.csv");
        let text = std::fs::read_to_string(&archive_path).unwrap();
        let restored = Archive::from_csv(&text).unwrap();
        assert_eq!(restored.to_csv(), text);
    }

    #[test]
    fn aerofoil_runs_with_a_stub_evaluator() {
        // The configured command string is whitespace-split, so the stub
        // lives in a small executable script.
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("stub.sh");
        std::fs::write(&script, "#!/bin/sh\necho 0.5\n").unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
        let config = RunConfig {
            problem: "aerofoil".into(),
            budget: 7,
            n_init: 6,
            seeds: vec![2],
            mc_samples: 16,
            proposal_restarts: 3,
            proposal_iters: 8,
            evaluator_command: Some(script.to_string_lossy().into_owned()),
            ..RunConfig::default()
        };
        let run = run_one(&config, Method::Hypi, 2).unwrap();
        assert_eq!(run.archive.len(), 7);
        // The aerodynamic stub is constant; the stiffness objective varies.
        for entry in run.archive.entries() {
            assert!(entry.y.iter().all(|v| v.is_finite()));
        }
    }
}
