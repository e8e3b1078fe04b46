//! Acquisition functions and the shared proposal optimiser.
//!
//! * [`expected_improvement`] — closed-form EI for a minimising GP, with an
//!   additive exploration margin `zeta`.
//! * [`zeta_equivalent_of_mean_shift`] — the margin that reproduces, at a
//!   query point, the effect of optimistically shifting the incumbent and
//!   the posterior mean together by `lambda` (the optimistic-normalisation
//!   route); kernel ratios are nugget-free.
//! * [`EhviSampler`] / [`ehvi_mc`] — Monte-Carlo expected hypervolume
//!   improvement over the current front, using common random numbers so
//!   that every candidate within one proposal step sees identical noise.
//! * [`propose_next`] — multi-restart projected gradient ascent (central
//!   finite differences) over the unit box, shared by every strategy.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::design::{role, stream_rng};
use crate::error::{Error, Result};
use crate::hypervolume::{hv_recursive, Staircase2d};
use crate::surrogate::{matern52, KernelHyperparameters, SurrogateModel};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.3989422804014326779;

fn standard_normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

fn standard_normal_pdf(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

/// Expected improvement below the incumbent `y_best`, with exploration
/// margin `zeta >= 0`:
/// `EI = (y_best + zeta - mean) * Phi(u) + sigma * phi(u)` with
/// `u = (y_best + zeta - mean) / sigma`. A vanishing `sigma` degenerates
/// to the deterministic improvement `max(y_best + zeta - mean, 0)`. The
/// result is clamped to be non-negative.
pub fn expected_improvement(mean: f64, variance: f64, y_best: f64, zeta: f64) -> Result<f64> {
    if !mean.is_finite() || !y_best.is_finite() {
        return Err(Error::invalid("expected improvement needs finite inputs"));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::invalid("variance must be finite and non-negative"));
    }
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::invalid("zeta must be finite and non-negative"));
    }
    let gap = y_best + zeta - mean;
    let sigma = variance.sqrt();
    if sigma < 1e-12 {
        return Ok(gap.max(0.0));
    }
    let u = gap / sigma;
    Ok((gap * standard_normal_cdf(u) + sigma * standard_normal_pdf(u)).max(0.0))
}

/// Exploration margin equivalent, at query point `x_star`, to shifting a
/// single-point GP's target at `x` optimistically by `lambda`:
/// `zeta = lambda * (1 - k(x_star, x) / k(x, x))`, using the nugget-free
/// kernel so `k(x, x)` is exactly the signal variance.
pub fn zeta_equivalent_of_mean_shift(
    lambda: f64,
    x_star: &[f64],
    x: &[f64],
    hp: &KernelHyperparameters,
) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be finite and non-negative"));
    }
    let k_star = matern52(x_star, x, hp)?;
    let k_xx = hp.signal_variance;
    Ok(lambda * (1.0 - k_star / k_xx))
}

/// Pre-drawn Monte-Carlo machinery for expected hypervolume improvement.
///
/// Holds the current front, the reference point and `n_samples * m`
/// standard-normal draws. Reusing one sampler across every candidate of a
/// proposal step gives common random numbers: the acquisition surface seen
/// by the optimiser is smooth in the candidate rather than re-noised per
/// evaluation.
#[derive(Debug, Clone)]
pub struct EhviSampler {
    front: Vec<Vec<f64>>,
    reference: Vec<f64>,
    staircase: Option<Staircase2d>,
    base_hv: f64,
    normals: Vec<f64>,
    n_samples: usize,
    m: usize,
}

impl EhviSampler {
    /// `front` must be expressed in the same (raw-target) space the
    /// objective models were fitted on; `reference` likewise.
    pub fn new(
        front: &[Vec<f64>],
        reference: &[f64],
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let m = reference.len();
        if m < 2 {
            return Err(Error::invalid("ehvi needs at least two objectives"));
        }
        if reference.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("reference point must be finite"));
        }
        if n_samples == 0 {
            return Err(Error::invalid("ehvi needs n_samples >= 1"));
        }
        for p in front {
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("front points must be finite"));
            }
        }
        let staircase = if m == 2 {
            Some(Staircase2d::new(front, reference)?)
        } else {
            None
        };
        let base_hv = match &staircase {
            Some(s) => s.hypervolume(),
            None => hv_recursive(front, reference)?,
        };
        let mut rng = stream_rng(seed, &[role::MC]);
        let normals: Vec<f64> = (0..n_samples * m)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(EhviSampler {
            front: front.to_vec(),
            reference: reference.to_vec(),
            staircase,
            base_hv,
            normals,
            n_samples,
            m,
        })
    }

    pub fn objective_count(&self) -> usize {
        self.m
    }

    pub fn sample_count(&self) -> usize {
        self.n_samples
    }

    /// Average hypervolume gain over the pre-drawn objective samples
    /// `y_j = means[j] + stds[j] * z_j`.
    pub fn improvement_of(&self, means: &[f64], stds: &[f64]) -> Result<f64> {
        if means.len() != self.m || stds.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: means.len().max(stds.len()),
            });
        }
        let mut total = 0.0;
        if let Some(stairs) = &self.staircase {
            for s in 0..self.n_samples {
                let z = &self.normals[s * 2..s * 2 + 2];
                let p = (means[0] + stds[0] * z[0], means[1] + stds[1] * z[1]);
                total += stairs.added_contribution(p);
            }
        } else {
            let mut joined = self.front.clone();
            joined.push(vec![0.0; self.m]);
            for s in 0..self.n_samples {
                let sample = joined.last_mut().expect("slot");
                for j in 0..self.m {
                    sample[j] = means[j] + stds[j] * self.normals[s * self.m + j];
                }
                total += hv_recursive(&joined, &self.reference)? - self.base_hv;
            }
        }
        Ok(total / self.n_samples as f64)
    }
}

/// Monte-Carlo expected hypervolume improvement of candidate `x` under one
/// GP per objective. Posterior means and standard deviations are mapped
/// back from each model's normalised target space into the space the
/// sampler's front lives in.
pub fn ehvi_mc(models: &[SurrogateModel], x: &[f64], sampler: &EhviSampler) -> Result<f64> {
    if models.len() != sampler.objective_count() {
        return Err(Error::DimensionMismatch {
            expected: sampler.objective_count(),
            got: models.len(),
        });
    }
    let mut means = Vec::with_capacity(models.len());
    let mut stds = Vec::with_capacity(models.len());
    for model in models {
        let (mean, variance) = model.predict(x)?;
        let record = model.normalisation();
        means.push(record.denormalise(mean));
        stds.push(variance.sqrt() * record.scale);
    }
    sampler.improvement_of(&means, &stds)
}

/// Settings for [`propose_next`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalSettings {
    /// Number of ascent restarts.
    pub restarts: usize,
    /// Cap on ascent iterations per restart.
    pub max_iters: usize,
    /// Central finite-difference step, as a fraction of the unit box.
    pub fd_step: f64,
}

impl Default for ProposalSettings {
    fn default() -> Self {
        ProposalSettings {
            restarts: 10,
            max_iters: 40,
            fd_step: 1e-6,
        }
    }
}

const ANCHOR_JITTER_SD: f64 = 0.05;
const PROPOSAL_ARMIJO_C1: f64 = 1e-4;
const PROPOSAL_MAX_BACKTRACKS: usize = 12;

fn clip_unit(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Maximises an acquisition function over the unit box by multi-restart
/// projected gradient ascent with central finite differences and an Armijo
/// backtracking line search.
///
/// The first restarts start from `anchors` (typically the non-dominated
/// decision vectors) jittered with clipped Gaussian noise; remaining
/// restarts start uniformly at random. Everything is deterministic in
/// `seed`. Ties between restarts resolve to the earliest restart.
pub fn propose_next<F>(
    mut acquisition: F,
    d: usize,
    anchors: &[Vec<f64>],
    settings: &ProposalSettings,
    seed: u64,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if d == 0 {
        return Err(Error::EmptyInput("zero-dimensional proposal space"));
    }
    if settings.restarts == 0 {
        return Err(Error::invalid("proposal needs at least one restart"));
    }
    if !(settings.fd_step > 0.0) || settings.fd_step >= 0.5 {
        return Err(Error::invalid("fd_step must be in (0, 0.5)"));
    }
    for a in anchors {
        if a.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len(),
            });
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for restart in 0..settings.restarts {
        let mut rng = stream_rng(seed, &[role::PROPOSE, restart as u64]);
        let mut x: Vec<f64> = if restart < anchors.len() {
            anchors[restart]
                .iter()
                .map(|v| v + ANCHOR_JITTER_SD * rng.sample::<f64, _>(StandardNormal))
                .collect()
        } else {
            (0..d).map(|_| rng.gen::<f64>()).collect()
        };
        clip_unit(&mut x);
        let mut fx = acquisition(&x)?;

        let h = settings.fd_step;
        let mut step = 0.1f64;
        for _ in 0..settings.max_iters {
            // Central finite differences with probes clipped to the box;
            // the denominator uses the actual probe separation so boundary
            // gradients stay consistent.
            let mut grad = vec![0.0; d];
            for i in 0..d {
                let mut hi = x.clone();
                hi[i] = (hi[i] + h).min(1.0);
                let mut lo = x.clone();
                lo[i] = (lo[i] - h).max(0.0);
                let span = hi[i] - lo[i];
                if span <= 0.0 {
                    continue;
                }
                grad[i] = (acquisition(&hi)? - acquisition(&lo)?) / span;
            }
            let mut pg_norm = 0.0f64;
            for i in 0..d {
                let blocked =
                    (x[i] >= 1.0 && grad[i] > 0.0) || (x[i] <= 0.0 && grad[i] < 0.0);
                if !blocked {
                    pg_norm = pg_norm.max(grad[i].abs());
                }
            }
            if pg_norm < 1e-9 {
                break;
            }
            step = (step * 2.0).min(1.0);
            let mut accepted = false;
            for _ in 0..PROPOSAL_MAX_BACKTRACKS {
                let mut cand: Vec<f64> =
                    x.iter().zip(&grad).map(|(v, g)| v + step * g).collect();
                clip_unit(&mut cand);
                let gain: f64 = cand
                    .iter()
                    .zip(&x)
                    .zip(&grad)
                    .map(|((c, v), g)| (c - v) * g)
                    .sum();
                if gain <= 0.0 {
                    step *= 0.5;
                    continue;
                }
                let fc = acquisition(&cand)?;
                if fc >= fx + PROPOSAL_ARMIJO_C1 * gain {
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.as_ref().map_or(true, |(bf, _)| fx > *bf) {
            best = Some((fx, x));
        }
    }
    Ok(best.expect("at least one restart ran").1)
}
