//! Zero-mean Gaussian-process surrogate with a Matérn-5/2 ARD kernel.
//!
//! Targets are renormalised before fitting: the offset blends the sample
//! mean and sample minimum through a weight `xi` in `[0, 1]`
//! (`offset = (1-xi)*mean + xi*min`), and the scale is the sample standard
//! deviation. `xi > 0` shifts the zero-mean prior towards optimistic
//! predictions in unexplored regions.
//!
//! Hyperparameters (signal variance and per-dimension lengthscales) are
//! chosen by maximising the log marginal likelihood with analytic
//! gradients, multi-restart projected gradient ascent on log-parameters,
//! and an Armijo backtracking line search. The kernel matrix always carries
//! a diagonal nugget, escalated by factors of ten when a Cholesky
//! factorisation fails.

use rand::Rng;

use crate::design::{role, stream_rng};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;

const SQRT5: f64 = 2.236067977499789696;

/// Base diagonal nugget added to the kernel matrix.
pub const NUGGET_BASE: f64 = 1e-8;
/// Largest nugget tried before fitting gives up with a conditioning error.
pub const NUGGET_CEILING: f64 = 1e-4;
/// Lengthscale search bounds (in unit-box input space).
pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-3, 1e2);
/// Signal-variance search bounds (in normalised target space).
pub const SIGNAL_VARIANCE_BOUNDS: (f64, f64) = (1e-4, 1e2);

const RESTARTS: usize = 5;
const MAX_ASCENT_ITERS: usize = 50;
const MAX_BACKTRACKS: usize = 14;
const ARMIJO_C1: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-3;

/// Kernel hyperparameters of a (possibly unfitted) Matérn-5/2 ARD kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelHyperparameters {
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub nugget: f64,
}

impl KernelHyperparameters {
    fn validate(&self) -> Result<()> {
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return Err(Error::invalid("signal variance must be positive"));
        }
        if self.lengthscales.is_empty() {
            return Err(Error::EmptyInput("kernel needs at least one lengthscale"));
        }
        if self.lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("lengthscales must be positive"));
        }
        if !(self.nugget >= 0.0) || !self.nugget.is_finite() {
            return Err(Error::invalid("nugget must be non-negative"));
        }
        Ok(())
    }
}

/// Affine map applied to raw targets before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalisationRecord {
    pub offset: f64,
    pub scale: f64,
    pub xi: f64,
}

impl NormalisationRecord {
    pub fn normalise(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.scale
    }

    pub fn denormalise(&self, z: f64) -> f64 {
        z * self.scale + self.offset
    }
}

/// Renormalises raw targets: subtract `(1-xi)*mean + xi*min`, divide by the
/// sample standard deviation (`n-1` denominator; a scale below `1e-12`
/// falls back to `1` so constant targets stay finite).
pub fn normalise_targets(raw: &[f64], xi: f64) -> Result<(Vec<f64>, NormalisationRecord)> {
    if raw.is_empty() {
        return Err(Error::EmptyInput("no targets to normalise"));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("targets must be finite"));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::invalid(format!("xi = {xi} outside [0, 1]")));
    }
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let offset = (1.0 - xi) * mean + xi * min;
    let scale = if raw.len() < 2 {
        1.0
    } else {
        let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        if std < 1e-12 {
            1.0
        } else {
            std
        }
    };
    let record = NormalisationRecord { offset, scale, xi };
    Ok((raw.iter().map(|v| record.normalise(*v)).collect(), record))
}

fn kernel_value(a: &[f64], b: &[f64], signal_variance: f64, lengthscales: &[f64]) -> f64 {
    let mut r2 = 0.0;
    for d in 0..a.len() {
        let z = (a[d] - b[d]) / lengthscales[d];
        r2 += z * z;
    }
    let r = r2.sqrt();
    let s5r = SQRT5 * r;
    signal_variance * (1.0 + s5r + (5.0 / 3.0) * r2) * (-s5r).exp()
}

/// Matérn-5/2 ARD kernel
/// `k(a,b) = s * (1 + sqrt5*r + 5*r^2/3) * exp(-sqrt5*r)` with
/// `r^2 = sum_d ((a_d-b_d)/l_d)^2`. The nugget is *not* included: it only
/// ever appears on the diagonal of a training kernel matrix.
pub fn matern52(a: &[f64], b: &[f64], hp: &KernelHyperparameters) -> Result<f64> {
    hp.validate()?;
    let d = hp.lengthscales.len();
    if a.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.len(),
        });
    }
    if b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    Ok(kernel_value(a, b, hp.signal_variance, &hp.lengthscales))
}

struct TrainData<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    d: usize,
    n: usize,
}

/// Kernel matrix without the nugget, row-major.
fn kernel_matrix(data: &TrainData, signal_variance: f64, lengthscales: &[f64]) -> Vec<f64> {
    let n = data.n;
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = signal_variance;
        for j in 0..i {
            let v = kernel_value(&data.x[i], &data.x[j], signal_variance, lengthscales);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

struct Evaluation {
    lml: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    nugget: f64,
    /// Kernel matrix including the nugget diagonal.
    kmat: Vec<f64>,
}

/// Evaluates the log marginal likelihood at the given log-parameters,
/// escalating the nugget as needed. `None` when no nugget up to the ceiling
/// yields a positive-definite matrix.
fn evaluate(data: &TrainData, theta: &[f64]) -> Option<Evaluation> {
    let signal_variance = theta[0].exp();
    let lengthscales: Vec<f64> = theta[1..].iter().map(|t| t.exp()).collect();
    let base = kernel_matrix(data, signal_variance, &lengthscales);
    let n = data.n;
    let mut nugget = NUGGET_BASE;
    loop {
        let mut k = base.clone();
        for i in 0..n {
            k[i * n + i] += nugget;
        }
        if let Some(chol) = Cholesky::decompose(&k, n) {
            let alpha = chol.solve(data.y);
            let fit_term: f64 = data.y.iter().zip(&alpha).map(|(y, a)| y * a).sum();
            let lml = -0.5 * fit_term
                - 0.5 * chol.log_det()
                - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            if lml.is_finite() {
                return Some(Evaluation {
                    lml,
                    chol,
                    alpha,
                    nugget,
                    kmat: k,
                });
            }
            return None;
        }
        if nugget >= NUGGET_CEILING {
            return None;
        }
        nugget = (nugget * 10.0).min(NUGGET_CEILING);
    }
}

/// Analytic gradient of the log marginal likelihood with respect to the
/// log-parameters `[ln s, ln l_0, .., ln l_{D-1}]`:
/// `dL/dt = 0.5 * tr((aa' - K^{-1}) dK/dt)`.
fn gradient(data: &TrainData, theta: &[f64], eval: &Evaluation) -> Vec<f64> {
    let n = data.n;
    let d = data.d;
    let signal_variance = theta[0].exp();
    let lengthscales: Vec<f64> = theta[1..].iter().map(|t| t.exp()).collect();
    let inv = eval.chol.inverse();
    let alpha = &eval.alpha;
    let mut grad = vec![0.0; 1 + d];
    for i in 0..n {
        // Diagonal: only the signal-variance derivative is non-zero there
        // (the nugget is held fixed, distances are zero).
        let mii = alpha[i] * alpha[i] - inv[i * n + i];
        grad[0] += 0.5 * mii * signal_variance;
        for j in (i + 1)..n {
            let mij = alpha[i] * alpha[j] - inv[i * n + j];
            let kap = eval.kmat[i * n + j]; // off-diagonal carries no nugget
            grad[0] += mij * kap;
            // d kernel / d ln l_t = s * (5/3) * (1 + sqrt5 r) e^{-sqrt5 r}
            //                        * (delta_t / l_t)^2   (finite at r = 0)
            let mut r2 = 0.0;
            for t in 0..d {
                let z = (data.x[i][t] - data.x[j][t]) / lengthscales[t];
                r2 += z * z;
            }
            let r = r2.sqrt();
            let common =
                mij * signal_variance * (5.0 / 3.0) * (1.0 + SQRT5 * r) * (-SQRT5 * r).exp();
            for t in 0..d {
                let z = (data.x[i][t] - data.x[j][t]) / lengthscales[t];
                grad[1 + t] += common * z * z;
            }
        }
    }
    grad
}

fn clamp_to_bounds(theta: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..theta.len() {
        theta[i] = theta[i].clamp(lo[i], hi[i]);
    }
}

/// A fitted Gaussian-process surrogate.
#[derive(Debug)]
pub struct SurrogateModel {
    train_x: Vec<Vec<f64>>,
    targets: Vec<f64>,
    normalisation: NormalisationRecord,
    hyperparameters: KernelHyperparameters,
    chol: Cholesky,
    alpha: Vec<f64>,
    lml: f64,
}

/// Fits a zero-mean GP to `(train_x, raw_y)`.
///
/// Training inputs must live in the unit box; targets are renormalised
/// internally with weight `xi` and the fitted model predicts in that
/// normalised space. Hyperparameters are optimised over bounded
/// log-parameters by gradient ascent from [`RESTARTS`] starting points: a
/// fixed one (`l_d = 0.5*sqrt(D)`, unit signal variance) plus log-uniform
/// random draws from the `seed`-derived stream. The best restart by final
/// log marginal likelihood wins.
pub fn fit(train_x: &[Vec<f64>], raw_y: &[f64], xi: f64, seed: u64) -> Result<SurrogateModel> {
    let n = train_x.len();
    if n < 2 {
        return Err(Error::invalid("gp fit needs at least two training points"));
    }
    if raw_y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: raw_y.len(),
        });
    }
    let d = train_x[0].len();
    if d == 0 {
        return Err(Error::EmptyInput("zero-dimensional training inputs"));
    }
    for (i, x) in train_x.iter().enumerate() {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        for (dim, &v) in x.iter().enumerate() {
            if !v.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::OutOfBounds {
                    dim,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        for j in 0..i {
            if train_x[j] == *x {
                return Err(Error::DuplicatePoint(j, i));
            }
        }
    }
    let (targets, normalisation) = normalise_targets(raw_y, xi)?;

    let data = TrainData {
        x: train_x,
        y: &targets,
        d,
        n,
    };
    let lo: Vec<f64> = std::iter::once(SIGNAL_VARIANCE_BOUNDS.0.ln())
        .chain(std::iter::repeat(LENGTHSCALE_BOUNDS.0.ln()).take(d))
        .collect();
    let hi: Vec<f64> = std::iter::once(SIGNAL_VARIANCE_BOUNDS.1.ln())
        .chain(std::iter::repeat(LENGTHSCALE_BOUNDS.1.ln()).take(d))
        .collect();

    let mut best: Option<(Vec<f64>, Evaluation)> = None;
    for restart in 0..RESTARTS {
        let mut theta = if restart == 0 {
            let mut t = vec![0.0; 1 + d]; // unit signal variance
            let l0 = (0.5 * (d as f64).sqrt()).ln();
            for v in t[1..].iter_mut() {
                *v = l0;
            }
            t
        } else {
            let mut rng = stream_rng(seed, &[role::FIT, restart as u64]);
            (0..=d)
                .map(|i| lo[i] + rng.gen::<f64>() * (hi[i] - lo[i]))
                .collect()
        };
        clamp_to_bounds(&mut theta, &lo, &hi);
        let Some(mut eval) = evaluate(&data, &theta) else {
            continue;
        };
        let mut step = 0.1f64;
        for _ in 0..MAX_ASCENT_ITERS {
            let grad = gradient(&data, &theta, &eval);
            // Projected gradient: ignore components that push against an
            // active bound.
            let mut pg_norm = 0.0f64;
            for i in 0..grad.len() {
                let blocked = (theta[i] >= hi[i] && grad[i] > 0.0)
                    || (theta[i] <= lo[i] && grad[i] < 0.0);
                if !blocked {
                    pg_norm = pg_norm.max(grad[i].abs());
                }
            }
            if pg_norm < GRAD_TOL {
                break;
            }
            step = (step * 2.0).min(1.0);
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                let mut cand: Vec<f64> =
                    theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
                clamp_to_bounds(&mut cand, &lo, &hi);
                let gain: f64 = cand
                    .iter()
                    .zip(&theta)
                    .zip(&grad)
                    .map(|((c, t), g)| (c - t) * g)
                    .sum();
                if gain <= 0.0 {
                    step *= 0.5;
                    continue;
                }
                if let Some(cand_eval) = evaluate(&data, &cand) {
                    if cand_eval.lml >= eval.lml + ARMIJO_C1 * gain {
                        theta = cand;
                        eval = cand_eval;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| eval.lml > b.lml) {
            best = Some((theta, eval));
        }
    }

    let Some((theta, eval)) = best else {
        return Err(Error::Conditioning {
            nugget: NUGGET_CEILING,
        });
    };
    let hyperparameters = KernelHyperparameters {
        signal_variance: theta[0].exp(),
        lengthscales: theta[1..].iter().map(|t| t.exp()).collect(),
        nugget: eval.nugget,
    };
    Ok(SurrogateModel {
        train_x: train_x.to_vec(),
        targets,
        normalisation,
        hyperparameters,
        lml: eval.lml,
        alpha: eval.alpha,
        chol: eval.chol,
    })
}

impl SurrogateModel {
    /// Posterior mean and variance (in normalised target space) at `x`.
    /// The predictive variance is nugget-free: at a training input it
    /// collapses towards zero instead of returning the jitter floor.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let d = self.decision_dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("prediction input has non-finite component"));
        }
        let hp = &self.hyperparameters;
        let kstar: Vec<f64> = self
            .train_x
            .iter()
            .map(|xt| kernel_value(x, xt, hp.signal_variance, &hp.lengthscales))
            .collect();
        let mean: f64 = kstar.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        let v = self.chol.solve_lower(&kstar);
        let variance = (hp.signal_variance - v.iter().map(|z| z * z).sum::<f64>()).max(0.0);
        Ok((mean, variance))
    }

    pub fn hyperparameters(&self) -> &KernelHyperparameters {
        &self.hyperparameters
    }

    pub fn normalisation(&self) -> &NormalisationRecord {
        &self.normalisation
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Normalised training targets, in training order.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Smallest normalised training target (incumbent for minimisation).
    pub fn best_target(&self) -> f64 {
        self.targets.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn train_len(&self) -> usize {
        self.train_x.len()
    }

    pub fn decision_dim(&self) -> usize {
        self.hyperparameters.lengthscales.len()
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }
}

/// Log marginal likelihood of `targets` under the kernel `hp` at inputs
/// `train_x`, with `hp.nugget` on the diagonal (no escalation). Intended
/// for comparing hyperparameter candidates on fixed data.
pub fn log_marginal_likelihood(
    train_x: &[Vec<f64>],
    targets: &[f64],
    hp: &KernelHyperparameters,
) -> Result<f64> {
    hp.validate()?;
    let n = train_x.len();
    if n == 0 {
        return Err(Error::EmptyInput("no training points"));
    }
    if targets.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    let d = hp.lengthscales.len();
    if train_x.iter().any(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: train_x.iter().find(|x| x.len() != d).unwrap().len(),
        });
    }
    let data = TrainData {
        x: train_x,
        y: targets,
        d,
        n,
    };
    let mut k = kernel_matrix(&data, hp.signal_variance, &hp.lengthscales);
    for i in 0..n {
        k[i * n + i] += hp.nugget;
    }
    let chol = Cholesky::decompose(&k, n).ok_or(Error::Conditioning { nugget: hp.nugget })?;
    let alpha = chol.solve(targets);
    let fit_term: f64 = targets.iter().zip(&alpha).map(|(y, a)| y * a).sum();
    Ok(-0.5 * fit_term - 0.5 * chol.log_det() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
}
