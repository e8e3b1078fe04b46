//! Bi-objective benchmark problems and the aerofoil design problem.
//!
//! The synthetic families (ZDT and two-objective DTLZ instances) have
//! known decision-space bounds and closed-form trade-off fronts, which
//! makes them suitable for measuring optimiser quality. The aerofoil
//! problem wraps the parametric geometry of [`crate::aerofoil`]; its
//! aerodynamic objective comes from an external evaluator and it has no
//! closed-form front.
//!
//! All problems minimise both objectives.

use std::f64::consts::PI;

use crate::aerofoil::{self, ExternalEvaluator};
use crate::archive::nondominated_set;
use crate::error::{Error, Result};

/// Smallest attainable first objective of `zdt6`: the global maximum of
/// `exp(-4 x) * sin(6 pi x)^6` sits on the first oscillation hump, at
/// `x = atan(9 pi) / (6 pi)`.
pub const ZDT6_F1_MIN: f64 = 0.2807753188153697;

/// Benchmark family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz7,
    Aerofoil,
}

/// A bounded minimisation problem with two objectives.
#[derive(Debug, Clone)]
pub struct Problem {
    kind: Kind,
    name: &'static str,
    bounds: Vec<(f64, f64)>,
    evaluator: Option<ExternalEvaluator>,
}

const DEFAULT_DIMENSION: usize = 10;

impl Problem {
    /// Looks a problem up by (case-insensitive) name, optionally
    /// overriding the decision-space dimension. Synthetic problems
    /// default to ten decision variables and need at least two; the
    /// aerofoil dimension is fixed by its parametrisation.
    pub fn by_name(name: &str, dimensions: Option<usize>) -> Result<Problem> {
        let lowered = name.to_ascii_lowercase();
        let (kind, canonical) = match lowered.as_str() {
            "zdt1" => (Kind::Zdt1, "zdt1"),
            "zdt2" => (Kind::Zdt2, "zdt2"),
            "zdt3" => (Kind::Zdt3, "zdt3"),
            "zdt4" => (Kind::Zdt4, "zdt4"),
            "zdt6" => (Kind::Zdt6, "zdt6"),
            "dtlz1" => (Kind::Dtlz1, "dtlz1"),
            "dtlz2" => (Kind::Dtlz2, "dtlz2"),
            "dtlz3" => (Kind::Dtlz3, "dtlz3"),
            "dtlz4" => (Kind::Dtlz4, "dtlz4"),
            "dtlz7" => (Kind::Dtlz7, "dtlz7"),
            "aerofoil" => (Kind::Aerofoil, "aerofoil"),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown problem {name:?} (expected one of zdt1, zdt2, zdt3, zdt4, zdt6, \
                     dtlz1, dtlz2, dtlz3, dtlz4, dtlz7, aerofoil)"
                )))
            }
        };
        if kind == Kind::Aerofoil {
            if let Some(d) = dimensions {
                if d != aerofoil::DECISION_DIM {
                    return Err(Error::InvalidArgument(format!(
                        "the aerofoil parametrisation has exactly {} decision variables, not {d}",
                        aerofoil::DECISION_DIM
                    )));
                }
            }
            return Ok(Problem {
                kind,
                name: canonical,
                bounds: aerofoil::bounds().to_vec(),
                evaluator: None,
            });
        }
        let d = dimensions.unwrap_or(DEFAULT_DIMENSION);
        if d < 2 {
            return Err(Error::InvalidArgument(format!(
                "{canonical} needs at least 2 decision variables, got {d}"
            )));
        }
        let bounds = match kind {
            // First variable on the unit interval, multimodal tail wider.
            Kind::Zdt4 => {
                let mut b = vec![(-5.0, 5.0); d];
                b[0] = (0.0, 1.0);
                b
            }
            _ => vec![(0.0, 1.0); d],
        };
        Ok(Problem {
            kind,
            name: canonical,
            bounds,
            evaluator: None,
        })
    }

    /// Attaches (or clears) the external aerodynamic evaluator used by
    /// the aerofoil problem. Synthetic problems ignore it.
    pub fn with_evaluator(mut self, evaluator: Option<ExternalEvaluator>) -> Self {
        self.evaluator = evaluator;
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn decision_dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn objective_count(&self) -> usize {
        2
    }

    /// Per-dimension box bounds of the decision space.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Evaluates both objectives at a native-space decision vector.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                got: x.len(),
            });
        }
        for (dim, (&v, &(lo, hi))) in x.iter().zip(self.bounds.iter()).enumerate() {
            if !v.is_finite() || v < lo - 1e-12 || v > hi + 1e-12 {
                return Err(Error::OutOfBounds { dim, value: v, lo, hi });
            }
        }
        Ok(match self.kind {
            Kind::Zdt1 => {
                let g = zdt_g(x);
                vec![x[0], g * (1.0 - (x[0] / g).sqrt())]
            }
            Kind::Zdt2 => {
                let g = zdt_g(x);
                let ratio = x[0] / g;
                vec![x[0], g * (1.0 - ratio * ratio)]
            }
            Kind::Zdt3 => {
                let g = zdt_g(x);
                let ratio = x[0] / g;
                vec![
                    x[0],
                    g * (1.0 - ratio.sqrt() - ratio * (10.0 * PI * x[0]).sin()),
                ]
            }
            Kind::Zdt4 => {
                let tail: f64 = x[1..]
                    .iter()
                    .map(|&v| v * v - 10.0 * (4.0 * PI * v).cos())
                    .sum();
                let g = 1.0 + 10.0 * (x.len() - 1) as f64 + tail;
                vec![x[0], g * (1.0 - (x[0] / g).sqrt())]
            }
            Kind::Zdt6 => {
                let s = (6.0 * PI * x[0]).sin();
                let f1 = 1.0 - (-4.0 * x[0]).exp() * s.powi(6);
                let mean_tail: f64 =
                    x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
                let g = 1.0 + 9.0 * mean_tail.powf(0.25);
                let ratio = f1 / g;
                vec![f1, g * (1.0 - ratio * ratio)]
            }
            Kind::Dtlz1 => {
                let g = dtlz1_g(&x[1..]);
                vec![
                    0.5 * x[0] * (1.0 + g),
                    0.5 * (1.0 - x[0]) * (1.0 + g),
                ]
            }
            Kind::Dtlz2 => {
                let g = dtlz2_g(&x[1..]);
                let angle = 0.5 * PI * x[0];
                vec![(1.0 + g) * angle.cos(), (1.0 + g) * angle.sin()]
            }
            Kind::Dtlz3 => {
                let g = dtlz1_g(&x[1..]);
                let angle = 0.5 * PI * x[0];
                vec![(1.0 + g) * angle.cos(), (1.0 + g) * angle.sin()]
            }
            Kind::Dtlz4 => {
                let g = dtlz2_g(&x[1..]);
                let angle = 0.5 * PI * x[0].powi(100);
                vec![(1.0 + g) * angle.cos(), (1.0 + g) * angle.sin()]
            }
            Kind::Dtlz7 => {
                let k = (x.len() - 1) as f64;
                let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / k;
                let f1 = x[0];
                let h = 2.0 - f1 / (1.0 + g) * (1.0 + (3.0 * PI * f1).sin());
                vec![f1, (1.0 + g) * h]
            }
            Kind::Aerofoil => {
                return aerofoil::evaluate_objectives(x, self.evaluator.as_ref())
            }
        })
    }

    /// Whether a closed-form trade-off front is available.
    pub fn has_true_front(&self) -> bool {
        self.kind != Kind::Aerofoil
    }

    /// Returns up to `n` points (at least two) of the optimal front,
    /// sorted by ascending first objective. Disconnected fronts (`zdt3`,
    /// `dtlz7`) are densely sampled and filtered to their non-dominated
    /// subset, so they may return slightly fewer than `n` points.
    pub fn true_front(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        if n < 2 {
            return Err(Error::invalid("a front needs at least two points"));
        }
        let linspace = |lo: f64, hi: f64| -> Vec<f64> {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let front: Vec<Vec<f64>> = match self.kind {
            Kind::Zdt1 | Kind::Zdt4 => linspace(0.0, 1.0)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1.sqrt()])
                .collect(),
            Kind::Zdt2 => linspace(0.0, 1.0)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1 * f1])
                .collect(),
            Kind::Zdt3 => {
                let dense = (n * 16).max(4096);
                let candidates: Vec<Vec<f64>> = (0..dense)
                    .map(|i| {
                        let f1 = i as f64 / (dense - 1) as f64;
                        vec![f1, 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin()]
                    })
                    .collect();
                thin_nondominated(candidates, n)?
            }
            Kind::Zdt6 => linspace(ZDT6_F1_MIN, 1.0)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1 * f1])
                .collect(),
            Kind::Dtlz1 => linspace(0.0, 0.5)
                .into_iter()
                .map(|f1| vec![f1, 0.5 - f1])
                .collect(),
            Kind::Dtlz2 | Kind::Dtlz3 | Kind::Dtlz4 => linspace(0.0, 1.0)
                .into_iter()
                .map(|f1| vec![f1, (1.0 - f1 * f1).max(0.0).sqrt()])
                .collect(),
            Kind::Dtlz7 => {
                let dense = (n * 16).max(4096);
                let candidates: Vec<Vec<f64>> = (0..dense)
                    .map(|i| {
                        let f1 = i as f64 / (dense - 1) as f64;
                        vec![f1, 4.0 - f1 * (1.0 + (3.0 * PI * f1).sin())]
                    })
                    .collect();
                thin_nondominated(candidates, n)?
            }
            Kind::Aerofoil => {
                return Err(Error::invalid(
                    "the aerofoil problem has no closed-form front",
                ))
            }
        };
        Ok(front)
    }
}

fn zdt_g(x: &[f64]) -> f64 {
    1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64
}

fn dtlz1_g(tail: &[f64]) -> f64 {
    100.0
        * (tail.len() as f64
            + tail
                .iter()
                .map(|&v| {
                    let c = v - 0.5;
                    c * c - (20.0 * PI * c).cos()
                })
                .sum::<f64>())
}

fn dtlz2_g(tail: &[f64]) -> f64 {
    tail.iter()
        .map(|&v| {
            let c = v - 0.5;
            c * c
        })
        .sum()
}

/// Keeps the non-dominated subset of `candidates` (assumed sorted by
/// ascending first objective) and thins it evenly to at most `n` points.
fn thin_nondominated(candidates: Vec<Vec<f64>>, n: usize) -> Result<Vec<Vec<f64>>> {
    let keep = nondominated_set(&candidates)?;
    let kept: Vec<Vec<f64>> = keep.into_iter().map(|i| candidates[i].clone()).collect();
    if kept.len() <= n {
        return Ok(kept);
    }
    Ok((0..n)
        .map(|i| {
            let j = i * (kept.len() - 1) / (n - 1);
            kept[j].clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn zeros_tail(first: f64, d: usize) -> Vec<f64> {
        let mut x = vec![0.0; d];
        x[0] = first;
        x
    }

    #[test]
    fn zdt_known_values() {
        // With a zero tail the scaling function collapses to one, so each
        // second objective reduces to its shape function.
        let d = 10;
        let zdt1 = Problem::by_name("zdt1", None).unwrap();
        let f = zdt1.evaluate(&zeros_tail(0.25, d)).unwrap();
        assert!((f[0] - 0.25).abs() < 1e-15);
        assert!((f[1] - 0.5).abs() < 1e-12);
        // A unit tail drives the scaling function to ten.
        let mut worst = vec![1.0; d];
        worst[0] = 0.0;
        let f = zdt1.evaluate(&worst).unwrap();
        assert!((f[1] - 10.0).abs() < 1e-12);

        let zdt2 = Problem::by_name("zdt2", None).unwrap();
        let f = zdt2.evaluate(&zeros_tail(0.5, d)).unwrap();
        assert!((f[1] - 0.75).abs() < 1e-12);

        let zdt3 = Problem::by_name("zdt3", None).unwrap();
        let f = zdt3.evaluate(&zeros_tail(0.2, d)).unwrap();
        assert!((f[1] - 0.5527864045000421).abs() < 1e-12);

        // The quadratic and cosine tail terms cancel exactly at zero.
        let zdt4 = Problem::by_name("zdt4", None).unwrap();
        let f = zdt4.evaluate(&zeros_tail(0.3, d)).unwrap();
        assert!((f[1] - (1.0 - 0.3f64.sqrt())).abs() < 1e-12);

        let zdt6 = Problem::by_name("zdt6", None).unwrap();
        let f = zdt6.evaluate(&zeros_tail(0.0, d)).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15);
        assert!(f[1].abs() < 1e-12);
    }

    #[test]
    fn dtlz_known_values() {
        let d = 10;
        let mut x = vec![0.5; d];
        x[0] = 0.3;
        let dtlz1 = Problem::by_name("dtlz1", None).unwrap();
        let f = dtlz1.evaluate(&x).unwrap();
        assert!((f[0] - 0.15).abs() < 1e-12);
        assert!((f[1] - 0.35).abs() < 1e-12);

        x[0] = 1.0 / 3.0;
        let dtlz2 = Problem::by_name("dtlz2", None).unwrap();
        let f = dtlz2.evaluate(&x).unwrap();
        assert!((f[0] - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((f[1] - 0.5).abs() < 1e-12);

        // Same shape, harder landscape; the tail terms still cancel at 0.5.
        let dtlz3 = Problem::by_name("dtlz3", None).unwrap();
        let f = dtlz3.evaluate(&x).unwrap();
        assert!((f[0] - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((f[1] - 0.5).abs() < 1e-12);

        let dtlz4 = Problem::by_name("dtlz4", None).unwrap();
        x[0] = 1.0;
        let f = dtlz4.evaluate(&x).unwrap();
        assert!(f[0].abs() < 1e-12);
        assert!((f[1] - 1.0).abs() < 1e-12);
        x[0] = 0.0;
        let f = dtlz4.evaluate(&x).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15);
        assert!(f[1].abs() < 1e-15);

        let dtlz7 = Problem::by_name("dtlz7", None).unwrap();
        let f = dtlz7.evaluate(&zeros_tail(0.4, d)).unwrap();
        assert!((f[0] - 0.4).abs() < 1e-15);
        assert!((f[1] - 3.8351141009169893).abs() < 1e-12);
    }

    #[test]
    fn zdt6_front_starts_at_the_minimal_first_objective() {
        let p = Problem::by_name("zdt6", None).unwrap();
        let front = p.true_front(64).unwrap();
        assert!((front[0][0] - ZDT6_F1_MIN).abs() < 1e-12);
        // The minimiser of the first objective sits where the oscillation
        // envelope balances the decay: x = atan(9 pi) / (6 pi).
        let x_star = (9.0 * PI).atan() / (6.0 * PI);
        let f = p.evaluate(&zeros_tail(x_star, 10)).unwrap();
        assert!((f[0] - ZDT6_F1_MIN).abs() < 1e-12);
        // No grid point does better.
        for i in 0..=4000 {
            let x1 = i as f64 / 4000.0;
            let f = p.evaluate(&zeros_tail(x1, 10)).unwrap();
            assert!(f[0] >= ZDT6_F1_MIN - 1e-9);
        }
    }

    #[test]
    fn true_fronts_are_nondominated_and_sorted() {
        for name in [
            "zdt1", "zdt2", "zdt3", "zdt4", "zdt6", "dtlz1", "dtlz2", "dtlz3", "dtlz4",
            "dtlz7",
        ] {
            let p = Problem::by_name(name, None).unwrap();
            assert!(p.has_true_front());
            let front = p.true_front(128).unwrap();
            assert!(front.len() >= 2, "{name}: front too small");
            assert!(front.len() <= 128);
            for w in front.windows(2) {
                assert!(w[1][0] >= w[0][0], "{name}: front not sorted");
            }
            let kept = nondominated_set(&front).unwrap();
            assert_eq!(kept.len(), front.len(), "{name}: front has dominated points");
            assert!(front.iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn front_points_are_attainable_by_evaluation() {
        // Every front point corresponds to a decision vector whose
        // evaluation reproduces it: zero tail for the first family,
        // half-filled tail (plus the inverse shape map) for the second.
        let zdt1 = Problem::by_name("zdt1", None).unwrap();
        for point in zdt1.true_front(33).unwrap() {
            let f = zdt1.evaluate(&zeros_tail(point[0], 10)).unwrap();
            assert!((f[1] - point[1]).abs() < 1e-12);
        }
        let dtlz2 = Problem::by_name("dtlz2", None).unwrap();
        for point in dtlz2.true_front(33).unwrap() {
            let x1 = 2.0 / PI * point[0].clamp(-1.0, 1.0).acos();
            let mut x = vec![0.5; 10];
            x[0] = x1;
            let f = dtlz2.evaluate(&x).unwrap();
            assert!((f[0] - point[0]).abs() < 1e-9);
            assert!((f[1] - point[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn disconnected_fronts_filter_their_dominated_arcs() {
        let zdt3 = Problem::by_name("zdt3", None).unwrap();
        let front = zdt3.true_front(256).unwrap();
        // The sine term makes later arcs dip below the leading one, so the
        // non-dominated subset is a strict filter of the curve...
        assert!(front.len() > 64);
        // ...whose left edge is the curve start.
        assert_eq!(front[0][0], 0.0);
        assert!((front[0][1] - 1.0).abs() < 1e-12);
        // Each retained point still lies exactly on the curve.
        for p in &front {
            let on_curve =
                1.0 - p[0].sqrt() - p[0] * (10.0 * PI * p[0]).sin();
            assert!((p[1] - on_curve).abs() < 1e-12);
        }
        let dtlz7 = Problem::by_name("dtlz7", None).unwrap();
        let front = dtlz7.true_front(256).unwrap();
        for p in &front {
            let on_curve = 4.0 - p[0] * (1.0 + (3.0 * PI * p[0]).sin());
            assert!((p[1] - on_curve).abs() < 1e-12);
        }
    }

    #[test]
    fn names_dimensions_and_bounds() {
        let p = Problem::by_name("ZDT1", None).unwrap();
        assert_eq!(p.name(), "zdt1");
        assert_eq!(p.decision_dim(), 10);
        assert_eq!(p.objective_count(), 2);
        assert!(p.bounds().iter().all(|&b| b == (0.0, 1.0)));

        let p = Problem::by_name("Dtlz7", Some(5)).unwrap();
        assert_eq!(p.decision_dim(), 5);

        let p = Problem::by_name("zdt4", Some(6)).unwrap();
        assert_eq!(p.bounds()[0], (0.0, 1.0));
        assert_eq!(p.bounds()[1], (-5.0, 5.0));

        assert!(Problem::by_name("zdt1", Some(1)).is_err());
        assert!(Problem::by_name("zdt9", None).is_err());

        let p = Problem::by_name("aerofoil", None).unwrap();
        assert_eq!(p.decision_dim(), aerofoil::DECISION_DIM);
        assert!(!p.has_true_front());
        assert!(p.true_front(16).is_err());
        assert!(Problem::by_name("aerofoil", Some(12)).is_err());
        assert!(Problem::by_name("aerofoil", Some(13)).is_ok());
    }

    #[test]
    fn evaluation_validates_inputs() {
        let p = Problem::by_name("zdt1", Some(4)).unwrap();
        assert!(matches!(
            p.evaluate(&[0.5; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.evaluate(&[0.5, 0.5, 1.5, 0.5]),
            Err(Error::OutOfBounds { dim: 2, .. })
        ));
        assert!(matches!(
            p.evaluate(&[f64::NAN, 0.5, 0.5, 0.5]),
            Err(Error::OutOfBounds { dim: 0, .. })
        ));
        // ZDT4's wide tail bounds admit what the others reject.
        let p4 = Problem::by_name("zdt4", Some(4)).unwrap();
        assert!(p4.evaluate(&[0.5, -4.0, 3.0, 0.0]).is_ok());
    }

    #[test]
    fn aerofoil_problem_evaluates_through_the_external_command() {
        let ev = ExternalEvaluator::new(
            vec!["/bin/sh".into(), "-c".into(), "echo 0.42".into()],
            Duration::from_secs(10),
        )
        .unwrap();
        let p = Problem::by_name("aerofoil", None)
            .unwrap()
            .with_evaluator(Some(ev));
        let x = aerofoil::mid_bounds_decision();
        let f = p.evaluate(&x).unwrap();
        assert_eq!(f[0], 0.42);
        assert!(f[1] < 0.0, "stiffness objective should be negated");
        // Without an evaluator the aerodynamic objective cannot be computed.
        let bare = Problem::by_name("aerofoil", None).unwrap();
        assert!(matches!(
            bare.evaluate(&x),
            Err(Error::EvaluationFailure(_))
        ));
    }
}
