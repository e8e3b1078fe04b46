//! Hypervolume-based scalarisation of multi-objective archives.
//!
//! Both scalarisers collapse an archive's objective vectors into one
//! fitness value per point so a *single* GP can model the whole archive:
//!
//! * **xHVI** — exclusive hypervolume improvement for non-dominated points
//!   minus, for dominated points, the volume of the region separating them
//!   from the front. Positive exactly on the first Pareto shell, negative
//!   (or zero in measure-zero tie cases) everywhere else.
//! * **HypI** — hypervolume of the point joined with the *next* Pareto
//!   shell. This grades dominated points by how close they sit to the
//!   front instead of how redundant they are, which preserves more
//!   ordering information deep in the archive.
//!
//! Higher fitness is better for both. Callers typically min-max normalise
//! objectives first ([`normalise_objectives`]) and use the unit reference
//! point.

use crate::archive::{nondominated_set, pareto_shells};
use crate::error::{Error, Result};
use crate::hypervolume::{hvi_minus, hypervolume};
use crate::surrogate::{normalise_targets, NormalisationRecord};

/// Per-objective affine scaling produced by [`normalise_objectives`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveScaling {
    pub min: f64,
    pub range: f64,
}

impl ObjectiveScaling {
    pub fn normalise(&self, v: f64) -> f64 {
        (v - self.min) / self.range
    }

    pub fn denormalise(&self, z: f64) -> f64 {
        z * self.range + self.min
    }
}

/// Min-max normalises each objective column to `[0, 1]` over the given
/// set. A column with range below `1e-12` maps to zero (range guard 1), so
/// constant objectives stay finite.
pub fn normalise_objectives(objs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<ObjectiveScaling>)> {
    let first = objs.first().ok_or(Error::EmptyInput("no objective vectors"))?;
    let m = first.len();
    if m == 0 {
        return Err(Error::EmptyInput("zero-length objective vectors"));
    }
    for o in objs {
        if o.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: o.len(),
            });
        }
        if o.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective vectors must be finite"));
        }
    }
    let mut scalings = Vec::with_capacity(m);
    for j in 0..m {
        let min = objs.iter().map(|o| o[j]).fold(f64::INFINITY, f64::min);
        let max = objs.iter().map(|o| o[j]).fold(f64::NEG_INFINITY, f64::max);
        let range = if max - min < 1e-12 { 1.0 } else { max - min };
        scalings.push(ObjectiveScaling { min, range });
    }
    let normalised = objs
        .iter()
        .map(|o| o.iter().zip(&scalings).map(|(v, s)| s.normalise(*v)).collect())
        .collect();
    Ok((normalised, scalings))
}

fn validate_against_reference(objs: &[Vec<f64>], reference: &[f64]) -> Result<()> {
    if objs.is_empty() {
        return Err(Error::EmptyInput("no objective vectors"));
    }
    if reference.is_empty() || reference.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("reference point must be finite and non-empty"));
    }
    for o in objs {
        if o.len() != reference.len() {
            return Err(Error::DimensionMismatch {
                expected: reference.len(),
                got: o.len(),
            });
        }
    }
    Ok(())
}

/// Exchange hypervolume improvement of every point in `objs`:
/// the exclusive contribution to the front for non-dominated points, minus
/// the volume of the box region between the front and the point for
/// dominated ones. The sign partitions the archive: `>= 0` exactly on the
/// first Pareto shell, `<= 0` off it.
pub fn xhvi_all(objs: &[Vec<f64>], reference: &[f64]) -> Result<Vec<f64>> {
    validate_against_reference(objs, reference)?;
    let front_idx = nondominated_set(objs)?;
    let front: Vec<Vec<f64>> = front_idx.iter().map(|&i| objs[i].clone()).collect();
    let hv_front = hypervolume(&front, reference)?;
    let mut out = vec![0.0; objs.len()];
    let mut on_front = vec![false; objs.len()];
    for &i in &front_idx {
        on_front[i] = true;
    }
    for (i, o) in objs.iter().enumerate() {
        if on_front[i] {
            // Exclusive contribution: drop one instance of this point.
            let pos = front.iter().position(|p| p == o).expect("front member");
            let mut rest = front.clone();
            rest.swap_remove(pos);
            out[i] = hv_front - hypervolume(&rest, reference)?;
        } else {
            // A dominated point adds no volume; what remains is the
            // (negated) volume of the region that separates it from the
            // front members strictly better in every component.
            out[i] = -hvi_minus(&front, o)?;
        }
    }
    Ok(out)
}

/// Hypervolume improvement over the *next* Pareto shell for every point:
/// a point on shell `k` scores `HV(shell_{k+1} ∪ {point})`; the last shell
/// falls back to the point's own dominated volume.
pub fn hypi_all(objs: &[Vec<f64>], reference: &[f64]) -> Result<Vec<f64>> {
    validate_against_reference(objs, reference)?;
    let shells = pareto_shells(objs)?;
    let mut out = vec![0.0; objs.len()];
    for (k, shell) in shells.iter().enumerate() {
        let next: Vec<Vec<f64>> = shells
            .get(k + 1)
            .map(|s| s.iter().map(|&i| objs[i].clone()).collect())
            .unwrap_or_default();
        for &i in shell {
            let mut joined = next.clone();
            joined.push(objs[i].clone());
            out[i] = hypervolume(&joined, reference)?;
        }
    }
    Ok(out)
}

/// Prepares scalar fitness values for GP fitting: negates (the GP and its
/// expected-improvement acquisition minimise, fitness is
/// higher-is-better), then renormalises with weight `xi`.
pub fn scalar_targets_for_gp(fitness: &[f64], xi: f64) -> Result<(Vec<f64>, NormalisationRecord)> {
    let negated: Vec<f64> = fitness.iter().map(|f| -f).collect();
    normalise_targets(&negated, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [f64; 2] = [1.0, 1.0];

    #[test]
    fn objective_normalisation_is_columnwise_min_max() {
        let objs = vec![vec![1.0, 10.0], vec![3.0, 30.0]];
        let (norm, scalings) = normalise_objectives(&objs).unwrap();
        assert_eq!(norm, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(scalings[0], ObjectiveScaling { min: 1.0, range: 2.0 });
        assert_eq!(scalings[1], ObjectiveScaling { min: 10.0, range: 20.0 });
        assert_eq!(scalings[0].denormalise(0.5), 2.0);
    }

    #[test]
    fn degenerate_objective_column_is_guarded() {
        let objs = vec![vec![5.0, 1.0], vec![5.0, 2.0]];
        let (norm, scalings) = normalise_objectives(&objs).unwrap();
        assert_eq!(norm[0][0], 0.0);
        assert_eq!(norm[1][0], 0.0);
        assert_eq!(scalings[0].range, 1.0);
    }

    #[test]
    fn xhvi_frozen_example() {
        let objs = vec![vec![0.25, 0.75], vec![0.75, 0.25], vec![0.8, 0.8]];
        let x = xhvi_all(&objs, &REF).unwrap();
        // Both front members contribute 0.3125 - 0.1875 exclusively.
        assert!((x[0] - 0.125).abs() < 1e-15);
        assert!((x[1] - 0.125).abs() < 1e-15);
        // The dominated point sits behind a region of
        // 0.5*0.05 + 0.05*0.55 = 0.0525.
        assert!((x[2] + 0.0525).abs() < 1e-15);
    }

    #[test]
    fn xhvi_sign_partitions_the_shells() {
        let objs = vec![
            vec![0.1, 0.9],
            vec![0.5, 0.5],
            vec![0.9, 0.1],
            vec![0.6, 0.6],
            vec![0.95, 0.95],
            vec![0.2, 0.85],
        ];
        let x = xhvi_all(&objs, &REF).unwrap();
        let front = nondominated_set(&objs).unwrap();
        for i in 0..objs.len() {
            if front.contains(&i) {
                assert!(x[i] >= 0.0, "front point {i} got {}", x[i]);
            } else {
                assert!(x[i] <= 0.0, "dominated point {i} got {}", x[i]);
            }
        }
    }

    #[test]
    fn xhvi_singleton_is_the_inclusive_volume() {
        let objs = vec![vec![0.4, 0.25]];
        let x = xhvi_all(&objs, &REF).unwrap();
        assert!((x[0] - 0.6 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn hypi_frozen_example() {
        // Shell 0: (0.25,0.75), (0.75,0.25); shell 1: (0.9,0.3).
        let objs = vec![vec![0.25, 0.75], vec![0.75, 0.25], vec![0.9, 0.3]];
        let h = hypi_all(&objs, &REF).unwrap();
        // (0.25,0.75) with (0.9,0.3): 0.65*0.25 + 0.1*0.7 = 0.2325.
        assert!((h[0] - 0.2325).abs() < 1e-15);
        // (0.75,0.25) dominates (0.9,0.3): union is its own box.
        assert!((h[1] - 0.1875).abs() < 1e-15);
        // Last shell: own volume 0.1*0.7.
        assert!((h[2] - 0.07).abs() < 1e-15);
    }

    #[test]
    fn hypi_is_at_least_the_next_shell_volume() {
        let objs = vec![
            vec![0.1, 0.8],
            vec![0.8, 0.1],
            vec![0.3, 0.9],
            vec![0.9, 0.35],
            vec![0.5, 0.95],
        ];
        let shells = crate::archive::pareto_shells(&objs).unwrap();
        let h = hypi_all(&objs, &REF).unwrap();
        for (k, shell) in shells.iter().enumerate() {
            let next: Vec<Vec<f64>> = shells
                .get(k + 1)
                .map(|s| s.iter().map(|&i| objs[i].clone()).collect())
                .unwrap_or_default();
            let base = hypervolume(&next, &REF).unwrap();
            for &i in shell {
                assert!(h[i] >= base - 1e-15);
            }
        }
    }

    #[test]
    fn scalar_targets_negate_and_normalise() {
        let (z, rec) = scalar_targets_for_gp(&[0.3, 0.1], 0.0).unwrap();
        // Negated fitness {-0.3, -0.1}: mean -0.2, sample std 0.1*sqrt(2).
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z[0] + s).abs() < 1e-12);
        assert!((z[1] - s).abs() < 1e-12);
        assert!((rec.offset + 0.2).abs() < 1e-15);
        // Highest fitness maps to the lowest (best) GP target.
        assert!(z[0] < z[1]);
    }

    #[test]
    fn scalariser_validation() {
        assert!(xhvi_all(&[], &REF).is_err());
        assert!(hypi_all(&[vec![0.1, 0.2, 0.3]], &REF).is_err());
        assert!(xhvi_all(&[vec![0.1, 0.2]], &[f64::NAN, 1.0]).is_err());
    }
}
