//! Quality metrics for bi-objective optimisation runs.
//!
//! Two complementary views are provided. The hypervolume percentage
//! compares the volume dominated by an approximation set against the
//! volume dominated by the known optimal front, under a shared reference
//! point. The empirical attainment function (EAF) looks across repeated
//! runs: for each point of objective space it measures the fraction of
//! runs that produced at least one solution weakly dominating it, and
//! integrating the difference of two such surfaces summarises which of
//! two optimisers attains more of the space, more reliably.

use crate::error::{Error, Result};
use crate::hypervolume::hypervolume;

fn check_points(objs: &[Vec<f64>], m: usize) -> Result<()> {
    for p in objs {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.len(),
            });
        }
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("objective vectors must be finite"));
        }
    }
    Ok(())
}

/// Componentwise minimum of a non-empty point set.
pub fn ideal_point(objs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if objs.is_empty() {
        return Err(Error::EmptyInput("ideal point of an empty set"));
    }
    let m = objs[0].len();
    check_points(objs, m)?;
    let mut ideal = objs[0].clone();
    for p in &objs[1..] {
        for (i, v) in ideal.iter_mut().enumerate() {
            *v = v.min(p[i]);
        }
    }
    Ok(ideal)
}

/// Componentwise maximum of a non-empty point set.
pub fn nadir_point(objs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if objs.is_empty() {
        return Err(Error::EmptyInput("nadir point of an empty set"));
    }
    let m = objs[0].len();
    check_points(objs, m)?;
    let mut nadir = objs[0].clone();
    for p in &objs[1..] {
        for (i, v) in nadir.iter_mut().enumerate() {
            *v = v.max(p[i]);
        }
    }
    Ok(nadir)
}

/// Hypervolume reference point: the nadir of `front`, pushed outward by
/// `inflation` times the front's componentwise extent. A vanishing extent
/// falls back to an absolute pad so the reference stays strictly outside.
pub fn reference_point(front: &[Vec<f64>], inflation: f64) -> Result<Vec<f64>> {
    if !(inflation >= 0.0) || !inflation.is_finite() {
        return Err(Error::invalid("reference inflation must be non-negative"));
    }
    let ideal = ideal_point(front)?;
    let nadir = nadir_point(front)?;
    Ok(nadir
        .iter()
        .zip(ideal.iter())
        .map(|(&hi, &lo)| {
            let extent = (hi - lo).max(1e-12);
            hi + inflation * extent
        })
        .collect())
}

/// Hypervolume of `approximation` as a percentage of the hypervolume of
/// `optimal_front`, both measured against the same `reference`.
pub fn hypervolume_percent(
    approximation: &[Vec<f64>],
    optimal_front: &[Vec<f64>],
    reference: &[f64],
) -> Result<f64> {
    let denominator = hypervolume(optimal_front, reference)?;
    if denominator <= 0.0 {
        return Err(Error::invalid(
            "the optimal front dominates no volume under this reference",
        ));
    }
    let numerator = hypervolume(approximation, reference)?;
    Ok(100.0 * numerator / denominator)
}

/// Hypervolume percentage after each prefix of an evaluation sequence:
/// element `k` scores the first `k + 1` evaluated points. Non-decreasing,
/// since points are only ever added.
pub fn hypervolume_percent_series(
    objectives_in_order: &[Vec<f64>],
    optimal_front: &[Vec<f64>],
    reference: &[f64],
) -> Result<Vec<f64>> {
    let mut series = Vec::with_capacity(objectives_in_order.len());
    for k in 0..objectives_in_order.len() {
        series.push(hypervolume_percent(
            &objectives_in_order[..=k],
            optimal_front,
            reference,
        )?);
    }
    Ok(series)
}

/// A uniform grid of cell centres over a two-objective box, used to
/// discretise attainment surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EafGrid {
    lower: [f64; 2],
    upper: [f64; 2],
    resolution: usize,
}

impl EafGrid {
    /// A `resolution x resolution` grid over the box `lower..upper`.
    pub fn new(lower: [f64; 2], upper: [f64; 2], resolution: usize) -> Result<EafGrid> {
        if resolution == 0 {
            return Err(Error::invalid("grid resolution must be at least one"));
        }
        for k in 0..2 {
            if !lower[k].is_finite() || !upper[k].is_finite() || upper[k] <= lower[k] {
                return Err(Error::invalid(
                    "grid box must be finite with positive extent",
                ));
            }
        }
        Ok(EafGrid {
            lower,
            upper,
            resolution,
        })
    }

    /// The tightest grid whose box covers every point of every given set.
    pub fn covering(sets: &[&[Vec<f64>]], resolution: usize) -> Result<EafGrid> {
        let all: Vec<Vec<f64>> = sets
            .iter()
            .flat_map(|s| s.iter().cloned())
            .collect();
        if all.is_empty() {
            return Err(Error::EmptyInput("covering grid of no points"));
        }
        check_points(&all, 2)?;
        let ideal = ideal_point(&all)?;
        let nadir = nadir_point(&all)?;
        // Keep a sliver of slack so boundary points fall inside cells.
        let pad = |lo: f64, hi: f64| ((hi - lo) * 1e-9).max(1e-12);
        EafGrid::new(
            [ideal[0], ideal[1]],
            [
                nadir[0] + pad(ideal[0], nadir[0]),
                nadir[1] + pad(ideal[1], nadir[1]),
            ],
            resolution,
        )
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn cell_area(&self) -> f64 {
        let r = self.resolution as f64;
        (self.upper[0] - self.lower[0]) / r * ((self.upper[1] - self.lower[1]) / r)
    }

    /// Centre of the cell in column `i` (first objective) and row `j`
    /// (second objective).
    pub fn centre(&self, i: usize, j: usize) -> (f64, f64) {
        let r = self.resolution as f64;
        (
            self.lower[0] + (self.upper[0] - self.lower[0]) * (i as f64 + 0.5) / r,
            self.lower[1] + (self.upper[1] - self.lower[1]) * (j as f64 + 0.5) / r,
        )
    }
}

/// A point set indexed for O(log n) weak-dominance queries: sorted by the
/// first objective with a running minimum of the second.
struct AttainmentIndex {
    f1_sorted: Vec<f64>,
    f2_running_min: Vec<f64>,
}

impl AttainmentIndex {
    fn build(points: &[Vec<f64>]) -> AttainmentIndex {
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut f1_sorted = Vec::with_capacity(sorted.len());
        let mut f2_running_min = Vec::with_capacity(sorted.len());
        let mut best = f64::INFINITY;
        for (f1, f2) in sorted {
            best = best.min(f2);
            f1_sorted.push(f1);
            f2_running_min.push(best);
        }
        AttainmentIndex {
            f1_sorted,
            f2_running_min,
        }
    }

    /// Does any indexed point weakly dominate `z`?
    fn attains(&self, z: (f64, f64)) -> bool {
        let k = self.f1_sorted.partition_point(|&v| v <= z.0);
        k > 0 && self.f2_running_min[k - 1] <= z.1
    }
}

/// Empirical attainment surface of a collection of runs: for each grid
/// cell centre, the fraction of runs with at least one point weakly
/// dominating it. Returned row-major with the first objective varying
/// fastest (index `j * resolution + i`).
pub fn empirical_attainment(runs: &[Vec<Vec<f64>>], grid: &EafGrid) -> Result<Vec<f64>> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("attainment of no runs"));
    }
    for run in runs {
        check_points(run, 2)?;
    }
    let indexes: Vec<AttainmentIndex> =
        runs.iter().map(|r| AttainmentIndex::build(r)).collect();
    let r = grid.resolution();
    let mut values = vec![0.0; grid.cell_count()];
    for j in 0..r {
        for i in 0..r {
            let z = grid.centre(i, j);
            let attained = indexes.iter().filter(|ix| ix.attains(z)).count();
            values[j * r + i] = attained as f64 / runs.len() as f64;
        }
    }
    Ok(values)
}

/// Integral of the difference between two attainment surfaces over the
/// grid box: positive when `runs_a` attains more of the objective space
/// (on average across runs) than `runs_b`. Antisymmetric in its
/// arguments.
pub fn integrated_eaf_difference(
    runs_a: &[Vec<Vec<f64>>],
    runs_b: &[Vec<Vec<f64>>],
    grid: &EafGrid,
) -> Result<f64> {
    let a = empirical_attainment(runs_a, grid)?;
    let b = empirical_attainment(runs_b, grid)?;
    let area = grid.cell_area();
    Ok(a.iter()
        .zip(b.iter())
        .map(|(&va, &vb)| (va - vb) * area)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_front() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]
    }

    #[test]
    fn reference_point_inflates_the_nadir() {
        let r = reference_point(&sample_front(), 0.1).unwrap();
        assert!((r[0] - 1.1).abs() < 1e-15);
        assert!((r[1] - 1.1).abs() < 1e-15);
        let r = reference_point(&sample_front(), 0.0).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);
        assert!(reference_point(&sample_front(), -0.5).is_err());
        assert!(reference_point(&[], 0.1).is_err());
        // Degenerate extent still yields a reference strictly outside.
        let flat = vec![vec![2.0, 3.0], vec![2.0, 4.0]];
        let r = reference_point(&flat, 0.1).unwrap();
        assert!(r[0] > 2.0);
        assert!((r[1] - 4.1).abs() < 1e-12);
    }

    #[test]
    fn hypervolume_percent_matches_a_hand_computed_example() {
        // Optimal front volume under (1.1, 1.1):
        //   (0.5)(0.1) + (0.5)(0.6) + (0.1)(1.1) = 0.46.
        // The single point (0.5, 0.5) dominates 0.6^2 = 0.36.
        let reference = [1.1, 1.1];
        let approx = vec![vec![0.5, 0.5]];
        let score = hypervolume_percent(&approx, &sample_front(), &reference).unwrap();
        assert!((score - 100.0 * 0.36 / 0.46).abs() < 1e-9);
        // Recovering the whole front scores exactly 100.
        let full = hypervolume_percent(&sample_front(), &sample_front(), &reference).unwrap();
        assert_eq!(full, 100.0);
        // A reference the optimal front cannot dominate is rejected.
        assert!(hypervolume_percent(&approx, &sample_front(), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn percent_series_is_nondecreasing_and_ends_at_the_full_score() {
        let sequence = vec![
            vec![0.9, 0.9],
            vec![0.5, 0.5],
            vec![0.7, 0.7], // dominated: adds nothing
            vec![0.1, 0.8],
            vec![0.8, 0.1],
        ];
        let reference = [1.1, 1.1];
        let series =
            hypervolume_percent_series(&sequence, &sample_front(), &reference).unwrap();
        assert_eq!(series.len(), sequence.len());
        for w in series.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert_eq!(series[1], series[2]);
        let full = hypervolume_percent(&sequence, &sample_front(), &reference).unwrap();
        assert!((series[series.len() - 1] - full).abs() < 1e-12);
    }

    #[test]
    fn attainment_fractions_on_a_two_run_example() {
        let runs = vec![
            vec![vec![0.2, 0.2]],
            vec![vec![0.7, 0.2], vec![0.2, 0.7]],
        ];
        let grid = EafGrid::new([0.0, 0.0], [1.0, 1.0], 2).unwrap();
        let values = empirical_attainment(&runs, &grid).unwrap();
        // Centres: (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75).
        // Only the first run reaches the lower-left cell; everything else
        // is attained by both.
        assert_eq!(values, vec![0.5, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn attainment_ignores_point_order_and_dominated_extras() {
        let tidy = vec![vec![vec![0.3, 0.1], vec![0.1, 0.3]]];
        let messy = vec![vec![
            vec![0.9, 0.9], // dominated
            vec![0.1, 0.3],
            vec![0.3, 0.1],
            vec![0.5, 0.5], // dominated
        ]];
        let grid = EafGrid::new([0.0, 0.0], [1.0, 1.0], 16).unwrap();
        assert_eq!(
            empirical_attainment(&tidy, &grid).unwrap(),
            empirical_attainment(&messy, &grid).unwrap()
        );
    }

    #[test]
    fn integrated_difference_is_signed_and_antisymmetric() {
        let stronger = vec![vec![vec![0.2, 0.2]]];
        let weaker = vec![vec![vec![0.7, 0.7]]];
        let grid = EafGrid::new([0.0, 0.0], [1.0, 1.0], 4).unwrap();
        // The stronger run attains 9 of 16 cells, the weaker 1 of 16;
        // each cell has area 1/16.
        let diff = integrated_eaf_difference(&stronger, &weaker, &grid).unwrap();
        assert!((diff - 0.5).abs() < 1e-15);
        let flipped = integrated_eaf_difference(&weaker, &stronger, &grid).unwrap();
        assert_eq!(diff, -flipped);
        assert_eq!(
            integrated_eaf_difference(&stronger, &stronger, &grid).unwrap(),
            0.0
        );
    }

    #[test]
    fn covering_grid_spans_every_input_point() {
        let a = vec![vec![0.1, 2.0], vec![0.4, 1.0]];
        let b = vec![vec![-0.5, 3.0]];
        let grid = EafGrid::covering(&[&a, &b], 8).unwrap();
        for p in a.iter().chain(b.iter()) {
            assert!(grid.lower()[0] <= p[0] && p[0] < grid.upper()[0]);
            assert!(grid.lower()[1] <= p[1] && p[1] < grid.upper()[1]);
        }
        assert_eq!(grid.lower(), [-0.5, 1.0]);
        assert_eq!(grid.resolution(), 8);
        assert!(grid.cell_area() > 0.0);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(EafGrid::new([0.0, 0.0], [1.0, 1.0], 0).is_err());
        assert!(EafGrid::new([0.0, 0.0], [0.0, 1.0], 4).is_err());
        assert!(EafGrid::new([0.0, f64::NAN], [1.0, 1.0], 4).is_err());
        let grid = EafGrid::new([0.0, 0.0], [1.0, 1.0], 4).unwrap();
        assert!(empirical_attainment(&[], &grid).is_err());
        let bad_dim = vec![vec![vec![0.1, 0.2, 0.3]]];
        assert!(empirical_attainment(&bad_dim, &grid).is_err());
        assert!(EafGrid::covering(&[], 4).is_err());
    }
}
