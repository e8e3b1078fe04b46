//! Exact hypervolume indicators (minimisation convention).
//!
//! The hypervolume of a point set `A` w.r.t. a reference point `r` is the
//! Lebesgue measure of the region dominated by `A` and bounded above by
//! `r`. Only points strictly below the reference in *every* component
//! enclose any volume; all others are ignored.
//!
//! Two exact routes are provided and cross-checked in tests: a 2-D
//! sort-and-sweep ([`hv_sweep_2d`]) and a general-M recursive
//! exclusive-volume scheme ([`hv_recursive`]). [`hypervolume`] dispatches
//! to the sweep for two objectives and to the recursion otherwise.

use crate::error::{Error, Result};

fn validate(points: &[Vec<f64>], reference: &[f64]) -> Result<usize> {
    let m = reference.len();
    if m == 0 {
        return Err(Error::EmptyInput("empty reference point"));
    }
    if reference.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("reference point must be finite"));
    }
    for p in points {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective vectors must be finite"));
        }
    }
    Ok(m)
}

fn strictly_dominates_ref(p: &[f64], reference: &[f64]) -> bool {
    p.iter().zip(reference).all(|(a, r)| a < r)
}

/// Exact 2-D hypervolume by sort-and-sweep.
pub fn hv_sweep_2d(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = validate(points, reference)?;
    if m != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: m });
    }
    let stairs = staircase(points, (reference[0], reference[1]));
    Ok(staircase_hv(&stairs, (reference[0], reference[1])))
}

/// Filters to points strictly inside the reference box and reduces them to
/// the non-dominated staircase: ascending `f0`, strictly descending `f1`.
fn staircase(points: &[Vec<f64>], reference: (f64, f64)) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p[0] < reference.0 && p[1] < reference.1)
        .map(|p| (p[0], p[1]))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut stairs: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        if stairs.last().map_or(true, |last| p.1 < last.1) {
            stairs.push(p);
        }
    }
    stairs
}

fn staircase_hv(stairs: &[(f64, f64)], reference: (f64, f64)) -> f64 {
    let mut hv = 0.0;
    for (i, p) in stairs.iter().enumerate() {
        let next_f0 = stairs.get(i + 1).map_or(reference.0, |q| q.0);
        hv += (next_f0 - p.0) * (reference.1 - p.1);
    }
    hv
}

/// Exact hypervolume for any number of objectives via recursive exclusive
/// volumes: `HV(S) = sum_i [inclusive(p_i) - HV(nds(limit(p_i, S_after_i)))]`,
/// where `limit` raises every later point to its componentwise max with
/// `p_i`.
pub fn hv_recursive(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    validate(points, reference)?;
    let mut inside: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| strictly_dominates_ref(p, reference))
        .cloned()
        .collect();
    inside.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(wfg(&inside, reference))
}

fn inclusive_hv(p: &[f64], reference: &[f64]) -> f64 {
    p.iter().zip(reference).map(|(a, r)| r - a).product()
}

/// Keeps only non-dominated points (minimisation); duplicates collapse to
/// one representative, which leaves unions of dominated boxes unchanged.
fn prune_dominated(points: &mut Vec<Vec<f64>>) {
    let mut keep: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    'outer: for p in points.drain(..) {
        let mut i = 0;
        while i < keep.len() {
            let q = &keep[i];
            let q_le_p = q.iter().zip(&p).all(|(a, b)| a <= b);
            if q_le_p {
                continue 'outer; // q dominates or equals p
            }
            let p_le_q = p.iter().zip(q).all(|(a, b)| a <= b);
            if p_le_q {
                keep.swap_remove(i);
            } else {
                i += 1;
            }
        }
        keep.push(p);
    }
    *points = keep;
}

fn wfg(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    match points.len() {
        0 => 0.0,
        1 => inclusive_hv(&points[0], reference),
        _ => {
            let mut total = 0.0;
            for (i, p) in points.iter().enumerate() {
                let mut limited: Vec<Vec<f64>> = points[i + 1..]
                    .iter()
                    .map(|q| {
                        p.iter()
                            .zip(q)
                            .map(|(a, b)| a.max(*b))
                            .collect::<Vec<f64>>()
                    })
                    .filter(|l| strictly_dominates_ref(l, reference))
                    .collect();
                prune_dominated(&mut limited);
                limited.sort_by(|a, b| a.partial_cmp(b).unwrap());
                total += inclusive_hv(p, reference) - wfg(&limited, reference);
            }
            total
        }
    }
}

/// Hypervolume of `points` w.r.t. `reference`. Empty sets (and sets with
/// no point strictly inside the reference box) have volume zero.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = validate(points, reference)?;
    if m == 2 {
        hv_sweep_2d(points, reference)
    } else {
        hv_recursive(points, reference)
    }
}

/// Exclusive hypervolume improvement of a member `x` of `objs`:
/// `HV(objs) - HV(objs without one instance of x)`. Errors if `x` is not in
/// the set.
pub fn hvi_plus(objs: &[Vec<f64>], x: &[f64], reference: &[f64]) -> Result<f64> {
    let pos = objs
        .iter()
        .position(|p| p.as_slice() == x)
        .ok_or_else(|| Error::invalid("hvi_plus: point is not a member of the set"))?;
    let full = hypervolume(objs, reference)?;
    let mut rest = objs.to_vec();
    rest.remove(pos);
    let without = hypervolume(&rest, reference)?;
    Ok(full - without)
}

/// Hypervolume of `front` using `x` itself as the reference point: the
/// volume of the region between `x` and the members of `front` that
/// strictly dominate it. Zero exactly when no member is strictly below `x`
/// in every component — in particular whenever `x` is non-dominated
/// w.r.t. `front`.
pub fn hvi_minus(front: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    hypervolume(front, x)
}

/// Non-dominated staircase of 2-D points strictly inside a reference box,
/// supporting O(log n + walk) exclusive-contribution queries. This is the
/// inner loop of Monte-Carlo expected hypervolume improvement.
#[derive(Debug, Clone)]
pub struct Staircase2d {
    stairs: Vec<(f64, f64)>,
    reference: (f64, f64),
}

impl Staircase2d {
    pub fn new(points: &[Vec<f64>], reference: &[f64]) -> Result<Self> {
        let m = validate(points, reference)?;
        if m != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: m });
        }
        let reference = (reference[0], reference[1]);
        Ok(Staircase2d {
            stairs: staircase(points, reference),
            reference,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.stairs.is_empty()
    }

    /// Hypervolume of the staircase itself.
    pub fn hypervolume(&self) -> f64 {
        staircase_hv(&self.stairs, self.reference)
    }

    /// `HV(S ∪ {p}) - HV(S)` without rebuilding the staircase: zero if `p`
    /// lies outside the reference box or is weakly dominated, otherwise the
    /// area of the exclusive region swept between `p` and the stairs.
    pub fn added_contribution(&self, p: (f64, f64)) -> f64 {
        let (r0, r1) = self.reference;
        if !(p.0 < r0 && p.1 < r1) {
            return 0.0;
        }
        // First stair strictly right of p in f0.
        let i = self.stairs.partition_point(|s| s.0 <= p.0);
        // Lowest f1 among stairs at or left of p.0 caps the region.
        let ceiling = if i == 0 { r1 } else { self.stairs[i - 1].1 };
        if ceiling <= p.1 {
            return 0.0; // weakly dominated by a stair to the left
        }
        let mut acc = 0.0;
        let mut x = p.0;
        let mut ceiling = ceiling;
        for s in &self.stairs[i..] {
            if s.1 <= p.1 {
                // This stair closes the exclusive region.
                return acc + (s.0 - x) * (ceiling - p.1);
            }
            acc += (s.0 - x) * (ceiling - p.1);
            x = s.0;
            ceiling = s.1;
        }
        acc + (r0 - x) * (ceiling - p.1)
    }
}
