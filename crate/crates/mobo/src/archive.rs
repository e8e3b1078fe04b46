//! Evaluation archive, Pareto dominance and non-dominated sorting.
//!
//! All objectives are minimised. Dominance uses exact floating-point
//! comparisons: `a` dominates `b` when `a[i] <= b[i]` in every component and
//! `a[j] < b[j]` in at least one. Duplicate *objective* vectors are allowed
//! (neither dominates the other); duplicate *decision* vectors are rejected
//! at insertion because they would make a surrogate's kernel matrix
//! singular.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Origin of an archive entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Part of the space-filling initial design.
    InitialDesign,
    /// Proposed by an acquisition step.
    Acquired,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::InitialDesign => "initial-design",
            Phase::Acquired => "acquired",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "initial-design" => Ok(Phase::InitialDesign),
            "acquired" => Ok(Phase::Acquired),
            other => Err(Error::Parse(format!("unknown phase tag {other:?}"))),
        }
    }
}

/// One evaluated point: decision vector, objective vector, origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub phase: Phase,
}

/// Ordered record of every evaluation performed during a run.
#[derive(Debug, Clone)]
pub struct Archive {
    d: usize,
    m: usize,
    entries: Vec<Entry>,
}

impl Archive {
    /// Creates an empty archive for `d` decision variables and `m`
    /// objectives.
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::invalid("archive needs d >= 1 and m >= 1"));
        }
        Ok(Archive {
            d,
            m,
            entries: Vec::new(),
        })
    }

    pub fn decision_dim(&self) -> usize {
        self.d
    }

    pub fn objective_dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Appends an evaluation. Rejects wrong dimensions, non-finite values
    /// and exact duplicates of an existing decision vector.
    pub fn push(&mut self, x: Vec<f64>, y: Vec<f64>, phase: Phase) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if y.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("decision vector has non-finite component"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective vector has non-finite component"));
        }
        if let Some(i) = self.entries.iter().position(|e| e.x == x) {
            return Err(Error::DuplicatePoint(i, self.entries.len()));
        }
        self.entries.push(Entry { x, y, phase });
        Ok(())
    }

    /// Index of the first entry whose decision vector lies within
    /// `tol[j]` of `x` in every coordinate.
    pub fn find_within(&self, x: &[f64], tol: &[f64]) -> Option<usize> {
        self.entries.iter().position(|e| {
            e.x.iter()
                .zip(x)
                .zip(tol)
                .all(|((a, b), t)| (a - b).abs() <= *t)
        })
    }

    /// Objective vectors of every entry, in insertion order.
    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.y.clone()).collect()
    }

    /// Componentwise (min, max) over all observed objective vectors.
    pub fn objective_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.entries.first()?;
        let mut lo = first.y.clone();
        let mut hi = first.y.clone();
        for e in &self.entries[1..] {
            for j in 0..self.m {
                lo[j] = lo[j].min(e.y[j]);
                hi[j] = hi[j].max(e.y[j]);
            }
        }
        Some((lo, hi))
    }

    /// Indices of entries whose objective vectors are non-dominated within
    /// the archive.
    pub fn nondominated(&self) -> Result<Vec<usize>> {
        let objs = self.objectives();
        nondominated_set(&objs)
    }

    /// Serialises the archive as CSV with header
    /// `x0,..,x{d-1},f0,..,f{m-1},phase`. Floats use Rust's shortest
    /// round-trip formatting, so parsing the output reproduces the archive
    /// byte-for-byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.d {
            let _ = write!(out, "x{j},");
        }
        for j in 0..self.m {
            let _ = write!(out, "f{j},");
        }
        out.push_str("phase\n");
        for e in &self.entries {
            for v in &e.x {
                let _ = write!(out, "{v},");
            }
            for v in &e.y {
                let _ = write!(out, "{v},");
            }
            out.push_str(e.phase.as_str());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses CSV produced by [`Archive::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or(Error::EmptyInput("archive csv has no header"))?;
        let cols: Vec<&str> = header.split(',').collect();
        let d = cols.iter().take_while(|c| c.starts_with('x')).count();
        let m = cols[d..].iter().take_while(|c| c.starts_with('f')).count();
        if d == 0 || m == 0 || cols.len() != d + m + 1 || cols[d + m] != "phase" {
            return Err(Error::Parse(format!("bad archive header {header:?}")));
        }
        let mut archive = Archive::new(d, m)?;
        for (row, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + m + 1 {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields, got {}",
                    row + 1,
                    d + m + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad float {s:?}", row + 1)))
            };
            let x = fields[..d].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            let y = fields[d..d + m]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<_>>()?;
            archive.push(x, y, Phase::parse(fields[d + m])?)?;
        }
        Ok(archive)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Archive::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Pareto dominance under minimisation, with exact comparisons.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("dominance over zero objectives"));
    }
    let mut strictly_better = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > bi {
            return Ok(false);
        }
        if ai < bi {
            strictly_better = true;
        }
    }
    Ok(strictly_better)
}

fn check_uniform(objs: &[Vec<f64>]) -> Result<usize> {
    let first = objs.first().ok_or(Error::EmptyInput("no objective vectors"))?;
    let m = first.len();
    for o in objs {
        if o.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: o.len(),
            });
        }
    }
    if m == 0 {
        return Err(Error::EmptyInput("zero-length objective vectors"));
    }
    Ok(m)
}

/// Indices of the non-dominated members of `objs`.
pub fn nondominated_set(objs: &[Vec<f64>]) -> Result<Vec<usize>> {
    check_uniform(objs)?;
    let mut keep = Vec::new();
    'outer: for i in 0..objs.len() {
        for j in 0..objs.len() {
            if i != j && dominates(&objs[j], &objs[i])? {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    Ok(keep)
}

/// Partition of `objs` into Pareto shells: shell 0 is the non-dominated
/// set, shell `k` is non-dominated once shells `0..k` are removed. Every
/// index appears in exactly one shell.
pub fn pareto_shells(objs: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    check_uniform(objs)?;
    let n = objs.len();
    // Fast non-dominated sort: count dominators and record dominated lists.
    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objs[i], &objs[j])? {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&objs[j], &objs[i])? {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut shells = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        shells.push(std::mem::take(&mut current));
        current = next;
    }
    Ok(shells)
}
