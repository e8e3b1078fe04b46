//! Parametric aerofoil geometry with a spar-cap stiffness objective.
//!
//! A section of unit chord is described by four cubic Bézier segments:
//! leading edge `A = (0,0)` up to the upper crest `B`, `B` down to the
//! trailing edge `C = (1,0)`, `C` to the lower crest `D`, and `D` back to
//! `A`. Thirteen decision variables place the crests and the interior
//! control points (see [`variable_names`] / [`bounds`]); tangency is built
//! in: the curves leave the leading edge vertically and cross both crests
//! horizontally.
//!
//! The lower-crest depth is *not* a free variable: it is solved by
//! bisection so that the maximum vertical thickness equals exactly
//! [`THICKNESS`] — every feasible decision vector therefore produces a
//! section of identical thickness and the optimiser cannot cheat the
//! structural objective by inflating the section.
//!
//! The structural objective is the bending stiffness of a spar cap: the
//! material between the upper and lower surfaces scaled by
//! [`CAP_SCALE`] towards the chord line, over a band of width
//! [`CAP_WIDTH`] centred under the upper crest. An aerodynamic objective
//! is delegated to an external program that reads a surface-coordinate
//! file and prints a number.

use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Chord length.
pub const CHORD: f64 = 1.0;
/// Enforced maximum section thickness.
pub const THICKNESS: f64 = 0.18;
/// Width of the spar-cap band (fraction of chord).
pub const CAP_WIDTH: f64 = 0.25;
/// Vertical scaling applied to both surfaces to obtain the cap faces.
pub const CAP_SCALE: f64 = 0.9;
/// Elastic modulus used in the stiffness integral.
pub const ELASTIC_MODULUS: f64 = 1.0e9;
/// Number of decision variables.
pub const DECISION_DIM: usize = 13;

const SAMPLES_PER_SEGMENT: usize = 256; // polyline resolution per Bézier
const CAP_SAMPLES: usize = 1025; // odd, for composite Simpson

/// Decision-variable names, in decision-vector order.
pub fn variable_names() -> [&'static str; DECISION_DIM] {
    [
        "j1", "j_b", "i_b", "i2", "i3", "i4", "j4", "i5", "j5", "i_d", "i6", "i7", "j8",
    ]
}

/// Box bounds of the thirteen decision variables.
pub fn bounds() -> [(f64, f64); DECISION_DIM] {
    [
        (0.2, 0.9),   // j1: LE control height, fraction of upper crest height
        (0.50, 0.95), // j_b: upper crest height, fraction of THICKNESS
        (0.15, 0.70), // i_b: upper crest chord position
        (0.1, 0.9),   // i2: crest approach control, fraction back from i_b
        (0.2, 0.8),   // i3: crest departure control, fraction of (1 - i_b)
        (0.05, 0.75), // i4: TE-side upper control, fraction back from TE
        (0.05, 0.95), // j4: TE-side upper control height, fraction of crest
        (0.05, 0.75), // i5: TE-side lower control placement fraction
        (0.05, 0.50), // j5: TE-side lower control dip factor
        (0.15, 0.70), // i_d: lower crest chord position
        (0.2, 0.8),   // i6: lower crest approach, fraction of (1 - i_d)
        (0.1, 0.9),   // i7: lower crest departure, fraction of i_d
        (0.2, 0.9),   // j8: LE lower control depth, fraction of crest depth
    ]
}

/// Named view of a validated decision vector.
#[derive(Debug, Clone, Copy)]
struct Decision {
    j1: f64,
    j_b: f64,
    i_b: f64,
    i2: f64,
    i3: f64,
    i4: f64,
    j4: f64,
    i5: f64,
    j5: f64,
    i_d: f64,
    i6: f64,
    i7: f64,
    j8: f64,
}

fn parse_decision(x: &[f64]) -> Result<Decision> {
    if x.len() != DECISION_DIM {
        return Err(Error::DimensionMismatch {
            expected: DECISION_DIM,
            got: x.len(),
        });
    }
    for (dim, (&v, &(lo, hi))) in x.iter().zip(bounds().iter()).enumerate() {
        if !v.is_finite() || v < lo - 1e-12 || v > hi + 1e-12 {
            return Err(Error::OutOfBounds { dim, value: v, lo, hi });
        }
    }
    Ok(Decision {
        j1: x[0],
        j_b: x[1],
        i_b: x[2],
        i2: x[3],
        i3: x[4],
        i4: x[5],
        j4: x[6],
        i5: x[7],
        j5: x[8],
        i_d: x[9],
        i6: x[10],
        i7: x[11],
        j8: x[12],
    })
}

fn cubic_bezier(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64), p3: (f64, f64), u: f64) -> (f64, f64) {
    let v = 1.0 - u;
    let b0 = v * v * v;
    let b1 = 3.0 * v * v * u;
    let b2 = 3.0 * v * u * u;
    let b3 = u * u * u;
    (
        b0 * p0.0 + b1 * p1.0 + b2 * p2.0 + b3 * p3.0,
        b0 * p0.1 + b1 * p1.1 + b2 * p2.1 + b3 * p3.1,
    )
}

/// Samples two joined cubic segments as one polyline (shared knot emitted
/// once).
fn sample_two_segments(
    a: (f64, f64),
    c1: (f64, f64),
    c2: (f64, f64),
    knot: (f64, f64),
    c3: (f64, f64),
    c4: (f64, f64),
    b: (f64, f64),
) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(2 * SAMPLES_PER_SEGMENT + 1);
    for k in 0..=SAMPLES_PER_SEGMENT {
        let u = k as f64 / SAMPLES_PER_SEGMENT as f64;
        pts.push(cubic_bezier(a, c1, c2, knot, u));
    }
    for k in 1..=SAMPLES_PER_SEGMENT {
        let u = k as f64 / SAMPLES_PER_SEGMENT as f64;
        pts.push(cubic_bezier(knot, c3, c4, b, u));
    }
    pts
}

/// Aerofoil surfaces as ordered polylines, leading edge to trailing edge,
/// chordwise coordinate ascending.
#[derive(Debug, Clone)]
pub struct AerofoilShape {
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
    /// Upper crest `B`.
    pub crest_upper: (f64, f64),
    /// Lower crest `D`, with the solved depth.
    pub crest_lower: (f64, f64),
}

/// Linear interpolation of an `i`-ascending polyline at chord position `i`.
fn interp(poly: &[(f64, f64)], i: f64) -> f64 {
    let k = poly.partition_point(|p| p.0 < i);
    if k == 0 {
        return poly[0].1;
    }
    if k >= poly.len() {
        return poly[poly.len() - 1].1;
    }
    let (x0, y0) = poly[k - 1];
    let (x1, y1) = poly[k];
    if x1 <= x0 {
        return y0;
    }
    y0 + (y1 - y0) * (i - x0) / (x1 - x0)
}

/// Maximum vertical gap between the two polylines, evaluated at the union
/// of their chordwise nodes (exact for piecewise-linear surfaces).
fn max_gap(upper: &[(f64, f64)], lower: &[(f64, f64)]) -> f64 {
    let mut gap = f64::NEG_INFINITY;
    for p in upper {
        gap = gap.max(p.1 - interp(lower, p.0));
    }
    for p in lower {
        gap = gap.max(interp(upper, p.0) - p.1);
    }
    gap
}

/// Maximum vertical thickness of the sampled section.
pub fn max_thickness(shape: &AerofoilShape) -> f64 {
    max_gap(&shape.upper, &shape.lower)
}

struct LowerControls {
    // Chordwise coordinates are independent of the crest depth.
    c5_i: f64,
    c6_i: f64,
    c7_i: f64,
    c8_i: f64,
    d_i: f64,
    // Vertical coordinates as affine functions of the crest depth j_d.
    j5: f64,
    j4_abs: f64,
    j8: f64,
}

impl LowerControls {
    /// Lower surface polyline (trailing edge -> crest -> leading edge) for
    /// a candidate crest depth.
    fn sample(&self, j_d: f64) -> Vec<(f64, f64)> {
        let c = (1.0, 0.0);
        let c5 = (self.c5_i, -self.j5 * (self.j4_abs - j_d));
        let c6 = (self.c6_i, j_d);
        let d = (self.d_i, j_d);
        let c7 = (self.c7_i, j_d);
        let c8 = (self.c8_i, self.j8 * j_d);
        let a = (0.0, 0.0);
        sample_two_segments(c, c5, c6, d, c7, c8, a)
    }
}

/// Builds the sampled section for a decision vector, solving the
/// lower-crest depth so the maximum thickness equals [`THICKNESS`].
///
/// Fails with [`Error::InfeasibleGeometry`] when the control polygon folds
/// back on itself chordwise, when the upper surface alone already exceeds
/// the thickness budget, or when no negative crest depth attains it.
pub fn build_shape(x: &[f64]) -> Result<AerofoilShape> {
    let d = parse_decision(x)?;

    // Upper surface: A -> B -> C with horizontal crest tangents and a
    // vertical leading-edge tangent.
    let jb_abs = d.j_b * THICKNESS;
    let ib_abs = d.i_b * CHORD;
    let a = (0.0, 0.0);
    let b = (ib_abs, jb_abs);
    let c = (1.0, 0.0);
    let c1 = (0.0, d.j1 * jb_abs);
    let c2 = (ib_abs * (1.0 - d.i2), jb_abs);
    let c3_i = ib_abs + d.i3 * (1.0 - ib_abs);
    let c3 = (c3_i, jb_abs);
    let c4_i = 1.0 - d.i4 * (1.0 - c3_i);
    let c4 = (c4_i, d.j4 * jb_abs);
    let upper = sample_two_segments(a, c1, c2, b, c3, c4, c);
    for w in upper.windows(2) {
        if w[1].0 < w[0].0 - 1e-12 {
            return Err(Error::InfeasibleGeometry(
                "upper surface folds back chordwise".into(),
            ));
        }
    }

    // Lower surface control skeleton; chordwise placement is fixed, only
    // depths depend on the crest depth being solved.
    let id_abs = d.i_d * CHORD;
    let c6_i = id_abs + d.i6 * (1.0 - id_abs);
    let c5_i = 1.0 - d.i5 * (c4_i - c6_i);
    let c7_i = id_abs * (1.0 - d.i7);
    let controls = LowerControls {
        c5_i,
        c6_i,
        c7_i,
        c8_i: 0.0,
        d_i: id_abs,
        j5: d.j5,
        j4_abs: d.j4 * jb_abs,
        j8: d.j8,
    };
    {
        let probe = controls.sample(-0.1);
        for w in probe.windows(2) {
            if w[1].0 > w[0].0 + 1e-12 {
                return Err(Error::InfeasibleGeometry(
                    "lower surface folds back chordwise".into(),
                ));
            }
        }
    }

    // The gap grows monotonically as the crest deepens (every lower control
    // depth is affine in j_d with non-negative coefficient), so bisection
    // on j_d is exact. A section whose upper surface alone reaches the
    // budget cannot be thinned by any negative crest depth. Interpolation
    // needs ascending chordwise order, hence the reverse.
    let gap_at = |j_d: f64| {
        let mut low = controls.sample(j_d);
        low.reverse();
        max_gap(&upper, &low)
    };
    if gap_at(0.0) >= THICKNESS {
        return Err(Error::InfeasibleGeometry(
            "thickness budget exhausted by the upper surface alone".into(),
        ));
    }
    let mut lo = -0.3;
    while gap_at(lo) < THICKNESS {
        lo *= 2.0;
        if lo < -2.0 {
            return Err(Error::InfeasibleGeometry(
                "no crest depth attains the thickness budget".into(),
            ));
        }
    }
    let mut hi = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap_at(mid) < THICKNESS {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let j_d = 0.5 * (lo + hi);
    if !(j_d < 0.0) {
        return Err(Error::InfeasibleGeometry(
            "solved crest depth is not below the chord line".into(),
        ));
    }

    let mut lower = controls.sample(j_d);
    lower.reverse(); // leading edge -> trailing edge, ascending
    Ok(AerofoilShape {
        upper,
        lower,
        crest_upper: b,
        crest_lower: (id_abs, j_d),
    })
}

/// One chordwise station of the spar cap: scaled upper and lower faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSample {
    pub i: f64,
    pub top: f64,
    pub bottom: f64,
}

/// Spar cap: uniformly sampled scaled surfaces over the cap band.
#[derive(Debug, Clone)]
pub struct SparCap {
    pub samples: Vec<CapSample>,
}

/// Samples the spar cap of `shape` at `n` (odd, >= 3) uniform stations
/// across a band of width [`CAP_WIDTH`] centred under the upper crest.
pub fn spar_cap_with_samples(shape: &AerofoilShape, n: usize) -> Result<SparCap> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::invalid("cap sampling needs an odd count >= 3"));
    }
    let centre = shape.crest_upper.0;
    let i0 = (centre - CAP_WIDTH / 2.0).max(0.0);
    let i1 = (centre + CAP_WIDTH / 2.0).min(CHORD);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let i = i0 + (i1 - i0) * k as f64 / (n - 1) as f64;
        samples.push(CapSample {
            i,
            top: CAP_SCALE * interp(&shape.upper, i),
            bottom: CAP_SCALE * interp(&shape.lower, i),
        });
    }
    Ok(SparCap { samples })
}

/// Spar cap at the default sampling resolution.
pub fn spar_cap(shape: &AerofoilShape) -> Result<SparCap> {
    spar_cap_with_samples(shape, CAP_SAMPLES)
}

/// Bending stiffness of a sampled cap about the chord line:
/// `E * integral of (top^3 - bottom^3)/3 di` by composite Simpson over the
/// uniform stations. A degenerate cap (coincident faces) returns zero.
pub fn cap_stiffness(cap: &SparCap) -> f64 {
    let n = cap.samples.len();
    if n < 3 || n % 2 == 0 {
        return 0.0;
    }
    let h = (cap.samples[n - 1].i - cap.samples[0].i) / (n - 1) as f64;
    if h <= 0.0 {
        return 0.0;
    }
    let second_moment =
        |s: &CapSample| (s.top * s.top * s.top - s.bottom * s.bottom * s.bottom) / 3.0;
    let mut integral = second_moment(&cap.samples[0]) + second_moment(&cap.samples[n - 1]);
    for (k, s) in cap.samples[1..n - 1].iter().enumerate() {
        integral += if k % 2 == 0 { 4.0 } else { 2.0 } * second_moment(s);
    }
    ELASTIC_MODULUS * integral * h / 3.0
}

/// Spar-cap bending stiffness of a built shape.
pub fn stiffness(shape: &AerofoilShape) -> Result<f64> {
    Ok(cap_stiffness(&spar_cap(shape)?))
}

/// Surface-coordinate text: upper surface from trailing edge to leading
/// edge, then the lower surface from just past the leading edge to the
/// trailing edge; one `i j` pair per line.
pub fn shape_coordinates_text(shape: &AerofoilShape) -> String {
    let mut out = String::new();
    for p in shape.upper.iter().rev() {
        out.push_str(&format!("{} {}\n", p.0, p.1));
    }
    for p in shape.lower.iter().skip(1) {
        out.push_str(&format!("{} {}\n", p.0, p.1));
    }
    out
}

pub fn write_shape_file(shape: &AerofoilShape, path: &Path) -> Result<()> {
    std::fs::write(path, shape_coordinates_text(shape))?;
    Ok(())
}

static SHAPE_FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// External aerodynamic evaluator: a command that receives a surface
/// coordinate file and prints the objective value as the last line of its
/// standard output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEvaluator {
    /// Program and arguments. Any `{shape}` placeholder is replaced by the
    /// coordinate-file path; without a placeholder the path is appended as
    /// a final argument.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl ExternalEvaluator {
    pub fn new(command: Vec<String>, timeout: Duration) -> Result<Self> {
        if command.is_empty() || command[0].is_empty() {
            return Err(Error::invalid("evaluator command must not be empty"));
        }
        Ok(ExternalEvaluator { command, timeout })
    }

    /// Parses a whitespace-separated command string (e.g. from the
    /// `MOBO_AEROFOIL_EVALUATOR` environment variable).
    pub fn from_command_string(s: &str, timeout: Duration) -> Result<Self> {
        let command: Vec<String> = s.split_whitespace().map(str::to_string).collect();
        ExternalEvaluator::new(command, timeout)
    }

    /// Runs the evaluator on `shape` and parses the objective value from
    /// the last non-empty stdout line. Non-zero exit, timeout, or
    /// unparseable/non-finite output all fail the evaluation.
    pub fn evaluate(&self, shape: &AerofoilShape) -> Result<f64> {
        let file = std::env::temp_dir().join(format!(
            "mobo-aerofoil-{}-{}.dat",
            std::process::id(),
            SHAPE_FILE_COUNTER.fetch_add(1, Ordering::SeqCst)
        ));
        write_shape_file(shape, &file)?;
        let result = self.run_on_file(&file);
        let _ = std::fs::remove_file(&file);
        result
    }

    fn run_on_file(&self, file: &Path) -> Result<f64> {
        let path_str = file.to_string_lossy();
        let mut argv: Vec<String> = self.command.clone();
        let mut substituted = false;
        for arg in argv.iter_mut() {
            if arg.contains("{shape}") {
                *arg = arg.replace("{shape}", &path_str);
                substituted = true;
            }
        }
        if !substituted {
            argv.push(path_str.into_owned());
        }
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::EvaluationFailure(format!("failed to spawn {}: {e}", argv[0])))?;
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(Error::EvaluationFailure(format!(
                            "evaluator timed out after {:?}",
                            self.timeout
                        )));
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => {
                    return Err(Error::EvaluationFailure(format!(
                        "failed to poll evaluator: {e}"
                    )))
                }
            }
        };
        let mut stdout = String::new();
        if let Some(mut out) = child.stdout.take() {
            use std::io::Read;
            let _ = out.read_to_string(&mut stdout);
        }
        if !status.success() {
            return Err(Error::EvaluationFailure(format!(
                "evaluator exited with {status}"
            )));
        }
        let last = stdout
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::EvaluationFailure("evaluator printed no output".into()))?;
        let value: f64 = last.trim().parse().map_err(|_| {
            Error::EvaluationFailure(format!("evaluator output {last:?} is not a number"))
        })?;
        if !value.is_finite() {
            return Err(Error::EvaluationFailure(format!(
                "evaluator returned non-finite value {value}"
            )));
        }
        Ok(value)
    }
}

/// Evaluates the aerofoil objective pair for a native decision vector:
/// the external aerodynamic objective and the negated spar-cap stiffness
/// (both minimised).
pub fn evaluate_objectives(x: &[f64], evaluator: Option<&ExternalEvaluator>) -> Result<Vec<f64>> {
    let shape = build_shape(x)?;
    let stiff = stiffness(&shape)?;
    let evaluator = evaluator.ok_or_else(|| {
        Error::EvaluationFailure(
            "no aerodynamic evaluator configured (set one in the run config or via \
             MOBO_AEROFOIL_EVALUATOR)"
                .into(),
        )
    })?;
    let aero = evaluator.evaluate(&shape)?;
    Ok(vec![aero, -stiff])
}

/// Mid-bounds decision vector, a convenient feasible reference shape.
pub fn mid_bounds_decision() -> Vec<f64> {
    bounds().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::design::stream_rng;

    #[test]
    fn mid_bounds_shape_is_feasible_with_exact_thickness() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let t = max_thickness(&shape);
        assert!(
            (t - THICKNESS).abs() <= 1e-9,
            "thickness {t} differs from {THICKNESS}"
        );
        assert!(shape.crest_lower.1 < 0.0);
        // Upper crest height is exactly j_b * THICKNESS: the crest point is
        // an on-curve knot, the curve never exceeds its control depths.
        let peak = shape.upper.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let expected = 0.5 * (0.50 + 0.95) * THICKNESS;
        assert!((peak - expected).abs() < 1e-12);
    }

    #[test]
    fn thickness_is_enforced_across_random_feasible_decisions() {
        let b = bounds();
        let mut rng = stream_rng(4242, &[1]);
        let mut feasible = 0;
        for _ in 0..40 {
            let x: Vec<f64> = b
                .iter()
                .map(|(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
                .collect();
            match build_shape(&x) {
                Ok(shape) => {
                    feasible += 1;
                    let t = max_thickness(&shape);
                    assert!(
                        (t - THICKNESS).abs() <= 1e-9,
                        "thickness {t} (crest depth {}) for {x:?}",
                        shape.crest_lower.1
                    );
                    assert!(shape.crest_lower.1 < 0.0);
                }
                Err(Error::InfeasibleGeometry(_)) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(feasible >= 20, "only {feasible}/40 random shapes feasible");
    }

    #[test]
    fn surfaces_are_chordwise_monotone() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        for w in shape.upper.windows(2) {
            assert!(w[1].0 >= w[0].0 - 1e-12);
        }
        for w in shape.lower.windows(2) {
            assert!(w[1].0 >= w[0].0 - 1e-12);
        }
        // Upper stays above, lower below the chord line.
        assert!(shape.upper.iter().all(|p| p.1 >= -1e-12));
        assert!(shape.lower.iter().all(|p| p.1 <= 1e-12));
    }

    #[test]
    fn folded_lower_skeleton_is_rejected() {
        // Small i_b with aggressive TE controls pushes the first lower
        // control beyond the trailing edge: i_d = 0.15 and i6 = 0.8 place
        // c6 at 0.83 while c4 sits at 0.49, so c5 = 1 + 0.34 * i5 > 1.
        let x = vec![
            0.55, 0.7, 0.15, 0.5, 0.2, 0.75, 0.5, 0.4, 0.3, 0.15, 0.8, 0.5, 0.55,
        ];
        match build_shape(&x) {
            Err(Error::InfeasibleGeometry(msg)) => {
                assert!(msg.contains("lower"), "{msg}");
            }
            other => panic!("expected infeasible geometry, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_decisions_are_rejected() {
        let mut x = mid_bounds_decision();
        x[1] = 0.96; // j_b above its bound
        assert!(matches!(build_shape(&x), Err(Error::OutOfBounds { .. })));
        assert!(matches!(
            build_shape(&x[..12]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rectangular_cap_matches_the_closed_form() {
        // Constant faces over a band of width w: E * w * (top^3 - bot^3)/3.
        let (top, bottom, w) = (0.08, -0.05, 0.25);
        let n = 101;
        let samples: Vec<CapSample> = (0..n)
            .map(|k| CapSample {
                i: 0.3 + w * k as f64 / (n - 1) as f64,
                top,
                bottom,
            })
            .collect();
        let numeric = cap_stiffness(&SparCap { samples });
        let exact = ELASTIC_MODULUS * w * (cube(top) - cube(bottom)) / 3.0;
        assert!((numeric - exact).abs() <= 1e-3 * exact.abs());
    }

    fn cube(v: f64) -> f64 {
        v * v * v
    }

    #[test]
    fn doubling_cap_depths_scales_stiffness_eightfold() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let cap = spar_cap(&shape).unwrap();
        let doubled = SparCap {
            samples: cap
                .samples
                .iter()
                .map(|s| CapSample {
                    i: s.i,
                    top: 2.0 * s.top,
                    bottom: 2.0 * s.bottom,
                })
                .collect(),
        };
        let base = cap_stiffness(&cap);
        let scaled = cap_stiffness(&doubled);
        assert!(base > 0.0);
        assert!((scaled / base - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cap_quadrature_is_converged() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let coarse = cap_stiffness(&spar_cap_with_samples(&shape, 513).unwrap());
        let fine = cap_stiffness(&spar_cap_with_samples(&shape, 1025).unwrap());
        assert!((fine - coarse).abs() <= 1e-4 * fine.abs());
    }

    #[test]
    fn degenerate_cap_has_zero_stiffness() {
        let samples: Vec<CapSample> = (0..11)
            .map(|k| CapSample {
                i: 0.1 * k as f64,
                top: 0.0,
                bottom: 0.0,
            })
            .collect();
        assert_eq!(cap_stiffness(&SparCap { samples }), 0.0);
    }

    #[test]
    fn coordinate_file_walks_te_le_te() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let text = shape_coordinates_text(&shape);
        let rows: Vec<(f64, f64)> = text
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), shape.upper.len() + shape.lower.len() - 1);
        assert_eq!(rows[0].0, 1.0); // starts at the trailing edge
        assert_eq!(rows[rows.len() - 1].0, 1.0); // ends at the trailing edge
        let le = rows.iter().position(|r| r.0 == 0.0).unwrap();
        assert!(rows[..le].windows(2).all(|w| w[1].0 <= w[0].0 + 1e-12));
        assert!(rows[le..].windows(2).all(|w| w[1].0 >= w[0].0 - 1e-12));
        // The leading edge appears exactly once.
        assert_eq!(rows.iter().filter(|r| r.0 == 0.0).count(), 1);
    }

    #[test]
    fn stub_evaluator_round_trip() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let ev = ExternalEvaluator::new(
            vec![
                "/bin/sh".into(),
                "-c".into(),
                "wc -l < {shape} > /dev/null; echo 0.42".into(),
            ],
            Duration::from_secs(10),
        )
        .unwrap();
        assert_eq!(ev.evaluate(&shape).unwrap(), 0.42);
    }

    #[test]
    fn evaluator_failures_are_reported() {
        let shape = build_shape(&mid_bounds_decision()).unwrap();
        let fail = ExternalEvaluator::new(
            vec!["/bin/sh".into(), "-c".into(), "exit 3".into()],
            Duration::from_secs(5),
        )
        .unwrap();
        assert!(matches!(
            fail.evaluate(&shape),
            Err(Error::EvaluationFailure(_))
        ));
        let garbage = ExternalEvaluator::new(
            vec!["/bin/sh".into(), "-c".into(), "echo not-a-number".into()],
            Duration::from_secs(5),
        )
        .unwrap();
        assert!(matches!(
            garbage.evaluate(&shape),
            Err(Error::EvaluationFailure(_))
        ));
        let slow = ExternalEvaluator::new(
            vec!["/bin/sh".into(), "-c".into(), "sleep 5; echo 1.0".into()],
            Duration::from_millis(150),
        )
        .unwrap();
        match slow.evaluate(&shape) {
            Err(Error::EvaluationFailure(msg)) => assert!(msg.contains("timed out"), "{msg}"),
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn objective_pair_includes_negated_stiffness() {
        let x = mid_bounds_decision();
        let ev = ExternalEvaluator::new(
            vec!["/bin/sh".into(), "-c".into(), "echo 1.5".into()],
            Duration::from_secs(10),
        )
        .unwrap();
        let f = evaluate_objectives(&x, Some(&ev)).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0], 1.5);
        let shape = build_shape(&x).unwrap();
        assert!((f[1] + stiffness(&shape).unwrap()).abs() < 1e-12);
        // Without an evaluator the evaluation fails cleanly.
        assert!(matches!(
            evaluate_objectives(&x, None),
            Err(Error::EvaluationFailure(_))
        ));
    }
}
