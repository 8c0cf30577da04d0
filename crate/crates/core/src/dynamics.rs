//! Complexified Hamiltonian flow: the canonical equations are applied
//! verbatim to the complex Hamiltonian, integrated with an adaptive embedded
//! Runge-Kutta 5(4) pair, while the constants of motion are monitored along
//! the way. Real parts of the trajectories are what gets exported.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::param::EvalError;
use crate::phase::{CompiledPoly, PhaseVar};
use crate::zernike::{build_c, build_hamiltonian, build_i, ModelSpec, SpecError};

/// Integration tolerances for the embedded pair.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-12,
        }
    }
}

/// A fully bound flow problem.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    pub spec: ModelSpec,
    pub initial: [Complex64; 4],
    pub t_span: (f64, f64),
    pub samples: usize,
}

impl FlowProblem {
    /// Defaults: span `[0, 20]` with 2000 samples.
    pub fn new(spec: ModelSpec, initial: [Complex64; 4]) -> Self {
        Self {
            spec,
            initial,
            t_span: (0.0, 20.0),
            samples: 2000,
        }
    }
}

/// Sampled trajectory with the conserved quantities `(H, C, I)` evaluated at
/// every sample and their maximal relative drift against the initial values.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<[Complex64; 4]>,
    pub conserved: Vec<[Complex64; 3]>,
    pub drift: [f64; 3],
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("gamma_{index} must be {expected} for this perturbation parity")]
    RealityViolation {
        index: usize,
        expected: &'static str,
    },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow {
        t: f64,
        partial: Box<TrajectoryRecord>,
    },
    #[error("invalid flow problem: {0}")]
    BadProblem(&'static str),
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("trajectory record is empty")]
    EmptyRecord,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The four compiled partial derivatives forming the canonical vector field
/// `dq = dH/dp`, `dp = -dH/dq`.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: [CompiledPoly; 4],
}

impl VectorField {
    pub fn eval(&self, state: &[Complex64; 4]) -> [Complex64; 4] {
        std::array::from_fn(|i| self.components[i].eval(state))
    }
}

/// Compile the canonical equations of the bound Hamiltonian once.
pub fn hamiltons_equations(spec: &ModelSpec) -> Result<VectorField, FlowError> {
    let h = build_hamiltonian(spec);
    let params = spec.param_bindings();
    let dq1 = h.partial(PhaseVar::P1).compile(&params)?;
    let dq2 = h.partial(PhaseVar::P2).compile(&params)?;
    let dp1 = (-&h.partial(PhaseVar::Q1)).compile(&params)?;
    let dp2 = (-&h.partial(PhaseVar::Q2)).compile(&params)?;
    Ok(VectorField {
        components: [dq1, dq2, dp1, dp2],
    })
}

/// Compiled monitors for `(H, C, I)`.
pub fn conserved_monitors(spec: &ModelSpec) -> Result<[CompiledPoly; 3], FlowError> {
    let params = spec.param_bindings();
    Ok([
        build_hamiltonian(spec).compile(&params)?,
        build_c().compile(&params)?,
        build_i(spec).compile(&params)?,
    ])
}

// Dormand-Prince 5(4) tableau. The canonical field is autonomous, so the
// stage times are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Step {
    y_new: [Complex64; 4],
    k_last: [Complex64; 4],
    err_norm: f64,
}

fn rk_step(field: &VectorField, y: &[Complex64; 4], k1: &[Complex64; 4], h: f64, tol: Tolerances) -> Step {
    let mut k = [[Complex64::new(0.0, 0.0); 4]; 7];
    k[0] = *k1;
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..4 {
                    ys[i] += kj[i] * (a * h);
                }
            }
        }
        k[stage] = field.eval(&ys);
    }
    let mut y_new = *y;
    let mut err = [Complex64::new(0.0, 0.0); 4];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..4 {
            if B5[j] != 0.0 {
                y_new[i] += kj[i] * (B5[j] * h);
            }
            if E[j] != 0.0 {
                err[i] += kj[i] * (E[j] * h);
            }
        }
    }
    // Error norm over the eight real components.
    let mut acc = 0.0;
    for i in 0..4 {
        for (e, a, b) in [
            (err[i].re, y[i].re, y_new[i].re),
            (err[i].im, y[i].im, y_new[i].im),
        ] {
            let scale = tol.abs + tol.rel * a.abs().max(b.abs());
            let r = e / scale;
            acc += r * r;
        }
    }
    Step {
        y_new,
        k_last: k[6],
        err_norm: (acc / 8.0).sqrt(),
    }
}

fn relative_drift(reference: Complex64, value: Complex64) -> f64 {
    let diff = (value - reference).norm();
    if reference.norm() > 1e-12 {
        diff / reference.norm()
    } else {
        diff
    }
}

/// Integrate the flow adaptively, sampling the uniform time grid exactly.
pub fn integrate(problem: &FlowProblem, tol: Tolerances) -> Result<TrajectoryRecord, FlowError> {
    if problem.samples < 2 {
        return Err(FlowError::BadProblem("sample count must be at least 2"));
    }
    let (t0, t1) = problem.t_span;
    if t1 == t0 {
        return Err(FlowError::BadProblem("time span is empty"));
    }
    let field = hamiltons_equations(&problem.spec)?;
    let monitors = conserved_monitors(&problem.spec)?;

    let span = t1 - t0;
    let n = problem.samples;
    let mut record = TrajectoryRecord::default();
    let push_sample = |t: f64, y: &[Complex64; 4], record: &mut TrajectoryRecord| {
        record.times.push(t);
        record.states.push(*y);
        record
            .conserved
            .push(std::array::from_fn(|i| monitors[i].eval(y)));
    };

    let mut t = t0;
    let mut y = problem.initial;
    let mut k1 = field.eval(&y);
    push_sample(t, &y, &mut record);

    let min_step = span.abs() * 1e-14;
    let mut h = span / 1000.0;
    for idx in 1..n {
        let target = t0 + span * idx as f64 / (n - 1) as f64;
        while (target - t).abs() > span.abs() * 1e-13 {
            let remaining = target - t;
            let h_try = if h.abs() >= remaining.abs() {
                remaining
            } else {
                h
            };
            let step = rk_step(&field, &y, &k1, h_try, tol);
            if step.err_norm.is_finite() && step.err_norm <= 1.0 {
                t += h_try;
                y = step.y_new;
                k1 = step.k_last;
                let factor = if step.err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * step.err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = clamp_step(h_try * factor, span);
            } else {
                // Overflowing states produce non-finite error norms; treat
                // them as maximal rejections so the underflow guard fires.
                let factor = if step.err_norm.is_finite() {
                    (0.9 * step.err_norm.powf(-0.2)).clamp(0.2, 0.9)
                } else {
                    0.2
                };
                h = h_try * factor;
                if h.abs() < min_step {
                    finish_drift(&mut record);
                    return Err(FlowError::StepSizeUnderflow {
                        t,
                        partial: Box::new(record),
                    });
                }
            }
        }
        push_sample(target, &y, &mut record);
    }
    finish_drift(&mut record);
    Ok(record)
}

fn clamp_step(h: f64, span: f64) -> f64 {
    let cap = span.abs() / 4.0;
    if h.abs() > cap {
        cap.copysign(h)
    } else {
        h
    }
}

fn finish_drift(record: &mut TrajectoryRecord) {
    if record.conserved.is_empty() {
        return;
    }
    let first = record.conserved[0];
    for row in &record.conserved {
        for i in 0..3 {
            record.drift[i] = record.drift[i].max(relative_drift(first[i], row[i]));
        }
    }
}

/// Fixed-step fifth-order integration to the end of the span; used to check
/// the convergence order.
pub fn integrate_fixed_step(problem: &FlowProblem, h: f64) -> Result<[Complex64; 4], FlowError> {
    let field = hamiltons_equations(&problem.spec)?;
    let (t0, t1) = problem.t_span;
    let span = t1 - t0;
    let steps = (span / h).round().max(1.0) as usize;
    let h = span / steps as f64;
    let mut y = problem.initial;
    let mut k1 = field.eval(&y);
    let tol = Tolerances::default();
    for _ in 0..steps {
        let step = rk_step(&field, &y, &k1, h, tol);
        y = step.y_new;
        k1 = step.k_last;
    }
    Ok(y)
}

/// Single-term perturbations of the quadratic member.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PerturbationKind {
    Cubic,
    Quartic,
    Quintic,
    Sextic,
}

impl PerturbationKind {
    pub fn order(self) -> usize {
        match self {
            PerturbationKind::Cubic => 3,
            PerturbationKind::Quartic => 4,
            PerturbationKind::Quintic => 5,
            PerturbationKind::Sextic => 6,
        }
    }
}

/// Bindings `g1 = 2 i omega`, `g2 = -kappa`, a single extra strength at the
/// requested order, everything else zero.
///
/// The central potential stays real only when the extra strength is purely
/// imaginary at odd orders and purely real at even orders; violations fail
/// unless explicitly allowed.
pub fn perturbation_spec(
    kind: PerturbationKind,
    omega: f64,
    kappa: f64,
    gamma_extra: Complex64,
    allow_reality_violation: bool,
) -> Result<ModelSpec, FlowError> {
    let n = kind.order();
    let odd = n % 2 == 1;
    let magnitude = gamma_extra.norm().max(1.0);
    let violated = if odd {
        gamma_extra.re.abs() > 1e-12 * magnitude
    } else {
        gamma_extra.im.abs() > 1e-12 * magnitude
    };
    if violated && !allow_reality_violation {
        return Err(FlowError::RealityViolation {
            index: n,
            expected: if odd { "purely imaginary" } else { "purely real" },
        });
    }
    let mut bindings = BTreeMap::new();
    for i in 1..=n {
        bindings.insert(i, Complex64::new(0.0, 0.0));
    }
    bindings.insert(1, Complex64::new(0.0, 2.0 * omega));
    bindings.insert(2, Complex64::new(-kappa, 0.0));
    bindings.insert(n, gamma_extra);
    Ok(ModelSpec::bound(n, bindings)?)
}

/// Closure data of the real-projected orbit: the smallest distance of the
/// curve `(Re q1, Re q2)` back to its starting point past an initial guard,
/// together with the time of that return.
#[derive(Clone, Copy, Debug)]
pub struct ClosureInfo {
    pub gap: f64,
    pub t_return: f64,
}

/// Locate the first near-return of the real-projected orbit.
///
/// The coarse sample minimum is refined by re-integrating a window around it
/// and fitting a parabola to the squared distance.
pub fn closure_info(problem: &FlowProblem, tol: Tolerances) -> Result<ClosureInfo, FlowError> {
    let record = integrate(problem, tol)?;
    let start = record.states[0];
    let d = |s: &[Complex64; 4]| -> f64 {
        let dx = s[0].re - start[0].re;
        let dy = s[1].re - start[1].re;
        (dx * dx + dy * dy).sqrt()
    };
    let n = record.times.len();
    let guard = n / 10;
    // First local minimum below the global scale, otherwise the global
    // minimum past the guard.
    let scale = record
        .states
        .iter()
        .map(&d)
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut best_idx = None;
    for i in guard.max(1)..n - 1 {
        let (a, b, c) = (
            d(&record.states[i - 1]),
            d(&record.states[i]),
            d(&record.states[i + 1]),
        );
        if b <= a && b <= c && b < 0.2 * scale {
            best_idx = Some(i);
            break;
        }
    }
    let best_idx = best_idx.unwrap_or_else(|| {
        let mut idx = guard;
        let mut best = f64::INFINITY;
        for i in guard..n {
            let v = d(&record.states[i]);
            if v < best {
                best = v;
                idx = i;
            }
        }
        idx
    });
    let mut gap = d(&record.states[best_idx]);
    let mut t_return = record.times[best_idx];
    if best_idx == 0 || best_idx + 1 >= n {
        return Ok(ClosureInfo { gap, t_return });
    }
    // Refine inside the bracketing window.
    let window = FlowProblem {
        spec: problem.spec.clone(),
        initial: record.states[best_idx - 1],
        t_span: (record.times[best_idx - 1], record.times[best_idx + 1]),
        samples: 257,
    };
    let fine = integrate(&window, tol)?;
    let mut fine_idx = 0;
    for (i, s) in fine.states.iter().enumerate() {
        let v = d(s);
        if v < gap {
            gap = v;
            t_return = fine.times[i];
            fine_idx = i;
        }
    }
    if fine_idx > 0 && fine_idx + 1 < fine.states.len() {
        // Parabola through the squared distance at three adjacent samples.
        let f = |i: usize| {
            let v = d(&fine.states[i]);
            v * v
        };
        let (ym, y0, yp) = (f(fine_idx - 1), f(fine_idx), f(fine_idx + 1));
        let denom = ym - 2.0 * y0 + yp;
        if denom > 0.0 {
            let delta = 0.5 * (ym - yp) / denom;
            if delta.abs() <= 1.0 {
                let dt = fine.times[1] - fine.times[0];
                let min_sq = y0 - 0.25 * (ym - yp) * delta;
                gap = min_sq.max(0.0).sqrt().min(gap);
                t_return = fine.times[fine_idx] + delta * dt;
            }
        }
    }
    Ok(ClosureInfo { gap, t_return })
}

/// Convenience wrapper around [`closure_info`].
pub fn closure_gap(problem: &FlowProblem, tol: Tolerances) -> Result<f64, FlowError> {
    Ok(closure_info(problem, tol)?.gap)
}

/// CSV export: one row per sample with real and imaginary parts of the state
/// and of the conserved quantities.
pub fn write_csv<W: Write>(record: &TrajectoryRecord, out: &mut W) -> Result<(), ExportError> {
    if record.times.is_empty() {
        return Err(ExportError::EmptyRecord);
    }
    writeln!(
        out,
        "t,reQ1,imQ1,reQ2,imQ2,reP1,imP1,reP2,imP2,reH,imH,reC,imC,reI,imI"
    )?;
    for i in 0..record.times.len() {
        let s = record.states[i];
        let c = record.conserved[i];
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            record.times[i],
            s[0].re,
            s[0].im,
            s[1].re,
            s[1].im,
            s[2].re,
            s[2].im,
            s[3].re,
            s[3].im,
            c[0].re,
            c[0].im,
            c[1].re,
            c[1].im,
            c[2].re,
            c[2].im,
        )?;
    }
    Ok(())
}

/// SVG export: a single polyline through `(Re q1, Re q2)` with a 5% padded
/// view box. The vertical axis is flipped into screen coordinates.
pub fn write_svg<W: Write>(record: &TrajectoryRecord, out: &mut W) -> Result<(), ExportError> {
    if record.times.is_empty() {
        return Err(ExportError::EmptyRecord);
    }
    let xs: Vec<f64> = record.states.iter().map(|s| s[0].re).collect();
    let ys: Vec<f64> = record.states.iter().map(|s| -s[1].re).collect();
    let (min_x, max_x) = bounds(&xs);
    let (min_y, max_y) = bounds(&ys);
    let width = (max_x - min_x).max(1e-9);
    let height = (max_y - min_y).max(1e-9);
    let pad_x = width * 0.05;
    let pad_y = height * 0.05;
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.9} {:.9} {:.9} {:.9}\">",
        min_x - pad_x,
        min_y - pad_y,
        width + 2.0 * pad_x,
        height + 2.0 * pad_y
    )?;
    let stroke = (width.max(height)) * 0.004;
    write!(
        out,
        "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.9}\" points=\""
    )?;
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        if i > 0 {
            write!(out, " ")?;
        }
        write!(out, "{x:.9},{y:.9}")?;
    }
    writeln!(out, "\"/>")?;
    writeln!(out, "</svg>")?;
    Ok(())
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in v {
        min = min.min(x);
        max = max.max(x);
    }
    (min, max)
}

pub fn export_path(record: &TrajectoryRecord, path: &Path) -> Result<(), ExportError> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    match path.extension().and_then(|e| e.to_str()) {
        Some("svg") => write_svg(record, &mut out),
        _ => write_csv(record, &mut out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_spec() -> ModelSpec {
        ModelSpec::bound(1, BTreeMap::from([(1, c(0.0, 0.0))])).unwrap()
    }

    #[test]
    fn field_free_motion() {
        let field = hamiltons_equations(&free_spec()).unwrap();
        let v = field.eval(&[c(0.3, 0.0), c(-0.2, 0.0), c(0.5, 0.0), c(0.1, 0.0)]);
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.2, 0.0)).norm() < 1e-15);
        assert!(v[2].norm() < 1e-15);
        assert!(v[3].norm() < 1e-15);
    }

    #[test]
    fn field_linear_member() {
        // dp1/dt = -dH/dq1 = -g1 p1.
        let g1 = c(0.7, 0.0);
        let spec = ModelSpec::bound(1, BTreeMap::from([(1, g1)])).unwrap();
        let field = hamiltons_equations(&spec).unwrap();
        let state = [c(0.4, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(-0.2, 0.0)];
        let v = field.eval(&state);
        assert!((v[2] + g1 * state[2]).norm() < 1e-15);
        assert!((v[3] + g1 * state[3]).norm() < 1e-15);
    }

    #[test]
    fn field_matches_finite_differences() {
        let spec = ModelSpec::bound(
            3,
            BTreeMap::from([(1, c(0.0, 2.0)), (2, c(-1.0, 0.0)), (3, c(0.0, 0.05))]),
        )
        .unwrap();
        let field = hamiltons_equations(&spec).unwrap();
        let h_poly = build_hamiltonian(&spec);
        let params = spec.param_bindings();
        let z = [c(0.3, 0.1), c(-0.2, 0.05), c(0.4, -0.1), c(0.25, 0.2)];
        let v = field.eval(&z);
        let eps = 1e-6;
        let diff = |i: usize| {
            let mut zp = z;
            let mut zm = z;
            zp[i] += c(eps, 0.0);
            zm[i] -= c(eps, 0.0);
            (h_poly.eval(&zp, &params).unwrap() - h_poly.eval(&zm, &params).unwrap())
                / c(2.0 * eps, 0.0)
        };
        let expected = [diff(2), diff(3), -diff(0), -diff(1)];
        for i in 0..4 {
            let scale = expected[i].norm().max(1.0);
            assert!((v[i] - expected[i]).norm() / scale < 1e-6, "component {i}");
        }
    }

    #[test]
    fn free_flight_straight_line() {
        let problem = FlowProblem {
            spec: free_spec(),
            initial: [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            t_span: (0.0, 1.0),
            samples: 11,
        };
        let record = integrate(&problem, Tolerances::default()).unwrap();
        for (i, t) in record.times.iter().enumerate() {
            assert!((record.states[i][0].re - 2.0 * t).abs() < 1e-12);
        }
        assert!(record.drift.iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn zernike_orbit_closes_and_conserves() {
        // Real initial data transversal to the dilation direction
        // (q . p = 0); only then is the real projection a closed curve, see
        // the scalar reduction notes in the repository README.
        let spec = ModelSpec::bound(
            2,
            BTreeMap::from([(1, c(0.0, 2.0)), (2, c(-1.0, 0.0))]),
        )
        .unwrap();
        let problem = FlowProblem {
            spec,
            initial: [c(0.3, 0.0), c(0.1, 0.0), c(-0.1, 0.0), c(0.3, 0.0)],
            t_span: (0.0, 12.0),
            samples: 1600,
        };
        let record = integrate(&problem, Tolerances::default()).unwrap();
        assert!(
            record.drift.iter().all(|&d| d < 1e-8),
            "drift {:?}",
            record.drift
        );
        let info = closure_info(&problem, Tolerances::default()).unwrap();
        assert!(info.gap < 1e-6, "closure gap {}", info.gap);
        assert!(info.t_return > 1.0, "return time {}", info.t_return);
        // Bounded real part.
        let bound = record
            .states
            .iter()
            .map(|s| s[0].re.abs().max(s[1].re.abs()))
            .fold(0.0f64, f64::max);
        assert!(bound < 1.0, "orbit escaped: {bound}");
    }

    #[test]
    fn time_reversal() {
        let spec = perturbation_spec(
            PerturbationKind::Cubic,
            1.0,
            1.0,
            c(0.0, 0.05),
            false,
        )
        .unwrap();
        let initial = [c(0.3, 0.0), c(0.1, 0.0), c(0.05, 0.0), c(0.35, 0.0)];
        let forward = FlowProblem {
            spec: spec.clone(),
            initial,
            t_span: (0.0, 5.0),
            samples: 200,
        };
        let record = integrate(&forward, Tolerances::default()).unwrap();
        let backward = FlowProblem {
            spec,
            initial: *record.states.last().unwrap(),
            t_span: (5.0, 0.0),
            samples: 200,
        };
        let back = integrate(&backward, Tolerances::default()).unwrap();
        let recovered = back.states.last().unwrap();
        for i in 0..4 {
            let scale = initial[i].norm().max(1.0);
            assert!(
                (recovered[i] - initial[i]).norm() / scale < 1e-7,
                "component {i}"
            );
        }
    }

    #[test]
    fn step_halving_order() {
        let spec = ModelSpec::bound(
            2,
            BTreeMap::from([(1, c(0.0, 2.0)), (2, c(-1.0, 0.0))]),
        )
        .unwrap();
        let problem = FlowProblem {
            spec,
            initial: [c(0.3, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.3, 0.0)],
            t_span: (0.0, 2.0),
            samples: 2,
        };
        let reference = integrate(
            &problem,
            Tolerances {
                rel: 1e-13,
                abs: 1e-14,
            },
        )
        .unwrap();
        let exact = reference.states.last().unwrap();
        let err = |h: f64| {
            let y = integrate_fixed_step(&problem, h).unwrap();
            (0..4).map(|i| (y[i] - exact[i]).norm()).fold(0.0, f64::max)
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let order = (e1 / e2).log2();
        assert!(order > 4.0, "observed order {order} (e1={e1}, e2={e2})");
    }

    #[test]
    fn runaway_flow_reports_underflow_with_partial_record() {
        // A strong real cubic strength drives exponential growth of the
        // positions until the state overflows; the integrator must stop with
        // the last good samples instead of spinning.
        let spec = ModelSpec::bound(
            3,
            BTreeMap::from([
                (1, c(0.0, 0.0)),
                (2, c(0.0, 0.0)),
                (3, c(5.0, 0.0)),
            ]),
        )
        .unwrap();
        let problem = FlowProblem {
            spec,
            initial: [c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.5, 0.0)],
            t_span: (0.0, 10.0),
            samples: 100,
        };
        match integrate(&problem, Tolerances::default()) {
            Err(FlowError::StepSizeUnderflow { t, partial }) => {
                assert!(t > 0.0 && t < 10.0);
                assert!(!partial.times.is_empty());
                assert!(partial.times.len() < 100);
            }
            other => panic!("expected step size underflow, got {other:?}"),
        }
    }

    #[test]
    fn preset_parity_rules() {
        assert!(perturbation_spec(PerturbationKind::Cubic, 1.0, 1.0, c(0.05, 0.0), false).is_err());
        assert!(perturbation_spec(PerturbationKind::Cubic, 1.0, 1.0, c(0.05, 0.0), true).is_ok());
        let spec =
            perturbation_spec(PerturbationKind::Quartic, 1.0, 1.0, c(0.03, 0.0), false).unwrap();
        assert_eq!(spec.order(), 4);
        assert_eq!(spec.gamma_value(1), Some(c(0.0, 2.0)));
        assert_eq!(spec.gamma_value(2), Some(c(-1.0, 0.0)));
        assert_eq!(spec.gamma_value(3), Some(c(0.0, 0.0)));
        assert_eq!(spec.gamma_value(4), Some(c(0.03, 0.0)));
    }

    #[test]
    fn csv_shape() {
        let problem = FlowProblem {
            spec: free_spec(),
            initial: [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            t_span: (0.0, 1.0),
            samples: 2,
        };
        let record = integrate(&problem, Tolerances::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&record, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("t,reQ1,imQ1"));

        let empty = TrajectoryRecord::default();
        assert!(matches!(
            write_csv(&empty, &mut Vec::new()),
            Err(ExportError::EmptyRecord)
        ));
    }

    #[test]
    fn svg_polyline_closes_for_closed_orbit() {
        let spec = ModelSpec::bound(
            2,
            BTreeMap::from([(1, c(0.0, 2.0)), (2, c(-1.0, 0.0))]),
        )
        .unwrap();
        let mut problem = FlowProblem {
            spec,
            initial: [c(0.3, 0.0), c(0.1, 0.0), c(-0.1, 0.0), c(0.3, 0.0)],
            t_span: (0.0, 6.0),
            samples: 1200,
        };
        // Re-span to one full return of the real orbit.
        let info = closure_info(&problem, Tolerances::default()).unwrap();
        problem.t_span = (0.0, info.t_return);
        problem.samples = 400;
        let record = integrate(&problem, Tolerances::default()).unwrap();
        let mut buf = Vec::new();
        write_svg(&record, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("<polyline"));
        let points: Vec<(f64, f64)> = text
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .split(' ')
            .map(|pair| {
                let mut it = pair.split(',');
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        assert_eq!(points.len(), 400);
        let (first, last) = (points[0], points[points.len() - 1]);
        let (min_x, max_x) = bounds(&points.iter().map(|p| p.0).collect::<Vec<_>>());
        let (min_y, max_y) = bounds(&points.iter().map(|p| p.1).collect::<Vec<_>>());
        let diag = ((max_x - min_x).powi(2) + (max_y - min_y).powi(2)).sqrt();
        let closure = ((first.0 - last.0).powi(2) + (first.1 - last.1).powi(2)).sqrt();
        assert!(closure < 1e-6 * diag, "closure {closure} vs diag {diag}");
    }
}
