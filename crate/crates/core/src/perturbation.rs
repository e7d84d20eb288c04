//! Zeroth-order approximation of the oscillation and the two convergence
//! studies built around it.
//!
//! Setting `eps = 0` in the governing equation and integrating from rest
//! gives a periodic piecewise-quartic solution: on each period
//! `[6(i-1), 6i]`,
//!
//! ```text
//! u0(s) = (s - 6(i-1))^2 (6i - s)^2 / 72,
//! ```
//!
//! with range `[0, 9/8]` and `C^1` contact at the knots. The studies
//! measure (a) how the damped solution approaches `u0` as `eps -> 0+`, and
//! (b) how undamped comparison solutions launched at `s = delta` with
//! corridor-scaled initial data approach `u0` as `delta -> 0+`.

use crate::integrator::{self, IntegratorError, IvpSpec, Tolerances, Trajectory};
use crate::model::{energy_lhs, State};
use crate::par::parallel_map;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error("u0 is defined for s >= 0, got {0}")]
    NegativeTime(f64),
    #[error("study parameter `{what}` out of range: {value}")]
    BadParameter { what: &'static str, value: f64 },
    #[error("need at least {need} parameter values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("initial state outside the admissible set (energy {energy:e})")]
    OutsideAdmissibleSet { energy: f64 },
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

/// The closed-form zeroth-order solution: period 6, one quartic arc per
/// period, amplitude normalization 1/72.
#[derive(Debug, Clone, Copy, Default)]
pub struct PiecewiseQuartic;

impl PiecewiseQuartic {
    pub const PERIOD: f64 = 6.0;
    pub const AMPLITUDE: f64 = 9.0 / 8.0;

    /// Reduce to the fundamental period; `s >= 0` is the caller's contract.
    fn arc_time(s: f64) -> f64 {
        s % Self::PERIOD
    }

    pub(crate) fn eval_unchecked(s: f64) -> f64 {
        let r = Self::arc_time(s);
        r * r * (6.0 - r) * (6.0 - r) / 72.0
    }

    pub(crate) fn deriv_unchecked(s: f64) -> f64 {
        let r = Self::arc_time(s);
        r * (6.0 - r) * (6.0 - 2.0 * r) / 36.0
    }
}

/// Value of `u0` at `s >= 0`.
pub fn u0_eval(s: f64) -> Result<f64, PerturbationError> {
    if s.is_nan() || s < 0.0 {
        return Err(PerturbationError::NegativeTime(s));
    }
    Ok(PiecewiseQuartic::eval_unchecked(s))
}

/// Derivative of `u0` at `s >= 0`.
pub fn u0_deriv(s: f64) -> Result<f64, PerturbationError> {
    if s.is_nan() || s < 0.0 {
        return Err(PerturbationError::NegativeTime(s));
    }
    Ok(PiecewiseQuartic::deriv_unchecked(s))
}

/// Residual of `u0'' + sqrt(2 u0) - 1`; analytically zero in the interior
/// of every arc (the second derivative jumps at the knots).
pub fn u0_defect(s: f64) -> f64 {
    let r = PiecewiseQuartic::arc_time(s);
    let ddu = 1.0 - r + r * r / 6.0;
    ddu + (2.0 * PiecewiseQuartic::eval_unchecked(s)).sqrt() - 1.0
}

/// Initial-condition families of the comparison study, scaled as in the
/// small-time corridor bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcFamily {
    /// `w(delta) = delta^2/2`, `w'(delta) = delta`.
    A,
    /// `w(delta) = 7 delta^2/18`, `w'(delta) = delta/18`.
    B,
}

impl IcFamily {
    pub fn initial_state(&self, delta: f64) -> State {
        match self {
            IcFamily::A => State::new(0.5 * delta * delta, delta),
            IcFamily::B => State::new(7.0 / 18.0 * delta * delta, delta / 18.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            IcFamily::A => "A",
            IcFamily::B => "B",
        }
    }
}

/// One measured row of a study.
#[derive(Debug, Clone, Copy)]
pub struct StudyRow {
    /// Sweep parameter (`eps` or `delta`).
    pub parameter: f64,
    /// Measured sup-norm error against `u0`.
    pub error: f64,
    /// Reference quantity for the row (compensated error, or the fitted
    /// power-law value at this parameter).
    pub reference: f64,
}

/// Fitted summary of a study.
#[derive(Debug, Clone, Copy)]
pub enum StudyFit {
    /// `err ~ C * (-1/ln eps)`; `spread` is max/min of the compensated
    /// quantity `err * (-ln eps)` across the rows.
    CompensatedRate { c: f64, spread: f64 },
    /// `err ~ amplitude * delta^slope`, least squares on log-log.
    PowerLaw { slope: f64, amplitude: f64 },
}

/// Tabular output of a convergence experiment.
#[derive(Debug, Clone)]
pub struct StudyReport {
    pub label: String,
    pub rows: Vec<StudyRow>,
    pub interval: (f64, f64),
    pub tolerances: Tolerances,
    pub fit: StudyFit,
}

/// `sup_{[0,T]} |u(s) - u0(s)|` for the damped solution started from rest.
///
/// The difference is sampled at 200 points per period plus the extrema of
/// both functions, and every local maximum of the sampled difference is
/// refined by golden-section search.
pub fn remainder_sup(
    epsilon: f64,
    t_end: f64,
    tolerances: Tolerances,
) -> Result<f64, PerturbationError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PerturbationError::BadParameter {
            what: "epsilon",
            value: epsilon,
        });
    }
    if t_end.is_nan() || t_end < 0.0 {
        return Err(PerturbationError::BadParameter {
            what: "t_end",
            value: t_end,
        });
    }
    if t_end == 0.0 {
        return Ok(0.0);
    }
    let spec = IvpSpec::rest(epsilon, t_end).with_tolerances(tolerances);
    let traj = integrator::solve_damped(&spec)?;
    Ok(sup_deviation_from_u0(&traj, 0.0, t_end))
}

/// Largest `|u(s) - u0(s)|` over `[a, b]` for a solved trajectory.
pub(crate) fn sup_deviation_from_u0(traj: &Trajectory, a: f64, b: f64) -> f64 {
    let diff = |s: f64| {
        let u = traj.eval(s).map(|st| st.u).unwrap_or(f64::NAN);
        (u - PiecewiseQuartic::eval_unchecked(s.max(0.0))).abs()
    };
    let n = (((b - a) / PiecewiseQuartic::PERIOD * 200.0).ceil() as usize).clamp(64, 4_000_000);
    let h = (b - a) / n as f64;
    let mut samples: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    for e in traj.extrema() {
        if e.s > a && e.s < b {
            samples.push(e.s);
        }
    }
    // u0's stationary points at multiples of 3
    let mut knot = (a / 3.0).ceil() * 3.0;
    while knot < b {
        if knot > a {
            samples.push(knot);
        }
        knot += 3.0;
    }
    samples.sort_by(f64::total_cmp);
    let values: Vec<f64> = samples.iter().map(|&s| diff(s)).collect();
    let mut best: f64 = 0.0;
    for i in 0..samples.len() {
        let v = values[i];
        best = best.max(v);
        let is_local_max =
            (i == 0 || values[i - 1] <= v) && (i + 1 == samples.len() || values[i + 1] <= v);
        if is_local_max {
            let lo = if i == 0 { a } else { samples[i - 1] };
            let hi = if i + 1 == samples.len() {
                b
            } else {
                samples[i + 1]
            };
            best = best.max(golden_max(&diff, lo, hi));
        }
    }
    best
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..70 {
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Sweep `eps` and fit the compensated model `err ~ C * (-1/ln eps)`.
///
/// Rows are computed independently (optionally in parallel) and assembled
/// in parameter order.
pub fn convergence_rate_study(
    eps_list: &[f64],
    t_end: f64,
    tolerances: Tolerances,
    threads: usize,
) -> Result<StudyReport, PerturbationError> {
    if eps_list.len() < 3 {
        return Err(PerturbationError::TooFewValues {
            need: 3,
            got: eps_list.len(),
        });
    }
    for &e in eps_list {
        if !(e > 0.0 && e < 1.0) {
            return Err(PerturbationError::BadParameter {
                what: "epsilon",
                value: e,
            });
        }
    }
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(PerturbationError::BadParameter {
            what: "t_end",
            value: t_end,
        });
    }
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(f64::total_cmp);
    let errs = parallel_map(&eps_sorted, threads, |&eps| {
        remainder_sup(eps, t_end, tolerances)
    });
    let mut rows = Vec::with_capacity(eps_sorted.len());
    for (eps, err) in eps_sorted.iter().zip(errs) {
        let err = err?;
        rows.push(StudyRow {
            parameter: *eps,
            error: err,
            reference: err * (-eps.ln()),
        });
    }
    // least squares err ~ C x with x = -1/ln eps
    let (mut num, mut den) = (0.0, 0.0);
    for r in &rows {
        let x = -1.0 / r.parameter.ln();
        num += r.error * x;
        den += x * x;
    }
    let c = num / den;
    let comp_max = rows.iter().map(|r| r.reference).fold(f64::MIN, f64::max);
    let comp_min = rows.iter().map(|r| r.reference).fold(f64::MAX, f64::min);
    Ok(StudyReport {
        label: "eps-study".into(),
        rows,
        interval: (0.0, t_end),
        tolerances,
        fit: StudyFit::CompensatedRate {
            c,
            spread: comp_max / comp_min,
        },
    })
}

/// Sweep `delta`, solving the undamped comparison problem from the family's
/// initial data at `s = delta`, and fit `err ~ C delta^p` on log-log.
pub fn wdelta_error_study(
    delta_list: &[f64],
    family: IcFamily,
    t_end: f64,
    tolerances: Tolerances,
    threads: usize,
) -> Result<StudyReport, PerturbationError> {
    if delta_list.len() < 2 {
        return Err(PerturbationError::TooFewValues {
            need: 2,
            got: delta_list.len(),
        });
    }
    for &d in delta_list {
        if !(d > 0.0 && d < 1.0) {
            return Err(PerturbationError::BadParameter {
                what: "delta",
                value: d,
            });
        }
    }
    if t_end.is_nan() || t_end < 6.0 {
        return Err(PerturbationError::BadParameter {
            what: "t_end",
            value: t_end,
        });
    }
    let mut deltas = delta_list.to_vec();
    deltas.sort_by(f64::total_cmp);
    // the families derive from corridor bounds, so their energy is at most
    // O(delta^3); anything materially positive is outside the admissible set
    for &d in &deltas {
        let e = energy_lhs(family.initial_state(d));
        if e > 1e-2 {
            return Err(PerturbationError::OutsideAdmissibleSet { energy: e });
        }
    }
    let errs = parallel_map(
        &deltas,
        threads,
        |&delta| -> Result<f64, PerturbationError> {
            let traj =
                integrator::solve_undamped(delta, family.initial_state(delta), t_end, tolerances)?;
            Ok(sup_deviation_from_u0(&traj, delta, t_end))
        },
    );
    let collected: Result<Vec<f64>, _> = errs.into_iter().collect();
    let collected = collected?;
    // unweighted least squares on log-log, endpoints included
    let n = deltas.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (d, e) in deltas.iter().zip(&collected) {
        let (x, y) = (d.ln(), e.max(1e-300).ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let amplitude = ((sy - slope * sx) / n).exp();
    let rows = deltas
        .iter()
        .zip(&collected)
        .map(|(&d, &e)| StudyRow {
            parameter: d,
            error: e,
            reference: amplitude * d.powf(slope),
        })
        .collect();
    Ok(StudyReport {
        label: format!("delta-study family {}", family.label()),
        rows,
        interval: (0.0, t_end),
        tolerances,
        fit: StudyFit::PowerLaw { slope, amplitude },
    })
}
