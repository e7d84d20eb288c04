//! High-accuracy reference solutions of the damped and undamped initial
//! value problems.
//!
//! The rest start `(u, u') = (0, 0)` sits exactly on the non-Lipschitz point
//! of the field, so integration begins with a validated local series on a
//! short interval and hands off to an adaptive Dormand-Prince 5(4) stepper
//! with dense output. Step proposals that would make the height negative
//! are rejected and retried with half the step, never clamped.
//!
//! The undamped equation additionally owns a contact policy at `u = 0`:
//! grazing contacts (orbit energy ~ 0, the periodic arcs touching zero) are
//! continued by a fresh series arc from the computed touch time, while
//! transversal impacts of slightly positive-energy orbits are continued by
//! elastic reflection of the velocity. Both events are recorded on the
//! trajectory and count as height minima.

mod dopri5;
mod series;
mod trajectory;

pub(crate) use dopri5::{
    integrate, CapillaryField, DenseOutput, EngineError, EngineOptions, Field, FieldViolation, Stop,
};
pub use series::default_series_switch;
pub(crate) use series::SeriesCoeffs;
pub(crate) use trajectory::{Contact, ContactKind, Segment};
pub use trajectory::{Extremum, ExtremumKind, Node, SolveStats, Trajectory};

use crate::model::{energy_lhs, State};
use crate::quad;
use thiserror::Error;

/// Absolute/relative local error tolerances of the stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        // reference-run defaults; studies may loosen
        Self {
            abs: 1e-10,
            rel: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn validate(&self) -> Result<(), IntegratorError> {
        for (name, v) in [("abs_tol", self.abs), ("rel_tol", self.rel)] {
            if !(v.is_finite() && v > 0.0 && v <= 1e-2) {
                return Err(IntegratorError::InvalidSpec {
                    what: name,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("invalid IVP specification: `{what}` = {value}")]
    InvalidSpec { what: &'static str, value: f64 },
    #[error("series evaluation outside its interval: s = {s}, switch = {switch}")]
    SeriesDomain { s: f64, switch: f64 },
    #[error("step size underflow near the singular height u = 0 at s = {s} (u = {u})")]
    SingularPoint { s: f64, u: f64 },
    #[error("step budget exhausted at s = {s}")]
    MaxSteps { s: f64 },
    #[error("evaluation at s = {s} outside the solved interval [{s_start}, {s_end}]")]
    OutOfDomain { s: f64, s_start: f64, s_end: f64 },
    #[error("small-time corridor violated at s = {s} (margin {margin:e})")]
    CorridorViolation { s: f64, margin: f64 },
    #[error("contact stitching produced too many segments (last at s = {s})")]
    TooManyContacts { s: f64 },
}

/// Specification of one damped initial value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpSpec {
    pub epsilon: f64,
    pub s0: f64,
    pub y0: State,
    pub s_end: f64,
    pub tolerances: Tolerances,
    /// Length of the series arc used for rest starts.
    pub series_switch: f64,
}

impl IvpSpec {
    /// Rest start at `s = 0` with default tolerances and switch.
    pub fn rest(epsilon: f64, s_end: f64) -> Self {
        Self {
            epsilon,
            s0: 0.0,
            y0: State::REST,
            s_end,
            tolerances: Tolerances::default(),
            series_switch: default_series_switch(epsilon),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tolerances = tol;
        self
    }

    fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(IntegratorError::InvalidSpec {
                what: "epsilon",
                value: self.epsilon,
            });
        }
        if !(self.s_end.is_finite() && self.s_end > self.s0) {
            return Err(IntegratorError::InvalidSpec {
                what: "s_end",
                value: self.s_end,
            });
        }
        self.tolerances.validate()?;
        if self.y0.u < 0.0 {
            return Err(IntegratorError::InvalidSpec {
                what: "y0.u",
                value: self.y0.u,
            });
        }
        if self.y0 == State::REST {
            let cap = 2.0 / (1.0 + self.epsilon);
            if !(self.series_switch > 0.0 && self.series_switch <= cap) {
                return Err(IntegratorError::InvalidSpec {
                    what: "series_switch",
                    value: self.series_switch,
                });
            }
        } else if self.y0.u == 0.0 && self.y0.du < 0.0 {
            return Err(IntegratorError::InvalidSpec {
                what: "y0.du",
                value: self.y0.du,
            });
        }
        Ok(())
    }
}

/// Truncated local expansion at a rest start, `u = s^2/2 - (1+eps)s^3/6 + ...`.
///
/// Valid for `0 <= s <= series_switch <= 2/(1+eps)`; the returned height is
/// checked against the small-time corridor `s^2/6 <= u <= s^2/2`.
pub fn local_series_start(
    epsilon: f64,
    s: f64,
    series_switch: f64,
) -> Result<State, IntegratorError> {
    if !(series_switch > 0.0 && series_switch <= 2.0 / (1.0 + epsilon)) {
        return Err(IntegratorError::InvalidSpec {
            what: "series_switch",
            value: series_switch,
        });
    }
    if !(0.0..=series_switch).contains(&s) {
        return Err(IntegratorError::SeriesDomain {
            s,
            switch: series_switch,
        });
    }
    let st = SeriesCoeffs::for_epsilon(epsilon).eval(s);
    let tol = 1e-13 * s * s + 1e-300;
    if st.u < s * s / 6.0 - tol || st.u > s * s / 2.0 + tol {
        return Err(IntegratorError::CorridorViolation { s, margin: 0.0 });
    }
    Ok(st)
}

/// Margin allowed when validating the small-time corridor on computed
/// rest-start trajectories.
const CORRIDOR_TOL: f64 = 1e-8;
/// Height at which the undamped solver stops and classifies a zero contact.
const CONTACT_FLOOR: f64 = 1e-11;
/// Orbit energy below which a contact is treated as grazing.
const CONTACT_ENERGY_TOL: f64 = 1e-9;

struct Assembler {
    epsilon: f64,
    segments: Vec<Segment>,
    nodes: Vec<Node>,
    contacts: Vec<Contact>,
    stats: SolveStats,
    dissipation: f64,
}

impl Assembler {
    fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            segments: Vec::new(),
            nodes: Vec::new(),
            contacts: Vec::new(),
            stats: SolveStats::default(),
            dissipation: 0.0,
        }
    }

    fn push_node(&mut self, s: f64, st: State) {
        if let Some(last) = self.nodes.last() {
            if s <= last.s {
                return;
            }
        }
        self.nodes.push(Node {
            s,
            u: st.u,
            du: st.du,
            dissipation: self.dissipation,
        });
    }

    fn push_series(&mut self, t0: f64, s_from: f64, s_to: f64, coeffs: SeriesCoeffs) {
        let n = 8;
        let mut prev = s_from;
        self.push_node(s_from, coeffs.eval(s_from - t0));
        for i in 1..=n {
            let s = s_from + (s_to - s_from) * i as f64 / n as f64;
            let mut du2 = |x: f64| {
                let d = coeffs.eval(x - t0).du;
                d * d
            };
            self.dissipation += quad::gauss(&mut du2, prev, s, 5);
            self.push_node(s, coeffs.eval(s - t0));
            prev = s;
        }
        self.segments.push(Segment::Series {
            t0,
            s_from,
            s_to,
            coeffs,
        });
    }

    fn push_dense(&mut self, run: dopri5::Run) {
        let last = run.dense.steps.len().saturating_sub(1);
        for (i, step) in run.dense.steps.iter().enumerate() {
            let mut du2 = |x: f64| {
                let d = step.eval(x)[1];
                d * d
            };
            self.dissipation += quad::gauss(&mut du2, step.s0, step.s0 + step.h, 5);
            let y = if i == last {
                run.y_end
            } else {
                step.eval(step.s0 + step.h)
            };
            self.push_node(step.s0 + step.h, State { u: y[0], du: y[1] });
        }
        self.stats.accepted_steps += run.stats.accepted;
        self.stats.rejected_steps += run.stats.rejected;
        self.stats.rhs_evaluations += run.stats.rhs_evals;
        self.segments.push(Segment::Dense(run.dense));
    }

    fn finish(self, s_start: f64, s_end: f64) -> Trajectory {
        Trajectory {
            epsilon: self.epsilon,
            segments: self.segments,
            nodes: self.nodes,
            contacts: self.contacts,
            stats: self.stats,
            s_start,
            s_end,
        }
    }
}

fn engine_error(e: dopri5::EngineError) -> IntegratorError {
    match e {
        dopri5::EngineError::SingularPoint { s, u } => IntegratorError::SingularPoint { s, u },
        dopri5::EngineError::MaxSteps { s } => IntegratorError::MaxSteps { s },
    }
}

/// Solve the damped problem `u'' + eps u' + sqrt(2u) = 1`.
///
/// Rest starts go through the local series on `[s0, s0 + series_switch]`;
/// the small-time corridor of the solution is validated on every rest-start
/// run. `eps = 0` delegates to the undamped solver, whose contact handling
/// carries the periodic solution across its zero touches.
pub fn solve_damped(spec: &IvpSpec) -> Result<Trajectory, IntegratorError> {
    spec.validate()?;
    if spec.epsilon == 0.0 {
        return solve_zero_damping(spec);
    }
    let mut asm = Assembler::new(spec.epsilon);
    let field = CapillaryField {
        epsilon: spec.epsilon,
    };
    let opts = EngineOptions::new(spec.tolerances.abs, spec.tolerances.rel);

    let rest = spec.y0 == State::REST;
    let (mut s, mut y) = (spec.s0, spec.y0);
    if rest {
        let switch = spec.series_switch.min(spec.s_end - spec.s0);
        let coeffs = SeriesCoeffs::for_epsilon(spec.epsilon);
        asm.push_series(spec.s0, spec.s0, spec.s0 + switch, coeffs);
        s = spec.s0 + switch;
        y = coeffs.eval(switch);
    } else {
        asm.push_node(s, y);
    }
    if s < spec.s_end {
        let run = integrate(&field, s, [y.u, y.du], spec.s_end, &opts).map_err(engine_error)?;
        asm.push_dense(run);
    }
    let traj = asm.finish(spec.s0, spec.s_end);
    if rest {
        validate_corridor(&traj, spec.s0, spec.epsilon)?;
    }
    Ok(traj)
}

/// Solve the undamped comparison problem `w'' + sqrt(2w) = 1` from
/// `(s0, y0)`, continuing through zero contacts as described in the module
/// docs. A rest start reuses the series machinery with `eps = 0`.
pub fn solve_undamped(
    s0: f64,
    y0: State,
    s_end: f64,
    tolerances: Tolerances,
) -> Result<Trajectory, IntegratorError> {
    let spec = IvpSpec {
        epsilon: 0.0,
        s0,
        y0,
        s_end,
        tolerances,
        series_switch: default_series_switch(0.0),
    };
    spec.validate()?;
    solve_zero_damping(&spec)
}

fn solve_zero_damping(spec: &IvpSpec) -> Result<Trajectory, IntegratorError> {
    let (s0, y0, s_end, tolerances) = (spec.s0, spec.y0, spec.s_end, spec.tolerances);
    let coeffs = SeriesCoeffs::for_epsilon(0.0);
    let field = CapillaryField { epsilon: 0.0 };
    let mut opts = EngineOptions::new(tolerances.abs, tolerances.rel);
    opts.u_floor = Some(CONTACT_FLOOR);

    let mut asm = Assembler::new(0.0);
    let (mut s, mut y) = (s0, y0);
    if y0 == State::REST {
        let switch = spec.series_switch.min(s_end - s0);
        asm.push_series(s0, s0, s0 + switch, coeffs);
        s = s0 + switch;
        y = coeffs.eval(switch);
    } else {
        asm.push_node(s, y);
    }

    while s < s_end {
        let run = integrate(&field, s, [y.u, y.du], s_end, &opts).map_err(engine_error)?;
        let stop = run.stop;
        asm.push_dense(run);
        match stop {
            Stop::Completed => break,
            Stop::Floor { s: sc, y: yc } => {
                if asm.segments.len() > 2000 {
                    return Err(IntegratorError::TooManyContacts { s: sc });
                }
                let state = State {
                    u: yc[0],
                    du: yc[1],
                };
                if energy_lhs(state) > CONTACT_ENERGY_TOL {
                    // transversal impact: elastic reflection
                    asm.contacts.push(Contact {
                        s: sc,
                        kind: ContactKind::Reflect,
                    });
                    s = sc;
                    y = State {
                        u: yc[0],
                        du: -yc[1],
                    };
                } else {
                    // grazing contact: hop to the parabola vertex, restart
                    // from rest with a fresh series arc; the arc also covers
                    // the tiny [sc, t_star] gap at negative offsets, off by
                    // only O(gap^3)
                    let ddu = 1.0 - (2.0 * yc[0].max(0.0)).sqrt();
                    let t_star = sc - yc[1] / ddu;
                    asm.contacts.push(Contact {
                        s: t_star.min(s_end),
                        kind: ContactKind::Graze,
                    });
                    let arc_end = (t_star + 1.0).min(s_end);
                    asm.push_series(t_star, sc, arc_end, coeffs);
                    if arc_end >= s_end {
                        break;
                    }
                    s = arc_end;
                    y = coeffs.eval(arc_end - t_star);
                }
            }
        }
    }
    let traj = asm.finish(s0, s_end);
    if y0 == State::REST {
        validate_corridor(&traj, s0, 0.0)?;
    }
    Ok(traj)
}

/// Validate the small-time corridor on a rest-start trajectory:
/// `s^2/6 <= u <= s^2/2` and `u'^2 <= s^2 - (2 sqrt2 / 9) s^3` on
/// `[0, 2/(1+eps)]` (times measured from the rest point).
fn validate_corridor(traj: &Trajectory, s0: f64, epsilon: f64) -> Result<(), IntegratorError> {
    let window_end = (s0 + 2.0 / (1.0 + epsilon)).min(traj.s_end());
    let n = 400;
    for i in 0..=n {
        let s = s0 + (window_end - s0) * i as f64 / n as f64;
        let st = traj.eval(s)?;
        let x = s - s0;
        let lower = x * x / 6.0 - st.u;
        let upper = st.u - x * x / 2.0;
        let vel = st.du * st.du - (x * x - 2.0 * std::f64::consts::SQRT_2 / 9.0 * x * x * x);
        let margin = lower.max(upper).max(vel);
        if margin > CORRIDOR_TOL {
            return Err(IntegratorError::CorridorViolation { s, margin });
        }
    }
    Ok(())
}

/// Maximum over the trajectory nodes of the energy identity residual
/// `|u'^2/2 + (2 sqrt2/3) u^{3/2} - u + eps D(s) - E0|`, with the
/// dissipation integral `D` accumulated by per-step Gauss quadrature on the
/// dense output and the identity anchored at the trajectory's own initial
/// energy `E0`.
pub fn energy_residual(traj: &Trajectory) -> f64 {
    let Some(first) = traj.nodes.first() else {
        return 0.0;
    };
    let e0 = energy_lhs(State {
        u: first.u,
        du: first.du,
    });
    traj.nodes
        .iter()
        .map(|n| {
            let e = energy_lhs(State { u: n.u, du: n.du });
            (e + traj.epsilon * (n.dissipation - first.dissipation) - e0).abs()
        })
        .fold(0.0, f64::max)
}
