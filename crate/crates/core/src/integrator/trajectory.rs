//! Dense numerical solutions with interpolation, node bookkeeping and
//! extremum queries.

use super::dopri5::DenseOutput;
use super::series::SeriesCoeffs;
use super::IntegratorError;
use crate::model::{energy_lhs, State};

/// One piece of a solution: either a local series arc around a rest point or
/// a block of accepted stepper output.
#[derive(Debug, Clone)]
pub(crate) enum Segment {
    Series {
        /// Time of the rest point the expansion is centered on.
        t0: f64,
        s_from: f64,
        s_to: f64,
        coeffs: SeriesCoeffs,
    },
    Dense(DenseOutput),
}

impl Segment {
    fn s_from(&self) -> f64 {
        match self {
            Segment::Series { s_from, .. } => *s_from,
            Segment::Dense(d) => d.s_start(),
        }
    }

    fn s_to(&self) -> f64 {
        match self {
            Segment::Series { s_to, .. } => *s_to,
            Segment::Dense(d) => d.s_end(),
        }
    }

    fn eval(&self, s: f64) -> State {
        match self {
            Segment::Series { t0, coeffs, .. } => coeffs.eval(s - t0),
            Segment::Dense(d) => {
                let y = d.eval(s);
                State { u: y[0], du: y[1] }
            }
        }
    }
}

/// A node of the accepted mesh, carrying the running dissipation integral
/// `D(s) = int u'^2 dt` used by the energy diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub s: f64,
    pub u: f64,
    pub du: f64,
    pub dissipation: f64,
}

/// Kind of a located stationary point of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    pub s: f64,
    pub u: f64,
    pub kind: ExtremumKind,
}

/// Zero-height events of an undamped solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ContactKind {
    /// Grazing contact (energy ~ 0): the solution is continued by a fresh
    /// series arc from the computed touch time.
    Graze,
    /// Transversal impact (positive energy): the velocity is reflected.
    Reflect,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Contact {
    pub s: f64,
    pub kind: ContactKind,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

/// Dense solution of one initial value problem (possibly stitched across
/// zero contacts for the undamped equation).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub(crate) epsilon: f64,
    pub(crate) segments: Vec<Segment>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) contacts: Vec<Contact>,
    pub(crate) stats: SolveStats,
    pub(crate) s_start: f64,
    pub(crate) s_end: f64,
}

impl Trajectory {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn s_start(&self) -> f64 {
        self.s_start
    }

    pub fn s_end(&self) -> f64 {
        self.s_end
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Interpolated state at `s`; evaluation outside the solved interval is
    /// an error.
    pub fn eval(&self, s: f64) -> Result<State, IntegratorError> {
        let slack = 1e-12 * self.s_end.abs().max(1.0);
        if s < self.s_start - slack || s > self.s_end + slack {
            return Err(IntegratorError::OutOfDomain {
                s,
                s_start: self.s_start,
                s_end: self.s_end,
            });
        }
        let s = s.clamp(self.s_start, self.s_end);
        let idx = self
            .segments
            .partition_point(|seg| seg.s_to() < s)
            .min(self.segments.len() - 1);
        Ok(self.segments[idx].eval(s))
    }

    /// Energy functional at an interpolated point.
    pub fn energy_at(&self, s: f64) -> Result<f64, IntegratorError> {
        Ok(energy_lhs(self.eval(s)?))
    }

    /// Zero-height events of an undamped run, `(time, reflected)`: grazing
    /// contacts restart from rest, transversal impacts reflect the velocity.
    pub fn contact_events(&self) -> Vec<(f64, bool)> {
        self.contacts
            .iter()
            .map(|c| (c.s, c.kind == ContactKind::Reflect))
            .collect()
    }

    /// All stationary points of `u`, located by sign changes of the
    /// interpolated velocity and refined by bisection. Grazing contacts of
    /// the undamped problem count as minima (the height touches zero there).
    pub fn extrema(&self) -> Vec<Extremum> {
        let mut out: Vec<Extremum> = Vec::new();
        for seg in &self.segments {
            let (a, b) = (seg.s_from(), seg.s_to());
            if b <= a || b.is_nan() {
                continue;
            }
            // sample each segment finely enough to bracket every velocity
            // sign change; oscillation extrema are >= pi/tau > 3 apart, so a
            // 0.05 grid is ample
            let n = (((b - a) / 0.05).ceil() as usize).clamp(8, 100_000);
            let mut prev_s = a;
            let mut prev_du = seg.eval(a).du;
            for i in 1..=n {
                let s = a + (b - a) * i as f64 / n as f64;
                let du = seg.eval(s).du;
                if prev_du == 0.0 && du != 0.0 && prev_s == self.s_start {
                    // rest start: not an oscillation extremum
                } else if prev_du * du < 0.0 {
                    let root = bisect_velocity(seg, prev_s, s);
                    let kind = if prev_du > 0.0 {
                        ExtremumKind::Maximum
                    } else {
                        ExtremumKind::Minimum
                    };
                    out.push(Extremum {
                        s: root,
                        u: seg.eval(root).u,
                        kind,
                    });
                }
                prev_s = s;
                prev_du = du;
            }
        }
        for c in &self.contacts {
            out.push(Extremum {
                s: c.s,
                u: 0.0,
                kind: ExtremumKind::Minimum,
            });
        }
        out.sort_by(|x, y| x.s.total_cmp(&y.s));
        // contacts can duplicate a bisected minimum at the stitch boundary
        out.dedup_by(|x, y| (x.s - y.s).abs() < 1e-6 && x.kind == y.kind);
        out
    }
}

fn bisect_velocity(seg: &Segment, mut a: f64, mut b: f64) -> f64 {
    let mut fa = seg.eval(a).du;
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let fm = seg.eval(mid).du;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if b - a < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}
