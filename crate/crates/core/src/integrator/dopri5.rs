//! Dormand-Prince 5(4) one-step engine with continuous output.
//!
//! The pair is the classic RK5(4)7M tableau with the first-same-as-last
//! property; the continuous extension is the standard order-4 interpolant
//! built from an extra linear combination of the stages. Stage evaluations
//! that leave the field's domain (negative height under the square root)
//! reject the step and retry with half the step size instead of clamping,
//! so the energy identity used for validation stays intact.

/// Right-hand side of a two-component first-order system.
///
/// Returning `Err(FieldViolation)` marks the stage as outside the domain of
/// the field; the engine halves the step and retries.
pub(crate) trait Field {
    fn deriv(&self, s: f64, y: [f64; 2]) -> Result<[f64; 2], FieldViolation>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FieldViolation;

/// Capillary-rise field `(u, u') -> (u', 1 - sqrt(2u) - eps u')`.
pub(crate) struct CapillaryField {
    pub epsilon: f64,
}

impl Field for CapillaryField {
    fn deriv(&self, _s: f64, y: [f64; 2]) -> Result<[f64; 2], FieldViolation> {
        if y[0] < 0.0 {
            return Err(FieldViolation);
        }
        Ok([y[1], 1.0 - (2.0 * y[0]).sqrt() - self.epsilon * y[1]])
    }
}

// Nodes and coefficients of the Dormand-Prince 5(4) pair.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// b - bhat: weights of the embedded error estimate
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights (Hairer's D coefficients for DOPRI5)
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step together with its interpolation coefficients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepDense {
    pub s0: f64,
    pub h: f64,
    cont: [[f64; 5]; 2],
}

impl StepDense {
    /// Evaluate the order-4 interpolant; `s` should lie in `[s0, s0 + h]`.
    pub fn eval(&self, s: f64) -> [f64; 2] {
        let theta = (s - self.s0) / self.h;
        let mut out = [0.0; 2];
        for (i, c) in self.cont.iter().enumerate() {
            out[i] = c[0]
                + theta * (c[1] + (1.0 - theta) * (c[2] + theta * (c[3] + (1.0 - theta) * c[4])));
        }
        out
    }
}

/// Piecewise-polynomial solution on an increasing sequence of steps.
#[derive(Debug, Clone, Default)]
pub(crate) struct DenseOutput {
    pub steps: Vec<StepDense>,
}

impl DenseOutput {
    pub fn s_start(&self) -> f64 {
        self.steps.first().map_or(f64::NAN, |st| st.s0)
    }

    pub fn s_end(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |st| st.s0 + st.h)
    }

    /// Evaluate at `s`; out-of-range arguments are the caller's bug and map
    /// to the nearest step.
    pub fn eval(&self, s: f64) -> [f64; 2] {
        let idx = self
            .steps
            .partition_point(|st| st.s0 + st.h < s)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(s)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct EngineStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

pub(crate) struct EngineOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Stop cleanly when an accepted node has `u <= floor` while moving
    /// down; used by the undamped solver to hand zero contacts to the
    /// restart logic instead of grinding the step size to nothing.
    pub u_floor: Option<f64>,
    pub max_steps: usize,
}

impl EngineOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            u_floor: None,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop {
    Completed,
    Floor { s: f64, y: [f64; 2] },
}

pub(crate) struct Run {
    pub dense: DenseOutput,
    pub y_end: [f64; 2],
    pub stop: Stop,
    pub stats: EngineStats,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum EngineError {
    /// Step size collapsed (or 40 domain halvings were exhausted) while the
    /// height pinned the solver against `u = 0`.
    SingularPoint {
        s: f64,
        u: f64,
    },
    MaxSteps {
        s: f64,
    },
}

type StageOutcome = ([f64; 2], [f64; 2], [[f64; 2]; 7]);

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 10.0;
const MAX_DOMAIN_HALVINGS: u32 = 40;

fn error_norm(err: &[f64; 2], y0: &[f64; 2], y1: &[f64; 2], atol: f64, rtol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sk = atol + rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sk;
        acc += r * r;
    }
    (acc / 2.0).sqrt()
}

/// Initial step size guess (Hairer's HINIT, trimmed to this problem).
fn initial_step(
    field: &dyn Field,
    s0: f64,
    y0: [f64; 2],
    f0: [f64; 2],
    span: f64,
    opts: &EngineOptions,
    stats: &mut EngineStats,
) -> f64 {
    let (atol, rtol) = (opts.abs_tol, opts.rel_tol);
    let sk = [atol + rtol * y0[0].abs(), atol + rtol * y0[1].abs()];
    let d0 = ((y0[0] / sk[0]).powi(2) + (y0[1] / sk[1]).powi(2)).sqrt();
    let d1 = ((f0[0] / sk[0]).powi(2) + (f0[1] / sk[1]).powi(2)).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    // Euler probe; shrink if it leaves the domain
    let mut f1 = None;
    for _ in 0..12 {
        let y1 = [y0[0] + h0 * f0[0], y0[1] + h0 * f0[1]];
        stats.rhs_evals += 1;
        match field.deriv(s0 + h0, y1) {
            Ok(f) => {
                f1 = Some(f);
                break;
            }
            Err(_) => h0 *= 0.1,
        }
    }
    let Some(f1) = f1 else {
        return (1e-10 * span).max(1e-14);
    };
    let d2 = (((f1[0] - f0[0]) / sk[0]).powi(2) + ((f1[1] - f0[1]) / sk[1]).powi(2)).sqrt() / h0;
    let d12 = d1.max(d2);
    let h1 = if d12 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d12).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

pub(crate) fn integrate(
    field: &dyn Field,
    s0: f64,
    y0: [f64; 2],
    s_end: f64,
    opts: &EngineOptions,
) -> Result<Run, EngineError> {
    debug_assert!(s_end > s0);
    let mut stats = EngineStats::default();
    let mut dense = DenseOutput::default();

    let mut s = s0;
    let mut y = y0;
    let mut k1 = field
        .deriv(s, y)
        .map_err(|_| EngineError::SingularPoint { s, u: y[0] })?;
    stats.rhs_evals += 1;
    let mut h = initial_step(field, s, y, k1, s_end - s0, opts, &mut stats);
    let mut domain_halvings = 0u32;
    let mut just_rejected = false;

    while s < s_end {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(EngineError::MaxSteps { s });
        }
        h = h.min(s_end - s);
        if h <= 4.0 * f64::EPSILON * s.abs().max(1.0) {
            return Err(EngineError::SingularPoint { s, u: y[0] });
        }

        // stages (k1 from FSAL)
        let stage = |ks: &[[f64; 2]], a: &[f64]| {
            let mut out = y;
            for (k, w) in ks.iter().zip(a) {
                out[0] += h * w * k[0];
                out[1] += h * w * k[1];
            }
            out
        };
        let result = (|| -> Result<StageOutcome, FieldViolation> {
            let k2 = field.deriv(s + C[1] * h, stage(&[k1], &A2))?;
            let k3 = field.deriv(s + C[2] * h, stage(&[k1, k2], &A3))?;
            let k4 = field.deriv(s + C[3] * h, stage(&[k1, k2, k3], &A4))?;
            let k5 = field.deriv(s + C[4] * h, stage(&[k1, k2, k3, k4], &A5))?;
            let k6 = field.deriv(s + C[5] * h, stage(&[k1, k2, k3, k4, k5], &A6))?;
            let ks6 = [k1, k2, k3, k4, k5, k6];
            let mut y1 = y;
            for (k, w) in ks6.iter().zip(&B[..6]) {
                y1[0] += h * w * k[0];
                y1[1] += h * w * k[1];
            }
            let k7 = field.deriv(s + h, y1)?;
            Ok((y1, k7, [k1, k2, k3, k4, k5, k6, k7]))
        })();

        let (y1, k7, ks) = match result {
            Ok(v) => {
                stats.rhs_evals += 6;
                v
            }
            Err(_) => {
                stats.rejected += 1;
                domain_halvings += 1;
                if domain_halvings > MAX_DOMAIN_HALVINGS {
                    return Err(EngineError::SingularPoint { s, u: y[0] });
                }
                h *= 0.5;
                just_rejected = true;
                continue;
            }
        };

        let mut err = [0.0; 2];
        for (k, w) in ks.iter().zip(&E) {
            err[0] += h * w * k[0];
            err[1] += h * w * k[1];
        }
        let err_norm = error_norm(&err, &y, &y1, opts.abs_tol, opts.rel_tol);

        if err_norm <= 1.0 {
            // interpolation coefficients for this step
            let ydiff = [y1[0] - y[0], y1[1] - y[1]];
            let mut cont = [[0.0; 5]; 2];
            let mut d_comb = [0.0; 2];
            for (k, w) in ks.iter().zip(&D) {
                d_comb[0] += w * k[0];
                d_comb[1] += w * k[1];
            }
            for i in 0..2 {
                let bspl = h * ks[0][i] - ydiff[i];
                cont[i] = [
                    y[i],
                    ydiff[i],
                    bspl,
                    ydiff[i] - h * k7[i] - bspl,
                    h * d_comb[i],
                ];
            }
            dense.steps.push(StepDense { s0: s, h, cont });

            stats.accepted += 1;
            s += h;
            y = y1;
            k1 = k7;
            domain_halvings = 0;

            if let Some(floor) = opts.u_floor {
                if y[0] <= floor && y[1] < 0.0 {
                    return Ok(Run {
                        dense,
                        y_end: y,

                        stop: Stop::Floor { s, y },
                        stats,
                    });
                }
            }

            let max_scale = if just_rejected { 1.0 } else { MAX_SCALE };
            just_rejected = false;
            let scale = if err_norm == 0.0 {
                max_scale
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, max_scale)
            };
            h *= scale;
        } else {
            stats.rejected += 1;
            just_rejected = true;
            h *= (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, 1.0);
        }
    }

    Ok(Run {
        dense,
        y_end: y,

        stop: Stop::Completed,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl Field for Harmonic {
        fn deriv(&self, _s: f64, y: [f64; 2]) -> Result<[f64; 2], FieldViolation> {
            Ok([y[1], -y[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let opts = EngineOptions::new(1e-12, 1e-12);
        let run = integrate(&Harmonic, 0.0, [1.0, 0.0], 20.0, &opts).unwrap();
        assert!((run.y_end[0] - 20.0_f64.cos()).abs() < 1e-9);
        assert!((run.y_end[1] + 20.0_f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_solution_inside_steps() {
        let opts = EngineOptions::new(1e-11, 1e-11);
        let run = integrate(&Harmonic, 0.0, [1.0, 0.0], 12.0, &opts).unwrap();
        let mut worst = 0.0_f64;
        for step in &run.dense.steps {
            for frac in [0.17, 0.5, 0.83] {
                let s = step.s0 + frac * step.h;
                let got = step.eval(s);
                worst = worst
                    .max((got[0] - s.cos()).abs())
                    .max((got[1] + s.sin()).abs());
            }
        }
        assert!(worst < 1e-9, "dense output error {worst}");
    }

    #[test]
    fn observed_order_is_near_five() {
        // fixed interval, error against a much tighter run, order from the
        // mean accepted step size
        let reference = {
            let opts = EngineOptions::new(1e-13, 1e-13);
            integrate(&Harmonic, 0.0, [0.3, -0.2], 10.0, &opts)
                .unwrap()
                .y_end
        };
        let mut points = Vec::new();
        for tol in [1e-5, 1e-6, 1e-7, 1e-8, 1e-9] {
            let opts = EngineOptions::new(tol, tol);
            let run = integrate(&Harmonic, 0.0, [0.3, -0.2], 10.0, &opts).unwrap();
            let err = (run.y_end[0] - reference[0])
                .abs()
                .max((run.y_end[1] - reference[1]).abs());
            let mean_h = 10.0 / run.stats.accepted as f64;
            points.push((mean_h.ln(), err.max(1e-16).ln()));
        }
        let n = points.len() as f64;
        let (sx, sy): (f64, f64) = points
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let slope = {
            let (mut num, mut den) = (0.0, 0.0);
            for (x, y) in &points {
                num += (x - sx / n) * (y - sy / n);
                den += (x - sx / n) * (x - sx / n);
            }
            num / den
        };
        assert!((slope - 5.0).abs() < 0.7, "observed order {slope}");
    }

    #[test]
    fn capillary_field_rejects_negative_height() {
        let f = CapillaryField { epsilon: 0.5 };
        assert!(f.deriv(0.0, [-1e-15, 0.0]).is_err());
        let d = f.deriv(0.0, [0.5, 0.0]).unwrap();
        assert!(d[1].abs() < 1e-15);
    }
}
