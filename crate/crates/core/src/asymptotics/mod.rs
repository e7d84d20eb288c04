//! Large-time asymptotics of the oscillatory regime.
//!
//! For `0 < eps < 2` the substitution `u = 1/2 + phi v` with
//! `phi(s) = e^{-eps s/2}` removes the damping term and leaves the
//! frequency-modulated oscillator
//!
//! ```text
//! v'' + (2 / (1 + sqrt(1 + 2 phi v)) - eps^2/4) v = 0.
//! ```
//!
//! With the Green kernel `G(z) = sin(tau z)/tau`, `tau = sqrt(1 - eps^2/4)`,
//! the problem anchored at time `T` becomes a Volterra integral equation
//! whose nonlinearity expands in powers of `phi v` with generalized-binomial
//! coefficients `sigma_m`. Picard iteration on that equation is implemented
//! twice: once numerically (adaptive quadrature, any continuous input
//! function) and once in closed form, where each iterate is a pure sinusoid
//! `A_n sin(tau s) + B_n cos(tau s)` and the amplitude update consumes the
//! damped trigonometric moments `J1`/`J2`. A hypergeometric bound `H` on
//! the weighted-norm contraction factor rounds out the toolkit.
//!
//! Sign conventions worth noting: the decaying `phi` forces
//! `v'(0) = -eps/4` at the rest start, and the free oscillation pairs `A`
//! with `sin` and `B` with `cos`; both choices are validated against the
//! reference integrator.

mod hyp2f1;
mod moments;

pub use hyp2f1::{hyp2f1, pochhammer};
pub use moments::{j1_closed, j1_quadrature, j2_closed, j2_quadrature};

use crate::integrator::{
    self, integrate, EngineOptions, Field, FieldViolation, IntegratorError, IvpSpec, Tolerances,
    Trajectory,
};
use crate::quad;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("Liouville frame needs 0 < eps < 2, got {0}")]
    BadFrame(f64),
    #[error("domain violation: {what} (value {value})")]
    Domain { what: &'static str, value: f64 },
    #[error("moment integral shape violated: need j + k = m + 1, m >= 1 (j={j}, k={k}, m={m})")]
    MomentShape { j: u32, k: u32, m: u32 },
    #[error("series divergence risk: |phi v| = {phi_v} >= 1/2 at s = {s}")]
    SeriesDivergenceRisk { s: f64, phi_v: f64 },
    #[error("amplitude recursion produced a non-finite term at m = {m} (iteration {iteration})")]
    DivergentRecursion { m: u32, iteration: u32 },
    #[error("evaluation at s = {s} precedes the anchor time T = {t_anchor}")]
    BeforeAnchor { s: f64, t_anchor: f64 },
    #[error("trajectory horizon too short: the tail bounds never hold with margin {margin}")]
    InsufficientHorizon { margin: f64 },
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

/// The Liouville transform data for one damping strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleFrame {
    epsilon: f64,
    tau: f64,
}

impl LiouvilleFrame {
    pub fn new(epsilon: f64) -> Result<Self, AsymptoticsError> {
        if !(epsilon > 0.0 && epsilon < 2.0) {
            return Err(AsymptoticsError::BadFrame(epsilon));
        }
        Ok(Self {
            epsilon,
            tau: (1.0 - 0.25 * epsilon * epsilon).sqrt(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Reduced frequency `tau = sqrt(1 - eps^2/4)`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Amplitude weight `phi(s) = e^{-eps s/2}`, strictly decreasing to 0.
    pub fn phi(&self, s: f64) -> f64 {
        (-0.5 * self.epsilon * s).exp()
    }

    /// Decay rate of `phi^m`: `lambda(m) = m eps / 2`.
    pub fn lambda(&self, m: u32) -> f64 {
        0.5 * m as f64 * self.epsilon
    }
}

/// `(u, u') -> (v, v')` with `v = (u - 1/2)/phi(s)`.
pub fn to_v(u: f64, du: f64, frame: &LiouvilleFrame, s: f64) -> (f64, f64) {
    let phi = frame.phi(s);
    let v = (u - 0.5) / phi;
    let dv = du / phi + 0.5 * frame.epsilon() * v;
    (v, dv)
}

/// Inverse of [`to_v`].
pub fn from_v(v: f64, dv: f64, frame: &LiouvilleFrame, s: f64) -> (f64, f64) {
    let phi = frame.phi(s);
    let u = 0.5 + phi * v;
    let du = phi * (dv - 0.5 * frame.epsilon() * v);
    (u, du)
}

/// Residual of the transformed oscillator,
/// `v'' + (2/(1 + sqrt(1 + 2 phi v)) - eps^2/4) v`.
pub fn transformed_defect(
    v: f64,
    dv: f64,
    ddv: f64,
    frame: &LiouvilleFrame,
    s: f64,
) -> Result<f64, AsymptoticsError> {
    let _ = dv;
    let w = 1.0 + 2.0 * frame.phi(s) * v;
    if w <= 0.0 {
        return Err(AsymptoticsError::Domain {
            what: "1 + 2 phi v must stay positive",
            value: w,
        });
    }
    let coeff = 2.0 / (1.0 + w.sqrt()) - 0.25 * frame.epsilon() * frame.epsilon();
    Ok(ddv + coeff * v)
}

/// Expansion coefficient of the square-root nonlinearity:
/// `sigma_m = binom(1/2, m+1) 2^{m+1} = (-1)^m (2m-1)!!/(m+1)!`,
/// evaluated in exact integer rationals and returned as `f64` (a recurrence
/// takes over where the integers would overflow, beyond m = 33).
pub fn sigma(m: u32) -> f64 {
    assert!(m >= 1, "sigma is defined for m >= 1");
    fn exact(m: u32) -> Option<f64> {
        let mut num: i128 = 1;
        let mut den: i128 = 1;
        for i in 1..=m as i128 {
            num = num.checked_mul(2 * i - 1)?;
        }
        for i in 2..=(m as i128 + 1) {
            den = den.checked_mul(i)?;
        }
        let g = gcd(num, den);
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some(sign * (num / g) as f64 / (den / g) as f64)
    }
    if let Some(v) = exact(m) {
        return v;
    }
    let mut s = -0.5;
    for i in 1..m {
        s = s * (-((2 * i + 1) as f64)) / (i + 2) as f64;
    }
    s
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs().max(1)
}

/// Distance between the truncated sigma-series and the function it expands:
/// `|sum_{m=1}^{N} sigma_m x^{m+1} - (sqrt(1 + 2x) - 1 - x)|`.
///
/// `sigma_fn` is injectable so a deliberately perturbed coefficient stream
/// can be detected by the validation command.
pub fn sigma_series_residual(truncation: u32, x: f64, sigma_fn: &dyn Fn(u32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut xp = x * x;
    for m in 1..=truncation {
        sum += sigma_fn(m) * xp;
        xp *= x;
    }
    (sum - ((1.0 + 2.0 * x).sqrt() - 1.0 - x)).abs()
}

/// Free-oscillation amplitudes matching the anchor data:
/// `v0(s) = A0 sin(tau s) + B0 cos(tau s)` with `v0(T) = v(T)`,
/// `v0'(T) = v'(T)`.
pub fn initial_coeffs(v_t: f64, dv_t: f64, t_anchor: f64, frame: &LiouvilleFrame) -> (f64, f64) {
    let tau = frame.tau();
    let (sin_t, cos_t) = (tau * t_anchor).sin_cos();
    let a0 = dv_t * cos_t / tau + v_t * sin_t;
    let b0 = v_t * cos_t - dv_t * sin_t / tau;
    (a0, b0)
}

/// Amplitudes of the n-th closed-form Picard iterate.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticCoeffs {
    pub t_anchor: f64,
    /// Iteration index; `n = 0` is the free oscillation.
    pub n: u32,
    pub a: f64,
    pub b: f64,
    /// Truncation order of the m-sum.
    pub truncation: u32,
    /// Anchor data `(v(T), v'(T))` the recursion started from.
    pub v_anchor: (f64, f64),
}

/// Run `n` applications of the amplitude recursion
///
/// ```text
/// A_{next} = A0 - (1/tau) sum_m sigma_m sum_{j+k=m+1} binom(m+1, j) A^j B^k J1
/// B_{next} = B0 + (1/tau) sum_m sigma_m sum_{j+k=m+1} binom(m+1, j) A^j B^k J2
/// ```
///
/// truncating the m-sum at `truncation` (the figure presets use 30).
pub fn coeff_iterate(
    frame: &LiouvilleFrame,
    t_anchor: f64,
    v_t: f64,
    dv_t: f64,
    n: u32,
    truncation: u32,
) -> Result<AsymptoticCoeffs, AsymptoticsError> {
    if truncation < 1 {
        return Err(AsymptoticsError::Domain {
            what: "truncation order",
            value: truncation as f64,
        });
    }
    let (a0, b0) = initial_coeffs(v_t, dv_t, t_anchor, frame);
    let tau = frame.tau();

    // moment tables, independent of the iterate
    let mut table = Vec::new();
    for m in 1..=truncation {
        let sig = sigma(m);
        for j in 0..=(m + 1) {
            let k = m + 1 - j;
            let w = binom_f64(m + 1, j) * sig;
            table.push((
                m,
                j,
                w,
                j1_closed(j, k, m, frame, t_anchor)?,
                j2_closed(j, k, m, frame, t_anchor)?,
            ));
        }
    }

    let (mut a, mut b) = (a0, b0);
    for it in 0..n {
        let (mut s1, mut s2) = (0.0, 0.0);
        for &(m, j, w, j1, j2) in &table {
            let k = m + 1 - j;
            let term = w * a.powi(j as i32) * b.powi(k as i32);
            s1 += term * j1;
            s2 += term * j2;
            if !(s1.is_finite() && s2.is_finite()) {
                return Err(AsymptoticsError::DivergentRecursion {
                    m,
                    iteration: it + 1,
                });
            }
        }
        a = a0 - s1 / tau;
        b = b0 + s2 / tau;
    }
    Ok(AsymptoticCoeffs {
        t_anchor,
        n,
        a,
        b,
        truncation,
        v_anchor: (v_t, dv_t),
    })
}

fn binom_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `v`-frame value of an asymptotic iterate at `s >= T`.
pub fn asym_eval(
    coeffs: &AsymptoticCoeffs,
    frame: &LiouvilleFrame,
    s: f64,
) -> Result<f64, AsymptoticsError> {
    if s < coeffs.t_anchor {
        return Err(AsymptoticsError::BeforeAnchor {
            s,
            t_anchor: coeffs.t_anchor,
        });
    }
    let tau = frame.tau();
    Ok(coeffs.a * (tau * s).sin() + coeffs.b * (tau * s).cos())
}

/// Height-frame value `u = 1/2 + phi(s) v` of an asymptotic iterate.
pub fn asym_eval_u(
    coeffs: &AsymptoticCoeffs,
    frame: &LiouvilleFrame,
    s: f64,
) -> Result<f64, AsymptoticsError> {
    Ok(0.5 + frame.phi(s) * asym_eval(coeffs, frame, s)?)
}

/// Output of one numeric Picard application.
#[derive(Debug, Clone)]
pub struct PicardStep {
    /// `P v` sampled on the caller's grid.
    pub values: Vec<f64>,
    /// Magnitude estimate of the first omitted m-term.
    pub truncation_bound: f64,
}

/// Apply the integral-equation operator to a continuous function:
///
/// ```text
/// (P v)(s) = A0 sin(tau s) + B0 cos(tau s)
///            - sum_{m=1}^{N} sigma_m int_T^s G(s - t) phi^m v^{m+1} dt
/// ```
///
/// evaluated on `grid` (ascending, starting at or after `T`). Expanding the
/// kernel turns the convolution into two running integrals, computed by
/// adaptive quadrature with an absolute budget of `quad_tol` over the whole
/// interval. Requires `sup |phi v| < 1/2` on the interval, otherwise the
/// power series behind the m-sum is at risk of divergence.
#[allow(clippy::too_many_arguments)]
pub fn picard_step_numeric(
    v_fn: &dyn Fn(f64) -> f64,
    frame: &LiouvilleFrame,
    a0: f64,
    b0: f64,
    truncation: u32,
    quad_tol: f64,
    t_anchor: f64,
    grid: &[f64],
) -> Result<PicardStep, AsymptoticsError> {
    if truncation < 1 {
        return Err(AsymptoticsError::Domain {
            what: "truncation order",
            value: truncation as f64,
        });
    }
    let Some((&first, &last)) = grid.first().zip(grid.last()) else {
        return Ok(PicardStep {
            values: Vec::new(),
            truncation_bound: 0.0,
        });
    };
    if first < t_anchor {
        return Err(AsymptoticsError::BeforeAnchor { s: first, t_anchor });
    }
    let tau = frame.tau();
    // guard the expansion and size the truncation estimate in one sweep
    let mut trunc_bound = 0.0_f64;
    let n_probe = 512;
    for i in 0..=n_probe {
        let s = t_anchor + (last - t_anchor) * i as f64 / n_probe as f64;
        let v = v_fn(s);
        let pv = frame.phi(s) * v;
        if pv.abs() >= 0.5 {
            return Err(AsymptoticsError::SeriesDivergenceRisk { s, phi_v: pv.abs() });
        }
        trunc_bound =
            trunc_bound.max((sigma(truncation + 1) * pv.powi(truncation as i32 + 1) * v).abs());
    }
    trunc_bound *= (last - t_anchor) / tau;

    let q = |t: f64| {
        let v = v_fn(t);
        let pv = frame.phi(t) * v;
        let mut acc = 0.0;
        let mut pw = pv;
        for m in 1..=truncation {
            acc += sigma(m) * pw * v;
            pw *= pv;
        }
        acc
    };

    let span = (last - t_anchor).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(grid.len());
    let (mut int_cos, mut int_sin) = (0.0, 0.0);
    let mut prev = t_anchor;
    for &s in grid {
        if s < prev {
            return Err(AsymptoticsError::Domain {
                what: "grid must be ascending",
                value: s,
            });
        }
        if s > prev {
            let tol = quad_tol * (s - prev) / span;
            let mut fc = |t: f64| (tau * t).cos() * q(t);
            int_cos += quad::adaptive(&mut fc, prev, s, tol);
            let mut fs = |t: f64| (tau * t).sin() * q(t);
            int_sin += quad::adaptive(&mut fs, prev, s, tol);
            prev = s;
        }
        let (sin_s, cos_s) = (tau * s).sin_cos();
        values.push(a0 * sin_s + b0 * cos_s - (sin_s * int_cos - cos_s * int_sin) / tau);
    }
    Ok(PicardStep {
        values,
        truncation_bound: trunc_bound,
    })
}

/// Empirical bracket `-1/2 < C1 <= u - 1/2 <= C2 < 1/2` for the tail of a
/// damped trajectory.
#[derive(Debug, Clone, Copy)]
pub struct BoundsEstimate {
    pub c1: f64,
    pub c2: f64,
    /// Earliest time from which the bracket holds with margin 1e-3.
    pub t_from: f64,
}

/// Scan a damped trajectory for the smallest time from which
/// `|u - 1/2| <= 1/2 - 1e-3` holds to the end, and return the observed
/// bounds over that tail.
pub fn bounds_estimate(
    traj: &Trajectory,
    frame: &LiouvilleFrame,
) -> Result<BoundsEstimate, AsymptoticsError> {
    let _ = frame;
    const MARGIN: f64 = 1e-3;
    // sample nodes plus located extrema (the extrema carry the true
    // envelope of u - 1/2)
    let mut points: Vec<(f64, f64)> = traj.nodes().iter().map(|n| (n.s, n.u - 0.5)).collect();
    for e in traj.extrema() {
        points.push((e.s, e.u - 0.5));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    // suffix maxima of |u - 1/2|
    let mut ok_from = None;
    let mut suffix_max = 0.0_f64;
    for (i, &(s, d)) in points.iter().enumerate().rev() {
        suffix_max = suffix_max.max(d.abs());
        if suffix_max <= 0.5 - MARGIN {
            ok_from = Some((i, s));
        }
    }
    let Some((idx, t_from)) = ok_from else {
        return Err(AsymptoticsError::InsufficientHorizon { margin: MARGIN });
    };
    let tail = &points[idx..];
    let c1 = tail.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let c2 = tail.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    Ok(BoundsEstimate { c1, c2, t_from })
}

/// Contraction diagnostic
/// `H = (-C2 / (2 alpha tau)) (2F1(1, 1.5; 3; -2 C2) - 2F1(1.5, 2; 3; -2 C2))`;
/// `|H| < 1` certifies the weighted-norm contraction for that `alpha`.
pub fn contraction_bound(alpha: f64, tau: f64, c2: f64) -> Result<f64, AsymptoticsError> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(AsymptoticsError::Domain {
            what: "alpha must be positive",
            value: alpha,
        });
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(AsymptoticsError::Domain {
            what: "tau must lie in (0, 1]",
            value: tau,
        });
    }
    if !(c2 > 0.0 && c2 < 0.5) {
        return Err(AsymptoticsError::Domain {
            what: "C2 must lie in (0, 1/2)",
            value: c2,
        });
    }
    let f1 = hyp2f1(1.0, 1.5, 3.0, -2.0 * c2)?;
    let f2 = hyp2f1(1.5, 2.0, 3.0, -2.0 * c2)?;
    Ok(-c2 / (2.0 * alpha * tau) * (f1 - f2))
}

/// Smallest `alpha` with `|H(alpha)| < 1`, found by bisection after a
/// doubling search. `H` scales exactly as `1/alpha`, so this is
/// `|H(1)|` itself, but the search keeps the diagnostic honest.
pub fn smallest_contractive_alpha(tau: f64, c2: f64) -> Result<f64, AsymptoticsError> {
    let h1 = contraction_bound(1.0, tau, c2)?.abs();
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while contraction_bound(hi, tau, c2)?.abs() >= 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if contraction_bound(mid, tau, c2)?.abs() < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!((hi - h1).abs() <= 1e-9 * h1.max(1e-9));
    Ok(hi)
}

/// The transformed oscillator as a first-order field for the engine.
struct LiouvilleVField {
    epsilon: f64,
}

impl Field for LiouvilleVField {
    fn deriv(&self, s: f64, y: [f64; 2]) -> Result<[f64; 2], FieldViolation> {
        let phi = (-0.5 * self.epsilon * s).exp();
        let w = 1.0 + 2.0 * phi * y[0];
        if w <= 0.0 {
            return Err(FieldViolation);
        }
        let coeff = 2.0 / (1.0 + w.sqrt()) - 0.25 * self.epsilon * self.epsilon;
        Ok([y[1], -coeff * y[0]])
    }
}

/// Reference solution in the `v` frame on `[T, T + window]`.
///
/// The anchor data comes from the damped height solver at `s = T`; past the
/// anchor the transformed oscillator is integrated directly, which keeps
/// the error of `v` at the tolerance scale instead of letting the
/// `1/phi` weight amplify height errors exponentially.
#[derive(Debug, Clone)]
pub struct VReference {
    dense: integrator::DenseOutput,
    pub t_anchor: f64,
    pub s_end: f64,
    /// `(v(T), v'(T))` actually used.
    pub v_anchor: (f64, f64),
}

impl VReference {
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let y = self.dense.eval(s.clamp(self.t_anchor, self.s_end));
        (y[0], y[1])
    }

    pub fn eval_v(&self, s: f64) -> f64 {
        self.eval(s).0
    }
}

/// Build a [`VReference`] for the frame: solve the height problem from rest
/// to `T`, transform the anchor state, then integrate the `v` oscillator.
pub fn transformed_reference(
    frame: &LiouvilleFrame,
    t_anchor: f64,
    window: f64,
    tolerances: Tolerances,
) -> Result<VReference, AsymptoticsError> {
    if !(t_anchor > 0.0 && window > 0.0) {
        return Err(AsymptoticsError::Domain {
            what: "anchor/window must be positive",
            value: t_anchor,
        });
    }
    let spec = IvpSpec::rest(frame.epsilon(), t_anchor).with_tolerances(tolerances);
    let traj = integrator::solve_damped(&spec)?;
    let st = traj.eval(t_anchor)?;
    let (v_t, dv_t) = to_v(st.u, st.du, frame, t_anchor);
    let field = LiouvilleVField {
        epsilon: frame.epsilon(),
    };
    let opts = EngineOptions::new(tolerances.abs, tolerances.rel);
    let run = integrate(&field, t_anchor, [v_t, dv_t], t_anchor + window, &opts).map_err(|e| {
        AsymptoticsError::Integrator(match e {
            integrator::EngineError::SingularPoint { s, u } => {
                IntegratorError::SingularPoint { s, u }
            }
            integrator::EngineError::MaxSteps { s } => IntegratorError::MaxSteps { s },
        })
    })?;
    Ok(VReference {
        dense: run.dense,
        t_anchor,
        s_end: t_anchor + window,
        v_anchor: (v_t, dv_t),
    })
}
