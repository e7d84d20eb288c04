//! Exponentially damped trigonometric moment integrals.
//!
//! The amplitude recursion consumes the `s -> infinity` limits
//!
//! ```text
//! J1 = int_T^inf e^{-lam t} sin^j(tau t) cos^{k+1}(tau t) dt
//! J2 = int_T^inf e^{-lam t} sin^{j+1}(tau t) cos^k(tau t) dt
//! ```
//!
//! with `lam = m eps / 2` and `j + k = m + 1`. Expanding the trigonometric
//! powers over complex exponentials and integrating termwise yields a double
//! sum over `(l, p)` with denominators `nu^2 + lam^2`,
//! `nu = tau (j - 2l + k + 1 - 2p)`. The printed case tables this derives
//! from carry sign typos, so the closed forms here were reconciled term by
//! term against the quadrature oracle below; the oracle stays available at
//! runtime for the validation command.

use super::{AsymptoticsError, LiouvilleFrame};
use crate::quad;

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn check_shape(j: u32, k: u32, m: u32) -> Result<(), AsymptoticsError> {
    if m < 1 || j + k != m + 1 {
        return Err(AsymptoticsError::MomentShape { j, k, m });
    }
    Ok(())
}

/// Closed form of `J1`; requires `j + k = m + 1` and a strictly positive
/// decay rate (the integral need not converge at `eps = 0`).
pub fn j1_closed(
    j: u32,
    k: u32,
    m: u32,
    frame: &LiouvilleFrame,
    t_anchor: f64,
) -> Result<f64, AsymptoticsError> {
    check_shape(j, k, m)?;
    let lam = frame.lambda(m);
    let tau = frame.tau();
    let mut total = 0.0;
    for l in 0..=j {
        for p in 0..=(k + 1) {
            let q = j as f64 - 2.0 * l as f64 + (k + 1) as f64 - 2.0 * p as f64;
            let nu = tau * q;
            let phase = nu * t_anchor;
            let f = if j.is_multiple_of(2) {
                lam * phase.cos() - nu * phase.sin()
            } else {
                lam * phase.sin() + nu * phase.cos()
            };
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            total += binomial(j, l) * binomial(k + 1, p) * sign * f / (nu * nu + lam * lam);
        }
    }
    let r_sign = if (j / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(r_sign * (-lam * t_anchor).exp() * total / 2f64.powi((j + k + 1) as i32))
}

/// Closed form of `J2`; same contract as [`j1_closed`].
pub fn j2_closed(
    j: u32,
    k: u32,
    m: u32,
    frame: &LiouvilleFrame,
    t_anchor: f64,
) -> Result<f64, AsymptoticsError> {
    check_shape(j, k, m)?;
    let lam = frame.lambda(m);
    let tau = frame.tau();
    let r_sign = if (j / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    // sin^{j+1}: parity flips relative to J1
    let (even_power, outer_sign) = if (j + 1).is_multiple_of(2) {
        (true, -r_sign)
    } else {
        (false, r_sign)
    };
    let mut total = 0.0;
    for l in 0..=(j + 1) {
        for p in 0..=k {
            let q = (j + 1) as f64 - 2.0 * l as f64 + k as f64 - 2.0 * p as f64;
            let nu = tau * q;
            let phase = nu * t_anchor;
            let f = if even_power {
                lam * phase.cos() - nu * phase.sin()
            } else {
                lam * phase.sin() + nu * phase.cos()
            };
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            total += binomial(j + 1, l) * binomial(k, p) * sign * f / (nu * nu + lam * lam);
        }
    }
    Ok(outer_sign * (-lam * t_anchor).exp() * total / 2f64.powi((j + k + 1) as i32))
}

/// Quadrature oracle for `J1`: period-panel Gauss integration carried until
/// the exponential tail is below 1e-17 of the leading scale.
pub fn j1_quadrature(
    j: u32,
    k: u32,
    m: u32,
    frame: &LiouvilleFrame,
    t_anchor: f64,
) -> Result<f64, AsymptoticsError> {
    check_shape(j, k, m)?;
    let tau = frame.tau();
    let integrand = move |t: f64, lam: f64| {
        (-lam * t).exp() * (tau * t).sin().powi(j as i32) * (tau * t).cos().powi((k + 1) as i32)
    };
    Ok(damped_trig_integral(
        frame.lambda(m),
        tau,
        t_anchor,
        &integrand,
    ))
}

/// Quadrature oracle for `J2`.
pub fn j2_quadrature(
    j: u32,
    k: u32,
    m: u32,
    frame: &LiouvilleFrame,
    t_anchor: f64,
) -> Result<f64, AsymptoticsError> {
    check_shape(j, k, m)?;
    let tau = frame.tau();
    let integrand = move |t: f64, lam: f64| {
        (-lam * t).exp() * (tau * t).sin().powi((j + 1) as i32) * (tau * t).cos().powi(k as i32)
    };
    Ok(damped_trig_integral(
        frame.lambda(m),
        tau,
        t_anchor,
        &integrand,
    ))
}

fn damped_trig_integral(lam: f64, tau: f64, t_anchor: f64, f: &dyn Fn(f64, f64) -> f64) -> f64 {
    // one fundamental period per panel; a 30-point rule resolves the at
    // most (m+2)-th harmonic far below round-off
    let period = 2.0 * std::f64::consts::PI / tau;
    let horizon = t_anchor + 17.0 * std::f64::consts::LN_10 / lam;
    let mut acc = 0.0;
    let mut left = t_anchor;
    while left < horizon {
        let right = (left + period).min(horizon);
        let mut g = |t: f64| f(t, lam);
        acc += quad::gauss(&mut g, left, right, 30);
        left = right;
    }
    acc
}
