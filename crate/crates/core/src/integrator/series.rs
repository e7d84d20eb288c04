//! Local power-series start for the rest initial condition.
//!
//! The square root in the governing equation is not Lipschitz at `u = 0`, so
//! the stepper cannot be launched from `(0, 0)` directly. Matching
//! `u = sum c_k s^k` term by term in `u'' + eps u' + sqrt(2u) = 1` gives
//!
//! ```text
//! c2 = 1/2
//! c3 = -(1 + eps) / 6
//! c4 = (1 + eps)(1 + 3 eps) / 72
//! c5 = -eps (1 + eps)(1 + 2 eps) / 240
//! ```
//!
//! For `eps = 0` the truncation is exact: it reproduces the closed-form
//! periodic solution `s^2/2 - s^3/6 + s^4/72` on a whole arc. The truncated
//! expansion stays inside the small-time corridor
//! `s^2/6 <= u <= s^2/2` on the handoff interval, which is what validates
//! using it as a starter.

use crate::model::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SeriesCoeffs {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl SeriesCoeffs {
    pub fn for_epsilon(epsilon: f64) -> Self {
        let e = epsilon;
        Self {
            c2: 0.5,
            c3: -(1.0 + e) / 6.0,
            c4: (1.0 + e) * (1.0 + 3.0 * e) / 72.0,
            c5: -e * (1.0 + e) * (1.0 + 2.0 * e) / 240.0,
        }
    }

    /// Evaluate `(u, u')` at elapsed time `x` since the rest point.
    pub fn eval(&self, x: f64) -> State {
        let u = ((((self.c5 * x) + self.c4) * x + self.c3) * x + self.c2) * x * x;
        let du =
            (((5.0 * self.c5 * x + 4.0 * self.c4) * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x;
        State { u, du }
    }
}

/// Default handoff time from the series to the adaptive stepper.
pub fn default_series_switch(epsilon: f64) -> f64 {
    0.1 * f64::min(1e-3, 2.0 / (1.0 + epsilon))
}
