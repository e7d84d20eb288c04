//! Physical and dimensionless parameterizations of the capillary-rise
//! problem, the governing vector field and the energy functional.
//!
//! The physical balance for the column height `h(t)` in a tube of radius `r`
//! reduces, after nondimensionalization, to
//!
//! ```text
//! u'' + eps u' + sqrt(2 u) = 1
//! ```
//!
//! with `eps = 1/sqrt(omega)` and
//!
//! ```text
//! omega = rho^3 g^2 r^5 / (128 mu^2 gamma cos(theta)).
//! ```

use thiserror::Error;

/// Errors produced by parameter construction and field evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter `{0}` must be strictly positive and finite, got {1}")]
    NonPositive(&'static str, f64),
    #[error("contact angle must lie in [0, pi/2) so that cos(theta) > 0, got {0}")]
    ContactAngle(f64),
    #[error("dimensionless height must be nonnegative, got u = {0}")]
    NegativeHeight(f64),
    #[error("dimensionless group `{0}` must be strictly positive and finite, got {1}")]
    BadDimensionless(&'static str, f64),
}

/// Tube and fluid properties in SI units.
///
/// `viscosity` is the dynamic viscosity; the contact angle is taken in
/// radians and must satisfy `cos(theta) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Fluid density `rho` [kg/m^3].
    pub density: f64,
    /// Gravitational acceleration `g` [m/s^2].
    pub gravity: f64,
    /// Tube radius `r` [m].
    pub radius: f64,
    /// Dynamic viscosity `mu` [Pa s].
    pub viscosity: f64,
    /// Surface tension `gamma` [N/m].
    pub surface_tension: f64,
    /// Static contact angle `theta` [rad], in `[0, pi/2)`.
    pub contact_angle: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("density", self.density),
            ("gravity", self.gravity),
            ("radius", self.radius),
            ("viscosity", self.viscosity),
            ("surface_tension", self.surface_tension),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive(name, value));
            }
        }
        if !self.contact_angle.is_finite()
            || self.contact_angle < 0.0
            || self.contact_angle >= std::f64::consts::FRAC_PI_2
        {
            return Err(ModelError::ContactAngle(self.contact_angle));
        }
        Ok(())
    }
}

/// The derived pair `(omega, eps)` with `eps = 1/sqrt(omega)` exact to
/// round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    omega: f64,
    epsilon: f64,
}

impl DimensionlessParams {
    pub fn from_omega(omega: f64) -> Result<Self, ModelError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ModelError::BadDimensionless("omega", omega));
        }
        Ok(Self {
            omega,
            epsilon: 1.0 / omega.sqrt(),
        })
    }

    pub fn from_epsilon(epsilon: f64) -> Result<Self, ModelError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ModelError::BadDimensionless("epsilon", epsilon));
        }
        Ok(Self {
            omega: 1.0 / (epsilon * epsilon),
            epsilon,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// True when the column oscillates around the Jurin height (`eps < 2`)
    /// rather than rising monotonically.
    pub fn oscillatory_regime(&self) -> bool {
        self.epsilon < 2.0
    }
}

/// Dimensionless state `(u, u')` of the column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub u: f64,
    pub du: f64,
}

impl State {
    pub const REST: State = State { u: 0.0, du: 0.0 };

    pub fn new(u: f64, du: f64) -> Self {
        Self { u, du }
    }
}

/// Time derivative of a [`State`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deriv {
    pub du: f64,
    pub ddu: f64,
}

/// Map tube physics to the dimensionless pair:
/// `omega = rho^3 g^2 r^5 / (128 mu^2 gamma cos(theta))`.
pub fn omega_from_physical(p: &PhysicalParams) -> Result<DimensionlessParams, ModelError> {
    p.validate()?;
    let num = p.density.powi(3) * p.gravity.powi(2) * p.radius.powi(5);
    let den = 128.0 * p.viscosity.powi(2) * p.surface_tension * p.contact_angle.cos();
    DimensionlessParams::from_omega(num / den)
}

/// The governing vector field: `(u, u') -> (u', 1 - sqrt(2u) - eps u')`.
///
/// A negative `u` is reported as an error rather than clamped; it signals an
/// integrator overshoot and the caller owns the retry policy.
pub fn rhs(state: State, epsilon: f64) -> Result<Deriv, ModelError> {
    if state.u < 0.0 {
        return Err(ModelError::NegativeHeight(state.u));
    }
    Ok(Deriv {
        du: state.du,
        ddu: 1.0 - (2.0 * state.u).sqrt() - epsilon * state.du,
    })
}

/// Left-hand side of the energy equation:
/// `u'^2/2 + (2 sqrt(2)/3) u^(3/2) - u`.
///
/// Along a solution this equals `-eps int_0^s u'^2 dt`, so it vanishes
/// identically for the undamped problem started from rest and is strictly
/// negative once damping acts.
pub fn energy_lhs(state: State) -> f64 {
    debug_assert!(state.u >= 0.0, "energy_lhs outside domain: u = {}", state.u);
    let u = state.u.max(0.0);
    0.5 * state.du * state.du + (2.0 * std::f64::consts::SQRT_2 / 3.0) * u.powf(1.5) - u
}
