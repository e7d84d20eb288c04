//! Dynamics of capillary rise in a narrow vertical tube.
//!
//! The dimensionless column height `u(s)` obeys
//!
//! ```text
//! u'' + eps u' + sqrt(2 u) = 1,      u(0) = 0,  u'(0) = 0,
//! ```
//!
//! where `eps = 1/sqrt(omega)` collects the tube physics. For `eps < 2` the
//! column oscillates around the Jurin height `u = 1/2` with decaying
//! amplitude. The square-root term is not Lipschitz at `u = 0`, which makes
//! both the analysis and the numerics of the rest start nonstandard.
//!
//! The crate provides:
//!
//! - [`model`]: parameter maps, the governing vector field and the energy
//!   functional;
//! - [`integrator`]: a Dormand-Prince 5(4) solver with dense output, a local
//!   series start that handles the singular initial condition, extremum
//!   detection and an energy-residual diagnostic;
//! - [`perturbation`]: the closed-form periodic approximation `u0` (period 6,
//!   amplitude 9/8) and the two convergence studies built on it;
//! - [`asymptotics`]: the Liouville frame `u = 1/2 + phi v`, the Volterra
//!   integral equation with kernel `sin(tau z)/tau`, the Picard step, the
//!   closed-form amplitude recursion with its quadrature oracle, and the
//!   Gauss hypergeometric contraction diagnostic.
//!
//! ```
//! use capasym_core::integrator::{solve_damped, IvpSpec};
//! use capasym_core::perturbation::u0_eval;
//!
//! // damped rise from rest; compare against the periodic approximation
//! let traj = solve_damped(&IvpSpec::rest(0.8, 12.0)).unwrap();
//! let state = traj.eval(3.0).unwrap();
//! assert!(state.u < u0_eval(3.0).unwrap()); // damping lowers the first crest
//! assert!((traj.eval(12.0).unwrap().u - 0.5).abs() < 0.1); // decay toward 1/2
//! ```

pub mod asymptotics;
pub mod integrator;
pub mod model;
pub(crate) mod par;
pub mod perturbation;
pub(crate) mod quad;

pub use asymptotics::{AsymptoticCoeffs, BoundsEstimate, LiouvilleFrame};
pub use integrator::{IvpSpec, Tolerances, Trajectory};
pub use model::{DimensionlessParams, PhysicalParams, State};
pub use perturbation::{IcFamily, StudyReport};
