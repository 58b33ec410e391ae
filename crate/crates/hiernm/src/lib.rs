//! Exact open-system dynamics of a qubit coupled to a hierarchical
//! environment: a single cavity mode that itself dissipates into a
//! Lorentzian reservoir.
//!
//! The qubit channel is fully determined by a scalar propagator G(t)
//! (`rho_ee -> rho_ee |G|^2`, `rho_eg -> rho_eg G`), obtained here along two
//! independent routes:
//!
//! * [`propagator`] inverts the rational Laplace transform exactly via cubic
//!   pole finding and partial fractions;
//! * [`oracle`] integrates the single-excitation amplitude equations with a
//!   fourth-order stepper, the memory integral localized through an
//!   auxiliary variable.
//!
//! On top of G(t), [`nm`] computes the trace-distance measure of
//! non-Markovianity (total distinguishability gain over rising intervals)
//! and classifies Markovian vs non-Markovian evolution, and [`phase`] maps
//! the Markovian/non-Markovian threshold across the coupling-strength /
//! reservoir-memory plane, including the memoryless limit where the
//! threshold is gamma/4.

pub mod cubic;
pub mod error;
pub mod extrema;
pub mod model;
pub mod nm;
pub mod oracle;
pub mod output;
pub mod phase;
pub mod propagator;
pub mod qubit;

pub use error::{Error, Result};
pub use model::{PhysParams, SpectralWidth, TimeGrid};
pub use nm::{is_markovian, nm_auto, nm_optimal_pair, optimize_pairs, NMResult};
pub use phase::{sweep, threshold_kappa, PhaseDiagram, SweepSpec};
pub use propagator::{g_memoryless, g_of_t, laplace_invert, Propagator, PropagatorModes};
pub use qubit::DensityMatrix2;
