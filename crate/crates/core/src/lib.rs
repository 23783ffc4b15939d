//! Exact pure-dephasing dynamics of a qubit in a thermal oscillator bath.
//!
//! The crate evaluates the decoherence rate and factor, the analytic
//! separability and entanglement witnesses for the total qubit+bath state,
//! classifies `(T, t, state)` points, and carries a brute-force truncated
//! Fock-space oracle for a single-mode environment against which the
//! witnesses are checked.
//!
//! Units: hbar = k_B = 1, frequencies in units of the bath cutoff.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod kernels;
pub mod model;
pub mod quadrature;
pub mod roots;
pub mod singlemode;

pub use criteria::{
    bloch_cut_entangled, bloch_cut_separable, classify, count_alternations, count_transitions, ent_bound, phase_diagram,
    sep_bound, separable_fraction, separable_fraction_monte_carlo, tau_ent, Alternations, BoundaryCurve, BoundaryPoint,
    MonteCarloFraction, PhaseDiagram, RegionLabel,
};
pub use error::{Error, Result};
pub use kernels::{
    big_a, big_b, big_e, big_s, big_sbar, decoherence_factor, decoherence_time, exceeds_threshold, gamma,
    gamma_integral, kernel_values, reduced_state, Kernel, KernelValue,
};
pub use model::{
    qubit_from_polar, spectral_density, thermal_occupation, BathSpec, DensityKind, QubitBloch, ReducedState, T_MIN,
};
pub use quadrature::QuadratureConfig;
pub use singlemode::{FockSystem, ModeSpec, TestStateCoeffs, TotalState};
