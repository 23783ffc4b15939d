//! Shared fixtures for the benchmarks.

use dephase_core::{BathSpec, ModeSpec, QubitBloch};

pub fn weak_bath(temperature: f64) -> BathSpec {
    BathSpec::new(1e-3, 1.0, temperature).expect("valid bath")
}

pub fn mixed_state() -> QubitBloch {
    QubitBloch::from_polar(0.75, 0.2, 0.0).expect("valid state")
}

pub fn reference_mode(temperature: f64) -> ModeSpec {
    ModeSpec::new(1.0, 0.2, temperature, None).expect("valid mode")
}
