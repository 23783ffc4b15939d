//! Units, bath specification, spectral density and qubit initial states.
//!
//! Natural units are used throughout: hbar = k_B = 1 and the cutoff frequency
//! sets the scale, so temperatures are measured in hbar*omega_c/k_B and times
//! in 1/omega_c.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest temperature accepted by grid scans.
///
/// Witness kernels carry weights `exp(omega/T)` and diverge as `T -> 0`.
pub const T_MIN: f64 = 1e-3;

/// Tolerance used when checking the Bloch-ball constraint `r <= 1`.
const BALL_TOL: f64 = 1e-12;

/// Functional form of the bath spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityKind {
    /// `J(omega) = kappa * omega` for `omega < omega_c`, zero above.
    #[default]
    OhmicSharpCutoff,
}

/// Thermal oscillator bath: coupling, cutoff, temperature and density form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    kappa: f64,
    omega_c: f64,
    temperature: f64,
    kind: DensityKind,
}

impl BathSpec {
    pub fn new(kappa: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        Self::with_kind(kappa, omega_c, temperature, DensityKind::OhmicSharpCutoff)
    }

    pub fn with_kind(kappa: f64, omega_c: f64, temperature: f64, kind: DensityKind) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::config("kappa", format!("must be positive, got {kappa}")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::config("omega_c", format!("must be positive, got {omega_c}")));
        }
        check_temperature(temperature)?;
        Ok(Self {
            kappa,
            omega_c,
            temperature,
            kind,
        })
    }

    /// Same bath at a different temperature.
    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        Ok(Self { temperature, ..*self })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    /// `J(omega)/omega`, finite down to `omega = 0`.
    pub(crate) fn density_over_omega(&self, omega: f64) -> f64 {
        match self.kind {
            DensityKind::OhmicSharpCutoff => {
                if omega < self.omega_c {
                    self.kappa
                } else {
                    0.0
                }
            }
        }
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            "temperature",
            format!("must be positive and finite, got {temperature}"),
        ))
    }
}

/// Bath spectral density `J(omega)`.
pub fn spectral_density(bath: &BathSpec, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::domain("spectral_density", format!("omega = {omega} < 0")));
    }
    Ok(bath.density_over_omega(omega) * omega)
}

/// Bose occupation `1/(exp(omega/T) - 1)`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(
            "thermal_occupation",
            format!("omega = {omega} must be positive"),
        ));
    }
    check_temperature(temperature)
        .map_err(|_| Error::domain("thermal_occupation", format!("T = {temperature}")))?;
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Initial qubit state as a Bloch vector `(x, y, z) = <sigma>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBloch {
    x: f64,
    y: f64,
    z: f64,
}

impl QubitBloch {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite Bloch vector ({x}, {y}, {z})")));
        }
        let r2 = x * x + y * y + z * z;
        if r2 > 1.0 + BALL_TOL {
            return Err(Error::InvalidState(format!(
                "Bloch vector ({x}, {y}, {z}) has r = {} > 1",
                r2.sqrt()
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Build from purity radius `r`, height `z` and azimuth `phi`.
    pub fn from_polar(r: f64, z: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidState(format!("r = {r} outside [0, 1]")));
        }
        if !(z.abs() <= r) {
            return Err(Error::InvalidState(format!("|z| = {} exceeds r = {r}", z.abs())));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidState(format!("phi = {phi}")));
        }
        let rho = (r * r - z * z).max(0.0).sqrt();
        Ok(Self {
            x: rho * phi.cos(),
            y: rho * phi.sin(),
            z,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Purity radius `|r|`.
    pub fn r(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Squared transverse radius `x^2 + y^2`.
    pub fn rho_perp_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn rho_perp(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Initial density matrix.
    pub fn to_reduced(&self) -> ReducedState {
        ReducedState {
            rho00: 0.5 * (1.0 + self.z),
            rho11: 0.5 * (1.0 - self.z),
            rho01: Complex64::new(0.5 * self.x, -0.5 * self.y),
        }
    }
}

/// Free helper mirroring [`QubitBloch::from_polar`].
pub fn qubit_from_polar(r: f64, z: f64, phi: f64) -> Result<QubitBloch> {
    QubitBloch::from_polar(r, z, phi)
}

/// Qubit density matrix in the sigma_z eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub rho00: f64,
    pub rho11: f64,
    pub rho01: Complex64,
}

impl ReducedState {
    /// Checks trace, positivity of populations and `|rho01|^2 <= rho00*rho11`.
    pub fn is_valid(&self, tol: f64) -> bool {
        (self.rho00 + self.rho11 - 1.0).abs() <= tol
            && self.rho00 >= -tol
            && self.rho11 >= -tol
            && self.rho01.norm_sqr() <= self.rho00 * self.rho11 + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn spectral_density_values() {
        let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(spectral_density(&b, 0.5).unwrap(), 0.5);
        assert_eq!(spectral_density(&b, 2.0).unwrap(), 0.0);
        assert_eq!(spectral_density(&b, 1.0).unwrap(), 0.0);
        let weak = BathSpec::new(1e-3, 1.0, 1.0).unwrap();
        assert_eq!(spectral_density(&weak, 0.0).unwrap(), 0.0);
        assert!(spectral_density(&b, -0.1).is_err());
    }

    #[test]
    fn bath_rejects_bad_parameters() {
        assert!(BathSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(BathSpec::new(1.0, -1.0, 1.0).is_err());
        assert!(BathSpec::new(1.0, 1.0, 0.0).is_err());
        assert!(BathSpec::new(1.0, 1.0, f64::NAN).is_err());
        let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!(b.at_temperature(0.0).is_err());
        assert_eq!(b.at_temperature(3.0).unwrap().temperature(), 3.0);
    }

    #[test]
    fn occupation_values() {
        assert_relative_eq!(
            thermal_occupation(1.0, 1.0).unwrap(),
            1.0 / (std::f64::consts::E - 1.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(thermal_occupation(1.0, 1.0).unwrap(), 0.58198, epsilon = 1e-5);
        let low = thermal_occupation(1.0, 1e-3).unwrap();
        assert!((0.0..1e-300).contains(&low));
        // high-temperature expansion n ~ T/omega - 1/2
        let hi = thermal_occupation(0.1, 10.0).unwrap();
        assert!((hi - 99.5).abs() / 99.5 < 1e-3);
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
    }

    #[test]
    fn occupation_monotone_on_grid() {
        let omegas = [0.05, 0.3, 1.0, 2.5];
        let temps = [0.05, 0.2, 1.0, 4.0, 20.0];
        for &w in &omegas {
            for pair in temps.windows(2) {
                assert!(thermal_occupation(w, pair[0]).unwrap() < thermal_occupation(w, pair[1]).unwrap());
            }
        }
        for &t in &temps {
            for pair in omegas.windows(2) {
                assert!(thermal_occupation(pair[0], t).unwrap() > thermal_occupation(pair[1], t).unwrap());
            }
        }
    }

    #[test]
    fn polar_examples() {
        let q = qubit_from_polar(1.0, 0.0, 0.0).unwrap();
        assert_eq!((q.x(), q.y(), q.z()), (1.0, 0.0, 0.0));
        let q = qubit_from_polar(0.75, 0.2, 0.0).unwrap();
        assert_relative_eq!(q.x(), 0.5225_f64.sqrt(), max_relative = 1e-15);
        assert_eq!(q.y(), 0.0);
        assert_eq!(q.z(), 0.2);
        let q = qubit_from_polar(0.0, 0.0, 1.234).unwrap();
        assert_eq!(q.r(), 0.0);
        assert!(qubit_from_polar(1.1, 0.0, 0.0).is_err());
        assert!(qubit_from_polar(0.5, 0.6, 0.0).is_err());
        assert!(QubitBloch::new(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn reduced_state_of_initial_qubit() {
        let q = QubitBloch::new(0.3, -0.4, 0.5).unwrap();
        let rs = q.to_reduced();
        assert_eq!(rs.rho00, 0.75);
        assert_eq!(rs.rho11, 0.25);
        assert_eq!(rs.rho01, Complex64::new(0.15, 0.2));
        assert!(rs.is_valid(1e-14));
    }

    proptest! {
        #[test]
        fn polar_states_satisfy_invariants(r in 0.0..=1.0f64, s in -1.0..=1.0f64, phi in -10.0..10.0f64) {
            let z = s * r;
            let q = qubit_from_polar(r, z, phi).unwrap();
            prop_assert!(q.r() <= 1.0 + 1e-12);
            prop_assert!((q.r() - r).abs() <= 1e-12);
            prop_assert!((q.rho_perp_sq() - (q.r() * q.r() - q.z() * q.z())).abs() <= 1e-12);
            let back = QubitBloch::new(q.x(), q.y(), q.z()).unwrap();
            prop_assert_eq!(back, q);
            prop_assert!(q.to_reduced().is_valid(1e-12));
        }

        #[test]
        fn density_nonnegative(w in 0.0..10.0f64, kappa in 1e-4..5.0f64, wc in 0.1..5.0f64) {
            let b = BathSpec::new(kappa, wc, 1.0).unwrap();
            let j = spectral_density(&b, w).unwrap();
            prop_assert!(j >= 0.0);
            if w >= wc {
                prop_assert_eq!(j, 0.0);
            }
        }
    }
}
