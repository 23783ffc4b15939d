//! Time and temperature kernels of the dephasing model.
//!
//! All double time integrals are reduced analytically before any numerics:
//!
//! ```text
//! int_0^t ds int_0^s dtau cos(w (s - tau)) = (1 - cos w t) / w^2
//! int_0^t cos(w s) ds                      = sin(w t) / w
//! ```
//!
//! which leaves single frequency integrals over the support of `J`. With
//! `x = omega/T` the kernels are
//!
//! | kernel  | prefactor | thermal coefficient      | time factor             |
//! |---------|-----------|--------------------------|-------------------------|
//! | gamma   | 4         | coth(x/2)                | sin(w t)/w              |
//! | Gamma   | 4         | coth(x/2)                | (1 - cos w t)/w^2       |
//! | A       | 2         | 1/n = e^x - 1            | (1 - cos w t)/w^2       |
//! | B       | 2         | (2n+1)/n = e^x + 1       | (1 - cos w t)/w^2       |
//! | S       | 4         | e^x                      | (1 - cos w t)/w^2       |
//! | S-bar   | 4         | e^-x                     | (1 - cos w t)/w^2       |
//! | E       | 8         | sinh(x)                  | (1 - cos w t)/w^2       |

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BathSpec, QubitBloch, ReducedState};
use crate::quadrature::{integrate_chunked, uniform_breakpoints, QuadratureConfig};
use crate::roots::brent;

/// Largest `omega_c/T` for which the raw witness kernels are evaluated.
pub const MAX_EXPONENT: f64 = 700.0;

/// Above this value of `omega_c * t` the frequency axis is split into
/// panels of width `pi/t`.
const OSCILLATION_SPLIT: f64 = 50.0;

/// Upper end of the bracket search for the decoherence time, in `1/omega_c`.
pub const MAX_DECOHERENCE_BRACKET: f64 = 1e8;

/// Witness kernels built from the partial P-function coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    A,
    B,
    /// `S = A + B`
    S,
    /// `S` with coefficients `(n+1)/n` replaced by `n/(n+1)`.
    SBar,
    /// `E = S - SBar`
    E,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::A => "A",
            Kernel::B => "B",
            Kernel::S => "S",
            Kernel::SBar => "Sbar",
            Kernel::E => "E",
        }
    }

    fn prefactor(self) -> f64 {
        match self {
            Kernel::A | Kernel::B => 2.0,
            Kernel::S | Kernel::SBar => 4.0,
            Kernel::E => 8.0,
        }
    }

    /// Thermal coefficient as `exp(x) * m(x)`; returns `(exponent, m)`.
    fn split_coefficient(self, x: f64) -> (f64, f64) {
        match self {
            Kernel::A => (x, -(-x).exp_m1()),
            Kernel::B => (x, 1.0 + (-x).exp()),
            Kernel::S => (x, 1.0),
            Kernel::SBar => (-x, 1.0),
            Kernel::E => (x, -0.5 * (-2.0 * x).exp_m1()),
        }
    }

    /// Whether the coefficient grows like `exp(omega/T)`.
    fn grows(self) -> bool {
        !matches!(self, Kernel::SBar)
    }
}

/// Bundle of all kernels at one `(T, t)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub sbar: f64,
    pub e: f64,
    /// Instantaneous decoherence rate `gamma(t)`.
    pub gamma: f64,
    /// Accumulated exponent `Gamma(t) = int_0^t gamma`.
    pub gamma_integral: f64,
}

/// `(1 - cos w t)/w^2`, with the `w -> 0` limit `t^2/2`.
#[inline]
pub(crate) fn one_minus_cos_over_sq(omega: f64, t: f64) -> f64 {
    let half = 0.5 * omega * t;
    if half.abs() < 1e-8 {
        0.5 * t * t
    } else {
        let s = half.sin() / omega;
        2.0 * s * s
    }
}

/// `sin(w t)/w`, with the `w -> 0` limit `t`.
#[inline]
pub(crate) fn sin_over(omega: f64, t: f64) -> f64 {
    if (omega * t).abs() < 1e-8 {
        t
    } else {
        (omega * t).sin() / omega
    }
}

/// `w * coth(w/(2T))`, finite at `w = 0` where it equals `2T`.
#[inline]
fn omega_coth(omega: f64, temperature: f64) -> f64 {
    let x = omega / (2.0 * temperature);
    if x < 1e-6 {
        2.0 * temperature * (1.0 + x * x / 3.0)
    } else {
        omega / x.tanh()
    }
}

fn frequency_breakpoints(bath: &BathSpec, t: f64) -> Vec<f64> {
    let upper = bath.omega_c();
    if upper * t > OSCILLATION_SPLIT {
        uniform_breakpoints(upper, std::f64::consts::PI / t)
    } else {
        vec![0.0, upper]
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("kernel time", format!("t = {t} must be finite and >= 0")))
    }
}

/// Frequency integrand of a witness kernel, in log-safe form.
fn witness_integrand(kernel: Kernel, bath: &BathSpec, t: f64) -> impl Fn(f64) -> f64 + '_ {
    let temperature = bath.temperature();
    let p = kernel.prefactor();
    move |omega: f64| {
        let base = p * bath.density_over_omega(omega) * omega * one_minus_cos_over_sq(omega, t);
        let (exponent, m) = kernel.split_coefficient(omega / temperature);
        if exponent < 500.0 {
            base * m * exponent.exp()
        } else if base * m > 0.0 {
            (exponent + (base * m).ln()).exp()
        } else {
            0.0
        }
    }
}

fn overflow_guard(kernel: Kernel, bath: &BathSpec) -> Result<()> {
    let ratio = bath.omega_c() / bath.temperature();
    if kernel.grows() && ratio > MAX_EXPONENT {
        return Err(Error::Overflow {
            kernel: kernel.name(),
            temperature: bath.temperature(),
            ratio,
        });
    }
    Ok(())
}

/// Instantaneous decoherence rate
/// `gamma(t) = 4 int J(w) coth(w/2T) sin(w t)/w dw`.
pub fn gamma(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let temperature = bath.temperature();
    let f = |w: f64| 4.0 * bath.density_over_omega(w) * omega_coth(w, temperature) * sin_over(w, t);
    Ok(integrate_chunked(f, &frequency_breakpoints(bath, t), cfg)?.value)
}

/// Accumulated decoherence exponent
/// `Gamma(t) = 4 int J(w) coth(w/2T) (1 - cos w t)/w^2 dw`.
pub fn gamma_integral(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let temperature = bath.temperature();
    let f = |w: f64| {
        4.0 * bath.density_over_omega(w) * omega_coth(w, temperature) * one_minus_cos_over_sq(w, t)
    };
    Ok(integrate_chunked(f, &frequency_breakpoints(bath, t), cfg)?.value)
}

/// Decoherence factor `D(t) = exp(-i Omega t - Gamma(t))`.
pub fn decoherence_factor(bath: &BathSpec, omega_q: f64, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let g = gamma_integral(bath, t, cfg)?;
    Ok(dephasing_factor(omega_q, t, g))
}

fn dephasing_factor(omega_q: f64, t: f64, exponent: f64) -> Complex64 {
    Complex64::from_polar((-exponent).exp(), -omega_q * t)
}

/// Reduced qubit state at time `t` under the exact dephasing dynamics.
pub fn reduced_state(
    initial: &QubitBloch,
    bath: &BathSpec,
    omega_q: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<ReducedState> {
    let g = gamma_integral(bath, t, cfg)?;
    Ok(reduced_state_from_exponent(initial, omega_q, t, g))
}

/// Reduced state for a given accumulated exponent `Gamma(t)`.
///
/// Populations are conserved and the coherence is multiplied by `D(t)`.
pub fn reduced_state_from_exponent(initial: &QubitBloch, omega_q: f64, t: f64, exponent: f64) -> ReducedState {
    let mut state = initial.to_reduced();
    state.rho01 *= dephasing_factor(omega_q, t, exponent);
    state
}

/// Value of a witness kernel at `(T, t)`.
///
/// Fails with [`Error::Overflow`] when `omega_c/T` exceeds [`MAX_EXPONENT`];
/// compare against a bound with [`exceeds_threshold`] instead.
pub fn witness(kernel: Kernel, bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_time(t)?;
    overflow_guard(kernel, bath)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let value = integrate_chunked(witness_integrand(kernel, bath, t), &frequency_breakpoints(bath, t), cfg)?.value;
    if !value.is_finite() {
        return Err(Error::Overflow {
            kernel: kernel.name(),
            temperature: bath.temperature(),
            ratio: bath.omega_c() / bath.temperature(),
        });
    }
    Ok(value.max(0.0))
}

pub fn big_a(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    witness(Kernel::A, bath, t, cfg)
}

pub fn big_b(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    witness(Kernel::B, bath, t, cfg)
}

/// Separability kernel `S(T, t) = A + B`.
pub fn big_s(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    witness(Kernel::S, bath, t, cfg)
}

pub fn big_sbar(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    witness(Kernel::SBar, bath, t, cfg)
}

/// Entanglement kernel `E(T, t) = S - Sbar`.
pub fn big_e(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    witness(Kernel::E, bath, t, cfg)
}

/// All kernels at one point.
pub fn kernel_values(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    Ok(KernelValue {
        a: big_a(bath, t, cfg)?,
        b: big_b(bath, t, cfg)?,
        s: big_s(bath, t, cfg)?,
        sbar: big_sbar(bath, t, cfg)?,
        e: big_e(bath, t, cfg)?,
        gamma: gamma(bath, t, cfg)?,
        gamma_integral: gamma_integral(bath, t, cfg)?,
    })
}

/// Decide `kernel(T, t) > bound` without evaluating the full kernel.
///
/// The integrand is nonnegative, so frequency panels are accumulated from
/// the cutoff downward (where the thermal weight is largest) and the sum is
/// abandoned as soon as it passes `bound`. Works when the full value would
/// overflow.
pub fn exceeds_threshold(kernel: Kernel, bath: &BathSpec, t: f64, bound: f64, cfg: &QuadratureConfig) -> Result<bool> {
    check_time(t)?;
    if bound.is_nan() || bound < 0.0 {
        return Err(Error::domain("exceeds_threshold", format!("bound = {bound}")));
    }
    if bound == f64::INFINITY || t == 0.0 {
        return Ok(false);
    }
    let f = witness_integrand(kernel, bath, t);
    let bp = frequency_breakpoints(bath, t);
    let mut sum = 0.0;
    for w in bp.windows(2).rev() {
        sum += integrate_chunked(&f, w, cfg)?.value;
        if sum > bound {
            return Ok(true);
        }
    }
    Ok(sum > bound)
}

/// Cheap upper bound on `Gamma(t)` using `(1 - cos w t)/w^2 <= min(t^2/2, 2/w^2)`.
fn gamma_integral_upper_bound(bath: &BathSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let temperature = bath.temperature();
    let knee = (2.0 / t).min(bath.omega_c());
    let f = |w: f64| 4.0 * bath.density_over_omega(w) * omega_coth(w, temperature) * (0.5 * t * t).min(2.0 / (w * w));
    let mut bp = vec![0.0, knee];
    if knee < bath.omega_c() {
        bp.push(bath.omega_c());
    }
    Ok(integrate_chunked(f, &bp, cfg)?.value)
}

/// Decoherence time: the unique `tau` with `Gamma(tau) = 1`.
///
/// The bracket grows geometrically from `t = 1/omega_c`; the root is then
/// polished with Brent's method until `|Gamma(tau) - 1| <= 1e-6`.
pub fn decoherence_time(bath: &BathSpec, cfg: &QuadratureConfig) -> Result<f64> {
    let excess = |t: f64| gamma_integral(bath, t, cfg).map(|g| g - 1.0);
    let t_max = MAX_DECOHERENCE_BRACKET / bath.omega_c();
    let bound = gamma_integral_upper_bound(bath, t_max, cfg)?;
    if bound < 1.0 {
        return Err(Error::NoDecoherence { t_max, gamma: bound });
    }

    let mut lo = 1.0 / bath.omega_c();
    let mut hi = lo;
    if excess(lo)? < 0.0 {
        loop {
            hi = (2.0 * lo).min(t_max);
            let e = excess(hi)?;
            if e >= 0.0 {
                break;
            }
            if hi >= t_max {
                return Err(Error::NoDecoherence { t_max, gamma: e + 1.0 });
            }
            lo = hi;
        }
    } else {
        loop {
            lo = 0.5 * hi;
            if excess(lo)? < 0.0 {
                break;
            }
            hi = lo;
        }
    }
    let tau = brent(excess, lo, hi, 0.0, 1e-12, 200)?.expect("bracket verified above");
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn everything_vanishes_at_zero_time() {
        let bath = BathSpec::new(0.7, 1.0, 0.4).unwrap();
        let kv = kernel_values(&bath, 0.0, &cfg()).unwrap();
        assert_eq!(kv, KernelValue { a: 0.0, b: 0.0, s: 0.0, sbar: 0.0, e: 0.0, gamma: 0.0, gamma_integral: 0.0 });
        assert_eq!(decoherence_factor(&bath, 3.0, 0.0, &cfg()).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn negative_time_rejected() {
        let bath = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!(gamma(&bath, -1.0, &cfg()).is_err());
        assert!(big_s(&bath, f64::NAN, &cfg()).is_err());
    }

    #[test]
    fn small_argument_helpers_are_continuous() {
        let t = 3.0;
        assert_relative_eq!(one_minus_cos_over_sq(1e-9, t), 4.5, max_relative = 1e-12);
        assert_relative_eq!(one_minus_cos_over_sq(1e-3, t), (1.0 - (3e-3f64).cos()) / 1e-6, max_relative = 1e-6);
        assert_relative_eq!(sin_over(1e-10, t), t, max_relative = 1e-12);
        assert_relative_eq!(omega_coth(1e-7, 0.5), 1.0, max_relative = 1e-12);
        assert_relative_eq!(omega_coth(0.3, 0.5), 0.3 / (0.3f64).tanh(), max_relative = 1e-12);
    }

    #[test]
    fn lindblad_rate_at_high_temperature() {
        let bath = BathSpec::new(1e-3, 1.0, 100.0).unwrap();
        let g = gamma(&bath, 50.0, &cfg()).unwrap();
        let lindblad = 4.0 * PI * 1e-3 * 100.0;
        assert!((g - lindblad).abs() / lindblad < 0.02, "gamma = {g}");
    }

    #[test]
    fn phase_free_factor_is_real_positive() {
        let bath = BathSpec::new(0.2, 1.0, 1.0).unwrap();
        let d = decoherence_factor(&bath, 0.0, 2.0, &cfg()).unwrap();
        assert!(d.re > 0.0 && d.im == 0.0 && d.re < 1.0);
        let d = decoherence_factor(&bath, 1.5, 2.0, &cfg()).unwrap();
        assert_relative_eq!(d.arg(), -3.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_state_keeps_populations() {
        let bath = BathSpec::new(1.0, 1.0, 0.5).unwrap();
        let q = QubitBloch::from_polar(0.8, 0.3, 0.7).unwrap();
        for &t in &[0.0, 0.3, 2.0, 40.0] {
            let rs = reduced_state(&q, &bath, 0.9, t, &cfg()).unwrap();
            assert_eq!(rs.rho00, 0.65);
            assert_eq!(rs.rho11, 0.35);
            assert!(rs.is_valid(1e-12));
        }
        let diag = QubitBloch::new(0.0, 0.0, -0.4).unwrap();
        let rs = reduced_state(&diag, &bath, 0.9, 5.0, &cfg()).unwrap();
        assert_eq!(rs, diag.to_reduced());
        let eq = QubitBloch::from_polar(1.0, 0.0, 0.0).unwrap();
        assert_eq!(reduced_state(&eq, &bath, 0.0, 0.0, &cfg()).unwrap().rho01, Complex64::new(0.5, 0.0));
    }

    #[test]
    fn decoherence_time_defining_property() {
        for &(kappa, temp) in &[(1e-3, 10.0), (1.0, 10.0), (1.0, 0.1), (1e-3, 0.1)] {
            let bath = BathSpec::new(kappa, 1.0, temp).unwrap();
            let tau = decoherence_time(&bath, &cfg()).unwrap();
            let g = gamma_integral(&bath, tau, &cfg()).unwrap();
            assert!((g - 1.0).abs() <= 1e-6, "Gamma(tau) = {g}");
            let d = decoherence_factor(&bath, 0.0, tau, &cfg()).unwrap();
            assert!((d.norm() - (-1.0f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn pathological_coupling_never_decoheres() {
        let bath = BathSpec::new(1e-14, 1.0, 1.0).unwrap();
        assert!(matches!(decoherence_time(&bath, &cfg()), Err(Error::NoDecoherence { .. })));
    }

    #[test]
    fn overflow_is_guarded() {
        let bath = BathSpec::new(1.0, 1.0, 1e-3).unwrap();
        assert!(matches!(big_s(&bath, 1.0, &cfg()), Err(Error::Overflow { .. })));
        assert!(matches!(big_e(&bath, 1.0, &cfg()), Err(Error::Overflow { .. })));
        assert!(big_sbar(&bath, 1.0, &cfg()).is_ok());
        assert!(exceeds_threshold(Kernel::S, &bath, 1.0, 1e300, &cfg()).unwrap());
    }

    #[test]
    fn threshold_examples() {
        let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!(!exceeds_threshold(Kernel::S, &b, 0.0, 0.1, &cfg()).unwrap());
        let cold = BathSpec::new(1.0, 1.0, 0.01).unwrap();
        assert!(exceeds_threshold(Kernel::S, &cold, 1.0, 1e6, &cfg()).unwrap());
        let hot = BathSpec::new(1e-3, 1.0, 10.0).unwrap();
        assert!(!exceeds_threshold(Kernel::E, &hot, 1e3, 0.0513, &cfg()).unwrap());
        assert!(!exceeds_threshold(Kernel::E, &hot, 1e3, f64::INFINITY, &cfg()).unwrap());
        assert!(exceeds_threshold(Kernel::E, &hot, 1e3, -1.0, &cfg()).is_err());
    }

    #[test]
    fn threshold_lower_bound_oracle() {
        // On [0.99, 1] the S integrand is at least 4 e^{99} (1 - cos w) / w,
        // which alone is far above 1e6 for T = 0.01, t = 1.
        let lower: f64 = 4.0 * (99.0f64).exp() * (1.0 - (1.0f64).cos()) * 0.01;
        assert!(lower > 1e6);
    }
}
