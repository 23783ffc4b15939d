//! Separability and entanglement statements about the total qubit+bath state.
//!
//! The total state is certified separable while
//! `S(T, t) <= 1/2 ln[(1 - z^2)/(x^2 + y^2)]` and certified entangled once
//! `E(T, t) > ln[(r - z^2)/(x^2 + y^2)]`. Both tests are one-sided; points
//! satisfying neither are reported as [`RegionLabel::Unknown`].

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{decoherence_time, exceeds_threshold, witness, Kernel};
use crate::model::{BathSpec, QubitBloch, T_MIN};
use crate::quadrature::QuadratureConfig;
use crate::roots::{bisect_predicate, brent};

/// Kernel values beyond this are treated as "exp(-2S) underflows to zero".
const NEGLIGIBLE_EXPONENT: f64 = 375.0;

/// Classification of a `(T, t, state)` point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Separable,
    Entangled,
    Unknown,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::Separable => "SEPARABLE",
            RegionLabel::Entangled => "ENTANGLED",
            RegionLabel::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Right-hand side of the separability condition, `1/2 ln[(1 - z^2)/(x^2 + y^2)]`.
///
/// Infinite for states on the z axis.
pub fn sep_bound(state: &QubitBloch) -> f64 {
    let perp = state.rho_perp_sq();
    if perp == 0.0 {
        return f64::INFINITY;
    }
    let z = state.z();
    (0.5 * ((1.0 - z * z) / perp).ln()).max(0.0)
}

/// Right-hand side of the entanglement condition, `ln[(r - z^2)/(x^2 + y^2)]`.
///
/// Infinite for states on the z axis (including the maximally mixed state).
pub fn ent_bound(state: &QubitBloch) -> f64 {
    let perp = state.rho_perp_sq();
    if perp == 0.0 {
        return f64::INFINITY;
    }
    let z = state.z();
    ((state.r() - z * z) / perp).ln().max(0.0)
}

/// Classify one point.
///
/// The separability test runs first. Co-firing of both tests is impossible
/// for exact kernels (`E <= S`); if it happens anyway it is reported as
/// [`Error::Inconsistency`].
pub fn classify(bath: &BathSpec, t: f64, state: &QubitBloch, cfg: &QuadratureConfig) -> Result<RegionLabel> {
    let sb = sep_bound(state);
    let eb = ent_bound(state);
    if !exceeds_threshold(Kernel::S, bath, t, sb, cfg)? {
        // E <= S <= sb, so E can only pass eb if eb < sb
        if eb < sb && exceeds_threshold(Kernel::E, bath, t, eb, cfg)? {
            return Err(Error::Inconsistency {
                temperature: bath.temperature(),
                time: t,
                s: witness(Kernel::S, bath, t, cfg).unwrap_or(f64::NAN),
                sep_bound: sb,
                ent_bound: eb,
            });
        }
        return Ok(RegionLabel::Separable);
    }
    if exceeds_threshold(Kernel::E, bath, t, eb, cfg)? {
        Ok(RegionLabel::Entangled)
    } else {
        Ok(RegionLabel::Unknown)
    }
}

/// Labels on a temperature x time grid. `labels[i][j]` belongs to
/// `(temperatures[i], times[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub temperatures: Vec<f64>,
    pub times: Vec<f64>,
    pub labels: Vec<Vec<RegionLabel>>,
    pub state: QubitBloch,
    pub bath: BathSpec,
}

impl PhaseDiagram {
    pub fn label(&self, i_temperature: usize, i_time: usize) -> RegionLabel {
        self.labels[i_temperature][i_time]
    }
}

fn check_axis(name: &'static str, axis: &[f64], min: f64) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::config(name, "axis is empty"));
    }
    if axis.iter().any(|v| !(v.is_finite() && *v >= min)) {
        return Err(Error::config(name, format!("values must be finite and >= {min}")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(name, "axis must be strictly increasing"));
    }
    Ok(())
}

/// Pointwise classification over a grid. Grid points are evaluated in
/// parallel; the result does not depend on the schedule.
pub fn phase_diagram(
    bath: &BathSpec,
    state: &QubitBloch,
    temperatures: &[f64],
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Result<PhaseDiagram> {
    check_axis("temperatures", temperatures, T_MIN)?;
    check_axis("times", times, 0.0)?;
    let n_t = times.len();
    let flat: Vec<RegionLabel> = (0..temperatures.len() * n_t)
        .into_par_iter()
        .map(|k| {
            let (temperature, time) = (temperatures[k / n_t], times[k % n_t]);
            bath.at_temperature(temperature)
                .and_then(|b| classify(&b, time, state, cfg))
                .map_err(|e| Error::AtGridPoint {
                    temperature,
                    time,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    Ok(PhaseDiagram {
        temperatures: temperatures.to_vec(),
        times: times.to_vec(),
        labels: flat.chunks(n_t).map(<[_]>::to_vec).collect(),
        state: *state,
        bath: *bath,
    })
}

/// Scan grid for [`tau_ent`]: log-spaced up to one cutoff period, then
/// linear with at most `pi/(8 omega_c)` spacing (capped at 4000 points).
fn onset_scan_times(t_max: f64, omega_c: f64) -> Vec<f64> {
    let period = 2.0 * PI / omega_c;
    let t_switch = t_max.min(period);
    let t_lo = 1e-6 * t_switch;
    let n_log = 60;
    let mut times: Vec<f64> = (0..n_log)
        .map(|k| t_lo * (t_switch / t_lo).powf(k as f64 / (n_log - 1) as f64))
        .collect();
    if t_max > t_switch {
        let span = t_max - t_switch;
        let n_lin = ((span / (PI / (8.0 * omega_c))).ceil() as usize).clamp(1, 4000);
        times.extend((1..=n_lin).map(|k| t_switch + span * k as f64 / n_lin as f64));
    }
    times
}

/// First time in `(0, t_max]` at which the entanglement condition holds.
///
/// Returns `Some(0.0)` when the condition holds for every `t > 0` (pure
/// states off the poles) and `None` if it is never met on the scan grid.
pub fn tau_ent(bath: &BathSpec, state: &QubitBloch, t_max: f64, cfg: &QuadratureConfig) -> Result<Option<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain("tau_ent", format!("t_max = {t_max}")));
    }
    let eb = ent_bound(state);
    if eb.is_infinite() {
        return Ok(None);
    }
    if eb == 0.0 {
        return Ok(Some(0.0));
    }
    let entangled = |t: f64| exceeds_threshold(Kernel::E, bath, t, eb, cfg);
    let mut prev = 0.0;
    for t in onset_scan_times(t_max, bath.omega_c()) {
        if entangled(t)? {
            return bisect_predicate(entangled, prev, t, 1e-4, 200).map(Some);
        }
        prev = t;
    }
    Ok(None)
}

/// `S(T, tau_dec(T))`, or `None` when `exp(-2S)` underflows.
fn s_at_decoherence(bath: &BathSpec, cfg: &QuadratureConfig) -> Result<Option<f64>> {
    let tau = decoherence_time(bath, cfg)?;
    if exceeds_threshold(Kernel::S, bath, tau, NEGLIGIBLE_EXPONENT, cfg)? {
        return Ok(None);
    }
    witness(Kernel::S, bath, tau, cfg).map(Some)
}

/// Bloch-ball volume fraction of initial states still certified separable at
/// the decoherence time.
///
/// The condition `rho_perp^2 <= exp(-2S)(1 - z^2)` cuts every horizontal
/// slice of the ball by the same factor, so the fraction is `exp(-2S)`.
pub fn separable_fraction(bath: &BathSpec, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(match s_at_decoherence(bath, cfg)? {
        Some(s) => (-2.0 * s).exp(),
        None => 0.0,
    })
}

/// Monte-Carlo estimate of the separable fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloFraction {
    pub samples: usize,
    pub hits: usize,
    pub fraction: f64,
}

impl MonteCarloFraction {
    /// Binomial standard error of the sample fraction when the true fraction is `p`.
    pub fn stderr_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// Plug-in standard error from the observed fraction.
    pub fn sample_stderr(&self) -> f64 {
        self.stderr_at(self.fraction)
    }
}

/// Sample uniform points of the Bloch ball and count those that satisfy the
/// separability condition at the decoherence time.
pub fn separable_fraction_monte_carlo(
    bath: &BathSpec,
    samples: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<MonteCarloFraction> {
    if samples == 0 {
        return Err(Error::config("mc_samples", "must be positive"));
    }
    // None: S so large that only states on the z axis (measure zero) qualify.
    let s = s_at_decoherence(bath, cfg)?.unwrap_or(f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let [x, y, z]: [f64; 3] = UnitBall.sample(&mut rng);
        let state = QubitBloch::new(x, y, z)?;
        if s <= sep_bound(&state) {
            hits += 1;
        }
    }
    Ok(MonteCarloFraction {
        samples,
        hits,
        fraction: hits as f64 / samples as f64,
    })
}

/// One point of a boundary in the `phi = 0` cut of the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub z: f64,
    /// Transverse radius of the boundary; `None` where no boundary exists.
    pub rho_perp: Option<f64>,
}

/// Boundary curve at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub temperature: f64,
    pub points: Vec<BoundaryPoint>,
}

fn check_cut_axis(z_axis: &[f64]) -> Result<()> {
    if let Some(z) = z_axis.iter().find(|z| !(z.abs() < 1.0)) {
        return Err(Error::config("z_axis", format!("z = {z} outside (-1, 1)")));
    }
    Ok(())
}

/// States below the returned curve decohere while the total state is still
/// certified separable: `rho_perp = sqrt((1 - z^2) exp(-2S(T, tau_dec)))`.
pub fn bloch_cut_separable(bath: &BathSpec, z_axis: &[f64], cfg: &QuadratureConfig) -> Result<BoundaryCurve> {
    check_cut_axis(z_axis)?;
    let factor = match s_at_decoherence(bath, cfg)? {
        Some(s) => (-2.0 * s).exp(),
        None => 0.0,
    };
    Ok(BoundaryCurve {
        temperature: bath.temperature(),
        points: z_axis
            .iter()
            .map(|&z| BoundaryPoint {
                z,
                rho_perp: Some(((1.0 - z * z) * factor).sqrt()),
            })
            .collect(),
    })
}

/// `ln[(r - z^2)/rho^2]` as a function of `u = ln rho`, decreasing in `u`.
fn ent_bound_log(u: f64, z: f64) -> f64 {
    let rho = u.exp();
    let r = rho.hypot(z);
    (r - z * z).ln() - 2.0 * u
}

/// States outside the returned curve decohere after entanglement is
/// certified: on the curve `E(T, tau_dec) = ln[(r - z^2)/rho_perp^2]`.
pub fn bloch_cut_entangled(bath: &BathSpec, z_axis: &[f64], cfg: &QuadratureConfig) -> Result<BoundaryCurve> {
    check_cut_axis(z_axis)?;
    let tau = decoherence_time(bath, cfg)?;
    let e = match witness(Kernel::E, bath, tau, cfg) {
        Ok(e) => e,
        Err(Error::Overflow { .. }) => f64::INFINITY,
        Err(other) => return Err(other),
    };
    let floor = f64::MIN_POSITIVE.ln();
    let points = z_axis
        .iter()
        .map(|&z| -> Result<BoundaryPoint> {
            let top = 0.5 * (1.0 - z * z).ln();
            let rho_perp = if e.is_infinite() || ent_bound_log(floor, z) < e {
                Some(0.0)
            } else {
                brent(|u| Ok(ent_bound_log(u, z) - e), floor, top, 1e-14, 1e-12, 200)?
                    .map(|u| u.exp().min((1.0 - z * z).sqrt()))
            };
            Ok(BoundaryPoint { z, rho_perp })
        })
        .collect::<Result<_>>()?;
    Ok(BoundaryCurve {
        temperature: bath.temperature(),
        points,
    })
}

/// Labels along a time axis and the number of separable/entangled switches.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternations {
    /// Transitions between SEPARABLE and ENTANGLED; UNKNOWN gaps are skipped.
    pub count: usize,
    pub labels: Vec<RegionLabel>,
    pub unknown: usize,
}

/// Number of SEPARABLE <-> ENTANGLED transitions of a label sequence.
pub fn count_transitions(labels: &[RegionLabel]) -> usize {
    let mut last = None;
    let mut count = 0;
    for &l in labels.iter().filter(|l| **l != RegionLabel::Unknown) {
        if last.is_some_and(|prev| prev != l) {
            count += 1;
        }
        last = Some(l);
    }
    count
}

/// Classify along `times` and count the alternations.
pub fn count_alternations(
    bath: &BathSpec,
    state: &QubitBloch,
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Alternations> {
    check_axis("times", times, 0.0)?;
    let labels: Vec<RegionLabel> = times
        .par_iter()
        .map(|&t| {
            classify(bath, t, state, cfg).map_err(|e| Error::AtGridPoint {
                temperature: bath.temperature(),
                time: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Alternations {
        count: count_transitions(&labels),
        unknown: labels.iter().filter(|l| **l == RegionLabel::Unknown).count(),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use RegionLabel::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn bound_examples() {
        let eq = QubitBloch::from_polar(1.0, 0.0, 0.0).unwrap();
        assert_eq!(sep_bound(&eq), 0.0);
        assert_eq!(ent_bound(&eq), 0.0);
        let axis = QubitBloch::new(0.0, 0.0, 0.4).unwrap();
        assert_eq!(sep_bound(&axis), f64::INFINITY);
        assert_eq!(ent_bound(&axis), f64::INFINITY);
        let fig1 = QubitBloch::from_polar(0.98, 0.0, 0.0).unwrap();
        assert_relative_eq!(sep_bound(&fig1), 0.5 * (1.0f64 / 0.9604).ln(), max_relative = 1e-12);
        assert_relative_eq!(sep_bound(&fig1), 0.020207, epsilon = 1e-5);
        let fig6 = QubitBloch::from_polar(0.75, 0.2, 0.0).unwrap();
        assert_relative_eq!(ent_bound(&fig6), (0.71f64 / 0.5225).ln(), max_relative = 1e-12);
        assert_relative_eq!(ent_bound(&fig6), 0.30672, epsilon = 1e-4);
        let mixed = QubitBloch::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(ent_bound(&mixed), f64::INFINITY);
        let pure_tilted = QubitBloch::from_polar(1.0, 0.6, 2.0).unwrap();
        assert!(ent_bound(&pure_tilted) < 1e-12);
    }

    #[test]
    fn equator_entangles_more_easily_than_poles() {
        let r = 0.8;
        let eq = QubitBloch::from_polar(r, 0.0, 0.0).unwrap();
        let near_pole = QubitBloch::from_polar(r, 0.7, 0.0).unwrap();
        assert!(ent_bound(&eq) < ent_bound(&near_pole));
        assert!(sep_bound(&eq) < sep_bound(&near_pole));
    }

    #[test]
    fn initial_product_state_is_separable() {
        let bath = BathSpec::new(1.0, 1.0, 0.1).unwrap();
        let q = QubitBloch::from_polar(0.5, 0.1, 0.2).unwrap();
        assert_eq!(classify(&bath, 0.0, &q, &cfg()).unwrap(), Separable);
    }

    #[test]
    fn pure_state_entangles_immediately() {
        let bath = BathSpec::new(1.0, 1.0, 0.1).unwrap();
        let q = QubitBloch::from_polar(1.0, 0.0, 0.0).unwrap();
        assert_eq!(classify(&bath, 1.0, &q, &cfg()).unwrap(), Entangled);
        assert_eq!(tau_ent(&bath, &q, 10.0, &cfg()).unwrap(), Some(0.0));
    }

    #[test]
    fn axis_state_never_entangles() {
        let bath = BathSpec::new(1.0, 1.0, 0.05).unwrap();
        let q = QubitBloch::new(0.0, 0.0, -0.3).unwrap();
        assert_eq!(classify(&bath, 7.0, &q, &cfg()).unwrap(), Separable);
        assert_eq!(tau_ent(&bath, &q, 10.0, &cfg()).unwrap(), None);
    }

    #[test]
    fn high_temperature_entanglement_undetectable() {
        let bath = BathSpec::new(1e-3, 1.0, 10.0).unwrap();
        let q = QubitBloch::from_polar(0.95, 0.0, 0.0).unwrap();
        assert_eq!(tau_ent(&bath, &q, 1000.0, &cfg()).unwrap(), None);
    }

    #[test]
    fn tau_ent_refines_onset() {
        let bath = BathSpec::new(1.0, 1.0, 0.5).unwrap();
        let q = QubitBloch::from_polar(0.9, 0.0, 0.0).unwrap();
        let onset = tau_ent(&bath, &q, 5.0, &cfg()).unwrap().unwrap();
        let eb = ent_bound(&q);
        let e = |t| witness(Kernel::E, &bath, t, &cfg()).unwrap();
        assert!(e(onset * (1.0 + 2e-4)) > eb);
        assert!(e(onset * (1.0 - 2e-4)) <= eb);
    }

    #[test]
    fn single_point_grid_matches_classify() {
        let bath = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        let q = QubitBloch::from_polar(0.9, 0.0, 0.0).unwrap();
        let pd = phase_diagram(&bath, &q, &[0.5], &[0.4], &cfg()).unwrap();
        let b = bath.at_temperature(0.5).unwrap();
        assert_eq!(pd.label(0, 0), classify(&b, 0.4, &q, &cfg()).unwrap());
    }

    #[test]
    fn phase_diagram_rejects_bad_axes() {
        let bath = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        let q = QubitBloch::from_polar(0.9, 0.0, 0.0).unwrap();
        assert!(phase_diagram(&bath, &q, &[], &[1.0], &cfg()).is_err());
        assert!(phase_diagram(&bath, &q, &[1.0, 0.5], &[1.0], &cfg()).is_err());
        assert!(phase_diagram(&bath, &q, &[1e-4], &[1.0], &cfg()).is_err());
        assert!(phase_diagram(&bath, &q, &[1.0], &[-1.0], &cfg()).is_err());
    }

    #[test]
    fn transition_counting() {
        assert_eq!(count_transitions(&[Separable; 5]), 0);
        assert_eq!(count_transitions(&[Separable, Unknown, Entangled, Unknown, Separable]), 2);
        assert_eq!(count_transitions(&[Unknown, Entangled, Entangled, Separable]), 1);
        assert_eq!(count_transitions(&[]), 0);
    }

    #[test]
    fn boundary_curves_are_symmetric_and_inside_disk() {
        let bath = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        let zs = [-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9];
        let sep = bloch_cut_separable(&bath, &zs, &cfg()).unwrap();
        let ent = bloch_cut_entangled(&bath, &zs, &cfg()).unwrap();
        for curve in [&sep, &ent] {
            let n = curve.points.len();
            for i in 0..n {
                let p = curve.points[i];
                let q = curve.points[n - 1 - i];
                let (a, b) = (p.rho_perp.unwrap(), q.rho_perp.unwrap());
                assert_relative_eq!(a, b, max_relative = 1e-9);
                assert!(a >= 0.0 && a <= (1.0 - p.z * p.z).sqrt() + 1e-15);
            }
        }
        assert!(bloch_cut_separable(&bath, &[1.0], &cfg()).is_err());
    }

    #[test]
    fn entangled_boundary_satisfies_condition() {
        let bath = BathSpec::new(1.0, 1.0, 0.7).unwrap();
        let tau = decoherence_time(&bath, &cfg()).unwrap();
        let e = witness(Kernel::E, &bath, tau, &cfg()).unwrap();
        let curve = bloch_cut_entangled(&bath, &[0.0, 0.3, -0.6], &cfg()).unwrap();
        for p in curve.points {
            let rho = p.rho_perp.unwrap();
            let q = QubitBloch::new(rho, 0.0, p.z).unwrap();
            assert_relative_eq!(ent_bound(&q), e, max_relative = 1e-8);
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let bath = BathSpec::new(1e-3, 1.0, 5.0).unwrap();
        let a = separable_fraction_monte_carlo(&bath, 20_000, 7, &cfg()).unwrap();
        let b = separable_fraction_monte_carlo(&bath, 20_000, 7, &cfg()).unwrap();
        assert_eq!(a, b);
        let c = separable_fraction_monte_carlo(&bath, 20_000, 8, &cfg()).unwrap();
        assert_ne!(a.hits, c.hits);
        assert!(separable_fraction_monte_carlo(&bath, 0, 7, &cfg()).is_err());
    }

    #[test]
    fn fraction_in_unit_interval() {
        for &temp in &[0.05, 0.5, 5.0] {
            let bath = BathSpec::new(1.0, 1.0, temp).unwrap();
            let f = separable_fraction(&bath, &cfg()).unwrap();
            assert!((0.0..=1.0).contains(&f));
        }
    }
}
