//! Brute-force oracle for a single-mode environment.
//!
//! The qubit couples through `sigma_z`, so the total Hamiltonian is block
//! diagonal in the qubit basis with conditional oscillator Hamiltonians
//!
//! ```text
//! H_± = ±Omega/2 + omega a^dag a ± g (a + a^dag)
//! ```
//!
//! acting on a truncated Fock space of dimension `N`. Each block is
//! diagonalised once; evolution at any time is then a change of phases.
//! States are stored in the `qubit ⊗ Fock` basis: index `i*N + n` holds qubit
//! level `i` (0 for `sigma_z = +1`) and photon number `n`.
//!
//! The coupling is taken real and nonnegative. A complex coupling `g e^{i
//! theta}` is equivalent to `|g|` after the mode rotation `a -> a e^{-i
//! theta}`, which leaves every quantity computed here unchanged.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::criteria::ent_bound;
use crate::error::{Error, Result};
use crate::kernels::{one_minus_cos_over_sq, sin_over, KernelValue};
use crate::model::{thermal_occupation, QubitBloch, ReducedState};
use crate::roots::bisect_predicate;

/// Maximum thermal weight allowed beyond the truncation.
pub const TAIL_BOUND: f64 = 1e-10;

/// Maximum population tolerated in the two highest Fock levels after evolution.
pub const LEAKAGE_BOUND: f64 = 1e-6;

/// The partial transpose counts as negative when its smallest eigenvalue
/// drops below `-NPT_THRESHOLD`.
pub const NPT_THRESHOLD: f64 = 1e-10;

/// Default number of scan points used by [`FockSystem::tau_crit`].
pub const DEFAULT_SCAN_POINTS: usize = 2000;

/// A single environmental oscillator with its coupling and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    omega: f64,
    g: f64,
    temperature: f64,
    n_trunc: usize,
}

impl ModeSpec {
    /// Build a mode. Without an explicit truncation the dimension is chosen
    /// from the thermal tail bound plus a displacement margin.
    pub fn new(omega: f64, g: f64, temperature: f64, n_trunc: Option<usize>) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::config("omega", format!("must be positive, got {omega}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::config("g", format!("must be nonnegative, got {g}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::config("temperature", format!("must be positive, got {temperature}")));
        }
        let n_trunc = n_trunc.unwrap_or_else(|| default_truncation(omega, temperature));
        let mode = Self {
            omega,
            g,
            temperature,
            n_trunc,
        };
        if n_trunc < 2 {
            return Err(Error::Truncation {
                n: n_trunc,
                detail: "need at least two Fock levels".into(),
            });
        }
        let tail = mode.tail_weight();
        if !(tail < TAIL_BOUND) {
            return Err(Error::Truncation {
                n: n_trunc,
                detail: format!("thermal weight beyond the cut is {tail:.3e} >= {TAIL_BOUND:e}"),
            });
        }
        Ok(mode)
    }

    /// Mode with a complex coupling, reduced to `|g|` by a phase rotation of the mode.
    pub fn with_complex_coupling(omega: f64, g: Complex64, temperature: f64, n_trunc: Option<usize>) -> Result<Self> {
        Self::new(omega, g.norm(), temperature, n_trunc)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    /// Mean thermal occupation.
    pub fn occupation(&self) -> f64 {
        thermal_occupation(self.omega, self.temperature).expect("validated in constructor")
    }

    /// Boltzmann ratio `q = exp(-omega/T) = n/(n+1)`.
    fn boltzmann_ratio(&self) -> f64 {
        (-self.omega / self.temperature).exp()
    }

    /// Thermal weight of all levels `>= N`, `(n/(n+1))^N`.
    pub fn tail_weight(&self) -> f64 {
        self.boltzmann_ratio().powi(self.n_trunc as i32)
    }
}

/// Smallest `N` meeting the tail bound, plus a margin, and at least `10n + 20`.
pub fn default_truncation(omega: f64, temperature: f64) -> usize {
    let q = (-omega / temperature).exp();
    let tail = if q > 0.0 {
        (TAIL_BOUND.ln() / q.ln()).ceil().max(1.0) as usize
    } else {
        1
    };
    let nbar = q / (1.0 - q);
    (tail + 20).max((10.0 * nbar).ceil() as usize + 20)
}

/// Thermal Fock populations `p_n = n^n/(n+1)^(n+1)`, renormalised after truncation.
pub fn thermal_probabilities(mode: &ModeSpec) -> Vec<f64> {
    let q = mode.boltzmann_ratio();
    let mut p: Vec<f64> = (0..mode.n_trunc).map(|n| (1.0 - q) * q.powi(n as i32)).collect();
    let norm: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= norm);
    p
}

/// Thermal density matrix of the mode (diagonal in the Fock basis).
pub fn thermal_state(mode: &ModeSpec) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(thermal_probabilities(mode)))
}

/// Annihilation operator on `N` Fock levels.
pub fn annihilation(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// Density matrix of qubit plus mode, `2N x 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalState {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl TotalState {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() < 4 {
            return Err(Error::domain(
                "TotalState",
                format!("expected a 2N x 2N matrix, got {}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        Ok(Self {
            n: matrix.nrows() / 2,
            matrix,
        })
    }

    /// Product state `rho_sys ⊗ rho_mode`.
    pub fn product(qubit: &ReducedState, mode: &DMatrix<Complex64>) -> Result<Self> {
        let n = mode.nrows();
        let q = [
            [Complex64::from(qubit.rho00), qubit.rho01],
            [qubit.rho01.conj(), Complex64::from(qubit.rho11)],
        ];
        Self::from_matrix(DMatrix::from_fn(2 * n, 2 * n, |i, j| q[i / n][j / n] * mode[(i % n, j % n)]))
    }

    pub fn fock_dimension(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// Sorted eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Qubit state after tracing out the mode.
    pub fn reduced_qubit(&self) -> ReducedState {
        let n = self.n;
        let block_trace = |i: usize, j: usize| (0..n).map(|k| self.matrix[(i * n + k, j * n + k)]).sum::<Complex64>();
        ReducedState {
            rho00: block_trace(0, 0).re,
            rho11: block_trace(1, 1).re,
            rho01: block_trace(0, 1),
        }
    }

    /// Photon-number distribution of the mode.
    pub fn fock_populations(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| self.matrix[(k, k)].re + self.matrix[(n + k, n + k)].re)
            .collect()
    }
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Eigensolver(m.nrows()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Partial transpose on the qubit factor: the two off-diagonal `N x N`
/// blocks trade places, their contents untouched.
pub fn partial_transpose(state: &TotalState) -> DMatrix<Complex64> {
    let n = state.n;
    let mut out = state.matrix.clone();
    out.view_mut((0, n), (n, n)).copy_from(&state.matrix.view((n, 0), (n, n)));
    out.view_mut((n, 0), (n, n)).copy_from(&state.matrix.view((0, n), (n, n)));
    out
}

/// Smallest eigenvalue of the partial transpose.
pub fn min_pt_eigenvalue(state: &TotalState) -> Result<f64> {
    Ok(hermitian_eigenvalues(&partial_transpose(state))?[0])
}

/// Whether the partial transpose has an eigenvalue below `-threshold`.
///
/// Decided by attempting a Cholesky factorisation of `PT + threshold*I`,
/// several times cheaper than a full eigensolve.
pub fn is_npt(state: &TotalState, threshold: f64) -> bool {
    let mut pt = partial_transpose(state);
    for i in 0..pt.nrows() {
        pt[(i, i)] += threshold;
    }
    !is_positive_definite(pt)
}

/// Cholesky-Crout on a Hermitian matrix, stopping at the first
/// nonpositive pivot. Only the lower triangle is read.
fn is_positive_definite(mut m: DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= m[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let pivot = d.sqrt();
        m[(j, j)] = Complex64::from(pivot);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / pivot;
        }
    }
    true
}

/// Truncated Fock representation with the conditional Hamiltonians
/// diagonalised.
#[derive(Debug, Clone)]
pub struct FockSystem {
    mode: ModeSpec,
    omega_q: f64,
    probabilities: Vec<f64>,
    /// Eigenpairs of `H_+` (index 0) and `H_-` (index 1).
    blocks: [SymmetricEigen<f64, nalgebra::Dyn>; 2],
}

impl FockSystem {
    pub fn new(mode: ModeSpec, omega_q: f64) -> Result<Self> {
        if !omega_q.is_finite() {
            return Err(Error::config("omega_q", "must be finite"));
        }
        let blocks = [1.0, -1.0].map(|sign| SymmetricEigen::new(conditional_hamiltonian(&mode, omega_q, sign)));
        Ok(Self {
            probabilities: thermal_probabilities(&mode),
            mode,
            omega_q,
            blocks,
        })
    }

    pub fn mode(&self) -> &ModeSpec {
        &self.mode
    }

    pub fn omega_q(&self) -> f64 {
        self.omega_q
    }

    pub fn dimension(&self) -> usize {
        self.mode.n_trunc
    }

    /// `H_+` for `sign > 0`, `H_-` otherwise.
    pub fn hamiltonian(&self, sign: f64) -> DMatrix<f64> {
        conditional_hamiltonian(&self.mode, self.omega_q, sign)
    }

    /// Eigenvalues and eigenvectors of `H_+` (`sign > 0`) or `H_-`.
    pub fn eigen(&self, sign: f64) -> &SymmetricEigen<f64, nalgebra::Dyn> {
        &self.blocks[usize::from(sign < 0.0)]
    }

    /// `exp(-i H t)` for one block.
    fn propagator(&self, block: usize, t: f64) -> DMatrix<Complex64> {
        let eig = &self.blocks[block];
        let v = eig.eigenvectors.map(Complex64::from);
        let mut vp = v.clone();
        for (k, mut col) in vp.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        }
        vp * v.transpose()
    }

    /// Total state `U(t) (rho_sys ⊗ rho_th) U(t)^dag`.
    pub fn evolve(&self, initial: &QubitBloch, t: f64) -> Result<TotalState> {
        let n = self.dimension();
        let q = initial.to_reduced();
        let sqrt_p: Vec<f64> = self.probabilities.iter().map(|p| p.sqrt()).collect();
        let factor = |block: usize| {
            let mut x = self.propagator(block, t);
            for (k, mut col) in x.column_iter_mut().enumerate() {
                col *= Complex64::from(sqrt_p[k]);
            }
            x
        };
        let (xp, xm) = (factor(0), factor(1));
        let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(&xp * xp.adjoint() * Complex64::from(q.rho00)));
        m.view_mut((n, n), (n, n)).copy_from(&(&xm * xm.adjoint() * Complex64::from(q.rho11)));
        let off = &xp * xm.adjoint() * q.rho01;
        m.view_mut((n, 0), (n, n)).copy_from(&off.adjoint());
        m.view_mut((0, n), (n, n)).copy_from(&off);
        let state = TotalState { n, matrix: m };

        let pops = state.fock_populations();
        let top: f64 = pops[n - 2..].iter().sum();
        if top > LEAKAGE_BOUND {
            return Err(Error::Truncation {
                n,
                detail: format!("top Fock levels hold {top:.3e} at t = {t}; enlarge N"),
            });
        }
        Ok(state)
    }

    /// All times in `(0, t_max]` where the partial transpose switches
    /// between positive and negative.
    ///
    /// The NPT indicator is sampled on `scan_points` uniform steps and each
    /// change is bisected to a relative width of `1e-6`.
    pub fn tau_crit(&self, initial: &QubitBloch, t_max: f64, scan_points: usize) -> Result<Vec<f64>> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain("tau_crit", format!("t_max = {t_max}")));
        }
        if scan_points < 1 {
            return Err(Error::config("scan_points", "must be positive"));
        }
        if initial.rho_perp_sq() == 0.0 {
            // block-diagonal in the qubit basis: a convex mix of product states
            return Ok(Vec::new());
        }
        let npt = |t: f64| self.evolve(initial, t).map(|s| is_npt(&s, NPT_THRESHOLD));
        let grid: Vec<f64> = (0..=scan_points).map(|k| t_max * k as f64 / scan_points as f64).collect();
        let flags: Vec<bool> = grid.par_iter().map(|&t| npt(t)).collect::<Result<_>>()?;
        let mut crossings = Vec::new();
        for k in 1..grid.len() {
            if flags[k] != flags[k - 1] {
                let entering = flags[k];
                let t = bisect_predicate(|t| npt(t).map(|f| f == entering), grid[k - 1], grid[k], 1e-6, 200)?;
                crossings.push(t);
            }
        }
        Ok(crossings)
    }
}

fn conditional_hamiltonian(mode: &ModeSpec, omega_q: f64, sign: f64) -> DMatrix<f64> {
    let n = mode.n_trunc;
    let a = annihilation(n);
    let x = &a + a.transpose();
    let mut h = x * (sign * mode.g);
    for k in 0..n {
        h[(k, k)] += mode.omega * k as f64 + sign * 0.5 * omega_q;
    }
    h
}

/// Convenience wrapper: build the Fock system and evolve once.
pub fn evolve_total(initial: &QubitBloch, mode: &ModeSpec, omega_q: f64, t: f64) -> Result<TotalState> {
    FockSystem::new(*mode, omega_q)?.evolve(initial, t)
}

/// Convenience wrapper around [`FockSystem::tau_crit`] with the default scan.
pub fn tau_crit(initial: &QubitBloch, mode: &ModeSpec, omega_q: f64, t_max: f64) -> Result<Vec<f64>> {
    FockSystem::new(*mode, omega_q)?.tau_crit(initial, t_max, DEFAULT_SCAN_POINTS)
}

/// Single-mode decoherence exponent `4 g^2 (2n+1)(1 - cos w t)/w^2`.
pub fn gamma_integral_single(mode: &ModeSpec, t: f64) -> f64 {
    let coth = 2.0 * mode.occupation() + 1.0;
    4.0 * mode.g * mode.g * coth * one_minus_cos_over_sq(mode.omega, t)
}

/// Closed-form kernels for one mode.
pub fn discrete_kernels(mode: &ModeSpec, t: f64) -> Result<KernelValue> {
    let x = mode.omega / mode.temperature;
    let ex = x.exp();
    if !ex.is_finite() || mode.occupation() == 0.0 {
        return Err(Error::Divergent(format!(
            "thermal occupation vanishes at omega/T = {x:.1}; A and S diverge"
        )));
    }
    let g2 = mode.g * mode.g;
    let h = one_minus_cos_over_sq(mode.omega, t);
    let coth = 2.0 * mode.occupation() + 1.0;
    Ok(KernelValue {
        a: 2.0 * g2 * x.exp_m1() * h,
        b: 2.0 * g2 * (ex + 1.0) * h,
        s: 4.0 * g2 * ex * h,
        sbar: 4.0 * g2 * (-x).exp() * h,
        e: 8.0 * g2 * x.sinh() * h,
        gamma: 4.0 * g2 * coth * sin_over(mode.omega, t),
        gamma_integral: 4.0 * g2 * coth * h,
    })
}

/// Closed-form onset times of the entanglement condition for one mode.
///
/// `E(t) = 8 g^2 sinh(w/T)(1 - cos w t)/w^2` exceeds the state's bound
/// between `arccos(c)/w` and `(2 pi - arccos(c))/w` of every period, with
/// `c = 1 - bound w^2 / (8 g^2 sinh(w/T))`. Returns all boundary times in
/// `(0, t_max]`; a pure state off the poles reports `0` as its first entry.
pub fn tau_ent_single(initial: &QubitBloch, mode: &ModeSpec, t_max: f64) -> Vec<f64> {
    let bound = ent_bound(initial);
    let amplitude = 8.0 * mode.g * mode.g * (mode.omega / mode.temperature).sinh() / (mode.omega * mode.omega);
    if bound.is_infinite() || amplitude == 0.0 {
        return Vec::new();
    }
    let c = 1.0 - bound / amplitude;
    if c <= -1.0 {
        return Vec::new();
    }
    let theta = c.acos();
    let period = 2.0 * std::f64::consts::PI / mode.omega;
    let mut out = Vec::new();
    if bound == 0.0 {
        out.push(0.0);
    }
    let mut k = 0.0;
    loop {
        let base = k * period;
        if base > t_max {
            break;
        }
        for edge in [base + theta / mode.omega, base + period - theta / mode.omega] {
            if edge > 0.0 && edge <= t_max && out.last().is_none_or(|&l| edge - l > 1e-12 * period) {
                out.push(edge);
            }
        }
        k += 1.0;
    }
    out
}

/// Expectation value of the partial transpose in the optimised test state.
///
/// Negative exactly when the entanglement condition holds.
pub fn ept_value(initial: &QubitBloch, mode: &ModeSpec, t: f64) -> Result<f64> {
    let r = initial.r();
    if r == 0.0 {
        return Err(Error::domain("ept_value", "test state undefined for r = 0"));
    }
    let k = discrete_kernels(mode, t)?;
    let z = initial.z();
    let perp = initial.rho_perp_sq();
    let first = (-k.a + 0.5 * k.sbar).exp() * (1.0 - z * z / r);
    let second = if perp == 0.0 {
        0.0
    } else {
        (k.b - 0.5 * k.sbar).exp() * perp / r
    };
    Ok((first - second) / (2.0 * (mode.occupation() + 1.0)))
}

/// Determinant of the partial P-function, `e^{-2A}(1 - z^2) - e^{2B}(x^2 + y^2)`.
pub fn det_p(initial: &QubitBloch, mode: &ModeSpec, t: f64) -> Result<f64> {
    let k = discrete_kernels(mode, t)?;
    let z = initial.z();
    let perp = initial.rho_perp_sq();
    let first = (-2.0 * k.a).exp() * (1.0 - z * z);
    let second = if perp == 0.0 { 0.0 } else { (2.0 * k.b).exp() * perp };
    Ok(first - second)
}

/// Qubit amplitudes `(u, v)` of the pure state with the smallest overlap
/// with the transposed initial qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStateCoeffs {
    pub u: Complex64,
    pub v: Complex64,
}

impl TestStateCoeffs {
    pub fn new(initial: &QubitBloch) -> Result<Self> {
        let r = initial.r();
        if r == 0.0 {
            return Err(Error::domain("TestStateCoeffs", "undefined for r = 0"));
        }
        let c = (initial.z() / r).clamp(-1.0, 1.0);
        Ok(Self {
            u: Complex64::from(-(0.5 * (1.0 - c)).sqrt()),
            v: Complex64::from_polar((0.5 * (1.0 + c)).sqrt(), -initial.phi()),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u.norm_sqr() + self.v.norm_sqr()
    }
}
