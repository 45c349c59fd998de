//! Closed-form per-configuration cavity dynamics.
//!
//! Everything is expressed in the frame rotating at the probe frequency, so
//! the optical frequencies enter only through the probe–cavity detuning. For
//! one classical atom configuration the cavity amplitude relaxes as
//!
//! ```text
//! alpha(t) = A + (alpha0 - A) e^{(i(delta_p - U11 D11) - kappa) t},
//! A = (eta - i U10 a0 D10) / (i (U11 D11 - delta_p) + kappa),
//! ```
//!
//! and the accumulated phase exponent is the time integral of
//! `i Im(w conj(alpha)) - kappa |alpha|²` with `w = eta - i U10 a0 D10`. The
//! real part of the exponent is the no-count norm decay; the imaginary part
//! carries the light-induced phases, quadratic in the coupling coefficient.

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::InitialDistribution;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid cavity parameters: {0}")]
    BadParams(String),
    #[error("resonance singularity: kappa = 0 and U11 D11 = delta_p give a zero denominator")]
    ResonanceSingularity,
    #[error("probe-cavity detuning must be nonzero for the dissipation-free solution")]
    ZeroDetuning,
    #[error("jump times must satisfy 0 <= t1 <= ... <= tm <= t")]
    InvalidJumpTimes,
    #[error("all superposition weights vanished (jump applied to a dark state)")]
    AllWeightsZero,
    #[error(
        "phase integral cross-check failed: analytic {analytic}, quadrature {quadrature}"
    )]
    QuadratureMismatch { analytic: Complex64, quadrature: Complex64 },
}

/// Physical constants of the probe–cavity–atom system.
///
/// The dispersive couplings are `U_lm = g_l g_m / delta_a`. Both drive
/// channels are supported: the scattered transverse probe `a0` and the mirror
/// drive `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub kappa: f64,
    pub delta_p: f64,
    pub delta_a: f64,
    pub g0: f64,
    pub g1: f64,
    pub a0: Complex64,
    pub eta: Complex64,
    pub alpha0: Complex64,
}

impl CavityParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kappa: f64,
        delta_p: f64,
        delta_a: f64,
        g0: f64,
        g1: f64,
        a0: Complex64,
        eta: Complex64,
        alpha0: Complex64,
    ) -> Result<Self, DynamicsError> {
        if kappa.is_nan() || kappa < 0.0 {
            return Err(DynamicsError::BadParams(format!("kappa must be >= 0, got {kappa}")));
        }
        if delta_a == 0.0 || !delta_a.is_finite() {
            return Err(DynamicsError::BadParams(
                "cavity-atom detuning delta_a must be finite and nonzero".into(),
            ));
        }
        let p = Self { kappa, delta_p, delta_a, g0, g1, a0, eta, alpha0 };
        if !p.u10().is_finite() || !p.u11().is_finite() {
            return Err(DynamicsError::BadParams("derived couplings U_lm overflow".into()));
        }
        Ok(p)
    }

    /// Probe-to-cavity coupling `U10 = g0 g1 / delta_a`.
    pub fn u10(&self) -> f64 {
        self.g0 * self.g1 / self.delta_a
    }

    /// Cavity dispersive shift per atom, `U11 = g1² / delta_a`.
    pub fn u11(&self) -> f64 {
        self.g1 * self.g1 / self.delta_a
    }

    /// Scattering coefficient of the dissipative reduced model,
    /// `C = i U10 a0 / (i delta_p - kappa)`; the steady amplitude at the
    /// diffraction maximum is `C z`.
    pub fn reduced_scatter(&self) -> Complex64 {
        let i = Complex64::i();
        i * self.u10() * self.a0 / (i * self.delta_p - self.kappa)
    }

    /// Scattering coefficient of the dissipation-free model,
    /// `C = U10 a0 / delta_p`.
    pub fn unitary_scatter(&self) -> Result<Complex64, DynamicsError> {
        if self.delta_p == 0.0 {
            return Err(DynamicsError::ZeroDetuning);
        }
        Ok(self.a0 * (self.u10() / self.delta_p))
    }

    /// Scaled measurement time `tau = 2 |C|² kappa t`.
    pub fn tau_from_time(&self, t: f64) -> f64 {
        2.0 * self.reduced_scatter().norm_sqr() * self.kappa * t
    }

    pub fn time_from_tau(&self, tau: f64) -> Result<f64, DynamicsError> {
        let rate = 2.0 * self.reduced_scatter().norm_sqr() * self.kappa;
        if rate <= 0.0 {
            return Err(DynamicsError::BadParams(
                "time conversion needs kappa > 0 and a nonzero scatter coefficient".into(),
            ));
        }
        Ok(tau / rate)
    }
}

/// Cavity amplitude and phase exponent of one superposition component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentSolution {
    pub alpha: Complex64,
    pub phi: Complex64,
}

/// Steady-state cavity amplitude of a configuration with coupling
/// coefficients `d10`, `d11` (the Lorentzian of classical optics).
pub fn steady_amplitude(
    p: &CavityParams,
    d10: Complex64,
    d11: Complex64,
) -> Result<Complex64, DynamicsError> {
    let i = Complex64::i();
    let denom = i * (p.u11() * d11 - p.delta_p) + p.kappa;
    if denom.norm_sqr() == 0.0 {
        return Err(DynamicsError::ResonanceSingularity);
    }
    Ok((p.eta - i * p.u10() * p.a0 * d10) / denom)
}

fn decay_exponent(p: &CavityParams, d11: Complex64) -> Complex64 {
    Complex64::i() * (p.delta_p - p.u11() * d11) - p.kappa
}

/// Transient cavity amplitude in the rotating frame: starts at `alpha0` and
/// relaxes toward the steady amplitude at rate `kappa`.
pub fn transient_amplitude(
    p: &CavityParams,
    d10: Complex64,
    d11: Complex64,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    let a = steady_amplitude(p, d10, d11)?;
    let mu = decay_exponent(p, d11);
    Ok(a + (p.alpha0 - a) * (mu * t).exp())
}

/// Phase exponent accumulated at the steady amplitude `alpha`:
/// `-|alpha|² kappa t` plus a purely imaginary drive phase.
pub fn phase_exponent_steady(
    p: &CavityParams,
    d10: Complex64,
    alpha: Complex64,
    t: f64,
) -> Complex64 {
    let w = p.eta - Complex64::i() * p.u10() * p.a0 * d10;
    Complex64::new(-alpha.norm_sqr() * p.kappa * t, (w * alpha.conj()).im * t)
}

/// Phase exponent integrated over the transient amplitude, evaluated with the
/// analytic antiderivative of the exponential pieces.
pub fn phase_exponent_transient(
    p: &CavityParams,
    d10: Complex64,
    d11: Complex64,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    let a = steady_amplitude(p, d10, d11)?;
    let b = p.alpha0 - a;
    let mu = decay_exponent(p, d11);
    let w = p.eta - Complex64::i() * p.u10() * p.a0 * d10;

    // E = ∫ e^{mu s} ds, G = ∫ e^{2 Re(mu) s} ds over [0, t]
    let e = if mu.norm_sqr() == 0.0 { Complex64::new(t, 0.0) } else { ((mu * t).exp() - 1.0) / mu };
    let two_re_mu = 2.0 * mu.re;
    let g = if two_re_mu == 0.0 { t } else { ((two_re_mu * t).exp() - 1.0) / two_re_mu };

    let drive = w * a.conj() * t + w * b.conj() * e.conj();
    let occupancy = a.norm_sqr() * t + b.norm_sqr() * g + 2.0 * (a.conj() * b * e).re;
    Ok(Complex64::new(-p.kappa * occupancy, drive.im))
}

/// [`phase_exponent_transient`] with a runtime consistency check: the analytic
/// value is compared against adaptive quadrature of the integrand to 1e-10
/// relative accuracy.
pub fn phase_exponent_transient_checked(
    p: &CavityParams,
    d10: Complex64,
    d11: Complex64,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    let analytic = phase_exponent_transient(p, d10, d11, t)?;
    let a = steady_amplitude(p, d10, d11)?;
    let mu = decay_exponent(p, d11);
    let b = p.alpha0 - a;
    let w = p.eta - Complex64::i() * p.u10() * p.a0 * d10;
    let integrand = |s: f64| {
        let alpha = a + b * (mu * s).exp();
        Complex64::new(-p.kappa * alpha.norm_sqr(), (w * alpha.conj()).im)
    };
    let quadrature = adaptive_simpson(&integrand, 0.0, t, 1e-13 * (1.0 + analytic.norm()));
    let scale = analytic.norm().max(1e-6);
    if (analytic - quadrature).norm() > 1e-10 * scale {
        return Err(DynamicsError::QuadratureMismatch { analytic, quadrature });
    }
    Ok(analytic)
}

fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
        (fa + 4.0 * fm + fb) * (h / 6.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Cavity amplitude with dissipation and dispersive shift switched off
/// (rotating frame): `C d10 (1 - e^{i delta_p t})`.
pub fn unitary_amplitude(
    p: &CavityParams,
    d10: Complex64,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    let c = p.unitary_scatter()?;
    Ok(c * d10 * (1.0 - (Complex64::i() * p.delta_p * t).exp()))
}

/// Purely imaginary phase exponent of the dissipation-free evolution:
/// `i |C d10|² (sin(delta_p t) - delta_p t)`.
pub fn unitary_phase(
    p: &CavityParams,
    d10: Complex64,
    t: f64,
) -> Result<Complex64, DynamicsError> {
    let c = p.unitary_scatter()?;
    let x = (c * d10).norm_sqr();
    Ok(Complex64::new(0.0, x * ((p.delta_p * t).sin() - p.delta_p * t)))
}

/// Conditional superposition weights after a photocount record.
#[derive(Debug, Clone)]
pub struct ConditionalState {
    /// Unnormalized weight of each configuration.
    pub weights: Vec<Complex64>,
    /// Cavity amplitude and phase exponent of each configuration at `t`.
    pub solutions: Vec<ComponentSolution>,
    /// Normalization `F(t)` (Euclidean norm of `weights`).
    pub norm: f64,
}

impl ConditionalState {
    pub fn normalized(&self) -> Vec<Complex64> {
        self.weights.iter().map(|w| w / self.norm).collect()
    }
}

/// General conditional state after `m` photocounts at `jump_times` and total
/// time `t`: each configuration carries
/// `c_q0 · alpha_q(t1)···alpha_q(tm) · e^{Phi_q(t)}` with the transient
/// amplitude and phase.
pub fn conditional_state(
    initial: &[Complex64],
    couplings: &[(Complex64, Complex64)],
    p: &CavityParams,
    jump_times: &[f64],
    t: f64,
) -> Result<ConditionalState, DynamicsError> {
    assert_eq!(initial.len(), couplings.len());
    let ordered = jump_times.windows(2).all(|w| w[0] <= w[1]);
    if !ordered
        || jump_times.first().is_some_and(|&t1| t1 < 0.0)
        || jump_times.last().is_some_and(|&tm| tm > t)
    {
        return Err(DynamicsError::InvalidJumpTimes);
    }
    let mut weights = Vec::with_capacity(initial.len());
    let mut solutions = Vec::with_capacity(initial.len());
    for (&c0, &(d10, d11)) in initial.iter().zip(couplings) {
        let mut w = c0;
        for &ti in jump_times {
            w *= transient_amplitude(p, d10, d11, ti)?;
        }
        let phi = phase_exponent_transient(p, d10, d11, t)?;
        w *= phi.exp();
        weights.push(w);
        solutions.push(ComponentSolution { alpha: transient_amplitude(p, d10, d11, t)?, phi });
    }
    finish_state(weights, solutions)
}

/// Steady-regime conditional state: the `m` detections contribute the
/// prefactor `alpha_q^m` and the phase exponent is the steady-state one.
pub fn conditional_state_steady(
    initial: &[Complex64],
    couplings: &[(Complex64, Complex64)],
    p: &CavityParams,
    photocounts: u32,
    t: f64,
) -> Result<ConditionalState, DynamicsError> {
    assert_eq!(initial.len(), couplings.len());
    let mut weights = Vec::with_capacity(initial.len());
    let mut solutions = Vec::with_capacity(initial.len());
    for (&c0, &(d10, d11)) in initial.iter().zip(couplings) {
        let alpha = steady_amplitude(p, d10, d11)?;
        let phi = phase_exponent_steady(p, d10, alpha, t);
        weights.push(c0 * alpha.powu(photocounts) * phi.exp());
        solutions.push(ComponentSolution { alpha, phi });
    }
    finish_state(weights, solutions)
}

fn finish_state(
    weights: Vec<Complex64>,
    solutions: Vec<ComponentSolution>,
) -> Result<ConditionalState, DynamicsError> {
    let norm_sq: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(DynamicsError::AllWeightsZero);
    }
    Ok(ConditionalState { weights, solutions, norm: norm_sq.sqrt() })
}

/// Collapse-and-revival coherence proxy: the modulus of the average of the
/// quadratic phase factors `e^{-i delta_p c² n² t}` over the atom-number
/// distribution. Equals 1 at `t = 0` and at every revival
/// `t_rev = 2π/(delta_p c²)` when the grid is integer.
pub fn coherence_proxy(dist: &InitialDistribution, delta_p: f64, c: f64, t: f64) -> f64 {
    let rate = delta_p * c * c;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (&n, &p0) in dist.z_grid().iter().zip(dist.probabilities()) {
        let phase = -rate * (n as f64) * (n as f64) * t;
        re += p0 * phase.cos();
        im += p0 * phase.sin();
    }
    (re * re + im * im).sqrt()
}

/// Revival period of the quadratic phase evolution, `2π/(delta_p c²)`.
pub fn revival_time(delta_p: f64, c: f64) -> Result<f64, DynamicsError> {
    let rate = delta_p * c * c;
    if rate == 0.0 || !rate.is_finite() {
        return Err(DynamicsError::ZeroDetuning);
    }
    Ok(2.0 * std::f64::consts::PI / rate)
}
