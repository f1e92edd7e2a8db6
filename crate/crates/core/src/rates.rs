//! Closed-form decoherence rates and everything built on them: the decay
//! function, its temperature scaling, the transient mean rate and the
//! coherence time.
//!
//! Internally every formula works in dimensionless time `x = t/τ_d` and
//! returns `γ/Γ_T`; the public operations convert to seconds and s⁻¹.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle;
use crate::params::{
    mean_and_spread, radii_from_spread, DerivedScales, ElectronicLevels, InitialState,
};
use crate::quad::QuadratureConfig;

pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-4;

/// Below this |σ| the two-site closed form loses digits to cancellation
/// (error grows like ε/σ³) and the second-order expansion in σ is used
/// instead. Its truncation error is below 12·σ⁴ in units of Γ_T/η².
pub const SERIES_SWITCH: f64 = 2e-3;

/// Inputs of the closed-form rate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// s
    pub tau_d: f64,
    /// s⁻¹
    pub gamma_t: f64,
    /// |σ| below which the equal-radii rate is used.
    pub degeneracy_threshold: f64,
}

impl RateParams {
    pub fn new(eta_plus: f64, eta_minus: f64, tau_d: f64, gamma_t: f64) -> Result<Self> {
        let p = RateParams {
            eta_plus,
            eta_minus,
            tau_d,
            gamma_t,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
        };
        p.validate()?;
        Ok(p)
    }

    /// From the mean relative radius `eta` and relative difference `sigma`.
    pub fn from_spread(eta: f64, sigma: f64, tau_d: f64, gamma_t: f64) -> Result<Self> {
        let (ep, em) = radii_from_spread(eta, sigma);
        Self::new(ep, em, tau_d, gamma_t)
    }

    /// Unit scales, `τ_d = Γ_T = 1`: values come out as `γ/Γ_T` against `t/τ_d`.
    pub fn unit(eta: f64, sigma: f64) -> Result<Self> {
        Self::from_spread(eta, sigma, 1.0, 1.0)
    }

    /// Parameters for a physical system at temperature `T > 0`.
    pub fn from_scales(scales: &DerivedScales, temperature: f64) -> Result<Self> {
        let gamma_t = scales.gamma_t(temperature)?;
        if gamma_t <= 0.0 {
            return Err(Error::domain(
                "temperature.K",
                temperature,
                "rate parameters need T > 0",
            ));
        }
        Self::new(scales.eta_plus, scales.eta_minus, scales.tau_d, gamma_t)
    }

    /// Parameters at `T = T0`, where `Γ_T = ω_d`.
    pub fn at_reference_temperature(scales: &DerivedScales) -> Result<Self> {
        Self::new(
            scales.eta_plus,
            scales.eta_minus,
            scales.tau_d,
            scales.omega_d,
        )
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self> {
        let p = RateParams {
            degeneracy_threshold: threshold,
            ..self
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, eta) in [("eta_plus", self.eta_plus), ("eta_minus", self.eta_minus)] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::domain(
                    name,
                    eta,
                    "relative Bohr radius must lie in (0, 1)",
                ));
            }
        }
        if !(self.tau_d > 0.0 && self.tau_d.is_finite()) {
            return Err(Error::domain("tau_d", self.tau_d, "must be positive"));
        }
        if !(self.gamma_t > 0.0 && self.gamma_t.is_finite()) {
            return Err(Error::domain("Gamma_T", self.gamma_t, "must be positive"));
        }
        if !(self.degeneracy_threshold > 0.0 && self.degeneracy_threshold < 1e-2) {
            return Err(Error::domain(
                "degeneracy_threshold",
                self.degeneracy_threshold,
                "must lie in (0, 1e-2)",
            ));
        }
        Ok(())
    }

    /// Mean relative radius.
    pub fn eta(&self) -> f64 {
        mean_and_spread(self.eta_plus, self.eta_minus).0
    }

    /// Relative difference `(η₊ − η₋)/η`.
    pub fn sigma(&self) -> f64 {
        mean_and_spread(self.eta_plus, self.eta_minus).1
    }

    pub fn eta_min(&self) -> f64 {
        self.eta_plus.min(self.eta_minus)
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_plus.max(self.eta_minus)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma().abs() < self.degeneracy_threshold
    }
}

/// Ordered site pair `(a, b)` of a single two-site rate term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SitePair {
    PlusMinus,
    MinusPlus,
}

impl SitePair {
    fn radii(self, p: &RateParams) -> (f64, f64) {
        match self {
            SitePair::PlusMinus => (p.eta_plus, p.eta_minus),
            SitePair::MinusPlus => (p.eta_minus, p.eta_plus),
        }
    }
}

/// γ_ab/Γ_T at `x = t/τ_d`, as printed, with the absolute values kept.
pub(crate) fn pair_ratio(x: f64, eta_a: f64, eta_b: f64) -> f64 {
    let y = x / eta_a;
    let (ea2, eb2) = (eta_a * eta_a, eta_b * eta_b);
    let r = ea2 / (ea2 - eb2);
    let r2 = r * r;
    let c = 0.5 * eta_a * (ea2 - 5.0 * eb2) / (ea2 - eb2);
    let xp = (1.0 + x).abs();
    let xm = (1.0 - x).abs();
    let onsite = (y * y * y / 3.0 + y * y / 2.0 + y / 4.0) * (-2.0 * y).exp();
    let forward = r2 * (xp + c) * (-2.0 * xp / eta_a).exp();
    let backward = r2 * (xm + c) * (-2.0 * xm / eta_a).exp();
    (onsite + forward - backward) / ea2
}

/// γ0/Γ_T, the equal-radii rate.
pub(crate) fn equal_radii_ratio(x: f64, eta: f64) -> f64 {
    let y = x / eta;
    let up = (1.0 + x).abs() / eta;
    let um = (1.0 - x).abs() / eta;
    let bracket = |u: f64| u * u * u / 6.0 + u * u / 2.0 + 5.0 * u / 8.0 + 5.0 / 16.0;
    let onsite = (2.0 * y * y * y / 3.0 + y * y + y / 2.0) * (-2.0 * y).exp();
    let forward = eta * bracket(up) * (-2.0 * up).exp();
    let backward = eta * bracket(um) * (-2.0 * um).exp();
    (onsite + forward - backward) / (eta * eta)
}

/// Coefficient of σ² in the expansion of γ/Γ_T about equal radii.
pub(crate) fn second_order_ratio(x: f64, eta: f64) -> f64 {
    let y = x / eta;
    let up = (1.0 + x).abs() / eta;
    let um = (1.0 - x).abs() / eta;
    let onsite = (y.powi(5) / 3.0 - 1.5 * y.powi(4) + 0.25 * y.powi(3) + 1.5 * y * y + 0.75 * y)
        * (-2.0 * y).exp();
    let cross = |u: f64| {
        (u.powi(5) / 60.0 - u.powi(3) / 48.0 - u * u / 32.0 - u / 32.0 - 1.0 / 64.0)
            * (-2.0 * u).exp()
    };
    onsite / (eta * eta) + (cross(up) - cross(um)) / eta
}

/// γ/Γ_T at `x = t/τ_d` with the branch selection of [`gamma`].
pub fn rate_ratio(x: f64, p: &RateParams) -> f64 {
    let sigma = p.sigma();
    let eta = p.eta();
    if sigma.abs() < p.degeneracy_threshold {
        equal_radii_ratio(x, eta)
    } else if sigma.abs() < SERIES_SWITCH {
        equal_radii_ratio(x, eta) + sigma * sigma * second_order_ratio(x, eta)
    } else {
        pair_ratio(x, p.eta_plus, p.eta_minus) + pair_ratio(x, p.eta_minus, p.eta_plus)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "t",
            t,
            "time must be finite and non-negative",
        ))
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_finite() && temperature >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "temperature.K",
            temperature,
            "must be finite and non-negative",
        ))
    }
}

/// A single ordered two-site term γ_ab(t), s⁻¹. Refuses degenerate radii,
/// where the term diverges; [`gamma`] handles that case.
pub fn gamma_ab(t: f64, pair: SitePair, p: &RateParams) -> Result<f64> {
    check_time(t)?;
    p.validate()?;
    if p.is_degenerate() {
        return Err(Error::Degenerate {
            sigma: p.sigma(),
            threshold: p.degeneracy_threshold,
        });
    }
    let (ea, eb) = pair.radii(p);
    Ok(p.gamma_t * pair_ratio(t / p.tau_d, ea, eb))
}

/// Decoherence rate γ(t) = Σ_{a≠b} γ_ab(t), s⁻¹.
pub fn gamma(t: f64, p: &RateParams) -> Result<f64> {
    check_time(t)?;
    p.validate()?;
    Ok(p.gamma_t * rate_ratio(t / p.tau_d, p))
}

/// Equal-radii rate γ0(t) at the mean relative radius, s⁻¹.
pub fn gamma0(t: f64, p: &RateParams) -> Result<f64> {
    check_time(t)?;
    p.validate()?;
    Ok(p.gamma_t * equal_radii_ratio(t / p.tau_d, p.eta()))
}

/// Kernels `(A(x), B(x))` of the equal-radii decay function, carrying the
/// positive and the negative rate peak respectively. Defined for `x >= 0`.
pub fn peak_kernels(x: f64) -> (f64, f64) {
    let e = (-2.0 * x).exp();
    let a = PI * (1.25 - (2.0 * x * x * x / 3.0 + 2.0 * x * x + 2.5 * x + 1.25) * e);
    let b = PI * (x * x * x / 6.0 + 0.75 * x * x + 11.0 / 8.0 * x + 1.0) * e;
    (a, b)
}

fn kernel_b(x: f64) -> f64 {
    peak_kernels(x).1
}

/// `ln G0(x)` for equal radii at the mean η, `x = t/τ_d`. The step function
/// at `x = 1` is applied as an exact piecewise split.
pub fn ln_g0(x: f64, p: &RateParams) -> Result<f64> {
    check_time(x)?;
    p.validate()?;
    Ok(ln_g0_equal(x, p.eta()))
}

pub(crate) fn ln_g0_equal(x: f64, eta: f64) -> f64 {
    let (a, _) = peak_kernels(x / eta);
    let b1 = kernel_b(1.0 / eta);
    let mut s = a / eta + b1 - kernel_b((1.0 + x) / eta);
    if x < 1.0 {
        s += b1 - kernel_b((1.0 - x) / eta);
    } else {
        s += b1 + kernel_b((x - 1.0) / eta) - 2.0 * kernel_b(0.0);
    }
    -s
}

/// `ln G0(x)` for any radii: the closed form on the equal-radii branch,
/// otherwise `−2π ∫₀ˣ γ/Γ_T dx'` by quadrature.
pub fn ln_decay_profile(x: f64, p: &RateParams, quad: &QuadratureConfig) -> Result<f64> {
    check_time(x)?;
    p.validate()?;
    if p.is_degenerate() {
        Ok(ln_g0_equal(x, p.eta()))
    } else {
        let integral = oracle::rate_integral_ratio(x, p, quad)?;
        Ok(-2.0 * PI * integral.value)
    }
}

/// Decay function `g(t) = G0(t/τ_d)^(T/T0)`, in (0, 1].
pub fn decay(
    t: f64,
    temperature: f64,
    p: &RateParams,
    scales: &DerivedScales,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_time(t)?;
    check_temperature(temperature)?;
    if temperature == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    let ln_g0 = ln_decay_profile(t / p.tau_d, p, quad)?;
    Ok((temperature / scales.t0 * ln_g0).exp())
}

/// Where the phase φ(t) of the coherence comes from.
pub trait PhaseSource {
    fn phase(&self, t: f64) -> Result<f64>;
}

/// φ ≡ 0.
pub struct NoPhase;

impl PhaseSource for NoPhase {
    fn phase(&self, _t: f64) -> Result<f64> {
        Ok(0.0)
    }
}

impl<F: Fn(f64) -> Result<f64>> PhaseSource for F {
    fn phase(&self, t: f64) -> Result<f64> {
        self(t)
    }
}

/// The off-diagonal element ⟨g|ρ(t)|e⟩ = ξ*·sqrt(1−|ξ|²)·exp(iω0t − iφ(t))·g(t).
#[allow(clippy::too_many_arguments)]
pub fn coherence_element(
    t: f64,
    temperature: f64,
    state: &InitialState,
    levels: &ElectronicLevels,
    p: &RateParams,
    scales: &DerivedScales,
    phase: &dyn PhaseSource,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    let prefactor = state.coherence_prefactor();
    if prefactor == Complex64::new(0.0, 0.0) {
        check_time(t)?;
        return Ok(prefactor);
    }
    let g = decay(t, temperature, p, scales, quad)?;
    let angle = levels.omega0 * t - phase.phase(t)?;
    Ok(prefactor * Complex64::from_polar(g, angle))
}

/// Transient mean rate `(1/τ_d)∫₀^τ_d γ(t) dt` at temperature `T`, s⁻¹.
pub fn mean_rate(
    p: &RateParams,
    scales: &DerivedScales,
    temperature: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_temperature(temperature)?;
    p.validate()?;
    let gamma_t = scales.gamma_t(temperature)?;
    let integral = oracle::rate_integral_ratio(1.0, p, quad)?;
    Ok(gamma_t * integral.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceMethod {
    /// `(4/5π)(R/s)(T0/T)`, valid for equal radii and η ≪ 1.
    Asymptotic,
    /// `1/γ̄` from the quadrature of the closed-form rate.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTime {
    /// s; `f64::INFINITY` at T = 0.
    pub value: f64,
    pub method: CoherenceMethod,
    /// Set when the asymptotic formula is used outside its range.
    pub warning: Option<String>,
}

/// Order-of-magnitude coherence time `τ_c = 1/γ̄`.
pub fn coherence_time(
    p: &RateParams,
    scales: &DerivedScales,
    temperature: f64,
    method: CoherenceMethod,
    quad: &QuadratureConfig,
) -> Result<CoherenceTime> {
    check_temperature(temperature)?;
    p.validate()?;
    if temperature == 0.0 {
        return Ok(CoherenceTime {
            value: f64::INFINITY,
            method,
            warning: None,
        });
    }
    match method {
        CoherenceMethod::Asymptotic => {
            let mut notes = Vec::new();
            if !p.is_degenerate() {
                notes.push(format!("sigma = {} is not zero", p.sigma()));
            }
            if p.eta() > 0.2 {
                notes.push(format!("eta = {} is not small", p.eta()));
            }
            // R/s = η·τ_d
            let radius_time = p.eta() * p.tau_d;
            Ok(CoherenceTime {
                value: 4.0 / (5.0 * PI) * radius_time * scales.t0 / temperature,
                method,
                warning: (!notes.is_empty())
                    .then(|| format!("asymptotic formula outside its range: {}", notes.join("; "))),
            })
        }
        CoherenceMethod::Numeric => {
            let rate = mean_rate(p, scales, temperature, quad)?;
            Ok(CoherenceTime {
                value: 1.0 / rate,
                method,
                warning: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_scales, material_preset, Geometry};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn si_scales(eta_p: f64, eta_m: f64) -> DerivedScales {
        let g = Geometry::from_relative(10e-9, eta_p, eta_m).unwrap();
        derive_scales(&material_preset("Si").unwrap(), &g).unwrap()
    }

    #[test]
    fn pair_sum_vanishes_at_zero() {
        for (eta, sigma) in [(0.1, 1.0), (0.05, 0.1), (0.3, 0.5), (0.1, 0.003)] {
            let p = RateParams::unit(eta, sigma).unwrap();
            let a = gamma_ab(0.0, SitePair::PlusMinus, &p).unwrap();
            let b = gamma_ab(0.0, SitePair::MinusPlus, &p).unwrap();
            assert!((a + b).abs() < 1e-10, "{eta} {sigma}: {}", a + b);
            assert!(gamma_ab(0.5 * eta, SitePair::PlusMinus, &p).unwrap() > 1e-3);
        }
    }

    #[test]
    fn direct_call_refuses_degenerate_radii() {
        let p = RateParams::unit(0.1, 0.0).unwrap();
        assert!(matches!(
            gamma_ab(0.5, SitePair::PlusMinus, &p),
            Err(Error::Degenerate { .. })
        ));
        assert!(gamma(0.5, &p).is_ok());
    }

    #[test]
    fn gamma0_has_recoherence_dip() {
        let p = RateParams::unit(0.1, 0.0).unwrap();
        assert!(gamma0(0.0, &p).unwrap().abs() < 1e-12);
        assert!(gamma0(1.0, &p).unwrap() < 0.0);
        // value frozen from the printed formula: -(1/η)(5/16)·2 at x = 1
        assert_relative_eq!(
            gamma0(1.0, &p).unwrap(),
            -3.124_840_947_645_402,
            max_relative = 1e-10
        );
    }

    #[test]
    fn peak_kernel_limits() {
        let (a0, b0) = peak_kernels(0.0);
        assert_eq!(a0, 0.0);
        assert_relative_eq!(b0, PI, max_relative = 1e-15);
        let (a, b) = peak_kernels(60.0);
        assert_relative_eq!(a, 1.25 * PI, max_relative = 1e-15);
        assert!(b < 1e-40);
    }

    #[test]
    fn a_kernel_is_monotone() {
        let h = 1e-3;
        let mut prev = peak_kernels(0.0).0;
        for i in 1..=10_000 {
            let a = peak_kernels(i as f64 * h).0;
            assert!(a >= prev - 1e-15, "A decreases at x = {}", i as f64 * h);
            prev = a;
        }
    }

    #[test]
    fn ln_g0_starts_at_zero_and_plateaus() {
        for eta in [0.05, 0.1, 0.3] {
            let p = RateParams::unit(eta, 0.0).unwrap();
            assert!(ln_g0(0.0, &p).unwrap().abs() < 1e-13);
            // for x > 1 + 25η every B term with a (1 ± x) argument is negligible
            let a_inf = 1.25 * PI;
            let b1 = kernel_b(1.0 / eta);
            let plateau = -(a_inf / eta + 2.0 * b1 - 2.0 * kernel_b(0.0));
            assert_relative_eq!(ln_g0(50.0, &p).unwrap(), plateau, max_relative = 1e-12);
        }
    }

    #[test]
    fn ln_g0_continuous_at_kink() {
        let p = RateParams::unit(0.1, 0.0).unwrap();
        let below = ln_g0(1.0 - 1e-12, &p).unwrap();
        let at = ln_g0(1.0, &p).unwrap();
        assert!((below - at).abs() < 1e-9);
    }

    #[test]
    fn series_branch_is_continuous() {
        let eta = 0.1;
        for x in [0.0, 0.05, 0.1, 0.5, 0.95, 1.0, 1.2, 2.0, 3.0] {
            let lo = RateParams::unit(eta, SERIES_SWITCH * (1.0 - 1e-9)).unwrap();
            let hi = RateParams::unit(eta, SERIES_SWITCH * (1.0 + 1e-9)).unwrap();
            let d = (rate_ratio(x, &lo) - rate_ratio(x, &hi)).abs();
            assert!(d < 1e-6, "x = {x}: jump {d}");
        }
    }

    #[test]
    fn degeneracy_continuity() {
        let p = RateParams::unit(0.1, 0.0).unwrap();
        let thr = p.degeneracy_threshold;
        let just_above = RateParams::unit(0.1, thr * (1.0 + 1e-6)).unwrap();
        for i in 0..=300 {
            let x = i as f64 * 0.01;
            let d = (rate_ratio(x, &just_above) - rate_ratio(x, &p)).abs();
            assert!(d <= 30.0 * thr * thr, "x = {x}: {d}");
        }
    }

    #[test]
    fn decay_edges_and_scaling() {
        let sc = si_scales(0.1, 0.1);
        let p = RateParams::from_scales(&sc, 300.0).unwrap();
        let q = QuadratureConfig::default();
        assert_eq!(decay(0.0, 300.0, &p, &sc, &q).unwrap(), 1.0);
        assert_eq!(decay(sc.tau_d, 0.0, &p, &sc, &q).unwrap(), 1.0);
        let t = 0.7 * sc.tau_d;
        let (t1, t2) = (0.1 * sc.t0, 0.002 * sc.t0);
        let g1 = decay(t, t1, &p, &sc, &q).unwrap();
        let g2 = decay(t, t2, &p, &sc, &q).unwrap();
        assert!(g1 > 0.0 && g1 < 1.0);
        assert_relative_eq!(g1.powf(t2 / t1), g2, max_relative = 1e-10);
    }

    #[test]
    fn coherence_element_cases() {
        let sc = si_scales(0.1, 0.1);
        let p = RateParams::from_scales(&sc, 300.0).unwrap();
        let q = QuadratureConfig::default();
        let levels = ElectronicLevels::new(2e12, 0.0);
        let half = InitialState::new(Complex64::new(0.5f64.sqrt(), 0.0)).unwrap();
        let c0 = coherence_element(0.0, 300.0, &half, &levels, &p, &sc, &NoPhase, &q).unwrap();
        assert_relative_eq!(c0.re, 0.5, max_relative = 1e-15);
        assert_eq!(c0.im, 0.0);
        for xi in [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)] {
            let s = InitialState::new(xi).unwrap();
            let c = coherence_element(0.3e-12, 300.0, &s, &levels, &p, &sc, &NoPhase, &q).unwrap();
            assert_eq!(c.norm(), 0.0);
        }
        let s = InitialState::new(Complex64::new(0.3, 0.4)).unwrap();
        let t = 0.4 * sc.tau_d;
        let g = decay(t, 300.0, &p, &sc, &q).unwrap();
        let phase = |tt: f64| Ok(1e12 * tt);
        let c = coherence_element(t, 300.0, &s, &levels, &p, &sc, &phase, &q).unwrap();
        assert_relative_eq!(c.norm(), 0.5 * 0.75f64.sqrt() * g, max_relative = 1e-14);
    }

    #[test]
    fn mean_rate_matches_closed_form_g0() {
        let sc = si_scales(0.1, 0.1);
        let p = RateParams::from_scales(&sc, 300.0).unwrap();
        let q = QuadratureConfig::default().with_rel_tol(1e-12);
        let temperature = 300.0;
        let mean = mean_rate(&p, &sc, temperature, &q).unwrap();
        let expected = temperature / sc.t0 * -ln_g0(1.0, &p).unwrap();
        assert_relative_eq!(mean * sc.tau_d, expected, max_relative = 1e-8);
        let doubled = mean_rate(&p, &sc, 2.0 * temperature, &q).unwrap();
        assert_relative_eq!(doubled, 2.0 * mean, max_relative = 1e-14);
    }

    #[test]
    fn coherence_time_limits() {
        let sc = si_scales(0.01, 0.01);
        let p = RateParams::from_scales(&sc, 300.0).unwrap();
        let q = QuadratureConfig::default();
        for method in [CoherenceMethod::Asymptotic, CoherenceMethod::Numeric] {
            let zero = coherence_time(&p, &sc, 0.0, method, &q).unwrap();
            assert!(zero.value.is_infinite());
            let a = coherence_time(&p, &sc, 30.0, method, &q).unwrap();
            let b = coherence_time(&p, &sc, 300.0, method, &q).unwrap();
            assert_relative_eq!(a.value / b.value, 10.0, max_relative = 1e-12);
        }
        let wide = si_scales(0.3, 0.3);
        let pw = RateParams::from_scales(&wide, 300.0).unwrap();
        let w = coherence_time(&pw, &wide, 300.0, CoherenceMethod::Asymptotic, &q).unwrap();
        assert!(w.warning.is_some());
        let ok = coherence_time(&p, &sc, 300.0, CoherenceMethod::Asymptotic, &q).unwrap();
        assert!(ok.warning.is_none());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(RateParams::unit(0.0, 0.0).is_err());
        assert!(RateParams::unit(0.9, 0.5).is_err());
        assert!(RateParams::new(0.1, 0.1, 1.0, 0.0).is_err());
        let p = RateParams::unit(0.1, 0.0).unwrap();
        assert!(p.with_threshold(0.02).is_err());
        assert!(gamma(-1.0, &p).is_err());
    }

    proptest! {
        #[test]
        fn endpoints_vanish(eta in 0.02f64..0.2, sigma in -1.0f64..1.0) {
            let p = RateParams::unit(eta, sigma).unwrap();
            prop_assert!(gamma(0.0, &p).unwrap().abs() < 1e-10);
            prop_assert!(gamma(50.0, &p).unwrap().abs() < 1e-6);
        }

        #[test]
        fn normalized_rate_is_temperature_free(x in 0.0f64..3.0, t1 in 1.0f64..500.0, t2 in 1.0f64..500.0) {
            let sc = si_scales(0.12, 0.08);
            let a = RateParams::from_scales(&sc, t1).unwrap();
            let b = RateParams::from_scales(&sc, t2).unwrap();
            let ra = gamma(x * sc.tau_d, &a).unwrap() / a.gamma_t;
            let rb = gamma(x * sc.tau_d, &b).unwrap() / b.gamma_t;
            prop_assert!((ra - rb).abs() <= 1e-12 * ra.abs().max(1.0));
        }
    }
}
