//! Numerical ground truth.
//!
//! Everything here is computed from the k-space kernels by quadrature, never
//! from the closed forms in [`crate::rates`] (with the single exception of
//! [`integrate_rate`], which integrates the closed-form rate over time).
//!
//! The quantization volume V never appears in a returned number: kernels
//! that scale with it return the V-free combination (`κ/√V`, `g·√V`, ...)
//! and mode sums are taken in the continuum limit `Σ_k → V/(2π)³ ∫d³k`.
//! The donor separation vector points along z.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{derive_scales, DerivedScales, Geometry, Material, BOLTZMANN, HBAR};
use crate::quad::{half_line_partition, integrate_partition, Estimate, QuadratureConfig};
use crate::rates::{rate_ratio, PhaseSource, RateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Plus,
    Minus,
}

/// Material and geometry of one double-donor qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSetup {
    pub material: Material,
    pub geometry: Geometry,
}

impl QubitSetup {
    pub fn new(material: Material, geometry: Geometry) -> Result<Self> {
        material.validate()?;
        geometry.validate()?;
        Ok(QubitSetup { material, geometry })
    }

    pub fn scales(&self) -> Result<DerivedScales> {
        derive_scales(&self.material, &self.geometry)
    }

    pub fn kernel(&self) -> SpectralKernel {
        SpectralKernel {
            material: self.material.clone(),
            geometry: self.geometry,
        }
    }
}

/// `1/[1 + (qη/2)²]²`, the form-factor envelope in units where `d = 1`.
fn lorentzian_sq(q: f64, eta: f64) -> f64 {
    let u = 0.5 * q * eta;
    let v = 1.0 + u * u;
    1.0 / (v * v)
}

/// Site form factor `F_±(k) = e^{±i k·d/2} / [1 + (kR_±/2)²]²` for the wave
/// vector `k` (m⁻¹).
pub fn form_factor(k: [f64; 3], site: Site, geometry: &Geometry) -> Complex64 {
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let half_phase = 0.5 * k[2] * geometry.separation;
    let (radius, sign) = match site {
        Site::Plus => (geometry.radius_plus, 1.0),
        Site::Minus => (geometry.radius_minus, -1.0),
    };
    let u = 0.5 * norm * radius;
    let v = 1.0 + u * u;
    Complex64::from_polar(1.0 / (v * v), sign * half_phase)
}

/// Evaluators of the electron-phonon coupling in k-space, SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralKernel {
    pub material: Material,
    pub geometry: Geometry,
}

fn norm3(k: [f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

fn neg3(k: [f64; 3]) -> [f64; 3] {
    [-k[0], -k[1], -k[2]]
}

impl SpectralKernel {
    /// Phonon angular frequency `ω_k = s|k|`.
    pub fn omega(&self, k: [f64; 3]) -> f64 {
        self.material.sound_speed * norm3(k)
    }

    /// `κ_k/√V = (D/s)·sqrt(ħω_k/2ρ_m)`, taken real and even in k.
    pub fn kappa(&self, k: [f64; 3]) -> f64 {
        let m = &self.material;
        m.deformation_constant / m.sound_speed
            * (HBAR * self.omega(k) / (2.0 * m.mass_density)).sqrt()
    }

    pub fn form_factor(&self, k: [f64; 3], site: Site) -> Complex64 {
        form_factor(k, site, &self.geometry)
    }

    /// `f(k) = F_+(k) − F_−(k)`.
    pub fn f(&self, k: [f64; 3]) -> Complex64 {
        self.form_factor(k, Site::Plus) - self.form_factor(k, Site::Minus)
    }

    /// `F(k) = (F_+(k) + F_−(k))/2`.
    pub fn big_f(&self, k: [f64; 3]) -> Complex64 {
        0.5 * (self.form_factor(k, Site::Plus) + self.form_factor(k, Site::Minus))
    }

    /// `g_k·√V = (κ_k/√V)·f(−k)/ħ`, s⁻¹·m^{3/2}; zero at `k = 0`.
    pub fn interaction_rate(&self, k: [f64; 3]) -> Complex64 {
        if norm3(k) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa(k) / HBAR * self.f(neg3(k))
    }

    /// `α_k·√V = g_k·√V/ω_k`, m^{3/2}.
    pub fn displacement(&self, k: [f64; 3]) -> Complex64 {
        if norm3(k) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.interaction_rate(k) / self.omega(k)
    }

    /// `β_k·√V = (κ_k/√V)·F*(k)/(ħω_k)`, m^{3/2}.
    pub fn shift_displacement(&self, k: [f64; 3]) -> Complex64 {
        if norm3(k) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa(k) * self.big_f(k).conj() / (HBAR * self.omega(k))
    }
}

/// Integrand of the radially reduced rate, `d = 1` units, at dimensionless
/// wave number `q = kd` and time `x = t/τ_d`:
/// `q(L₊² + L₋²) sin(qx) + L₊L₋[cos(q|1+x|) − cos(q|1−x|)]`.
/// Odd in `x`.
pub fn radial_integrand(q: f64, x: f64, eta_plus: f64, eta_minus: f64) -> f64 {
    let lp = lorentzian_sq(q, eta_plus);
    let lm = lorentzian_sq(q, eta_minus);
    q * (lp * lp + lm * lm) * (q * x).sin()
        + lp * lm * ((q * (1.0 + x).abs()).cos() - (q * (1.0 - x).abs()).cos())
}

fn radial_envelope(q: f64, eta_plus: f64, eta_minus: f64) -> f64 {
    let lp = lorentzian_sq(q, eta_plus);
    let lm = lorentzian_sq(q, eta_minus);
    q * (lp * lp + lm * lm) + 2.0 * lp * lm
}

fn check_time(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            x,
            "time must be finite and non-negative",
        ))
    }
}

/// Panel width for an integrand oscillating with angular frequency up to
/// `omega` on an envelope of width `1/eta`.
fn panel_width(omega: f64, eta: f64) -> f64 {
    (2.0 * PI / omega.max(1e-300)).min(1.0 / eta)
}

/// `γ/Γ_T` at `x = t/τ_d` from the radial integral, with its error estimate.
pub fn gamma_oracle_radial_ratio(
    x: f64,
    p: &RateParams,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    check_time("t", x)?;
    p.validate()?;
    let (ep, em) = (p.eta_plus, p.eta_minus);
    let part = half_line_partition(
        |q| radial_envelope(q, ep, em),
        panel_width(1.0 + x, p.eta_max()),
        1.0 / p.eta_min(),
        quad.cutoff_ratio,
    );
    let est = integrate_partition(|q| radial_integrand(q, x, ep, em), &part.points, quad)?;
    Ok(est.with_extra_error(part.tail_bound).scaled(1.0 / PI))
}

/// γ(t) in s⁻¹ from the radial integral.
pub fn gamma_oracle_radial(t: f64, p: &RateParams, quad: &QuadratureConfig) -> Result<Estimate> {
    check_time("t", t)?;
    Ok(gamma_oracle_radial_ratio(t / p.tau_d, p, quad)?.scaled(p.gamma_t))
}

/// `Σ_k |α_k|² w(kd)` in the continuum limit, as a two-dimensional
/// quadrature over `cos θ` (outer) and `q = kd` (inner). `omega` bounds the
/// oscillation frequency of `w` in `q`; `breaks` are extra outer
/// breakpoints in (−1, 1).
fn mode_sum<W>(
    setup: &QubitSetup,
    w: W,
    omega: f64,
    breaks: &[f64],
    quad: &QuadratureConfig,
) -> Result<Estimate>
where
    W: Fn(f64) -> f64 + Sync,
{
    let kernel = setup.kernel();
    let d = setup.geometry.separation;
    let (ep, em) = (setup.geometry.eta_plus(), setup.geometry.eta_minus());
    let part = half_line_partition(
        |q| {
            let (lp, lm) = (lorentzian_sq(q, ep), lorentzian_sq(q, em));
            q * (lp + lm) * (lp + lm)
        },
        panel_width(1.0 + omega, ep.max(em)),
        1.0 / ep.min(em),
        quad.cutoff_ratio,
    );
    // |α|² ∝ 1/k: the envelope above is q²·|α|² up to a constant.
    let c = {
        let m = &setup.material;
        m.deformation_constant.powi(2)
            / (2.0 * HBAR * m.mass_density * m.sound_speed.powi(3))
            / (d * d)
    };
    let tail = c * part.tail_bound;
    let inner_cfg = QuadratureConfig {
        rel_tol: quad.rel_tol * 0.1,
        abs_tol: quad.abs_tol * 0.1,
        ..*quad
    };
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let worst_inner: Mutex<f64> = Mutex::new(0.0);
    let outer = |mu: f64| -> f64 {
        let sin_theta = (1.0 - mu * mu).max(0.0).sqrt();
        let integrand = |q: f64| {
            let k = q / d;
            let kv = [k * sin_theta, 0.0, k * mu];
            q * q * kernel.displacement(kv).norm_sqr() * w(q) / (d * d * d)
        };
        match integrate_partition(integrand, &part.points, &inner_cfg) {
            Ok(e) => {
                let mut worst = worst_inner.lock().unwrap();
                *worst = worst.max(e.error + tail);
                e.value
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e.into());
                0.0
            }
        }
    };
    let mut points = vec![-1.0, 0.0, 1.0];
    points.extend(
        breaks
            .iter()
            .copied()
            .filter(|b| b.abs() < 1.0 && *b != 0.0),
    );
    points.sort_by(f64::total_cmp);
    points.dedup();
    let est = integrate_partition(outer, &points, quad);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let worst = worst_inner.into_inner().unwrap();
    // ∫d³k = 2π ∫dμ ∫k²dk, with the (2π)⁻³ of the continuum limit
    Ok(est?
        .with_extra_error(2.0 * worst)
        .scaled(1.0 / (4.0 * PI * PI)))
}

/// γ(t) in s⁻¹ from the unreduced mode sum `(2k_BT/ħ) Σ_k |α_k|² sin(ω_k t)`.
pub fn gamma_oracle_3d(
    t: f64,
    setup: &QubitSetup,
    temperature: f64,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    check_time("t", t)?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::domain(
            "temperature.K",
            temperature,
            "must be finite and non-negative",
        ));
    }
    let scales = setup.scales()?;
    let x = t / scales.tau_d;
    let sum = mode_sum(setup, |q| (q * x).sin(), x, &[-x, x], quad)?;
    Ok(sum.scaled(2.0 * BOLTZMANN * temperature / HBAR))
}

/// Phase φ(t) = Σ_k |α_k|² sin(ω_k t), radians; temperature independent.
/// Evaluated through the radial reduction.
pub fn phase_phi(t: f64, setup: &QubitSetup, quad: &QuadratureConfig) -> Result<Estimate> {
    check_time("t", t)?;
    let scales = setup.scales()?;
    let p = RateParams::at_reference_temperature(&scales)?;
    // φ = ħγ/(2k_B T) and Γ_T = ω_d at T = T0
    let factor = HBAR * scales.omega_d / (2.0 * BOLTZMANN * scales.t0);
    Ok(gamma_oracle_radial_ratio(t / scales.tau_d, &p, quad)?.scaled(factor))
}

/// Initial slope `dφ/dt(0) = Σ_k |α_k|² ω_k`, s⁻¹, from the unreduced mode sum.
pub fn phase_slope(setup: &QubitSetup, quad: &QuadratureConfig) -> Result<Estimate> {
    let s_over_d = setup.material.sound_speed / setup.geometry.separation;
    mode_sum(setup, |q| s_over_d * q, 0.0, &[], quad)
}

/// [`phase_phi`] as a [`PhaseSource`] for the coherence element.
pub struct PhaseOracle {
    pub setup: QubitSetup,
    pub quad: QuadratureConfig,
}

impl PhaseSource for PhaseOracle {
    fn phase(&self, t: f64) -> Result<f64> {
        Ok(phase_phi(t, &self.setup, &self.quad)?.value)
    }
}

/// Phonon-induced shift of the transition frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyShift {
    /// rad·s⁻¹
    pub value: f64,
    /// Imaginary part left over by the quadrature, rad·s⁻¹.
    pub imaginary_residue: f64,
    /// Error estimate of `value`, rad·s⁻¹.
    pub error: f64,
}

/// Relative size of the imaginary residue, measured against the integral of
/// the absolute imaginary integrand, beyond which the shift is rejected.
pub const SHIFT_IMAGINARY_TOLERANCE: f64 = 1e-8;

/// `δω0 = −(1/ħV) Σ_k κ_k f(k)(β_k + β*_{−k})` in the continuum limit.
pub fn energy_shift(setup: &QubitSetup, quad: &QuadratureConfig) -> Result<EnergyShift> {
    setup.material.validate()?;
    setup.geometry.validate()?;
    let kernel = setup.kernel();
    let d = setup.geometry.separation;
    let (ep, em) = (setup.geometry.eta_plus(), setup.geometry.eta_minus());
    let part = half_line_partition(
        |q| {
            let (lp, lm) = (lorentzian_sq(q, ep), lorentzian_sq(q, em));
            q * q * (lp + lm) * (lp + lm)
        },
        panel_width(1.0, ep.max(em)),
        1.0 / ep.min(em),
        quad.cutoff_ratio,
    );
    // κ·β = D²F*/(2ρ_m s²) is independent of |k|; normalize the integrand by it
    let unit = {
        let m = &setup.material;
        m.deformation_constant.powi(2) / (m.mass_density * m.sound_speed.powi(2))
    };
    let density = |mu: f64, q: f64| -> Complex64 {
        let sin_theta = (1.0 - mu * mu).max(0.0).sqrt();
        let k = q / d;
        let kv = [k * sin_theta, 0.0, k * mu];
        let beta_sum = kernel.shift_displacement(kv) + kernel.shift_displacement(neg3(kv)).conj();
        kernel.kappa(kv) * kernel.f(kv) * beta_sum * q * q / unit
    };
    let inner_cfg = QuadratureConfig {
        rel_tol: quad.rel_tol * 0.1,
        abs_tol: quad.abs_tol * 0.1,
        ..*quad
    };
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let worst: Mutex<f64> = Mutex::new(0.0);
    let component = |pick: fn(Complex64) -> f64| {
        let outer = |mu: f64| -> f64 {
            match integrate_partition(|q| pick(density(mu, q)), &part.points, &inner_cfg) {
                Ok(e) => {
                    let mut w = worst.lock().unwrap();
                    *w = w.max(e.error + part.tail_bound * 4.0);
                    e.value
                }
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e.into());
                    0.0
                }
            }
        };
        integrate_partition(outer, &[-1.0, 0.0, 1.0], quad)
    };
    let re = component(|z| z.re);
    let im = component(|z| z.im);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (re, im) = (re?, im?);
    let inner_err = 2.0 * worst.into_inner().unwrap();
    // δω = −(1/ħ)(2π)⁻³ · 2π ∫dμ ∫k²dk (...), with k²dk = q²dq/d³
    let factor = -unit / HBAR / (4.0 * PI * PI) / (d * d * d);
    let shift = EnergyShift {
        value: factor * re.value,
        imaginary_residue: factor * im.value,
        error: factor.abs() * (re.error + inner_err),
    };
    let scale = (factor * re.value).abs().max(factor.abs() * im.abs_value);
    if shift.imaginary_residue.abs() > SHIFT_IMAGINARY_TOLERANCE * scale {
        return Err(Error::Consistency(format!(
            "energy shift has imaginary part {:e} against magnitude {:e}",
            shift.imaginary_residue, scale
        )));
    }
    Ok(shift)
}

/// `∫₀ˣ γ/Γ_T dx'` of the closed-form rate, split at the rate's kinks and
/// peaks.
pub fn rate_integral_ratio(x: f64, p: &RateParams, quad: &QuadratureConfig) -> Result<Estimate> {
    check_time("t", x)?;
    p.validate()?;
    if x == 0.0 {
        return Ok(Estimate::zero());
    }
    let w = 2.0 * p.eta_max();
    let mut points = vec![0.0, x];
    points.extend(
        [p.eta_min(), p.eta_max(), 1.0 - w, 1.0, 1.0 + w]
            .into_iter()
            .filter(|&b| b > 0.0 && b < x),
    );
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(integrate_partition(|y| rate_ratio(y, p), &points, quad)?)
}

/// `∫₀ᵗ γ(t') dt'` of the closed-form rate; dimensionless.
pub fn integrate_rate(t: f64, p: &RateParams, quad: &QuadratureConfig) -> Result<Estimate> {
    check_time("t", t)?;
    Ok(rate_integral_ratio(t / p.tau_d, p, quad)?.scaled(p.gamma_t * p.tau_d))
}
