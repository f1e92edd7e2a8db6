//! Physical constants, material and geometry inputs, and the derived scale
//! system every rate formula is expressed in.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// One electron volt in joules (CODATA 2018, exact).
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

pub fn ev_to_joule(ev: f64) -> f64 {
    ev * ELECTRON_VOLT
}

pub fn joule_to_ev(joule: f64) -> f64 {
    joule / ELECTRON_VOLT
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            value,
            "must be finite and strictly positive",
        ))
    }
}

/// Bulk properties of the host crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// kg·m⁻³
    pub mass_density: f64,
    /// Longitudinal sound speed, m·s⁻¹.
    pub sound_speed: f64,
    /// Deformation constant, J.
    pub deformation_constant: f64,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        mass_density: f64,
        sound_speed: f64,
        deformation_constant: f64,
    ) -> Result<Self> {
        let m = Material {
            name: name.into(),
            mass_density,
            sound_speed,
            deformation_constant,
        };
        m.validate()?;
        Ok(m)
    }

    /// Same as [`Material::new`] with the deformation constant given in eV.
    pub fn with_deformation_ev(
        name: impl Into<String>,
        mass_density: f64,
        sound_speed: f64,
        deformation_ev: f64,
    ) -> Result<Self> {
        Self::new(name, mass_density, sound_speed, ev_to_joule(deformation_ev))
    }

    pub fn deformation_constant_ev(&self) -> f64 {
        joule_to_ev(self.deformation_constant)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("material.rho_m", self.mass_density)?;
        require_positive("material.s", self.sound_speed)?;
        require_positive("material.D", self.deformation_constant)
    }
}

struct Preset {
    name: &'static str,
    mass_density: f64,
    sound_speed: f64,
    deformation_ev: f64,
}

const PRESETS: &[Preset] = &[Preset {
    name: "Si",
    mass_density: 2.33e3,
    sound_speed: 9.0e3,
    deformation_ev: 8.6,
}];

/// Names of the embedded material presets.
pub fn preset_names() -> Vec<String> {
    PRESETS.iter().map(|p| p.name.to_string()).collect()
}

/// Looks up a material preset by name, ignoring ASCII case.
pub fn material_preset(name: &str) -> Result<Material> {
    let preset = PRESETS
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            known: preset_names(),
        })?;
    Material::with_deformation_ev(
        preset.name,
        preset.mass_density,
        preset.sound_speed,
        preset.deformation_ev,
    )
}

/// Donor-pair geometry. The separation vector is taken along the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Inter-donor distance, m.
    pub separation: f64,
    /// Bohr radius at the `+` site, m.
    pub radius_plus: f64,
    /// Bohr radius at the `-` site, m.
    pub radius_minus: f64,
}

impl Geometry {
    pub fn new(separation: f64, radius_plus: f64, radius_minus: f64) -> Result<Self> {
        let g = Geometry {
            separation,
            radius_plus,
            radius_minus,
        };
        g.validate()?;
        Ok(g)
    }

    /// Geometry from relative radii `eta_plus = R_+/d`, `eta_minus = R_-/d`.
    pub fn from_relative(separation: f64, eta_plus: f64, eta_minus: f64) -> Result<Self> {
        Self::new(separation, eta_plus * separation, eta_minus * separation)
    }

    /// Checks `d > 0` and `0 < R_a < d` (non-overlapping orbitals).
    pub fn validate(&self) -> Result<()> {
        require_positive("geometry.d", self.separation)?;
        require_positive("geometry.R_plus", self.radius_plus)?;
        require_positive("geometry.R_minus", self.radius_minus)?;
        if self.radius_plus >= self.separation {
            return Err(Error::domain(
                "geometry.R_plus",
                self.radius_plus,
                "Bohr radius must be smaller than the donor separation",
            ));
        }
        if self.radius_minus >= self.separation {
            return Err(Error::domain(
                "geometry.R_minus",
                self.radius_minus,
                "Bohr radius must be smaller than the donor separation",
            ));
        }
        Ok(())
    }

    pub fn eta_plus(&self) -> f64 {
        self.radius_plus / self.separation
    }

    pub fn eta_minus(&self) -> f64 {
        self.radius_minus / self.separation
    }
}

/// Mean relative radius and relative difference `(eta_+ - eta_-)/eta`.
pub fn mean_and_spread(eta_plus: f64, eta_minus: f64) -> (f64, f64) {
    let eta = 0.5 * (eta_plus + eta_minus);
    (eta, (eta_plus - eta_minus) / eta)
}

/// Relative radii `(eta_+, eta_-)` from the mean and the relative difference.
pub fn radii_from_spread(eta: f64, sigma: f64) -> (f64, f64) {
    (eta * (1.0 + 0.5 * sigma), eta * (1.0 - 0.5 * sigma))
}

/// The scale system: transit time, phonon frequency at wavelength `d`,
/// dimensionless radii and the temperature scale `T0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// d/s, s.
    pub tau_d: f64,
    /// 2π/τ_d, rad·s⁻¹.
    pub omega_d: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub eta: f64,
    pub sigma: f64,
    /// K.
    pub t0: f64,
}

/// Derives the scale system. The mass inside the volume `d³` is `ρ_m d³`.
pub fn derive_scales(material: &Material, geometry: &Geometry) -> Result<DerivedScales> {
    material.validate()?;
    geometry.validate()?;
    let d = geometry.separation;
    let s = material.sound_speed;
    let tau_d = d / s;
    let omega_d = 2.0 * PI / tau_d;
    let cell_mass = material.mass_density * d.powi(3);
    let energy_ratio = HBAR * omega_d / material.deformation_constant;
    let t0 = cell_mass * s * s * energy_ratio * energy_ratio / BOLTZMANN;
    let (eta_plus, eta_minus) = (geometry.eta_plus(), geometry.eta_minus());
    let (eta, sigma) = mean_and_spread(eta_plus, eta_minus);
    Ok(DerivedScales {
        tau_d,
        omega_d,
        eta_plus,
        eta_minus,
        eta,
        sigma,
        t0,
    })
}

impl DerivedScales {
    /// Temperature-proportional rate `Γ_T = (T/T0)·ω_d`, s⁻¹.
    pub fn gamma_t(&self, temperature: f64) -> Result<f64> {
        gamma_t(self, temperature)
    }
}

pub fn gamma_t(scales: &DerivedScales, temperature: f64) -> Result<f64> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::domain(
            "temperature.K",
            temperature,
            "temperature must be finite and non-negative",
        ));
    }
    Ok(temperature / scales.t0 * scales.omega_d)
}

/// Electronic transition frequency with its phonon-induced shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronicLevels {
    /// Bare splitting ε₊ − ε₋, rad·s⁻¹.
    pub bare_splitting: f64,
    /// Phonon-induced shift, rad·s⁻¹.
    pub shift: f64,
    /// bare_splitting + shift.
    pub omega0: f64,
}

impl ElectronicLevels {
    pub fn new(bare_splitting: f64, shift: f64) -> Self {
        ElectronicLevels {
            bare_splitting,
            shift,
            omega0: bare_splitting + shift,
        }
    }
}

/// Prepared electronic superposition `sqrt(1-|ξ|²)|g⟩ + ξ|e⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub xi: Complex64,
}

impl InitialState {
    pub fn new(xi: Complex64) -> Result<Self> {
        let norm = xi.norm();
        if !norm.is_finite() || norm > 1.0 {
            return Err(Error::domain(
                "xi",
                norm,
                "excited-state amplitude must satisfy |xi| <= 1",
            ));
        }
        Ok(InitialState { xi })
    }

    /// `ξ*·sqrt(1-|ξ|²)`, the initial ⟨g|ρ|e⟩ element. Its modulus is at most 1/2.
    pub fn coherence_prefactor(&self) -> Complex64 {
        let p = (1.0 - self.xi.norm_sqr()).max(0.0).sqrt();
        self.xi.conj() * p
    }
}
