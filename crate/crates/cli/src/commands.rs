//! The computations behind each subcommand. Each returns the text to emit
//! and, where it matters, a pass/fail status.

use std::fmt::Write as _;

use phonon_dephasing::curve::uniform_grid;
use phonon_dephasing::oracle::{energy_shift, gamma_oracle_radial_ratio};
use phonon_dephasing::params::{derive_scales, material_preset, preset_names, Geometry, HBAR};
use phonon_dephasing::rates::{coherence_time, decay, rate_ratio, CoherenceMethod};
use phonon_dephasing::{Curve, QuadratureConfig, QubitSetup, RateParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, num, short};

pub const FIGURE_SAMPLES: usize = 600;
pub const T_MAX: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
}

impl std::str::FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            other => Err(CliError::Usage(format!(
                "unknown figure `{other}` (known: fig1, fig2, fig3)"
            ))),
        }
    }
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
        }
    }
}

/// A set of curves on one grid plus the header that goes with it.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub title: String,
    pub y_label: String,
    pub meta: Vec<(String, String)>,
    pub curves: Vec<Curve>,
}

fn rate_curve(eta: f64, sigma: f64, xs: Vec<f64>) -> Result<Curve, CliError> {
    let p = RateParams::unit(eta, sigma)?;
    let label = format!("eta_{eta}_sigma_{sigma}");
    Ok(
        Curve::sample("gamma_over_Gamma_T", label, xs, |x| Ok(rate_ratio(x, &p)))?
            .with_meta("eta", eta)
            .with_meta("sigma", sigma),
    )
}

/// The three figure sets. Figures 1 and 2 are material independent; figure
/// 3 uses the configured material and separation to place `T0`.
pub fn figure(id: FigureId, cfg: &RunConfig, samples: usize) -> Result<CurveSet, CliError> {
    if samples < 2 {
        return Err(CliError::Usage("need at least two samples".into()));
    }
    let xs = uniform_grid(0.0, T_MAX, samples);
    let mut meta = vec![
        ("figure".to_string(), id.name().to_string()),
        ("samples".to_string(), samples.to_string()),
    ];
    let set = match id {
        FigureId::Fig1 => {
            meta.push(("eta".into(), "0.1".into()));
            let curves = [1.0, 0.5, 0.1]
                .into_iter()
                .map(|sigma| rate_curve(0.1, sigma, xs.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            CurveSet {
                title: "Decoherence rate, eta = 0.1".into(),
                y_label: "γ/Γ_T".into(),
                meta,
                curves,
            }
        }
        FigureId::Fig2 => {
            meta.push(("sigma".into(), "0.1".into()));
            let curves = [0.1, 0.08, 0.05]
                .into_iter()
                .map(|eta| rate_curve(eta, 0.1, xs.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            CurveSet {
                title: "Decoherence rate, sigma = 0.1".into(),
                y_label: "γ/Γ_T".into(),
                meta,
                curves,
            }
        }
        FigureId::Fig3 => {
            let d = cfg.geometry.separation;
            let geometry = Geometry::from_relative(d, 0.1, 0.1)?;
            let scales = derive_scales(&cfg.material, &geometry)?;
            let p = RateParams::at_reference_temperature(&scales)?;
            meta.push(("eta".into(), "0.1".into()));
            meta.push(("sigma".into(), "0".into()));
            meta.push(("material".into(), cfg.material.name.clone()));
            meta.push(("geometry.d_nm".into(), short(d * 1e9)));
            meta.push(("T0_K".into(), short(scales.t0)));
            let mut curves = Vec::new();
            for ratio in [0.1, 0.02, 0.01, 0.002] {
                let temperature = ratio * scales.t0;
                let c = Curve::sample("g", format!("T_over_T0_{ratio}"), xs.clone(), |x| {
                    decay(x * scales.tau_d, temperature, &p, &scales, &cfg.quad)
                })?
                .with_meta("T_over_T0", ratio);
                curves.push(c);
            }
            CurveSet {
                title: "Decay function, eta = 0.1, sigma = 0".into(),
                y_label: "g(t)".into(),
                meta,
                curves,
            }
        }
    };
    Ok(set)
}

fn setup_of(cfg: &RunConfig) -> Result<QubitSetup, CliError> {
    Ok(QubitSetup::new(cfg.material.clone(), cfg.geometry)?)
}

fn scale_meta(cfg: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let scales = derive_scales(&cfg.material, &cfg.geometry)?;
    Ok(vec![
        ("tau_d_s".into(), short(scales.tau_d)),
        ("omega_d_rad_per_s".into(), short(scales.omega_d)),
        ("T0_K".into(), short(scales.t0)),
        ("eta".into(), short(scales.eta)),
        ("sigma".into(), short(scales.sigma)),
        (
            "Gamma_T_per_s".into(),
            short(scales.gamma_t(cfg.temperature)?),
        ),
    ])
}

/// γ/Γ_T for the configured system, with mean rate and coherence time in
/// the header.
pub fn rate(cfg: &RunConfig, samples: usize, t_max: f64) -> Result<CurveSet, CliError> {
    check_grid(samples, t_max)?;
    let scales = derive_scales(&cfg.material, &cfg.geometry)?;
    let p = RateParams::at_reference_temperature(&scales)?;
    let mut meta = cfg.header();
    meta.extend(scale_meta(cfg)?);
    for method in [CoherenceMethod::Numeric, CoherenceMethod::Asymptotic] {
        let tc = coherence_time(&p, &scales, cfg.temperature, method, &cfg.quad)?;
        let key = match method {
            CoherenceMethod::Numeric => "tau_c_numeric_s",
            CoherenceMethod::Asymptotic => "tau_c_asymptotic_s",
        };
        meta.push((key.into(), short(tc.value)));
        if let Some(w) = tc.warning {
            meta.push((format!("{key}.warning"), w));
        }
    }
    let curve = Curve::sample(
        "gamma_over_Gamma_T",
        "gamma_over_Gamma_T",
        uniform_grid(0.0, t_max, samples),
        |x| Ok(rate_ratio(x, &p)),
    )?;
    Ok(CurveSet {
        title: "Decoherence rate".into(),
        y_label: "γ/Γ_T".into(),
        meta,
        curves: vec![curve],
    })
}

/// g(t) for the configured system and temperature.
pub fn decay_curve(cfg: &RunConfig, samples: usize, t_max: f64) -> Result<CurveSet, CliError> {
    check_grid(samples, t_max)?;
    let scales = derive_scales(&cfg.material, &cfg.geometry)?;
    let p = RateParams::at_reference_temperature(&scales)?;
    let mut meta = cfg.header();
    meta.extend(scale_meta(cfg)?);
    let curve = Curve::sample("g", "g", uniform_grid(0.0, t_max, samples), |x| {
        decay(x * scales.tau_d, cfg.temperature, &p, &scales, &cfg.quad)
    })?;
    Ok(CurveSet {
        title: "Decay function".into(),
        y_label: "g(t)".into(),
        meta,
        curves: vec![curve],
    })
}

fn check_grid(samples: usize, t_max: f64) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::Usage("need at least two samples".into()));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Usage(format!(
            "t-max must be positive, got {t_max}"
        )));
    }
    Ok(())
}

/// Grid of the closed-form-vs-oracle comparison.
#[derive(Debug, Clone)]
pub struct CompareGrid {
    pub etas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub points: usize,
    pub t_max: f64,
}

impl Default for CompareGrid {
    fn default() -> Self {
        CompareGrid {
            etas: vec![0.05, 0.08, 0.1],
            sigmas: vec![0.0, 0.1, 0.5, 1.0],
            points: 300,
            t_max: T_MAX,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub eta: f64,
    pub sigma: f64,
    pub x: f64,
    pub closed: f64,
    /// `None` when the oracle did not converge.
    pub oracle: Option<f64>,
    pub oracle_error: f64,
    /// `|closed − oracle| / max|oracle|` over the row's curve.
    pub deviation: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub grid: CompareGrid,
    pub tolerance: f64,
    pub rows: Vec<CompareRow>,
    pub max_deviation: f64,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.oracle.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let meta = vec![
            ("report".to_string(), "compare".to_string()),
            ("grid.eta".into(), list(&g.etas)),
            ("grid.sigma".into(), list(&g.sigmas)),
            ("grid.points".into(), g.points.to_string()),
            ("grid.t_max".into(), short(g.t_max)),
            ("tolerance".into(), short(self.tolerance)),
            ("max_deviation".into(), num(self.max_deviation)),
            ("flagged_rows".into(), self.flagged().to_string()),
            (
                "result".into(),
                if self.passed() { "pass" } else { "fail" }.to_string(),
            ),
        ];
        let mut s = output::header_lines(&meta);
        s.push_str("eta,sigma,t_over_tau_d,closed_form,oracle,oracle_error,rel_deviation,status\n");
        for r in &self.rows {
            let (oracle, status) = match r.oracle {
                Some(v) => (num(v), "ok"),
                None => ("nan".to_string(), "nonconvergence"),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.eta,
                r.sigma,
                num(r.x),
                num(r.closed),
                oracle,
                num(r.oracle_error),
                num(r.deviation),
                status
            );
        }
        s
    }
}

/// Closed form against the radial oracle on every grid point.
pub fn compare(
    grid: CompareGrid,
    tolerance: f64,
    quad: &QuadratureConfig,
) -> Result<CompareReport, CliError> {
    if grid.etas.is_empty() || grid.sigmas.is_empty() || grid.points == 0 {
        return Err(CliError::Usage("comparison grid is empty".into()));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let xs = uniform_grid(0.0, grid.t_max, grid.points);
    let mut rows = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for &eta in &grid.etas {
        for &sigma in &grid.sigmas {
            let p = RateParams::unit(eta, sigma)?;
            let oracle: Vec<Option<(f64, f64)>> = {
                use rayon::prelude::*;
                xs.par_iter()
                    .map(|&x| match gamma_oracle_radial_ratio(x, &p, quad) {
                        Ok(e) => Ok(Some((e.value, e.error))),
                        Err(phonon_dephasing::Error::Quadrature(_)) => Ok(None),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<_, _>>()?
            };
            let scale = oracle
                .iter()
                .flatten()
                .map(|(v, _)| v.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            for (&x, o) in xs.iter().zip(&oracle) {
                let closed = rate_ratio(x, &p);
                let (value, err, dev) = match o {
                    Some((v, e)) => (Some(*v), *e, (closed - v).abs() / scale),
                    None => (None, f64::NAN, f64::NAN),
                };
                if dev.is_finite() {
                    max_deviation = max_deviation.max(dev);
                }
                rows.push(CompareRow {
                    eta,
                    sigma,
                    x,
                    closed,
                    oracle: value,
                    oracle_error: err,
                    deviation: dev,
                });
            }
        }
    }
    Ok(CompareReport {
        grid,
        tolerance,
        rows,
        max_deviation,
    })
}

/// Phonon-induced level shift of the configured system, as `key=value` lines.
pub fn shift(cfg: &RunConfig) -> Result<String, CliError> {
    let s = energy_shift(&setup_of(cfg)?, &cfg.quad)?;
    let mut meta = cfg.header();
    meta.push(("shift_rad_per_s".into(), num(s.value)));
    meta.push((
        "shift_meV".into(),
        num(s.value * HBAR / phonon_dephasing::params::ELECTRON_VOLT * 1e3),
    ));
    meta.push(("shift_error_rad_per_s".into(), num(s.error)));
    meta.push((
        "imaginary_residue_rad_per_s".into(),
        num(s.imaginary_residue),
    ));
    Ok(key_values(&meta))
}

fn key_values(pairs: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

pub fn material_list() -> String {
    let mut s = String::new();
    for name in preset_names() {
        s.push_str(&name);
        s.push('\n');
    }
    s
}

pub fn material_show(name: &str) -> Result<String, CliError> {
    let m = material_preset(name)?;
    Ok(key_values(&[
        ("material.preset".into(), m.name.clone()),
        ("material.rho_m".into(), short(m.mass_density)),
        ("material.s".into(), short(m.sound_speed)),
        ("material.D_eV".into(), short(m.deformation_constant_ev())),
    ]))
}
