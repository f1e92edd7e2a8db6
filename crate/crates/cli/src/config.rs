//! Layered run configuration: built-in defaults, then the material preset,
//! then a TOML file, then command-line flags. Every field remembers which
//! layer supplied it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use phonon_dephasing::params::{joule_to_ev, material_preset, Geometry, Material};
use phonon_dephasing::QuadratureConfig;

use crate::error::CliError;
use crate::output::short;

pub const CONFIG_ENV: &str = "PHONON_DEPHASING_CONFIG";

pub const DEFAULT_PRESET: &str = "Si";
const DEFAULT_D_NM: f64 = 10.0;
const DEFAULT_R_NM: f64 = 1.0;
const DEFAULT_T_K: f64 = 300.0;

/// Numeric keys accepted in files and as `--section.key=value` flags.
pub const NUMERIC_KEYS: &[&str] = &[
    "material.rho_m",
    "material.s",
    "material.D_eV",
    "geometry.d_nm",
    "geometry.R_plus_nm",
    "geometry.R_minus_nm",
    "temperature.K",
    "quadrature.rel_tol",
    "quadrature.abs_tol",
    "quadrature.max_subdivisions",
    "quadrature.cutoff_ratio",
];

pub const PRESET_KEY: &str = "material.preset";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Default,
    Preset(String),
    File(PathBuf),
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => write!(f, "default"),
            Source::Preset(name) => write!(f, "preset:{name}"),
            Source::File(path) => write!(f, "file:{}", path.display()),
            Source::Flag => write!(f, "flag"),
        }
    }
}

/// A raw layer of `key → value` strings, as read from a file or flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub values: BTreeMap<String, String>,
}

impl Overrides {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let value = value.into();
        if key == PRESET_KEY {
            self.preset = Some(value);
        } else if NUMERIC_KEYS.contains(&key) {
            self.values.insert(key.to_string(), value);
        } else {
            return Err(CliError::config(key, "unknown key"));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.preset.is_none() && self.values.is_empty()
    }
}

/// Reads a TOML config. Both `[section] key = v` and `section.key = v`
/// spellings work.
pub fn read_file(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_toml(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_toml(text: &str) -> Result<Overrides, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Usage(format!("invalid TOML: {}", e.message())))?;
    let mut out = Overrides::default();
    flatten("", &toml::Value::Table(table), &mut out)?;
    Ok(out)
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Overrides) -> Result<(), CliError> {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out)?;
            }
            Ok(())
        }
        toml::Value::String(s) if prefix == PRESET_KEY => out.set(prefix, s.clone()),
        toml::Value::Float(x) => out.set(prefix, x.to_string()),
        toml::Value::Integer(i) => out.set(prefix, i.to_string()),
        _ if prefix != PRESET_KEY && !NUMERIC_KEYS.contains(&prefix) => {
            Err(CliError::config(prefix, "unknown key"))
        }
        _ => Err(CliError::config(prefix, "expected a number")),
    }
}

/// A fully resolved and validated parameter set.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub material: Material,
    pub geometry: Geometry,
    /// K
    pub temperature: f64,
    pub quad: QuadratureConfig,
    /// `(key, value, source)` for every field, in key order.
    pub provenance: Vec<(String, String, Source)>,
}

impl RunConfig {
    /// Resolves `file` over the preset and `flags` over `file`.
    pub fn resolve(file: Option<(&Path, Overrides)>, flags: &Overrides) -> Result<Self, CliError> {
        let (file_path, file_layer) = match file {
            Some((p, o)) => (Some(p.to_path_buf()), o),
            None => (None, Overrides::default()),
        };
        let file_source = || Source::File(file_path.clone().unwrap_or_default());

        let (preset_name, preset_source) = if let Some(p) = &flags.preset {
            (p.clone(), Source::Flag)
        } else if let Some(p) = &file_layer.preset {
            (p.clone(), file_source())
        } else {
            (DEFAULT_PRESET.to_string(), Source::Default)
        };
        let preset = material_preset(&preset_name)
            .map_err(|e| CliError::config(PRESET_KEY, e.to_string()))?;
        let from_preset = Source::Preset(preset.name.clone());

        let mut fields: BTreeMap<&'static str, (f64, Source)> = BTreeMap::new();
        fields.insert("material.rho_m", (preset.mass_density, from_preset.clone()));
        fields.insert("material.s", (preset.sound_speed, from_preset.clone()));
        fields.insert(
            "material.D_eV",
            (preset.deformation_constant_ev(), from_preset),
        );
        fields.insert("geometry.d_nm", (DEFAULT_D_NM, Source::Default));
        fields.insert("geometry.R_plus_nm", (DEFAULT_R_NM, Source::Default));
        fields.insert("geometry.R_minus_nm", (DEFAULT_R_NM, Source::Default));
        fields.insert("temperature.K", (DEFAULT_T_K, Source::Default));
        let q = QuadratureConfig::default();
        fields.insert("quadrature.rel_tol", (q.rel_tol, Source::Default));
        fields.insert("quadrature.abs_tol", (q.abs_tol, Source::Default));
        fields.insert(
            "quadrature.max_subdivisions",
            (q.max_subdivisions as f64, Source::Default),
        );
        fields.insert("quadrature.cutoff_ratio", (q.cutoff_ratio, Source::Default));

        for (layer, source) in [(&file_layer, file_source()), (flags, Source::Flag)] {
            for (key, raw) in &layer.values {
                let slot = NUMERIC_KEYS
                    .iter()
                    .find(|k| **k == key.as_str())
                    .ok_or_else(|| CliError::config(key, "unknown key"))?;
                let value: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(key, format!("`{raw}` is not a number")))?;
                fields.insert(slot, (value, source.clone()));
            }
        }

        let get = |k: &str| fields[k].0;
        // dividing keeps decimal inputs such as 10 nm identical to the literal 10e-9
        let nm = 1e9;
        let material = Material::with_deformation_ev(
            preset.name.clone(),
            get("material.rho_m"),
            get("material.s"),
            get("material.D_eV"),
        )
        .map_err(rename_domain)?;
        let geometry = Geometry::new(
            get("geometry.d_nm") / nm,
            get("geometry.R_plus_nm") / nm,
            get("geometry.R_minus_nm") / nm,
        )
        .map_err(rename_domain)?;
        let temperature = get("temperature.K");
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(CliError::invalid(
                "temperature.K",
                temperature,
                "must be non-negative",
            ));
        }
        let subdivisions = get("quadrature.max_subdivisions");
        if !(subdivisions >= 1.0 && subdivisions.fract() == 0.0 && subdivisions <= 1e9) {
            return Err(CliError::invalid(
                "quadrature.max_subdivisions",
                subdivisions,
                "must be a positive integer",
            ));
        }
        let quad = QuadratureConfig {
            rel_tol: get("quadrature.rel_tol"),
            abs_tol: get("quadrature.abs_tol"),
            max_subdivisions: subdivisions as usize,
            cutoff_ratio: get("quadrature.cutoff_ratio"),
            ..QuadratureConfig::default()
        };
        quad.validate().map_err(|e| CliError::Invalid {
            key: "quadrature".into(),
            reason: e.to_string(),
        })?;

        let mut provenance = vec![(PRESET_KEY.to_string(), preset.name.clone(), preset_source)];
        provenance.extend(
            fields
                .into_iter()
                .map(|(k, (v, s))| (k.to_string(), short(v), s)),
        );
        Ok(RunConfig {
            material,
            geometry,
            temperature,
            quad,
            provenance,
        })
    }

    /// `# key=value` header lines: values first, then their sources.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .provenance
            .iter()
            .map(|(k, v, _)| (k.clone(), v.clone()))
            .collect();
        out.extend(
            self.provenance
                .iter()
                .map(|(k, _, s)| (format!("source.{k}"), s.to_string())),
        );
        out
    }

    pub fn source_of(&self, key: &str) -> Option<&Source> {
        self.provenance
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, _, s)| s)
    }
}

/// Maps library field names onto the config keys that feed them.
fn rename_domain(e: phonon_dephasing::Error) -> CliError {
    match e {
        phonon_dephasing::Error::Domain {
            name,
            value,
            reason,
        } => {
            let (key, value) = match name {
                "material.D" => ("material.D_eV", joule_to_ev(value)),
                "geometry.d" => ("geometry.d_nm", value * 1e9),
                "geometry.R_plus" => ("geometry.R_plus_nm", value * 1e9),
                "geometry.R_minus" => ("geometry.R_minus_nm", value * 1e9),
                other => (other, value),
            };
            CliError::invalid(key, value, reason)
        }
        other => CliError::Library(other),
    }
}
