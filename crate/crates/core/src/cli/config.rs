use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{OpticalConfig, TurbulenceSpec, WaistConvention};
use crate::engine::{
    modes_up_to_total_order, parse_mode_list, reference_ordering, ModeIndex, Normalization,
};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (csv|json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum NormalizeMode {
    Raw,
    #[default]
    Calibrated,
}

impl FromStr for NormalizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Self::Raw),
            "calibrated" => Ok(Self::Calibrated),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization '{other}' (raw|calibrated)"
            ))),
        }
    }
}

impl NormalizeMode {
    pub fn normalization(self) -> Normalization {
        match self {
            Self::Raw => Normalization::Raw,
            Self::Calibrated => Normalization::calibrated_default(),
        }
    }
}

/// Raw settings as given on the command line or in a config file. Every field
/// is optional so that flags can be layered over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub wavelength: Option<f64>,
    pub distance: Option<f64>,
    pub pump_waist: Option<f64>,
    pub combined_waist: Option<f64>,
    pub cn2: Option<f64>,
    pub rytov: Option<f64>,
    pub gamma: Option<f64>,
    pub modes: Option<String>,
    pub max_sum: Option<u32>,
    pub normalize: Option<NormalizeMode>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub precision: Option<usize>,
    pub w_variant: Option<WaistConvention>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value for '{key}': '{value}'")))
}

impl Settings {
    /// Parses flat `key = value` text. Blank lines and `#` comments are skipped;
    /// keys use either dashes or underscores.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().replace('-', "_");
            if seen.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "config key '{key}' given twice"
                )));
            }
        }
        let mut s = Settings::default();
        for (key, value) in &seen {
            match key.as_str() {
                "wavelength" => s.wavelength = Some(parse_value(key, value)?),
                "distance" => s.distance = Some(parse_value(key, value)?),
                "pump_waist" => s.pump_waist = Some(parse_value(key, value)?),
                "combined_waist" => s.combined_waist = Some(parse_value(key, value)?),
                "cn2" => s.cn2 = Some(parse_value(key, value)?),
                "rytov" => s.rytov = Some(parse_value(key, value)?),
                "gamma" => s.gamma = Some(parse_value(key, value)?),
                "modes" => s.modes = Some(value.clone()),
                "max_sum" => s.max_sum = Some(parse_value(key, value)?),
                "normalize" => s.normalize = Some(value.parse()?),
                "format" => s.format = Some(value.parse()?),
                "output" => s.output = Some(PathBuf::from(value)),
                "precision" => s.precision = Some(parse_value(key, value)?),
                "w_variant" => s.w_variant = Some(value.parse()?),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown config key '{other}'"
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse_config(&text)
    }

    /// Layers `self` (flags) over `base` (file). Turbulence and mode selection
    /// are replaced as a unit when any of their flags is present.
    pub fn over(self, base: Settings) -> Settings {
        let turbulence_given = self.cn2.is_some() || self.rytov.is_some() || self.gamma.is_some();
        let modes_given = self.modes.is_some() || self.max_sum.is_some();
        let waist_given = self.pump_waist.is_some() || self.combined_waist.is_some();
        let (cn2, rytov, gamma) = if turbulence_given {
            (self.cn2, self.rytov, self.gamma)
        } else {
            (base.cn2, base.rytov, base.gamma)
        };
        let (modes, max_sum) = if modes_given {
            (self.modes, self.max_sum)
        } else {
            (base.modes, base.max_sum)
        };
        let (pump_waist, combined_waist) = if waist_given {
            (self.pump_waist, self.combined_waist)
        } else {
            (base.pump_waist, base.combined_waist)
        };
        Settings {
            wavelength: self.wavelength.or(base.wavelength),
            distance: self.distance.or(base.distance),
            pump_waist,
            combined_waist,
            cn2,
            rytov,
            gamma,
            modes,
            max_sum,
            normalize: self.normalize.or(base.normalize),
            format: self.format.or(base.format),
            output: self.output.or(base.output),
            precision: self.precision.or(base.precision),
            w_variant: self.w_variant.or(base.w_variant),
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let reference = OpticalConfig::reference_link();
        let wavelength = self.wavelength.unwrap_or(reference.wavelength());
        let distance = self.distance.unwrap_or(reference.distance());
        let optical = match (self.pump_waist, self.combined_waist) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "give either pump_waist or combined_waist, not both".into(),
                ))
            }
            (Some(w), None) => OpticalConfig::new(wavelength, distance, w)?,
            (None, Some(w)) => OpticalConfig::with_combined_waist(wavelength, distance, w)?,
            (None, None) => OpticalConfig::new(wavelength, distance, reference.pump_waist())?,
        };
        let turbulence = match (self.cn2, self.rytov, self.gamma) {
            (None, None, None) => TurbulenceSpec::Vacuum,
            (Some(v), None, None) => TurbulenceSpec::StructureConstant(v),
            (None, Some(v), None) => TurbulenceSpec::Rytov(v),
            (None, None, Some(v)) => TurbulenceSpec::Strength(v),
            _ => {
                return Err(Error::InvalidParameter(
                    "at most one of cn2, rytov, gamma may be given".into(),
                ))
            }
        };
        turbulence.resolve(&optical)?;
        let modes = match (&self.modes, self.max_sum) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "give either modes or max_sum, not both".into(),
                ))
            }
            (Some(list), None) => parse_mode_list(list)?,
            (None, Some(s)) => modes_up_to_total_order(s),
            (None, None) => reference_ordering(),
        };
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode list is empty".into()));
        }
        let precision = self.precision.unwrap_or(DEFAULT_PRECISION);
        if precision > 17 {
            return Err(Error::InvalidParameter(format!(
                "precision {precision} exceeds 17 decimals"
            )));
        }
        Ok(RunConfig {
            optical,
            turbulence,
            modes,
            normalize: self.normalize.unwrap_or_default(),
            format: self.format.unwrap_or_default(),
            output: self.output.clone(),
            precision,
            waist_convention: self.w_variant.unwrap_or_default(),
        })
    }
}

/// Fully validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub optical: OpticalConfig,
    pub turbulence: TurbulenceSpec,
    pub modes: Vec<ModeIndex>,
    pub normalize: NormalizeMode,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    /// Decimal places in CSV output.
    pub precision: usize,
    pub waist_convention: WaistConvention,
}

impl Default for RunConfig {
    fn default() -> Self {
        Settings::default().resolve().expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_link() {
        let rc = RunConfig::default();
        assert_eq!(rc.optical, OpticalConfig::reference_link());
        assert_eq!(rc.turbulence, TurbulenceSpec::Vacuum);
        assert_eq!(rc.modes, reference_ordering());
        assert_eq!(rc.precision, 5);
        assert_eq!(rc.normalize, NormalizeMode::Calibrated);
    }

    #[test]
    fn config_file_parsing() {
        let s = Settings::parse_config(
            "# link\nwavelength = 1.55e-6\npump-waist=0.05\n\nrytov=0.03\nmodes = 00 02 20\n",
        )
        .unwrap();
        assert_eq!(s.wavelength, Some(1.55e-6));
        assert_eq!(s.pump_waist, Some(0.05));
        assert_eq!(s.rytov, Some(0.03));
        let rc = s.resolve().unwrap();
        assert_eq!(rc.modes.len(), 3);
        assert!(Settings::parse_config("colour = red").is_err());
        assert!(Settings::parse_config("rytov").is_err());
        assert!(Settings::parse_config("rytov=1\nrytov=2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::parse_config("rytov=0.03\ndistance=1000\nmax_sum=2").unwrap();
        let flags = Settings {
            cn2: Some(1e-15),
            modes: Some("00".into()),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.rytov, None);
        assert_eq!(merged.cn2, Some(1e-15));
        assert_eq!(merged.distance, Some(1000.0));
        assert_eq!(merged.max_sum, None);
        assert_eq!(merged.resolve().unwrap().modes.len(), 1);
    }

    #[test]
    fn conflicting_turbulence_rejected() {
        let s = Settings {
            cn2: Some(1e-15),
            rytov: Some(0.02),
            ..Default::default()
        };
        assert!(s.resolve().unwrap_err().is_input_error());
        let neg = Settings {
            rytov: Some(-0.1),
            ..Default::default()
        };
        assert!(neg.resolve().unwrap_err().is_input_error());
    }
}
