//! Physical channel parameters and the constant cascade that feeds the
//! closed-form kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RYTOV_COEFF: f64 = 1.23;
const STRENGTH_COEFF: f64 = 1.63;
const STRENGTH_EXPONENT: f64 = 6.0 / 5.0;

/// Wavelength, propagation distance and pump spot size at the crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    wavelength: f64,
    distance: f64,
    pump_waist: f64,
}

impl OpticalConfig {
    pub fn new(wavelength: f64, distance: f64, pump_waist: f64) -> Result<Self> {
        for (name, v) in [
            ("wavelength", wavelength),
            ("distance", distance),
            ("pump waist", pump_waist),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            wavelength,
            distance,
            pump_waist,
        })
    }

    /// Builds a configuration from the combined waist W0 = √2·W0p.
    pub fn with_combined_waist(wavelength: f64, distance: f64, w0: f64) -> Result<Self> {
        Self::new(wavelength, distance, w0 / 2f64.sqrt())
    }

    /// 800 nm, 5 km, W0 = 10 cm.
    pub fn reference_link() -> Self {
        Self::with_combined_waist(0.8e-6, 5000.0, 0.1).expect("reference link is valid")
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn pump_waist(&self) -> f64 {
        self.pump_waist
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// W0 = √2·W0p.
    pub fn combined_waist(&self) -> f64 {
        2f64.sqrt() * self.pump_waist
    }

    /// Λ0 = 2z / (k W0²).
    pub fn fresnel_ratio(&self) -> f64 {
        let w0 = self.combined_waist();
        2.0 * self.distance / (self.wavenumber() * w0 * w0)
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::Domain(format!(
            "{name} must be nonnegative and finite, got {v}"
        )));
    }
    Ok(())
}

/// σ_R² = 1.23 C_n² k^(7/6) z^(11/6).
pub fn rytov_variance(cn2: f64, wavelength: f64, distance: f64) -> Result<f64> {
    check_nonnegative("cn2", cn2)?;
    let cfg = OpticalConfig::new(wavelength, distance, 1.0)?;
    Ok(RYTOV_COEFF * cn2 * rytov_geometry(&cfg))
}

/// The C_n² that produces a given Rytov variance over `wavelength`, `distance`.
pub fn structure_constant_for(rytov: f64, wavelength: f64, distance: f64) -> Result<f64> {
    check_nonnegative("rytov variance", rytov)?;
    let cfg = OpticalConfig::new(wavelength, distance, 1.0)?;
    Ok(rytov / (RYTOV_COEFF * rytov_geometry(&cfg)))
}

fn rytov_geometry(cfg: &OpticalConfig) -> f64 {
    cfg.wavenumber().powf(7.0 / 6.0) * cfg.distance().powf(11.0 / 6.0)
}

/// γ = 1.63 (σ_R²)^(6/5).
pub fn turbulence_strength(rytov: f64) -> Result<f64> {
    check_nonnegative("rytov variance", rytov)?;
    Ok(STRENGTH_COEFF * rytov.powf(STRENGTH_EXPONENT))
}

/// Inverse of [`turbulence_strength`].
pub fn rytov_for_strength(gamma: f64) -> Result<f64> {
    check_nonnegative("turbulence strength", gamma)?;
    Ok((gamma / STRENGTH_COEFF).powf(1.0 / STRENGTH_EXPONENT))
}

/// How the turbulence level is specified by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum TurbulenceSpec {
    #[default]
    Vacuum,
    /// Refractive-index structure constant C_n² [m^(−2/3)].
    StructureConstant(f64),
    /// Rytov variance σ_R².
    Rytov(f64),
    /// Turbulence strength γ given directly.
    Strength(f64),
}


/// Turbulence level with all three parameterisations filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turbulence {
    pub cn2: f64,
    pub rytov: f64,
    pub gamma: f64,
}

impl Turbulence {
    pub const VACUUM: Turbulence = Turbulence {
        cn2: 0.0,
        rytov: 0.0,
        gamma: 0.0,
    };

    pub fn is_vacuum(&self) -> bool {
        self.gamma == 0.0
    }
}

impl TurbulenceSpec {
    pub fn resolve(&self, cfg: &OpticalConfig) -> Result<Turbulence> {
        let (lambda, z) = (cfg.wavelength(), cfg.distance());
        match *self {
            TurbulenceSpec::Vacuum => Ok(Turbulence::VACUUM),
            TurbulenceSpec::StructureConstant(cn2) => {
                let rytov = rytov_variance(cn2, lambda, z)?;
                Ok(Turbulence {
                    cn2,
                    rytov,
                    gamma: turbulence_strength(rytov)?,
                })
            }
            TurbulenceSpec::Rytov(rytov) => Ok(Turbulence {
                cn2: structure_constant_for(rytov, lambda, z)?,
                rytov,
                gamma: turbulence_strength(rytov)?,
            }),
            TurbulenceSpec::Strength(gamma) => {
                let rytov = rytov_for_strength(gamma)?;
                Ok(Turbulence {
                    cn2: structure_constant_for(rytov, lambda, z)?,
                    rytov,
                    gamma,
                })
            }
        }
    }
}

/// Choice of the beam radius W used in the 𝓕 kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaistConvention {
    /// W = W0.
    CrystalWaist,
    /// W = W0 √(1 + Λ0²), the beam radius after propagating over z.
    #[default]
    Propagated,
}

impl WaistConvention {
    pub fn label(&self) -> &'static str {
        match self {
            WaistConvention::CrystalWaist => "crystal_waist",
            WaistConvention::Propagated => "propagated",
        }
    }
}

impl std::str::FromStr for WaistConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crystal_waist" | "w0" => Ok(WaistConvention::CrystalWaist),
            "propagated" | "wz" => Ok(WaistConvention::Propagated),
            other => Err(Error::InvalidParameter(format!(
                "unknown waist convention '{other}'"
            ))),
        }
    }
}

/// Every scalar the kernels need, derived once per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub config: OpticalConfig,
    pub turbulence: Turbulence,
    pub waist_convention: WaistConvention,
    /// Wavenumber k [1/m].
    pub k: f64,
    /// Fresnel ratio Λ0.
    pub lambda0: f64,
    /// W0 = √2 W0p [m].
    pub w0: f64,
    /// Beam radius used in 𝓕 [m].
    pub w: f64,
    pub zeta: Complex64,
    pub gamma: f64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: f64,
    pub b1: f64,
    pub b2: Complex64,
    pub b3: Complex64,
    pub b4: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl DerivedConstants {
    pub fn new(config: OpticalConfig, turbulence: Turbulence) -> Result<Self> {
        Self::with_convention(config, turbulence, WaistConvention::default())
    }

    pub fn with_convention(
        config: OpticalConfig,
        turbulence: Turbulence,
        waist_convention: WaistConvention,
    ) -> Result<Self> {
        let gamma = turbulence.gamma;
        check_nonnegative("turbulence strength", gamma)?;
        let k = config.wavenumber();
        let z = config.distance();
        let w0 = config.combined_waist();
        let l0 = config.fresnel_ratio();
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(Error::Domain(format!(
                "Fresnel ratio must be positive, got {l0}"
            )));
        }
        let i = Complex64::i();
        let kz = k / z;
        let l0sq1 = 1.0 + l0 * l0;

        let zeta = Complex64::new(l0sq1, 0.0) / Complex64::new(l0sq1, l0);
        let b1 = kz * (1.0 / (2.0 * l0) + l0 / 2.0 + gamma);
        let b2 = kz * (Complex64::new(1.0 / l0 - gamma, 0.0) - i);
        let b3 = kz * (Complex64::new(1.0 / (2.0 * l0) + gamma, 0.0) - i);
        let b4 = kz * (1.0 / l0 + 2.0 * gamma);
        let a1 = (k / (4.0 * z)) * (Complex64::new(l0 / l0sq1, 0.0) - i);
        let a2 = -b2 * b2 / (4.0 * b1) + b3 + kz * l0 / l0sq1;
        let a3 = -b2.norm_sqr() / (2.0 * b1) + b4;
        let c1 = a2.re - a3 / 2.0;
        let c2 = a2.re + a3 / 2.0;
        let c3 = a2.im;
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::NumericalRegime(format!(
                "C1 = {c1:e}, C2 = {c2:e}; both must be positive"
            )));
        }
        let c4 = -c3 * c3 / (4.0 * c1 * c2);
        let w = match waist_convention {
            WaistConvention::CrystalWaist => w0,
            WaistConvention::Propagated => w0 * l0sq1.sqrt(),
        };

        Ok(Self {
            config,
            turbulence,
            waist_convention,
            k,
            lambda0: l0,
            w0,
            w,
            zeta,
            gamma,
            a1,
            a2,
            a3,
            b1,
            b2,
            b3,
            b4,
            c1,
            c2,
            c3,
            c4,
        })
    }

    /// Constants for the same geometry and waist convention with γ = 0.
    pub fn vacuum_counterpart(&self) -> Result<Self> {
        Self::with_convention(self.config, Turbulence::VACUUM, self.waist_convention)
    }
}

/// Builds the constants for `cfg` at turbulence strength `gamma`.
pub fn derive_constants(cfg: OpticalConfig, gamma: f64) -> Result<DerivedConstants> {
    check_nonnegative("turbulence strength", gamma)?;
    let rytov = rytov_for_strength(gamma)?;
    let turbulence = Turbulence {
        cn2: structure_constant_for(rytov, cfg.wavelength(), cfg.distance())?,
        rytov,
        gamma,
    };
    DerivedConstants::new(cfg, turbulence)
}
