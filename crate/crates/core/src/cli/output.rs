use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{DerivedConstants, OpticalConfig, WaistConvention};
use crate::engine::{AppliedNormalization, ModeIndex, Normalization, ProbabilityMatrix};
use crate::error::{Error, Result};

/// Shortest round-trip text, switching to exponent form for very small or large magnitudes.
pub fn fmt_param(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e6).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Geometry shared by every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub wavelength_m: f64,
    pub distance_m: f64,
    pub pump_waist_m: f64,
    pub combined_waist_m: f64,
    pub fresnel_ratio: f64,
    pub w_variant: String,
}

impl LinkParams {
    pub fn new(cfg: &OpticalConfig, convention: WaistConvention) -> Self {
        Self {
            wavelength_m: cfg.wavelength(),
            distance_m: cfg.distance(),
            pump_waist_m: cfg.pump_waist(),
            combined_waist_m: cfg.combined_waist(),
            fresnel_ratio: cfg.fresnel_ratio(),
            w_variant: convention.label().to_string(),
        }
    }

    fn header(&self, out: &mut String) {
        let _ = writeln!(out, "# wavelength_m={}", fmt_param(self.wavelength_m));
        let _ = writeln!(out, "# distance_m={}", fmt_param(self.distance_m));
        let _ = writeln!(out, "# pump_waist_m={}", fmt_param(self.pump_waist_m));
        let _ = writeln!(
            out,
            "# combined_waist_m={}",
            fmt_param(self.combined_waist_m)
        );
        let _ = writeln!(out, "# fresnel_ratio={}", fmt_param(self.fresnel_ratio));
        let _ = writeln!(out, "# w_variant={}", self.w_variant);
    }
}

/// Geometry plus the resolved turbulence of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub wavelength_m: f64,
    pub distance_m: f64,
    pub pump_waist_m: f64,
    pub combined_waist_m: f64,
    pub fresnel_ratio: f64,
    pub cn2: f64,
    pub rytov: f64,
    pub gamma: f64,
    pub w_variant: String,
    pub w_m: f64,
}

impl ChannelParams {
    pub fn new(c: &DerivedConstants) -> Self {
        let link = LinkParams::new(&c.config, c.waist_convention);
        Self {
            wavelength_m: link.wavelength_m,
            distance_m: link.distance_m,
            pump_waist_m: link.pump_waist_m,
            combined_waist_m: link.combined_waist_m,
            fresnel_ratio: link.fresnel_ratio,
            cn2: c.turbulence.cn2,
            rytov: c.turbulence.rytov,
            gamma: c.gamma,
            w_variant: link.w_variant,
            w_m: c.w,
        }
    }

    fn header(&self, out: &mut String) {
        let _ = writeln!(out, "# wavelength_m={}", fmt_param(self.wavelength_m));
        let _ = writeln!(out, "# distance_m={}", fmt_param(self.distance_m));
        let _ = writeln!(out, "# pump_waist_m={}", fmt_param(self.pump_waist_m));
        let _ = writeln!(
            out,
            "# combined_waist_m={}",
            fmt_param(self.combined_waist_m)
        );
        let _ = writeln!(out, "# fresnel_ratio={}", fmt_param(self.fresnel_ratio));
        let _ = writeln!(out, "# cn2={}", fmt_param(self.cn2));
        let _ = writeln!(out, "# rytov={}", fmt_param(self.rytov));
        let _ = writeln!(out, "# gamma={}", fmt_param(self.gamma));
        let _ = writeln!(out, "# w_variant={}", self.w_variant);
        let _ = writeln!(out, "# w_m={}", fmt_param(self.w_m));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationInfo {
    pub mode: String,
    pub reference_pair: Option<String>,
    pub reference_value: Option<f64>,
    /// Unnormalised vacuum value of the reference pair.
    pub raw_reference: Option<f64>,
    pub scale: f64,
}

impl From<&AppliedNormalization> for NormalizationInfo {
    fn from(n: &AppliedNormalization) -> Self {
        let (reference_pair, reference_value) = match n.normalization {
            Normalization::Raw => (None, None),
            Normalization::Calibrated { reference, value } => {
                (Some(reference.to_string()), Some(value))
            }
        };
        Self {
            mode: n.normalization.label().to_string(),
            reference_pair,
            reference_value,
            raw_reference: n.raw_reference,
            scale: n.scale,
        }
    }
}

impl NormalizationInfo {
    fn header(&self, out: &mut String, precision: usize) {
        let _ = writeln!(out, "# normalization={}", self.mode);
        if let (Some(pair), Some(value)) = (&self.reference_pair, self.reference_value) {
            let _ = writeln!(out, "# reference_pair={pair}");
            let _ = writeln!(out, "# reference_value={}", fmt_param(value));
        }
        if let Some(raw) = self.raw_reference {
            let _ = writeln!(out, "# raw_reference={}", fmt_param(raw));
        }
        let _ = writeln!(out, "# precision={precision}");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub params: ChannelParams,
    pub ordering: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub normalization: NormalizationInfo,
}

impl From<&ProbabilityMatrix> for MatrixDocument {
    fn from(m: &ProbabilityMatrix) -> Self {
        Self {
            params: ChannelParams::new(&m.constants),
            ordering: m.labels(),
            matrix: m.values.clone(),
            normalization: (&m.normalization).into(),
        }
    }
}

impl MatrixDocument {
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        self.params.header(&mut out);
        self.normalization.header(&mut out, precision);
        let _ = writeln!(out, ",{}", self.ordering.join(","));
        for (label, row) in self.ordering.iter().zip(&self.matrix) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v:.precision$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Reads the label row/column and values back from [`MatrixDocument::to_csv`] output.
pub fn parse_matrix_csv(text: &str) -> Result<(Vec<ModeIndex>, Vec<Vec<f64>>)> {
    let bad = |what: &str| Error::InvalidParameter(format!("malformed matrix CSV: {what}"));
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("missing label row"))?;
    let ordering = header
        .split(',')
        .skip(1)
        .map(str::parse)
        .collect::<Result<Vec<ModeIndex>>>()?;
    let mut values = Vec::with_capacity(ordering.len());
    for (line, expected) in lines.zip(&ordering) {
        let mut cells = line.split(',');
        let label: ModeIndex = cells.next().ok_or_else(|| bad("empty row"))?.parse()?;
        if label != *expected {
            return Err(bad("row labels differ from column labels"));
        }
        let row = cells
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad("non-numeric cell")))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != ordering.len() {
            return Err(bad("ragged row"));
        }
        values.push(row);
    }
    if values.len() != ordering.len() {
        return Err(bad("row count differs from column count"));
    }
    Ok((ordering, values))
}

/// Probabilities of selected pairs along a σ_R² grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub params: LinkParams,
    pub normalization: NormalizationInfo,
    pub grid: Vec<f64>,
    pub gamma: Vec<f64>,
    pub pairs: Vec<String>,
    /// One series per pair, each as long as `grid`.
    pub series: Vec<Vec<f64>>,
}

impl SweepResult {
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        self.params.header(&mut out);
        self.normalization.header(&mut out, precision);
        out.push_str("rytov");
        for p in &self.pairs {
            let _ = write!(out, ",P({p})");
        }
        out.push('\n');
        for (i, r) in self.grid.iter().enumerate() {
            let _ = write!(out, "{}", fmt_param(*r));
            for s in &self.series {
                let v = s[i];
                let _ = write!(out, ",{v:.precision$}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub pair: String,
    pub p_vacuum: f64,
    pub p_turbulent: f64,
    /// Retention P_turb/P_vac for allowed pairs, leakage P_turb for forbidden ones.
    pub score: f64,
    pub highlight: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub params: ChannelParams,
    pub normalization: NormalizationInfo,
    pub allowed: Vec<RankEntry>,
    pub forbidden: Vec<RankEntry>,
}

impl RankReport {
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        self.params.header(&mut out);
        self.normalization.header(&mut out, precision);
        out.push_str("kind,pair,p_vacuum,p_turbulent,score,highlight\n");
        for (kind, entries) in [("retention", &self.allowed), ("leakage", &self.forbidden)] {
            for e in entries {
                let _ = writeln!(
                    out,
                    "{kind},{},{:.precision$},{:.precision$},{:.precision$},{}",
                    e.pair,
                    e.p_vacuum,
                    e.p_turbulent,
                    e.score,
                    e.highlight.as_deref().unwrap_or("")
                );
            }
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::NumericalFailure(format!("serialisation failed: {e}")))
}
