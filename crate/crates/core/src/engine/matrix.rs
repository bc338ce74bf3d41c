use std::collections::BTreeSet;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::pi_factor;
use super::modes::{ModeIndex, ModePair, DEFAULT_MAX_ORDER};
use crate::channel::DerivedConstants;
use crate::error::{Error, Result};

/// Reference vacuum P(00,00), the default calibration anchor.
pub const REFERENCE_VACUUM_P00: f64 = 0.31307;

/// How matrix entries are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Normalization {
    /// Values of the closed form as printed.
    Raw,
    /// One global factor chosen so that `reference` evaluated in vacuum, at
    /// the same geometry, equals `value`.
    Calibrated { reference: ModePair, value: f64 },
}

impl Normalization {
    pub fn calibrated_default() -> Self {
        Normalization::Calibrated {
            reference: ModePair::new(ModeIndex::GAUSSIAN, ModeIndex::GAUSSIAN),
            value: REFERENCE_VACUUM_P00,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Calibrated { .. } => "calibrated",
        }
    }
}

/// The normalization that was applied, with the numbers behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedNormalization {
    pub normalization: Normalization,
    /// Factor multiplied into every raw entry (1 for raw output).
    pub scale: f64,
    /// Raw (unscaled) vacuum value of the reference pair, when calibrated.
    pub raw_reference: Option<f64>,
}

/// Per-channel evaluator with a thread-safe Π memo table.
///
/// Π is symmetric, so entries are keyed on (min, max) and every cell of a
/// matrix is a product of two table lookups.
#[derive(Debug)]
pub struct Engine {
    consts: DerivedConstants,
    max_order: u32,
    table: Vec<OnceLock<Result<f64>>>,
}

impl Engine {
    pub fn new(consts: DerivedConstants) -> Self {
        Self::with_max_order(consts, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(consts: DerivedConstants, max_order: u32) -> Self {
        let side = (max_order + 1) as usize;
        Self {
            consts,
            max_order,
            table: (0..side * side).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.consts
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    fn check_mode(&self, mode: &ModeIndex) -> Result<()> {
        if mode.m > self.max_order || mode.n > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "mode {mode} exceeds the maximum order {}",
                self.max_order
            )));
        }
        Ok(())
    }

    /// Memoised Π(μ, ν).
    pub fn pi(&self, mu: u32, nu: u32) -> Result<f64> {
        if mu > self.max_order || nu > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "order {} exceeds the maximum order {}",
                mu.max(nu),
                self.max_order
            )));
        }
        let (lo, hi) = (mu.min(nu), mu.max(nu));
        let slot = &self.table[(lo * (self.max_order + 1) + hi) as usize];
        slot.get_or_init(|| pi_factor(lo, hi, &self.consts)).clone()
    }

    /// P(HG_{m_s n_s}, HG_{m_i n_i}) = Π(m_s, m_i) Π(n_s, n_i).
    pub fn joint_probability(&self, pair: ModePair) -> Result<f64> {
        self.check_mode(&pair.signal)?;
        self.check_mode(&pair.idler)?;
        Ok(self.pi(pair.signal.m, pair.idler.m)? * self.pi(pair.signal.n, pair.idler.n)?)
    }

    fn fill_table(&self, keys: impl IntoIterator<Item = (u32, u32)>) -> Result<()> {
        let keys: BTreeSet<(u32, u32)> = keys
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let keys: Vec<_> = keys.into_iter().collect();
        keys.par_iter()
            .try_for_each(|&(a, b)| self.pi(a, b).map(|_| ()))
    }

    /// Scale factor for `normalization` at this engine's geometry.
    pub fn normalization_scale(
        &self,
        normalization: Normalization,
    ) -> Result<AppliedNormalization> {
        match normalization {
            Normalization::Raw => Ok(AppliedNormalization {
                normalization,
                scale: 1.0,
                raw_reference: None,
            }),
            Normalization::Calibrated { reference, value } => {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::Calibration(format!(
                        "reference value {value} must be positive"
                    )));
                }
                let raw = if self.consts.turbulence.is_vacuum() {
                    self.joint_probability(reference)?
                } else {
                    let vacuum =
                        Engine::with_max_order(self.consts.vacuum_counterpart()?, self.max_order);
                    vacuum.joint_probability(reference)?
                };
                if !(raw > 0.0) {
                    return Err(Error::Calibration(format!(
                        "reference pair ({reference}) has vacuum probability {raw:e}; cannot calibrate"
                    )));
                }
                Ok(AppliedNormalization {
                    normalization,
                    scale: value / raw,
                    raw_reference: Some(raw),
                })
            }
        }
    }

    /// Fills a matrix over `modes` (rows: signal, columns: idler).
    pub fn probability_matrix(
        &self,
        modes: &[ModeIndex],
        normalization: Normalization,
    ) -> Result<ProbabilityMatrix> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode list is empty".into()));
        }
        for mode in modes {
            self.check_mode(mode)?;
        }
        let ms: BTreeSet<u32> = modes.iter().map(|m| m.m).collect();
        let ns: BTreeSet<u32> = modes.iter().map(|m| m.n).collect();
        let pairs = |set: &BTreeSet<u32>| {
            set.iter()
                .flat_map(|&a| set.iter().map(move |&b| (a, b)))
                .collect::<Vec<_>>()
        };
        self.fill_table(pairs(&ms).into_iter().chain(pairs(&ns)))?;

        let applied = self.normalization_scale(normalization)?;
        let values = modes
            .iter()
            .map(|&s| {
                modes
                    .iter()
                    .map(|&i| {
                        self.joint_probability(ModePair::new(s, i))
                            .map(|p| p * applied.scale)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbabilityMatrix {
            ordering: modes.to_vec(),
            values,
            constants: self.consts,
            normalization: applied,
        })
    }
}

/// P(pair) evaluated directly, without memoisation.
pub fn joint_probability(pair: ModePair, consts: &DerivedConstants) -> Result<f64> {
    Engine::with_max_order(
        *consts,
        pair.signal
            .m
            .max(pair.signal.n)
            .max(pair.idler.m)
            .max(pair.idler.n),
    )
    .joint_probability(pair)
}

/// Matrix over `modes` with the default order cap.
pub fn probability_matrix(
    modes: &[ModeIndex],
    consts: &DerivedConstants,
    normalization: Normalization,
) -> Result<ProbabilityMatrix> {
    Engine::new(*consts).probability_matrix(modes, normalization)
}

/// Joint probabilities over an ordered mode grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMatrix {
    pub ordering: Vec<ModeIndex>,
    /// `values[i][j]` = P(signal = ordering[i], idler = ordering[j]).
    pub values: Vec<Vec<f64>>,
    pub constants: DerivedConstants,
    pub normalization: AppliedNormalization,
}

impl ProbabilityMatrix {
    pub fn dim(&self) -> usize {
        self.ordering.len()
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        self.ordering.iter().position(|&m| m == mode)
    }

    pub fn get(&self, pair: ModePair) -> Option<f64> {
        Some(self.values[self.index_of(pair.signal)?][self.index_of(pair.idler)?])
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn labels(&self) -> Vec<String> {
        self.ordering.iter().map(ModeIndex::label).collect()
    }
}
