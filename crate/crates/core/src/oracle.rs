//! Brute-force vacuum check of the closed form.
//!
//! Per Cartesian axis the vacuum two-photon amplitude projected on detection
//! modes h_μ, h_ν is
//!
//! ```text
//! A(μ,ν) = ∫dx1 ∫dx2 h_μ(x1) h_ν(x2) ∫dr g(r) exp[ik/2z ((x1−r)² + (x2−r)²)]
//! ```
//!
//! with g the Gaussian pump at the crystal. The exponent separates into
//! functions of (x1, r) and (x2, r), so the tensor-product Gauss-Legendre sum
//! over the triple grid is evaluated as Σ_r w_r g̃(r) I_μ(r) I_ν(r) in O(N²).

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::OpticalConfig;
use crate::engine::{ModeIndex, ModePair, REFERENCE_VACUUM_P00};
use crate::error::{Error, Result};

/// Maximum relative change allowed under node doubling.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Highest per-axis order the oracle accepts.
pub const MAX_ORACLE_ORDER: u32 = 4;

const MIN_NODES: usize = 64;
const MIN_WINDOW_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Integration window [−half_width, half_width] on every axis [m].
    pub half_width: f64,
    /// Gauss-Legendre nodes per axis.
    pub nodes: usize,
    /// Waist of the detection-plane HG modes [m].
    pub mode_waist: f64,
}

impl QuadratureSpec {
    /// 512 nodes, detection waist W0, window 6·W0.
    pub fn for_config(cfg: &OpticalConfig) -> Self {
        let w0 = cfg.combined_waist();
        Self {
            half_width: 6.0 * w0,
            nodes: 512,
            mode_waist: w0,
        }
    }

    pub fn validate(&self, cfg: &OpticalConfig) -> Result<()> {
        if self.nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least {MIN_NODES} nodes, got {}",
                self.nodes
            )));
        }
        if !(self.mode_waist.is_finite() && self.mode_waist > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mode waist must be positive, got {}",
                self.mode_waist
            )));
        }
        let widest = self.mode_waist.max(cfg.pump_waist());
        if !(self.half_width >= MIN_WINDOW_RATIO * widest) {
            return Err(Error::InvalidParameter(format!(
                "window half-width {} m is below {MIN_WINDOW_RATIO}× the widest radius {widest} m",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Normalised 1-D Hermite-Gaussian functions h_0..=h_max at `x` for waist `w`.
fn hermite_gauss(max: u32, x: f64, w: f64) -> Vec<f64> {
    let t = 2f64.sqrt() * x / w;
    let norm = (2.0 / std::f64::consts::PI).powf(0.25) / w.sqrt();
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut prev = 0.0;
    let mut cur = norm * (-x * x / (w * w)).exp();
    out.push(cur);
    for n in 0..max {
        let n = n as f64;
        let next = (2.0 / (n + 1.0)).sqrt() * t * cur - (n / (n + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Precomputed quadrature grid for one node count.
struct OverlapGrid {
    pump_weights: Vec<Complex64>,
    /// `mode_transforms[j][r]` = Σ_x w_x h_j(x) e^{ikx²/2z} e^{−ikrx/z}.
    mode_transforms: Vec<Vec<Complex64>>,
    /// Same sum with all factors replaced by magnitudes.
    mode_bounds: Vec<f64>,
}

impl OverlapGrid {
    fn new(
        cfg: &OpticalConfig,
        spec: &QuadratureSpec,
        nodes: usize,
        max_order: u32,
    ) -> Result<Self> {
        let n =
            NonZeroUsize::new(nodes).ok_or_else(|| Error::InvalidParameter("zero nodes".into()))?;
        let rule = GaussLegendre::new(n);
        let hw = spec.half_width;
        let points: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x * hw, w * hw))
            .collect();
        let kz = cfg.wavenumber() / cfg.distance();
        let wp = cfg.pump_waist();

        let pump_weights = points
            .iter()
            .map(|&(r, w)| w * (-r * r / (wp * wp)).exp() * Complex64::from_polar(1.0, kz * r * r))
            .collect();

        let mut weighted_modes = vec![Vec::with_capacity(nodes); max_order as usize + 1];
        let mut mode_bounds = vec![0.0; max_order as usize + 1];
        for &(x, w) in &points {
            let chirp = Complex64::from_polar(w, 0.5 * kz * x * x);
            for (j, h) in hermite_gauss(max_order, x, spec.mode_waist)
                .into_iter()
                .enumerate()
            {
                weighted_modes[j].push(chirp * h);
                mode_bounds[j] += (w * h).abs();
            }
        }
        let mode_transforms = weighted_modes
            .iter()
            .map(|v| {
                points
                    .iter()
                    .map(|&(r, _)| {
                        points
                            .iter()
                            .zip(v)
                            .map(|(&(x, _), &a)| a * Complex64::from_polar(1.0, -kz * r * x))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            pump_weights,
            mode_transforms,
            mode_bounds,
        })
    }

    fn amplitude(&self, mu: u32, nu: u32) -> (Complex64, f64) {
        let a = &self.mode_transforms[mu as usize];
        let b = &self.mode_transforms[nu as usize];
        let value = self
            .pump_weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(g, (x, y))| g * x * y)
            .sum();
        let pump_bound: f64 = self.pump_weights.iter().map(|g| g.norm()).sum();
        (
            value,
            pump_bound * self.mode_bounds[mu as usize] * self.mode_bounds[nu as usize],
        )
    }
}

/// Vacuum overlaps on a grid and on the doubled grid, for repeated use.
pub struct VacuumOracle {
    coarse: OverlapGrid,
    fine: OverlapGrid,
    max_order: u32,
}

impl VacuumOracle {
    pub fn new(cfg: &OpticalConfig, spec: &QuadratureSpec, max_order: u32) -> Result<Self> {
        spec.validate(cfg)?;
        if max_order > MAX_ORACLE_ORDER {
            return Err(Error::InvalidParameter(format!(
                "oracle supports orders up to {MAX_ORACLE_ORDER}, got {max_order}"
            )));
        }
        Ok(Self {
            coarse: OverlapGrid::new(cfg, spec, spec.nodes, max_order)?,
            fine: OverlapGrid::new(cfg, spec, 2 * spec.nodes, max_order)?,
            max_order,
        })
    }

    /// A(μ, ν) on the doubled grid, after the node-doubling check.
    pub fn overlap(&self, mu: u32, nu: u32) -> Result<Complex64> {
        Ok(self.overlap_with_change(mu, nu)?.0)
    }

    /// A(μ, ν) together with its relative change under node doubling.
    pub fn overlap_with_change(&self, mu: u32, nu: u32) -> Result<(Complex64, f64)> {
        if mu > self.max_order || nu > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "orders ({mu},{nu}) exceed the oracle's maximum {}",
                self.max_order
            )));
        }
        let (coarse, _) = self.coarse.amplitude(mu, nu);
        let (fine, bound) = self.fine.amplitude(mu, nu);
        // Parity-forbidden overlaps are pure rounding noise; measure them
        // against the magnitude bound instead of their own size.
        let scale = fine.norm().max(1e-10 * bound);
        let change = (fine - coarse).norm() / scale;
        if change > CONVERGENCE_TOLERANCE {
            return Err(Error::Quadrature(format!(
                "A({mu},{nu}) changed by {change:e} under node doubling"
            )));
        }
        Ok((fine, change))
    }

    /// |A(m_s, m_i)|² |A(n_s, n_i)|² scaled so that (00,00) maps to `reference`.
    pub fn probability(&self, pair: ModePair, reference: f64) -> Result<f64> {
        let ground = self.overlap(0, 0)?.norm_sqr();
        let a = self.overlap(pair.signal.m, pair.idler.m)?.norm_sqr();
        let b = self.overlap(pair.signal.n, pair.idler.n)?.norm_sqr();
        Ok(reference * a * b / (ground * ground))
    }
}

/// A(μ, ν) with a fresh grid. Orders up to [`MAX_ORACLE_ORDER`].
pub fn vacuum_overlap_1d(
    mu: u32,
    nu: u32,
    cfg: &OpticalConfig,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    VacuumOracle::new(cfg, spec, mu.max(nu))?.overlap(mu, nu)
}

/// Vacuum P(pair) by quadrature, anchored at the calibrated P(00,00).
pub fn vacuum_probability_oracle(
    pair: ModePair,
    cfg: &OpticalConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let order = [pair.signal, pair.idler]
        .iter()
        .map(|m: &ModeIndex| m.m.max(m.n))
        .max()
        .unwrap_or(0);
    VacuumOracle::new(cfg, spec, order)?.probability(pair, REFERENCE_VACUUM_P00)
}
