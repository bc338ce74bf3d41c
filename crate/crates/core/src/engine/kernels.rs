//! The 𝓕 and 𝓚 kernels and the per-axis factor Π(μ, ν).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::DerivedConstants;
use crate::error::{Error, Result};
use crate::specfun::{gamma_half, hyp2f1_real, hyp2f1_terminating, HalfInteger};
use crate::sum::{sum_descending, ComplexSum};

/// Relative size of |C3| against C1 + C2 below which the two 1/C3 terms of 𝓚
/// are replaced by their joint first-order expansion.
pub const SMALL_C3_THRESHOLD: f64 = 1e-6;

/// Allowed imaginary residual of Π relative to its real part.
pub const REALNESS_TOLERANCE: f64 = 1e-10;

/// Cancellation floor of Π relative to the sum of term magnitudes.
pub const CANCELLATION_FLOOR: f64 = 1e-14;

/// σ(k, l) = (−1)^k + (−1)^l.
pub fn sigma(k: i64, l: i64) -> i32 {
    let s = |v: i64| if v.rem_euclid(2) == 0 { 1 } else { -1 };
    s(k) + s(l)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn internal(err: Error) -> Error {
    Error::NumericalFailure(format!("unexpected special-function failure: {err}"))
}

/// 𝓕(μ, ν, k, l): the pump/mode overlap factor.
///
/// Returns exactly zero whenever σ(k, l) = 0, without touching Γ or ₂F₁.
pub fn f_kernel(mu: u32, nu: u32, k: u32, l: u32, consts: &DerivedConstants) -> Result<Complex64> {
    if k > mu || l > nu {
        return Err(Error::Domain(format!(
            "f_kernel needs k ≤ μ and l ≤ ν, got ({mu},{nu},{k},{l})"
        )));
    }
    let s = sigma(k as i64, l as i64);
    if s == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kl = k + l;
    let zeta = consts.zeta;
    let gamma = gamma_half(HalfInteger::halves(kl as i64 + 1)).map_err(internal)?;
    let hyp = hyp2f1_terminating(k, l, HalfInteger::halves(1 - kl as i64), 1.0 / (2.0 * zeta))
        .map_err(internal)?;
    let real_part = binomial(mu, k)
        * binomial(nu, l)
        * 2f64.powi((mu + nu) as i32)
        * s as f64
        * gamma
        * (2f64.sqrt() / consts.w).powi((mu + nu - kl) as i32);
    let one = Complex64::new(1.0, 0.0);
    Ok(i_pow(kl) * real_part * (one - zeta).sqrt() * zeta.sqrt().powu(kl) * hyp)
}

/// 𝓚(a, b): the turbulence-averaged propagation integral.
pub fn k_kernel(a: u32, b: u32, consts: &DerivedConstants) -> Result<Complex64> {
    let (c1, c2, c3, c4) = (consts.c1, consts.c2, consts.c3, consts.c4);
    if !(c1 * c2 > 0.0) {
        return Err(Error::NumericalRegime(format!(
            "C1·C2 = {:e} must be positive",
            c1 * c2
        )));
    }
    // C4 ≤ 0 is mapped into [0, 1) for the series; it must stay resolvably below 1.
    if !(c4.is_finite() && c4 / (c4 - 1.0) < 1.0) {
        return Err(Error::NumericalRegime(format!(
            "C4 = {c4:e} is too large in magnitude"
        )));
    }
    if (a + b) % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inv_sqrt_c1 = 1.0 / c1.sqrt();
    let inv_sqrt_c2 = 1.0 / c2.sqrt();
    let ab = (a + b) as i64;
    let small_c3 = c3.abs() < SMALL_C3_THRESHOLD * (c1 + c2);

    let mut acc = ComplexSum::new();
    let mut magnitude = 0.0;
    for p in 0..=a {
        for q in 0..=b {
            let n1 = (p + q) as i64;
            let n2 = ab - n1;
            let sign = if (b - q).is_multiple_of(2) { 1.0 } else { -1.0 };
            let pre = binomial(a, p)
                * binomial(b, q)
                * sign
                * inv_sqrt_c1.powi((2 + n1) as i32)
                * inv_sqrt_c2.powi(n2 as i32);

            let mut bracket = Complex64::new(0.0, 0.0);
            let s0 = sigma(0, n1) * sigma(0, n2);
            if s0 != 0 {
                let g = gamma_half(HalfInteger::halves(1 + n1)).map_err(internal)?
                    * gamma_half(HalfInteger::halves(1 + n2)).map_err(internal)?;
                let f = hyp2f1_real((1 + n1) as f64 / 2.0, (1 + n2) as f64 / 2.0, 0.5, c4)?;
                bracket += s0 as f64 * (c1 / c2).sqrt() * g * f;
            }
            let s1 = sigma(1, n1) * sigma(1, n2);
            if s1 != 0 {
                let g = gamma_half(HalfInteger::halves(2 + n1)).map_err(internal)?
                    * gamma_half(HalfInteger::halves(2 + n2)).map_err(internal)?;
                bracket += odd_parity_term(n1, n2, g, s1 as f64, consts, small_c3)?;
            }
            let term = pre * bracket;
            magnitude += term.norm();
            acc.add(term);
        }
    }
    let total = acc.value();
    if total.norm() <= CANCELLATION_FLOOR * magnitude {
        // In vacuum (C1 = C2) the (−1)^(b−q) signs cancel some kernels exactly.
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(total * 0.25 * 0.5f64.sqrt().powi(ab as i32))
}

/// Second minus third bracket term of 𝓚 for odd p+q.
///
/// Each carries 1/C3 while their difference is O(C3); `expand` selects the
/// first-order form −i·σσ·ΓΓ·C3/C2 instead of the printed expression.
fn odd_parity_term(
    n1: i64,
    n2: i64,
    gammas: f64,
    sigmas: f64,
    consts: &DerivedConstants,
    expand: bool,
) -> Result<Complex64> {
    let (c1, c2, c3, c4) = (consts.c1, consts.c2, consts.c3, consts.c4);
    let i = Complex64::i();
    if expand {
        return Ok(-i * (sigmas * gammas * c3 / c2));
    }
    let ab = (n1 + n2) as f64;
    let alpha = (2 + n1) as f64 / 2.0;
    let beta = (2 + n2) as f64 / 2.0;
    let den = c2 * c3 * ((1 + n1) * (1 + n2)) as f64;
    let f_minus = hyp2f1_real(alpha, beta, -0.5, c4)?;
    let f_plus = hyp2f1_real(alpha, beta, 0.5, c4)?;
    let second = (4.0 * c1 * c2 + c3 * c3) / den * gammas * f_minus;
    let third = (4.0 * c1 * c2 + c3 * c3 * (4.0 + ab)) / den * gammas * f_plus;
    Ok(i * (sigmas * (third - second)))
}

/// Π(μ, ν) together with the diagnostics of its evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiEvaluation {
    /// Real part after clamping tiny negative noise to zero.
    pub value: f64,
    /// Imaginary part of the quadruple sum times the prefactor.
    pub imag_residual: f64,
    /// Prefactor times Σ|terms|; the scale of cancellation in the sum.
    pub term_scale: f64,
}

impl PiEvaluation {
    /// Bound the imaginary residual must satisfy.
    pub fn realness_bound(&self) -> f64 {
        REALNESS_TOLERANCE * self.value.abs() + CANCELLATION_FLOOR * self.term_scale
    }
}

/// Π(μ, ν) with diagnostics; fails if the result is not real to tolerance.
pub fn pi_factor_detailed(mu: u32, nu: u32, consts: &DerivedConstants) -> Result<PiEvaluation> {
    let mut f_values = Vec::new();
    for k in 0..=mu {
        for l in 0..=nu {
            let f = f_kernel(mu, nu, k, l, consts)?;
            if f != Complex64::new(0.0, 0.0) {
                f_values.push((mu + nu - k - l, f));
            }
        }
    }
    let mut k_cache: HashMap<(u32, u32), Complex64> = HashMap::new();
    let mut terms = Vec::with_capacity(f_values.len() * f_values.len());
    for &(a, f1) in &f_values {
        for &(b, f3) in &f_values {
            let kk = match k_cache.get(&(a, b)) {
                Some(v) => *v,
                None => {
                    let v = k_kernel(a, b, consts)?;
                    k_cache.insert((a, b), v);
                    v
                }
            };
            terms.push(f1 * f3.conj() * kk);
        }
    }
    let scale_sum: f64 = terms.iter().map(|t| t.norm()).sum();
    let total = sum_descending(&mut terms);

    let cfg = &consts.config;
    let (lambda, z) = (cfg.wavelength(), cfg.distance());
    let prefactor = 1.0
        / (lambda
            * lambda
            * z
            * z
            * (PI * consts.b1).sqrt()
            * factorial(mu)
            * factorial(nu)
            * 2f64.powi((mu + nu) as i32));
    let value = total * prefactor;
    let mut eval = PiEvaluation {
        value: value.re,
        imag_residual: value.im,
        term_scale: scale_sum * prefactor,
    };
    if eval.imag_residual.abs() > eval.realness_bound() {
        return Err(Error::NumericalFailure(format!(
            "Π({mu},{nu}) has imaginary residual {:e} against real part {:e}",
            eval.imag_residual, eval.value
        )));
    }
    if eval.value.abs() <= CANCELLATION_FLOOR * eval.term_scale {
        // Pure cancellation noise (vacuum Π with μ+ν odd).
        eval.value = 0.0;
    } else if eval.value < 0.0 {
        return Err(Error::NumericalFailure(format!(
            "Π({mu},{nu}) = {:e} is negative",
            eval.value
        )));
    }
    Ok(eval)
}

/// Π(μ, ν): the per-axis factor of the joint probability.
pub fn pi_factor(mu: u32, nu: u32, consts: &DerivedConstants) -> Result<f64> {
    pi_factor_detailed(mu, nu, consts).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_constants, turbulence_strength, OpticalConfig};

    fn vacuum() -> DerivedConstants {
        derive_constants(OpticalConfig::reference_link(), 0.0).unwrap()
    }

    fn turbulent() -> DerivedConstants {
        derive_constants(
            OpticalConfig::reference_link(),
            turbulence_strength(0.02).unwrap(),
        )
        .unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(0, 0), 2);
        assert_eq!(sigma(1, 2), 0);
        assert_eq!(sigma(1, 3), -2);
        assert_eq!(sigma(-1, 1), -2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(20, 10), 184_756.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 5), 1.0);
    }

    #[test]
    fn f_kernel_ground_term() {
        let c = vacuum();
        let one = Complex64::new(1.0, 0.0);
        let expected = 2.0 * PI.sqrt() * (one - c.zeta).sqrt();
        let f = f_kernel(0, 0, 0, 0, &c).unwrap();
        assert!(close(f, expected, 1e-15));
        // 30-digit evaluation of the same product.
        assert!(close(
            f,
            Complex64::new(0.937_145_237_369_775_7, 0.827_054_842_344_054_2),
            1e-14
        ));
    }

    #[test]
    fn f_kernel_vanishes_for_odd_index_sum() {
        let c = vacuum();
        for (mu, nu) in [(1, 0), (2, 1), (3, 3)] {
            for k in 0..=mu {
                for l in 0..=nu {
                    if (k + l) % 2 == 1 {
                        assert_eq!(
                            f_kernel(mu, nu, k, l, &c).unwrap(),
                            Complex64::new(0.0, 0.0)
                        );
                    }
                }
            }
        }
        assert!(f_kernel(1, 1, 2, 0, &c).is_err());
    }

    #[test]
    fn f_kernel_against_high_precision_oracle() {
        let c = vacuum();
        let f = f_kernel(2, 0, 2, 0, &c).unwrap();
        assert!(close(
            f,
            Complex64::new(-2.049_366_942_962_085_3, -1.397_338_794_230_248_7),
            1e-13
        ));
        let f = f_kernel(3, 1, 1, 1, &c).unwrap();
        assert!(close(
            f,
            Complex64::new(413.480_431_457_565_45, -606.419_238_691_234_5),
            1e-13
        ));
    }

    #[test]
    fn k_kernel_ground_term_reduction() {
        let c = vacuum();
        let k00 = k_kernel(0, 0, &c).unwrap();
        let f = hyp2f1_real(0.5, 0.5, 0.5, c.c4).unwrap();
        let expected = 0.25 / c.c1 * (c.c1 / c.c2).sqrt() * 4.0 * PI * f;
        assert!(close(k00, Complex64::new(expected, 0.0), 1e-14));
        assert!(close(
            k00,
            Complex64::new(0.007_977_265_281_807_614, 0.0),
            1e-13
        ));
    }

    #[test]
    fn k_kernel_against_high_precision_oracle() {
        let c = vacuum();
        let k20 = k_kernel(2, 0, &c).unwrap();
        assert!(close(
            k20,
            Complex64::new(1.012_297_807_317_226e-5, 3.222_243_998_312_470_7e-7),
            1e-12
        ));
        let t = turbulent();
        let k11 = k_kernel(1, 1, &t).unwrap();
        assert!(close(
            k11,
            Complex64::new(1.138_610_413_723_93e-6, 0.0),
            1e-10
        ));
    }

    #[test]
    fn k_kernel_odd_total_is_zero() {
        let c = turbulent();
        for (a, b) in [(1, 0), (0, 3), (2, 3), (4, 1)] {
            assert_eq!(k_kernel(a, b, &c).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn k_kernel_rejects_invalid_regime() {
        let mut c = vacuum();
        c.c2 = -1.0;
        assert!(matches!(k_kernel(0, 0, &c), Err(Error::NumericalRegime(_))));
    }

    #[test]
    fn small_c3_expansion_matches_printed_form() {
        let base = turbulent();
        for ratio in [1e-3, 1e-4, 1e-5] {
            let mut c = base;
            c.c3 = -ratio * (base.c1 + base.c2);
            c.c4 = -c.c3 * c.c3 / (4.0 * c.c1 * c.c2);
            for (n1, n2) in [(1, 1), (3, 1), (1, 5), (5, 3)] {
                let g = gamma_half(HalfInteger::halves(2 + n1)).unwrap()
                    * gamma_half(HalfInteger::halves(2 + n2)).unwrap();
                let printed = odd_parity_term(n1, n2, g, 4.0, &c, false).unwrap();
                let expanded = odd_parity_term(n1, n2, g, 4.0, &c, true).unwrap();
                let err = (printed - expanded).norm() / expanded.norm();
                // Truncation O(ratio²) plus cancellation O(ε/ratio²) in the printed form.
                let bound = 50.0 * ratio * ratio * ((n1 + 2) * (n2 + 2)) as f64
                    + 1e-16 / (ratio * ratio) * 10.0;
                assert!(
                    err < bound,
                    "ratio {ratio} ({n1},{n2}): {err:e} > {bound:e}"
                );
            }
        }
    }

    #[test]
    fn k_kernel_is_continuous_across_small_c3_switch() {
        let base = turbulent();
        let at = |ratio: f64| {
            let mut c = base;
            c.c3 = -ratio * (base.c1 + base.c2);
            c.c4 = -c.c3 * c.c3 / (4.0 * c.c1 * c.c2);
            k_kernel(3, 1, &c).unwrap()
        };
        let below = at(SMALL_C3_THRESHOLD * 0.999_999);
        let above = at(SMALL_C3_THRESHOLD * 1.000_001);
        assert!((below - above).norm() < 1e-5 * below.norm());
    }

    #[test]
    fn pi_symmetry() {
        for c in [vacuum(), turbulent()] {
            for mu in 0..5 {
                for nu in 0..5 {
                    let a = pi_factor(mu, nu, &c).unwrap();
                    let b = pi_factor(nu, mu, &c).unwrap();
                    assert!(
                        (a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-14,
                        "({mu},{nu})"
                    );
                }
            }
        }
    }

    #[test]
    fn pi_against_high_precision_oracle() {
        let c = vacuum();
        for ((mu, nu), expected) in [
            ((0, 0), 5.550_482_925_050_750_4),
            ((1, 1), 1.364_530_826_525_891_5),
            ((0, 2), 0.706_759_848_662_032),
            ((2, 2), 0.770_356_998_962_371_3),
            ((1, 3), 0.521_249_563_401_529_8),
            ((3, 3), 0.535_961_159_022_527),
            ((0, 4), 0.134_990_817_130_442_16),
        ] {
            let v = pi_factor(mu, nu, &c).unwrap();
            assert!(
                ((v - expected) / expected).abs() < 1e-11,
                "({mu},{nu}): {v}"
            );
        }
        let t = turbulent();
        for ((mu, nu), expected) in [
            ((0, 0), 4.771_242_371_606_410_3),
            ((0, 1), 0.311_256_279_101_103_4),
            ((1, 1), 0.935_609_324_241_925_7),
            ((0, 2), 0.786_967_925_138_858_6),
            ((2, 3), 0.009_985_238_453_470_274),
        ] {
            let v = pi_factor(mu, nu, &t).unwrap();
            assert!(
                ((v - expected) / expected).abs() < 1e-10,
                "turbulent ({mu},{nu}): {v}"
            );
        }
    }

    #[test]
    fn vacuum_odd_pi_is_zero() {
        let c = vacuum();
        for (mu, nu) in [(0, 1), (1, 2), (0, 3), (2, 3)] {
            let e = pi_factor_detailed(mu, nu, &c).unwrap();
            assert_eq!(e.value, 0.0, "({mu},{nu})");
        }
    }
}
