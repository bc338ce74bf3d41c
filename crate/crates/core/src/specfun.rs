//! Special functions needed by the closed-form kernels: Gamma at positive
//! half-integers, Pochhammer symbols, and two flavours of Gauss ₂F₁.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Iteration cap for the non-terminating ₂F₁ series.
pub const HYP2F1_MAX_TERMS: usize = 10_000;

const SERIES_TOLERANCE: f64 = 1e-16;

/// An integer or half-odd-integer, stored exactly as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub const fn from_integer(n: i64) -> Self {
        Self { twice: 2 * n }
    }

    /// `numerator / 2`.
    pub const fn halves(numerator: i64) -> Self {
        Self::from_twice(numerator)
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Γ(x) for positive integer or half-odd-integer `x`, by upward recursion
/// from Γ(1) = 1 or Γ(1/2) = √π.
pub fn gamma_half(x: HalfInteger) -> Result<f64> {
    if x.twice <= 0 {
        return Err(Error::Domain(format!("gamma_half requires x > 0, got {x}")));
    }
    // Start at the anchor with the same parity and walk up in unit steps.
    let (mut twice, mut value) = if x.is_integer() {
        (2, 1.0)
    } else {
        (1, PI.sqrt())
    };
    while twice < x.twice {
        value *= twice as f64 / 2.0;
        twice += 2;
    }
    Ok(value)
}

/// Rising factorial (c)_n = c (c+1) … (c+n−1); (c)_0 = 1.
pub fn pochhammer(c: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (c + i as f64))
}

/// ₂F₁(−k, −l; c; x): the series terminates after min(k, l) + 1 terms.
pub fn hyp2f1_terminating(k: u32, l: u32, c: HalfInteger, x: Complex64) -> Result<Complex64> {
    let last = k.min(l);
    let c = c.value();
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for n in 0..last {
        let n = n as f64;
        let denom = c + n;
        if denom == 0.0 {
            return Err(Error::Pole(format!(
                "terminating 2F1(-{k},-{l};{c};x) hits (c)_n = 0 at n = {}",
                n + 1.0
            )));
        }
        term *= (n - k as f64) * (n - l as f64) / (denom * (n + 1.0));
        term *= x;
        sum += term;
    }
    Ok(sum)
}

fn check_denominator(c: f64) -> Result<()> {
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Pole(format!(
            "2F1 with c = {c} (nonpositive integer)"
        )));
    }
    Ok(())
}

/// Direct Gauss series Σ (a)_n (b)_n / ((c)_n n!) xⁿ for |x| < 1.
///
/// Converges slowly as |x| → 1; [`hyp2f1_real`] maps negative arguments
/// into [0, 1) first. Exposed for cross-checking.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && x.is_finite()) {
        return Err(Error::Domain("2F1 parameters must be finite".into()));
    }
    check_denominator(c)?;
    if x.abs() >= 1.0 {
        return Err(Error::Domain(format!("2F1 series needs |x| < 1, got {x}")));
    }
    let mut sum = NeumaierSum::new();
    sum.add(1.0);
    let mut term = 1.0;
    for n in 0..HYP2F1_MAX_TERMS {
        let n = n as f64;
        let ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        term *= ratio;
        if term == 0.0 {
            return Ok(sum.value());
        }
        sum.add(term);
        // Tail bound once the term ratio has settled below one.
        if ratio.abs() < 1.0 {
            let tail = term.abs() * ratio.abs() / (1.0 - ratio.abs());
            if tail <= SERIES_TOLERANCE * sum.value().abs() {
                return Ok(sum.value());
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "2F1({a},{b};{c};{x}) did not converge in {HYP2F1_MAX_TERMS} terms"
    )))
}

/// ₂F₁(a, b; c; x) for real parameters and x < 1.
///
/// Negative arguments go through the Pfaff transformation
/// ₂F₁(a,b;c;x) = (1−x)^(−a) ₂F₁(a, c−b; c; x/(x−1)), which lands in [0, 1).
pub fn hyp2f1_real(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    check_denominator(c)?;
    if x.is_nan() || x >= 1.0 {
        return Err(Error::Domain(format!("2F1 requires x < 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x > 0.0 {
        return hyp2f1_series(a, b, c, x);
    }
    let mapped = x / (x - 1.0);
    let prefactor = (1.0 - x).powf(-a);
    Ok(prefactor * hyp2f1_series(a, c - b, c, mapped)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_anchors_and_recursion() {
        assert_eq!(gamma_half(HalfInteger::halves(1)).unwrap(), PI.sqrt());
        assert_eq!(gamma_half(HalfInteger::from_integer(1)).unwrap(), 1.0);
        let g52 = gamma_half(HalfInteger::halves(5)).unwrap();
        assert!(rel(g52, 0.75 * PI.sqrt()) < 1e-15);
        assert!((g52 - 1.3293403882).abs() < 1e-10);
        assert_eq!(gamma_half(HalfInteger::from_integer(6)).unwrap(), 120.0);
    }

    #[test]
    fn gamma_matches_factorials_and_double_factorials_up_to_sixty() {
        // Γ(n) = (n−1)!, Γ(n+1/2) = (2n)! √π / (4ⁿ n!), evaluated in u128/f64
        // independently of the recursion.
        let mut fact = 1u128;
        for n in 1..=30u32 {
            if n > 1 {
                fact *= (n - 1) as u128;
            }
            let g = gamma_half(HalfInteger::from_integer(n as i64)).unwrap();
            assert!(rel(g, fact as f64) < 1e-14, "n = {n}");
        }
        for n in 0..=59i64 {
            let g = gamma_half(HalfInteger::from_twice(2 * n + 1)).unwrap();
            // Γ(n + 1/2) = √π Π_{j=1..n} (j − 1/2), computed as a log-sum.
            let log: f64 = (1..=n).map(|j| (j as f64 - 0.5).ln()).sum();
            let expected = PI.sqrt() * log.exp();
            assert!(rel(g, expected) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        for twice in [0, -1, -2, -7] {
            assert!(matches!(
                gamma_half(HalfInteger::from_twice(twice)),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(-0.5, 2), -0.25);
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(1.0, 4), 24.0);
    }

    #[test]
    fn terminating_examples() {
        let one = hyp2f1_terminating(
            0,
            5,
            HalfInteger::from_integer(-2),
            Complex64::new(0.3, 0.1),
        )
        .unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));

        // 1 + (−1)(−1)/((−1/2)·1)·0.5 = 1 − 1 = 0.
        let v =
            hyp2f1_terminating(1, 1, HalfInteger::halves(-1), Complex64::new(0.5, 0.0)).unwrap();
        assert!(v.norm() < 1e-15);

        // Exact rational evaluation of the three-term sum: 1 − 2/3 + 1/6 = 1/2.
        let v =
            hyp2f1_terminating(2, 2, HalfInteger::halves(-3), Complex64::new(0.25, 0.0)).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);

        // 2F1(−3,−2;−5/2;1/3) = 17/45 by exact rationals.
        let v = hyp2f1_terminating(
            3,
            2,
            HalfInteger::halves(-5),
            Complex64::new(1.0 / 3.0, 0.0),
        )
        .unwrap();
        assert!((v.re - 17.0 / 45.0).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn terminating_pole_is_reported() {
        // c = −1 is hit at n = 1 before the k = l = 3 series terminates.
        let err = hyp2f1_terminating(
            3,
            3,
            HalfInteger::from_integer(-1),
            Complex64::new(0.2, 0.0),
        );
        assert!(matches!(err, Err(Error::Pole(_))));
        // c = −3 is never reached when min(k,l) = 2.
        assert!(hyp2f1_terminating(
            2,
            4,
            HalfInteger::from_integer(-3),
            Complex64::new(0.2, 0.0)
        )
        .is_ok());
    }

    #[test]
    fn real_examples() {
        assert_eq!(hyp2f1_real(0.3, -1.7, 2.5, 0.0).unwrap(), 1.0);
        let v = hyp2f1_real(0.5, 3.0, 3.0, -1.0).unwrap();
        assert!(rel(v, 2f64.powf(-0.5)) < 1e-12);
        let v = hyp2f1_real(1.0, 1.0, 2.0, -0.5).unwrap();
        assert!(rel(v, -(1.5f64).ln() / -0.5) < 1e-12);
        assert!((v - 0.8109302162).abs() < 1e-10);
    }

    #[test]
    fn real_errors() {
        assert!(matches!(
            hyp2f1_real(1.0, 1.0, -2.0, 0.3),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            hyp2f1_real(1.0, 1.0, 0.0, 0.3),
            Err(Error::Pole(_))
        ));
        assert!(matches!(
            hyp2f1_real(1.0, 1.0, 2.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            hyp2f1_real(1.0, 1.0, 2.0, f64::NAN),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn real_against_mpmath_reference() {
        // mpmath.hyp2f1(0.5, -0.5, 1.5, -0.9)
        let v = hyp2f1_real(0.5, -0.5, 1.5, -0.9).unwrap();
        assert!(rel(v, 1.134_355_091_143_255_8) < 1e-13);
    }

    #[test]
    fn pfaff_agrees_with_direct_series_on_grid() {
        let params = [-0.5, 0.5, 1.0, 1.5];
        let xs = [-0.9, -0.75, -0.5, -0.25, -0.1, -1e-3];
        for &a in &params {
            for &b in &params {
                for &c in &params {
                    for &x in &xs {
                        let pfaff = hyp2f1_real(a, b, c, x).unwrap();
                        let direct = hyp2f1_series(a, b, c, x).unwrap();
                        // Some grid points are exact zeros, e.g. 2F1(3/2,3/2;1/2;−1/2).
                        let err = (pfaff - direct).abs() / direct.abs().max(1e-6);
                        assert!(err < 1e-10, "a={a} b={b} c={c} x={x}: {pfaff} vs {direct}");
                    }
                }
            }
        }
    }

    #[test]
    fn terminating_symmetry_in_k_and_l() {
        for k in 0..8 {
            for l in 0..8 {
                for twice_c in [-15, -9, -3, 1, 3, 7] {
                    let c = HalfInteger::from_twice(twice_c);
                    let x = Complex64::new(0.37, -0.21);
                    assert_eq!(
                        hyp2f1_terminating(k, l, c, x).unwrap(),
                        hyp2f1_terminating(l, k, c, x).unwrap()
                    );
                }
            }
        }
    }
}
