//! Compensated (Kahan–Babuška–Neumaier) accumulation.

use num_complex::Complex64;

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Complex accumulator: independent compensated sums for both parts.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        iter.into_iter().for_each(|v| self.add(v));
    }
}

impl Extend<Complex64> for ComplexSum {
    fn extend<I: IntoIterator<Item = Complex64>>(&mut self, iter: I) {
        iter.into_iter().for_each(|v| self.add(v));
    }
}

/// Sums `terms` in descending order of magnitude with compensated addition.
///
/// The ordering is a total order (magnitude, then real, then imaginary part) so
/// the result does not depend on the order in which the terms were produced.
pub fn sum_descending(terms: &mut [Complex64]) -> Complex64 {
    terms.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let mut acc = ComplexSum::new();
    acc.extend(terms.iter().copied());
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_addends_lost_by_naive_summation() {
        let values = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = values.iter().sum();
        let mut acc = NeumaierSum::new();
        acc.extend(values);
        assert_eq!(naive, 0.0);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn descending_sum_is_order_independent() {
        let mut a = vec![
            Complex64::new(1e16, -3.0),
            Complex64::new(1.0, 1e-8),
            Complex64::new(-1e16, 3.0),
            Complex64::new(0.5, 0.0),
        ];
        let mut b = a.clone();
        b.reverse();
        let sa = sum_descending(&mut a);
        let sb = sum_descending(&mut b);
        assert_eq!(sa, sb);
        assert_eq!(sa, Complex64::new(1.5, 1e-8));
    }
}
