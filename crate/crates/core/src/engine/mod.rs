//! Joint detection probabilities P = Π(m_s, m_i) Π(n_s, n_i) and the
//! matrices built from them.

mod kernels;
mod matrix;
mod modes;

pub use kernels::{
    f_kernel, k_kernel, pi_factor, pi_factor_detailed, sigma, PiEvaluation, CANCELLATION_FLOOR,
    REALNESS_TOLERANCE, SMALL_C3_THRESHOLD,
};
pub use matrix::{
    joint_probability, probability_matrix, AppliedNormalization, Engine, Normalization,
    ProbabilityMatrix, REFERENCE_VACUUM_P00,
};
pub use modes::{
    modes_up_to_total_order, parse_mode_list, reference_ordering, ModeIndex, ModePair,
    DEFAULT_MAX_ORDER,
};

/// Parity and order selection rules for a pump in mode `pump`.
pub fn selection_rule_allowed(pair: ModePair, pump: ModeIndex) -> bool {
    let axis = |s: u32, i: u32, p: u32| (s + i) % 2 == p % 2 && s + i >= p;
    axis(pair.signal.m, pair.idler.m, pump.m) && axis(pair.signal.n, pair.idler.n, pump.n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_rule_examples() {
        let pump = ModeIndex::GAUSSIAN;
        assert!(!selection_rule_allowed("00,01".parse().unwrap(), pump));
        assert!(selection_rule_allowed("00,20".parse().unwrap(), pump));
        assert!(selection_rule_allowed("11,11".parse().unwrap(), pump));
        // Order constraint bites for a non-Gaussian pump.
        assert!(!selection_rule_allowed(
            "00,00".parse().unwrap(),
            ModeIndex::new(2, 0)
        ));
        assert!(selection_rule_allowed(
            "10,10".parse().unwrap(),
            ModeIndex::new(2, 0)
        ));
    }
}
