//! Reference matrices over the ten-mode ordering
//! 00, 01, 10, 02, 11, 20, 03, 12, 21, 30 (rows: signal, columns: idler).

/// Vacuum, five decimals.
pub const VACUUM: [[f64; 10]; 10] = [
    [0.31307, 0.0, 0.0, 0.03986, 0.0, 0.03986, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.07697, 0.0, 0.0, 0.0, 0.0, 0.02940, 0.0, 0.00980, 0.0],
    [0.0, 0.0, 0.07697, 0.0, 0.0, 0.0, 0.0, 0.00980, 0.0, 0.02940],
    [0.03986, 0.0, 0.0, 0.04345, 0.0, 0.00508, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.01892, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03986, 0.0, 0.0, 0.00508, 0.0, 0.04345, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.02940, 0.0, 0.0, 0.0, 0.0, 0.03023, 0.0, 0.00374, 0.0],
    [0.0, 0.0, 0.00980, 0.0, 0.0, 0.0, 0.0, 0.01068, 0.0, 0.00374],
    [0.0, 0.00980, 0.0, 0.0, 0.0, 0.0, 0.00374, 0.0, 0.01068, 0.0],
    [0.0, 0.0, 0.02940, 0.0, 0.0, 0.0, 0.0, 0.00374, 0.0, 0.03023],
];

/// σ_R² = 0.02, four decimals except the two 3×10⁻⁶ entries.
pub const TURBULENT_RYTOV_0_02: [[f64; 10]; 10] = [
    [
        0.2262, 0.0157, 0.0157, 0.0379, 0.0011, 0.0379, 0.0077, 0.0026, 0.0026, 0.0077,
    ],
    [
        0.0157, 0.0439, 0.0011, 0.0009, 0.0030, 0.0026, 0.0204, 0.0001, 0.0073, 0.0005,
    ],
    [
        0.0157, 0.0011, 0.0439, 0.0026, 0.0030, 0.0009, 0.0005, 0.0073, 0.0001, 0.0204,
    ],
    [
        0.0379, 0.0009, 0.0026, 0.0275, 0.0001, 0.0063, 0.0005, 0.0019, 0.0001, 0.0013,
    ],
    [
        0.0011, 0.0030, 0.0030, 0.0001, 0.0085, 0.0001, 0.0014, 0.0002, 0.0002, 0.0014,
    ],
    [
        0.0379, 0.0026, 0.0009, 0.0063, 0.0001, 0.0275, 0.0013, 0.0001, 0.0019, 0.0005,
    ],
    [
        0.0077, 0.0204, 0.0005, 0.0005, 0.0014, 0.0013, 0.0191, 0.0001, 0.0034, 0.0003,
    ],
    [
        0.0026, 0.0001, 0.0073, 0.0019, 0.0002, 0.0001, 0.0001, 0.0053, 3e-6, 0.0034,
    ],
    [
        0.0026, 0.0073, 0.0001, 0.0001, 0.0002, 0.0019, 0.0034, 3e-6, 0.0053, 0.0001,
    ],
    [
        0.0077, 0.0005, 0.0204, 0.0013, 0.0014, 0.0005, 0.0003, 0.0034, 0.0001, 0.0191,
    ],
];

/// Rytov variance of [`TURBULENT_RYTOV_0_02`].
pub const TURBULENT_RYTOV: f64 = 0.02;

/// Entries printed as 3×10⁻⁶, which carry a tighter tolerance.
pub fn is_small_entry(i: usize, j: usize) -> bool {
    matches!((i, j), (7, 8) | (8, 7))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_symmetric() {
        for t in [&VACUUM, &TURBULENT_RYTOV_0_02] {
            for i in 0..10 {
                for j in 0..10 {
                    assert_eq!(t[i][j], t[j][i]);
                }
            }
        }
    }
}
