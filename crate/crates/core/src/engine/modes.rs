use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on a single transverse order.
pub const DEFAULT_MAX_ORDER: u32 = 10;

/// Transverse Hermite-Gaussian orders (m along x, n along y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    pub const GAUSSIAN: ModeIndex = ModeIndex { m: 0, n: 0 };

    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub fn total_order(&self) -> u32 {
        self.m + self.n
    }

    /// The mode with its two axes exchanged.
    pub fn transposed(&self) -> Self {
        Self::new(self.n, self.m)
    }

    /// `"mn"` when both orders are single digits, `"m_n"` otherwise.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m < 10 && self.n < 10 {
            write!(f, "{}{}", self.m, self.n)
        } else {
            write!(f, "{}_{}", self.m, self.n)
        }
    }
}

impl FromStr for ModeIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::InvalidParameter(format!("invalid mode label '{s}' (expected 'mn' or 'm_n')"))
        };
        if let Some((m, n)) = s.split_once('_') {
            let m = m.parse().map_err(|_| bad())?;
            let n = n.parse().map_err(|_| bad())?;
            return Ok(Self::new(m, n));
        }
        let digits: Vec<u32> = s
            .chars()
            .map(|c| c.to_digit(10))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        match digits.as_slice() {
            [m, n] => Ok(Self::new(*m, *n)),
            _ => Err(bad()),
        }
    }
}

/// A signal/idler mode assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModePair {
    pub signal: ModeIndex,
    pub idler: ModeIndex,
}

impl ModePair {
    pub const fn new(signal: ModeIndex, idler: ModeIndex) -> Self {
        Self { signal, idler }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.idler, self.signal)
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.signal, self.idler)
    }
}

impl FromStr for ModePair {
    type Err = Error;

    /// Accepts `"00,02"` or `"00:02"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once([',', ':']).ok_or_else(|| {
            Error::InvalidParameter(format!("invalid mode pair '{s}' (expected 'ss,ii')"))
        })?;
        Ok(Self::new(a.parse()?, b.parse()?))
    }
}

/// All modes with m + n ≤ `max_sum`: ascending total order, then ascending m.
///
/// For `max_sum = 3` this is 00, 01, 10, 02, 11, 20, 03, 12, 21, 30.
pub fn modes_up_to_total_order(max_sum: u32) -> Vec<ModeIndex> {
    (0..=max_sum)
        .flat_map(|t| (0..=t).map(move |m| ModeIndex::new(m, t - m)))
        .collect()
}

/// The ten-mode ordering used by the reference tables.
pub fn reference_ordering() -> Vec<ModeIndex> {
    modes_up_to_total_order(3)
}

/// Parses a comma or whitespace separated list of mode labels.
pub fn parse_mode_list(s: &str) -> Result<Vec<ModeIndex>> {
    let modes = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<ModeIndex>>>()?;
    if modes.is_empty() {
        return Err(Error::InvalidParameter("mode list is empty".into()));
    }
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_ordering_labels() {
        let labels: Vec<String> = reference_ordering().iter().map(ModeIndex::label).collect();
        assert_eq!(
            labels,
            ["00", "01", "10", "02", "11", "20", "03", "12", "21", "30"]
        );
    }

    #[test]
    fn labels_round_trip() {
        for m in 0..13 {
            for n in 0..13 {
                let mode = ModeIndex::new(m, n);
                assert_eq!(mode.label().parse::<ModeIndex>().unwrap(), mode);
            }
        }
        assert!("0".parse::<ModeIndex>().is_err());
        assert!("123".parse::<ModeIndex>().is_err());
        assert!("a1".parse::<ModeIndex>().is_err());
        assert!("1_".parse::<ModeIndex>().is_err());
    }

    #[test]
    fn pair_and_list_parsing() {
        let p: ModePair = "00,21".parse().unwrap();
        assert_eq!(p, ModePair::new(ModeIndex::new(0, 0), ModeIndex::new(2, 1)));
        assert_eq!("00:21".parse::<ModePair>().unwrap(), p);
        assert!("0021".parse::<ModePair>().is_err());
        assert_eq!(parse_mode_list("00, 11 20").unwrap().len(), 3);
        assert!(parse_mode_list(" , ").is_err());
    }

    #[test]
    fn total_order_expansion_counts() {
        for s in 0..8 {
            assert_eq!(
                modes_up_to_total_order(s).len() as u32,
                (s + 1) * (s + 2) / 2
            );
        }
    }
}
