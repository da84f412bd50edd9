//! Sequence distances over wake strings.
//!
//! All functions accept anything byte-like (`&str`, `String`, `&[u8]`), so
//! the training loop can score raw wake bytes without building strings.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sequences do not contain the same symbols with the same multiplicities")]
    MultisetMismatch,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricKind {
    Levenshtein,
    Hamming,
    Position,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Levenshtein, MetricKind::Hamming, MetricKind::Position];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Levenshtein => "levenshtein",
            MetricKind::Hamming => "hamming",
            MetricKind::Position => "position",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "levenshtein" | "lev" => Ok(MetricKind::Levenshtein),
            "hamming" | "ham" => Ok(MetricKind::Hamming),
            "position" | "pos" => Ok(MetricKind::Position),
            _ => Err(MetricError::UnknownMetric(s.to_string())),
        }
    }
}

/// Unit-cost edit distance (insertions, deletions, substitutions).
pub fn levenshtein(a: impl AsRef<[u8]>, b: impl AsRef<[u8]>) -> usize {
    let (a, b) = (a.as_ref(), b.as_ref());
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    // single row over the shorter string
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = diag + usize::from(ca != cb);
            diag = row[j + 1];
            row[j + 1] = sub.min(diag + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// Number of mismatched positions between equal-length strings.
pub fn hamming(a: impl AsRef<[u8]>, b: impl AsRef<[u8]>) -> Result<usize, MetricError> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Sum of absolute position displacements, matching the k-th occurrence of
/// each symbol in `a` with the k-th occurrence of the same symbol in `b`.
///
/// Occurrence-order matching is the minimum-cost assignment within each
/// symbol class, so every aircraft is paired with its closest counterpart
/// consistently across the whole string.
pub fn position_distance(a: impl AsRef<[u8]>, b: impl AsRef<[u8]>) -> Result<usize, MetricError> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    let mut counts = [0i64; 256];
    for (&x, &y) in a.iter().zip(b) {
        counts[x as usize] += 1;
        counts[y as usize] -= 1;
    }
    if counts.iter().any(|&c| c != 0) {
        return Err(MetricError::MultisetMismatch);
    }
    let mut cursor = [0usize; 256];
    let mut total = 0;
    for (i, &c) in a.iter().enumerate() {
        let k = &mut cursor[c as usize];
        while b[*k] != c {
            *k += 1;
        }
        total += i.abs_diff(*k);
        *k += 1;
    }
    Ok(total)
}

pub fn distance(kind: MetricKind, a: impl AsRef<[u8]>, b: impl AsRef<[u8]>) -> Result<usize, MetricError> {
    match kind {
        MetricKind::Levenshtein => Ok(levenshtein(a, b)),
        MetricKind::Hamming => hamming(a, b),
        MetricKind::Position => position_distance(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LONG_A: &str = "HHLSLLLSHHSLLSSSLHHL";
    const LONG_B: &str = "HHSLLLLSSHHSLLSSLHHL";

    #[test]
    fn worked_examples() {
        assert_eq!(levenshtein("SLLHLH", "LLHLHS"), 2);
        assert_eq!(hamming("SLLHLH", "LLHLHS"), Ok(5));
        assert_eq!(position_distance("SLLHLH", "LLHLHS"), Ok(10));
        assert_eq!(levenshtein(LONG_A, LONG_B), 4);
        assert_eq!(hamming(LONG_A, LONG_B), Ok(6));
        assert_eq!(position_distance(LONG_A, LONG_B), Ok(10));
    }

    #[test]
    fn identity_is_zero() {
        for x in ["", "H", "SLLHLH", LONG_A] {
            assert_eq!(levenshtein(x, x), 0);
            assert_eq!(hamming(x, x), Ok(0));
            assert_eq!(position_distance(x, x), Ok(0));
        }
    }

    #[test]
    fn levenshtein_edge_cases() {
        assert_eq!(levenshtein("", "HLS"), 3);
        assert_eq!(levenshtein("HLS", ""), 3);
        assert_eq!(levenshtein("H", "L"), 1);
        assert_eq!(levenshtein("HLSHLS", "LS"), 4);
    }

    #[test]
    fn precondition_errors() {
        assert_eq!(hamming("HL", "H"), Err(MetricError::LengthMismatch(2, 1)));
        assert_eq!(position_distance("HL", "H"), Err(MetricError::LengthMismatch(2, 1)));
        assert_eq!(position_distance("HL", "HH"), Err(MetricError::MultisetMismatch));
        assert!(distance(MetricKind::Hamming, "AB", "ABC").is_err());
    }

    #[test]
    fn dispatch() {
        assert_eq!(distance(MetricKind::Levenshtein, "SLLHLH", "LLHLHS"), Ok(2));
        assert_eq!(distance(MetricKind::Position, "SLLHLH", "LLHLHS"), Ok(10));
        assert_eq!(distance(MetricKind::Hamming, b"SLLHLH", b"LLHLHS"), Ok(5));
    }

    #[test]
    fn metric_names_round_trip() {
        for kind in MetricKind::ALL {
            assert_eq!(kind.name().parse::<MetricKind>(), Ok(kind));
        }
        assert!("manhattan".parse::<MetricKind>().is_err());
    }
}
