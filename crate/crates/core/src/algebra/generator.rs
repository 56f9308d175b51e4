//! The 18 additive generator types and the matrix cells they occupy.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{MorError, Result};
use crate::geometry::{Manifold, StratumId};

use super::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorType {
    D0,
    D1,
    D2,
    B1,
    B2,
    C1,
    C2,
    G1,
    G2,
    M0,
    M1,
    M2,
    T12,
    T21,
    B1p,
    B2p,
    C1p,
    C2p,
}

impl GeneratorType {
    pub const ALL: [GeneratorType; 18] = [
        GeneratorType::D0,
        GeneratorType::D1,
        GeneratorType::D2,
        GeneratorType::B1,
        GeneratorType::B2,
        GeneratorType::C1,
        GeneratorType::C2,
        GeneratorType::G1,
        GeneratorType::G2,
        GeneratorType::M0,
        GeneratorType::M1,
        GeneratorType::M2,
        GeneratorType::T12,
        GeneratorType::T21,
        GeneratorType::B1p,
        GeneratorType::B2p,
        GeneratorType::C1p,
        GeneratorType::C2p,
    ];

    /// Type of a word mapping `X_l → X_k` localized at `z`, if the triple is realizable.
    pub fn classify(codomain: Manifold, domain: Manifold, z: StratumId) -> Option<Self> {
        use GeneratorType::*;
        use StratumId as S;
        Some(match (codomain.index(), domain.index(), z) {
            (0, 0, S::X0) => D0,
            (0, 0, S::X1) => G1,
            (0, 0, S::X2) => G2,
            (0, 0, S::X12) => M0,
            (1, 0, S::X1) => B1,
            (2, 0, S::X2) => B2,
            (1, 0, S::X12) => B1p,
            (2, 0, S::X12) => B2p,
            (0, 1, S::X1) => C1,
            (0, 2, S::X2) => C2,
            (0, 1, S::X12) => C1p,
            (0, 2, S::X12) => C2p,
            (1, 1, S::X1) => D1,
            (2, 2, S::X2) => D2,
            (1, 1, S::X12) => M1,
            (2, 2, S::X12) => M2,
            (1, 2, S::X12) => T12,
            (2, 1, S::X12) => T21,
            _ => return None,
        })
    }

    pub fn of_word(w: &Word) -> Result<Self> {
        Self::classify(w.codomain(), w.domain(), w.localization()).ok_or_else(|| {
            MorError::StratumMismatch(format!(
                "no generator type maps {} to {} localized at {}",
                w.domain(),
                w.codomain(),
                w.localization()
            ))
        })
    }

    /// `(codomain index, domain index, localization)`.
    pub fn triple(self) -> (usize, usize, StratumId) {
        use GeneratorType::*;
        use StratumId as S;
        match self {
            D0 => (0, 0, S::X0),
            G1 => (0, 0, S::X1),
            G2 => (0, 0, S::X2),
            M0 => (0, 0, S::X12),
            B1 => (1, 0, S::X1),
            B2 => (2, 0, S::X2),
            B1p => (1, 0, S::X12),
            B2p => (2, 0, S::X12),
            C1 => (0, 1, S::X1),
            C2 => (0, 2, S::X2),
            C1p => (0, 1, S::X12),
            C2p => (0, 2, S::X12),
            D1 => (1, 1, S::X1),
            D2 => (2, 2, S::X2),
            M1 => (1, 1, S::X12),
            M2 => (2, 2, S::X12),
            T12 => (1, 2, S::X12),
            T21 => (2, 1, S::X12),
        }
    }

    pub fn cell(self) -> (usize, usize) {
        let (k, l, _) = self.triple();
        (k, l)
    }

    pub fn localization(self) -> StratumId {
        self.triple().2
    }

    pub fn label(self) -> &'static str {
        use GeneratorType::*;
        match self {
            D0 => "D0",
            D1 => "D1",
            D2 => "D2",
            B1 => "B1",
            B2 => "B2",
            C1 => "C1",
            C2 => "C2",
            G1 => "G1",
            G2 => "G2",
            M0 => "M0",
            M1 => "M1",
            M2 => "M2",
            T12 => "T12",
            T21 => "T21",
            B1p => "B1'",
            B2p => "B2'",
            C1p => "C1'",
            C2p => "C2'",
        }
    }

    /// Types allowed in cell `(k, l)` of the normal form.
    pub fn allowed_in(k: usize, l: usize) -> Vec<Self> {
        Self::ALL.into_iter().filter(|t| t.cell() == (k, l)).collect()
    }
}

impl fmt::Display for GeneratorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GeneratorType {
    type Err = MorError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| MorError::Usage(format!("unknown generator type `{s}`")))
    }
}

impl Serialize for GeneratorType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn table_is_a_bijection() {
        let mut seen = BTreeSet::new();
        for k in Manifold::ALL {
            for l in Manifold::ALL {
                for z in StratumId::ALL {
                    if let Some(t) = GeneratorType::classify(k, l, z) {
                        assert_eq!(t.triple(), (k.index(), l.index(), z));
                        assert!(seen.insert(t));
                    }
                }
            }
        }
        assert_eq!(seen.len(), 18);
    }

    #[test]
    fn cell_contents() {
        use GeneratorType::*;
        assert_eq!(GeneratorType::allowed_in(0, 0), vec![D0, G1, G2, M0]);
        assert_eq!(GeneratorType::allowed_in(1, 0), vec![B1, B1p]);
        assert_eq!(GeneratorType::allowed_in(0, 2), vec![C2, C2p]);
        assert_eq!(GeneratorType::allowed_in(1, 1), vec![D1, M1]);
        assert_eq!(GeneratorType::allowed_in(1, 2), vec![T12]);
        assert_eq!(GeneratorType::allowed_in(2, 1), vec![T21]);
        for t in GeneratorType::ALL {
            assert_eq!(t.label().parse::<GeneratorType>().unwrap(), t);
        }
    }
}
