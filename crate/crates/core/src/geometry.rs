//! The ambient space `X0 = R^n` together with two coordinate subspaces `X1`, `X2`.
//!
//! Axes are numbered from 1. A coordinate subspace is described by the set of
//! axes it spans; `X1 ∩ X2` is spanned by the common axes. All codimension
//! arithmetic lives here so the rest of the crate never recomputes it.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};

/// Axis index, 1-based.
pub type Axis = usize;

/// One of the three manifolds a morphism can act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Manifold {
    X0,
    X1,
    X2,
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::X0, Manifold::X1, Manifold::X2];

    pub fn index(self) -> usize {
        match self {
            Manifold::X0 => 0,
            Manifold::X1 => 1,
            Manifold::X2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn stratum(self) -> StratumId {
        match self {
            Manifold::X0 => StratumId::X0,
            Manifold::X1 => StratumId::X1,
            Manifold::X2 => StratumId::X2,
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.stratum().fmt(f)
    }
}

/// A stratum of the stratified space `X1 ∪ X2 ⊂ X0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StratumId {
    X0,
    X1,
    X2,
    /// `X1 ∩ X2`.
    X12,
}

impl StratumId {
    pub const ALL: [StratumId; 4] = [StratumId::X0, StratumId::X1, StratumId::X2, StratumId::X12];

    /// Intersection of the two submanifolds.
    pub fn meet(self, other: StratumId) -> StratumId {
        use StratumId::*;
        match (self, other) {
            (a, b) if a == b => a,
            (X0, b) => b,
            (a, X0) => a,
            _ => X12,
        }
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(self, other: StratumId) -> bool {
        self.meet(other) == self
    }

    /// The manifolds among `X0, X1, X2` that contain this stratum, in index order.
    pub fn containing_manifolds(self) -> Vec<Manifold> {
        Manifold::ALL
            .into_iter()
            .filter(|m| self.is_subset_of(m.stratum()))
            .collect()
    }

    pub fn as_manifold(self) -> Option<Manifold> {
        match self {
            StratumId::X0 => Some(Manifold::X0),
            StratumId::X1 => Some(Manifold::X1),
            StratumId::X2 => Some(Manifold::X2),
            StratumId::X12 => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StratumId::X0 => "X0",
            StratumId::X1 => "X1",
            StratumId::X2 => "X2",
            StratumId::X12 => "X12",
        }
    }
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StratumId {
    type Err = MorError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X0" => Ok(StratumId::X0),
            "X1" => Ok(StratumId::X1),
            "X2" => Ok(StratumId::X2),
            "X12" => Ok(StratumId::X12),
            other => Err(MorError::Usage(format!("unknown stratum `{other}`"))),
        }
    }
}

/// The `(x, y)` split of the conormal axes of `X1 ∩ X2` relative to `X_k`:
/// `x` spans `X_k` inside the conormal space, `y` is normal to `X_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XySplit {
    pub x: Vec<Axis>,
    pub y: Vec<Axis>,
}

/// Tangential (`z`) and conormal axes of a stratum inside `X0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSplit {
    pub tangential: Vec<Axis>,
    pub conormal: Vec<Axis>,
    /// Present only for `X12`: the splits with respect to `X1` and `X2`.
    pub intersection: Option<[XySplit; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
struct ConfigRepr {
    n: usize,
    #[serde(rename = "S1")]
    s1: Vec<Axis>,
    #[serde(rename = "S2")]
    s2: Vec<Axis>,
    #[serde(default = "default_transversal")]
    transversal: bool,
}

fn default_transversal() -> bool {
    true
}

/// The geometry `(X0, X1, X2)` with its derived codimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr")]
pub struct ConfigTriple {
    n: usize,
    #[serde(rename = "S1")]
    s1: BTreeSet<Axis>,
    #[serde(rename = "S2")]
    s2: BTreeSet<Axis>,
    transversal: bool,
    #[serde(skip)]
    nu: [usize; 3],
    #[serde(skip)]
    n_k: [usize; 2],
}

impl TryFrom<ConfigRepr> for ConfigTriple {
    type Error = MorError;

    fn try_from(r: ConfigRepr) -> Result<Self> {
        ConfigTriple::new(r.n, r.s1, r.s2, r.transversal)
    }
}

impl ConfigTriple {
    /// Validates the axis sets and derives `ν1, ν2, ν3, n1, n2`.
    pub fn new(
        n: usize,
        s1: impl IntoIterator<Item = Axis>,
        s2: impl IntoIterator<Item = Axis>,
        transversal: bool,
    ) -> Result<Self> {
        let s1: BTreeSet<Axis> = s1.into_iter().collect();
        let s2: BTreeSet<Axis> = s2.into_iter().collect();
        if n == 0 {
            return Err(MorError::InvalidConfig("ambient dimension must be positive".into()));
        }
        for (name, s) in [("S1", &s1), ("S2", &s2)] {
            if let Some(a) = s.iter().find(|&&a| a == 0 || a > n) {
                return Err(MorError::InvalidConfig(format!("{name} contains axis {a} outside 1..={n}")));
            }
            if s.len() >= n {
                return Err(MorError::InvalidConfig(format!(
                    "{name} spans all {n} axes; the submanifold must have positive codimension"
                )));
            }
        }
        let common = s1.intersection(&s2).count();
        if common == 0 {
            return Err(MorError::InvalidConfig("X1 ∩ X2 must have positive dimension".into()));
        }
        if transversal && s1.union(&s2).count() != n {
            return Err(MorError::InvalidConfig(
                "transversal intersection requires S1 ∪ S2 to cover every axis".into(),
            ));
        }
        let nu = [n - s1.len(), n - s2.len(), n - common];
        let n_k = [s1.len() - common, s2.len() - common];
        Ok(Self { n, s1, s2, transversal, nu, n_k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s1(&self) -> &BTreeSet<Axis> {
        &self.s1
    }

    pub fn s2(&self) -> &BTreeSet<Axis> {
        &self.s2
    }

    pub fn transversal(&self) -> bool {
        self.transversal
    }

    /// `ν_k = codim_{X0} X_k` for `k = 1, 2`, and `ν_3 = codim_{X0}(X1 ∩ X2)` for `k = 3`.
    pub fn nu(&self, k: usize) -> usize {
        assert!((1..=3).contains(&k), "ν index must be 1, 2 or 3");
        self.nu[k - 1]
    }

    /// `n_k = codim_{X_k}(X1 ∩ X2)`.
    pub fn n_k(&self, k: usize) -> usize {
        assert!((1..=2).contains(&k), "n_k index must be 1 or 2");
        self.n_k[k - 1]
    }

    /// Numerical layers only support the transversal geometry.
    pub fn require_transversal(&self) -> Result<()> {
        if self.transversal {
            Ok(())
        } else {
            Err(MorError::InvalidConfig(
                "numerical strata grids need a transversal configuration".into(),
            ))
        }
    }

    /// Axes spanned by a stratum, ascending.
    pub fn axes(&self, z: StratumId) -> Vec<Axis> {
        match z {
            StratumId::X0 => (1..=self.n).collect(),
            StratumId::X1 => self.s1.iter().copied().collect(),
            StratumId::X2 => self.s2.iter().copied().collect(),
            StratumId::X12 => self.s1.intersection(&self.s2).copied().collect(),
        }
    }

    /// Axes of `home` that are normal to `z` (empty when `z = home`).
    pub fn conormal_axes(&self, home: StratumId, z: StratumId) -> Vec<Axis> {
        let inner: BTreeSet<Axis> = self.axes(z).into_iter().collect();
        self.axes(home).into_iter().filter(|a| !inner.contains(a)).collect()
    }

    pub fn axis_split(&self, z: StratumId) -> AxisSplit {
        let tangential = self.axes(z);
        let conormal = self.conormal_axes(StratumId::X0, z);
        let intersection = (z == StratumId::X12).then(|| {
            [StratumId::X1, StratumId::X2].map(|xk| XySplit {
                x: self.conormal_axes(xk, StratumId::X12),
                y: self.conormal_axes(StratumId::X0, xk),
            })
        });
        AxisSplit { tangential, conormal, intersection }
    }
}
