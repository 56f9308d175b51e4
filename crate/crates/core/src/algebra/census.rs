//! Enumeration of generator words and canonical representatives.
//!
//! A word is a chain of elementary (co)boundary factors with an optional ψDO
//! in each gap and at both ends. Since `cob_k` is the only atom accepting
//! input from `X_k` and `bd_1`, `bd_2` are the only ones leaving `X0`, a
//! factor skeleton is fixed by the manifold it starts on and the index of
//! each boundary.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::expr::SymbolExpr;
use crate::geometry::{ConfigTriple, Manifold};
use crate::Order;

use super::generator::GeneratorType;
use super::word::{half_nu, Atom, Word};

/// All factor skeletons with at most `max_factors` factors, as atom lists
/// (leftmost applied last).
pub fn skeletons(max_factors: usize) -> Vec<Vec<Atom>> {
    fn grow(at: Manifold, acc: &mut Vec<Atom>, left: usize, out: &mut Vec<Vec<Atom>>) {
        // `acc` is stored in application order
        out.push(acc.iter().rev().cloned().collect());
        if left == 0 {
            return;
        }
        let next: Vec<(Atom, Manifold)> = match at {
            Manifold::X0 => vec![(Atom::Boundary(1), Manifold::X1), (Atom::Boundary(2), Manifold::X2)],
            Manifold::X1 => vec![(Atom::Coboundary(1), Manifold::X0)],
            Manifold::X2 => vec![(Atom::Coboundary(2), Manifold::X0)],
        };
        for (a, m) in next {
            acc.push(a);
            grow(m, acc, left - 1, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    for start in Manifold::ALL {
        grow(start, &mut Vec::new(), max_factors, &mut out);
    }
    // the empty skeleton appears once per start manifold; callers pick the
    // manifold for it through `empty_home`
    out
}

/// Manifolds between the factors: entry 0 is the domain, the last entry the codomain.
fn slot_manifolds(factors: &[Atom], empty_home: Manifold) -> Vec<Manifold> {
    if factors.is_empty() {
        return vec![empty_home];
    }
    let mut v = vec![factors.last().expect("nonempty").domain()];
    v.extend(factors.iter().rev().map(|a| a.codomain()));
    v
}

/// Inserts `Op[home]{(1+|ξ|²)^{m/2}, m}` into every slot with `Some(m)`
/// (slot 0 is the rightmost) and infers an admissible input order.
pub fn skeleton_word(
    factors: &[Atom],
    empty_home: Manifold,
    slots: &[Option<Order>],
    cfg: &ConfigTriple,
) -> Result<Word> {
    let homes = slot_manifolds(factors, empty_home);
    assert_eq!(homes.len(), slots.len(), "one ψDO slot per gap and end");
    let mut applied = Vec::new();
    let mut fs = factors.iter().rev();
    for (i, (home, slot)) in homes.iter().zip(slots).enumerate() {
        if let Some(m) = slot {
            applied.push(Atom::PsiDO(SymbolExpr::bracket(*home, *m, cfg)));
        }
        if i + 1 < homes.len() {
            applied.push(fs.next().expect("factor per gap").clone());
        }
    }
    applied.reverse();
    Word::infer(applied, cfg)
}

/// Orders tried in each slot of the census.
pub fn census_slot_options() -> [Option<Order>; 3] {
    [None, Some(Order::from(-3)), Some(Order::from(3))]
}

/// Outcome of an exhaustive enumeration.
#[derive(Debug, Clone, Default)]
pub struct Census {
    /// Valid words found.
    pub valid: usize,
    /// Candidates rejected by the Sobolev preconditions.
    pub rejected: usize,
    /// For each type, the `(codomain, domain)` cells its words landed in.
    pub cells: BTreeMap<GeneratorType, BTreeSet<(usize, usize)>>,
    /// Words whose endpoints and stratum fit no type.
    pub unclassified: usize,
}

impl Census {
    fn record(&mut self, w: &Word) {
        match GeneratorType::of_word(w) {
            Ok(t) => {
                self.cells.entry(t).or_default().insert((w.codomain().index(), w.domain().index()));
            }
            Err(_) => self.unclassified += 1,
        }
        self.valid += 1;
    }
}

fn for_each_slot_choice(len: usize, f: &mut impl FnMut(&[Option<Order>])) {
    let opts = census_slot_options();
    let mut idx = vec![0usize; len];
    loop {
        let choice: Vec<Option<Order>> = idx.iter().map(|&i| opts[i]).collect();
        f(&choice);
        let mut p = 0;
        loop {
            if p == len {
                return;
            }
            idx[p] += 1;
            if idx[p] < opts.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Every skeleton with at most `max_factors` factors and every ψDO choice
/// per slot. When `max_atoms` is set, words with more atoms are skipped.
pub fn census(cfg: &ConfigTriple, max_factors: usize, max_atoms: Option<usize>) -> Census {
    let mut c = Census::default();
    let mut seen_empty = false;
    for sk in skeletons(max_factors) {
        let homes: Vec<Manifold> = if sk.is_empty() {
            if seen_empty {
                continue;
            }
            seen_empty = true;
            Manifold::ALL.to_vec()
        } else {
            vec![Manifold::X0]
        };
        for home in homes {
            for_each_slot_choice(sk.len() + 1, &mut |slots| {
                let n_atoms = sk.len() + slots.iter().filter(|s| s.is_some()).count();
                if n_atoms == 0 || max_atoms.is_some_and(|m| n_atoms > m) {
                    return;
                }
                match skeleton_word(&sk, home, slots, cfg) {
                    Ok(w) => c.record(&w),
                    Err(_) => c.rejected += 1,
                }
            });
        }
    }
    c
}

/// Factor skeleton of the representative word of each type.
pub fn representative_skeleton(t: GeneratorType) -> (Vec<Atom>, Manifold) {
    use Atom::{Boundary as Bd, Coboundary as Cob};
    use GeneratorType::*;
    let v = match t {
        D0 => return (vec![], Manifold::X0),
        D1 => return (vec![], Manifold::X1),
        D2 => return (vec![], Manifold::X2),
        B1 => vec![Bd(1)],
        B2 => vec![Bd(2)],
        C1 => vec![Cob(1)],
        C2 => vec![Cob(2)],
        G1 => vec![Cob(1), Bd(1)],
        G2 => vec![Cob(2), Bd(2)],
        T12 => vec![Bd(1), Cob(2)],
        T21 => vec![Bd(2), Cob(1)],
        B1p => vec![Bd(1), Cob(2), Bd(2)],
        B2p => vec![Bd(2), Cob(1), Bd(1)],
        C1p => vec![Cob(2), Bd(2), Cob(1)],
        C2p => vec![Cob(1), Bd(1), Cob(2)],
        M1 => vec![Bd(1), Cob(2), Bd(2), Cob(1)],
        M2 => vec![Bd(2), Cob(1), Bd(1), Cob(2)],
        M0 => vec![Cob(1), Bd(1), Cob(2), Bd(2)],
    };
    (v, Manifold::X0)
}

/// ψDO orders for the slots of a skeleton: order `−2` at the ends (`+1` on
/// the right when the word starts on a submanifold), `−(ν_k + ν_j)/2 − 1` on
/// `X0` between `cob_k` and `bd_j`, and `+1` on `X_k` between `bd_k` and `cob_k`.
/// With these choices every input order in a fixed window keeps the chain valid,
/// however long the word.
pub fn default_slots(factors: &[Atom], cfg: &ConfigTriple) -> Vec<Option<Order>> {
    if factors.is_empty() {
        return vec![Some(Order::from(-2))];
    }
    let homes = slot_manifolds(factors, Manifold::X0);
    let applied: Vec<&Atom> = factors.iter().rev().collect();
    let last = homes.len() - 1;
    (0..homes.len())
        .map(|i| {
            Some(match (i, homes[i]) {
                (0, Manifold::X0) => Order::from(-2),
                (0, _) => Order::from(1),
                (i, _) if i == last => Order::from(-2),
                (i, Manifold::X0) => {
                    let (Atom::Coboundary(k), Atom::Boundary(j)) = (applied[i - 1], applied[i]) else {
                        unreachable!("X0 gaps sit between a coboundary and a boundary")
                    };
                    -(half_nu(cfg, *k) + half_nu(cfg, *j)) - Order::from(1)
                }
                _ => Order::from(1),
            })
        })
        .collect()
}

/// One concrete word of the given type.
pub fn representative(t: GeneratorType, cfg: &ConfigTriple) -> Result<Word> {
    let (sk, home) = representative_skeleton(t);
    skeleton_word(&sk, home, &default_slots(&sk, cfg), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representatives_have_their_types() {
        for cfg in [
            ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap(),
            ConfigTriple::new(4, [1, 2, 3], [1, 4], true).unwrap(),
        ] {
            for t in GeneratorType::ALL {
                let w = representative(t, &cfg).unwrap_or_else(|e| panic!("{t} n={}: {e}", cfg.n()));
                assert_eq!(GeneratorType::of_word(&w).unwrap(), t, "{t}: {w}");
            }
        }
    }

    #[test]
    fn skeleton_counts() {
        // length 0 three times, then 2 + 2 + 2 starts of length 1, ...
        let all = skeletons(2);
        assert_eq!(all.iter().filter(|s| s.len() == 1).count(), 4);
        assert_eq!(all.iter().filter(|s| s.len() == 2).count(), 6);
    }

    #[test]
    fn short_census_misses_deep_types() {
        let cfg = ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap();
        let c = census(&cfg, 2, None);
        assert!(c.cells.contains_key(&GeneratorType::G1));
        assert!(!c.cells.contains_key(&GeneratorType::M0));
        assert_eq!(c.unclassified, 0);
    }
}
