//! Generator atoms, words and their Sobolev chains.

use std::fmt;

use crate::error::{MorError, Result};
use crate::expr::SymbolExpr;
use crate::geometry::{ConfigTriple, Manifold, StratumId};
use crate::Order;

/// One elementary factor of a word.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    /// ψDO on its symbol's home manifold, `H^s → H^{s−m}`.
    PsiDO(SymbolExpr),
    /// Restriction `i^k : H^s(X0) → H^{s−ν_k/2}(X_k)`, needs `s > ν_k/2`.
    Boundary(usize),
    /// Extension by `δ(y)`, `i_k : H^t(X_k) → H^{t−ν_k/2}(X0)`, needs `t < 0`.
    Coboundary(usize),
}

impl Atom {
    pub fn domain(&self) -> Manifold {
        match self {
            Atom::PsiDO(s) => s.home,
            Atom::Boundary(_) => Manifold::X0,
            Atom::Coboundary(k) => manifold_k(*k),
        }
    }

    pub fn codomain(&self) -> Manifold {
        match self {
            Atom::PsiDO(s) => s.home,
            Atom::Boundary(k) => manifold_k(*k),
            Atom::Coboundary(_) => Manifold::X0,
        }
    }

    /// Loss of Sobolev order across the atom.
    pub fn order(&self, cfg: &ConfigTriple) -> Order {
        match self {
            Atom::PsiDO(s) => s.order,
            Atom::Boundary(k) | Atom::Coboundary(k) => half_nu(cfg, *k),
        }
    }

    /// Applies the atom to an input of order `s`, checking its precondition.
    pub fn apply_order(&self, s: Order, cfg: &ConfigTriple) -> Result<Order> {
        match self {
            Atom::PsiDO(sym) => Ok(s - sym.order),
            Atom::Boundary(k) => {
                let h = half_nu(cfg, *k);
                if s > h {
                    Ok(s - h)
                } else {
                    Err(MorError::OrderViolation(format!(
                        "bd{k} applied at order {s}, which must exceed ν{k}/2 = {h}"
                    )))
                }
            }
            Atom::Coboundary(k) => {
                if s < Order::from(0) {
                    Ok(s - half_nu(cfg, *k))
                } else {
                    Err(MorError::OrderViolation(format!("cob{k} applied at order {s}, which must be negative")))
                }
            }
        }
    }

    pub fn is_psido(&self) -> bool {
        matches!(self, Atom::PsiDO(_))
    }
}

fn manifold_k(k: usize) -> Manifold {
    match k {
        1 => Manifold::X1,
        2 => Manifold::X2,
        _ => panic!("submanifold index must be 1 or 2, got {k}"),
    }
}

/// `ν_k / 2` as an exact rational.
pub fn half_nu(cfg: &ConfigTriple, k: usize) -> Order {
    Order::new(cfg.nu(k) as i64, 2)
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::PsiDO(s) => write!(f, "Op[{}]{{{}, {}}}", s.home, s.expr, s.order),
            Atom::Boundary(k) => write!(f, "bd{k}"),
            Atom::Coboundary(k) => write!(f, "cob{k}"),
        }
    }
}

/// Sobolev orders through a word: entry 0 is the input order, entry `i` the
/// order after the `i`-th atom counted from the right.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevChain {
    pub orders: Vec<Order>,
}

impl SobolevChain {
    pub fn input(&self) -> Order {
        self.orders[0]
    }

    pub fn output(&self) -> Order {
        *self.orders.last().expect("chains are nonempty")
    }

    /// Total order of the word, `input − output`.
    pub fn order(&self) -> Order {
        self.input() - self.output()
    }
}

/// Open interval of admissible input orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderInterval {
    pub lo: Option<Order>,
    pub hi: Option<Order>,
}

impl OrderInterval {
    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(a), Some(b)) if a >= b)
    }

    pub fn contains(&self, s: Order) -> bool {
        self.lo.is_none_or(|a| s > a) && self.hi.is_none_or(|b| s < b)
    }

    /// A representative point: the midpoint, a unit step inside a half-line, or 0.
    pub fn pick(&self) -> Option<Order> {
        if self.is_empty() {
            return None;
        }
        let one = Order::from(1);
        Some(match (self.lo, self.hi) {
            (Some(a), Some(b)) => (a + b) / Order::from(2),
            (Some(a), None) => a + one,
            (None, Some(b)) => b - one,
            (None, None) => Order::from(0),
        })
    }
}

/// A composition of atoms; `atoms[0]` is applied last.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub atoms: Vec<Atom>,
    pub domain_order: Order,
}

fn check_chaining(atoms: &[Atom]) -> Result<()> {
    if atoms.is_empty() {
        return Err(MorError::ChainMismatch("a word needs at least one atom".into()));
    }
    for pair in atoms.windows(2) {
        let (left, right) = (&pair[0], &pair[1]);
        if right.codomain() != left.domain() {
            return Err(MorError::ChainMismatch(format!(
                "`{right}` lands in {} but `{left}` acts on {}",
                right.codomain(),
                left.domain()
            )));
        }
    }
    Ok(())
}

/// Input orders for which every precondition in `atoms` holds.
pub fn feasible_orders(atoms: &[Atom], cfg: &ConfigTriple) -> Result<OrderInterval> {
    check_chaining(atoms)?;
    let mut iv = OrderInterval { lo: None, hi: None };
    // the running order is `s - shift`
    let mut shift = Order::from(0);
    for atom in atoms.iter().rev() {
        match atom {
            Atom::Boundary(k) => {
                let bound = half_nu(cfg, *k) + shift;
                iv.lo = Some(iv.lo.map_or(bound, |a| a.max(bound)));
            }
            Atom::Coboundary(_) => {
                iv.hi = Some(iv.hi.map_or(shift, |b| b.min(shift)));
            }
            Atom::PsiDO(_) => {}
        }
        shift += atom.order(cfg);
    }
    Ok(iv)
}

impl Word {
    /// Validates chaining and every order precondition at `domain_order`.
    pub fn new(atoms: Vec<Atom>, domain_order: Order, cfg: &ConfigTriple) -> Result<Self> {
        let w = Word { atoms, domain_order };
        w.chain(cfg)?;
        Ok(w)
    }

    /// Picks an admissible input order, failing with `OrderViolation` if none exists.
    pub fn infer(atoms: Vec<Atom>, cfg: &ConfigTriple) -> Result<Self> {
        let iv = feasible_orders(&atoms, cfg)?;
        let s = iv.pick().ok_or_else(|| {
            MorError::OrderViolation("no input order satisfies every (co)boundary precondition".into())
        })?;
        Word::new(atoms, s, cfg)
    }

    pub fn chain(&self, cfg: &ConfigTriple) -> Result<SobolevChain> {
        check_chaining(&self.atoms)?;
        let mut orders = vec![self.domain_order];
        let mut s = self.domain_order;
        for atom in self.atoms.iter().rev() {
            s = atom.apply_order(s, cfg)?;
            orders.push(s);
        }
        Ok(SobolevChain { orders })
    }

    pub fn domain(&self) -> Manifold {
        self.atoms.last().expect("nonempty").domain()
    }

    pub fn codomain(&self) -> Manifold {
        self.atoms[0].codomain()
    }

    pub fn order(&self, cfg: &ConfigTriple) -> Order {
        self.atoms.iter().map(|a| a.order(cfg)).sum()
    }

    pub fn codomain_order(&self, cfg: &ConfigTriple) -> Order {
        self.domain_order - self.order(cfg)
    }

    /// Meet of every manifold the word passes through.
    pub fn localization(&self) -> StratumId {
        self.atoms.iter().fold(StratumId::X0, |z, a| {
            z.meet(a.domain().stratum()).meet(a.codomain().stratum())
        })
    }

    /// `self ∘ right`; the Sobolev chains must meet.
    pub fn then_after(&self, right: &Word, cfg: &ConfigTriple) -> Result<Word> {
        let out = right.codomain_order(cfg);
        if out != self.domain_order {
            return Err(MorError::OrderViolation(format!(
                "right factor lands in order {out}, left factor expects {}",
                self.domain_order
            )));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(right.atoms.iter().cloned());
        Word::new(atoms, right.domain_order, cfg)
    }

    /// Number of boundary and coboundary atoms.
    pub fn factor_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_psido()).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, SymbolExpr};

    fn cfg() -> ConfigTriple {
        ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap()
    }

    fn op(home: Manifold, m: i64) -> Atom {
        Atom::PsiDO(SymbolExpr::bracket(home, Order::from(m), &cfg()))
    }

    #[test]
    fn boundary_chain() {
        let c = cfg();
        let w = Word::new(vec![Atom::Boundary(1)], Order::from(1), &c).unwrap();
        let ch = w.chain(&c).unwrap();
        assert_eq!(ch.orders, vec![Order::from(1), Order::new(1, 2)]);
        assert_eq!(ch.order(), Order::new(1, 2));
        let err = Word::new(vec![Atom::Boundary(1)], Order::new(2, 5), &c);
        assert!(matches!(err, Err(MorError::OrderViolation(_))));
    }

    #[test]
    fn order_zero_psido_at_any_order() {
        let c = cfg();
        let a = Atom::PsiDO(SymbolExpr::new(Expr::one(), Order::from(0), Manifold::X0, &c).unwrap());
        for s in [-3, 0, 7] {
            let w = Word::new(vec![a.clone()], Order::from(s), &c).unwrap();
            assert_eq!(w.chain(&c).unwrap().orders, vec![Order::from(s); 2]);
        }
    }

    #[test]
    fn chaining_and_inference() {
        let c = cfg();
        let bad = Word::infer(vec![Atom::Boundary(1), Atom::Boundary(1)], &c);
        assert!(matches!(bad, Err(MorError::ChainMismatch(_))));
        let bad = Word::infer(vec![Atom::Boundary(1), Atom::Coboundary(1)], &c);
        assert!(matches!(bad, Err(MorError::OrderViolation(_))));
        let g = Word::infer(vec![Atom::Coboundary(1), op(Manifold::X1, 1), Atom::Boundary(1)], &c).unwrap();
        assert!(g.domain_order > Order::new(1, 2) && g.domain_order < Order::new(3, 2));
        assert_eq!(g.localization(), StratumId::X1);
        let t = Word::infer(vec![Atom::Boundary(2), op(Manifold::X0, 0), Atom::Coboundary(1)], &c);
        assert!(t.is_err());
        let t = Word::infer(vec![Atom::Boundary(2), op(Manifold::X0, -3), Atom::Coboundary(1)], &c).unwrap();
        assert_eq!(t.localization(), StratumId::X12);
    }

    #[test]
    fn concatenation_adds_orders() {
        let c = cfg();
        let w2 = Word::new(vec![op(Manifold::X1, 1), Atom::Boundary(1)], Order::from(1), &c).unwrap();
        let w1 = Word::new(vec![Atom::Coboundary(1)], w2.codomain_order(&c), &c).unwrap();
        let w = w1.then_after(&w2, &c).unwrap();
        assert_eq!(w.order(&c), w1.order(&c) + w2.order(&c));
        let w1b = Word::new(vec![Atom::Coboundary(1)], Order::from(-2), &c).unwrap();
        assert!(matches!(w1b.then_after(&w2, &c), Err(MorError::OrderViolation(_))));
    }
}
