//! The 3×3 normal form of a morphism.

use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{ConfigTriple, Manifold};
use crate::Order;

use super::generator::GeneratorType;
use super::word::{Atom, Word};

/// A classified summand of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub kind: GeneratorType,
    pub word: Word,
}

/// Cell `(k, l)` holds words `X_l → X_k`. Orders of the source and target
/// spaces are recorded per index once some word fixes them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MorMatrix {
    pub cells: [[Vec<Entry>; 3]; 3],
    pub domain_orders: [Option<Order>; 3],
    pub codomain_orders: [Option<Order>; 3],
}

fn merge(slot: &mut Option<Order>, s: Order, what: &str, idx: usize) -> Result<()> {
    match slot {
        Some(t) if *t != s => Err(MorError::OrderViolation(format!(
            "{what} space of X{idx} has order {t} in one summand and {s} in another"
        ))),
        _ => {
            *slot = Some(s);
            Ok(())
        }
    }
}

impl MorMatrix {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Classifies every word and places it in its cell.
    pub fn assemble(words: impl IntoIterator<Item = Word>, cfg: &ConfigTriple) -> Result<Self> {
        let mut m = Self::zero();
        for w in words {
            m.push(w, cfg)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, word: Word, cfg: &ConfigTriple) -> Result<()> {
        word.chain(cfg)?;
        let kind = GeneratorType::of_word(&word)?;
        let (k, l) = kind.cell();
        merge(&mut self.domain_orders[l], word.domain_order, "domain", l)?;
        merge(&mut self.codomain_orders[k], word.codomain_order(cfg), "target", k)?;
        self.cells[k][l].push(Entry { kind, word });
        Ok(())
    }

    /// `diag(Op[X0]{1}, Op[X1]{1}, Op[X2]{1})` on spaces of the given orders.
    pub fn identity(orders: [Order; 3], cfg: &ConfigTriple) -> Self {
        let mut m = Self::zero();
        for home in Manifold::ALL {
            let sym = SymbolExpr::new(Expr::one(), Order::from(0), home, cfg).expect("constant symbol");
            let w = Word::new(vec![Atom::PsiDO(sym)], orders[home.index()], cfg).expect("order-0 word");
            m.push(w, cfg).expect("diagonal entries");
        }
        m
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.cells.iter().flatten().flatten()
    }

    pub fn is_zero(&self) -> bool {
        self.entries().next().is_none()
    }

    /// Block product `self ∘ right`: every pair of words meeting at a middle
    /// index is concatenated and reclassified.
    pub fn compose(&self, right: &MorMatrix, cfg: &ConfigTriple) -> Result<MorMatrix> {
        for j in 0..3 {
            if let (Some(a), Some(b)) = (self.domain_orders[j], right.codomain_orders[j]) {
                if a != b {
                    return Err(MorError::OrderViolation(format!(
                        "X{j}: left factor expects order {a}, right factor delivers {b}"
                    )));
                }
            }
        }
        let mut out = MorMatrix::zero();
        for k in 0..3 {
            for l in 0..3 {
                for j in 0..3 {
                    for a in &self.cells[k][j] {
                        for b in &right.cells[j][l] {
                            out.push(a.word.then_after(&b.word, cfg)?, cfg)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
