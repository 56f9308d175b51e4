//! Ground-truth realizations of words on full manifold grids.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::{fuse_trace, Atom, Word};
use crate::discretization::fft::inverse;
use crate::discretization::{extension, l2_norm, quantize, restriction, GridFn, GridOperator, TorusGrid};
use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{ConfigTriple, Manifold, StratumId};
use crate::Order;

use super::report::Report;

/// One grid per manifold; restriction and extension need the grid of `X_k`
/// to be the sub-grid of the one of `X0`.
#[derive(Debug, Clone)]
pub struct GridFamily {
    grids: [Option<TorusGrid>; 3],
}

impl GridFamily {
    /// `[0, 2π)` tori with `n` points per axis.
    pub fn torus(cfg: &ConfigTriple, n: usize) -> Self {
        Self::from_fn(|m| Some(TorusGrid::torus(cfg.axes(m.stratum()), n)))
    }

    pub fn from_fn(mut f: impl FnMut(Manifold) -> Option<TorusGrid>) -> Self {
        Self { grids: Manifold::ALL.map(&mut f) }
    }

    pub fn get(&self, m: Manifold) -> Result<&TorusGrid> {
        self.grids[m.index()]
            .as_ref()
            .ok_or_else(|| MorError::ShapeMismatch(format!("no grid for {m}")))
    }
}

pub fn atom_operator(atom: &Atom, grids: &GridFamily) -> Result<GridOperator> {
    match atom {
        Atom::PsiDO(s) => {
            let mut op = quantize(&s.expr, grids.get(s.home)?)?;
            op.order = Some(s.order_f64());
            Ok(op)
        }
        Atom::Boundary(k) => restriction(grids.get(Manifold::X0)?, grids.get(manifold(*k))?),
        Atom::Coboundary(k) => extension(grids.get(manifold(*k))?, grids.get(Manifold::X0)?),
    }
}

fn manifold(k: usize) -> Manifold {
    Manifold::from_index(k).expect("k is 1 or 2")
}

/// The operator of `w` between the grids of its end manifolds.
pub fn word_operator(w: &Word, grids: &GridFamily) -> Result<GridOperator> {
    let mut ops = w.atoms.iter().map(|a| atom_operator(a, grids));
    let first = ops.next().expect("words are nonempty")?;
    ops.try_fold(first, |acc, op| acc.compose(&op?))
}

pub fn operator_oracle(w: &Word, cfg: &ConfigTriple, n: usize) -> Result<GridOperator> {
    word_operator(w, &GridFamily::torus(cfg, n))
}

/// Random trigonometric polynomial with modes `1 ≤ |k|_∞ ≤ 2`.
pub fn band_limited_input(g: &TorusGrid, rng: &mut impl Rng) -> GridFn {
    let mut uh = g.zeros();
    for (idx, v) in uh.indexed_iter_mut() {
        let k: Vec<i64> = (0..g.dim())
            .map(|i| {
                let n = g.points[i] as i64;
                let j = idx[i] as i64;
                if j < n / 2 { j } else { j - n }
            })
            .collect();
        let kmax = k.iter().map(|x| x.abs()).max().unwrap_or(0);
        if (1..=2).contains(&kmax) {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    inverse(&uh)
}

/// Largest `‖(A − B)u‖ / ‖Au‖` over random inputs, for `A = oracle(w)` and
/// `B = oracle(fuse_trace(w))`.
pub fn fuse_discrepancy(w: &Word, cfg: &ConfigTriple, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let fused = fuse_trace(w, cfg)?;
    let grids = GridFamily::torus(cfg, n);
    let a = word_operator(w, &grids)?;
    let b = word_operator(&fused, &grids)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = band_limited_input(&a.domain, &mut rng);
        let au = a.apply(&u)?;
        let bu = b.apply(&u)?;
        let diff = &au - &bu;
        worst = worst.max(l2_norm(&a.codomain, &diff) / l2_norm(&a.codomain, &au));
    }
    Ok(worst)
}

/// `bd_k ; Op[X0]{(1 + cos(x_1)/2) (1 + |ξ|²)^{-3/2}, -3} ; cob_k`, whose
/// trace has a one-dimensional conormal fiber when `ν_k = 1`.
pub fn trace_oracle_word(cfg: &ConfigTriple, k: usize) -> Result<Word> {
    let coef = Expr::add(Expr::one(), Expr::mul(Expr::real(0.5), Expr::Cos(1)));
    let e = Expr::mul(coef, Expr::bracket(cfg.axes(StratumId::X0), -3.0));
    let psi = SymbolExpr::new(e, Order::from(-3), Manifold::X0, cfg)?;
    Word::infer(vec![Atom::Boundary(k), Atom::PsiDO(psi), Atom::Coboundary(k)], cfg)
}

/// Discrepancy over a resolution schedule; passes when it decreases strictly
/// and ends at most at `tolerance`.
pub fn fuse_discrepancy_report(
    w: &Word,
    cfg: &ConfigTriple,
    schedule: &[usize],
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Report> {
    let values = schedule
        .iter()
        .map(|&n| fuse_discrepancy(w, cfg, n, samples, seed))
        .collect::<Result<Vec<f64>>>()?;
    let pass = values.windows(2).all(|p| p[1] < p[0]) && values.last().is_some_and(|v| *v <= tolerance);
    Ok(Report::new(
        "oracle_fuse_trace",
        json!({"word": w.to_string(), "samples": samples, "seed": seed, "tolerance": tolerance}),
        json!(schedule),
        json!(values),
        pass,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ConfigTriple {
        ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap()
    }

    fn op(home: Manifold, e: Expr, m: Order) -> Atom {
        Atom::PsiDO(SymbolExpr::new(e, m, home, &cfg()).unwrap())
    }

    #[test]
    fn identity_word_is_identity() {
        let w = Word::infer(vec![op(Manifold::X0, Expr::one(), Order::from(0))], &cfg()).unwrap();
        let a = operator_oracle(&w, &cfg(), 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = band_limited_input(&a.domain, &mut rng);
        let v = a.apply(&u).unwrap();
        assert!(u.iter().zip(v.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn concatenation_realizes_the_product() {
        let e = Expr::mul(Expr::add(Expr::real(2.0), Expr::Sin(2)), Expr::bracket([1, 2], -1.0));
        let w2 = Word::new(
            vec![Atom::Coboundary(2), op(Manifold::X2, Expr::bracket([1, 3], 1.0), Order::from(1))],
            Order::new(1, 2),
            &cfg(),
        )
        .unwrap();
        let left = vec![
            op(Manifold::X1, e, Order::from(-1)),
            Atom::Boundary(1),
            op(Manifold::X0, Expr::bracket([1, 2, 3], -2.0), Order::from(-2)),
        ];
        let w1 = Word::new(left, w2.codomain_order(&cfg()), &cfg()).unwrap();
        let grids = GridFamily::torus(&cfg(), 8);
        let both = word_operator(&w1.then_after(&w2, &cfg()).unwrap(), &grids).unwrap();
        let split = word_operator(&w1, &grids).unwrap().compose(&word_operator(&w2, &grids).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = band_limited_input(&both.domain, &mut rng);
        assert_eq!(both.apply(&u).unwrap(), split.apply(&u).unwrap());
    }

    #[test]
    fn fused_constant_symbol_is_close() {
        let w = Word::infer(
            vec![Atom::Boundary(1), op(Manifold::X0, Expr::bracket([1, 2, 3], -2.0), Order::from(-2)), Atom::Coboundary(1)],
            &cfg(),
        )
        .unwrap();
        let d = fuse_discrepancy(&w, &cfg(), 32, 5, 3).unwrap();
        assert!(d < 0.1, "{d}");
    }
}
