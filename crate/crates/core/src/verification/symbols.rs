//! Symbol-level checks: the composition homomorphism and independence of the
//! representation under the trace rewrite.

use num_traits::ToPrimitive;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::census::representative;
use crate::algebra::{fuse_trace, Atom, GeneratorType, MorMatrix, Word};
use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{ConfigTriple, Manifold, StratumId};
use crate::symbol_calculus::{compose_symbols, morphism_symbol, word_symbol, SymbolPoint};
use crate::Order;

use super::report::Report;

/// `(a + b cos x_i + c sin x_j) (1 + |ξ|²)^{m/2}` with random coefficients
/// and axes of `home`.
fn random_symbol(rng: &mut impl Rng, home: Manifold, order: Order, cfg: &ConfigTriple) -> Result<SymbolExpr> {
    let axes = cfg.axes(home.stratum());
    let (i, j) = (*axes.choose(rng).expect("axes"), *axes.choose(rng).expect("axes"));
    let coef = Expr::add(
        Expr::real(rng.random_range(1.0..2.0)),
        Expr::add(
            Expr::mul(Expr::real(rng.random_range(-0.5..0.5)), Expr::Cos(i)),
            Expr::mul(Expr::real(rng.random_range(-0.5..0.5)), Expr::Sin(j)),
        ),
    );
    let e = order.to_f64().expect("finite order");
    SymbolExpr::new(Expr::mul(coef, Expr::bracket(axes, e)), order, home, cfg)
}

/// The representative of `t` with every ψDO replaced by a random one of the same order.
pub fn random_word(
    t: GeneratorType,
    rng: &mut impl Rng,
    cfg: &ConfigTriple,
    domain_order: Option<Order>,
) -> Result<Word> {
    let rep = representative(t, cfg)?;
    let atoms = rep
        .atoms
        .iter()
        .map(|a| match a {
            Atom::PsiDO(s) => random_symbol(rng, s.home, s.order, cfg).map(Atom::PsiDO),
            other => Ok(other.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    match domain_order {
        Some(s) => Word::new(atoms, s, cfg),
        None => Word::new(atoms, rep.domain_order, cfg),
    }
}

/// A composable pair `(w1, w2)` of random single-word morphisms, `w1 ∘ w2`.
pub fn random_pair(rng: &mut impl Rng, cfg: &ConfigTriple) -> Result<(Word, Word)> {
    for _ in 0..1000 {
        let t2 = *GeneratorType::ALL.choose(rng).expect("types");
        let w2 = random_word(t2, rng, cfg, None)?;
        let firsts: Vec<GeneratorType> =
            GeneratorType::ALL.into_iter().filter(|t| t.triple().1 == w2.codomain().index()).collect();
        let t1 = *firsts.choose(rng).expect("every manifold is a domain");
        if let Ok(w1) = random_word(t1, rng, cfg, Some(w2.codomain_order(cfg))) {
            return Ok((w1, w2));
        }
    }
    Err(MorError::OrderViolation("no composable pair found".into()))
}

pub fn random_point(rng: &mut impl Rng, z: StratumId, m: usize, cfg: &ConfigTriple) -> Result<SymbolPoint> {
    let d = cfg.axes(z).len();
    let pos = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let cov = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    SymbolPoint::new(z, pos, cov, m, cfg)
}

/// `‖σ(D1 D2) − σ(D1) σ(D2)‖_F / ‖σ(D1) σ(D2)‖_F` (absolute when the product vanishes).
pub fn homomorphism_error(m1: &MorMatrix, m2: &MorMatrix, pt: &SymbolPoint, cfg: &ConfigTriple) -> Result<f64> {
    let both = morphism_symbol(&m1.compose(m2, cfg)?, pt, cfg);
    let prod = compose_symbols(&morphism_symbol(m1, pt, cfg), &morphism_symbol(m2, pt, cfg))?;
    let d = both.distance(&prod)?;
    let n = prod.frobenius_norm();
    Ok(if n > 0.0 { d / n } else { d })
}

pub fn homomorphism_report(
    cfg: &ConfigTriple,
    pairs: &[(MorMatrix, MorMatrix)],
    points_per_stratum: usize,
    m: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = serde_json::Map::new();
    let mut overall: f64 = 0.0;
    for z in StratumId::ALL {
        let pts = (0..points_per_stratum).map(|_| random_point(&mut rng, z, m, cfg)).collect::<Result<Vec<_>>>()?;
        let mut w: f64 = 0.0;
        for (a, b) in pairs {
            for p in &pts {
                w = w.max(homomorphism_error(a, b, p, cfg)?);
            }
        }
        overall = overall.max(w);
        worst.insert(z.to_string(), json!(w));
    }
    Ok(Report::new(
        "compose",
        json!({"pairs": pairs.len(), "points_per_stratum": points_per_stratum, "M": m, "seed": seed, "tolerance": tolerance}),
        json!(StratumId::ALL.map(|z| z.to_string())),
        json!({"max_relative_error": overall, "per_stratum": worst}),
        overall <= tolerance,
    ))
}

pub fn random_pairs(cfg: &ConfigTriple, count: usize, seed: u64) -> Result<Vec<(MorMatrix, MorMatrix)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (w1, w2) = random_pair(&mut rng, cfg)?;
            Ok((MorMatrix::assemble([w1], cfg)?, MorMatrix::assemble([w2], cfg)?))
        })
        .collect()
}

/// `bd_k ; Op[X0]{(1 + |ξ|²)^{e/2}} ; cob_k`.
pub fn trace_word(cfg: &ConfigTriple, k: usize, e: i64) -> Result<Word> {
    let psi = SymbolExpr::bracket(Manifold::X0, Order::from(e), cfg);
    Word::infer(vec![Atom::Boundary(k), Atom::PsiDO(psi), Atom::Coboundary(k)], cfg)
}

/// Largest relative gap between the symbols of `w` and of `fuse_trace(w)`
/// over `points`; all points share one stratum and resolution.
pub fn fuse_symbol_discrepancy(w: &Word, points: &[SymbolPoint], cfg: &ConfigTriple) -> Result<f64> {
    let fused = fuse_trace(w, cfg)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let a = word_symbol(w, p, cfg)?;
        let b = word_symbol(&fused, p, cfg)?;
        worst = worst.max(a.distance(&b)? / b.frobenius_norm());
    }
    Ok(worst)
}

/// Scalar symbol of the trace word at `ζ = 0`.
pub fn trace_constant(cfg: &ConfigTriple, k: usize, m: usize) -> Result<f64> {
    let w = trace_word(cfg, k, -2)?;
    let z = Manifold::from_index(k).expect("k is 1 or 2").stratum();
    let d = cfg.axes(z).len();
    let p = SymbolPoint::new(z, vec![0.0; d], vec![0.0; d], m, cfg)?;
    let s = word_symbol(&w, &p, cfg)?;
    Ok(s.blocks[0][0].as_ref().expect("block")[[0, 0]].re)
}

/// Symbol points on `X_k` with `1 ≤ |ζ| ≤ 1.5`, away from the zero section
/// where the lattice sum converges only up to its Poisson remainder.
pub fn trace_points(cfg: &ConfigTriple, k: usize, m: usize) -> Result<Vec<SymbolPoint>> {
    let z = Manifold::from_index(k).expect("k is 1 or 2").stratum();
    let d = cfg.axes(z).len();
    [(1.0, 0.2), (1.5, 0.7), (1.2, -0.4)]
        .into_iter()
        .map(|(r, pos)| {
            let mut zeta = vec![0.0; d];
            zeta[0] = r;
            SymbolPoint::new(z, vec![pos; d], zeta, m, cfg)
        })
        .collect()
}

pub fn trace_symbol_report(cfg: &ConfigTriple, k: usize, schedule: &[usize], tolerance: f64) -> Result<Report> {
    let exponents = [-2, -3];
    let mut series = serde_json::Map::new();
    let mut pass = true;
    for e in exponents {
        let w = trace_word(cfg, k, e)?;
        let vals = schedule
            .iter()
            .map(|&m| fuse_symbol_discrepancy(&w, &trace_points(cfg, k, m)?, cfg))
            .collect::<Result<Vec<f64>>>()?;
        pass &= vals.windows(2).all(|p| p[1] < p[0]) && vals.last().is_some_and(|v| *v <= tolerance);
        series.insert(format!("e={e}"), json!(vals));
    }
    let constants = schedule.iter().map(|&m| trace_constant(cfg, k, m)).collect::<Result<Vec<f64>>>()?;
    let last = *constants.last().expect("nonempty schedule");
    pass &= (last - 0.5).abs() <= tolerance * 0.5;
    Ok(Report::new(
        "trace_symbol",
        json!({"k": k, "tolerance": tolerance, "analytic_constant": 0.5}),
        json!(schedule),
        json!({"discrepancy": series, "constant": constants}),
        pass,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ConfigTriple {
        ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap()
    }

    #[test]
    fn random_pairs_compose() {
        let pairs = random_pairs(&cfg(), 10, 7).unwrap();
        for (a, b) in &pairs {
            a.compose(b, &cfg()).unwrap();
        }
    }

    #[test]
    fn homomorphism_on_a_few_pairs() {
        let pairs = random_pairs(&cfg(), 4, 11).unwrap();
        let r = homomorphism_report(&cfg(), &pairs, 2, 8, 5, 1e-10).unwrap();
        assert!(r.pass, "{:?}", r.values);
    }

    #[test]
    fn trace_constant_near_one_half() {
        let c = trace_constant(&cfg(), 1, 64).unwrap();
        assert!((c - 0.5).abs() <= 0.025, "{c}");
    }
}
