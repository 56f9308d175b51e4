//! Rewriting `bd_k ; Op[X0]{a} ; cob_k` into a single ψDO on `X_k`.
//!
//! The fused symbol is `b(z, ζ) = (2π)^{-ν} ∫ a(z, η, ζ) dη` over the `ν = ν_k`
//! conormal frequencies. It is evaluated in closed form for symbols of the form
//! `c(z, ζ) · (1 + |ζ_J|² + |η|²)^{e/2}` with `e < −ν`:
//!
//! `b = c · (2π)^{-ν} π^{ν/2} Γ((−e−ν)/2) / Γ(−e/2) · (1 + |ζ_J|²)^{(e+ν)/2}`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{Axis, ConfigTriple, Manifold, StratumId};
use crate::Order;

use super::word::{Atom, Word};

fn flatten(e: &Expr, coef: &mut Complex64, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(p, q) => {
            flatten(p, coef, out);
            flatten(q, coef, out);
        }
        Expr::Neg(p) => {
            *coef = -*coef;
            flatten(p, coef, out);
        }
        Expr::Const(c) => *coef *= c,
        other => out.push(other.clone()),
    }
}

/// `(2π)^{-ν} ∫_{ℝ^ν} (A² + |η|²)^{e/2} dη / A^{e+ν}`.
pub fn bracket_trace_constant(nu: usize, e: f64) -> f64 {
    let nu_f = nu as f64;
    (2.0 * PI).powf(-nu_f) * PI.powf(nu_f / 2.0) * gamma((-e - nu_f) / 2.0) / gamma(-e / 2.0)
}

/// Integrates a ψDO symbol on `X0` over the conormal frequencies of `X_k`.
pub fn trace_symbol(sym: &SymbolExpr, k: usize, cfg: &ConfigTriple) -> Result<SymbolExpr> {
    let home_k = if k == 1 { Manifold::X1 } else { Manifold::X2 };
    let nu = cfg.nu(k);
    let m = sym.order;
    if m >= -Order::from(nu as i64) {
        return Err(MorError::NotFusible(format!(
            "ψDO order {m} is not below −ν{k} = −{nu}, so the conormal integral diverges"
        )));
    }
    let conormal: BTreeSet<Axis> = cfg.conormal_axes(StratumId::X0, home_k.stratum()).into_iter().collect();
    let mut coef = Complex64::new(1.0, 0.0);
    let mut factors = Vec::new();
    flatten(&sym.expr, &mut coef, &mut factors);

    let mut bracket: Option<(Vec<Axis>, f64)> = None;
    let mut rest = Vec::new();
    for f in factors {
        let touches_eta = !f.freq_axes().is_disjoint(&conormal);
        let touches_y = !f.space_axes().is_disjoint(&conormal);
        if touches_y {
            return Err(MorError::NotFusible(format!(
                "factor `{f}` depends on the conormal position of X{k}"
            )));
        }
        match (&f, touches_eta) {
            (_, false) => rest.push(f),
            (Expr::Bracket(axes, e), true) if bracket.is_none() => {
                let j: BTreeSet<Axis> = axes.iter().copied().collect();
                if !conormal.is_subset(&j) {
                    return Err(MorError::NotFusible(format!(
                        "bracket `{f}` covers only part of the conormal frequencies"
                    )));
                }
                bracket = Some((axes.clone(), *e));
            }
            _ => {
                return Err(MorError::NotFusible(format!(
                    "factor `{f}` depends on the conormal frequencies outside a single bracket"
                )))
            }
        }
    }
    let (axes, e) = bracket.ok_or_else(|| {
        MorError::NotFusible("symbol is independent of the conormal frequencies; the integral diverges".into())
    })?;
    if e >= -(nu as f64) {
        return Err(MorError::NotFusible(format!("bracket exponent {e} is not below −{nu}")));
    }
    coef *= bracket_trace_constant(nu, e);
    let remaining: Vec<Axis> = axes.into_iter().filter(|a| !conormal.contains(a)).collect();
    if !remaining.is_empty() {
        rest.push(Expr::Bracket(remaining, e + nu as f64));
    }
    let mut expr = Expr::Const(coef);
    for f in rest {
        expr = Expr::mul(expr, f);
    }
    SymbolExpr::new(expr, m + Order::from(nu as i64), home_k, cfg)
}

/// Replaces the leftmost `bd_k ; Op[X0]{a} ; cob_k` by `Op[X_k]{b}`.
pub fn fuse_trace(w: &Word, cfg: &ConfigTriple) -> Result<Word> {
    let pos = w.atoms.windows(3).position(|t| {
        matches!((&t[0], &t[1], &t[2]),
            (Atom::Boundary(k), Atom::PsiDO(s), Atom::Coboundary(j)) if k == j && s.home == Manifold::X0)
    });
    let i = pos.ok_or_else(|| MorError::NotFusible("no `bd_k ; Op[X0] ; cob_k` pattern in the word".into()))?;
    let (Atom::Boundary(k), Atom::PsiDO(sym)) = (&w.atoms[i], &w.atoms[i + 1]) else {
        unreachable!("pattern matched above")
    };
    let fused = trace_symbol(sym, *k, cfg)?;
    let mut atoms = w.atoms[..i].to_vec();
    atoms.push(Atom::PsiDO(fused));
    atoms.extend_from_slice(&w.atoms[i + 3..]);
    Word::new(atoms, w.domain_order, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> ConfigTriple {
        ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap()
    }

    fn word_with(expr: Expr, m: i64) -> Word {
        let c = cfg();
        let s = SymbolExpr::new(expr, Order::from(m), Manifold::X0, &c).unwrap();
        Word::infer(vec![Atom::Boundary(1), Atom::PsiDO(s), Atom::Coboundary(1)], &c).unwrap()
    }

    /// Composite Simpson rule on `[-L, L]`.
    fn simpson(f: impl Fn(f64) -> f64, l: f64, n: usize) -> f64 {
        let h = 2.0 * l / n as f64;
        let mut s = f(-l) + f(l);
        for i in 1..n {
            let x = -l + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_case_is_one_half() {
        let c = cfg();
        let w = word_with(Expr::bracket([3], -2.0), -2);
        let f = fuse_trace(&w, &c).unwrap();
        assert_eq!(f.atoms.len(), 1);
        let Atom::PsiDO(s) = &f.atoms[0] else { panic!() };
        assert_eq!(s.home, Manifold::X1);
        assert_eq!(s.order, Order::from(-1));
        let v = s.eval_home(&c, &[0.3, 0.1], &[2.0, -1.0]).unwrap();
        assert_relative_eq!(v.re, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn cubic_bracket_against_quadrature() {
        let c = cfg();
        let w = word_with(Expr::bracket([2, 3], -3.0), -3);
        let Atom::PsiDO(s) = &fuse_trace(&w, &c).unwrap().atoms[0] else { panic!() };
        for zeta in [0.0, 0.7, 2.5] {
            let analytic = (1.0 / PI) / (1.0 + zeta * zeta);
            let tail = 1.0 / (1e4f64 * 1e4); // ∫_{|η|>L} |η|^{-3}
            let quad = simpson(|eta| (1.0 + zeta * zeta + eta * eta).powf(-1.5), 1e4, 2_000_000) + tail;
            assert_relative_eq!(quad / (2.0 * PI), analytic, max_relative = 1e-6);
            let v = s.eval_home(&c, &[0.0, 0.0], &[0.0, zeta]).unwrap();
            assert_relative_eq!(v.re, analytic, max_relative = 1e-12);
        }
    }

    #[test]
    fn position_coefficients_are_kept() {
        let c = cfg();
        let a = Expr::mul(
            Expr::add(Expr::one(), Expr::mul(Expr::real(0.5), Expr::Cos(1))),
            Expr::bracket([1, 2, 3], -3.0),
        );
        let w = word_with(a, -3);
        let Atom::PsiDO(s) = &fuse_trace(&w, &c).unwrap().atoms[0] else { panic!() };
        let v = s.eval_home(&c, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(v.re, 1.5 / (PI * 3.0), max_relative = 1e-12);
    }

    #[test]
    fn rejections() {
        let c = cfg();
        let plain = Word::infer(vec![Atom::Boundary(1)], &c).unwrap();
        assert!(matches!(fuse_trace(&plain, &c), Err(MorError::NotFusible(_))));
        let y_dep = word_with(Expr::mul(Expr::Cos(3), Expr::bracket([3], -2.0)), -2);
        assert!(matches!(fuse_trace(&y_dep, &c), Err(MorError::NotFusible(_))));
        let partial = word_with(Expr::mul(Expr::Xi(3), Expr::bracket([3], -4.0)), -3);
        assert!(matches!(fuse_trace(&partial, &c), Err(MorError::NotFusible(_))));
        let s = SymbolExpr::new(Expr::bracket([3], -1.0), Order::from(-1), Manifold::X0, &c).unwrap();
        assert!(matches!(trace_symbol(&s, 1, &c), Err(MorError::NotFusible(_))));
    }
}
