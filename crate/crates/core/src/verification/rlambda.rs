//! Residuals of the testing family: `R_λ^{-1} D R_λ (u ⊗ v)` against
//! `u ⊗ [σ_Z(D)(z0, ζ0)] v` for the three model words of the order-zero reduction.
//!
//! `D` acts through box quantization on the physical box of each `λ`. The
//! reference applies the model word with principal symbols on the lattice of
//! the scaled box, so both sides share the same frequency truncation and what
//! remains is the symbol approximation error, which decays like `λ^{-1/2}`.

use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{Atom, Word};
use crate::discretization::{inner, l2_norm, BoxLayout, GaussFactor, GridFn, RLambdaParams, TestFunction};
use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{Axis, ConfigTriple, Manifold, StratumId};
use crate::symbol_calculus::{apply_word_nodal, EvalMode, SymbolPoint};
use crate::Order;

use super::oracle::{word_operator, GridFamily};
use super::report::Report;

/// The three special cases of the testing argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCase {
    /// Order-zero ψDO on `home`, tested at `stratum`.
    Psido { home: Manifold, stratum: StratumId },
    /// `Λ_k i^k Λ_0` at `X_k`.
    Boundary { k: usize },
    /// `Λ_0 i_l Λ_l` at `X_l`.
    Coboundary { l: usize },
}

impl SpecialCase {
    pub fn all() -> Vec<SpecialCase> {
        vec![
            SpecialCase::Psido { home: Manifold::X0, stratum: StratumId::X1 },
            SpecialCase::Psido { home: Manifold::X1, stratum: StratumId::X12 },
            SpecialCase::Psido { home: Manifold::X2, stratum: StratumId::X12 },
            SpecialCase::Boundary { k: 1 },
            SpecialCase::Coboundary { l: 1 },
        ]
    }

    pub fn label(&self) -> String {
        match self {
            SpecialCase::Psido { home, stratum } => format!("psido_{home}_at_{stratum}"),
            SpecialCase::Boundary { k } => format!("boundary_{k}"),
            SpecialCase::Coboundary { l } => format!("coboundary_{l}"),
        }
    }

    pub fn stratum(&self) -> StratumId {
        match self {
            SpecialCase::Psido { stratum, .. } => *stratum,
            SpecialCase::Boundary { k } => sub(*k).stratum(),
            SpecialCase::Coboundary { l } => sub(*l).stratum(),
        }
    }

    /// The word `D` with order reductions `(1 + |ξ|²)^{s/2}` chosen so the
    /// composite has order zero.
    pub fn word(&self, cfg: &ConfigTriple) -> Result<Word> {
        let reduction = |m: Manifold, s: Order| Atom::PsiDO(SymbolExpr::bracket(m, s, cfg));
        let atoms = match *self {
            SpecialCase::Psido { home, stratum } => {
                if !stratum.is_subset_of(home.stratum()) || stratum == home.stratum() {
                    return Err(MorError::StratumMismatch(format!("{stratum} is not a proper stratum of {home}")));
                }
                let c = *cfg.conormal_axes(home.stratum(), stratum).first().expect("proper stratum");
                let t = *cfg.axes(stratum).first().ok_or_else(|| {
                    MorError::InvalidConfig(format!("{stratum} has no tangential axis"))
                })?;
                // (1 + cos(x_t)/2) (ξ_t² + 2 ξ_c²) ⟨ξ⟩^{-2}
                let coef = Expr::add(Expr::one(), Expr::mul(Expr::real(0.5), Expr::Cos(t)));
                let quad = Expr::add(Expr::pow(Expr::Xi(t), 2), Expr::mul(Expr::real(2.0), Expr::pow(Expr::Xi(c), 2)));
                let e = Expr::mul(coef, Expr::mul(quad, Expr::bracket(cfg.axes(home.stratum()), -2.0)));
                vec![Atom::PsiDO(SymbolExpr::new(e, Order::from(0), home, cfg)?)]
            }
            SpecialCase::Boundary { k } => vec![
                reduction(sub(k), Order::from(1) - half(cfg, k)),
                Atom::Boundary(k),
                reduction(Manifold::X0, Order::from(-1)),
            ],
            SpecialCase::Coboundary { l } => vec![
                reduction(Manifold::X0, Order::from(-1)),
                Atom::Coboundary(l),
                reduction(sub(l), Order::from(1) - half(cfg, l)),
            ],
        };
        Word::infer(atoms, cfg)
    }
}

fn sub(k: usize) -> Manifold {
    Manifold::from_index(k).expect("k is 1 or 2")
}

fn half(cfg: &ConfigTriple, k: usize) -> Order {
    Order::new(cfg.nu(k) as i64, 2)
}

fn layout(cfg: &ConfigTriple, m: Manifold, z: StratumId) -> BoxLayout {
    BoxLayout { tangential: cfg.axes(z), normal: cfg.conormal_axes(m.stratum(), z) }
}

/// Gaussian test pair on a manifold: a skewed tangential factor `u` and
/// Gaussian normal factors `v`.
pub fn test_function(cfg: &ConfigTriple, m: Manifold, z: StratumId) -> TestFunction {
    let tang = cfg.axes(z);
    let factors = cfg
        .axes(m.stratum())
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            if tang.contains(&a) {
                GaussFactor { center: 0.1 * i as f64, sigma: 1.0, poly: vec![1.0, 0.5] }
            } else {
                GaussFactor::gaussian(0.8)
            }
        })
        .collect();
    TestFunction { factors }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub lambdas: Vec<f64>,
    /// `‖R_λ^{-1} D R_λ f − u ⊗ σ v‖ / ‖f‖`.
    pub residuals: Vec<f64>,
    pub reference_norm: f64,
    pub input_norm: f64,
}

/// Shifts every axis by half a period, mapping box order (origin `−L`) to
/// model order (origin 0) and back.
fn half_roll(a: &GridFn) -> GridFn {
    let shape = a.shape().to_vec();
    let mut out = a.clone();
    let mut src = vec![0usize; shape.len()];
    for (idx, v) in out.indexed_iter_mut() {
        for (i, s) in src.iter_mut().enumerate() {
            *s = (idx[i] + shape[i] / 2) % shape[i];
        }
        *v = a[IxDyn(&src)];
    }
    out
}

fn factor_split(f: &TestFunction, axes: &[Axis], tang: &[Axis]) -> (TestFunction, TestFunction) {
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for (a, g) in axes.iter().zip(&f.factors) {
        if tang.contains(a) {
            u.push(g.clone());
        } else {
            v.push(g.clone());
        }
    }
    (TestFunction { factors: u }, TestFunction { factors: v })
}

pub fn rlambda_residual(
    w: &Word,
    z: StratumId,
    cfg: &ConfigTriple,
    f: &TestFunction,
    params: &RLambdaParams,
) -> Result<ResidualSeries> {
    params.validate()?;
    cfg.require_transversal()?;
    if !z.is_subset_of(w.localization()) {
        return Err(MorError::StratumMismatch(format!("{z} is not contained in the localization of `{w}`")));
    }
    let tang = cfg.axes(z);
    if params.z0.len() != tang.len() {
        return Err(MorError::AxisMismatch(format!("z0 needs {} entries on {z}", tang.len())));
    }
    let (dom, cod) = (w.domain(), w.codomain());
    let (ld, lc) = (layout(cfg, dom, z), layout(cfg, cod, z));
    let dom_axes = cfg.axes(dom.stratum());
    if f.factors.len() != dom_axes.len() {
        return Err(MorError::AxisMismatch(format!("test function needs one factor per axis of {dom}")));
    }

    // reference u ⊗ σ v on the scaled codomain box
    let (u, v) = factor_split(f, &dom_axes, &tang);
    let scaled_d = params.scaled_grid(&ld, &tang);
    let scaled_c = params.scaled_grid(&lc, &tang);
    let v_grid = scaled_d.sub_grid(&ld.normal)?;
    let pt = SymbolPoint::new(z, params.z0.clone(), params.zeta0.clone(), params.normal_points, cfg)?
        .with_period(2.0 * params.half_width)
        .with_mode(EvalMode::Principal);
    let sv = half_roll(&apply_word_nodal(w, &pt, cfg, &half_roll(&v.sample(&v_grid)))?);
    let u_vals = u.sample(&scaled_c.sub_grid(&tang)?);
    let reference = outer(&scaled_c.axes, &tang, &u_vals, &sv);
    let reference_norm = l2_norm(&scaled_c, &reference);

    let mut residuals = Vec::new();
    for &lam in &params.lambdas {
        let grids = GridFamily::from_fn(|m| {
            z.is_subset_of(m.stratum()).then(|| params.physical_grid(lam, &layout(cfg, m, z), &tang))
        });
        let op = word_operator(w, &grids)?;
        let (_, rf) = params.apply(lam, &ld, &tang, f)?;
        let out = params.invert(lam, &lc, &tang, &op.apply(&rf)?);
        residuals.push(l2_norm(&scaled_c, &(&out - &reference)) / f.norm());
    }
    Ok(ResidualSeries { lambdas: params.lambdas.clone(), residuals, reference_norm, input_norm: f.norm() })
}

/// `u(z) s(y)` on a grid whose axes mix tangential and normal ones.
fn outer(axes: &[Axis], tang: &[Axis], u: &GridFn, s: &GridFn) -> GridFn {
    let shape: Vec<usize> = axes
        .iter()
        .map(|a| match tang.iter().position(|t| t == a) {
            Some(i) => u.shape()[i],
            None => s.shape()[axes.iter().filter(|b| !tang.contains(b)).position(|b| b == a).expect("normal")],
        })
        .collect();
    let is_t: Vec<bool> = axes.iter().map(|a| tang.contains(a)).collect();
    let mut out = ArrayD::zeros(IxDyn(&shape));
    let (mut iu, mut is) = (Vec::new(), Vec::new());
    for (idx, o) in out.indexed_iter_mut() {
        iu.clear();
        is.clear();
        for (i, t) in is_t.iter().enumerate() {
            if *t { iu.push(idx[i]) } else { is.push(idx[i]) }
        }
        *o = u[IxDyn(&iu)] * s[IxDyn(&is)];
    }
    out
}

/// Default parameters: `|ζ0| = 2` along the first tangential axis, `z0 = 0`.
pub fn default_params(cfg: &ConfigTriple, z: StratumId, lambdas: Vec<f64>) -> RLambdaParams {
    let d = cfg.axes(z).len();
    let mut zeta0 = vec![0.0; d];
    zeta0[0] = 2.0;
    RLambdaParams {
        z0: vec![0.0; d],
        zeta0,
        lambdas,
        half_width: 8.0,
        normal_points: 64,
        spectral_radius: 8.0,
        tail_limit: 1e-8,
    }
}

/// Thresholds produced by the calibration run and kept under version control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub lambdas: Vec<f64>,
    /// Largest admissible final residual relative to `‖u ⊗ v‖`.
    pub final_threshold: f64,
    /// Residuals observed by the calibration run, per case label.
    pub observed: std::collections::BTreeMap<String, Vec<f64>>,
}

impl Calibration {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MorError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| MorError::Usage(format!("bad calibration file: {e}")))
    }
}

pub fn special_case_report(case: SpecialCase, cfg: &ConfigTriple, lambdas: &[f64], threshold: f64) -> Result<Report> {
    let z = case.stratum();
    let w = case.word(cfg)?;
    let params = default_params(cfg, z, lambdas.to_vec());
    let f = test_function(cfg, w.domain(), z);
    let s = rlambda_residual(&w, z, cfg, &f, &params)?;
    let decreasing = s.residuals.windows(2).all(|p| p[1] < p[0]);
    let last = *s.residuals.last().expect("nonempty schedule");
    Ok(Report::new(
        format!("rlambda_{}", case.label()),
        json!({
            "word": w.to_string(),
            "stratum": z.to_string(),
            "z0": params.z0,
            "zeta0": params.zeta0,
            "half_width": params.half_width,
            "threshold": threshold,
        }),
        json!(lambdas),
        json!({"residuals": s.residuals, "reference_norm": s.reference_norm, "input_norm": s.input_norm}),
        decreasing && last <= threshold,
    ))
}

/// Norm preservation and decay of `⟨R_λ f, w⟩` for a fixed Gaussian `w`.
pub fn unitarity_report(cfg: &ConfigTriple, z: StratumId, lambdas: &[f64], tolerance: f64) -> Result<Report> {
    let mut params = default_params(cfg, z, lambdas.to_vec());
    params.z0.iter_mut().for_each(|v| *v = 0.3);
    let lay = layout(cfg, Manifold::X0, z);
    let tang = cfg.axes(z);
    let f = test_function(cfg, Manifold::X0, z);
    let norm = f.norm();
    let (mut errors, mut pairings) = (Vec::new(), Vec::new());
    for &lam in lambdas {
        let (g, rf) = params.apply(lam, &lay, &tang, &f)?;
        errors.push((l2_norm(&g, &rf) - norm).abs() / norm);
        let w = g.sample(cfg.n(), |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / 4.0).exp(), 0.0)
        });
        pairings.push(inner(&g, &rf, &w).norm());
    }
    let pass = errors.iter().all(|e| *e <= tolerance) && pairings.windows(2).all(|p| p[1] < p[0]);
    Ok(Report::new(
        "rlambda_unitarity",
        json!({"stratum": z.to_string(), "tolerance": tolerance, "z0": params.z0, "zeta0": params.zeta0}),
        json!(lambdas),
        json!({"norm_errors": errors, "pairings": pairings}),
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
    fn identity_has_zero_residual() {
        let w = Word::infer(vec![Atom::PsiDO(SymbolExpr::bracket(Manifold::X0, Order::from(0), &cfg()))], &cfg())
            .unwrap();
        let z = StratumId::X1;
        let p = RLambdaParams { normal_points: 16, ..default_params(&cfg(), z, vec![4.0, 16.0]) };
        let s = rlambda_residual(&w, z, &cfg(), &test_function(&cfg(), Manifold::X0, z), &p).unwrap();
        assert!(s.residuals.iter().all(|r| *r < 1e-12), "{:?}", s.residuals);
    }

    #[test]
    fn special_words_have_order_zero() {
        for c in SpecialCase::all() {
            let w = c.word(&cfg()).unwrap();
            assert_eq!(w.order(&cfg()), Order::from(0), "{}", c.label());
        }
    }
}
