//! Order-drop probes for localization.
//!
//! A word is applied to packets `u_λ = e^{iλ x·θ} χ(x)` concentrated at the
//! origin, which lies on every stratum. The slope of `log ‖φ D φ u_λ‖` against
//! `log λ` estimates the order. Cutting off with `φ` vanishing near the
//! localization stratum should lower it; a nonvanishing `φ` should not.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::algebra::census::representative;
use crate::algebra::{GeneratorType, Word};
use crate::discretization::{l2_norm, GridFn, TorusGrid};
use crate::error::{MorError, Result};
use crate::expr::Expr;
use crate::geometry::{ConfigTriple, StratumId};

use super::oracle::{word_operator, GridFamily};
use super::report::Report;

/// Largest order drop accepted as "not vanishing" and smallest accepted as vanishing.
pub const NONVANISHING_GAP: f64 = 0.1;
pub const VANISHING_DROP: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedOrder {
    Finite(f64),
    /// The output vanished identically: order `−∞`.
    Annihilated,
}

impl FittedOrder {
    pub fn value(self) -> f64 {
        match self {
            FittedOrder::Finite(v) => v,
            FittedOrder::Annihilated => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSettings {
    pub n: usize,
    pub lambdas: Vec<f64>,
    /// Concentration `κ` of `χ = Π exp(κ (cos x_a − 1))`.
    pub kappa: f64,
    /// Vanishing order `p` of the cutoff `((Σ_a (1 − cos x_a)) / (2c))^p`.
    pub power: i32,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { n: 64, lambdas: vec![2.0, 4.0, 8.0, 16.0], kappa: 4.0, power: 3 }
    }
}

/// Cutoff vanishing to order `2p` exactly on `z` (and nowhere else near it);
/// the zero function when `z = X0`.
pub fn vanishing_cutoff(cfg: &ConfigTriple, z: StratumId, power: i32) -> Expr {
    let axes = cfg.conormal_axes(StratumId::X0, z);
    if axes.is_empty() {
        return Expr::real(0.0);
    }
    let sum = axes
        .iter()
        .map(|&a| Expr::add(Expr::one(), Expr::neg(Expr::Cos(a))))
        .reduce(Expr::add)
        .expect("nonempty");
    let base = Expr::mul(Expr::real(1.0 / (2.0 * axes.len() as f64)), sum);
    Expr::pow(base, power)
}

pub fn nonvanishing_cutoff() -> Expr {
    Expr::add(Expr::one(), Expr::mul(Expr::real(0.5), Expr::Cos(1)))
}

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * ((x + std::f64::consts::PI) / t).floor()
}

/// Checks by sampling that `|φ(x)| ≤ dist(x, z)^4` within distance `1/2` of `z`.
pub fn check_vanishing(cutoff: &Expr, cfg: &ConfigTriple, z: StratumId) -> Result<()> {
    let normal = cfg.conormal_axes(StratumId::X0, z);
    let n = cfg.n();
    let xi = vec![0.0; n];
    let g = TorusGrid::torus(1..=n, 16);
    let mut bad = None;
    g.for_each(n, |_, x| {
        let mut y = x.to_vec();
        for &a in &normal {
            y[a - 1] = wrap(y[a - 1]) / 8.0;
        }
        let d = normal.iter().map(|&a| y[a - 1] * y[a - 1]).sum::<f64>().sqrt();
        if d <= 0.5 && cutoff.eval(&y, &xi).norm() > d.powi(4) + 1e-300 && bad.is_none() {
            bad = Some(d);
        }
    });
    match bad {
        None => Ok(()),
        Some(d) => Err(MorError::Usage(format!("cutoff `{cutoff}` does not vanish near {z} (distance {d:.3})"))),
    }
}

fn sample(e: &Expr, g: &TorusGrid, width: usize) -> GridFn {
    let xi = vec![0.0; width];
    g.sample(width, |x| e.eval(x, &xi))
}

fn packet(g: &TorusGrid, width: usize, lambda: f64, kappa: f64) -> GridFn {
    g.sample(width, |x| {
        let (mut phase, mut amp) = (0.0, 0.0);
        for &a in &g.axes {
            phase += lambda * x[a - 1];
            amp += kappa * (x[a - 1].cos() - 1.0);
        }
        Complex64::from_polar(amp.exp(), phase)
    })
}

/// Least-squares slope of `log y` against `log x`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Output norms of `φ D φ u_λ` (no cutoff when `None`) over the schedule.
pub fn probe_norms(w: &Word, cfg: &ConfigTriple, cutoff: Option<&Expr>, s: &ProbeSettings) -> Result<Vec<f64>> {
    let grids = GridFamily::torus(cfg, s.n);
    let op = word_operator(w, &grids)?;
    let width = cfg.n().max(cutoff.map_or(0, Expr::max_axis));
    let (phi_in, phi_out) = match cutoff {
        Some(c) => (Some(sample(c, &op.domain, width)), Some(sample(c, &op.codomain, width))),
        None => (None, None),
    };
    s.lambdas
        .iter()
        .map(|&lam| {
            let mut u = packet(&op.domain, width, lam, s.kappa);
            if let Some(p) = &phi_in {
                u *= p;
            }
            let mut v = op.apply(&u)?;
            if let Some(p) = &phi_out {
                v *= p;
            }
            Ok(l2_norm(&op.codomain, &v))
        })
        .collect()
}

pub fn fit_order(lambdas: &[f64], norms: &[f64], reference: &[f64]) -> Result<FittedOrder> {
    if norms.iter().zip(reference).all(|(n, r)| *n <= 1e-13 * r) {
        return Ok(FittedOrder::Annihilated);
    }
    if norms.iter().any(|v| !v.is_finite() || *v < 1e-280) {
        return Err(MorError::DegenerateFit("output norms underflow".into()));
    }
    Ok(FittedOrder::Finite(slope(lambdas, norms)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub uncut: f64,
    pub cut: FittedOrder,
    pub norms_uncut: Vec<f64>,
    pub norms_cut: Vec<f64>,
}

impl ProbeResult {
    pub fn drop(&self) -> f64 {
        self.uncut - self.cut.value()
    }
}

/// Fitted orders of `D` and of `φ D φ`.
pub fn localization_probe(w: &Word, cutoff: &Expr, cfg: &ConfigTriple, s: &ProbeSettings) -> Result<ProbeResult> {
    if !cutoff.freq_axes().is_empty() {
        return Err(MorError::Unsupported("cutoffs are functions of position only".into()));
    }
    let norms_uncut = probe_norms(w, cfg, None, s)?;
    let norms_cut = probe_norms(w, cfg, Some(cutoff), s)?;
    let uncut = match fit_order(&s.lambdas, &norms_uncut, &norms_uncut)? {
        FittedOrder::Finite(v) => v,
        FittedOrder::Annihilated => return Err(MorError::DegenerateFit("the uncut word annihilates every packet".into())),
    };
    let cut = fit_order(&s.lambdas, &norms_cut, &norms_uncut)?;
    Ok(ProbeResult { uncut, cut, norms_uncut, norms_cut })
}

/// Vanishing and nonvanishing probes on the representative of every type.
pub fn localization_report(cfg: &ConfigTriple, s: &ProbeSettings) -> Result<Report> {
    let mut values = serde_json::Map::new();
    let mut pass = true;
    for t in GeneratorType::ALL {
        let w = representative(t, cfg)?;
        let z = w.localization();
        let vanishing = vanishing_cutoff(cfg, z, s.power);
        check_vanishing(&vanishing, cfg, z)?;
        let cut = localization_probe(&w, &vanishing, cfg, s)?;
        let kept = localization_probe(&w, &nonvanishing_cutoff(), cfg, s)?;
        let ok = cut.drop() >= VANISHING_DROP && kept.drop().abs() <= NONVANISHING_GAP;
        pass &= ok;
        values.insert(
            t.label().to_string(),
            json!({
                "word": w.to_string(),
                "stratum": z.to_string(),
                "order": cut.uncut,
                "vanishing": match cut.cut { FittedOrder::Finite(v) => json!(v), FittedOrder::Annihilated => json!("annihilated") },
                "nonvanishing": kept.cut.value(),
                "drop": if cut.drop().is_finite() { json!(cut.drop()) } else { json!("infinite") },
                "gap": kept.drop().abs(),
                "pass": ok,
            }),
        );
    }
    Ok(Report::new(
        "localization",
        json!({"N": s.n, "kappa": s.kappa, "power": s.power, "drop": VANISHING_DROP, "gap": NONVANISHING_GAP}),
        json!(s.lambdas),
        serde_json::Value::Object(values),
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
    fn cutoffs_vanish_where_claimed() {
        for z in [StratumId::X1, StratumId::X2, StratumId::X12] {
            check_vanishing(&vanishing_cutoff(&cfg(), z, 3), &cfg(), z).unwrap();
            assert!(check_vanishing(&nonvanishing_cutoff(), &cfg(), z).is_err());
        }
        check_vanishing(&vanishing_cutoff(&cfg(), StratumId::X0, 3), &cfg(), StratumId::X0).unwrap();
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((slope(&xs, &ys) + 1.5).abs() < 1e-12);
        assert_eq!(fit_order(&xs, &[0.0; 3], &ys).unwrap(), FittedOrder::Annihilated);
        assert!(matches!(fit_order(&xs, &[1.0, 0.0, 1.0], &[1.0; 3]), Err(MorError::DegenerateFit(_))));
    }
}
