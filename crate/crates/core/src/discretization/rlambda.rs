//! The scaling family `R_λ u(z, y) = λ^{k/4+ν/2} e^{iλ z·ζ0} u(λ^{1/2}(z − z0), λ y)`
//! sampled on boxes adapted to `λ`.
//!
//! For each `λ` the physical box has half-width `L λ^{-1/2}` around `z0` in the
//! tangential directions and `L / λ` around 0 in the normal ones, so its nodes
//! are exactly the images of the nodes of the fixed scaled box `[−L, L)^{k+ν}`.
//! `R_λ` and `R_λ^{-1}` are then pointwise maps between the two arrays.

use num_complex::Complex64;

use crate::error::{MorError, Result};
use crate::geometry::Axis;

use super::grid::{GridFn, TorusGrid};

/// `p(t) e^{−(t−c)²/(2σ²)}` with `p(t) = Σ poly[i] (t − c)^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussFactor {
    pub center: f64,
    pub sigma: f64,
    pub poly: Vec<f64>,
}

impl GaussFactor {
    pub fn gaussian(sigma: f64) -> Self {
        Self { center: 0.0, sigma, poly: vec![1.0] }
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t - self.center;
        let p = self.poly.iter().rev().fold(0.0, |acc, c| acc * s + c);
        p * (-s * s / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        // Simpson on a fine grid; the integrand is smooth and rapidly decaying
        let n = 4000;
        let h = (b - a) / n as f64;
        let f = |t: f64| self.value(t).powi(2);
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn reach(&self) -> f64 {
        40.0 * self.sigma
    }

    pub fn norm_sqr(&self) -> f64 {
        self.mass(self.center - self.reach(), self.center + self.reach())
    }

    /// Fraction of the squared norm outside `[−l, l]`.
    pub fn tail_fraction(&self, l: f64) -> f64 {
        let (lo, hi) = (self.center - self.reach(), self.center + self.reach());
        let mut out = 0.0;
        if hi > l {
            out += self.mass(l.max(lo), hi);
        }
        if lo < -l {
            out += self.mass(lo, (-l).min(hi));
        }
        out / self.norm_sqr()
    }
}

/// Tensor product of one [`GaussFactor`] per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub factors: Vec<GaussFactor>,
}

impl TestFunction {
    pub fn value(&self, t: &[f64]) -> f64 {
        self.factors.iter().zip(t).map(|(f, &x)| f.value(x)).product()
    }

    pub fn norm(&self) -> f64 {
        self.factors.iter().map(GaussFactor::norm_sqr).product::<f64>().sqrt()
    }

    pub fn tail_fraction(&self, l: f64) -> f64 {
        self.factors.iter().map(|f| f.tail_fraction(l)).sum()
    }

    /// Samples on a grid whose array axes are the factor coordinates.
    pub fn sample(&self, g: &TorusGrid) -> GridFn {
        assert_eq!(g.dim(), self.factors.len(), "one factor per grid axis");
        let mut out = g.zeros();
        let mut t = vec![0.0; g.dim()];
        for (idx, v) in out.indexed_iter_mut() {
            for (i, ti) in t.iter_mut().enumerate() {
                *ti = g.node(i, idx[i]);
            }
            *v = Complex64::new(self.value(&t), 0.0);
        }
        out
    }
}

/// Tangential and normal axes of one manifold relative to the stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxLayout {
    pub tangential: Vec<Axis>,
    pub normal: Vec<Axis>,
}

impl BoxLayout {
    fn all_axes(&self) -> Vec<Axis> {
        let mut a: Vec<Axis> = self.tangential.iter().chain(&self.normal).copied().collect();
        a.sort_unstable();
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RLambdaParams {
    /// Base point on the stratum, one entry per tangential axis.
    pub z0: Vec<f64>,
    /// Covariable at `z0`, one entry per tangential axis; nonzero.
    pub zeta0: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Half-width `L` of the scaled box.
    pub half_width: f64,
    /// Points on each normal axis of the scaled box.
    pub normal_points: usize,
    /// Frequency radius of the test functions in scaled units; sets the
    /// tangential resolution together with `λ^{1/2} |ζ0|`.
    pub spectral_radius: f64,
    /// Largest tolerated fraction of `‖f‖²` outside the scaled box.
    pub tail_limit: f64,
}

impl RLambdaParams {
    pub fn validate(&self) -> Result<()> {
        if self.z0.len() != self.zeta0.len() {
            return Err(MorError::ShapeMismatch("z0 and ζ0 need one entry per tangential axis".into()));
        }
        if self.zeta0.iter().all(|v| *v == 0.0) {
            return Err(MorError::Usage("ζ0 must be nonzero".into()));
        }
        if self.lambdas.is_empty() || self.lambdas.windows(2).any(|w| w[0] >= w[1]) || self.lambdas[0] <= 0.0 {
            return Err(MorError::Usage("λ schedule must be positive and strictly increasing".into()));
        }
        Ok(())
    }

    fn lambda_max(&self) -> f64 {
        *self.lambdas.last().expect("validated")
    }

    /// Tangential points per axis, fixed over the schedule so every `λ` shares
    /// one scaled grid.
    pub fn tangential_points(&self) -> Vec<usize> {
        let step = std::f64::consts::PI / self.half_width;
        self.zeta0
            .iter()
            .map(|z| {
                let need = self.lambda_max().sqrt() * z.abs() + self.spectral_radius;
                let n = (2.0 * need / step).ceil() as usize + 1;
                n.div_ceil(16) * 16
            })
            .collect()
    }

    fn per_axis(&self, layout: &BoxLayout, tangential_axes: &[Axis]) -> Vec<(Axis, Option<usize>, usize)> {
        let tp = self.tangential_points();
        layout
            .all_axes()
            .into_iter()
            .map(|a| match tangential_axes.iter().position(|&t| t == a) {
                Some(i) => (a, Some(i), tp[i]),
                None => (a, None, self.normal_points),
            })
            .collect()
    }

    /// The fixed box `[−L, L)` in scaled coordinates.
    pub fn scaled_grid(&self, layout: &BoxLayout, tangential_axes: &[Axis]) -> TorusGrid {
        let spec = self.per_axis(layout, tangential_axes);
        let axes = spec.iter().map(|s| s.0).collect();
        let d = spec.len();
        TorusGrid::boxed(axes, &vec![0.0; d], &vec![self.half_width; d], spec.iter().map(|s| s.2).collect())
    }

    /// The physical box for `λ`. `tangential_axes` lists the stratum's axes in
    /// the order of `z0`.
    pub fn physical_grid(&self, lambda: f64, layout: &BoxLayout, tangential_axes: &[Axis]) -> TorusGrid {
        let spec = self.per_axis(layout, tangential_axes);
        let axes = spec.iter().map(|s| s.0).collect();
        let centers: Vec<f64> = spec.iter().map(|s| s.1.map_or(0.0, |i| self.z0[i])).collect();
        let widths: Vec<f64> = spec
            .iter()
            .map(|s| match s.1 {
                Some(_) => self.half_width / lambda.sqrt(),
                None => self.half_width / lambda,
            })
            .collect();
        TorusGrid::boxed(axes, &centers, &widths, spec.iter().map(|s| s.2).collect())
    }

    fn phase_and_amplitude(&self, lambda: f64, layout: &BoxLayout, tangential_axes: &[Axis]) -> GridFn {
        let g = self.physical_grid(lambda, layout, tangential_axes);
        let k = layout.tangential.len() as f64;
        let nu = layout.normal.len() as f64;
        let amp = lambda.powf(k / 4.0 + nu / 2.0);
        let pos: Vec<Option<usize>> = g.axes.iter().map(|a| tangential_axes.iter().position(|t| t == a)).collect();
        let mut out = g.zeros();
        for (idx, v) in out.indexed_iter_mut() {
            let mut phase = 0.0;
            for (i, p) in pos.iter().enumerate() {
                if let Some(t) = p {
                    phase += lambda * g.node(i, idx[i]) * self.zeta0[*t];
                }
            }
            *v = Complex64::from_polar(amp, phase);
        }
        out
    }

    /// Samples `R_λ f` on the physical box for `λ`; `f` is given on the scaled box.
    pub fn apply(
        &self,
        lambda: f64,
        layout: &BoxLayout,
        tangential_axes: &[Axis],
        f: &TestFunction,
    ) -> Result<(TorusGrid, GridFn)> {
        let tail = f.tail_fraction(self.half_width);
        if tail > self.tail_limit {
            return Err(MorError::TailMass { mass: tail, limit: self.tail_limit });
        }
        let scaled = f.sample(&self.scaled_grid(layout, tangential_axes));
        let g = self.physical_grid(lambda, layout, tangential_axes);
        Ok((g, scaled * self.phase_and_amplitude(lambda, layout, tangential_axes)))
    }

    /// `R_λ^{-1} w` for `w` on the physical box, returned on the scaled box.
    pub fn invert(&self, lambda: f64, layout: &BoxLayout, tangential_axes: &[Axis], w: &GridFn) -> GridFn {
        let pa = self.phase_and_amplitude(lambda, layout, tangential_axes);
        let mut out = w.clone();
        out.zip_mut_with(&pa, |a, b| *a /= b);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{inner, l2_norm};

    fn params() -> RLambdaParams {
        RLambdaParams {
            z0: vec![0.3, 0.0],
            zeta0: vec![2.0, 0.0],
            lambdas: vec![1.0, 4.0, 16.0],
            half_width: 8.0,
            normal_points: 64,
            spectral_radius: 8.0,
            tail_limit: 1e-8,
        }
    }

    fn layout() -> BoxLayout {
        BoxLayout { tangential: vec![1, 2], normal: vec![3] }
    }

    fn f() -> TestFunction {
        TestFunction {
            factors: vec![
                GaussFactor { center: 0.2, sigma: 1.0, poly: vec![1.0, 0.5] },
                GaussFactor::gaussian(0.8),
                GaussFactor::gaussian(1.2),
            ],
        }
    }

    #[test]
    fn unit_lambda_is_plain_sampling() {
        let p = RLambdaParams { z0: vec![0.0, 0.0], zeta0: vec![1e-300, 0.0], ..params() };
        let (g, s) = p.apply(1.0, &layout(), &[1, 2], &f()).unwrap();
        let direct = f().sample(&g);
        assert!(s.iter().zip(direct.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn unitary_and_weakly_null() {
        let p = params();
        let (lay, tang) = (layout(), [1, 2]);
        let norm = f().norm();
        let mut pairings = Vec::new();
        for &lam in &p.lambdas {
            let (g, s) = p.apply(lam, &lay, &tang, &f()).unwrap();
            assert!((l2_norm(&g, &s) - norm).abs() <= 1e-6 * norm);
            let w = g.sample(3, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 4.0).exp(), 0.0));
            pairings.push(inner(&g, &s, &w).norm());
            let back = p.invert(lam, &lay, &tang, &s);
            let scaled = f().sample(&p.scaled_grid(&lay, &tang));
            assert!(back.iter().zip(scaled.iter()).all(|(a, b)| (a - b).norm() < 1e-9));
        }
        assert!(pairings.windows(2).all(|w| w[1] < w[0]), "{pairings:?}");
    }

    #[test]
    fn tail_guard() {
        let p = RLambdaParams { half_width: 2.0, ..params() };
        assert!(matches!(p.apply(4.0, &layout(), &[1, 2], &f()), Err(MorError::TailMass { .. })));
    }
}
