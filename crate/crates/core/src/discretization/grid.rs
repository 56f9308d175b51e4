//! Uniform periodic grids over a subset of the coordinate axes.
//!
//! Nodes are `origin + j·period/N`, frequencies `2π k / period` with
//! `k ∈ {−N/2, …, N/2 − 1}` stored in FFT order. The forward transform is
//! `û = N^{-d} Σ u e^{−ixξ}`, the inverse `u = Σ û e^{ixξ}`.

use std::f64::consts::PI;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{MorError, Result};
use crate::geometry::Axis;

pub type GridFn = ArrayD<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    /// Global axes, ascending; array axis `i` of a grid function is `axes[i]`.
    pub axes: Vec<Axis>,
    pub origin: Vec<f64>,
    pub period: Vec<f64>,
    pub points: Vec<usize>,
}

impl TorusGrid {
    /// `[0, 2π)` with `n` points on each axis.
    pub fn torus(axes: impl IntoIterator<Item = Axis>, n: usize) -> Self {
        let axes: Vec<Axis> = axes.into_iter().collect();
        let d = axes.len();
        Self::new(axes, vec![0.0; d], vec![2.0 * PI; d], vec![n; d])
    }

    /// Box `Π [c_i − L_i, c_i + L_i)` treated as periodic.
    pub fn boxed(axes: Vec<Axis>, centers: &[f64], half_widths: &[f64], points: Vec<usize>) -> Self {
        let origin = centers.iter().zip(half_widths).map(|(c, l)| c - l).collect();
        let period = half_widths.iter().map(|l| 2.0 * l).collect();
        Self::new(axes, origin, period, points)
    }

    pub fn new(axes: Vec<Axis>, origin: Vec<f64>, period: Vec<f64>, points: Vec<usize>) -> Self {
        let d = axes.len();
        assert!(origin.len() == d && period.len() == d && points.len() == d, "per-axis data");
        assert!(axes.windows(2).all(|w| w[0] < w[1]), "axes must be ascending");
        assert!(points.iter().all(|&n| n >= 2 && n % 2 == 0), "points per axis must be even");
        Self { axes, origin, period, points }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> IxDyn {
        IxDyn(&self.points)
    }

    pub fn zeros(&self) -> GridFn {
        ArrayD::zeros(self.shape())
    }

    pub fn spacing(&self, i: usize) -> f64 {
        self.period[i] / self.points[i] as f64
    }

    /// `h^d`, the weight of one node.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.spacing(i)).product()
    }

    pub fn volume(&self) -> f64 {
        self.period.iter().product()
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.origin[i] + j as f64 * self.spacing(i)
    }

    /// Frequency at FFT index `j` on array axis `i`.
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        let n = self.points[i] as i64;
        let k = if (j as i64) < n / 2 { j as i64 } else { j as i64 - n };
        2.0 * PI * k as f64 / self.period[i]
    }

    pub fn position_of(&self, axis: Axis) -> Option<usize> {
        self.axes.iter().position(|&a| a == axis)
    }

    /// Index of the node at coordinate 0 on array axis `i`.
    pub fn zero_index(&self, i: usize) -> Result<usize> {
        let j = -self.origin[i] / self.spacing(i);
        let r = j.round();
        if (j - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.points[i] {
            return Err(MorError::ShapeMismatch(format!("axis {} has no node at 0", self.axes[i])));
        }
        Ok(r as usize)
    }

    /// Calls `f(index, x)` with a full-length position vector (global axis `a`
    /// at slot `a − 1`, other slots 0).
    pub fn for_each(&self, width: usize, mut f: impl FnMut(&[usize], &[f64])) {
        let mut idx = vec![0usize; self.dim()];
        let mut coords = vec![0.0; width];
        if self.dim() == 0 {
            f(&idx, &coords);
            return;
        }
        loop {
            for (i, &a) in self.axes.iter().enumerate() {
                coords[a - 1] = self.node(i, idx[i]);
            }
            f(&idx, &coords);
            if !advance(&mut idx, &self.points) {
                return;
            }
        }
    }

    /// Like [`TorusGrid::for_each`] over the frequency lattice.
    pub fn for_each_frequency(&self, width: usize, mut f: impl FnMut(&[usize], &[f64])) {
        let mut idx = vec![0usize; self.dim()];
        let mut coords = vec![0.0; width];
        if self.dim() == 0 {
            f(&idx, &coords);
            return;
        }
        loop {
            for (i, &a) in self.axes.iter().enumerate() {
                coords[a - 1] = self.frequency(i, idx[i]);
            }
            f(&idx, &coords);
            if !advance(&mut idx, &self.points) {
                return;
            }
        }
    }

    /// Samples a function of the full-length position vector.
    pub fn sample(&self, width: usize, f: impl Fn(&[f64]) -> Complex64) -> GridFn {
        let mut out = self.zeros();
        self.for_each(width, |idx, x| out[idx] = f(x));
        out
    }

    /// Same grid restricted to the axes in `keep`.
    pub fn sub_grid(&self, keep: &[Axis]) -> Result<TorusGrid> {
        let mut g = TorusGrid { axes: vec![], origin: vec![], period: vec![], points: vec![] };
        for &a in keep {
            let i = self
                .position_of(a)
                .ok_or_else(|| MorError::AxisMismatch(format!("axis {a} is not on the grid")))?;
            g.axes.push(a);
            g.origin.push(self.origin[i]);
            g.period.push(self.period[i]);
            g.points.push(self.points[i]);
        }
        Ok(g)
    }

    /// Largest axis index on the grid.
    pub fn width(&self) -> usize {
        self.axes.last().copied().unwrap_or(0)
    }
}

fn advance(idx: &mut [usize], points: &[usize]) -> bool {
    for p in (0..idx.len()).rev() {
        idx[p] += 1;
        if idx[p] < points[p] {
            return true;
        }
        idx[p] = 0;
    }
    false
}

/// `h^d Σ u v̄`.
pub fn inner(g: &TorusGrid, u: &GridFn, v: &GridFn) -> Complex64 {
    let s: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum();
    s * g.cell_volume()
}

pub fn l2_norm(g: &TorusGrid, u: &GridFn) -> f64 {
    (u.iter().map(|a| a.norm_sqr()).sum::<f64>() * g.cell_volume()).sqrt()
}
