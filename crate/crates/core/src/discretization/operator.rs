//! Linear operators between grid function spaces.

use ndarray::{Array2, ArrayD, Axis as NdAxis, IxDyn};
use num_complex::Complex64;

use crate::error::{MorError, Result};
use crate::expr::Expr;

use super::fft::{forward, inverse};
use super::grid::{GridFn, TorusGrid};

/// Largest number of separated terms tried before falling back to a dense matrix.
const SEPARATION_CAP: usize = 64;
/// Largest grid on which a non-separable symbol is quantized densely.
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub enum OpKind {
    /// `F^{-1} m F`, values in FFT order.
    Multiplier(GridFn),
    /// Pointwise product.
    Pointwise(GridFn),
    /// `Σ_i p_i · F^{-1} q_i F`.
    Separable(Vec<(GridFn, GridFn)>),
    /// Selects the nodes where the dropped axes are 0.
    Restriction,
    /// Places values on the nodes where the new axes are 0, weighted by `1/h^ν`.
    Extension,
    Dense(Array2<Complex64>),
    /// Factors listed leftmost first, so the last one is applied first.
    Product(Vec<GridOperator>),
    Scaled(Complex64, Box<GridOperator>),
}

#[derive(Debug, Clone)]
pub struct GridOperator {
    pub domain: TorusGrid,
    pub codomain: TorusGrid,
    pub kind: OpKind,
    /// Order of the operator when it is known.
    pub order: Option<f64>,
}

fn check_axes(e: &Expr, g: &TorusGrid) -> Result<()> {
    let used = e.space_axes().union(&e.freq_axes()).copied().collect::<Vec<_>>();
    match used.iter().find(|a| g.position_of(**a).is_none()) {
        Some(a) => Err(MorError::AxisMismatch(format!("symbol uses axis {a}, which the grid lacks"))),
        None => Ok(()),
    }
}

fn width(e: &Expr, g: &TorusGrid) -> usize {
    e.max_axis().max(g.width())
}

fn freq_values(e: &Expr, g: &TorusGrid) -> GridFn {
    let w = width(e, g);
    let mut out = g.zeros();
    let x = vec![0.0; w];
    g.for_each_frequency(w, |idx, xi| out[idx] = e.eval(&x, xi));
    out
}

fn pos_values(e: &Expr, g: &TorusGrid) -> GridFn {
    let w = width(e, g);
    let xi = vec![0.0; w];
    g.sample(w, |x| e.eval(x, &xi))
}

/// Collocation quantization: `(Op a u)(x_j) = Σ_ξ a(x_j, ξ) û(ξ) e^{i x_j ξ}`.
pub fn quantize(e: &Expr, g: &TorusGrid) -> Result<GridOperator> {
    check_axes(e, g)?;
    let kind = if e.space_axes().is_empty() {
        OpKind::Multiplier(freq_values(e, g))
    } else if e.freq_axes().is_empty() {
        OpKind::Pointwise(pos_values(e, g))
    } else if let Some(terms) = e.separate(SEPARATION_CAP) {
        OpKind::Separable(terms.iter().map(|(p, q)| (pos_values(p, g), freq_values(q, g))).collect())
    } else if g.len() <= DENSE_LIMIT {
        OpKind::Dense(dense_collocation(e, g))
    } else {
        return Err(MorError::Unsupported(format!(
            "symbol `{e}` does not separate and the grid has {} nodes",
            g.len()
        )));
    };
    Ok(GridOperator { domain: g.clone(), codomain: g.clone(), kind, order: None })
}

fn dense_collocation(e: &Expr, g: &TorusGrid) -> Array2<Complex64> {
    let n = g.len();
    let w = width(e, g);
    let mut xs = Vec::with_capacity(n);
    g.for_each(w, |_, x| xs.push(x.to_vec()));
    let mut xis = Vec::with_capacity(n);
    g.for_each_frequency(w, |_, xi| xis.push(xi.to_vec()));
    let mut m = Array2::zeros((n, n));
    for (j, xj) in xs.iter().enumerate() {
        let sym: Vec<Complex64> = xis.iter().map(|xi| e.eval(xj, xi)).collect();
        for (i, xi_node) in xs.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (xi, a) in xis.iter().zip(&sym) {
                let phase: f64 = g.axes.iter().map(|&ax| (xj[ax - 1] - xi_node[ax - 1]) * xi[ax - 1]).sum();
                s += a * Complex64::from_polar(1.0, phase);
            }
            m[[j, i]] = s / n as f64;
        }
    }
    m
}

/// Fourier multiplier `(1 + |ξ|²)^{s/2}` on all grid axes.
pub fn order_reduction(g: &TorusGrid, s: f64) -> GridOperator {
    let e = Expr::bracket(g.axes.clone(), s);
    let mut op = quantize(&e, g).expect("bracket on the grid's own axes");
    op.order = Some(s);
    op
}

fn dropped_axes(from: &TorusGrid, to: &TorusGrid) -> Result<Vec<usize>> {
    let mut dropped = Vec::new();
    for (i, &a) in from.axes.iter().enumerate() {
        match to.position_of(a) {
            Some(j) => {
                if to.points[j] != from.points[i]
                    || (to.period[j] - from.period[i]).abs() > 1e-12 * from.period[i]
                    || (to.origin[j] - from.origin[i]).abs() > 1e-12 * from.period[i]
                {
                    return Err(MorError::ShapeMismatch(format!("axis {a} is discretized differently")));
                }
            }
            None => {
                from.zero_index(i)?;
                dropped.push(i);
            }
        }
    }
    if to.axes.iter().any(|a| from.position_of(*a).is_none()) {
        return Err(MorError::AxisMismatch("target grid has axes the source lacks".into()));
    }
    Ok(dropped)
}

/// `u ↦ u|_{y=0}` from `from` onto the sub-grid `to`.
pub fn restriction(from: &TorusGrid, to: &TorusGrid) -> Result<GridOperator> {
    dropped_axes(from, to)?;
    Ok(GridOperator { domain: from.clone(), codomain: to.clone(), kind: OpKind::Restriction, order: None })
}

/// `q ↦ q ⊗ δ_h(y)` from the sub-grid `from` onto `to`, the adjoint of restriction.
pub fn extension(from: &TorusGrid, to: &TorusGrid) -> Result<GridOperator> {
    dropped_axes(to, from)?;
    Ok(GridOperator { domain: from.clone(), codomain: to.clone(), kind: OpKind::Extension, order: None })
}

fn restrict(u: &GridFn, from: &TorusGrid, to: &TorusGrid) -> GridFn {
    let dropped = dropped_axes(from, to).expect("checked at construction");
    let mut v = u.clone();
    for &i in dropped.iter().rev() {
        let j = from.zero_index(i).expect("checked");
        v = v.index_axis(NdAxis(i), j).to_owned();
    }
    v
}

fn extend(q: &GridFn, from: &TorusGrid, to: &TorusGrid) -> GridFn {
    let dropped = dropped_axes(to, from).expect("checked at construction");
    let weight: f64 = dropped.iter().map(|&i| 1.0 / to.spacing(i)).product();
    let mut out = to.zeros();
    // index of the target slice: zero nodes on the dropped axes, free elsewhere
    let mut idx = vec![0usize; to.dim()];
    let free: Vec<usize> = (0..to.dim()).filter(|i| !dropped.contains(i)).collect();
    for &i in &dropped {
        idx[i] = to.zero_index(i).expect("checked");
    }
    for (src_idx, v) in q.indexed_iter() {
        for (k, &i) in free.iter().enumerate() {
            idx[i] = src_idx[k];
        }
        out[IxDyn(&idx)] = v * weight;
    }
    out
}

fn apply_multiplier(m: &GridFn, u: &GridFn) -> GridFn {
    let mut uh = forward(u);
    uh.zip_mut_with(m, |a, b| *a *= b);
    inverse(&uh)
}

impl GridOperator {
    pub fn apply(&self, u: &GridFn) -> Result<GridFn> {
        if u.shape() != self.domain.points.as_slice() {
            return Err(MorError::ShapeMismatch(format!(
                "operator expects shape {:?}, got {:?}",
                self.domain.points,
                u.shape()
            )));
        }
        Ok(match &self.kind {
            OpKind::Multiplier(m) => apply_multiplier(m, u),
            OpKind::Pointwise(p) => u * p,
            OpKind::Separable(terms) => {
                let uh = forward(u);
                let mut out = self.codomain.zeros();
                for (p, q) in terms {
                    let mut t = uh.clone();
                    t.zip_mut_with(q, |a, b| *a *= b);
                    out += &(inverse(&t) * p);
                }
                out
            }
            OpKind::Restriction => restrict(u, &self.domain, &self.codomain),
            OpKind::Extension => extend(u, &self.domain, &self.codomain),
            OpKind::Dense(m) => {
                let flat = u.iter().copied().collect::<ndarray::Array1<_>>();
                let r = m.dot(&flat);
                ArrayD::from_shape_vec(self.codomain.shape(), r.to_vec()).expect("shape")
            }
            OpKind::Product(fs) => {
                let mut v = u.clone();
                for f in fs.iter().rev() {
                    v = f.apply(&v)?;
                }
                v
            }
            OpKind::Scaled(c, op) => op.apply(u)? * *c,
        })
    }

    /// Materializes the operator column by column.
    pub fn to_dense(&self) -> Result<Array2<Complex64>> {
        let (n, m) = (self.codomain.len(), self.domain.len());
        let mut out = Array2::zeros((n, m));
        let mut e = self.domain.zeros();
        for j in 0..m {
            let slice = e.as_slice_mut().expect("standard layout");
            slice.fill(Complex64::new(0.0, 0.0));
            slice[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e)?;
            for (i, v) in col.iter().enumerate() {
                out[[i, j]] = *v;
            }
        }
        Ok(out)
    }

    /// `self ∘ right`.
    pub fn compose(&self, right: &GridOperator) -> Result<GridOperator> {
        if self.domain != right.codomain {
            return Err(MorError::ShapeMismatch("operators do not chain".into()));
        }
        let order = match (self.order, right.order) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let mut factors = match &self.kind {
            OpKind::Product(f) => f.clone(),
            _ => vec![self.clone()],
        };
        match &right.kind {
            OpKind::Product(f) => factors.extend(f.iter().cloned()),
            _ => factors.push(right.clone()),
        }
        Ok(GridOperator { domain: right.domain.clone(), codomain: self.codomain.clone(), kind: OpKind::Product(factors), order })
    }

    pub fn scaled(&self, c: Complex64) -> GridOperator {
        GridOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            kind: OpKind::Scaled(c, Box::new(self.clone())),
            order: self.order,
        }
    }

    pub fn identity(g: &TorusGrid) -> GridOperator {
        GridOperator {
            domain: g.clone(),
            codomain: g.clone(),
            kind: OpKind::Pointwise(ArrayD::from_elem(g.shape(), Complex64::new(1.0, 0.0))),
            order: Some(0.0),
        }
    }
}

/// `(Σ_ξ (1 + |ξ|²)^s |û(ξ)|² · vol)^{1/2}`.
pub fn sobolev_norm(g: &TorusGrid, u: &GridFn, s: f64) -> f64 {
    let uh = forward(u);
    let mut acc = 0.0;
    g.for_each_frequency(g.width(), |idx, xi| {
        let r2: f64 = 1.0 + g.axes.iter().map(|&a| xi[a - 1] * xi[a - 1]).sum::<f64>();
        acc += r2.powf(s) * uh[idx].norm_sqr();
    });
    (acc * g.volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{inner, l2_norm};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(g: &TorusGrid, seed: u64) -> GridFn {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ArrayD::from_shape_fn(g.shape(), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn max_diff(a: &GridFn, b: &GridFn) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn quantization_examples() {
        let g = TorusGrid::torus([1, 2, 3], 8);
        let u = random_fn(&g, 1);
        let id = quantize(&Expr::one(), &g).unwrap();
        assert!(max_diff(&id.apply(&u).unwrap(), &u) < 1e-13);

        let mode = g.sample(3, |x| Complex64::new(0.0, x[1]).exp());
        let half = quantize(&Expr::bracket([1, 2, 3], -2.0), &g).unwrap().apply(&mode).unwrap();
        assert!(max_diff(&half, &mode.mapv(|v| v * 0.5)) < 1e-13);

        let cosx = quantize(&Expr::Cos(1), &g).unwrap().apply(&u).unwrap();
        let direct = &u * &g.sample(3, |x| Complex64::new(x[0].cos(), 0.0));
        assert!(max_diff(&cosx, &direct) < 1e-14);
    }

    #[test]
    fn separable_matches_product_and_dense() {
        let g = TorusGrid::torus([1, 2], 8);
        let u = random_fn(&g, 2);
        let p = Expr::add(Expr::real(2.0), Expr::Sin(2));
        let q = Expr::mul(Expr::Xi(1), Expr::bracket([1, 2], -1.0));
        let sep = quantize(&Expr::mul(p.clone(), q.clone()), &g).unwrap();
        let two = quantize(&p, &g).unwrap().compose(&quantize(&q, &g).unwrap()).unwrap();
        assert!(max_diff(&sep.apply(&u).unwrap(), &two.apply(&u).unwrap()) < 1e-13);
        let dense = dense_collocation(&Expr::mul(p, q), &g);
        let flat = u.iter().copied().collect::<ndarray::Array1<_>>();
        let d = dense.dot(&flat);
        let s = sep.apply(&u).unwrap();
        for (a, b) in d.iter().zip(s.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let m = sep.to_dense().unwrap();
        assert!((&m - &dense).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn restriction_and_extension() {
        let g0 = TorusGrid::torus([1, 2, 3], 8);
        let g1 = TorusGrid::torus([1, 2], 8);
        let r = restriction(&g0, &g1).unwrap();
        let e = extension(&g1, &g0).unwrap();
        let one = ArrayD::from_elem(g0.shape(), Complex64::new(1.0, 0.0));
        assert!(r.apply(&one).unwrap().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let s = g0.sample(3, |x| Complex64::new(x[2].sin(), 0.0));
        assert!(r.apply(&s).unwrap().iter().all(|v| v.norm() < 1e-15));
        let mut delta = g0.zeros();
        delta[[3, 5, 0]] = Complex64::new(1.0, 0.0);
        let rd = r.apply(&delta).unwrap();
        assert_eq!(rd[[3, 5]], Complex64::new(1.0, 0.0));
        assert_eq!(rd.iter().filter(|v| v.norm() > 0.0).count(), 1);

        let q = ArrayD::from_elem(g1.shape(), Complex64::new(1.0, 0.0));
        let eq = e.apply(&q).unwrap();
        assert_relative_eq!(eq[[0, 0, 0]].re, 8.0 / (2.0 * std::f64::consts::PI), epsilon = 1e-14);
        assert_eq!(eq[[0, 0, 1]], Complex64::new(0.0, 0.0));
        let q = random_fn(&g1, 3);
        let back = r.apply(&e.apply(&q).unwrap()).unwrap();
        let h = g0.spacing(2);
        assert!(max_diff(&back, &q.mapv(|v| v / h)) < 1e-13);

        let u = random_fn(&g0, 4);
        let lhs = inner(&g0, &e.apply(&q).unwrap(), &u);
        let rhs = inner(&g1, &q, &r.apply(&u).unwrap());
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn order_reductions_and_sobolev_norms() {
        let g = TorusGrid::torus([1, 2], 16);
        let u = random_fn(&g, 5);
        assert!(max_diff(&order_reduction(&g, 0.0).apply(&u).unwrap(), &u) < 1e-13);
        let mode = g.sample(2, |x| Complex64::new(0.0, 2.0 * x[1]).exp());
        let five = order_reduction(&g, 2.0).apply(&mode).unwrap();
        assert!(max_diff(&five, &mode.mapv(|v| v * 5.0)) < 1e-12);
        let rt = order_reduction(&g, 1.5).apply(&order_reduction(&g, -1.5).apply(&u).unwrap()).unwrap();
        assert!(max_diff(&rt, &u) < 1e-12);

        let g1 = TorusGrid::torus([1], 8);
        let one = ArrayD::from_elem(g1.shape(), Complex64::new(1.0, 0.0));
        assert_relative_eq!(sobolev_norm(&g1, &one, 0.0), (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-13);
        let n0 = sobolev_norm(&g, &mode, 0.0);
        assert_relative_eq!(sobolev_norm(&g, &mode, 1.0), n0 * 5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(n0, l2_norm(&g, &mode), max_relative = 1e-12);
    }

    #[test]
    fn box_grids_quantize_physical_frequencies() {
        let g = TorusGrid::boxed(vec![1], &[0.5], &[2.0], vec![32]);
        // frequency 2π·3/4
        let xi0 = 2.0 * std::f64::consts::PI * 3.0 / 4.0;
        let mode = g.sample(1, |x| Complex64::new(0.0, xi0 * x[0]).exp());
        let out = quantize(&Expr::Xi(1), &g).unwrap().apply(&mode).unwrap();
        assert!(max_diff(&out, &mode.mapv(|v| v * xi0)) < 1e-12);
        assert_eq!(g.zero_index(0).unwrap(), 12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn parseval(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 8, 12])) {
            let g = TorusGrid::torus([1, 3], n);
            let (u, v) = (random_fn(&g, seed), random_fn(&g, seed ^ 0x5555));
            let (uh, vh) = (forward(&u), forward(&v));
            let freq: Complex64 = uh.iter().zip(vh.iter()).map(|(a, b)| a * b.conj()).sum::<Complex64>() * g.volume();
            let pos = inner(&g, &u, &v);
            prop_assert!((freq - pos).norm() <= 1e-12 * (1.0 + pos.norm()));
        }
    }
}
