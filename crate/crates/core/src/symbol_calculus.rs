//! Operator-valued symbols on the four strata.
//!
//! At a point `(z, ζ)` of a stratum `Z` every manifold `X ⊇ Z` contributes a
//! model space: functions of the axes of `X` normal to `Z`, discretized on a
//! periodic grid with `M` points per axis (a scalar when there are none).
//! Matrices are held in the orthonormal Fourier basis of those grids, where
//! frozen ψDOs are diagonal; [`OperatorSymbol::to_position`] converts to
//! nodal values for export.

use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::algebra::{Atom, MorMatrix, Word};
use crate::discretization::fft::{forward_unitary, inverse_unitary};
use crate::discretization::{GridFn, TorusGrid};
use crate::error::{MorError, Result};
use crate::expr::SymbolExpr;
use crate::geometry::{Axis, ConfigTriple, Manifold, StratumId};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Full,
    /// Homogeneous principal part; needs `(ζ, η) ≠ 0` everywhere on the lattice.
    Principal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoint {
    pub stratum: StratumId,
    pub z: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Grid points per conormal axis.
    pub m: usize,
    /// Period of the conormal grids; `2π` gives the integer lattice.
    pub period: f64,
    pub mode: EvalMode,
}

impl SymbolPoint {
    pub fn new(stratum: StratumId, z: Vec<f64>, zeta: Vec<f64>, m: usize, cfg: &ConfigTriple) -> Result<Self> {
        let d = cfg.axes(stratum).len();
        if z.len() != d || zeta.len() != d {
            return Err(MorError::AxisMismatch(format!(
                "{stratum} has dimension {d}, got z of length {} and ζ of length {}",
                z.len(),
                zeta.len()
            )));
        }
        if m < 2 || !m.is_multiple_of(2) {
            return Err(MorError::Usage(format!("M must be even and at least 2, got {m}")));
        }
        Ok(Self { stratum, z, zeta, m, period: 2.0 * PI, mode: EvalMode::Full })
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn space(&self, x: Manifold, cfg: &ConfigTriple) -> Result<ModelSpace> {
        if !self.stratum.is_subset_of(x.stratum()) {
            return Err(MorError::StratumMismatch(format!("{} is not contained in {x}", self.stratum)));
        }
        Ok(ModelSpace {
            stratum: self.stratum,
            manifold: x,
            axes: cfg.conormal_axes(x.stratum(), self.stratum),
            points: self.m,
            period: self.period,
        })
    }

    /// Model spaces of the block layout at this stratum, in manifold order.
    pub fn layout(&self, cfg: &ConfigTriple) -> Vec<ModelSpace> {
        self.stratum
            .containing_manifolds()
            .into_iter()
            .map(|x| self.space(x, cfg).expect("containing manifold"))
            .collect()
    }
}

/// Functions of the axes of `manifold` normal to `stratum`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    pub stratum: StratumId,
    pub manifold: Manifold,
    pub axes: Vec<Axis>,
    pub points: usize,
    pub period: f64,
}

impl ModelSpace {
    pub fn len(&self) -> usize {
        self.points.pow(self.axes.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_scalar(&self) -> bool {
        self.axes.is_empty()
    }

    fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    /// Grid with node 0 at the origin.
    pub fn grid(&self) -> TorusGrid {
        let d = self.axes.len();
        TorusGrid::new(self.axes.clone(), vec![0.0; d], vec![self.period; d], vec![self.points; d])
    }

    fn shape(&self) -> IxDyn {
        IxDyn(&vec![self.points; self.axes.len()])
    }

    fn digit(&self, row: usize, j: usize) -> usize {
        let d = self.axes.len();
        (row / self.points.pow((d - 1 - j) as u32)) % self.points
    }

    fn frequency(&self, digit: usize) -> f64 {
        let n = self.points as i64;
        let k = if (digit as i64) < n / 2 { digit as i64 } else { digit as i64 - n };
        2.0 * PI * k as f64 / self.period
    }

    /// For every row of `self`, the row of `sub` obtained by dropping the
    /// axes of `self` missing from `sub`.
    fn projection(&self, sub: &ModelSpace) -> Vec<usize> {
        let keep: Vec<Option<usize>> = self.axes.iter().map(|a| sub.axes.iter().position(|b| b == a)).collect();
        let ds = sub.axes.len();
        (0..self.len())
            .map(|r| {
                keep.iter().enumerate().fold(0, |acc, (j, p)| match p {
                    Some(q) => acc + self.digit(r, j) * self.points.pow((ds - 1 - q) as u32),
                    None => acc,
                })
            })
            .collect()
    }

    /// Descriptor used in exports: `scalar`, `conormal(ν)` for the `X0` space,
    /// `tangent_in_Xk(n_k)` for `X_k` at `X1 ∩ X2`.
    pub fn kind(&self) -> String {
        if self.is_scalar() {
            "scalar".into()
        } else if self.manifold == Manifold::X0 {
            format!("conormal({})", self.axes.len())
        } else {
            format!("tangent_in_{}({})", self.manifold, self.axes.len())
        }
    }
}

impl fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.kind(), self.manifold)
    }
}

/// Block matrix between direct sums of model spaces; `None` blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSymbol {
    pub stratum: StratumId,
    pub rows: Vec<ModelSpace>,
    pub cols: Vec<ModelSpace>,
    pub blocks: Vec<Vec<Option<Array2<C>>>>,
}

impl OperatorSymbol {
    pub fn zero(stratum: StratumId, rows: Vec<ModelSpace>, cols: Vec<ModelSpace>) -> Self {
        let blocks = vec![vec![None; cols.len()]; rows.len()];
        Self { stratum, rows, cols, blocks }
    }

    pub fn identity(stratum: StratumId, spaces: Vec<ModelSpace>) -> Self {
        let mut s = Self::zero(stratum, spaces.clone(), spaces);
        for (i, sp) in s.rows.iter().enumerate() {
            s.blocks[i][i] = Some(Array2::eye(sp.len()));
        }
        s
    }

    fn single(stratum: StratumId, row: ModelSpace, col: ModelSpace, m: Array2<C>) -> Self {
        Self { stratum, rows: vec![row], cols: vec![col], blocks: vec![vec![Some(m)]] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.iter().map(ModelSpace::len).sum(), self.cols.iter().map(ModelSpace::len).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().flatten().all(|b| b.iter().all(|v| *v == C::new(0.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .flatten()
            .map(|b| b.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − other‖_F`; the layouts must agree.
    pub fn distance(&self, other: &OperatorSymbol) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MorError::ShapeMismatch("symbols act between different spaces".into()));
        }
        let mut s = 0.0;
        for (ra, rb) in self.blocks.iter().zip(&other.blocks) {
            for (a, b) in ra.iter().zip(rb) {
                s += match (a, b) {
                    (Some(a), Some(b)) => a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum(),
                    (Some(a), None) | (None, Some(a)) => a.iter().map(|v| v.norm_sqr()).sum(),
                    (None, None) => 0.0,
                };
            }
        }
        Ok(s.sqrt())
    }

    /// The whole block matrix, zeros filled in.
    pub fn dense(&self) -> Array2<C> {
        let (r, c) = self.shape();
        let mut out = Array2::zeros((r, c));
        let mut r0 = 0;
        for (i, rs) in self.rows.iter().enumerate() {
            let mut c0 = 0;
            for (j, cs) in self.cols.iter().enumerate() {
                if let Some(b) = &self.blocks[i][j] {
                    out.slice_mut(ndarray::s![r0..r0 + rs.len(), c0..c0 + cs.len()]).assign(b);
                }
                c0 += cs.len();
            }
            r0 += rs.len();
        }
        out
    }

    /// Same operator acting on nodal values: `U_row^{-1} A U_col`.
    pub fn to_position(&self) -> OperatorSymbol {
        let mut out = self.clone();
        for (i, rs) in self.rows.iter().enumerate() {
            for (j, cs) in self.cols.iter().enumerate() {
                if let Some(b) = &self.blocks[i][j] {
                    let mut m = b.clone();
                    for mut col in m.columns_mut() {
                        let v = inverse_unitary(&as_grid(rs, col.to_vec()));
                        col.iter_mut().zip(v.iter()).for_each(|(a, b)| *a = *b);
                    }
                    for mut row in m.rows_mut() {
                        let v = forward_unitary(&as_grid(cs, row.to_vec()));
                        row.iter_mut().zip(v.iter()).for_each(|(a, b)| *a = *b);
                    }
                    out.blocks[i][j] = Some(m);
                }
            }
        }
        out
    }

    /// Shape descriptors plus row-major `[re, im]` entries in the nodal basis.
    pub fn export(&self) -> Value {
        let pos = self.to_position();
        let desc = |s: &[ModelSpace]| -> Vec<Value> {
            s.iter().map(|m| json!({"manifold": m.manifold.to_string(), "space": m.kind(), "size": m.len()})).collect()
        };
        let blocks: Vec<Vec<Value>> = pos
            .blocks
            .iter()
            .map(|row| {
                row.iter()
                    .map(|b| match b {
                        None => Value::Null,
                        Some(m) => Value::Array(
                            m.rows()
                                .into_iter()
                                .map(|r| Value::Array(r.iter().map(|v| json!([v.re, v.im])).collect()))
                                .collect(),
                        ),
                    })
                    .collect()
            })
            .collect();
        json!({
            "stratum": self.stratum.to_string(),
            "rows": desc(&self.rows),
            "cols": desc(&self.cols),
            "blocks": blocks,
        })
    }
}

fn as_grid(space: &ModelSpace, v: Vec<C>) -> GridFn {
    ArrayD::from_shape_vec(space.shape(), v).expect("length matches space")
}

/// Frozen symbol values on the lattice of `space` (home manifold of `sym`).
fn multiplier(sym: &SymbolExpr, space: &ModelSpace, pt: &SymbolPoint, cfg: &ConfigTriple) -> Vec<C> {
    let n = cfg.n();
    let (mut x, mut xi) = (vec![0.0; n], vec![0.0; n]);
    for (i, &a) in cfg.axes(pt.stratum).iter().enumerate() {
        x[a - 1] = pt.z[i];
        xi[a - 1] = pt.zeta[i];
    }
    (0..space.len())
        .map(|r| {
            for (j, &a) in space.axes.iter().enumerate() {
                xi[a - 1] = space.frequency(space.digit(r, j));
            }
            match pt.mode {
                EvalMode::Full => sym.expr.eval(&x, &xi),
                EvalMode::Principal => sym.eval_principal(&x, &xi),
            }
        })
        .collect()
}

fn check_contains(pt: &SymbolPoint, m: Manifold, atom: &Atom) -> Result<()> {
    if pt.stratum.is_subset_of(m.stratum()) {
        Ok(())
    } else {
        Err(MorError::StratumMismatch(format!("`{atom}` has no symbol on {}", pt.stratum)))
    }
}

/// Applies one atom to the columns of `cols` (coefficients in the domain space).
pub fn apply_atom(atom: &Atom, pt: &SymbolPoint, cfg: &ConfigTriple, cols: Array2<C>) -> Result<Array2<C>> {
    let dom = pt.space(atom.domain(), cfg).map_err(|_| mismatch(atom, pt))?;
    let cod = pt.space(atom.codomain(), cfg).map_err(|_| mismatch(atom, pt))?;
    if cols.nrows() != dom.len() {
        return Err(MorError::ShapeMismatch(format!("{} rows for a space of size {}", cols.nrows(), dom.len())));
    }
    match atom {
        Atom::PsiDO(sym) => {
            check_contains(pt, sym.home, atom)?;
            let d = multiplier(sym, &dom, pt, cfg);
            let mut out = cols;
            for (mut row, v) in out.rows_mut().into_iter().zip(d) {
                row.mapv_inplace(|a| a * v);
            }
            Ok(out)
        }
        Atom::Boundary(_) => {
            let map = dom.projection(&cod);
            let my = (dom.len() / cod.len()) as f64;
            let w = 1.0 / my.sqrt();
            let mut out = Array2::zeros((cod.len(), cols.ncols()));
            for (r, row) in cols.rows().into_iter().enumerate() {
                out.row_mut(map[r]).scaled_add(C::new(w, 0.0), &row);
            }
            Ok(out)
        }
        Atom::Coboundary(_) => {
            let map = cod.projection(&dom);
            let ny = cod.axes.len() - dom.axes.len();
            let my = (cod.len() / dom.len()) as f64;
            let w = 1.0 / (my.sqrt() * cod.spacing().powi(ny as i32));
            let mut out = Array2::zeros((cod.len(), cols.ncols()));
            for (r, mut row) in out.rows_mut().into_iter().enumerate() {
                row.assign(&cols.row(map[r]));
                row.mapv_inplace(|a| a * w);
            }
            Ok(out)
        }
    }
}

fn mismatch(atom: &Atom, pt: &SymbolPoint) -> MorError {
    MorError::StratumMismatch(format!("`{atom}` has no symbol on {}", pt.stratum))
}

pub fn atom_symbol(atom: &Atom, pt: &SymbolPoint, cfg: &ConfigTriple) -> Result<OperatorSymbol> {
    let dom = pt.space(atom.domain(), cfg).map_err(|_| mismatch(atom, pt))?;
    let cod = pt.space(atom.codomain(), cfg).map_err(|_| mismatch(atom, pt))?;
    let m = apply_atom(atom, pt, cfg, Array2::eye(dom.len()))?;
    Ok(OperatorSymbol::single(pt.stratum, cod, dom, m))
}

/// Applies every atom of `w`, rightmost first, to coefficient columns.
pub fn apply_word(w: &Word, pt: &SymbolPoint, cfg: &ConfigTriple, cols: Array2<C>) -> Result<Array2<C>> {
    if !pt.stratum.is_subset_of(w.localization()) {
        return Err(MorError::StratumMismatch(format!(
            "word localized at {} has no symbol on {}",
            w.localization(),
            pt.stratum
        )));
    }
    w.atoms.iter().rev().try_fold(cols, |m, a| apply_atom(a, pt, cfg, m))
}

pub fn word_symbol(w: &Word, pt: &SymbolPoint, cfg: &ConfigTriple) -> Result<OperatorSymbol> {
    let dom = pt.space(w.domain(), cfg)?;
    let cod = pt.space(w.codomain(), cfg)?;
    let m = apply_word(w, pt, cfg, Array2::eye(dom.len()))?;
    Ok(OperatorSymbol::single(pt.stratum, cod, dom, m))
}

/// Applies the symbol of `w` to nodal values on the domain model grid.
pub fn apply_word_nodal(w: &Word, pt: &SymbolPoint, cfg: &ConfigTriple, v: &GridFn) -> Result<GridFn> {
    let dom = pt.space(w.domain(), cfg)?;
    let cod = pt.space(w.codomain(), cfg)?;
    if v.len() != dom.len() {
        return Err(MorError::ShapeMismatch(format!("{} values for a space of size {}", v.len(), dom.len())));
    }
    let coef = forward_unitary(&v.to_shape(dom.shape()).expect("size checked").to_owned());
    let col = Array2::from_shape_vec((dom.len(), 1), coef.iter().copied().collect()).expect("column");
    let out = apply_word(w, pt, cfg, col)?;
    Ok(inverse_unitary(&as_grid(&cod, out.iter().copied().collect())))
}

/// Sum of the symbols of the words localized at a stratum containing `pt`,
/// laid out on the model spaces of every manifold through `pt.stratum`.
pub fn morphism_symbol(m: &MorMatrix, pt: &SymbolPoint, cfg: &ConfigTriple) -> OperatorSymbol {
    let layout = pt.layout(cfg);
    let slot = |x: Manifold| layout.iter().position(|s| s.manifold == x).expect("in layout");
    let mut out = OperatorSymbol::zero(pt.stratum, layout.clone(), layout.clone());
    for e in m.entries() {
        if !pt.stratum.is_subset_of(e.word.localization()) {
            continue;
        }
        let s = word_symbol(&e.word, pt, cfg).expect("word contains the stratum");
        let b = s.blocks[0][0].clone().expect("single block");
        let (i, j) = (slot(e.word.codomain()), slot(e.word.domain()));
        out.blocks[i][j] = Some(match out.blocks[i][j].take() {
            Some(acc) => acc + b,
            None => b,
        });
    }
    out
}

/// Block product `a ∘ b`.
pub fn compose_symbols(a: &OperatorSymbol, b: &OperatorSymbol) -> Result<OperatorSymbol> {
    if a.cols != b.rows {
        return Err(MorError::ShapeMismatch(format!(
            "left factor acts on [{}] but right factor lands in [{}]",
            list(&a.cols),
            list(&b.rows)
        )));
    }
    let mut out = OperatorSymbol::zero(a.stratum, a.rows.clone(), b.cols.clone());
    for i in 0..a.rows.len() {
        for j in 0..b.cols.len() {
            let mut acc: Option<Array2<C>> = None;
            for k in 0..a.cols.len() {
                if let (Some(x), Some(y)) = (&a.blocks[i][k], &b.blocks[k][j]) {
                    let p = x.dot(y);
                    acc = Some(match acc {
                        Some(s) => s + p,
                        None => p,
                    });
                }
            }
            out.blocks[i][j] = acc;
        }
    }
    Ok(out)
}

fn list(s: &[ModelSpace]) -> String {
    s.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::census::representative;
    use crate::algebra::{fuse_trace, GeneratorType};
    use crate::expr::Expr;
    use crate::Order;
    use approx::assert_relative_eq;

    fn cfg() -> ConfigTriple {
        ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap()
    }

    fn pt(z: StratumId, m: usize) -> SymbolPoint {
        let d = cfg().axes(z).len();
        SymbolPoint::new(z, vec![0.3; d], vec![1.5; d], m, &cfg()).unwrap()
    }

    fn op(home: Manifold, e: Expr, m: i64) -> Atom {
        Atom::PsiDO(SymbolExpr::new(e, Order::from(m), home, &cfg()).unwrap())
    }

    #[test]
    fn identity_psido_has_identity_symbol() {
        for z in StratumId::ALL {
            let s = atom_symbol(&op(Manifold::X0, Expr::one(), 0), &pt(z, 8), &cfg()).unwrap();
            let n = s.rows[0].len();
            assert_eq!(s.blocks[0][0].as_ref().unwrap(), &Array2::<C>::eye(n));
        }
    }

    #[test]
    fn boundary_reads_the_value_at_zero() {
        let p = pt(StratumId::X1, 16);
        let s = atom_symbol(&Atom::Boundary(1), &p, &cfg()).unwrap().to_position();
        let b = s.blocks[0][0].as_ref().unwrap();
        assert_eq!(b.dim(), (1, 16));
        let mut u = vec![C::new(0.0, 0.0); 16];
        u[0] = C::new(3.0, 0.0);
        u[5] = C::new(-1.0, 2.0);
        let val: C = b.row(0).iter().zip(&u).map(|(a, b)| a * b).sum();
        assert_relative_eq!(val.re, 3.0, epsilon = 1e-12);
        assert!(val.im.abs() < 1e-12);
    }

    #[test]
    fn boundary_after_coboundary_at_the_corner_is_one_over_h() {
        let p = pt(StratumId::X12, 8);
        let b = atom_symbol(&Atom::Boundary(1), &p, &cfg()).unwrap();
        let c = atom_symbol(&Atom::Coboundary(1), &p, &cfg()).unwrap();
        let bc = compose_symbols(&b, &c).unwrap().to_position();
        let h = 2.0 * PI / 8.0;
        let m = bc.blocks[0][0].as_ref().unwrap();
        assert_eq!(m.dim(), (8, 8));
        for ((i, j), v) in m.indexed_iter() {
            let want = if i == j { 1.0 / h } else { 0.0 };
            assert!((v - C::new(want, 0.0)).norm() < 1e-10, "{i},{j}: {v}");
        }
    }

    #[test]
    fn coboundary_is_weighted_adjoint_of_boundary() {
        for (z, k) in [(StratumId::X1, 1), (StratumId::X2, 2), (StratumId::X12, 1), (StratumId::X12, 2)] {
            let p = pt(z, 8);
            let b = atom_symbol(&Atom::Boundary(k), &p, &cfg()).unwrap().to_position();
            let c = atom_symbol(&Atom::Coboundary(k), &p, &cfg()).unwrap().to_position();
            let ny = cfg().nu(k) as i32;
            let wy = (2.0 * PI / 8.0).powi(ny);
            let b = b.blocks[0][0].as_ref().unwrap();
            let c = c.blocks[0][0].as_ref().unwrap();
            // ⟨B u, q⟩_x = ⟨u, C q⟩_{x,y}: C = h_y^{-ν} B^*
            let want = b.t().mapv(|v| v.conj() / wy);
            assert!(c.iter().zip(want.iter()).all(|(a, b)| (a - b).norm() < 1e-10));
        }
    }

    #[test]
    fn stratum_rules() {
        assert!(matches!(
            atom_symbol(&Atom::Boundary(1), &pt(StratumId::X2, 8), &cfg()),
            Err(MorError::StratumMismatch(_))
        ));
        let m = MorMatrix::assemble([representative(GeneratorType::G2, &cfg()).unwrap()], &cfg()).unwrap();
        assert!(morphism_symbol(&m, &pt(StratumId::X1, 8), &cfg()).is_zero());
        assert!(!morphism_symbol(&m, &pt(StratumId::X12, 8), &cfg()).is_zero());
        assert!(morphism_symbol(&MorMatrix::zero(), &pt(StratumId::X12, 8), &cfg()).is_zero());
    }

    #[test]
    fn membership_lists_per_stratum() {
        use GeneratorType::*;
        let expected: [(StratumId, &[GeneratorType]); 4] = [
            (StratumId::X0, &[D0]),
            (StratumId::X1, &[D0, D1, B1, C1, G1]),
            (StratumId::X2, &[D0, D2, B2, C2, G2]),
            (StratumId::X12, &GeneratorType::ALL),
        ];
        for (z, members) in expected {
            for t in GeneratorType::ALL {
                let w = representative(t, &cfg()).unwrap();
                let m = MorMatrix::assemble([w], &cfg()).unwrap();
                let s = morphism_symbol(&m, &pt(z, 4), &cfg());
                assert_eq!(!s.is_zero(), members.contains(&t), "{t} on {z}");
            }
        }
    }

    #[test]
    fn d0_symbol_on_x0_is_the_symbol_value() {
        let e = Expr::mul(Expr::add(Expr::one(), Expr::Cos(1)), Expr::bracket([1, 2, 3], -2.0));
        let m = MorMatrix::assemble([Word::infer(vec![op(Manifold::X0, e.clone(), -2)], &cfg()).unwrap()], &cfg())
            .unwrap();
        let p = SymbolPoint::new(StratumId::X0, vec![0.3, 0.1, 0.2], vec![1.0, 2.0, -1.0], 8, &cfg()).unwrap();
        let s = morphism_symbol(&m, &p, &cfg());
        let v = s.blocks[0][0].as_ref().unwrap()[[0, 0]];
        let want = e.eval(&p.z, &p.zeta);
        assert!((v - want).norm() < 1e-14);
        let s1 = morphism_symbol(&m, &pt(StratumId::X1, 8), &cfg());
        assert!(s1.blocks[0][1].is_none() && s1.blocks[1][1].is_none() && s1.blocks[0][0].is_some());
    }

    #[test]
    fn trace_of_the_constant_bracket_tends_to_one_half() {
        let inner = op(Manifold::X0, Expr::bracket([1, 2, 3], -2.0), -2);
        let w = Word::infer(vec![Atom::Boundary(1), inner, Atom::Coboundary(1)], &cfg()).unwrap();
        let p = SymbolPoint::new(StratumId::X1, vec![0.0, 0.0], vec![0.0, 0.0], 64, &cfg()).unwrap();
        let s = word_symbol(&w, &p, &cfg()).unwrap();
        let v = s.blocks[0][0].as_ref().unwrap()[[0, 0]];
        assert!((v.re - 0.5).abs() <= 0.05, "{v}");
        let fused = word_symbol(&fuse_trace(&w, &cfg()).unwrap(), &p, &cfg()).unwrap();
        assert_relative_eq!(fused.blocks[0][0].as_ref().unwrap()[[0, 0]].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn nodal_application_matches_the_matrix() {
        let w = representative(GeneratorType::M0, &cfg()).unwrap();
        let p = pt(StratumId::X12, 8);
        let s = word_symbol(&w, &p, &cfg()).unwrap().to_position();
        let v: Vec<C> = (0..64).map(|i| C::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let g = ArrayD::from_shape_vec(IxDyn(&[8, 8]), v.clone()).unwrap();
        let out = apply_word_nodal(&w, &p, &cfg(), &g).unwrap();
        let want = s.blocks[0][0].as_ref().unwrap().dot(&ndarray::Array1::from(v));
        assert!(out.iter().zip(want.iter()).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    fn composition_shape_check() {
        let p = pt(StratumId::X1, 8);
        let b = atom_symbol(&Atom::Boundary(1), &p, &cfg()).unwrap();
        assert!(matches!(compose_symbols(&b, &b), Err(MorError::ShapeMismatch(_))));
        let id = OperatorSymbol::identity(StratumId::X1, b.cols.clone());
        assert_eq!(compose_symbols(&b, &id).unwrap(), b);
    }
}
