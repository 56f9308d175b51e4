//! Closed-form scalar symbols `a(x, ξ)`.
//!
//! The class is small on purpose: polynomials in `ξ`, the brackets
//! `(1 + Σ ξ_i²)^{e/2}`, and trigonometric coefficients in `x`. It is closed
//! under coefficient freezing and every tree has an exact textual form.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{MorError, Result};
use crate::geometry::{Axis, ConfigTriple, Manifold, StratumId};
use crate::Order;

/// Expression tree of a symbol. Axes are global (1-based).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// Position variable `x_i`.
    X(Axis),
    /// Frequency variable `ξ_i`.
    Xi(Axis),
    Sin(Axis),
    Cos(Axis),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    /// `(1 + Σ_{i∈J} ξ_i²)^{e/2}`; the axis list is sorted and duplicate free.
    Bracket(Vec<Axis>, f64),
}

impl Expr {
    pub fn real(v: f64) -> Expr {
        Expr::Const(Complex64::new(v, 0.0))
    }

    pub fn one() -> Expr {
        Expr::real(1.0)
    }

    /// `(1 + Σ_{i∈J} ξ_i²)^{e/2}`; sorts and dedups `axes`.
    pub fn bracket(axes: impl IntoIterator<Item = Axis>, e: f64) -> Expr {
        let set: BTreeSet<Axis> = axes.into_iter().collect();
        Expr::Bracket(set.into_iter().collect(), e)
    }

    // constructors taking two owned trees, not operator overloads
    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Evaluates with `x[i-1]`, `xi[i-1]` holding the value on axis `i`.
    ///
    /// Panics when an axis is out of range; [`Expr::max_axis`] guards callers.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X(a) => Complex64::new(x[a - 1], 0.0),
            Expr::Xi(a) => Complex64::new(xi[a - 1], 0.0),
            Expr::Sin(a) => Complex64::new(x[a - 1].sin(), 0.0),
            Expr::Cos(a) => Complex64::new(x[a - 1].cos(), 0.0),
            Expr::Add(p, q) => p.eval(x, xi) + q.eval(x, xi),
            Expr::Mul(p, q) => p.eval(x, xi) * q.eval(x, xi),
            Expr::Neg(p) => -p.eval(x, xi),
            Expr::Pow(p, k) => p.eval(x, xi).powi(*k),
            Expr::Bracket(axes, e) => {
                let r2: f64 = 1.0 + axes.iter().map(|a| xi[a - 1] * xi[a - 1]).sum::<f64>();
                Complex64::new(r2.powf(e / 2.0), 0.0)
            }
        }
    }

    /// Largest axis referenced, 0 for constants.
    pub fn max_axis(&self) -> Axis {
        let mut m = 0;
        self.visit(&mut |e| match e {
            Expr::X(a) | Expr::Xi(a) | Expr::Sin(a) | Expr::Cos(a) => m = m.max(*a),
            Expr::Bracket(axes, _) => m = m.max(axes.iter().copied().max().unwrap_or(0)),
            _ => {}
        });
        m
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(p, q) | Expr::Mul(p, q) => {
                p.visit(f);
                q.visit(f);
            }
            Expr::Neg(p) | Expr::Pow(p, _) => p.visit(f),
            _ => {}
        }
    }

    /// Axes carrying a position dependence.
    pub fn space_axes(&self) -> BTreeSet<Axis> {
        let mut s = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::X(a) | Expr::Sin(a) | Expr::Cos(a) = e {
                s.insert(*a);
            }
        });
        s
    }

    /// Axes carrying a frequency dependence.
    pub fn freq_axes(&self) -> BTreeSet<Axis> {
        let mut s = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Xi(a) => {
                s.insert(*a);
            }
            Expr::Bracket(axes, _) => s.extend(axes.iter().copied()),
            _ => {}
        });
        s
    }

    fn is_real_valued(&self) -> bool {
        match self {
            Expr::Const(c) => c.im == 0.0,
            Expr::X(_) | Expr::Xi(_) | Expr::Sin(_) | Expr::Cos(_) | Expr::Bracket(..) => true,
            Expr::Add(p, q) | Expr::Mul(p, q) => p.is_real_valued() && q.is_real_valued(),
            Expr::Neg(p) | Expr::Pow(p, _) => p.is_real_valued(),
        }
    }

    fn certified_nonnegative(&self) -> bool {
        match self {
            Expr::Const(c) => c.im == 0.0 && c.re >= 0.0,
            Expr::Pow(p, k) => (k % 2 == 0 && p.is_real_valued()) || p.certified_nonnegative(),
            Expr::Add(p, q) | Expr::Mul(p, q) => p.certified_nonnegative() && q.certified_nonnegative(),
            _ => self.certified_positive(),
        }
    }

    /// Conservative proof that the expression is real and strictly positive
    /// everywhere; negative powers are only admitted over such bases.
    pub fn certified_positive(&self) -> bool {
        match self {
            Expr::Const(c) => c.im == 0.0 && c.re > 0.0,
            Expr::Bracket(..) => true,
            Expr::Add(p, q) => {
                (p.certified_positive() && q.certified_nonnegative())
                    || (p.certified_nonnegative() && q.certified_positive())
            }
            Expr::Mul(p, q) => p.certified_positive() && q.certified_positive(),
            Expr::Pow(p, _) => p.certified_positive(),
            _ => false,
        }
    }

    /// Substitutes 0 for position variables on `axes`. Only rewritten nodes are
    /// simplified, so an expression without such variables comes back unchanged.
    pub fn freeze_axes(&self, axes: &BTreeSet<Axis>) -> Expr {
        self.freeze_inner(axes).0
    }

    fn freeze_inner(&self, axes: &BTreeSet<Axis>) -> (Expr, bool) {
        match self {
            Expr::X(a) | Expr::Sin(a) if axes.contains(a) => (Expr::real(0.0), true),
            Expr::Cos(a) if axes.contains(a) => (Expr::one(), true),
            Expr::Add(p, q) => {
                let ((p2, cp), (q2, cq)) = (p.freeze_inner(axes), q.freeze_inner(axes));
                if !(cp || cq) {
                    return (self.clone(), false);
                }
                let out = match (p2.as_const(), q2.as_const()) {
                    (Some(a), Some(b)) => Expr::Const(a + b),
                    (Some(a), None) if a.is_zero() => q2,
                    (None, Some(b)) if b.is_zero() => p2,
                    _ => Expr::add(p2, q2),
                };
                (out, true)
            }
            Expr::Mul(p, q) => {
                let ((p2, cp), (q2, cq)) = (p.freeze_inner(axes), q.freeze_inner(axes));
                if !(cp || cq) {
                    return (self.clone(), false);
                }
                let one = Complex64::new(1.0, 0.0);
                let out = match (p2.as_const(), q2.as_const()) {
                    (Some(a), Some(b)) => Expr::Const(a * b),
                    (Some(a), _) | (_, Some(a)) if a.is_zero() => Expr::real(0.0),
                    (Some(a), None) if a == one => q2,
                    (None, Some(b)) if b == one => p2,
                    _ => Expr::mul(p2, q2),
                };
                (out, true)
            }
            Expr::Neg(p) => match p.freeze_inner(axes) {
                (_, false) => (self.clone(), false),
                (Expr::Const(c), true) => (Expr::Const(-c), true),
                (p2, true) => (Expr::neg(p2), true),
            },
            Expr::Pow(p, k) => match p.freeze_inner(axes) {
                (_, false) => (self.clone(), false),
                (Expr::Const(c), true) => (Expr::Const(c.powi(*k)), true),
                (p2, true) => (Expr::pow(p2, *k), true),
            },
            _ => (self.clone(), false),
        }
    }

    /// Writes the expression as `Σ p_i(x) q_i(ξ)`, or `None` when it does not
    /// split into at most `cap` such terms.
    pub fn separate(&self, cap: usize) -> Option<Vec<(Expr, Expr)>> {
        let pos_only = self.freq_axes().is_empty();
        let freq_only = self.space_axes().is_empty();
        if pos_only {
            return Some(vec![(self.clone(), Expr::one())]);
        }
        if freq_only {
            return Some(vec![(Expr::one(), self.clone())]);
        }
        let terms = match self {
            Expr::Add(p, q) => {
                let mut t = p.separate(cap)?;
                t.extend(q.separate(cap)?);
                t
            }
            Expr::Neg(p) => p
                .separate(cap)?
                .into_iter()
                .map(|(a, b)| (simplify_neg(a), b))
                .collect(),
            Expr::Mul(p, q) => cross(&p.separate(cap)?, &q.separate(cap)?, cap)?,
            Expr::Pow(p, k) if *k > 0 => {
                let base = p.separate(cap)?;
                let mut acc = base.clone();
                for _ in 1..*k {
                    acc = cross(&acc, &base, cap)?;
                }
                acc
            }
            _ => return None,
        };
        (terms.len() <= cap).then_some(terms)
    }
}

fn simplify_neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        other => Expr::neg(other),
    }
}

fn smart_mul(a: &Expr, b: &Expr) -> Expr {
    let one = Complex64::new(1.0, 0.0);
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        (Some(x), None) if x == one => b.clone(),
        (None, Some(y)) if y == one => a.clone(),
        _ => Expr::mul(a.clone(), b.clone()),
    }
}

fn cross(a: &[(Expr, Expr)], b: &[(Expr, Expr)], cap: usize) -> Option<Vec<(Expr, Expr)>> {
    if a.len() * b.len() > cap {
        return None;
    }
    Some(
        a.iter()
            .flat_map(|(pa, qa)| b.iter().map(move |(pb, qb)| (smart_mul(pa, pb), smart_mul(qa, qb))))
            .collect(),
    )
}

fn fmt_real(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{v}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 && c.re.is_sign_positive() => fmt_real(c.re, f),
            Expr::Const(c) => write!(f, "c({},{})", c.re, c.im),
            Expr::X(a) => write!(f, "x{a}"),
            Expr::Xi(a) => write!(f, "xi{a}"),
            Expr::Sin(a) => write!(f, "sin(x{a})"),
            Expr::Cos(a) => write!(f, "cos(x{a})"),
            Expr::Add(p, q) => write!(f, "({p} + {q})"),
            Expr::Mul(p, q) => write!(f, "({p} * {q})"),
            Expr::Neg(p) => write!(f, "(-{p})"),
            Expr::Pow(p, k) => {
                // `(1 + xi_a^2)^k` would read back as a bracket
                let looks_like_bracket = matches!(&**p, Expr::Add(a, b)
                    if **a == Expr::one() && matches!(&**b, Expr::Pow(x, 2) if matches!(**x, Expr::Xi(_))));
                if looks_like_bracket || matches!(**p, Expr::Pow(..) | Expr::Bracket(..)) {
                    write!(f, "({p})")?;
                } else {
                    write!(f, "{p}")?;
                }
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Bracket(axes, e) => {
                f.write_str("(1")?;
                for a in axes {
                    write!(f, " + xi{a}^2")?;
                }
                write!(f, ")^({})", e / 2.0)
            }
        }
    }
}

/// Symbol of a ψDO: expression plus declared order and home manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpr {
    pub expr: Expr,
    pub order: Order,
    pub home: Manifold,
}

impl SymbolExpr {
    /// Checks that every axis lies in the home manifold and that negative
    /// powers only wrap certified positive bases.
    pub fn new(expr: Expr, order: Order, home: Manifold, cfg: &ConfigTriple) -> Result<Self> {
        let axes: BTreeSet<Axis> = cfg.axes(home.stratum()).into_iter().collect();
        let used: BTreeSet<Axis> = expr.space_axes().union(&expr.freq_axes()).copied().collect();
        if let Some(a) = used.iter().find(|a| !axes.contains(a)) {
            return Err(MorError::AxisMismatch(format!("axis {a} is not an axis of {home}")));
        }
        check_powers(&expr)?;
        Ok(Self { expr, order, home })
    }

    /// Symbol `(1 + |ξ|²)^{m/2}` on all axes of `home`.
    pub fn bracket(home: Manifold, order: Order, cfg: &ConfigTriple) -> Self {
        let e = order.to_f64().expect("finite order");
        Self { expr: Expr::bracket(cfg.axes(home.stratum()), e), order, home }
    }

    pub fn order_f64(&self) -> f64 {
        self.order.to_f64().expect("finite order")
    }

    /// Evaluates at a point given in the home manifold's own coordinates
    /// (one entry per home axis, ascending).
    pub fn eval_home(&self, cfg: &ConfigTriple, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        let axes = cfg.axes(self.home.stratum());
        if x.len() != axes.len() || xi.len() != axes.len() {
            return Err(MorError::AxisMismatch(format!(
                "{} has dimension {}, got x of length {} and ξ of length {}",
                self.home,
                axes.len(),
                x.len(),
                xi.len()
            )));
        }
        let (mut fx, mut fxi) = (vec![0.0; cfg.n()], vec![0.0; cfg.n()]);
        for (i, &a) in axes.iter().enumerate() {
            fx[a - 1] = x[i];
            fxi[a - 1] = xi[i];
        }
        Ok(self.expr.eval(&fx, &fxi))
    }

    /// Coefficients frozen at `y = 0` for the axes of the home manifold normal to `z`.
    pub fn freeze(&self, cfg: &ConfigTriple, z: StratumId) -> Result<SymbolExpr> {
        let home = self.home.stratum();
        if !z.is_subset_of(home) {
            return Err(MorError::StratumMismatch(format!("{z} is not contained in {home}")));
        }
        let y: BTreeSet<Axis> = cfg.conormal_axes(home, z).into_iter().collect();
        Ok(SymbolExpr { expr: self.expr.freeze_axes(&y), order: self.order, home: self.home })
    }

    /// Principal part `lim_{t→∞} a(x, tξ) / t^m`, evaluated at a large finite `t`.
    /// Arguments are full-length (indexed by global axis).
    pub fn eval_principal(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        const T: f64 = 1e6;
        let scaled: Vec<f64> = xi.iter().map(|v| v * T).collect();
        self.expr.eval(x, &scaled) / T.powf(self.order_f64())
    }
}

fn check_powers(e: &Expr) -> Result<()> {
    match e {
        Expr::Pow(p, k) => {
            if *k < 0 && !p.certified_positive() {
                return Err(MorError::Unsupported(format!(
                    "negative power of `{p}`, which is not certified positive"
                )));
            }
            check_powers(p)
        }
        Expr::Add(p, q) | Expr::Mul(p, q) => {
            check_powers(p)?;
            check_powers(q)
        }
        Expr::Neg(p) => check_powers(p),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Expr::one().eval(&[0.3; 3], &[2.0; 3]), c(1.0));
        let b = Expr::bracket([3], -2.0);
        assert_relative_eq!(b.eval(&[0.0; 3], &[0.0, 0.0, 1.0]).re, 0.5);
        let m = Expr::mul(Expr::Cos(1), Expr::Xi(2));
        assert_eq!(m.eval(&[0.0; 3], &[0.0, 3.0, 0.0]), c(3.0));
    }

    #[test]
    fn eval_home_checks_lengths() {
        let cfg = ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap();
        let s = SymbolExpr::new(Expr::Xi(2), Order::from(1), Manifold::X1, &cfg).unwrap();
        assert_eq!(s.eval_home(&cfg, &[0.0, 0.0], &[0.0, 4.0]).unwrap(), c(4.0));
        assert!(matches!(s.eval_home(&cfg, &[0.0; 3], &[0.0; 3]), Err(MorError::AxisMismatch(_))));
        let bad = SymbolExpr::new(Expr::Xi(3), Order::from(1), Manifold::X1, &cfg);
        assert!(matches!(bad, Err(MorError::AxisMismatch(_))));
    }

    #[test]
    fn negative_powers_need_positive_bases() {
        let cfg = ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap();
        let ok = Expr::pow(Expr::add(Expr::real(2.0), Expr::Cos(1)), -1);
        assert!(SymbolExpr::new(ok, Order::from(0), Manifold::X0, &cfg).is_err());
        let ok = Expr::pow(Expr::add(Expr::real(2.0), Expr::pow(Expr::Xi(1), 2)), -1);
        assert!(SymbolExpr::new(ok, Order::from(-2), Manifold::X0, &cfg).is_ok());
        let bad = Expr::pow(Expr::Xi(1), -1);
        assert!(SymbolExpr::new(bad, Order::from(-1), Manifold::X0, &cfg).is_err());
    }

    #[test]
    fn freezing_examples() {
        let cfg = ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap();
        let plain = Expr::mul(Expr::Cos(1), Expr::bracket([2, 3], -2.0));
        let s = SymbolExpr::new(plain.clone(), Order::from(-2), Manifold::X0, &cfg).unwrap();
        assert_eq!(s.freeze(&cfg, StratumId::X1).unwrap().expr, plain);

        let e = Expr::mul(Expr::Cos(3), Expr::bracket([3], -2.0));
        let s = SymbolExpr::new(e, Order::from(-2), Manifold::X0, &cfg).unwrap();
        assert_eq!(s.freeze(&cfg, StratumId::X1).unwrap().expr, Expr::bracket([3], -2.0));

        let e = Expr::add(Expr::add(Expr::X(1), Expr::X(2)), Expr::Sin(3));
        let s = SymbolExpr::new(e, Order::from(0), Manifold::X0, &cfg).unwrap();
        assert_eq!(s.freeze(&cfg, StratumId::X12).unwrap().expr, Expr::X(1));

        let s1 = SymbolExpr::new(Expr::Xi(1), Order::from(1), Manifold::X1, &cfg).unwrap();
        assert!(matches!(s1.freeze(&cfg, StratumId::X2), Err(MorError::StratumMismatch(_))));
    }

    #[test]
    fn separation_and_principal_part() {
        let e = Expr::mul(
            Expr::add(Expr::one(), Expr::mul(Expr::real(0.5), Expr::Cos(1))),
            Expr::mul(Expr::add(Expr::pow(Expr::Xi(1), 2), Expr::Xi(3)), Expr::bracket([1, 2, 3], -2.0)),
        );
        let terms = e.separate(16).unwrap();
        assert_eq!(terms.len(), 1);
        let (x, xi) = ([0.4, -1.0, 2.0], [1.5, 0.2, -3.0]);
        let sum: Complex64 = terms.iter().map(|(p, q)| p.eval(&x, &xi) * q.eval(&x, &xi)).sum();
        assert_relative_eq!(sum.re, e.eval(&x, &xi).re, max_relative = 1e-14);
        assert!(Expr::pow(Expr::add(Expr::X(1), Expr::Xi(1)), -1).separate(16).is_none());

        let cfg = ConfigTriple::new(3, [1, 2], [1, 3], true).unwrap();
        let s = SymbolExpr::bracket(Manifold::X0, Order::from(-1), &cfg);
        let p = s.eval_principal(&[0.0; 3], &[3.0, 0.0, 4.0]);
        assert_relative_eq!(p.re, 0.2, max_relative = 1e-9);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-3.0f64..3.0).prop_map(Expr::real),
            (1usize..4).prop_map(Expr::X),
            (1usize..4).prop_map(Expr::Xi),
            (1usize..4).prop_map(Expr::Cos),
            (1usize..4).prop_map(Expr::Sin),
            (proptest::collection::btree_set(1usize..4, 1..3), -4i32..1)
                .prop_map(|(s, e)| Expr::bracket(s, e as f64)),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                inner.clone().prop_map(Expr::neg),
                (inner, 1i32..3).prop_map(|(a, k)| Expr::pow(a, k)),
            ]
        })
    }

    proptest! {
        #[test]
        fn freezing_is_idempotent_and_matches_evaluation(
            e in arb_expr(),
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            xi in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let y: BTreeSet<Axis> = [2, 3].into_iter().collect();
            let f = e.freeze_axes(&y);
            prop_assert_eq!(f.freeze_axes(&y), f.clone());
            let mut x0 = x.clone();
            x0[1] = 0.0;
            x0[2] = 0.0;
            let (a, b) = (f.eval(&x, &xi), e.eval(&x0, &xi));
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));

            // freezing the X12 conormal axes factors through freezing axis 3
            let y3: BTreeSet<Axis> = [3].into_iter().collect();
            let two = e.freeze_axes(&y3).freeze_axes(&y);
            prop_assert!((two.eval(&x, &xi) - a).norm() <= 1e-9 * (1.0 + a.norm()));
        }

        #[test]
        fn separation_preserves_values(
            e in arb_expr(),
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            xi in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            if let Some(terms) = e.separate(256) {
                let sum: Complex64 = terms.iter().map(|(p, q)| p.eval(&x, &xi) * q.eval(&x, &xi)).sum();
                let v = e.eval(&x, &xi);
                prop_assert!((sum - v).norm() <= 1e-8 * (1.0 + v.norm()));
                for (p, q) in &terms {
                    prop_assert!(p.freq_axes().is_empty());
                    prop_assert!(q.space_axes().is_empty());
                }
            }
        }
    }
}
