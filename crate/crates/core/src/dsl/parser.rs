//! Recursive-descent parser for morphism programs.
//!
//! ```text
//! config { n = 3; S1 = {1,2}; S2 = {1,3}; transversal = true }
//! B @order 1 = Op[X1]{1, 0} ; bd1 ; Op[X0]{(1 + xi3^2)^(-2), -4}
//! Z = 0
//! classify B
//! ```
//!
//! Words compose right to left through `;`, summands are joined by `+`, and a
//! line starting with a command name is kept as a whitespace-split command.

use num_complex::Complex64;

use crate::algebra::{feasible_orders, Atom, MorMatrix, OrderInterval, Word};
use crate::error::{MorError, Result};
use crate::expr::{Expr, SymbolExpr};
use crate::geometry::{Axis, ConfigTriple, Manifold};
use crate::Order;

use super::lexer::{lex, Tok, Token};

pub const COMMANDS: [&str; 5] = ["classify", "normalize", "symbol", "verify", "print"];

#[derive(Debug, Clone, PartialEq)]
pub struct Definition {
    pub name: String,
    pub order: Option<Order>,
    /// Summands, each an atom list with `atoms[0]` applied last.
    pub words: Vec<Vec<Atom>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DslProgram {
    pub config: ConfigTriple,
    /// Declared Sobolev orders of the spaces over `X0, X1, X2`.
    pub space_orders: [Option<Order>; 3],
    pub definitions: Vec<Definition>,
    pub commands: Vec<Command>,
}

impl DslProgram {
    pub fn definition(&self, name: &str) -> Result<&Definition> {
        self.definitions
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| MorError::Usage(format!("no morphism named `{name}`")))
    }

    /// Validated words of one definition, orders fixed.
    pub fn words(&self, name: &str) -> Result<Vec<Word>> {
        let d = self.definition(name)?;
        resolve(d, &self.space_orders, &self.config).map_err(|e| MorError::Validation { name: name.into(), source: Box::new(e) })
    }

    pub fn morphism(&self, name: &str) -> Result<MorMatrix> {
        let words = self.words(name)?;
        MorMatrix::assemble(words, &self.config).map_err(|e| MorError::Validation { name: name.into(), source: Box::new(e) })
    }

    /// Re-checks every definition.
    pub fn validate(&self) -> Result<()> {
        self.definitions.iter().try_for_each(|d| self.morphism(&d.name).map(|_| ()))
    }
}

/// `@order` wins, then the declared order of the domain space; otherwise the
/// summands sharing a domain get one order from their common feasible interval.
fn resolve(d: &Definition, spaces: &[Option<Order>; 3], cfg: &ConfigTriple) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for atoms in &d.words {
        let dom = atoms.last().ok_or_else(|| MorError::ChainMismatch("empty word".into()))?.domain();
        let s = match d.order.or(spaces[dom.index()]) {
            Some(s) => s,
            None => {
                let mut iv = OrderInterval { lo: None, hi: None };
                for other in d.words.iter().filter(|w| w.last().map(Atom::domain) == Some(dom)) {
                    let f = feasible_orders(other, cfg)?;
                    iv.lo = max_opt(iv.lo, f.lo);
                    iv.hi = min_opt(iv.hi, f.hi);
                }
                match iv.pick() {
                    Some(s) => s,
                    None => Word::infer(atoms.clone(), cfg)?.domain_order,
                }
            }
        };
        out.push(Word::new(atoms.clone(), s, cfg)?);
    }
    Ok(out)
}

fn max_opt(a: Option<Order>, b: Option<Order>) -> Option<Order> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

fn min_opt(a: Option<Order>, b: Option<Order>) -> Option<Order> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

pub fn parse_dsl(src: &str) -> Result<DslProgram> {
    let program = Parser { src, toks: lex(src)?, pos: 0, cfg: None }.program()?;
    program.validate()?;
    Ok(program)
}

/// Parses an expression on its own, for command-line symbols.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { src, toks: lex(src)?, pos: 0, cfg: None };
    let e = p.expr()?;
    p.skip_newlines();
    p.expect_eof()?;
    Ok(e)
}

/// Parses an order: an integer, a decimal or `p/q`, optionally negative.
pub fn parse_order(src: &str) -> Result<Order> {
    let mut p = Parser { src, toks: lex(src)?, pos: 0, cfg: None };
    let o = p.order()?;
    p.expect_eof()?;
    Ok(o)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    cfg: Option<ConfigTriple>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(MorError::Parse { line: t.line, column: t.column, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.err(format!("expected end of line, found {}", self.describe())),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn number(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected a number, found {}", self.describe())),
        }
    }

    fn uint(&mut self) -> Result<usize> {
        let s = self.number()?;
        match s.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos -= 1;
                self.err(format!("expected a nonnegative integer, found `{s}`"))
            }
        }
    }

    fn signed_f64(&mut self) -> Result<f64> {
        let neg = self.eat_sym('-');
        let v: f64 = self.number()?.parse().expect("lexer checked");
        Ok(if neg { -v } else { v })
    }

    fn program(mut self) -> Result<DslProgram> {
        let mut space_orders = [None; 3];
        let mut definitions: Vec<Definition> = Vec::new();
        let mut commands = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(s) if s == "config" => {
                    if self.cfg.is_some() {
                        return self.err("duplicate config block");
                    }
                    self.bump();
                    let (cfg, orders) = self.config_block()?;
                    self.cfg = Some(cfg);
                    space_orders = orders;
                    self.end_of_statement()?;
                }
                Tok::Ident(s) if COMMANDS.contains(&s.as_str()) && *self.peek_at(1) != Tok::Sym('=') && *self.peek_at(1) != Tok::Sym('@') => {
                    commands.push(self.command()?);
                }
                Tok::Ident(_) => {
                    let d = self.definition()?;
                    if definitions.iter().any(|e| e.name == d.name) {
                        return self.err(format!("`{}` is defined twice", d.name));
                    }
                    definitions.push(d);
                    self.end_of_statement()?;
                }
                _ => return self.err(format!("expected a definition or a command, found {}", self.describe())),
            }
        }
        let config = match self.cfg {
            Some(c) => c,
            None => return self.err("the program has no config block"),
        };
        Ok(DslProgram { config, space_orders, definitions, commands })
    }

    fn config_block(&mut self) -> Result<(ConfigTriple, [Option<Order>; 3])> {
        self.expect_sym('{')?;
        let (mut n, mut s1, mut s2, mut transversal) = (None, None, None, true);
        let mut orders = [None; 3];
        let at = self.pos;
        loop {
            self.skip_newlines();
            if self.eat_sym('}') {
                break;
            }
            let key = self.ident()?;
            self.expect_sym('=')?;
            match key.as_str() {
                "n" => n = Some(self.uint()?),
                "S1" => s1 = Some(self.axis_set()?),
                "S2" => s2 = Some(self.axis_set()?),
                "transversal" => {
                    transversal = match self.ident()?.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => {
                            self.pos -= 1;
                            return self.err("expected `true` or `false`");
                        }
                    }
                }
                "s0" | "s1" | "s2" => orders[key[1..].parse::<usize>().expect("digit")] = Some(self.order()?),
                _ => {
                    self.pos -= 2;
                    return self.err(format!("unknown config key `{key}`"));
                }
            }
            if !self.eat_sym(';') {
                self.skip_newlines();
            }
        }
        let (Some(n), Some(s1), Some(s2)) = (n, s1, s2) else {
            self.pos = at;
            return self.err("config needs n, S1 and S2");
        };
        let cfg = ConfigTriple::new(n, s1, s2, transversal).or_else(|e| {
            self.pos = at;
            self.err(e.to_string())
        })?;
        Ok((cfg, orders))
    }

    fn axis_set(&mut self) -> Result<Vec<Axis>> {
        self.expect_sym('{')?;
        let mut v = Vec::new();
        if self.eat_sym('}') {
            return Ok(v);
        }
        loop {
            v.push(self.uint()?);
            if self.eat_sym('}') {
                return Ok(v);
            }
            self.expect_sym(',')?;
        }
    }

    fn order(&mut self) -> Result<Order> {
        let neg = self.eat_sym('-');
        let t = self.number()?;
        let mut o = if let Ok(i) = t.parse::<i64>() {
            Order::from(i)
        } else {
            decimal_order(&t).or_else(|| {
                self.pos -= 1;
                None
            }).map_or_else(|| self.err(format!("`{t}` is not an exact order")), Ok)?
        };
        if self.eat_sym('/') {
            let q = self.uint()?;
            if q == 0 || o.denom() != &1 {
                self.pos -= 1;
                return self.err("expected `p/q` with integers and q > 0");
            }
            o /= Order::from(q as i64);
        }
        Ok(if neg { -o } else { o })
    }

    fn command(&mut self) -> Result<Command> {
        let name = self.ident()?;
        let start = self.toks[self.pos].start;
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
        let end = self.toks[self.pos].start;
        let args = strip_comment(&self.src[start..end]).split_whitespace().map(String::from).collect();
        self.end_of_statement()?;
        Ok(Command { name, args })
    }

    fn definition(&mut self) -> Result<Definition> {
        let name = self.ident()?;
        let order = if self.eat_sym('@') {
            match self.ident()?.as_str() {
                "order" => Some(self.order()?),
                _ => {
                    self.pos -= 1;
                    return self.err("expected `@order`");
                }
            }
        } else {
            None
        };
        self.expect_sym('=')?;
        self.skip_newlines();
        if *self.peek() == Tok::Num("0".into()) && matches!(self.peek_at(1), Tok::Newline | Tok::Eof) {
            self.bump();
            return Ok(Definition { name, order, words: vec![] });
        }
        let mut words = vec![self.word()?];
        while self.eat_sym('+') {
            self.skip_newlines();
            words.push(self.word()?);
        }
        Ok(Definition { name, order, words })
    }

    fn word(&mut self) -> Result<Vec<Atom>> {
        let start = self.pos;
        let mut atoms = vec![self.atom()?];
        while self.eat_sym(';') {
            self.skip_newlines();
            atoms.push(self.atom()?);
        }
        for pair in atoms.windows(2) {
            if pair[1].codomain() != pair[0].domain() {
                self.pos = start;
                return Err(MorError::Validation {
                    name: "word".into(),
                    source: Box::new(MorError::ChainMismatch(format!(
                        "`{}` lands in {} but `{}` acts on {} (line {})",
                        pair[1],
                        pair[1].codomain(),
                        pair[0],
                        pair[0].domain(),
                        self.toks[start].line
                    ))),
                });
            }
        }
        Ok(atoms)
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = self.ident()?;
        match name.as_str() {
            "bd1" => Ok(Atom::Boundary(1)),
            "bd2" => Ok(Atom::Boundary(2)),
            "cob1" => Ok(Atom::Coboundary(1)),
            "cob2" => Ok(Atom::Coboundary(2)),
            "Op" => {
                self.expect_sym('[')?;
                let at = self.pos;
                let home = match self.ident()?.as_str() {
                    "X0" => Manifold::X0,
                    "X1" => Manifold::X1,
                    "X2" => Manifold::X2,
                    other => {
                        self.pos = at;
                        return self.err(format!("ψDOs live on X0, X1 or X2, not `{other}`"));
                    }
                };
                self.expect_sym(']')?;
                self.expect_sym('{')?;
                let at = self.pos;
                let e = self.expr()?;
                self.expect_sym(',')?;
                let order = self.order()?;
                self.expect_sym('}')?;
                let cfg = match &self.cfg {
                    Some(c) => c.clone(),
                    None => return self.err("the config block must come before definitions"),
                };
                SymbolExpr::new(e, order, home, &cfg).map(Atom::PsiDO).or_else(|err| {
                    self.pos = at;
                    self.err(err.to_string())
                })
            }
            other => {
                self.pos -= 1;
                self.err(format!("unknown atom `{other}`; expected Op[..]{{..}}, bd1, bd2, cob1 or cob2"))
            }
        }
    }

    // expressions: sum := term (('+' | '-') term)*, term := unary ('*' unary)*,
    // unary := '-' unary | power, power := primary ('^' exponent)?

    pub(crate) fn expr(&mut self) -> Result<Expr> {
        Ok(self.sum()?.0)
    }

    /// Also reports whether the sum was literally `1 + xi_a^2 + …` with
    /// ascending axes, which is what a parenthesized bracket looks like.
    fn sum(&mut self) -> Result<(Expr, Option<Vec<Axis>>)> {
        let first_one = *self.peek() == Tok::Num("1".into())
            && !matches!(self.peek_at(1), Tok::Sym('^') | Tok::Sym('*') | Tok::Sym('/'));
        let mut e = self.term()?;
        let mut shape = first_one.then(Vec::new);
        loop {
            if self.eat_sym('+') {
                let lit = self.literal_square();
                let t = self.term()?;
                shape = match (shape, lit) {
                    (Some(mut v), Some(a)) if v.last().is_none_or(|b| *b < a) && bare_square(&t, a) => {
                        v.push(a);
                        Some(v)
                    }
                    _ => None,
                };
                e = Expr::add(e, t);
            } else if self.eat_sym('-') {
                let t = self.term()?;
                shape = None;
                e = Expr::add(e, Expr::neg(t));
            } else {
                return Ok((e, shape));
            }
        }
    }

    /// Axis of an upcoming `xi<a>^2` that is followed by `+`, `)` or nothing else.
    fn literal_square(&self) -> Option<Axis> {
        match (self.peek_at(0), self.peek_at(1), self.peek_at(2), self.peek_at(3)) {
            (Tok::Ident(s), Tok::Sym('^'), Tok::Num(two), next) if two == "2" && matches!(next, Tok::Sym('+') | Tok::Sym(')')) => {
                s.strip_prefix("xi").and_then(|d| d.parse().ok())
            }
            _ => None,
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat_sym('*') {
            e = Expr::mul(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym('-') {
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let (base, shape) = self.primary()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        if self.eat_sym('(') {
            let at = self.pos;
            let p = self.signed_f64()?;
            self.expect_sym(')')?;
            if let Some(axes) = shape {
                return Ok(Expr::Bracket(axes, 2.0 * p));
            }
            return self.int_power(base, p, at);
        }
        let at = self.pos;
        let p: f64 = self.number()?.parse().expect("lexer checked");
        if let Some(axes) = shape {
            return Ok(Expr::Bracket(axes, 2.0 * p));
        }
        self.int_power(base, p, at)
    }

    fn int_power(&mut self, base: Expr, p: f64, at: usize) -> Result<Expr> {
        if p.fract() != 0.0 || p.abs() > i32::MAX as f64 {
            self.pos = at;
            return self.err("only `(1 + xi_a^2 + …)` may carry a non-integer exponent");
        }
        Ok(Expr::pow(base, p as i32))
    }

    fn primary(&mut self) -> Result<(Expr, Option<Vec<Axis>>)> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Ok((Expr::real(s.parse().expect("lexer checked")), None))
            }
            Tok::Sym('(') => {
                self.bump();
                let (e, shape) = self.sum()?;
                self.expect_sym(')')?;
                Ok((e, shape))
            }
            Tok::Ident(s) => {
                self.bump();
                if let Some(a) = s.strip_prefix("xi").and_then(|d| d.parse().ok()) {
                    return Ok((Expr::Xi(a), None));
                }
                if let Some(a) = s.strip_prefix('x').and_then(|d| d.parse().ok()) {
                    return Ok((Expr::X(a), None));
                }
                match s.as_str() {
                    "sin" | "cos" => {
                        self.expect_sym('(')?;
                        let at = self.pos;
                        let v = self.ident()?;
                        let Some(a) = v.strip_prefix('x').and_then(|d| d.parse::<Axis>().ok()) else {
                            self.pos = at;
                            return self.err(format!("`{s}` takes a coordinate x<a>"));
                        };
                        self.expect_sym(')')?;
                        Ok((if s == "sin" { Expr::Sin(a) } else { Expr::Cos(a) }, None))
                    }
                    "c" => {
                        self.expect_sym('(')?;
                        let re = self.signed_f64()?;
                        self.expect_sym(',')?;
                        let im = self.signed_f64()?;
                        self.expect_sym(')')?;
                        Ok((Expr::Const(Complex64::new(re, im)), None))
                    }
                    _ => {
                        self.pos -= 1;
                        self.err(format!("unknown name `{s}` in an expression"))
                    }
                }
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }
}

fn bare_square(t: &Expr, a: Axis) -> bool {
    matches!(t, Expr::Pow(b, 2) if **b == Expr::Xi(a))
}

fn decimal_order(t: &str) -> Option<Order> {
    if t.contains(['e', 'E']) {
        return None;
    }
    let (int, frac) = t.split_once('.')?;
    let digits = frac.len() as u32;
    let den = 10i64.checked_pow(digits)?;
    let num: i64 = format!("{int}{frac}").trim_start_matches('0').parse().unwrap_or(0);
    Some(Order::new(num, den))
}

fn strip_comment(s: &str) -> &str {
    s.split('#').next().unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GeneratorType;

    const HEAD: &str = "config { n = 3; S1 = {1,2}; S2 = {1,3}; transversal = true }\n";

    #[test]
    fn boundary_example() {
        let p = parse_dsl(&format!("{HEAD}M = Op[X1]{{1,0}} ; bd1 ; Op[X0]{{(1+xi3^2)^(-2), -2}}\n")).unwrap();
        let w = p.words("M").unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(GeneratorType::of_word(&w[0]).unwrap(), GeneratorType::B1);
        let Atom::PsiDO(s) = &w[0].atoms[2] else { panic!() };
        assert_eq!(s.expr, Expr::Bracket(vec![3], -4.0));
    }

    #[test]
    fn infeasible_chain_is_a_validation_error() {
        let e = parse_dsl(&format!("{HEAD}M = bd1 ; cob1\n")).unwrap_err();
        match e {
            MorError::Validation { name, source } => {
                assert_eq!(name, "M");
                assert!(matches!(*source, MorError::OrderViolation(_)));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_dsl(&format!("{HEAD}M = Op[X0]{{xi1 +, 0}}\n")).unwrap_err();
        assert!(matches!(e, MorError::Parse { line: 2, column: 17, .. }), "{e}");
        let e = parse_dsl(&format!("{HEAD}M = bd3\n")).unwrap_err();
        assert!(matches!(e, MorError::Parse { line: 2, column: 5, .. }), "{e}");
        assert!(matches!(parse_dsl("M = bd1\n"), Err(MorError::Parse { .. })));
    }

    #[test]
    fn orders_and_sums() {
        assert_eq!(parse_order("-3/2").unwrap(), Order::new(-3, 2));
        assert_eq!(parse_order("0.25").unwrap(), Order::new(1, 4));
        assert_eq!(parse_order("7").unwrap(), Order::from(7));
        let p = parse_dsl(&format!(
            "{HEAD}A @order 1 = Op[X0]{{1, 0}} + Op[X0]{{cos(x1), 0}}\nZ = 0\nnormalize Z # empty\nsymbol A --stratum X12 --z 0,0\n"
        ))
        .unwrap();
        assert_eq!(p.definition("A").unwrap().words.len(), 2);
        assert!(p.definition("Z").unwrap().words.is_empty());
        assert!(p.morphism("Z").unwrap().is_zero());
        assert_eq!(p.commands[0], Command { name: "normalize".into(), args: vec!["Z".into()] });
        assert_eq!(p.commands[1].args, ["A", "--stratum", "X12", "--z", "0,0"]);
    }

    #[test]
    fn bracket_shapes() {
        assert_eq!(parse_expr("(1 + xi1^2 + xi2^2)^(-0.5)").unwrap(), Expr::Bracket(vec![1, 2], -1.0));
        // not bracket-shaped: the exponent must be an integer
        assert!(parse_expr("(2 + xi1^2)^(-0.5)").is_err());
        assert_eq!(
            parse_expr("((1 + xi1^2))^(-1)").unwrap(),
            Expr::pow(Expr::add(Expr::one(), Expr::pow(Expr::Xi(1), 2)), -1)
        );
        assert_eq!(parse_expr("x1 - 2").unwrap(), Expr::add(Expr::X(1), Expr::neg(Expr::real(2.0))));
    }
}
