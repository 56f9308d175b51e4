//! Canonical text of a program. Parsing the output gives back an equal program.

use std::fmt::Write;

use super::parser::{Definition, DslProgram};

pub fn print_definition(d: &Definition) -> String {
    let mut out = d.name.clone();
    if let Some(s) = d.order {
        write!(out, " @order {s}").expect("string write");
    }
    out.push_str(" = ");
    if d.words.is_empty() {
        out.push('0');
    }
    for (i, w) in d.words.iter().enumerate() {
        if i > 0 {
            out.push_str(" +\n    ");
        }
        let atoms: Vec<String> = w.iter().map(ToString::to_string).collect();
        out.push_str(&atoms.join(" ; "));
    }
    out
}

pub fn print_dsl(p: &DslProgram) -> String {
    let c = &p.config;
    let set = |s: &std::collections::BTreeSet<usize>| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let mut out = format!("config {{ n = {}; S1 = {{{}}}; S2 = {{{}}}; transversal = {}", c.n(), set(c.s1()), set(c.s2()), c.transversal());
    for (k, s) in p.space_orders.iter().enumerate() {
        if let Some(s) = s {
            write!(out, "; s{k} = {s}").expect("string write");
        }
    }
    out.push_str(" }\n");
    for d in &p.definitions {
        out.push_str(&print_definition(d));
        out.push('\n');
    }
    for cmd in &p.commands {
        out.push_str(&cmd.name);
        for a in &cmd.args {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_dsl;
    use super::*;

    #[test]
    fn round_trip() {
        let src = "config { n = 3; S1 = {1,2}; S2 = {1,3}; s1 = -1/2 }\n\
                   A = Op[X1]{(x1 - 2) * (1 + xi1^2 + xi2^2)^(-0.5), -1} ; bd1 + Op[X1]{c(0, -1.5) * ((1 + xi2^2))^(-1), -1} ; bd1\n\
                   B @order 1/2 = cob2 ; Op[X2]{sin(x3)^2 * xi1, 1}\n\
                   Z = 0\n\
                   classify A B\n";
        let p = parse_dsl(src).unwrap();
        let text = print_dsl(&p);
        let q = parse_dsl(&text).unwrap();
        assert_eq!(p, q, "{text}");
        assert_eq!(print_dsl(&q), text);
    }
}
