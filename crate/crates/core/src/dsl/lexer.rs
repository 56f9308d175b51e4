//! Tokens with source positions. Anything that is not a name, a number or
//! whitespace becomes a one-character symbol, so command lines lex too.

use crate::error::{MorError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
    Newline,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let offset = |i: usize| chars.get(i).map_or(src.len(), |c| c.0);
    while i < chars.len() {
        let (start, c) = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, j: usize| {
            out.push(Token { tok, line: l0, column: c0, start, end: offset(j) });
        };
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c == '\n' {
            push(Tok::Newline, i + 1);
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let mut j = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            Tok::Ident(src[start..offset(j)].to_string())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.1.is_ascii_digit())) {
            let digits = |j: &mut usize| {
                while *j < chars.len() && chars[*j].1.is_ascii_digit() {
                    *j += 1;
                }
            };
            digits(&mut j);
            if j < chars.len() && chars[j].1 == '.' {
                j += 1;
                digits(&mut j);
            }
            if j < chars.len() && matches!(chars[j].1, 'e' | 'E') {
                let mut k = j + 1;
                if k < chars.len() && matches!(chars[k].1, '+' | '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].1.is_ascii_digit() {
                    j = k;
                    digits(&mut j);
                }
            }
            let text = &src[start..offset(j)];
            if text.parse::<f64>().is_err() {
                return Err(MorError::Parse { line, column: col, message: format!("malformed number `{text}`") });
            }
            Tok::Num(text.to_string())
        } else {
            j += 1;
            Tok::Sym(c)
        };
        push(tok, j);
        col += j - i;
        i = j;
    }
    out.push(Token { tok: Tok::Eof, line, column: col, start: src.len(), end: src.len() });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn tokens_and_positions() {
        let t = lex("M = bd1 ; Op[X0]{(1+xi3^2)^(-2), -2} # tail\nclassify M").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("M".into()));
        assert_eq!((t[2].line, t[2].column), (1, 5));
        assert!(t.iter().any(|x| x.tok == Tok::Ident("xi3".into())));
        let nl = t.iter().position(|x| x.tok == Tok::Newline).unwrap();
        assert_eq!(t[nl + 1].line, 2);
        assert_eq!(t[nl + 1].column, 1);
    }

    #[test]
    fn numbers() {
        assert_eq!(kinds("1.5e-3 2 .25"), vec![
            Tok::Num("1.5e-3".into()),
            Tok::Num("2".into()),
            Tok::Num(".25".into()),
            Tok::Eof
        ]);
        // an exponent needs digits, otherwise `e` starts a name
        assert_eq!(kinds("2e"), vec![Tok::Num("2".into()), Tok::Ident("e".into()), Tok::Eof]);
    }
}
