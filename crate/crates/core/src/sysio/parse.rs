//! Reader and printer for the system description language.
//!
//! ```text
//! group x;            // one variable named x
//! group y[3];         // variables y1, y2, y3
//! f = y1*x^2 - (1+2i)*y3 + 0.5;
//! ```
//!
//! A statement is either a group declaration or `name = expr;`, where
//! `expr ::= term {(+|-) term}`, `term ::= factor {* factor}`,
//! `factor ::= atom [^ int]` and `atom ::= number | imaginary | variable | ( expr )`.
//! An imaginary literal is a number immediately followed by `i`, so the
//! complex literal `(a+bi)` is an ordinary parenthesized sum. A leading `-`
//! is accepted before any factor. `//` starts a comment.

use std::collections::BTreeMap;

use crate::algebra::{Complex, Group, PolySystem, Polynomial, VariableGrouping};
use crate::error::{Error, Result};

/// A parsed system with its declared groups.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDocument {
    pub system: PolySystem,
    /// Polynomial names in declaration order.
    pub names: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64, bool),
    Imag(f64),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if ch.is_ascii_alphabetic() || ch == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - s;
            out.push(Token { tok: Tok::Ident(chars[s..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let s = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[s..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                line: l0,
                column: c0,
                message: format!("malformed number {text}"),
            })?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
            if imaginary {
                i += 1;
            }
            col += i - s;
            let tok = if imaginary { Tok::Imag(value) } else { Tok::Num(value, integral) };
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        if "=;+-*^()[]".contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Syntax { line, column: col, message: format!("unexpected character {ch:?}") });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Debug)]
enum Expr {
    Const(Complex),
    Var(String, usize, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: t.line, column: t.col, message: msg.into() })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.err(&t, format!("expected '{c}', found {}", describe(&t.tok)))
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.is_sym('+') {
                self.next();
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.is_sym('-') {
                self.next();
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.is_sym('*') {
            self.next();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.is_sym('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.is_sym('^') {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Num(v, true) if v <= u32::MAX as f64 => return Ok(Expr::Pow(Box::new(base), v as u32)),
                _ => return self.err(&t, "exponent must be a nonnegative integer"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Num(v, _) => Ok(Expr::Const(Complex::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Const(Complex::new(0.0, v))),
            Tok::Ident(ref name) => Ok(Expr::Var(name.clone(), t.line, t.col)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            ref other => self.err(&t, format!("expected a number, variable or '(', found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier {s}"),
        Tok::Num(v, _) => format!("number {v}"),
        Tok::Imag(v) => format!("imaginary {v}i"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

fn lower(e: &Expr, grouping: &VariableGrouping) -> Result<Polynomial> {
    let n = grouping.nvars();
    Ok(match e {
        Expr::Const(c) => Polynomial::constant(n, *c),
        Expr::Var(name, line, col) => match grouping.var_index(name) {
            Some(i) => Polynomial::var(n, i),
            None => return Err(Error::UndeclaredIdentifier { name: name.clone(), line: *line, column: *col }),
        },
        Expr::Add(a, b) => lower(a, grouping)?.add(&lower(b, grouping)?),
        Expr::Sub(a, b) => lower(a, grouping)?.sub(&lower(b, grouping)?),
        Expr::Mul(a, b) => lower(a, grouping)?.mul(&lower(b, grouping)?),
        Expr::Neg(a) => lower(a, grouping)?.scale(Complex::new(-1.0, 0.0)),
        Expr::Pow(a, k) => lower(a, grouping)?.pow(*k),
    })
}

/// Parse a system description.
pub fn parse_system(text: &str) -> Result<SystemDocument> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut decls: Vec<(String, usize)> = Vec::new();
    let mut defs: Vec<(String, Expr, Token)> = Vec::new();
    loop {
        let t = p.next();
        match &t.tok {
            Tok::Eof => break,
            Tok::Ident(w) if w == "group" => {
                let nt = p.next();
                let name = match nt.tok {
                    Tok::Ident(ref s) => s.clone(),
                    ref other => return p.err(&nt, format!("expected group name, found {}", describe(other))),
                };
                let mut size = 1;
                if p.is_sym('[') {
                    p.next();
                    let st = p.next();
                    size = match st.tok {
                        Tok::Num(v, true) if v >= 1.0 => v as usize,
                        _ => return p.err(&st, "group size must be a positive integer"),
                    };
                    p.expect(']')?;
                }
                p.expect(';')?;
                if decls.iter().any(|(n, _)| *n == name) {
                    return Err(Error::DuplicateGroup(name));
                }
                decls.push((name, size));
            }
            Tok::Ident(name) => {
                let name = name.clone();
                p.expect('=')?;
                let e = p.expr()?;
                p.expect(';')?;
                if defs.iter().any(|(n, _, _)| *n == name) {
                    return p.err(&t, format!("polynomial {name} defined twice"));
                }
                defs.push((name, e, t));
            }
            other => return p.err(&t, format!("expected a statement, found {}", describe(other))),
        }
    }
    if decls.is_empty() {
        return Err(Error::Syntax { line: 1, column: 1, message: "no variable groups declared".into() });
    }
    if defs.is_empty() {
        return Err(Error::Syntax { line: 1, column: 1, message: "no polynomials defined".into() });
    }
    let refs: Vec<(&str, usize)> = decls.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    let grouping = VariableGrouping::standard(&refs).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Syntax { line: 1, column: 1, message: m },
        other => other,
    })?;
    let mut polys = Vec::new();
    let mut names = Vec::new();
    for (name, e, _) in &defs {
        polys.push(lower(e, &grouping)?);
        names.push(name.clone());
    }
    Ok(SystemDocument { system: PolySystem::new(polys, grouping)?, names, metadata: BTreeMap::new() })
}

fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_coef(c: Complex) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else {
        let sign = if c.im.is_sign_negative() { '-' } else { '+' };
        format!("({}{}{}i)", fmt_real(c.re), sign, fmt_real(c.im.abs()))
    }
}

/// Render one polynomial in the system language (highest terms first).
pub fn print_polynomial(p: &Polynomial, names: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (idx, (e, c)) in p.terms().rev().enumerate() {
        let mono: Vec<String> =
            e.0.iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(v, k)| if *k == 1 { names[v].clone() } else { format!("{}^{}", names[v], k) })
                .collect();
        let (neg, mag) = if c.im == 0.0 && c.re.is_sign_negative() { (true, -*c) } else { (false, *c) };
        let body = if mono.is_empty() {
            fmt_coef(mag)
        } else if mag == Complex::new(1.0, 0.0) {
            mono.join("*")
        } else {
            format!("{}*{}", fmt_coef(mag), mono.join("*"))
        };
        match (idx, neg) {
            (0, false) => s.push_str(&body),
            (0, true) => {
                s.push('-');
                s.push_str(&body);
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(&body);
            }
            (_, true) => {
                s.push_str(" - ");
                s.push_str(&body);
            }
        }
    }
    s
}

fn standard_names(g: &Group, names: &[String]) -> Option<()> {
    let contiguous = g.vars.windows(2).all(|w| w[1] == w[0] + 1);
    if !contiguous {
        return None;
    }
    if g.vars.len() == 1 {
        return (names[g.vars[0]] == g.name).then_some(());
    }
    g.vars.iter().enumerate().all(|(j, &v)| names[v] == format!("{}{}", g.name, j + 1)).then_some(())
}

/// Render a system; `poly_names` defaults to `f1, f2, …`.
///
/// Groups whose variables follow the standard naming are declared as such;
/// otherwise every variable is declared as its own one-variable group, so the
/// text always re-parses to the same variables in the same order. The real
/// grouping travels separately in archives.
pub fn print_system(sys: &PolySystem, poly_names: Option<&[String]>) -> String {
    let g = &sys.grouping;
    let names = g.names();
    let mut out = String::new();
    let mut v = 0;
    while v < g.nvars() {
        let grp = g.group(g.group_of(v));
        if grp.vars[0] == v && standard_names(grp, names).is_some() {
            if grp.vars.len() == 1 {
                out.push_str(&format!("group {};\n", grp.name));
            } else {
                out.push_str(&format!("group {}[{}];\n", grp.name, grp.vars.len()));
            }
            v += grp.vars.len();
        } else {
            out.push_str(&format!("group {};\n", names[v]));
            v += 1;
        }
    }
    for (i, p) in sys.polys.iter().enumerate() {
        let name = poly_names.and_then(|n| n.get(i).cloned()).unwrap_or_else(|| format!("f{}", i + 1));
        out.push_str(&format!("{} = {};\n", name, print_polynomial(p, names)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cubic() {
        let doc = parse_system("group x; group y; C = y^2 - 2*x*y - x^3 + x;").unwrap();
        assert_eq!(doc.system.grouping.ngroups(), 2);
        assert_eq!(doc.system.grouping.size(0), 1);
        assert_eq!(doc.system.len(), 1);
        assert_eq!(doc.system.polys[0].nterms(), 4);
        assert_eq!(doc.names, vec!["C"]);
    }

    #[test]
    fn undeclared_identifier() {
        let e = parse_system("group x[3]; f = x1*x4;").unwrap_err();
        assert!(matches!(e, Error::UndeclaredIdentifier { ref name, .. } if name == "x4"));
    }

    #[test]
    fn duplicate_group() {
        assert_eq!(parse_system("group x; group x; f = x;").unwrap_err(), Error::DuplicateGroup("x".into()));
    }

    #[test]
    fn syntax_error_position() {
        match parse_system("group x;\nf = x + * 2;").unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (2, 9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complex_literals() {
        let doc = parse_system("group z; f = (1.5-2i)*z + (-3+0.25i);").unwrap();
        let p = &doc.system.polys[0];
        assert_eq!(p.coefficient(&[1]), Complex::new(1.5, -2.0));
        assert_eq!(p.coefficient(&[0]), Complex::new(-3.0, 0.25));
    }

    #[test]
    fn print_round_trip() {
        let text = "group x; group y[2];\n a = (x - 1e-7)^3*y2 - (0.1+0.3i)*y1^2;\n b = -x + 2i*y1*y2 + 1/3;";
        assert!(parse_system(text).is_err());
        let text =
            "group x; group y[2];\n a = (x - 1e-7)^3*y2 - (0.1+0.3i)*y1^2;\n b = -x + 2i*y1*y2 + 0.3333333333333333;";
        let doc = parse_system(text).unwrap();
        let printed = print_system(&doc.system, Some(&doc.names));
        let again = parse_system(&printed).unwrap();
        assert_eq!(again.system, doc.system);
        assert_eq!(again.names, doc.names);
    }
}
