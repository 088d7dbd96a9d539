//! Element expressions such as `t0^2 + rho*xb2*tau`.
//!
//! `t<i>` is τ_i, `x<i>` is ξ_i, `xb<i>` is the conjugate ξ̄_i, `tau` and `rho`
//! are the coefficient classes and any other field class is named as in the
//! preset. Sums, products, powers and parentheses; whitespace is ignored.

use std::fmt;

use wsteen_core::milnor_dual::GEN_CAP;
use wsteen_core::{AElement, DualSteenrod};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub position: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.token.is_empty() {
            write!(f, "{} at position {}", self.message, self.position)
        } else {
            write!(f, "{} '{}' at position {}", self.message, self.token, self.position)
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Plus,
    Star,
    Caret,
    Open,
    Close,
    End,
}

struct Lexer {
    toks: Vec<(usize, Tok, String)>,
    at: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((pos, t, c.to_string()));
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|x| x.1).collect();
            let n = s.parse().map_err(|_| ParseError { position: pos, token: s.clone(), message: "number too large".into() })?;
            toks.push((pos, Tok::Num(n), s));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|x| x.1).collect();
            toks.push((pos, Tok::Ident(s.clone()), s));
        } else {
            return Err(ParseError { position: pos, token: c.to_string(), message: "unexpected character".into() });
        }
    }
    toks.push((text.len(), Tok::End, String::new()));
    Ok(Lexer { toks, at: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn next(&mut self) -> (usize, Tok, String) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ParseError {
        let (pos, _, s) = &self.toks[self.at];
        ParseError { position: *pos, token: s.clone(), message: message.into() }
    }
}

/// Parses `text` into a normal-form element over `alg`'s preset.
pub fn parse_expr(alg: &DualSteenrod, text: &str) -> Result<AElement, ParseError> {
    let mut lx = lex(text)?;
    let x = sum(alg, &mut lx)?;
    if *lx.peek() != Tok::End {
        return Err(lx.error("unexpected token"));
    }
    Ok(x)
}

fn sum(alg: &DualSteenrod, lx: &mut Lexer) -> Result<AElement, ParseError> {
    let mut x = product(alg, lx)?;
    while *lx.peek() == Tok::Plus {
        lx.next();
        x.add_assign(&product(alg, lx)?);
    }
    Ok(x)
}

fn product(alg: &DualSteenrod, lx: &mut Lexer) -> Result<AElement, ParseError> {
    let mut x = power(alg, lx)?;
    while *lx.peek() == Tok::Star {
        lx.next();
        x = alg.mul(&x, &power(alg, lx)?);
    }
    Ok(x)
}

fn power(alg: &DualSteenrod, lx: &mut Lexer) -> Result<AElement, ParseError> {
    let x = atom(alg, lx)?;
    if *lx.peek() != Tok::Caret {
        return Ok(x);
    }
    lx.next();
    match lx.next() {
        (_, Tok::Num(n), _) => Ok(alg.pow(&x, n)),
        (pos, _, s) => Err(ParseError { position: pos, token: s, message: "expected an exponent".into() }),
    }
}

fn atom(alg: &DualSteenrod, lx: &mut Lexer) -> Result<AElement, ParseError> {
    let (pos, tok, text) = lx.next();
    match tok {
        Tok::Num(0) => Ok(AElement::zero()),
        Tok::Num(1) => Ok(AElement::one()),
        Tok::Open => {
            let x = sum(alg, lx)?;
            match lx.next() {
                (_, Tok::Close, _) => Ok(x),
                (p, _, s) => Err(ParseError { position: p, token: s, message: "expected ')'".into() }),
            }
        }
        Tok::Ident(name) => ident(alg, pos, &name),
        Tok::End => Err(ParseError { position: pos, token: text, message: "unexpected end of input".into() }),
        _ => Err(ParseError { position: pos, token: text, message: "unexpected token".into() }),
    }
}

fn generator_index(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn ident(alg: &DualSteenrod, pos: usize, name: &str) -> Result<AElement, ParseError> {
    let cap = |i: usize, lo: usize| {
        if i < lo || i > GEN_CAP {
            Err(ParseError { position: pos, token: name.into(), message: format!("generator index outside {lo}..={GEN_CAP}") })
        } else {
            Ok(i)
        }
    };
    if name == "tau" {
        return Ok(alg.tau());
    }
    if let Some(i) = generator_index(name, "xb") {
        return Ok((*alg.xi_bar_pow(cap(i, 1)?, 1)).clone());
    }
    if let Some(i) = generator_index(name, "x") {
        return Ok(alg.xi_gen(cap(i, 1)?));
    }
    if let Some(i) = generator_index(name, "t") {
        return Ok(alg.tau_gen(cap(i, 0)?));
    }
    let preset = alg.preset();
    if preset.generator_names().iter().any(|g| g == name) {
        return Ok(match preset.class_mono(name) {
            Some(m) => alg.km_elt(m),
            None => AElement::zero(),
        });
    }
    // ρ and the class u vanish in some presets but stay valid tokens.
    if name == "rho" || name == "u" {
        return Ok(AElement::zero());
    }
    Err(ParseError { position: pos, token: name.into(), message: "unknown token".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wsteen_core::FieldPreset;

    fn alg(name: &str) -> DualSteenrod {
        DualSteenrod::new(FieldPreset::by_name(name).unwrap())
    }

    #[test]
    fn grammar_examples() {
        let a = alg("fq3");
        let sq = parse_expr(&a, "t0^2").unwrap();
        let rhs = parse_expr(&a, "rho*t1 + tau*x1 + rho*t0*x1").unwrap();
        assert_eq!(sq, rhs);
        assert_eq!(parse_expr(&a, "1").unwrap(), AElement::one());
        assert_eq!(parse_expr(&a, " xb2 ").unwrap(), parse_expr(&a, "x2 + x1^3").unwrap());
        assert_eq!(parse_expr(&a, "(t0 + t1)*0").unwrap(), AElement::zero());
        assert_eq!(parse_expr(&a, "t0 + t0").unwrap(), AElement::zero());
    }

    #[test]
    fn errors_carry_positions() {
        let a = alg("qcl");
        let e = parse_expr(&a, "t0 * foo").unwrap_err();
        assert_eq!((e.position, e.token.as_str()), (5, "foo"));
        let e = parse_expr(&a, "t0 +").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_expr(&a, "t9").unwrap_err();
        assert!(e.message.contains("outside"));
        let e = parse_expr(&a, "t0 $").unwrap_err();
        assert_eq!(e.token, "$");
        assert!(parse_expr(&a, "(t0").is_err());
        assert!(parse_expr(&a, "t0 t1").is_err());
    }

    #[test]
    fn field_classes() {
        let a = alg("fq1");
        assert!(!parse_expr(&a, "u*t0").unwrap().is_zero());
        assert!(parse_expr(&a, "rho").unwrap().is_zero());
        assert!(parse_expr(&alg("qcl"), "u").unwrap().is_zero());
    }
}
