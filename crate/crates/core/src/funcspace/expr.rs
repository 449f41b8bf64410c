//! Parser for the prefix expression grammar printed by `DiscFunction`'s
//! `Display` impl.
//!
//! ```text
//! expr    := literal | "z" | call
//! literal := number | "c(" number "," number ")"
//! call    := "poly(" literal ("," literal)* ")"
//!          | "rat(" poly "," poly ["," "singular(" literals ")"] ")"
//!          | "blaschke(" literals ")" | "kernel(" literal ")"
//!          | "kernel_power(" literal "," number ")" | "cauchy(" literal ")"
//!          | "pow(" expr "," integer ")" | "mul(" expr "," expr ")"
//!          | "add(" expr "," expr ")" | "prod(" expr "," expr ")"
//!          | "compose(" expr "," expr ")"
//! ```
//!
//! `mul` with a literal first argument is a scalar multiple; otherwise it is
//! the pointwise product, same as `prod`. `pow(z, n)` is the monomial and
//! `pow(f, n)` is `z^n ∘ f`.

use std::str::FromStr;

use num_complex::Complex64;

use super::function::DiscFunction;
use crate::error::{Error, Result};

/// Syntax error at a 0-based character offset into the parsed text.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

enum Failure {
    Syntax(SyntaxError),
    Semantic(Error),
}

type PResult<T> = std::result::Result<T, Failure>;

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

/// A parsed argument, remembering whether it was written as a literal.
struct Node {
    f: DiscFunction,
    literal: Option<Complex64>,
}

impl Parser {
    fn fail<T>(&self, at: usize, message: impl Into<String>) -> PResult<T> {
        Err(Failure::Syntax(SyntaxError {
            offset: at,
            message: message.into(),
        }))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => self.fail(self.pos, format!("expected '{c}', found '{x}'")),
            None => self.fail(self.pos, format!("expected '{c}', found end of input")),
        }
    }

    fn ident(&mut self) -> PResult<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.chars.get(start) {
                Some(c) => self.fail(start, format!("unexpected '{c}'")),
                None => self.fail(start, "unexpected end of input"),
            };
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn number(&mut self) -> PResult<f64> {
        self.skip_ws();
        let start = self.pos;
        let is_num = |c: char| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-');
        while self.pos < self.chars.len() && is_num(self.chars[self.pos]) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ if text.is_empty() => self.fail(start, "expected a number"),
            _ => self.fail(start, format!("invalid number {text:?}")),
        }
    }

    fn integer(&mut self) -> PResult<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<u32>()
            .or_else(|_| self.fail(start, "expected a non-negative integer"))
    }

    fn starts_number(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_digit() || matches!(c, '.' | '+' | '-'))
    }

    fn literal(&mut self) -> PResult<Complex64> {
        if self.starts_number() {
            return Ok(Complex64::new(self.number()?, 0.0));
        }
        let (at, name) = self.ident()?;
        if name != "c" {
            return self.fail(at, format!("expected a complex literal, found {name:?}"));
        }
        self.expect('(')?;
        let re = self.number()?;
        self.expect(',')?;
        let im = self.number()?;
        self.expect(')')?;
        Ok(Complex64::new(re, im))
    }

    /// Comma-separated literals up to (not including) the closing paren.
    fn literals(&mut self) -> PResult<Vec<Complex64>> {
        let mut out = vec![self.literal()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn keyword_list(&mut self, keyword: &str) -> PResult<Vec<Complex64>> {
        let (at, name) = self.ident()?;
        if name != keyword {
            return self.fail(at, format!("expected {keyword}(...), found {name:?}"));
        }
        self.expect('(')?;
        let items = self.literals()?;
        self.expect(')')?;
        Ok(items)
    }

    fn node(&mut self) -> PResult<Node> {
        if self.starts_number() {
            let c = self.literal()?;
            return Ok(Node {
                f: DiscFunction::constant(c),
                literal: Some(c),
            });
        }
        let (at, name) = self.ident()?;
        if name == "z" {
            return Ok(Node {
                f: DiscFunction::identity(),
                literal: None,
            });
        }
        const KNOWN: [&str; 12] = [
            "c", "poly", "rat", "blaschke", "kernel", "kernel_power", "cauchy", "pow", "mul", "add",
            "prod", "compose",
        ];
        if !KNOWN.contains(&name.as_str()) {
            return self.fail(at, format!("unknown function {name:?}"));
        }
        self.expect('(')?;
        let semantic = |r: Result<DiscFunction>| r.map_err(Failure::Semantic);
        let mut literal = None;
        let f = match name.as_str() {
            "c" => {
                let re = self.number()?;
                self.expect(',')?;
                let im = self.number()?;
                let c = Complex64::new(re, im);
                literal = Some(c);
                DiscFunction::constant(c)
            }
            "poly" => DiscFunction::Polynomial(self.literals()?),
            "rat" => {
                let num = self.keyword_list("poly")?;
                self.expect(',')?;
                let den = self.keyword_list("poly")?;
                let singular = if self.peek() == Some(',') {
                    self.pos += 1;
                    self.keyword_list("singular")?
                } else {
                    Vec::new()
                };
                semantic(DiscFunction::rational_with_singular(num, den, singular))?
            }
            "blaschke" => semantic(DiscFunction::blaschke(self.literals()?))?,
            "kernel" => DiscFunction::Kernel {
                a: self.literal()?,
                p: 1.0,
            },
            "kernel_power" => {
                let a = self.literal()?;
                self.expect(',')?;
                let p = self.number()?;
                DiscFunction::Kernel { a, p }
            }
            "cauchy" => DiscFunction::Cauchy(self.literal()?),
            "pow" => {
                let base = self.node()?;
                self.expect(',')?;
                let n = self.integer()?;
                if base.f == DiscFunction::identity() && base.literal.is_none() {
                    DiscFunction::Monomial(n)
                } else {
                    base.f.pow(n)
                }
            }
            "mul" | "add" | "prod" | "compose" => {
                let a = self.node()?;
                self.expect(',')?;
                let b = self.node()?;
                match (name.as_str(), a.literal) {
                    ("mul", Some(c)) => b.f.scale(c),
                    ("mul", None) | ("prod", _) => a.f.mul(b.f),
                    ("add", _) => a.f.add(b.f),
                    _ => a.f.compose(b.f),
                }
            }
            _ => unreachable!("checked against KNOWN"),
        };
        self.expect(')')?;
        if let DiscFunction::Kernel { a, p } = f {
            if a.norm() >= 1.0 {
                return Err(Failure::Semantic(Error::OutsideDomain(a)));
            }
            if !(p.is_finite() && p >= 1.0) {
                return Err(Failure::Semantic(Error::Validation(format!(
                    "kernel power exponent must be >= 1, got {p}"
                ))));
            }
        }
        if let DiscFunction::Cauchy(w) = f {
            if w.norm() >= 1.0 {
                return Err(Failure::Semantic(Error::OutsideDomain(w)));
            }
        }
        Ok(Node { f, literal })
    }
}

/// Parses a function expression. Syntax problems come back as
/// `Ok(Err(SyntaxError))` so callers can place them in a larger document;
/// semantic problems (a Blaschke zero outside the disk, say) are `Err`.
pub fn parse_expression(text: &str) -> Result<std::result::Result<DiscFunction, SyntaxError>> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
    };
    let node = match parser.node() {
        Ok(n) => n,
        Err(Failure::Syntax(e)) => return Ok(Err(e)),
        Err(Failure::Semantic(e)) => return Err(e),
    };
    if let Some(c) = parser.peek() {
        return Ok(Err(SyntaxError {
            offset: parser.pos,
            message: format!("trailing input starting at '{c}'"),
        }));
    }
    Ok(Ok(node.f))
}

impl FromStr for DiscFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expression(s)?.map_err(|e| Error::Parse {
            line: 1,
            column: e.offset + 1,
            message: e.message,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_primitives() {
        assert_eq!("z".parse::<DiscFunction>().unwrap(), DiscFunction::identity());
        assert_eq!(
            "mul(0.5, z)".parse::<DiscFunction>().unwrap(),
            DiscFunction::identity().scale(0.5)
        );
        assert_eq!(
            "pow(z, 3)".parse::<DiscFunction>().unwrap(),
            DiscFunction::Monomial(3)
        );
        assert_eq!(
            "pow(add(1, z), 2)".parse::<DiscFunction>().unwrap(),
            DiscFunction::constant(1.0).add(DiscFunction::identity()).pow(2)
        );
        assert_eq!(
            "mul(z, z)".parse::<DiscFunction>().unwrap(),
            DiscFunction::identity().mul(DiscFunction::identity())
        );
        assert_eq!(
            " c( -1e-3 , 2 ) ".parse::<DiscFunction>().unwrap(),
            DiscFunction::constant(c(-1e-3, 2.0))
        );
        assert_eq!(
            "rat(poly(1, 1), poly(2))".parse::<DiscFunction>().unwrap(),
            DiscFunction::rational(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0)]).unwrap()
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse_expression("mul(0.5, w)").unwrap().unwrap_err();
        assert_eq!(e.offset, 9);
        let e = parse_expression("add(1, z").unwrap().unwrap_err();
        assert_eq!(e.offset, 8);
        let e = parse_expression("z z").unwrap().unwrap_err();
        assert_eq!(e.offset, 2);
        match "poly(1, x)".parse::<DiscFunction>() {
            Err(Error::Parse { line: 1, column: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            "blaschke(0.5, 1.5)".parse::<DiscFunction>(),
            Err(Error::OutsideDomain(_))
        ));
        assert!(matches!(
            "kernel(1)".parse::<DiscFunction>(),
            Err(Error::OutsideDomain(_))
        ));
        assert!("rat(poly(1), poly(1, -1))".parse::<DiscFunction>().is_err());
        assert!("rat(poly(1), poly(1, -1), singular(1))"
            .parse::<DiscFunction>()
            .is_ok());
    }

    fn arb_complex() -> impl Strategy<Value = Complex64> {
        prop_oneof![
            (-5.0..5.0f64).prop_map(|x| c(x, 0.0)),
            (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| c(x, y)),
        ]
    }

    fn arb_in_disk() -> impl Strategy<Value = Complex64> {
        (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
    }

    fn arb_function() -> impl Strategy<Value = DiscFunction> {
        let leaf = prop_oneof![
            prop::collection::vec(arb_complex(), 1..4).prop_map(DiscFunction::Polynomial),
            prop::collection::vec(arb_in_disk(), 1..3).prop_map(DiscFunction::Blaschke),
            arb_in_disk().prop_map(|a| DiscFunction::Kernel { a, p: 1.0 }),
            (arb_in_disk(), 1.0..4.0f64).prop_map(|(a, p)| DiscFunction::Kernel { a, p }),
            arb_in_disk().prop_map(DiscFunction::Cauchy),
            (0u32..5).prop_map(DiscFunction::Monomial),
            Just(DiscFunction::Rational {
                numerator: vec![c(1.0, 0.0)],
                denominator: vec![c(1.0, 0.0), c(-1.0, 0.0)],
                singular: vec![c(1.0, 0.0)],
            }),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (arb_complex(), inner.clone()).prop_map(|(c, f)| f.scale(c)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.compose(b)),
                (inner, 0u32..4).prop_map(|(f, n)| f.pow(n)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(f in arb_function()) {
            let text = f.to_string();
            let back: DiscFunction = text.parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
