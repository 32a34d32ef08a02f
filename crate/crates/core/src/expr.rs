//! A tiny expression language for spot checks.
//!
//! ```text
//! expr    := sum ( '.' sum )?
//! sum     := product ( ('+' | '-') product )*
//! product := unary ( '*' unary )*
//! unary   := '-' unary | primary
//! primary := integer | identifier | '(' expr ')'
//! ```
//!
//! `*` is scalar multiplication, `.` is the intersection pairing. Identifiers
//! may contain letters, digits, `_`, `'` and `^`, so `G_n'` and `pi^f^F`
//! are single names.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::lattice::{DivisorClass, SurfaceModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprValue {
    Integer(BigInt),
    Class(DivisorClass),
}

/// Named classes and the models they live on.
#[derive(Debug, Clone, Default)]
pub struct Scope<'a> {
    models: Vec<&'a SurfaceModel>,
    names: BTreeMap<String, DivisorClass>,
}

impl<'a> Scope<'a> {
    pub fn new() -> Self {
        Scope::default()
    }

    /// Register a model and bind its basis and registry labels. Existing
    /// names are not overwritten.
    pub fn with_model(mut self, model: &'a SurfaceModel) -> Self {
        for label in model.basis() {
            if !self.names.contains_key(label) {
                let c = model.basis_class(label).expect("basis label");
                self.names.insert(label.clone(), c);
            }
        }
        for curve in model.curves() {
            self.names
                .entry(curve.label.clone())
                .or_insert_with(|| curve.class.clone());
        }
        self.models.push(model);
        self
    }

    pub fn bind(mut self, name: impl Into<String>, class: DivisorClass) -> Self {
        self.names.insert(name.into(), class);
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.keys().map(String::as_str)
    }

    pub fn model_of(&self, d: &DivisorClass) -> Option<&'a SurfaceModel> {
        self.models.iter().copied().find(|m| m.id() == d.model())
    }

    /// An integer in full, or a class in its model's basis labels.
    pub fn render(&self, v: &ExprValue) -> String {
        match v {
            ExprValue::Integer(i) => i.to_string(),
            ExprValue::Class(c) => match self.model_of(c) {
                Some(m) => format!("{} (on {})", m.render(c), m.name()),
                None => format!("{:?}", c.coeffs()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Dot,
    LParen,
    RParen,
    End,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '^')
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i));
            it.next();
        } else if c.is_whitespace() {
            it.next();
        } else if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            let v: BigInt = text[i..end].parse().expect("digits");
            out.push((Tok::Int(v), i));
        } else if is_ident_start(c) {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if !is_ident_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            out.push((Tok::Ident(text[i..end].to_string()), i));
        } else {
            return Err(Error::Syntax {
                offset: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'s, 'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: &'s Scope<'a>,
}

impl Parser<'_, '_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<ExprValue> {
        let lhs = self.sum()?;
        if *self.peek() != Tok::Dot {
            return Ok(lhs);
        }
        let at = self.bump().1;
        let rhs = self.sum()?;
        let (ExprValue::Class(a), ExprValue::Class(b)) = (&lhs, &rhs) else {
            return Err(Error::Type {
                offset: at,
                message: "`.` pairs two divisor classes".into(),
            });
        };
        let model = self.scope.model_of(a).ok_or_else(|| Error::Type {
            offset: at,
            message: "class has no model in scope".into(),
        })?;
        Ok(ExprValue::Integer(model.pair(a, b)?))
    }

    fn sum(&mut self) -> Result<ExprValue> {
        let mut acc = self.product()?;
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            let at = self.bump().1;
            let rhs = self.product()?;
            acc = match (acc, rhs) {
                (ExprValue::Integer(a), ExprValue::Integer(b)) => {
                    ExprValue::Integer(if negate { a - b } else { a + b })
                }
                (ExprValue::Class(a), ExprValue::Class(b)) => {
                    ExprValue::Class(if negate { a.sub(&b)? } else { a.add(&b)? })
                }
                _ => {
                    return Err(Error::Type {
                        offset: at,
                        message: "cannot add an integer and a class".into(),
                    })
                }
            };
        }
    }

    fn product(&mut self) -> Result<ExprValue> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            let at = self.bump().1;
            let rhs = self.unary()?;
            acc = match (acc, rhs) {
                (ExprValue::Integer(a), ExprValue::Integer(b)) => ExprValue::Integer(a * b),
                (ExprValue::Integer(k), ExprValue::Class(c))
                | (ExprValue::Class(c), ExprValue::Integer(k)) => ExprValue::Class(c.scale(k)),
                (ExprValue::Class(_), ExprValue::Class(_)) => {
                    return Err(Error::Type {
                        offset: at,
                        message: "`*` is scalar multiplication; use `.` to pair classes".into(),
                    })
                }
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ExprValue> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(match self.unary()? {
                ExprValue::Integer(v) => ExprValue::Integer(-v),
                ExprValue::Class(c) => ExprValue::Class(c.neg()),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ExprValue> {
        let at = self.offset();
        match self.bump().0 {
            Tok::Int(v) => Ok(ExprValue::Integer(v)),
            Tok::Ident(name) => match self.scope.names.get(&name) {
                Some(c) => Ok(ExprValue::Class(c.clone())),
                None => Err(Error::UnknownIdentifier { name, offset: at }),
            },
            Tok::LParen => {
                let v = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(v),
                    (_, off) => Err(Error::Syntax {
                        offset: off,
                        message: "expected `)`".into(),
                    }),
                }
            }
            Tok::End => Err(Error::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            t => Err(Error::Syntax {
                offset: at,
                message: format!("unexpected {}", describe(&t)),
            }),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Int(_) => "integer",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "`+`",
        Tok::Minus => "`-`",
        Tok::Star => "`*`",
        Tok::Dot => "`.`",
        Tok::LParen => "`(`",
        Tok::RParen => "`)`",
        Tok::End => "end of input",
    }
}

pub fn parse_expr(text: &str, scope: &Scope<'_>) -> Result<ExprValue> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        scope,
    };
    let v = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax {
            offset: p.offset(),
            message: format!("unexpected {} after expression", describe(p.peek())),
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Tower;

    fn eval(n: u64, text: &str) -> Result<ExprValue> {
        let t = Tower::new(n).unwrap();
        parse_expr(text, &t.scope())
    }

    fn int(x: i64) -> ExprValue {
        ExprValue::Integer(BigInt::from(x))
    }

    #[test]
    fn closed_form_spot_checks() {
        // 4(2 - 1) - 9
        assert_eq!(eval(3, "(2*A - R).G_n").unwrap(), int(-5));
        assert_eq!(eval(9, "A.A").unwrap(), int(8));
        assert_eq!(eval(7, "D.D").unwrap(), int(4));
        assert_eq!(eval(3, "F.F").unwrap(), int(0));
        assert_eq!(eval(5, "(3*L - F').G_n'").unwrap(), int(-7));
        assert_eq!(eval(5, "L.F'").unwrap(), int(-2));
        assert_eq!(eval(5, "-(F + G_n).G").unwrap(), int(-26));
    }

    #[test]
    fn integer_arithmetic_and_class_results() {
        assert_eq!(eval(3, "2 * 3 - 10").unwrap(), int(-4));
        let t = Tower::new(3).unwrap();
        let v = parse_expr("F + G_n", &t.scope()).unwrap();
        assert_eq!(v, ExprValue::Class(t.a_n.clone()));
        let v = parse_expr("L*2", &t.scope()).unwrap();
        assert_eq!(v, ExprValue::Class(t.l_n.scale(2)));
    }

    #[test]
    fn reports_locations() {
        assert_eq!(
            eval(3, "A.Q").unwrap_err(),
            Error::UnknownIdentifier {
                name: "Q".into(),
                offset: 2
            }
        );
        assert!(matches!(
            eval(3, "(A + R"),
            Err(Error::Syntax { offset: 6, .. })
        ));
        assert!(matches!(
            eval(3, "A + "),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            eval(3, "A / 2"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            eval(3, "A A"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            eval(3, "A * A"),
            Err(Error::Type { offset: 2, .. })
        ));
        assert!(matches!(eval(3, "A + 1"), Err(Error::Type { .. })));
        assert!(matches!(eval(3, "A.L"), Err(Error::MismatchedModel { .. })));
    }
}
