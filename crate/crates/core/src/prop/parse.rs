//! Property grammar: `[name:] P=? [ path ]` or `P>=b [ path ]`.
//!
//! Temporal operators `F`, `G`, `X` and `U` extend the model expression
//! grammar. `F`, `G` and `X` take an until-level operand, so `F a U b`
//! reads as `F (a U b)`.

use crate::chain::var_layout;
use crate::model::lexer::Tok;
use crate::model::parser::Cursor;
use crate::model::{BinOp, Expr, Model, ModelError};

use super::{compile_atoms, Eventuality, Mode, PathFormula, PropError, PropertyQuery, Comparison};

/// General temporal syntax tree before pattern classification.
/// Pure state sub-formulas are collapsed into `State`.
#[derive(Debug, Clone, PartialEq)]
enum Ltl {
    State(Expr),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    F(Box<Ltl>),
    G(Box<Ltl>),
    X(Box<Ltl>),
    U(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    fn not(a: Ltl) -> Ltl {
        match a {
            Ltl::State(e) => Ltl::State(Expr::not(e)),
            a => Ltl::Not(Box::new(a)),
        }
    }

    fn binary(op: BinOp, a: Ltl, b: Ltl) -> Ltl {
        match (a, b) {
            (Ltl::State(x), Ltl::State(y)) => Ltl::State(Expr::binary(op, x, y)),
            (a, b) => {
                let (a, b) = (Box::new(a), Box::new(b));
                match op {
                    BinOp::And => Ltl::And(a, b),
                    BinOp::Or => Ltl::Or(a, b),
                    _ => Ltl::Implies(a, b),
                }
            }
        }
    }

    fn render(&self) -> String {
        match self {
            Ltl::State(e) => format!("({e})"),
            Ltl::Not(a) => format!("!{}", a.render()),
            Ltl::And(a, b) => format!("({} & {})", a.render(), b.render()),
            Ltl::Or(a, b) => format!("({} | {})", a.render(), b.render()),
            Ltl::Implies(a, b) => format!("({} => {})", a.render(), b.render()),
            Ltl::F(a) => format!("F {}", a.render()),
            Ltl::G(a) => format!("G {}", a.render()),
            Ltl::X(a) => format!("X {}", a.render()),
            Ltl::U(a, b) => format!("({} U {})", a.render(), b.render()),
        }
    }
}

fn is_temporal_keyword(tok: &Tok) -> bool {
    matches!(tok, Tok::Ident(s) if matches!(s.as_str(), "F" | "G" | "X"))
}

fn parse_implies(cur: &mut Cursor) -> Result<Ltl, ModelError> {
    let lhs = parse_or(cur)?;
    if cur.eat(&Tok::Implies) {
        let rhs = parse_implies(cur)?;
        return Ok(Ltl::binary(BinOp::Implies, lhs, rhs));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor) -> Result<Ltl, ModelError> {
    let mut lhs = parse_and(cur)?;
    while cur.eat(&Tok::Or) {
        let rhs = parse_and(cur)?;
        lhs = Ltl::binary(BinOp::Or, lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor) -> Result<Ltl, ModelError> {
    let mut lhs = parse_until(cur)?;
    while cur.eat(&Tok::And) {
        let rhs = parse_until(cur)?;
        lhs = Ltl::binary(BinOp::And, lhs, rhs);
    }
    Ok(lhs)
}

fn parse_until(cur: &mut Cursor) -> Result<Ltl, ModelError> {
    let lhs = parse_unary(cur)?;
    if cur.eat_keyword("U") {
        let rhs = parse_unary(cur)?;
        return Ok(Ltl::U(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<Ltl, ModelError> {
    if cur.eat(&Tok::Not) {
        return Ok(Ltl::not(parse_unary(cur)?));
    }
    if is_temporal_keyword(cur.peek()) {
        let Tok::Ident(op) = cur.bump() else {
            unreachable!()
        };
        let inner = Box::new(parse_until(cur)?);
        return Ok(match op.as_str() {
            "F" => Ltl::F(inner),
            "G" => Ltl::G(inner),
            _ => Ltl::X(inner),
        });
    }
    if cur.eat(&Tok::LParen) {
        let inner = parse_implies(cur)?;
        cur.expect(&Tok::RParen)?;
        // a parenthesised state expression may continue arithmetically,
        // as in `(x+1)*2 = 4`
        return Ok(match inner {
            Ltl::State(e) => Ltl::State(cur.parse_relational(Some(e))?),
            other => other,
        });
    }
    Ok(Ltl::State(cur.parse_relational(None)?))
}

fn parse_mode(cur: &mut Cursor) -> Result<Mode, PropError> {
    if !cur.eat_keyword("P") {
        return Err(cur.error(&["`P`"]).into());
    }
    let cmp = match cur.bump() {
        Tok::Eq => {
            cur.expect(&Tok::Question)?;
            return Ok(Mode::Query);
        }
        Tok::Ge => Comparison::Ge,
        Tok::Gt => Comparison::Gt,
        Tok::Le => Comparison::Le,
        Tok::Lt => Comparison::Lt,
        _ => return Err(cur.error(&["`=?`", "`>=`", "`>`", "`<=`", "`<`"]).into()),
    };
    let bound = match cur.bump() {
        Tok::Int(v) => v as f64,
        Tok::Double(v) => v,
        _ => return Err(cur.error(&["probability bound"]).into()),
    };
    if !(0.0..=1.0).contains(&bound) {
        return Err(PropError::BoundOutOfRange(bound));
    }
    Ok(Mode::Bound(cmp, bound))
}

fn parse_query(cur: &mut Cursor) -> Result<PropertyQuery, PropError> {
    let name = match (cur.peek().clone(), cur.peek_at(1)) {
        (Tok::Ident(n), Tok::Colon) => {
            cur.bump();
            cur.bump();
            Some(n)
        }
        _ => None,
    };
    let mode = parse_mode(cur)?;
    let close = if cur.eat(&Tok::LBracket) {
        Tok::RBracket
    } else if cur.eat(&Tok::LParen) {
        Tok::RParen
    } else {
        return Err(cur.error(&["`[`", "`(`"]).into());
    };
    let ltl = parse_implies(cur)?;
    cur.expect(&close)?;
    if *cur.peek() != Tok::Eof {
        return Err(cur.error(&["end of property"]).into());
    }
    Ok(PropertyQuery {
        name,
        mode,
        path: classify(ltl)?,
    })
}

/// Parse one query. Atoms are not resolved; see [`parse_property_for`].
pub fn parse_property(text: &str) -> Result<PropertyQuery, PropError> {
    let mut cur = Cursor::new(text)?;
    parse_query(&mut cur)
}

/// Parse one query and check that its atoms resolve against `model`.
pub fn parse_property_for(text: &str, model: &Model) -> Result<PropertyQuery, PropError> {
    let query = parse_property(text)?;
    let consts = model.constant_values()?;
    let vars = var_layout(model, &consts)?;
    compile_atoms(&query.path, &vars, &consts)?;
    Ok(query)
}

/// Parse a `.qry` file: one query per line, `//` comments, blank lines
/// ignored. Syntax errors report the line within the file.
pub fn parse_property_file(text: &str) -> Result<Vec<PropertyQuery>, PropError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split("//").next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match parse_property(body) {
            Ok(q) => out.push(q),
            Err(PropError::Syntax(ModelError::Syntax {
                col,
                expected,
                found,
                ..
            })) => {
                return Err(PropError::Syntax(ModelError::Syntax {
                    line: i + 1,
                    col,
                    expected,
                    found,
                }))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn unsupported(ltl: &Ltl) -> PropError {
    PropError::UnsupportedPattern(ltl.render())
}

fn classify(ltl: Ltl) -> Result<PathFormula, PropError> {
    match ltl {
        Ltl::F(inner) => match *inner {
            Ltl::State(e) => Ok(PathFormula::Eventually(e)),
            other => Err(unsupported(&Ltl::F(Box::new(other)))),
        },
        Ltl::U(a, b) => match (*a, *b) {
            (Ltl::State(a), Ltl::State(b)) => Ok(PathFormula::Until(a, b)),
            (a, b) => Err(unsupported(&Ltl::U(Box::new(a), Box::new(b)))),
        },
        Ltl::G(inner) => classify_globally(*inner),
        other => Err(unsupported(&other)),
    }
}

fn classify_globally(inner: Ltl) -> Result<PathFormula, PropError> {
    match inner {
        Ltl::State(e) => Ok(PathFormula::Globally(e)),
        Ltl::Implies(a, b) => match (*a, *b) {
            (Ltl::State(phi), Ltl::F(psi)) if matches!(*psi, Ltl::State(_)) => {
                let Ltl::State(psi) = *psi else { unreachable!() };
                Ok(PathFormula::Response(phi, psi))
            }
            (Ltl::State(phi), Ltl::Not(x)) if matches!(&*x, Ltl::X(p) if matches!(**p, Ltl::State(_))) => {
                let Ltl::X(p) = *x else { unreachable!() };
                let Ltl::State(psi) = *p else { unreachable!() };
                Ok(PathFormula::NextSafety(phi, psi))
            }
            (Ltl::State(phi), Ltl::X(p)) if matches!(*p, Ltl::State(_)) => {
                // X !ψ is equivalent to !X ψ
                let Ltl::State(e) = *p else { unreachable!() };
                let psi = match e {
                    Expr::Not(inner) => *inner,
                    e => Expr::not(e),
                };
                Ok(PathFormula::NextSafety(phi, psi))
            }
            (a, b) => Err(unsupported(&Ltl::G(Box::new(Ltl::Implies(
                Box::new(a),
                Box::new(b),
            ))))),
        },
        other => {
            let mut disjuncts = Vec::new();
            flatten_or(other.clone(), &mut disjuncts);
            let items = disjuncts
                .into_iter()
                .map(|d| match d {
                    Ltl::F(inner) => match *inner {
                        Ltl::State(e) => Some(Eventuality::Eventually(e)),
                        Ltl::U(a, b) => match (*a, *b) {
                            (Ltl::State(a), Ltl::State(b)) => {
                                Some(Eventuality::EventuallyUntil(a, b))
                            }
                            _ => None,
                        },
                        _ => None,
                    },
                    _ => None,
                })
                .collect::<Option<Vec<_>>>();
            match items {
                Some(items) => Ok(PathFormula::GloballyAny(items)),
                None => Err(unsupported(&Ltl::G(Box::new(other)))),
            }
        }
    }
}

fn flatten_or(ltl: Ltl, out: &mut Vec<Ltl>) {
    match ltl {
        Ltl::Or(a, b) => {
            flatten_or(*a, out);
            flatten_or(*b, out);
        }
        other => out.push(other),
    }
}
