use std::fmt;

use super::ast::{BinOp, Expr, Kind};
use super::ModelError;

/// Runtime value of an expression.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Double(f64),
}

impl Value {
    pub fn kind(self) -> Kind {
        match self {
            Value::Int(_) => Kind::Int,
            Value::Double(_) => Kind::Double,
            Value::Bool(_) => Kind::Bool,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(v as f64),
            Value::Double(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Encoding used in dense state vectors: ints verbatim, bools as 0/1.
    pub fn to_slot(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(b) => Some(b as i64),
            Value::Double(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Double(v) => write!(f, "{v:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Identifier resolved against a variable layout and constant binding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    /// Index into the dense state vector, with the variable's kind.
    Var(usize, Kind),
}

/// Evaluate an expression, resolving identifiers through `lookup`.
pub fn eval_with<I>(
    expr: &Expr<I>,
    lookup: &mut impl FnMut(&I) -> Result<Value, ModelError>,
) -> Result<Value, ModelError> {
    match expr {
        Expr::Int(v) => Ok(Value::Int(*v)),
        Expr::Double(v) => Ok(Value::Double(*v)),
        Expr::Bool(v) => Ok(Value::Bool(*v)),
        Expr::Ident(id) => lookup(id),
        Expr::Neg(e) => match eval_with(e, lookup)? {
            Value::Int(v) => v
                .checked_neg()
                .map(Value::Int)
                .ok_or(ModelError::IntegerOverflow),
            Value::Double(v) => Ok(Value::Double(-v)),
            Value::Bool(_) => Err(type_error("-", Kind::Bool)),
        },
        Expr::Not(e) => match eval_with(e, lookup)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            other => Err(type_error("!", other.kind())),
        },
        Expr::Binary(op, l, r) => {
            // Boolean connectives short-circuit.
            match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    let lv = expect_bool(eval_with(l, lookup)?, *op)?;
                    let decided = match op {
                        BinOp::And if !lv => Some(false),
                        BinOp::Or if lv => Some(true),
                        BinOp::Implies if !lv => Some(true),
                        _ => None,
                    };
                    if let Some(b) = decided {
                        return Ok(Value::Bool(b));
                    }
                    let rv = expect_bool(eval_with(r, lookup)?, *op)?;
                    Ok(Value::Bool(rv))
                }
                _ => {
                    let lv = eval_with(l, lookup)?;
                    let rv = eval_with(r, lookup)?;
                    apply_binary(*op, lv, rv)
                }
            }
        }
    }
}

fn expect_bool(v: Value, op: BinOp) -> Result<bool, ModelError> {
    v.as_bool().ok_or_else(|| type_error(op.symbol(), v.kind()))
}

fn type_error(op: &str, found: Kind) -> ModelError {
    ModelError::TypeError(format!("operator `{op}` cannot be applied to {found}"))
}

fn apply_binary(op: BinOp, lv: Value, rv: Value) -> Result<Value, ModelError> {
    use Value::*;
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => match (lv, rv) {
            (Int(a), Int(b)) => {
                let r = match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                };
                r.map(Int).ok_or(ModelError::IntegerOverflow)
            }
            _ => {
                let (a, b) = numeric_pair(op, lv, rv)?;
                Ok(Double(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    _ => a * b,
                }))
            }
        },
        BinOp::Div => {
            let (a, b) = numeric_pair(op, lv, rv)?;
            if b == 0.0 {
                return Err(ModelError::DivisionByZero);
            }
            Ok(Double(a / b))
        }
        BinOp::Eq | BinOp::Ne => {
            let equal = match (lv, rv) {
                (Bool(a), Bool(b)) => a == b,
                (Int(a), Int(b)) => a == b,
                _ => {
                    let (a, b) = numeric_pair(op, lv, rv)?;
                    a == b
                }
            };
            Ok(Bool(if op == BinOp::Eq { equal } else { !equal }))
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = match (lv, rv) {
                (Int(a), Int(b)) => a.partial_cmp(&b),
                _ => {
                    let (a, b) = numeric_pair(op, lv, rv)?;
                    a.partial_cmp(&b)
                }
            };
            let Some(ord) = ord else {
                return Ok(Bool(false));
            };
            Ok(Bool(match op {
                BinOp::Lt => ord.is_lt(),
                BinOp::Le => ord.is_le(),
                BinOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("handled by caller"),
    }
}

fn numeric_pair(op: BinOp, lv: Value, rv: Value) -> Result<(f64, f64), ModelError> {
    match (lv.as_f64(), rv.as_f64()) {
        (Some(a), Some(b)) => Ok((a, b)),
        (None, _) => Err(type_error(op.symbol(), lv.kind())),
        (_, None) => Err(type_error(op.symbol(), rv.kind())),
    }
}

/// Evaluate a compiled expression against a dense state vector.
pub fn eval_compiled(expr: &Expr<Slot>, state: &[i64]) -> Result<Value, ModelError> {
    eval_with(expr, &mut |slot: &Slot| {
        let Slot::Var(idx, kind) = *slot;
        Ok(match kind {
            Kind::Bool => Value::Bool(state[idx] != 0),
            _ => Value::Int(state[idx]),
        })
    })
}

/// Evaluate a compiled boolean expression (guards, predicates).
pub fn eval_bool(expr: &Expr<Slot>, state: &[i64]) -> Result<bool, ModelError> {
    let v = eval_compiled(expr, state)?;
    v.as_bool()
        .ok_or_else(|| ModelError::TypeError(format!("expected bool, found {}", v.kind())))
}

/// Static kind inference; `kind_of` gives the kind of an identifier.
pub fn infer_kind<I>(
    expr: &Expr<I>,
    kind_of: &mut impl FnMut(&I) -> Result<Kind, ModelError>,
) -> Result<Kind, ModelError> {
    Ok(match expr {
        Expr::Int(_) => Kind::Int,
        Expr::Double(_) => Kind::Double,
        Expr::Bool(_) => Kind::Bool,
        Expr::Ident(id) => kind_of(id)?,
        Expr::Neg(e) => match infer_kind(e, kind_of)? {
            Kind::Bool => return Err(type_error("-", Kind::Bool)),
            k => k,
        },
        Expr::Not(e) => match infer_kind(e, kind_of)? {
            Kind::Bool => Kind::Bool,
            k => return Err(type_error("!", k)),
        },
        Expr::Binary(op, l, r) => {
            let lk = infer_kind(l, kind_of)?;
            let rk = infer_kind(r, kind_of)?;
            match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    for k in [lk, rk] {
                        if k != Kind::Bool {
                            return Err(type_error(op.symbol(), k));
                        }
                    }
                    Kind::Bool
                }
                BinOp::Eq | BinOp::Ne => {
                    if (lk == Kind::Bool) != (rk == Kind::Bool) {
                        return Err(ModelError::TypeError(format!(
                            "cannot compare {lk} with {rk}"
                        )));
                    }
                    Kind::Bool
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    for k in [lk, rk] {
                        if k == Kind::Bool {
                            return Err(type_error(op.symbol(), k));
                        }
                    }
                    Kind::Bool
                }
                BinOp::Div => {
                    for k in [lk, rk] {
                        if k == Kind::Bool {
                            return Err(type_error(op.symbol(), k));
                        }
                    }
                    Kind::Double
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => match (lk, rk) {
                    (Kind::Int, Kind::Int) => Kind::Int,
                    (Kind::Bool, _) | (_, Kind::Bool) => {
                        return Err(type_error(op.symbol(), Kind::Bool))
                    }
                    _ => Kind::Double,
                },
            }
        }
    })
}
