//! Probabilistic queries over terminating chains.
//!
//! Six path patterns are supported:
//!
//! | pattern       | formula                         |
//! |---------------|---------------------------------|
//! | `Eventually`  | `F φ`                           |
//! | `Globally`    | `G φ`                           |
//! | `Response`    | `G (φ => F ψ)`                  |
//! | `NextSafety`  | `G (φ => !X ψ)`                 |
//! | `Until`       | `φ U ψ`                         |
//! | `GloballyAny` | `G (F φ₁ \| F (φ₂ U ψ₂) \| …)`  |
//!
//! Each pattern compiles to a small deterministic [`Monitor`]. Checking
//! builds the product of chain and monitor and solves reachability of
//! accepting absorbing configurations.
//!
//! ```
//! use assurekit::chain::{build_chain, BuildOptions};
//! use assurekit::model::parse_model;
//! use assurekit::prop::{check, parse_property};
//!
//! let model = parse_model(
//!     "module coin x : [0..2] init 0; [] x=0 -> 0.25 : (x'=1) + 0.75 : (x'=2); endmodule",
//! )
//! .unwrap();
//! let chain = build_chain(&model, BuildOptions::default()).unwrap();
//! let query = parse_property("P>=0.7 [ F x=2 ]").unwrap();
//! let result = check(&chain, &query).unwrap();
//! assert!((result.probability - 0.75).abs() < 1e-12);
//! assert_eq!(result.verdict, Some(true));
//! ```

mod brute;
mod monitor;
mod parse;
mod solve;

use std::fmt;

use serde::Serialize;

pub use brute::{brute_force_prob, DEFAULT_PATH_CAP};
pub use monitor::{compile_monitor, Monitor, MonitorState};
pub use parse::{parse_property, parse_property_file, parse_property_for};
pub use solve::{reachability_prob, reachability_rows, Solution, Solver, SolverOptions};

use crate::chain::{classify_terminal, Chain, VarInfo};
use crate::model::{BinOp, ConstantSet, Expr, Kind, ModelError, Scope, Slot};

/// Tolerance used when comparing a probability against a bound.
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PropError {
    #[error(transparent)]
    Syntax(#[from] ModelError),
    #[error("unsupported pattern `{0}`; supported: F φ, G φ, G (φ => F ψ), G (φ => !X ψ), φ U ψ, G (F φ | F (φ U ψ) | …)")]
    UnsupportedPattern(String),
    #[error("unbound identifier `{0}` in property")]
    UnboundAtomIdentifier(String),
    #[error("cannot resolve atom: {0}")]
    AtomResolution(String),
    #[error("bound {0} outside [0, 1]")]
    BoundOutOfRange(f64),
    #[error("chain is not terminating: {} bottom components are not absorbing states", .offending.len())]
    NonTerminatingChain { offending: Vec<Vec<usize>> },
    #[error("value iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    NumericalNonConvergence { sweeps: usize, residual: f64 },
    #[error("more than {cap} path prefixes")]
    PathCapExceeded { cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Ge => ">=",
            Comparison::Gt => ">",
            Comparison::Le => "<=",
            Comparison::Lt => "<",
        }
    }

    /// Compare with [`BOUND_TOLERANCE`] slack in favour of the bound.
    pub fn holds(self, p: f64, bound: f64) -> bool {
        match self {
            Comparison::Ge => p >= bound - BOUND_TOLERANCE,
            Comparison::Gt => p > bound + BOUND_TOLERANCE,
            Comparison::Le => p <= bound + BOUND_TOLERANCE,
            Comparison::Lt => p < bound - BOUND_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mode {
    Query,
    Bound(Comparison, f64),
}

/// An eventuality inside [`PathFormula::GloballyAny`].
#[derive(Debug, Clone, PartialEq)]
pub enum Eventuality<E = Expr> {
    Eventually(E),
    EventuallyUntil(E, E),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula<E = Expr> {
    Eventually(E),
    Globally(E),
    Response(E, E),
    NextSafety(E, E),
    Until(E, E),
    GloballyAny(Vec<Eventuality<E>>),
}

impl<E> PathFormula<E> {
    pub fn pattern_name(&self) -> &'static str {
        match self {
            PathFormula::Eventually(_) => "Eventually",
            PathFormula::Globally(_) => "Globally",
            PathFormula::Response(..) => "Response",
            PathFormula::NextSafety(..) => "NextSafety",
            PathFormula::Until(..) => "Until",
            PathFormula::GloballyAny(_) => "GloballyAny",
        }
    }

    /// State predicates in a fixed order; monitors refer to them by index.
    pub fn atoms(&self) -> Vec<&E> {
        match self {
            PathFormula::Eventually(a) | PathFormula::Globally(a) => vec![a],
            PathFormula::Response(a, b) | PathFormula::NextSafety(a, b) | PathFormula::Until(a, b) => {
                vec![a, b]
            }
            PathFormula::GloballyAny(items) => items
                .iter()
                .flat_map(|e| match e {
                    Eventuality::Eventually(a) => vec![a],
                    Eventuality::EventuallyUntil(a, b) => vec![a, b],
                })
                .collect(),
        }
    }

    pub fn try_map<F, T, Err>(&self, mut f: F) -> Result<PathFormula<T>, Err>
    where
        F: FnMut(&E) -> Result<T, Err>,
    {
        Ok(match self {
            PathFormula::Eventually(a) => PathFormula::Eventually(f(a)?),
            PathFormula::Globally(a) => PathFormula::Globally(f(a)?),
            PathFormula::Response(a, b) => PathFormula::Response(f(a)?, f(b)?),
            PathFormula::NextSafety(a, b) => PathFormula::NextSafety(f(a)?, f(b)?),
            PathFormula::Until(a, b) => PathFormula::Until(f(a)?, f(b)?),
            PathFormula::GloballyAny(items) => PathFormula::GloballyAny(
                items
                    .iter()
                    .map(|e| {
                        Ok(match e {
                            Eventuality::Eventually(a) => Eventuality::Eventually(f(a)?),
                            Eventuality::EventuallyUntil(a, b) => {
                                Eventuality::EventuallyUntil(f(a)?, f(b)?)
                            }
                        })
                    })
                    .collect::<Result<_, Err>>()?,
            ),
        })
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Eventually(a) => write!(f, "F ({a})"),
            PathFormula::Globally(a) => write!(f, "G ({a})"),
            PathFormula::Response(a, b) => write!(f, "G (({a}) => F ({b}))"),
            PathFormula::NextSafety(a, b) => write!(f, "G (({a}) => !X ({b}))"),
            PathFormula::Until(a, b) => write!(f, "({a}) U ({b})"),
            PathFormula::GloballyAny(items) => {
                f.write_str("G (")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    match e {
                        Eventuality::Eventually(a) => write!(f, "F ({a})")?,
                        Eventuality::EventuallyUntil(a, b) => write!(f, "F (({a}) U ({b}))")?,
                    }
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyQuery {
    pub name: Option<String>,
    pub mode: Mode,
    pub path: PathFormula,
}

impl fmt::Display for PropertyQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{n}: ")?;
        }
        match self.mode {
            Mode::Query => f.write_str("P=?")?,
            Mode::Bound(c, b) => write!(f, "P{}{b:?}", c.symbol())?,
        }
        write!(f, " [ {} ]", self.path)
    }
}

/// Outcome of [`check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbResult {
    pub probability: f64,
    pub verdict: Option<bool>,
    pub solver: Solver,
    pub residual: f64,
    pub states: usize,
    pub transitions: usize,
    pub product_states: usize,
}

/// Rewrite bare integer-constant atoms (`handoverSuccessful`) into
/// `v = c` for the unique integer variable whose domain holds the value.
pub fn resolve_atoms(expr: &Expr, vars: &[VarInfo], consts: &ConstantSet) -> Result<Expr, PropError> {
    match expr {
        Expr::Ident(name) if !vars.iter().any(|v| &v.name == name) => {
            let Some(value) = consts.get(name) else {
                return Err(PropError::UnboundAtomIdentifier(name.clone()));
            };
            let Some(c) = value.as_int().filter(|_| value.kind() == Kind::Int) else {
                return Ok(expr.clone());
            };
            let candidates: Vec<&VarInfo> = vars
                .iter()
                .filter(|v| v.kind == Kind::Int && v.lo <= c && c <= v.hi)
                .collect();
            match candidates.as_slice() {
                [v] => Ok(Expr::binary(BinOp::Eq, Expr::ident(&v.name), expr.clone())),
                [] => Err(PropError::AtomResolution(format!(
                    "no variable can take the value of `{name}` ({c})"
                ))),
                many => Err(PropError::AtomResolution(format!(
                    "`{name}` ({c}) is ambiguous between {}",
                    many.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(", ")
                ))),
            }
        }
        Expr::Not(e) => Ok(Expr::not(resolve_atoms(e, vars, consts)?)),
        Expr::Binary(op @ (BinOp::And | BinOp::Or | BinOp::Implies), l, r) => Ok(Expr::binary(
            *op,
            resolve_atoms(l, vars, consts)?,
            resolve_atoms(r, vars, consts)?,
        )),
        _ => Ok(expr.clone()),
    }
}

/// Resolve and compile every atom of `path` against a variable layout.
pub(crate) fn compile_atoms(
    path: &PathFormula,
    vars: &[VarInfo],
    consts: &ConstantSet,
) -> Result<PathFormula<Expr<Slot>>, PropError> {
    let scope = Scope::from_parts(
        vars.iter().enumerate().map(|(i, v)| (v.name.clone(), i, v.kind)),
        consts.clone(),
    );
    path.try_map(|atom| {
        let resolved = resolve_atoms(atom, vars, consts)?;
        if let Some(id) = resolved
            .idents()
            .into_iter()
            .find(|id| scope.var(id).is_none() && consts.get(id).is_none())
        {
            return Err(PropError::UnboundAtomIdentifier(id.to_string()));
        }
        if scope.infer(&resolved, "property")? != Kind::Bool {
            return Err(PropError::AtomResolution(format!("`{resolved}` is not boolean")));
        }
        Ok(scope.compile(&resolved, "property")?)
    })
}

/// Evaluate a compiled atom list on one chain state.
pub(crate) fn atom_mask(atoms: &[&Expr<Slot>], state: &[i64]) -> Result<u32, PropError> {
    let mut mask = 0;
    for (i, a) in atoms.iter().enumerate() {
        if crate::model::eval_bool(a, state)? {
            mask |= 1 << i;
        }
    }
    Ok(mask)
}

pub(crate) fn ensure_terminating(chain: &Chain) -> Result<(), PropError> {
    let report = classify_terminal(chain);
    if report.terminating {
        Ok(())
    } else {
        Err(PropError::NonTerminatingChain {
            offending: report.offending,
        })
    }
}

/// Probability that a path of `chain` satisfies the query's path formula.
pub fn check(chain: &Chain, query: &PropertyQuery) -> Result<ProbResult, PropError> {
    check_with(chain, query, SolverOptions::default())
}

pub fn check_with(
    chain: &Chain,
    query: &PropertyQuery,
    options: SolverOptions,
) -> Result<ProbResult, PropError> {
    ensure_terminating(chain)?;
    let compiled = compile_atoms(&query.path, chain.vars(), chain.constants())?;
    let monitor = compile_monitor(&compiled);
    let atoms = compiled.atoms();
    let masks = (0..chain.num_states())
        .map(|s| atom_mask(&atoms, chain.state(s)))
        .collect::<Result<Vec<_>, _>>()?;

    let product = monitor.product(chain, &masks);
    let solution = reachability_rows(&product.rows, &product.targets, options)?;
    let probability = solution.values[0];
    let verdict = match query.mode {
        Mode::Query => None,
        Mode::Bound(c, b) => Some(c.holds(probability, b)),
    };
    let stats = chain.stats();
    Ok(ProbResult {
        probability,
        verdict,
        solver: options.solver,
        residual: solution.residual,
        states: stats.states,
        transitions: stats.transitions,
        product_states: product.rows.len(),
    })
}

#[cfg(test)]
mod tests;
