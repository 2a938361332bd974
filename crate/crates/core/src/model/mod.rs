//! Guarded-command probabilistic modelling language.
//!
//! A model is a list of typed constants followed by modules. Each module
//! declares bounded-integer or boolean variables and guarded commands of
//! the form `[label] guard -> p1:(x'=e1)&(y'=e2) + p2:(...);`. Commands
//! sharing a label synchronise across modules when the model is composed
//! into a chain (see [`crate::chain`]).
//!
//! ```
//! use assurekit::model::parse_model;
//!
//! let model = parse_model(
//!     "const double p = 0.3;
//!      module coin
//!        heads : bool init false;
//!        [flip] !heads -> p : (heads'=true) + 1-p : (heads'=false);
//!      endmodule",
//! ).unwrap();
//! assert_eq!(model.modules[0].commands[0].branches.len(), 2);
//! ```

mod ast;
mod eval;
pub(crate) mod lexer;
pub(crate) mod parser;
mod print;

use std::collections::{BTreeMap, HashMap, HashSet};

pub use ast::{
    Assignment, BinOp, Branch, Command, ConstantDef, Domain, Expr, Kind, Model, ModuleDef,
    VarDecl,
};
pub use eval::{eval_bool, eval_compiled, eval_with, infer_kind, Slot, Value};

/// Errors raised while parsing, validating, or evaluating a model.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("syntax error at {line}:{col}: found {found}{}", expected_list(.expected))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("duplicate {what} name `{name}`")]
    DuplicateName { name: String, what: &'static str },
    #[error("unbound identifier `{name}` in {context}")]
    UnboundIdentifier { name: String, context: String },
    #[error("type error: {0}")]
    TypeError(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    IntegerOverflow,
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("constant `{name}` is {expected}, got a {found} value")]
    KindMismatch {
        name: String,
        expected: Kind,
        found: Kind,
    },
    #[error("probability {value} of {context} lies outside [0,1]")]
    ProbabilityOutOfRange { context: String, value: f64 },
    #[error("constant `{0}` is defined in terms of itself")]
    CyclicConstant(String),
    #[error("variable `{var}`: value {value} outside [{lo}..{hi}]")]
    OutOfDomain {
        var: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{var}` assigned twice in one branch of module `{module}`")]
    DuplicateAssignment { var: String, module: String },
    #[error("probability in module `{module}` references variable `{var}`; only constants are allowed")]
    ProbabilityReferencesVariable { module: String, var: String },
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(", expected {}", expected.join(" or "))
    }
}

/// Constant bindings by name.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ConstantSet(pub BTreeMap<String, Value>);

impl ConstantSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.get(name).copied()
    }

    pub fn get_f64(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Value::as_f64)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.0.insert(name.into(), value);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Named variable valuation.
pub type Valuation = BTreeMap<String, Value>;

/// Parse and validate model text.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let model = parser::parse_syntax(text)?;
    validate(&model)?;
    Ok(model)
}

/// Parse a model file; the model is named after the file stem.
pub fn parse_model_file(path: &std::path::Path) -> Result<Model, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut model = parse_model(&text)?;
    model.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(model)
}

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Rebind constants. Overridden constants become literals; constants
/// defined in terms of them re-evaluate.
pub fn set_constants(model: &Model, overrides: &ConstantSet) -> Result<Model, ModelError> {
    let prob_consts = probability_constants(model);
    let mut out = model.clone();
    for (name, value) in overrides.iter() {
        let def = out
            .constants
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| ModelError::UnknownConstant(name.to_string()))?;
        let value = coerce(name, def.kind, value)?;
        if let Value::Double(p) = value {
            if prob_consts.contains(name) && !(0.0..=1.0).contains(&p) {
                return Err(ModelError::ProbabilityOutOfRange {
                    context: format!("constant `{name}`"),
                    value: p,
                });
            }
        }
        def.value = match value {
            Value::Int(v) => Expr::Int(v),
            Value::Double(v) => Expr::Double(v),
            Value::Bool(v) => Expr::Bool(v),
        };
    }
    validate(&out)?;
    Ok(out)
}

/// Constants used directly as a branch probability anywhere in the model.
pub fn probability_constants(model: &Model) -> HashSet<String> {
    let mut out = HashSet::new();
    for m in &model.modules {
        for c in &m.commands {
            for b in &c.branches {
                if let Some(p) = &b.prob {
                    p.for_each_ident(&mut |id: &String| {
                        out.insert(id.clone());
                    });
                }
            }
        }
    }
    out
}

fn coerce(name: &str, kind: Kind, value: Value) -> Result<Value, ModelError> {
    match (kind, value) {
        (Kind::Double, Value::Int(v)) => Ok(Value::Double(v as f64)),
        (k, v) if v.kind() == k => Ok(v),
        (k, v) => Err(ModelError::KindMismatch {
            name: name.to_string(),
            expected: k,
            found: v.kind(),
        }),
    }
}

/// Evaluate an expression against a named state and constant binding.
pub fn eval_expr(expr: &Expr, state: &Valuation, consts: &ConstantSet) -> Result<Value, ModelError> {
    eval_with(expr, &mut |name: &String| {
        state
            .get(name)
            .copied()
            .or_else(|| consts.get(name))
            .ok_or_else(|| ModelError::UnboundIdentifier {
                name: name.clone(),
                context: "expression".into(),
            })
    })
}

impl Model {
    /// Evaluate all constants in dependency order.
    pub fn constant_values(&self) -> Result<ConstantSet, ModelError> {
        let defs: HashMap<&str, &ConstantDef> =
            self.constants.iter().map(|c| (c.name.as_str(), c)).collect();
        let mut done = ConstantSet::new();
        let mut visiting = HashSet::new();
        for c in &self.constants {
            eval_constant(&c.name, &defs, &mut done, &mut visiting)?;
        }
        Ok(done)
    }

    /// Named initial state.
    pub fn initial_valuation(&self, consts: &ConstantSet) -> Result<Valuation, ModelError> {
        let mut out = Valuation::new();
        for (_, v) in self.variables() {
            let (lo, _) = domain_bounds(v, consts)?;
            let value = match (&v.domain, &v.init) {
                (_, Some(e)) => eval_expr(e, &Valuation::new(), consts)?,
                (Domain::Bool, None) => Value::Bool(false),
                (Domain::Range { .. }, None) => Value::Int(lo),
            };
            out.insert(v.name.clone(), value);
        }
        Ok(out)
    }
}

fn eval_constant(
    name: &str,
    defs: &HashMap<&str, &ConstantDef>,
    done: &mut ConstantSet,
    visiting: &mut HashSet<String>,
) -> Result<Value, ModelError> {
    if let Some(v) = done.get(name) {
        return Ok(v);
    }
    let def = defs.get(name).ok_or_else(|| ModelError::UnboundIdentifier {
        name: name.to_string(),
        context: "constant definition".into(),
    })?;
    if !visiting.insert(name.to_string()) {
        return Err(ModelError::CyclicConstant(name.to_string()));
    }
    let raw = eval_with(&def.value, &mut |dep: &String| {
        eval_constant(dep, defs, done, visiting)
    })?;
    let value = coerce(name, def.kind, raw)?;
    visiting.remove(name);
    done.insert(name, value);
    Ok(value)
}

/// Integer bounds of a variable (bools are `[0..1]`).
pub fn domain_bounds(v: &VarDecl, consts: &ConstantSet) -> Result<(i64, i64), ModelError> {
    match &v.domain {
        Domain::Bool => Ok((0, 1)),
        Domain::Range { lo, hi } => {
            let eval_int = |e: &Expr| -> Result<i64, ModelError> {
                let val = eval_expr(e, &Valuation::new(), consts).map_err(|err| match err {
                    ModelError::UnboundIdentifier { name, .. } => ModelError::UnboundIdentifier {
                        name,
                        context: format!("domain of `{}`", v.name),
                    },
                    other => other,
                })?;
                val.as_int().ok_or_else(|| {
                    ModelError::TypeError(format!("bounds of `{}` must be int", v.name))
                })
            };
            let (lo, hi) = (eval_int(lo)?, eval_int(hi)?);
            if lo > hi {
                return Err(ModelError::EmptyDomain(v.name.clone()));
            }
            Ok((lo, hi))
        }
    }
}

fn var_kind(v: &VarDecl) -> Kind {
    match v.domain {
        Domain::Bool => Kind::Bool,
        Domain::Range { .. } => Kind::Int,
    }
}

/// Name resolution for compiling expressions: variables map to dense
/// state slots, constants fold to literals.
#[derive(Debug, Clone)]
pub struct Scope {
    vars: HashMap<String, (usize, Kind)>,
    consts: ConstantSet,
}

impl Scope {
    pub fn new(model: &Model, consts: ConstantSet) -> Self {
        let vars = model
            .variables()
            .enumerate()
            .map(|(i, (_, v))| (v.name.clone(), (i, var_kind(v))))
            .collect();
        Scope { vars, consts }
    }

    pub fn from_parts(vars: impl IntoIterator<Item = (String, usize, Kind)>, consts: ConstantSet) -> Self {
        Scope {
            vars: vars.into_iter().map(|(n, i, k)| (n, (i, k))).collect(),
            consts,
        }
    }

    pub fn consts(&self) -> &ConstantSet {
        &self.consts
    }

    pub fn var(&self, name: &str) -> Option<(usize, Kind)> {
        self.vars.get(name).copied()
    }

    pub fn kind_of(&self, name: &str) -> Option<Kind> {
        self.var(name)
            .map(|(_, k)| k)
            .or_else(|| self.consts.get(name).map(Value::kind))
    }

    pub fn compile(&self, expr: &Expr, context: &str) -> Result<Expr<Slot>, ModelError> {
        expr.try_map_idents(&mut |name: &String| {
            if let Some((idx, kind)) = self.var(name) {
                return Ok(Expr::Ident(Slot::Var(idx, kind)));
            }
            match self.consts.get(name) {
                Some(Value::Int(v)) => Ok(Expr::Int(v)),
                Some(Value::Double(v)) => Ok(Expr::Double(v)),
                Some(Value::Bool(v)) => Ok(Expr::Bool(v)),
                None => Err(ModelError::UnboundIdentifier {
                    name: name.clone(),
                    context: context.to_string(),
                }),
            }
        })
    }

    pub fn infer(&self, expr: &Expr, context: &str) -> Result<Kind, ModelError> {
        infer_kind(expr, &mut |name: &String| {
            self.kind_of(name).ok_or_else(|| ModelError::UnboundIdentifier {
                name: name.clone(),
                context: context.to_string(),
            })
        })
    }
}

fn validate(model: &Model) -> Result<(), ModelError> {
    let mut seen: HashMap<&str, &'static str> = HashMap::new();
    for c in &model.constants {
        if seen.insert(c.name.as_str(), "constant").is_some() {
            return Err(ModelError::DuplicateName {
                name: c.name.clone(),
                what: "constant",
            });
        }
    }
    for m in &model.modules {
        if seen.insert(m.name.as_str(), "module").is_some() {
            return Err(ModelError::DuplicateName {
                name: m.name.clone(),
                what: "module",
            });
        }
    }
    for (_, v) in model.variables() {
        if seen.insert(v.name.as_str(), "variable").is_some() {
            return Err(ModelError::DuplicateName {
                name: v.name.clone(),
                what: "variable",
            });
        }
    }

    let consts = model.constant_values()?;
    let scope = Scope::new(model, consts.clone());

    for (m, v) in model.variables() {
        let (lo, hi) = domain_bounds(v, &consts)?;
        if let Some(init) = &v.init {
            let ctx = format!("init of `{}`", v.name);
            let value = eval_expr(init, &Valuation::new(), &consts).map_err(|e| match e {
                ModelError::UnboundIdentifier { name, .. } => {
                    if scope.var(&name).is_some() {
                        ModelError::TypeError(format!(
                            "{ctx} in module `{}` must be constant",
                            m.name
                        ))
                    } else {
                        ModelError::UnboundIdentifier { name, context: ctx.clone() }
                    }
                }
                other => other,
            })?;
            let slot = match (var_kind(v), value) {
                (Kind::Bool, Value::Bool(b)) => b as i64,
                (Kind::Int, Value::Int(i)) => i,
                (k, val) => {
                    return Err(ModelError::TypeError(format!(
                        "{ctx}: expected {k}, found {}",
                        val.kind()
                    )))
                }
            };
            if slot < lo || slot > hi {
                return Err(ModelError::OutOfDomain {
                    var: v.name.clone(),
                    value: slot,
                    lo,
                    hi,
                });
            }
        }
    }

    for m in &model.modules {
        for (ci, c) in m.commands.iter().enumerate() {
            let ctx = format!("guard of command {} in module `{}`", ci + 1, m.name);
            let k = scope.infer(&c.guard, &ctx)?;
            if k != Kind::Bool {
                return Err(ModelError::TypeError(format!("{ctx} must be bool, found {k}")));
            }
            for b in &c.branches {
                if let Some(p) = &b.prob {
                    let pctx = format!("probability in module `{}`", m.name);
                    for id in p.idents() {
                        if scope.var(id).is_some() {
                            return Err(ModelError::ProbabilityReferencesVariable {
                                module: m.name.clone(),
                                var: id.to_string(),
                            });
                        }
                    }
                    let k = scope.infer(p, &pctx)?;
                    if k == Kind::Bool {
                        return Err(ModelError::TypeError(format!("{pctx} must be numeric")));
                    }
                    let value = eval_expr(p, &Valuation::new(), &consts)?
                        .as_f64()
                        .unwrap_or(f64::NAN);
                    if !(0.0..=1.0).contains(&value) {
                        return Err(ModelError::ProbabilityOutOfRange {
                            context: format!("`{p}` in module `{}`", m.name),
                            value,
                        });
                    }
                }
                let mut written = HashSet::new();
                for a in &b.updates {
                    let Some((_, vk)) = scope.var(&a.var) else {
                        return Err(ModelError::UnboundIdentifier {
                            name: a.var.clone(),
                            context: format!("update in module `{}`", m.name),
                        });
                    };
                    if !written.insert(a.var.as_str()) {
                        return Err(ModelError::DuplicateAssignment {
                            var: a.var.clone(),
                            module: m.name.clone(),
                        });
                    }
                    let ek = scope.infer(&a.value, &format!("update of `{}`", a.var))?;
                    let ok = match vk {
                        Kind::Bool => ek == Kind::Bool,
                        _ => ek == Kind::Int,
                    };
                    if !ok {
                        return Err(ModelError::TypeError(format!(
                            "update of `{}` expects {vk}, found {ek}",
                            a.var
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}
