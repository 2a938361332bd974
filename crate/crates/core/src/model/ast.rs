use std::fmt;

/// Declared kind of a constant or expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Int,
    Double,
    Bool,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Int => "int",
            Kind::Double => "double",
            Kind::Bool => "bool",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Mul,
    Div,
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Implies => "=>",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div => 7,
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

/// Expression tree, generic over how identifiers are represented.
///
/// Source-level expressions carry names; compiled expressions carry
/// [`Slot`]s resolved against a variable layout and a constant binding.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<I = String> {
    Int(i64),
    Double(f64),
    Bool(bool),
    Ident(I),
    Neg(Box<Expr<I>>),
    Not(Box<Expr<I>>),
    Binary(BinOp, Box<Expr<I>>, Box<Expr<I>>),
}

impl<I> Expr<I> {
    pub fn binary(op: BinOp, lhs: Expr<I>, rhs: Expr<I>) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(inner: Expr<I>) -> Self {
        Expr::Not(Box::new(inner))
    }

    /// Visit every identifier in the tree.
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a I)) {
        match self {
            Expr::Int(_) | Expr::Double(_) | Expr::Bool(_) => {}
            Expr::Ident(id) => f(id),
            Expr::Neg(e) | Expr::Not(e) => e.for_each_ident(f),
            Expr::Binary(_, l, r) => {
                l.for_each_ident(f);
                r.for_each_ident(f);
            }
        }
    }

    /// Rebuild the tree with identifiers mapped through `f`.
    pub fn try_map_idents<J, E>(
        &self,
        f: &mut impl FnMut(&I) -> Result<Expr<J>, E>,
    ) -> Result<Expr<J>, E> {
        Ok(match self {
            Expr::Int(v) => Expr::Int(*v),
            Expr::Double(v) => Expr::Double(*v),
            Expr::Bool(v) => Expr::Bool(*v),
            Expr::Ident(id) => f(id)?,
            Expr::Neg(e) => Expr::Neg(Box::new(e.try_map_idents(f)?)),
            Expr::Not(e) => Expr::Not(Box::new(e.try_map_idents(f)?)),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Box::new(l.try_map_idents(f)?),
                Box::new(r.try_map_idents(f)?),
            ),
        })
    }
}

impl Expr<String> {
    pub fn ident(name: impl Into<String>) -> Self {
        Expr::Ident(name.into())
    }

    pub fn idents(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.for_each_ident(&mut |id: &String| out.push(id.as_str()));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantDef {
    pub name: String,
    pub kind: Kind,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Range { lo: Expr, hi: Expr },
    Bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    /// `None` means the lower bound (or `false`).
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub var: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// `None` for the single-branch shorthand `guard -> (x'=1);`.
    pub prob: Option<Expr>,
    pub updates: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub label: Option<String>,
    pub guard: Expr,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleDef {
    pub name: String,
    pub variables: Vec<VarDecl>,
    pub commands: Vec<Command>,
}

impl ModuleDef {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.commands.iter().filter_map(|c| c.label.as_deref())
    }
}

/// A parsed guarded-command model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub name: String,
    pub constants: Vec<ConstantDef>,
    pub modules: Vec<ModuleDef>,
}

impl Model {
    pub fn constant(&self, name: &str) -> Option<&ConstantDef> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn variables(&self) -> impl Iterator<Item = (&ModuleDef, &VarDecl)> {
        self.modules
            .iter()
            .flat_map(|m| m.variables.iter().map(move |v| (m, v)))
    }

    pub fn variable(&self, name: &str) -> Option<&VarDecl> {
        self.variables().map(|(_, v)| v).find(|v| v.name == name)
    }

    /// Sorted, de-duplicated synchronisation labels.
    pub fn labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = self.modules.iter().flat_map(|m| m.labels()).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }
}
