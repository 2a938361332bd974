//! Canonical text form. Printing then re-parsing yields an equal [`Model`].

use std::fmt::{self, Display, Write};

use super::ast::*;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Not(_) => 4,
        Expr::Neg(_) => 8,
        // negative literals print with a leading minus
        Expr::Int(v) if *v < 0 => 8,
        Expr::Double(v) if v.is_sign_negative() => 8,
        _ => 9,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Double(v) => write!(f, "{v:?}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Ident(s) => f.write_str(s),
            Expr::Neg(e) => {
                f.write_char('-')?;
                write_child(f, e, prec(e) < 9)
            }
            Expr::Not(e) => {
                f.write_char('!')?;
                write_child(f, e, prec(e) < 4)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = match op {
                    BinOp::Implies => (prec(l) <= p, prec(r) < p),
                    _ if op.is_relational() => (prec(l) <= p, prec(r) <= p),
                    _ => (prec(l) < p, prec(r) <= p),
                };
                write_child(f, l, lp)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, r, rp)
            }
        }
    }
}

impl Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.prob {
            write!(f, "{p} : ")?;
        }
        if self.updates.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.updates.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "({}' = {})", a.var, a.value)?;
        }
        Ok(())
    }
}

impl Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} -> ",
            self.label.as_deref().unwrap_or(""),
            self.guard
        )?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_char(';')
    }
}

impl Display for VarDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : ", self.name)?;
        match &self.domain {
            Domain::Bool => f.write_str("bool")?,
            Domain::Range { lo, hi } => write!(f, "[{lo}..{hi}]")?,
        }
        if let Some(init) = &self.init {
            write!(f, " init {init}")?;
        }
        f.write_char(';')
    }
}

impl Display for ModuleDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {}", self.name)?;
        for v in &self.variables {
            writeln!(f, "  {v}")?;
        }
        for c in &self.commands {
            writeln!(f, "  {c}")?;
        }
        f.write_str("endmodule")
    }
}

impl Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dtmc")?;
        for c in &self.constants {
            writeln!(f, "const {} {} = {};", c.kind, c.name, c.value)?;
        }
        for m in &self.modules {
            writeln!(f)?;
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}
