use super::ast::*;
use super::lexer::{tokenize, LexError, Pos, Tok, Token};
use super::ModelError;

/// Token cursor with the shared expression grammar.
///
/// Precedence, loosest first: `=>` (right-assoc), `|`, `&`, `!`,
/// relational, `+ -`, `* /`, unary `-`.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    idx: usize,
}

impl Cursor {
    pub(crate) fn new(src: &str) -> Result<Self, ModelError> {
        let tokens = tokenize(src).map_err(lex_error)?;
        Ok(Cursor { tokens, idx: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    pub(crate) fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.idx + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub(crate) fn pos(&self) -> Pos {
        self.tokens[self.idx].pos
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.tokens[self.idx].tok.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ModelError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{}`", tok.text())]))
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> Result<(), ModelError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    pub(crate) fn expect_ident(&mut self) -> Result<String, ModelError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    pub(crate) fn error(&self, expected: &[&str]) -> ModelError {
        let pos = self.pos();
        ModelError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    pub(crate) fn parse_expr(&mut self) -> Result<Expr, ModelError> {
        let lhs = self.parse_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.parse_expr()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.parse_and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.parse_and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ModelError> {
        let mut lhs = self.parse_not()?;
        while self.eat(&Tok::And) {
            let rhs = self.parse_not()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Expr, ModelError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::not(self.parse_not()?));
        }
        self.parse_relational(None)
    }

    /// Relational level; `seed` is an already-parsed primary that starts
    /// the expression (used when a parenthesised group was consumed by
    /// an outer grammar).
    pub(crate) fn parse_relational(&mut self, seed: Option<Expr>) -> Result<Expr, ModelError> {
        let lhs = self.parse_additive(seed)?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.parse_additive(None)?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn parse_additive(&mut self, seed: Option<Expr>) -> Result<Expr, ModelError> {
        let mut lhs = self.parse_multiplicative(seed)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_multiplicative(None)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_multiplicative(&mut self, seed: Option<Expr>) -> Result<Expr, ModelError> {
        let mut lhs = match seed {
            Some(e) => e,
            None => self.parse_unary()?,
        };
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ModelError> {
        if self.eat(&Tok::Minus) {
            return Ok(match self.parse_unary()? {
                Expr::Int(v) => Expr::Int(-v),
                Expr::Double(v) => Expr::Double(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, ModelError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Double(v) => {
                self.bump();
                Ok(Expr::Double(v))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(Expr::Ident(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}

const RESERVED: &[&str] = &[
    "const", "int", "double", "bool", "module", "endmodule", "init", "true", "false", "dtmc",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

fn lex_error(e: LexError) -> ModelError {
    ModelError::Syntax {
        line: e.pos.line,
        col: e.pos.col,
        expected: vec![],
        found: e.message,
    }
}

/// Parse model text into an unvalidated [`Model`].
pub(crate) fn parse_syntax(src: &str) -> Result<Model, ModelError> {
    let mut cur = Cursor::new(src)?;
    let mut model = Model::default();
    cur.eat_keyword("dtmc");
    loop {
        if cur.is_keyword("const") {
            model.constants.push(parse_const(&mut cur)?);
        } else if cur.is_keyword("module") {
            model.modules.push(parse_module(&mut cur)?);
        } else if *cur.peek() == Tok::Eof {
            return Ok(model);
        } else {
            return Err(cur.error(&["`const`", "`module`", "end of input"]));
        }
    }
}

fn parse_const(cur: &mut Cursor) -> Result<ConstantDef, ModelError> {
    cur.expect_keyword("const")?;
    let kind = if cur.eat_keyword("int") {
        Kind::Int
    } else if cur.eat_keyword("double") {
        Kind::Double
    } else if cur.eat_keyword("bool") {
        Kind::Bool
    } else {
        Kind::Int
    };
    let name = cur.expect_ident()?;
    cur.expect(&Tok::Eq)?;
    let value = cur.parse_expr()?;
    cur.expect(&Tok::Semi)?;
    Ok(ConstantDef { name, kind, value })
}

fn parse_module(cur: &mut Cursor) -> Result<ModuleDef, ModelError> {
    cur.expect_keyword("module")?;
    let name = cur.expect_ident()?;
    let mut module = ModuleDef {
        name,
        variables: vec![],
        commands: vec![],
    };
    loop {
        if cur.eat_keyword("endmodule") {
            return Ok(module);
        }
        match cur.peek() {
            Tok::LBracket => module.commands.push(parse_command(cur)?),
            Tok::Ident(_) if *cur.peek_at(1) == Tok::Colon => {
                module.variables.push(parse_var(cur)?)
            }
            _ => return Err(cur.error(&["variable declaration", "`[`", "`endmodule`"])),
        }
    }
}

fn parse_var(cur: &mut Cursor) -> Result<VarDecl, ModelError> {
    let name = cur.expect_ident()?;
    cur.expect(&Tok::Colon)?;
    let domain = if cur.eat_keyword("bool") {
        Domain::Bool
    } else if cur.eat(&Tok::LBracket) {
        let lo = cur.parse_expr()?;
        cur.expect(&Tok::DotDot)?;
        let hi = cur.parse_expr()?;
        cur.expect(&Tok::RBracket)?;
        Domain::Range { lo, hi }
    } else {
        return Err(cur.error(&["`bool`", "`[`"]));
    };
    let init = if cur.eat_keyword("init") {
        Some(cur.parse_expr()?)
    } else {
        None
    };
    cur.expect(&Tok::Semi)?;
    Ok(VarDecl { name, domain, init })
}

fn parse_command(cur: &mut Cursor) -> Result<Command, ModelError> {
    cur.expect(&Tok::LBracket)?;
    let label = if cur.eat(&Tok::RBracket) {
        None
    } else {
        let l = cur.expect_ident()?;
        cur.expect(&Tok::RBracket)?;
        Some(l)
    };
    let guard = cur.parse_expr()?;
    cur.expect(&Tok::Arrow)?;
    let mut branches = vec![parse_branch(cur)?];
    while cur.eat(&Tok::Plus) {
        branches.push(parse_branch(cur)?);
    }
    cur.expect(&Tok::Semi)?;
    Ok(Command {
        label,
        guard,
        branches,
    })
}

fn starts_updates(cur: &Cursor) -> bool {
    match cur.peek() {
        Tok::LParen => {
            matches!(cur.peek_at(1), Tok::Ident(_)) && *cur.peek_at(2) == Tok::Prime
        }
        Tok::Ident(s) if s == "true" => matches!(cur.peek_at(1), Tok::Semi | Tok::Plus),
        _ => false,
    }
}

fn parse_branch(cur: &mut Cursor) -> Result<Branch, ModelError> {
    if starts_updates(cur) {
        return Ok(Branch {
            prob: None,
            updates: parse_updates(cur)?,
        });
    }
    let prob = cur.parse_expr()?;
    cur.expect(&Tok::Colon)?;
    Ok(Branch {
        prob: Some(prob),
        updates: parse_updates(cur)?,
    })
}

fn parse_updates(cur: &mut Cursor) -> Result<Vec<Assignment>, ModelError> {
    if cur.eat_keyword("true") {
        return Ok(vec![]);
    }
    let mut out = vec![parse_update(cur)?];
    while cur.eat(&Tok::And) {
        out.push(parse_update(cur)?);
    }
    Ok(out)
}

fn parse_update(cur: &mut Cursor) -> Result<Assignment, ModelError> {
    if *cur.peek() != Tok::LParen {
        return Err(cur.error(&["`(`", "`true`"]));
    }
    cur.bump();
    let var = cur.expect_ident()?;
    cur.expect(&Tok::Prime)?;
    cur.expect(&Tok::Eq)?;
    let value = cur.parse_expr()?;
    cur.expect(&Tok::RParen)?;
    Ok(Assignment { var, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(src: &str) -> Expr {
        let mut c = Cursor::new(src).unwrap();
        let e = c.parse_expr().unwrap();
        assert_eq!(*c.peek(), Tok::Eof);
        e
    }

    #[test]
    fn precedence_of_connectives() {
        let e = expr("a=1 & b | !c => d");
        let Expr::Binary(BinOp::Implies, lhs, _) = e else {
            panic!("expected implication at top")
        };
        assert!(matches!(*lhs, Expr::Binary(BinOp::Or, _, _)));
    }

    #[test]
    fn arithmetic_binds_tighter_than_comparison() {
        let e = expr("x+1<=2*y");
        let Expr::Binary(BinOp::Le, l, r) = e else {
            panic!()
        };
        assert!(matches!(*l, Expr::Binary(BinOp::Add, _, _)));
        assert!(matches!(*r, Expr::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = expr("1-2-3");
        let Expr::Binary(BinOp::Sub, l, r) = e else {
            panic!()
        };
        assert_eq!(*r, Expr::Int(3));
        assert!(matches!(*l, Expr::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn branch_with_and_without_probability() {
        let m = parse_syntax(
            "module m x:[0..2] init 0; [] x=0 -> 0.5:(x'=1) + 0.5:(x'=2); [a] x>0 -> (x'=0); [b] x=2 -> true; endmodule",
        )
        .unwrap();
        let cmds = &m.modules[0].commands;
        assert_eq!(cmds.len(), 3);
        assert_eq!(cmds[0].branches.len(), 2);
        assert_eq!(cmds[1].branches[0].prob, None);
        assert!(cmds[2].branches[0].updates.is_empty());
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_syntax("module m\n  x : [0..2] init 0\nendmodule").unwrap_err();
        match err {
            ModelError::Syntax { line, col, .. } => assert_eq!((line, col), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
