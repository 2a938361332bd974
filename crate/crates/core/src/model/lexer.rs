//! Tokenizer shared by the model and property parsers.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Double(f64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Prime,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    And,
    Or,
    Not,
    Arrow,
    Implies,
    DotDot,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Double(v) => write!(f, "`{v}`"),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

impl Tok {
    pub(crate) fn text(&self) -> &'static str {
        match self {
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Prime => "'",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Not => "!",
            Tok::Arrow => "->",
            Tok::Implies => "=>",
            Tok::DotDot => "..",
            Tok::Question => "?",
            Tok::Ident(_) | Tok::Int(_) | Tok::Double(_) => "literal",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let peek = chars.get(i + 1).copied();

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && peek == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), pos });
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit())) {
            let start = i;
            let mut is_double = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            // `0..99` is a range, not a decimal point.
            if i < chars.len()
                && chars[i] == '.'
                && chars.get(i + 1).is_some_and(|p| p.is_ascii_digit())
            {
                is_double = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            } else if i < chars.len() && chars[i] == '.' && chars.get(i + 1) != Some(&'.') {
                // trailing dot: `1.`
                is_double = true;
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_double = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if is_double {
                Tok::Double(text.parse().map_err(|_| LexError {
                    pos,
                    message: format!("malformed number `{text}`"),
                })?)
            } else {
                Tok::Int(text.parse().map_err(|_| LexError {
                    pos,
                    message: format!("integer literal `{text}` out of range"),
                })?)
            };
            out.push(Token { tok, pos });
            continue;
        }

        let (tok, width) = match (c, peek) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('&', Some('&')) => (Tok::And, 2),
            ('|', Some('|')) => (Tok::Or, 2),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('\'', _) => (Tok::Prime, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) | ('\u{2212}', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('&', _) | ('\u{2227}', _) => (Tok::And, 1),
            ('|', _) | ('\u{2228}', _) => (Tok::Or, 1),
            ('!', _) | ('\u{00ac}', _) => (Tok::Not, 1),
            ('\u{21d2}', _) | ('\u{2192}', _) => (Tok::Implies, 1),
            ('\u{2264}', _) => (Tok::Le, 1),
            ('\u{2265}', _) => (Tok::Ge, 1),
            ('?', _) => (Tok::Question, 1),
            _ => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, pos });
        i += width;
        col += width;
    }

    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn range_is_not_a_decimal() {
        assert_eq!(
            toks("[0..99]"),
            vec![Tok::LBracket, Tok::Int(0), Tok::DotDot, Tok::Int(99), Tok::RBracket, Tok::Eof]
        );
    }

    #[test]
    fn literal_decimals_keep_their_digits() {
        assert_eq!(toks("0.071428571"), vec![Tok::Double(0.071428571), Tok::Eof]);
        assert_eq!(toks("1e-7"), vec![Tok::Double(1e-7), Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  x'=1").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("x".into()));
        assert_eq!(t[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(t[1].tok, Tok::Prime);
    }

    #[test]
    fn unicode_connectives() {
        assert_eq!(
            toks("a ⇒ ¬b ∧ c ∨ d"),
            vec![
                Tok::Ident("a".into()),
                Tok::Implies,
                Tok::Not,
                Tok::Ident("b".into()),
                Tok::And,
                Tok::Ident("c".into()),
                Tok::Or,
                Tok::Ident("d".into()),
                Tok::Eof
            ]
        );
    }
}
