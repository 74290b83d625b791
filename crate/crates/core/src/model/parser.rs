//! Lexer and recursive-descent parser for `.smx` model files.

use super::ast::*;
use super::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

// Longest first.
const PUNCTS: &[&str] = &[
    ":=", "..", "->", "&&", "||", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ",", ":",
    ";", "=", ".", "!", "<", ">", "+", "-", "*",
];

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
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
            col += (i - start) as u32;
            out.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let value = digits.parse::<i64>().map_err(|_| {
                Diagnostic::error(pos, format!("integer literal `{digits}` out of range"))
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                pos,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len() as u32;
                out.push(Token {
                    tok: Tok::Punct(p),
                    pos,
                });
            }
            None => {
                return Err(Diagnostic::error(
                    pos,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, Diagnostic>;

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(i) => format!("`{i}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of file".to_string(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.pos(),
            format!(
                "syntax error: expected {expected}, found {}",
                describe(self.peek())
            ),
        ))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Pos> {
        if self.is_punct(p) {
            Ok(self.bump().pos)
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_kw(kw) {
            Ok(self.bump().pos)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn model(&mut self) -> PResult<ModelDecl> {
        self.expect_kw("model")?;
        let (name, _) = self.ident()?;
        self.expect_punct("{")?;
        let mut items = Vec::new();
        while !self.is_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.unexpected("`}`");
            }
            items.push(self.item()?);
            self.eat_punct(";");
        }
        self.expect_punct("}")?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.unexpected("end of file");
        }
        Ok(ModelDecl { name, items })
    }

    fn item(&mut self) -> PResult<Item> {
        let pos = self.pos();
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.unexpected("a declaration");
        };
        match kw.as_str() {
            "const" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_punct("=")?;
                let value = self.expr()?;
                Ok(Item::Const { name, value, pos })
            }
            "enum" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_punct("{")?;
                let mut variants = Vec::new();
                while !self.is_punct("}") {
                    variants.push(self.ident()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                Ok(Item::Enum {
                    name,
                    variants,
                    pos,
                })
            }
            "type" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_punct("{")?;
                let mut fields = Vec::new();
                while !self.is_punct("}") {
                    let (fname, fpos) = self.ident()?;
                    self.expect_punct(":")?;
                    let ty = self.type_expr()?;
                    fields.push((fname, ty, fpos));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                Ok(Item::Type { name, fields, pos })
            }
            "input" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.type_expr()?;
                Ok(Item::Input { name, ty, pos })
            }
            "output" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.type_expr()?;
                self.expect_punct("=")?;
                let default = self.expr()?;
                Ok(Item::Output {
                    name,
                    ty,
                    default,
                    pos,
                })
            }
            "initial" | "state" => {
                let initial = self.eat_kw("initial");
                self.expect_kw("state")?;
                let (name, _) = self.ident()?;
                let body = self.block()?;
                Ok(Item::State {
                    name,
                    initial,
                    body,
                    pos,
                })
            }
            "transition" => {
                self.bump();
                let source = self.ident()?;
                self.expect_punct("->")?;
                let target = self.ident()?;
                let kind = if self.eat_kw("strong") {
                    TransitionKind::Strong
                } else if self.eat_kw("weak") {
                    TransitionKind::Weak
                } else {
                    return self.unexpected("`strong` or `weak`");
                };
                self.expect_kw("when")?;
                let guard = self.expr()?;
                Ok(Item::Transition {
                    source,
                    target,
                    kind,
                    guard,
                    pos,
                })
            }
            _ => self.unexpected("a declaration"),
        }
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let mut ty = if self.eat_kw("bool") {
            TypeExpr::Bool
        } else if self.eat_kw("int") {
            self.expect_punct("(")?;
            let lo = self.expr()?;
            self.expect_punct(",")?;
            let hi = self.expr()?;
            self.expect_punct(")")?;
            TypeExpr::Int(lo, hi)
        } else {
            let (name, pos) = self.ident()?;
            TypeExpr::Named(name, pos)
        };
        while self.eat_punct("[") {
            let len = self.expr()?;
            self.expect_punct("]")?;
            ty = TypeExpr::Array(Box::new(ty), len);
        }
        Ok(ty)
    }

    fn block(&mut self) -> PResult<Vec<SStmt>> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
            self.eat_punct(";");
        }
        self.expect_punct("}")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<SStmt> {
        let pos = self.pos();
        if self.eat_kw("if") {
            return self.if_rest(pos);
        }
        if self.eat_kw("for") {
            let (var, _) = self.ident()?;
            self.expect_kw("in")?;
            let lo = self.expr()?;
            self.expect_punct("..")?;
            let hi = self.expr()?;
            let body = self.block()?;
            return Ok(SStmt::For {
                var,
                lo,
                hi,
                body,
                pos,
            });
        }
        let target = self.postfix()?;
        self.expect_punct(":=")?;
        let value = self.expr()?;
        Ok(SStmt::Assign { target, value, pos })
    }

    fn if_rest(&mut self, pos: Pos) -> PResult<SStmt> {
        let cond = self.expr()?;
        let then_branch = self.block()?;
        let else_branch = if self.eat_kw("else") {
            let else_pos = self.pos();
            if self.eat_kw("if") {
                vec![self.if_rest(else_pos)?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(SStmt::If {
            cond,
            then_branch,
            else_branch,
            pos,
        })
    }

    fn expr(&mut self) -> PResult<SExpr> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<SExpr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[
                ("<=", BinOp::Le),
                (">=", BinOp::Ge),
                ("<", BinOp::Lt),
                (">", BinOp::Gt),
            ],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let Some(&(_, op)) = LEVELS[level].iter().find(|(p, _)| self.is_punct(p)) else {
                return Ok(lhs);
            };
            let pos = self.bump().pos;
            let rhs = self.binary(level + 1)?;
            lhs = SExpr {
                kind: SExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn unary(&mut self) -> PResult<SExpr> {
        let pos = self.pos();
        if self.eat_punct("!") {
            let e = self.unary()?;
            return Ok(SExpr {
                kind: SExprKind::Unary(UnOp::Not, Box::new(e)),
                pos,
            });
        }
        if self.eat_punct("-") {
            if let Tok::Int(v) = self.peek().clone() {
                self.bump();
                return Ok(SExpr {
                    kind: SExprKind::Int(-v),
                    pos,
                });
            }
            let e = self.unary()?;
            return Ok(SExpr {
                kind: SExprKind::Unary(UnOp::Neg, Box::new(e)),
                pos,
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<SExpr> {
        let mut e = self.primary()?;
        loop {
            let pos = self.pos();
            if self.eat_punct(".") {
                let (field, _) = self.ident()?;
                e = SExpr {
                    kind: SExprKind::Field(Box::new(e), field),
                    pos,
                };
            } else if self.eat_punct("[") {
                let idx = self.expr()?;
                self.expect_punct("]")?;
                e = SExpr {
                    kind: SExprKind::Index(Box::new(e), Box::new(idx)),
                    pos,
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<SExpr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(SExpr {
                    kind: SExprKind::Int(v),
                    pos,
                })
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(SExpr {
                    kind: SExprKind::Bool(s == "true"),
                    pos,
                })
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(SExpr {
                    kind: SExprKind::Ident(s),
                    pos,
                })
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("[") => {
                self.bump();
                let mut items = Vec::new();
                while !self.is_punct("]") {
                    items.push(self.expr()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("]")?;
                Ok(SExpr {
                    kind: SExprKind::ArrayLit(items),
                    pos,
                })
            }
            Tok::Punct("{") => {
                self.bump();
                let mut fields = Vec::new();
                while !self.is_punct("}") {
                    let (name, _) = self.ident()?;
                    self.expect_punct(":")?;
                    fields.push((name, self.expr()?));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                Ok(SExpr {
                    kind: SExprKind::RecordLit(fields),
                    pos,
                })
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses model text into an untyped syntax tree.
pub fn parse_syntax(text: &str) -> Result<ModelDecl, Diagnostic> {
    let toks = lex(text)?;
    Parser { toks, at: 0 }.model()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_model() {
        let m = parse_syntax(
            "model M {\n output out: bool = false\n initial state S { out := true }\n}",
        )
        .unwrap();
        assert_eq!(m.name, "M");
        assert_eq!(m.items.len(), 2);
    }

    #[test]
    fn precedence_binds_and_tighter_than_or() {
        let m = parse_syntax(
            "model M { input a: bool input b: bool input c: bool initial state S {} transition S -> S strong when a || b && c }",
        )
        .unwrap();
        let Item::Transition { guard, .. } = &m.items[4] else {
            panic!()
        };
        let SExprKind::Binary(BinOp::Or, _, rhs) = &guard.kind else {
            panic!("{guard:?}")
        };
        assert!(matches!(rhs.kind, SExprKind::Binary(BinOp::And, _, _)));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_syntax("model M {\n  input x bool\n}").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 11 });
        assert!(err.message.starts_with("syntax error"), "{}", err.message);
    }

    #[test]
    fn comments_and_else_if() {
        let m = parse_syntax(
            "model M { // header\n output o: int(0, 3) = 0\n input a: int(0, 3)\n initial state S { if a == 0 { o := 1 } else if a == 1 { o := 2 } else { o := 3 } } }",
        )
        .unwrap();
        let Item::State { body, .. } = &m.items[2] else {
            panic!()
        };
        let SStmt::If { else_branch, .. } = &body[0] else {
            panic!()
        };
        assert!(matches!(else_branch[0], SStmt::If { .. }));
    }

    #[test]
    fn unterminated_model_is_reported_not_panicking() {
        assert!(parse_syntax("model M { input a: bool").is_err());
        assert!(parse_syntax("").is_err());
        assert!(parse_syntax("model M { state S { x := } }").is_err());
    }
}
