use std::collections::HashMap;

use super::ast::{BExpr, BinOp, CmpOp, Command, Expr, FunctionDecl, Program};
use super::diagnostic::{Code, Diagnostic, Pos};
use super::lexer::{tokenize_with, Tok, Token};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `__`-prefixed identifiers (generated code only).
    pub allow_reserved: bool,
}

#[derive(Clone, Debug)]
pub struct Parsed {
    pub program: Program,
    pub warnings: Vec<Diagnostic>,
}

pub fn parse(source: &str) -> Result<Program, Diagnostic> {
    parse_with(source, ParseOptions::default()).map(|p| p.program)
}

pub fn parse_with(source: &str, options: ParseOptions) -> Result<Parsed, Diagnostic> {
    let tokens = tokenize_with(source, options.allow_reserved)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        arities: HashMap::new(),
        loop_counters: Vec::new(),
        warnings: Vec::new(),
    };
    let program = parser.program()?;
    Ok(Parsed {
        program,
        warnings: parser.warnings,
    })
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    /// Functions declared so far, with their parameter counts.
    arities: HashMap<String, usize>,
    loop_counters: Vec<String>,
    warnings: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            Code::Syntax,
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().pos;
                Ok((name, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut functions = Vec::new();
        while *self.peek() != Tok::Eof {
            functions.push(self.function()?);
        }
        if !self.arities.contains_key("main") {
            return Err(Diagnostic::new(
                Code::MissingMain,
                self.pos(),
                "program declares no `main` function",
            ));
        }
        Ok(Program { functions })
    }

    fn function(&mut self) -> PResult<FunctionDecl> {
        self.expect(Tok::Function)?;
        let (name, name_pos) = self.ident()?;
        if self.arities.contains_key(&name) {
            return Err(Diagnostic::new(
                Code::DuplicateFunction,
                name_pos,
                format!("function `{name}` is already declared"),
            ));
        }
        let is_main = name == "main";
        self.expect(Tok::LParen)?;
        let mut params: Vec<String> = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (p, p_pos) = self.ident()?;
                if params.contains(&p) {
                    return Err(Diagnostic::new(
                        Code::DuplicateParameter,
                        p_pos,
                        format!("parameter `{p}` appears twice"),
                    ));
                }
                params.push(p);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        if is_main && !params.is_empty() {
            return Err(Diagnostic::new(
                Code::MainWithParameters,
                name_pos,
                "`main` must not take parameters",
            ));
        }
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Return | Tok::Eof) {
            body.push(self.command()?);
        }
        let ret = if *self.peek() == Tok::Return {
            let ret_pos = self.pos();
            self.bump();
            let (r, _) = self.ident()?;
            self.expect(Tok::Semi)?;
            if is_main {
                return Err(Diagnostic::new(
                    Code::ReturnInMain,
                    ret_pos,
                    "`main` does not return a value",
                ));
            }
            if *self.peek() != Tok::RBrace {
                return Err(self.unexpected("`}` after the return statement"));
            }
            Some(r)
        } else {
            None
        };
        let close = self.expect(Tok::RBrace)?;
        if !is_main && ret.is_none() {
            return Err(Diagnostic::new(
                Code::MissingReturn,
                close.pos,
                format!("function `{name}` must end with a return statement"),
            ));
        }
        self.arities.insert(name.clone(), params.len());
        Ok(FunctionDecl {
            name,
            params,
            body,
            ret,
        })
    }

    fn block(&mut self) -> PResult<Vec<Command>> {
        self.expect(Tok::LBrace)?;
        let mut cmds = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.unexpected("`}`"));
            }
            cmds.push(self.command()?);
        }
        self.bump();
        Ok(cmds)
    }

    fn check_counter(&mut self, target: &str, pos: Pos) {
        if self.loop_counters.iter().any(|c| c == target) {
            self.warnings.push(Diagnostic::new(
                Code::LoopCounterAssigned,
                pos,
                format!("`{target}` is assigned inside a loop that it controls"),
            ));
        }
    }

    fn command(&mut self) -> PResult<Command> {
        match self.peek().clone() {
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.bexpr()?;
                self.expect(Tok::RParen)?;
                let then_branch = self.block()?;
                let else_branch = if *self.peek() == Tok::Else {
                    self.bump();
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(Command::If {
                    cond,
                    then_branch,
                    else_branch,
                })
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.bexpr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(Command::While { cond, body })
            }
            Tok::Loop => {
                self.bump();
                let (counter, _) = self.ident()?;
                self.loop_counters.push(counter.clone());
                let body = self.block();
                self.loop_counters.pop();
                Ok(Command::Loop {
                    counter,
                    body: body?,
                })
            }
            Tok::Ident(_) => {
                let (target, target_pos) = self.ident()?;
                self.expect(Tok::Assign)?;
                self.check_counter(&target, target_pos);
                if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::LParen {
                    self.call(target)
                } else {
                    let expr = self.expr()?;
                    self.expect(Tok::Semi)?;
                    Ok(Command::Assign { target, expr })
                }
            }
            _ => Err(self.unexpected("a command")),
        }
    }

    fn call(&mut self, target: String) -> PResult<Command> {
        let (callee, callee_pos) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.ident()?.0);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        if callee == "main" {
            return Err(Diagnostic::new(
                Code::CallToMain,
                callee_pos,
                "`main` cannot be called",
            ));
        }
        match self.arities.get(&callee) {
            None => Err(Diagnostic::new(
                Code::CallBeforeDeclaration,
                callee_pos,
                format!("call to `{callee}`, which is not declared before this point"),
            )),
            Some(&n) if n != args.len() => Err(Diagnostic::new(
                Code::ArityMismatch,
                callee_pos,
                format!("`{callee}` takes {n} arguments, {} given", args.len()),
            )),
            Some(_) => Ok(Command::Call {
                target,
                callee,
                args,
            }),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?.0)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("a variable or `(`")),
        }
    }

    fn bexpr(&mut self) -> PResult<BExpr> {
        let mut lhs = self.bconj()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.bconj()?;
            lhs = BExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bconj(&mut self) -> PResult<BExpr> {
        let mut lhs = self.bunary()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.bunary()?;
            lhs = BExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bunary(&mut self) -> PResult<BExpr> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(BExpr::Not(Box::new(self.bunary()?)))
            }
            Tok::LParen => {
                // `(` opens either a parenthesised guard or an arithmetic
                // operand of a comparison; try the guard first.
                let save = self.at;
                self.bump();
                if let Ok(b) = self.bexpr() {
                    if *self.peek() == Tok::RParen {
                        self.bump();
                        return Ok(b);
                    }
                }
                self.at = save;
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<BExpr> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(BExpr::Cmp(op, lhs, rhs))
    }
}
