use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub functions: Vec<FunctionDecl>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Command>,
    /// Returned variable; `None` for `main`.
    pub ret: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Assign {
        target: String,
        expr: Expr,
    },
    Call {
        target: String,
        callee: String,
        args: Vec<String>,
    },
    If {
        cond: BExpr,
        then_branch: Vec<Command>,
        /// `None` when the source has no `else`; analyzed as an empty block.
        else_branch: Option<Vec<Command>>,
    },
    While {
        cond: BExpr,
        body: Vec<Command>,
    },
    Loop {
        counter: String,
        body: Vec<Command>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Variables in first-occurrence order, without repetition.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Expr::Binary(_, l, r) => {
                l.collect(out);
                r.collect(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Var(_) => 3,
            Expr::Binary(op, _, _) => op.precedence(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Boolean guards. They are kept for rendering only; the analysis never
/// looks inside them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BExpr {
    Cmp(CmpOp, Expr, Expr),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
    Not(Box<BExpr>),
}

impl BExpr {
    fn precedence(&self) -> u8 {
        match self {
            BExpr::Or(..) => 1,
            BExpr::And(..) => 2,
            BExpr::Not(_) => 3,
            BExpr::Cmp(..) => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                if l.precedence() < p {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // Left-associative: an equal-precedence right operand needs parens.
                if r.precedence() <= p {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, b: &BExpr, min: u8| {
            if b.precedence() < min {
                write!(f, "({b})")
            } else {
                write!(f, "{b}")
            }
        };
        match self {
            BExpr::Cmp(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
            BExpr::And(l, r) => {
                wrap(f, l, 2)?;
                write!(f, " && ")?;
                wrap(f, r, 3)
            }
            BExpr::Or(l, r) => {
                wrap(f, l, 1)?;
                write!(f, " || ")?;
                wrap(f, r, 2)
            }
            BExpr::Not(b) => {
                write!(f, "!")?;
                wrap(f, b, 3)
            }
        }
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, cmds: &[Command], indent: usize) -> fmt::Result {
    writeln!(f, "{{")?;
    for c in cmds {
        write_command(f, c, indent + 1)?;
    }
    write!(f, "{}}}", "    ".repeat(indent))
}

fn write_command(f: &mut fmt::Formatter<'_>, c: &Command, indent: usize) -> fmt::Result {
    let pad = "    ".repeat(indent);
    match c {
        Command::Assign { target, expr } => writeln!(f, "{pad}{target} = {expr};"),
        Command::Call {
            target,
            callee,
            args,
        } => writeln!(f, "{pad}{target} = {callee}({});", args.join(", ")),
        Command::If {
            cond,
            then_branch,
            else_branch,
        } => {
            write!(f, "{pad}if ({cond}) ")?;
            write_block(f, then_branch, indent)?;
            if let Some(e) = else_branch {
                write!(f, " else ")?;
                write_block(f, e, indent)?;
            }
            writeln!(f)
        }
        Command::While { cond, body } => {
            write!(f, "{pad}while ({cond}) ")?;
            write_block(f, body, indent)?;
            writeln!(f)
        }
        Command::Loop { counter, body } => {
            write!(f, "{pad}loop {counter} ")?;
            write_block(f, body, indent)?;
            writeln!(f)
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_command(f, self, 0)
    }
}

impl fmt::Display for FunctionDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "function {}({}) {{", self.name, self.params.join(", "))?;
        for c in &self.body {
            write_command(f, c, 1)?;
        }
        if let Some(r) = &self.ret {
            writeln!(f, "    return {r};")?;
        }
        writeln!(f, "}}")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, func) in self.functions.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{func}")?;
        }
        Ok(())
    }
}
