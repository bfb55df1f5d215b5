//! Source language: functions over implicitly declared variables, with
//! assignments, conditionals, `while`, bounded `loop`, and calls to
//! previously declared functions.

pub mod ast;
pub mod diagnostic;
pub mod lexer;
pub mod parser;

pub use ast::{BExpr, BinOp, CmpOp, Command, Expr, FunctionDecl, Program};
pub use diagnostic::{Code, Diagnostic, Pos};
pub use parser::{parse, parse_with, ParseOptions, Parsed};

/// Variables of a function in matrix order: parameters first, then every
/// other variable at its first occurrence in evaluation order (operands
/// before the assigned variable, a loop counter before its body). Guards do
/// not contribute.
pub fn collect_vars(f: &FunctionDecl) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for p in &f.params {
        push_new(&mut vars, p);
    }
    walk(&f.body, &mut vars);
    if let Some(r) = &f.ret {
        push_new(&mut vars, r);
    }
    vars
}

/// Variables of a command list, in first-occurrence order.
pub fn collect_command_vars(cmds: &[Command]) -> Vec<String> {
    let mut vars = Vec::new();
    walk(cmds, &mut vars);
    vars
}

fn push_new(vars: &mut Vec<String>, v: &str) {
    if !vars.iter().any(|x| x == v) {
        vars.push(v.to_string());
    }
}

fn walk(cmds: &[Command], vars: &mut Vec<String>) {
    for c in cmds {
        match c {
            Command::Assign { target, expr } => {
                for v in expr.vars() {
                    push_new(vars, v);
                }
                push_new(vars, target);
            }
            Command::Call { target, args, .. } => {
                for a in args {
                    push_new(vars, a);
                }
                push_new(vars, target);
            }
            Command::If {
                then_branch,
                else_branch,
                ..
            } => {
                walk(then_branch, vars);
                if let Some(e) = else_branch {
                    walk(e, vars);
                }
            }
            Command::While { body, .. } => walk(body, vars),
            Command::Loop { counter, body } => {
                push_new(vars, counter);
                walk(body, vars);
            }
        }
    }
}
