//! The original nondeterministic calculus, run by brute force.
//!
//! Used as a reference: it derives every matrix the unextended rules can
//! assign to a command, failing whenever the loop side conditions are
//! violated. It is exponential and only meant for small programs.

use std::collections::{HashMap, HashSet};

use crate::choice_poly::Assignment;
use crate::error::MwpError;
use crate::frontend::{collect_vars, BinOp, Command, Expr, Program};
use crate::semiring::{Matrix, Mwp, Semiring};

pub type FlowMatrix = Matrix<Mwp>;
type FlowVector = Vec<Mwp>;

/// Where the weakening rule (all variables of `e` get `w`) may be used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum E2Policy {
    /// On any expression, single variables included.
    Unrestricted,
    /// Only on compound expressions; a single variable always gets `m`.
    CompoundOnly,
}

/// Parameter-to-return flows of each callee, one vector per behaviour.
pub type Callees = HashMap<String, Vec<FlowVector>>;

struct Env<'a> {
    index: HashMap<&'a str, usize>,
    n: usize,
    callees: &'a Callees,
    policy: E2Policy,
}

/// Every matrix derivable for `body` over `variables`.
pub fn jk_oracle(
    body: &[Command],
    variables: &[String],
    callees: &Callees,
    policy: E2Policy,
) -> Result<HashSet<FlowMatrix>, MwpError> {
    let env = Env::new(variables, callees, policy);
    env.commands(body)
}

/// The derivable matrices of every function, with callee behaviours taken
/// from the callee's own derivable matrices.
pub fn jk_program(
    program: &Program,
    policy: E2Policy,
) -> Result<Vec<(String, HashSet<FlowMatrix>)>, MwpError> {
    let mut callees = Callees::new();
    let mut out = Vec::new();
    for f in &program.functions {
        let vars = collect_vars(f);
        let set = jk_oracle(&f.body, &vars, &callees, policy)?;
        if let Some(ret) = &f.ret {
            let r = vars
                .iter()
                .position(|v| v == ret)
                .expect("return variable collected");
            let mut behaviors: Vec<FlowVector> = set
                .iter()
                .map(|m| (0..f.params.len()).map(|p| *m.get(p, r)).collect())
                .collect();
            behaviors.sort();
            behaviors.dedup();
            callees.insert(f.name.clone(), behaviors);
        }
        out.push((f.name.clone(), set));
    }
    Ok(out)
}

impl<'a> Env<'a> {
    fn new(variables: &'a [String], callees: &'a Callees, policy: E2Policy) -> Self {
        Env {
            index: variables
                .iter()
                .enumerate()
                .map(|(k, v)| (v.as_str(), k))
                .collect(),
            n: variables.len(),
            callees,
            policy,
        }
    }

    fn var(&self, name: &str) -> Result<usize, MwpError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| MwpError::UnknownVariable(name.to_string()))
    }

    fn weakened(&self, e: &Expr) -> Result<FlowVector, MwpError> {
        let mut v = vec![Mwp::Zero; self.n];
        for x in e.vars() {
            v[self.var(x)?] = Mwp::W;
        }
        Ok(v)
    }

    fn expr(&self, e: &Expr) -> Result<HashSet<FlowVector>, MwpError> {
        let mut out = HashSet::new();
        match e {
            Expr::Var(x) => {
                let mut v = vec![Mwp::Zero; self.n];
                v[self.var(x)?] = Mwp::M;
                out.insert(v);
                if self.policy == E2Policy::Unrestricted {
                    out.insert(self.weakened(e)?);
                }
            }
            Expr::Binary(BinOp::Mul, _, _) => {
                out.insert(self.weakened(e)?);
            }
            Expr::Binary(_, lhs, rhs) => {
                let left = self.expr(lhs)?;
                let right = self.expr(rhs)?;
                for a in &left {
                    for b in &right {
                        out.insert(plus(a, &scale_p(b)));
                        out.insert(plus(&scale_p(a), b));
                    }
                }
                out.insert(self.weakened(e)?);
            }
        }
        Ok(out)
    }

    fn commands(&self, cmds: &[Command]) -> Result<HashSet<FlowMatrix>, MwpError> {
        let mut acc: HashSet<FlowMatrix> = HashSet::from([FlowMatrix::identity(self.n)]);
        for c in cmds {
            let next = self.command(c)?;
            let mut prod = HashSet::new();
            for a in &acc {
                for b in &next {
                    prod.insert(a.mul(b)?);
                }
            }
            acc = prod;
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    fn command(&self, c: &Command) -> Result<HashSet<FlowMatrix>, MwpError> {
        let mut out = HashSet::new();
        match c {
            Command::Assign { target, expr } => {
                let j = self.var(target)?;
                for v in self.expr(expr)? {
                    out.insert(FlowMatrix::identity(self.n).with_column(j, &v)?);
                }
            }
            Command::Call {
                target,
                callee,
                args,
            } => {
                let behaviors = self
                    .callees
                    .get(callee)
                    .ok_or_else(|| MwpError::UnknownFunction(callee.clone()))?;
                for b in behaviors {
                    out.insert(call_matrix(self, target, args, b)?);
                }
            }
            Command::If {
                then_branch,
                else_branch,
                ..
            } => {
                let a = self.commands(then_branch)?;
                let b = match else_branch {
                    Some(e) => self.commands(e)?,
                    None => HashSet::from([FlowMatrix::identity(self.n)]),
                };
                for x in &a {
                    for y in &b {
                        out.insert(x.add(y)?);
                    }
                }
            }
            Command::While { body, .. } => {
                for m in self.commands(body)? {
                    if let Some(r) = while_rule(&m) {
                        out.insert(r);
                    }
                }
            }
            Command::Loop { counter, body } => {
                let l = self.var(counter)?;
                for m in self.commands(body)? {
                    if let Some(r) = loop_rule(&m, l) {
                        out.insert(r);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn plus(a: &[Mwp], b: &[Mwp]) -> FlowVector {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn scale_p(a: &[Mwp]) -> FlowVector {
    a.iter().map(|x| Mwp::P.mul(x)).collect()
}

fn call_matrix(
    env: &Env<'_>,
    target: &str,
    args: &[String],
    behavior: &[Mwp],
) -> Result<FlowMatrix, MwpError> {
    let t = env.var(target)?;
    let mut column = vec![Mwp::Zero; env.n];
    for (a, &flow) in args.iter().zip(behavior) {
        let r = env.var(a)?;
        column[r] = column[r].add(&flow);
    }
    FlowMatrix::identity(env.n).with_column(t, &column)
}

/// `L`: defined only when the closure has `m` on the whole diagonal.
pub fn loop_rule(m: &FlowMatrix, counter: usize) -> Option<FlowMatrix> {
    let star = m.closure();
    let n = star.dim();
    if (0..n).any(|i| *star.get(i, i) != Mwp::M) {
        return None;
    }
    let mut out = star.clone();
    for j in 0..n {
        if (0..n).any(|i| *star.get(i, j) == Mwp::P) {
            let v = out.get(counter, j).add(&Mwp::P);
            out.set(counter, j, v);
        }
    }
    Some(out)
}

/// `W`: defined only when the closure has `m` on the diagonal and no `p`.
pub fn while_rule(m: &FlowMatrix) -> Option<FlowMatrix> {
    let star = m.closure();
    let n = star.dim();
    let diag_ok = (0..n).all(|i| *star.get(i, i) == Mwp::M);
    let no_p = star.entries().all(|(_, _, v)| *v != Mwp::P);
    (diag_ok && no_p).then_some(star)
}

/// One derivation, with every nondeterministic step resolved by
/// `assignment` in the analyzer's allocation order: for `+`/`-` nodes, `0`
/// keeps the left operand and raises the right one to `p`, `1` the reverse,
/// `2` weakens the whole expression; for calls, the value selects the
/// callee behaviour. `None` when a loop side condition fails.
pub fn jk_guided(
    body: &[Command],
    variables: &[String],
    callees: &Callees,
    assignment: &Assignment,
) -> Result<Option<FlowMatrix>, MwpError> {
    let env = Env::new(variables, callees, E2Policy::CompoundOnly);
    let mut g = Guided {
        env,
        picks: assignment.values(),
        next: 0,
    };
    let out = g.commands(body)?;
    if g.next != assignment.len() {
        return Err(MwpError::AssignmentLength {
            expected: g.next,
            got: assignment.len(),
        });
    }
    Ok(out)
}

struct Guided<'a> {
    env: Env<'a>,
    picks: &'a [u32],
    next: usize,
}

impl<'a> Guided<'a> {
    fn take(&mut self) -> Result<u32, MwpError> {
        let v = self
            .picks
            .get(self.next)
            .copied()
            .ok_or(MwpError::MissingIndex(self.next))?;
        self.next += 1;
        Ok(v)
    }

    fn expr(&mut self, e: &Expr) -> Result<FlowVector, MwpError> {
        match e {
            Expr::Var(x) => {
                let mut v = vec![Mwp::Zero; self.env.n];
                v[self.env.var(x)?] = Mwp::M;
                Ok(v)
            }
            Expr::Binary(BinOp::Mul, _, _) => self.env.weakened(e),
            Expr::Binary(_, lhs, rhs) => {
                let pick = self.take()?;
                let a = self.expr(lhs)?;
                let b = self.expr(rhs)?;
                Ok(match pick {
                    0 => plus(&a, &scale_p(&b)),
                    1 => plus(&scale_p(&a), &b),
                    _ => self.env.weakened(e)?,
                })
            }
        }
    }

    /// Keeps consuming picks after a failure so that later indices stay
    /// aligned, then reports the failure.
    fn commands(&mut self, cmds: &[Command]) -> Result<Option<FlowMatrix>, MwpError> {
        let mut acc = Some(FlowMatrix::identity(self.env.n));
        for c in cmds {
            let m = self.command(c)?;
            acc = match (acc, m) {
                (Some(a), Some(b)) => Some(a.mul(&b)?),
                _ => None,
            };
        }
        Ok(acc)
    }

    fn command(&mut self, c: &Command) -> Result<Option<FlowMatrix>, MwpError> {
        match c {
            Command::Assign { target, expr } => {
                let j = self.env.var(target)?;
                let v = self.expr(expr)?;
                Ok(Some(FlowMatrix::identity(self.env.n).with_column(j, &v)?))
            }
            Command::Call {
                target,
                callee,
                args,
            } => {
                let behaviors = self
                    .env
                    .callees
                    .get(callee)
                    .ok_or_else(|| MwpError::UnknownFunction(callee.clone()))?;
                if behaviors.is_empty() {
                    return Ok(None);
                }
                let b = self.take()? as usize;
                let behavior = behaviors.get(b).ok_or(MwpError::AssignmentRange {
                    index: self.next - 1,
                    value: b as u32,
                    cardinality: behaviors.len() as u32,
                })?;
                Ok(Some(call_matrix(&self.env, target, args, behavior)?))
            }
            Command::If {
                then_branch,
                else_branch,
                ..
            } => {
                let a = self.commands(then_branch)?;
                let b = match else_branch {
                    Some(e) => self.commands(e)?,
                    None => Some(FlowMatrix::identity(self.env.n)),
                };
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(a.add(&b)?),
                    _ => None,
                })
            }
            Command::While { body, .. } => Ok(self.commands(body)?.and_then(|m| while_rule(&m))),
            Command::Loop { counter, body } => {
                let l = self.env.var(counter)?;
                Ok(self.commands(body)?.and_then(|m| loop_rule(&m, l)))
            }
        }
    }
}

/// Callee behaviours in the analyzer's order, so that call picks in
/// [`jk_guided`] select the same behaviour as the call rule.
pub fn callees_from(summaries: &super::Summaries) -> Callees {
    summaries
        .iter()
        .map(|(name, s)| (name.clone(), s.behaviors.clone()))
        .collect()
}
