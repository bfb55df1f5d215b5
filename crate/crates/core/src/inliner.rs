//! Inlining a call and checking that the call rule agrees with analyzing
//! the inlined body.
//!
//! `build_inlined` replaces the first call to a callee by
//! `__y1 = A1; …; __yN = AN; <renamed callee body>; X = __r1;`, renaming
//! parameters to `__y<k>`, the returned variable to `__r1` and every other
//! callee variable to `__v<k>`. `check_call_theorem` then compares the
//! caller's matrix, built with the call rule, against the inlined matrix
//! restricted to the caller's variables, relating the two choice spaces
//! through the callee's representative assignments.

use std::collections::HashMap;

use crate::analyzer::{analyze_function, analyze_program, Options, Summaries};
use crate::choice_poly::{evaluate, Assignment, PolyMatrix, Registry};
use crate::error::MwpError;
use crate::frontend::{collect_vars, Command, Expr, FunctionDecl, Program};
use crate::semiring::MwpMatrix;

/// The inlined caller together with the names it introduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inlined {
    pub function: FunctionDecl,
    /// Callee variable → fresh name.
    pub renaming: Vec<(String, String)>,
    /// Fresh names of the parameters, in order.
    pub params: Vec<String>,
    /// Fresh name holding the callee's result.
    pub result: String,
}

/// Replaces the first call to `callee` in `caller` (in evaluation order).
pub fn build_inlined(caller: &FunctionDecl, callee: &FunctionDecl) -> Result<Inlined, MwpError> {
    let ret = callee
        .ret
        .as_ref()
        .ok_or_else(|| MwpError::Internal(format!("`{}` returns nothing", callee.name)))?;

    let mut renaming: Vec<(String, String)> = Vec::new();
    let mut locals = 0;
    for v in collect_vars(callee) {
        let fresh = if let Some(k) = callee.params.iter().position(|p| *p == v) {
            format!("__y{}", k + 1)
        } else if v == *ret {
            "__r1".to_string()
        } else {
            locals += 1;
            format!("__v{locals}")
        };
        renaming.push((v, fresh));
    }
    let map: HashMap<&str, &str> = renaming
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let caller_vars = collect_vars(caller);
    if let Some(clash) = renaming.iter().find(|(_, f)| caller_vars.contains(f)) {
        return Err(MwpError::Internal(format!(
            "fresh name `{}` already used by the caller",
            clash.1
        )));
    }
    let params: Vec<String> = callee
        .params
        .iter()
        .map(|p| map[p.as_str()].to_string())
        .collect();
    let result = map[ret.as_str()].to_string();

    let body = rename_commands(&callee.body, &map);
    let mut done = false;
    let new_body = splice(&caller.body, callee, &params, &result, &body, &mut done);
    if !done {
        return Err(MwpError::NoCallSite {
            caller: caller.name.clone(),
            callee: callee.name.clone(),
        });
    }
    Ok(Inlined {
        function: FunctionDecl {
            name: caller.name.clone(),
            params: caller.params.clone(),
            body: new_body,
            ret: caller.ret.clone(),
        },
        renaming,
        params,
        result,
    })
}

fn rename_expr(e: &Expr, map: &HashMap<&str, &str>) -> Expr {
    match e {
        Expr::Var(v) => Expr::Var(map[v.as_str()].to_string()),
        Expr::Binary(op, l, r) => Expr::binary(*op, rename_expr(l, map), rename_expr(r, map)),
    }
}

fn rename_commands(cmds: &[Command], map: &HashMap<&str, &str>) -> Vec<Command> {
    let name = |v: &String| map[v.as_str()].to_string();
    cmds.iter()
        .map(|c| match c {
            Command::Assign { target, expr } => Command::Assign {
                target: name(target),
                expr: rename_expr(expr, map),
            },
            Command::Call {
                target,
                callee,
                args,
            } => Command::Call {
                target: name(target),
                callee: callee.clone(),
                args: args.iter().map(name).collect(),
            },
            // Guards are never analyzed; keep them as written.
            Command::If {
                cond,
                then_branch,
                else_branch,
            } => Command::If {
                cond: cond.clone(),
                then_branch: rename_commands(then_branch, map),
                else_branch: else_branch.as_ref().map(|e| rename_commands(e, map)),
            },
            Command::While { cond, body } => Command::While {
                cond: cond.clone(),
                body: rename_commands(body, map),
            },
            Command::Loop { counter, body } => Command::Loop {
                counter: name(counter),
                body: rename_commands(body, map),
            },
        })
        .collect()
}

fn splice(
    cmds: &[Command],
    callee: &FunctionDecl,
    params: &[String],
    result: &str,
    body: &[Command],
    done: &mut bool,
) -> Vec<Command> {
    let mut out = Vec::with_capacity(cmds.len());
    for c in cmds {
        if *done {
            out.push(c.clone());
            continue;
        }
        match c {
            Command::Call {
                target,
                callee: name,
                args,
            } if *name == callee.name => {
                for (y, a) in params.iter().zip(args) {
                    out.push(Command::Assign {
                        target: y.clone(),
                        expr: Expr::Var(a.clone()),
                    });
                }
                out.extend(body.iter().cloned());
                out.push(Command::Assign {
                    target: target.clone(),
                    expr: Expr::Var(result.to_string()),
                });
                *done = true;
            }
            Command::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = splice(then_branch, callee, params, result, body, done);
                let else_branch = else_branch
                    .as_ref()
                    .map(|e| splice(e, callee, params, result, body, done));
                out.push(Command::If {
                    cond: cond.clone(),
                    then_branch,
                    else_branch,
                });
            }
            Command::While { cond, body: inner } => out.push(Command::While {
                cond: cond.clone(),
                body: splice(inner, callee, params, result, body, done),
            }),
            Command::Loop {
                counter,
                body: inner,
            } => out.push(Command::Loop {
                counter: counter.clone(),
                body: splice(inner, callee, params, result, body, done),
            }),
            other => out.push(other.clone()),
        }
    }
    out
}

/// Submatrix of `matrix` (over `variables`) on `keep`, in `keep`'s order.
pub fn project_variables(
    matrix: &PolyMatrix,
    variables: &[String],
    keep: &[String],
) -> Result<PolyMatrix, MwpError> {
    let idx = keep
        .iter()
        .map(|k| {
            variables
                .iter()
                .position(|v| v == k)
                .ok_or_else(|| MwpError::UnknownVariable(k.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(matrix.select(&idx))
}

/// Submatrix on the variables not in `drop`, in their original order.
pub fn complement_variables(
    matrix: &PolyMatrix,
    variables: &[String],
    drop: &[String],
) -> PolyMatrix {
    let idx: Vec<usize> = (0..variables.len())
        .filter(|&k| !drop.contains(&variables[k]))
        .collect();
    matrix.select(&idx)
}

/// How the caller's choice space embeds into the inlined one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceProjection {
    /// First inlined index of the callee block.
    pub block_start: usize,
    /// Number of callee choice indices.
    pub block_len: usize,
    /// The call's index in the caller, if the callee has behaviours.
    pub call_index: Option<usize>,
    /// Callee assignment chosen for each behaviour.
    pub representatives: Vec<Assignment>,
}

impl ChoiceProjection {
    /// `π`: inlined index → caller index.
    pub fn pi(&self, j: usize) -> usize {
        let shift = self.block_len - usize::from(self.call_index.is_some());
        if j < self.block_start {
            j
        } else if j < self.block_start + self.block_len {
            self.call_index.unwrap_or(self.block_start)
        } else {
            j - shift
        }
    }

    /// `Ψ̄`: caller assignment → inlined assignment.
    pub fn inject(&self, alpha: &Assignment) -> Option<Assignment> {
        let i0 = self.call_index?;
        let v = alpha.values();
        let rep = self.representatives.get(v[i0] as usize)?;
        let mut out = Vec::with_capacity(v.len() + self.block_len);
        out.extend_from_slice(&v[..i0]);
        out.extend_from_slice(rep.values());
        out.extend_from_slice(&v[i0 + 1..]);
        Some(Assignment(out))
    }

    pub fn block<'a>(&self, beta: &'a Assignment) -> &'a [u32] {
        &beta.values()[self.block_start..self.block_start + self.block_len]
    }

    /// Behaviour index whose representative is `beta`'s block, if any.
    pub fn behavior_of(&self, beta: &Assignment) -> Option<usize> {
        let block = self.block(beta);
        self.representatives
            .iter()
            .position(|r| r.values() == block)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub caller: String,
    pub callee: String,
    pub projection: ChoiceProjection,
    pub caller_assignments: u128,
    pub inlined_assignments: u128,
    /// Caller assignments where the two sides differ, with `Ψ̄(α)`.
    pub equality_failures: Vec<(Assignment, Option<Assignment>)>,
    /// Inlined assignments outside the image of `Ψ̄`.
    pub outside_image: u128,
    /// ... of which the caller variables carry `∞`.
    pub outside_with_infinity: u128,
    /// ... of which the callee block is an `∞`-free assignment that merges
    /// into a behaviour with another representative, and the caller
    /// variables match that representative's image.
    pub outside_merged: u128,
    /// Outside assignments explained by neither.
    pub outside_failures: Vec<Assignment>,
}

impl TheoremReport {
    /// Both clauses as stated: equality on the image, `∞` outside it.
    pub fn holds(&self) -> bool {
        self.equality_failures.is_empty()
            && self.outside_failures.is_empty()
            && self.outside_merged == 0
    }

    /// Equality on the image, and outside it either `∞` or agreement with
    /// the representative of the same behaviour.
    pub fn holds_up_to_merging(&self) -> bool {
        self.equality_failures.is_empty() && self.outside_failures.is_empty()
    }
}

/// Checks the call rule against inlining for the first call from `caller`
/// to `callee`, enumerating both choice spaces.
pub fn check_call_theorem(
    program: &Program,
    caller: &str,
    callee: &str,
    budget: u128,
) -> Result<TheoremReport, MwpError> {
    let caller_idx = program
        .function_index(caller)
        .ok_or_else(|| MwpError::NoSuchFunction(caller.to_string()))?;
    let callee_decl = program
        .function(callee)
        .ok_or_else(|| MwpError::NoSuchFunction(callee.to_string()))?;
    let caller_decl = &program.functions[caller_idx];

    let options = Options {
        budget,
        ..Options::default()
    };
    let prefix = Program {
        functions: program.functions[..caller_idx].to_vec(),
    };
    let mut summaries = Summaries::new();
    let mut callee_analysis = None;
    // `analyze_program` needs a `main`; thread summaries by hand instead.
    for f in &prefix.functions {
        let a = analyze_function(f, &summaries, &options)?;
        if let Some(s) = &a.summary {
            summaries.insert(f.name.clone(), s.clone());
        }
        if f.name == callee {
            callee_analysis = Some(a);
        }
    }
    let callee_analysis = callee_analysis.ok_or_else(|| MwpError::NoCallSite {
        caller: caller.to_string(),
        callee: callee.to_string(),
    })?;
    let summary = callee_analysis
        .summary
        .clone()
        .ok_or_else(|| MwpError::Internal(format!("`{callee}` has no summary")))?;

    let p = analyze_function(caller_decl, &summaries, &options)?;
    let site = p
        .call_sites
        .iter()
        .find(|s| s.callee == callee)
        .cloned()
        .ok_or_else(|| MwpError::NoCallSite {
            caller: caller.to_string(),
            callee: callee.to_string(),
        })?;

    let inlined = build_inlined(caller_decl, callee_decl)?;
    let q = analyze_function(&inlined.function, &summaries, &options)?;

    let projection = ChoiceProjection {
        block_start: site.first_index,
        block_len: callee_analysis.registry.len(),
        call_index: site.choice,
        representatives: summary.representatives.clone(),
    };
    check_registries(
        &p.registry,
        &q.registry,
        &callee_analysis.registry,
        &projection,
    )?;

    let needed = q.registry.assignment_count();
    let needed = needed.saturating_add(p.registry.assignment_count());
    if needed > budget {
        return Err(MwpError::BudgetExceeded { needed, budget });
    }

    let keep: Vec<usize> = p
        .variables
        .iter()
        .map(|v| {
            q.var_index(v)
                .ok_or_else(|| MwpError::Internal(format!("`{v}` lost by inlining")))
        })
        .collect::<Result<_, _>>()?;
    let projected = |beta: &Assignment| -> Result<MwpMatrix, MwpError> {
        Ok(evaluate(&q.matrix, beta)?.select(&keep))
    };

    let mut report = TheoremReport {
        caller: caller.to_string(),
        callee: callee.to_string(),
        projection: projection.clone(),
        caller_assignments: p.registry.assignment_count(),
        inlined_assignments: q.registry.assignment_count(),
        equality_failures: Vec::new(),
        outside_image: 0,
        outside_with_infinity: 0,
        outside_merged: 0,
        outside_failures: Vec::new(),
    };

    for alpha in p.registry.assignments() {
        let left = evaluate(&p.matrix, &alpha)?;
        let ok = match projection.inject(&alpha) {
            Some(beta) => left == projected(&beta)?,
            // No behaviour: the call rule yields ∞ everywhere.
            None => left.has_inf(),
        };
        if !ok {
            let beta = projection.inject(&alpha);
            report.equality_failures.push((alpha, beta));
        }
    }

    let callee_graph = &callee_analysis.delta_graph;
    let callee_rows = {
        let ret = callee_decl.ret.as_deref().unwrap_or_default();
        let r = callee_analysis
            .var_index(ret)
            .ok_or_else(|| MwpError::UnknownVariable(ret.to_string()))?;
        ((0..callee_decl.params.len()).collect::<Vec<_>>(), r)
    };
    for beta in q.registry.assignments() {
        if projection.call_index.is_some() && projection.behavior_of(&beta).is_some() {
            continue;
        }
        report.outside_image += 1;
        let right = projected(&beta)?;
        if right.has_inf() {
            report.outside_with_infinity += 1;
            continue;
        }
        let block = Assignment(projection.block(&beta).to_vec());
        let merged = if callee_graph.covered(&block) {
            None
        } else {
            representative_twin(&projection, &callee_analysis.matrix, &callee_rows, &beta)?
        };
        match merged {
            Some(twin) if projected(&twin)? == right => report.outside_merged += 1,
            _ => report.outside_failures.push(beta),
        }
    }
    Ok(report)
}

/// `beta` with its callee block replaced by the representative of the
/// behaviour the block produces.
fn representative_twin(
    projection: &ChoiceProjection,
    callee_matrix: &PolyMatrix,
    (rows, ret): &(Vec<usize>, usize),
    beta: &Assignment,
) -> Result<Option<Assignment>, MwpError> {
    let block = Assignment(projection.block(beta).to_vec());
    let behavior = rows
        .iter()
        .map(|&r| callee_matrix.get(r, *ret).eval(&block))
        .collect::<Result<Vec<_>, _>>()?;
    for rep in &projection.representatives {
        let rep_behavior = rows
            .iter()
            .map(|&r| callee_matrix.get(r, *ret).eval(rep))
            .collect::<Result<Vec<_>, _>>()?;
        if rep_behavior == behavior {
            let mut v = beta.values().to_vec();
            v[projection.block_start..projection.block_start + projection.block_len]
                .copy_from_slice(rep.values());
            return Ok(Some(Assignment(v)));
        }
    }
    Ok(None)
}

fn check_registries(
    p: &Registry,
    q: &Registry,
    callee: &Registry,
    projection: &ChoiceProjection,
) -> Result<(), MwpError> {
    let mismatch =
        || MwpError::Internal("inlined choice space does not line up with the caller's".into());
    let j0 = projection.block_start;
    let k = projection.block_len;
    let after = j0 + usize::from(projection.call_index.is_some());
    if q.len() != p.len() - (after - j0) + k {
        return Err(mismatch());
    }
    let pc = p.cardinalities();
    let qc = q.cardinalities();
    if pc[..j0] != qc[..j0]
        || qc[j0..j0 + k] != *callee.cardinalities()
        || pc[after..] != qc[j0 + k..]
    {
        return Err(mismatch());
    }
    Ok(())
}

/// Convenience wrapper analyzing with default options; used by tests and
/// the command line.
pub fn analyze_inlined(
    program: &Program,
    caller: &str,
    callee: &str,
) -> Result<(Inlined, crate::analyzer::FunctionAnalysis), MwpError> {
    let analysis = analyze_program(program, &Options::default())?;
    let caller_decl = program
        .function(caller)
        .ok_or_else(|| MwpError::NoSuchFunction(caller.to_string()))?;
    let callee_decl = program
        .function(callee)
        .ok_or_else(|| MwpError::NoSuchFunction(callee.to_string()))?;
    let summaries: Summaries = analysis
        .functions
        .iter()
        .filter_map(|f| f.summary.clone().map(|s| (f.name.clone(), s)))
        .collect();
    let inlined = build_inlined(caller_decl, callee_decl)?;
    let q = analyze_function(&inlined.function, &summaries, &Options::default())?;
    Ok((inlined, q))
}
