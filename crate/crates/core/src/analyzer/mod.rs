//! Deterministic derivation of one choice matrix per function.
//!
//! Every nondeterministic step of the mwp calculus becomes a registered
//! choice point: each `+`/`-` node gets a three-way choice, each call to a
//! function with `k` distinct behaviours gets a `k`-way choice. Loops never
//! fail; flows that would break the polynomial side conditions become `∞`
//! on the cylinder of assignments that produce them, and those cylinders
//! are recorded in a [`DeltaGraph`] as they appear.

pub mod jk;

use std::collections::{BTreeSet, HashMap};

use crate::choice_poly::{
    evaluate, poly_closure, Assignment, ChoicePolynomial, Delta, Monomial, PolyMatrix, Registry,
};
use crate::delta_graph::DeltaGraph;
use crate::error::MwpError;
use crate::frontend::{collect_vars, BinOp, Command, Expr, FunctionDecl, Program};
use crate::semiring::{Mwp, MwpInf, MwpMatrix};

/// Default cap on the number of assignments any enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Evaluate the matrix at every assignment.
    Enumerate,
    /// Read the verdict off the delta graph without enumerating.
    DeltaGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub strategy: Strategy,
    pub budget: u128,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            strategy: Strategy::DeltaGraph,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// No assignment ever produced `∞`.
    Bounded,
    /// Some assignments produce `∞`, at least one does not.
    ConditionallyBounded,
    /// Every assignment produces `∞`.
    Unbounded,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::ConditionallyBounded => "conditionally_bounded",
            Verdict::Unbounded => "unbounded",
        }
    }
}

/// The distinct `∞`-free input/output behaviours of a function: for each,
/// the flow from every parameter into the returned variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSummary {
    pub name: String,
    pub params: Vec<String>,
    pub behaviors: Vec<Vec<Mwp>>,
    /// For each behaviour, the lexicographically smallest assignment of the
    /// function's own choices that produces it.
    pub representatives: Vec<Assignment>,
}

/// Where a call was analyzed, for relating caller and inlined choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallSite {
    pub callee: String,
    pub target: String,
    pub args: Vec<String>,
    /// Registry length when the call was reached.
    pub first_index: usize,
    /// The call's own choice index; `None` when the callee has no behaviour.
    pub choice: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FunctionAnalysis {
    pub name: String,
    pub variables: Vec<String>,
    pub registry: Registry,
    pub matrix: PolyMatrix,
    pub delta_graph: DeltaGraph,
    pub verdict: Verdict,
    /// Lexicographically smallest `∞`-free assignment, if any.
    pub sample: Option<Assignment>,
    /// `(source, target)` pairs whose entry carries `∞` somewhere.
    pub blame: Vec<(String, String)>,
    pub summary: Option<FunctionSummary>,
    pub call_sites: Vec<CallSite>,
    /// Number of `∞`-free assignments, when the verdict was enumerated.
    pub infinity_free: Option<u128>,
}

impl FunctionAnalysis {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<MwpMatrix, MwpError> {
        self.registry.validate(assignment)?;
        evaluate(&self.matrix, assignment)
    }
}

#[derive(Clone, Debug)]
pub struct ProgramAnalysis {
    pub functions: Vec<FunctionAnalysis>,
}

impl ProgramAnalysis {
    pub fn function(&self, name: &str) -> Option<&FunctionAnalysis> {
        self.functions.iter().find(|f| f.name == name)
    }
}

pub type Summaries = HashMap<String, FunctionSummary>;

/// Analyzes every function in declaration order, threading summaries.
pub fn analyze_program(program: &Program, options: &Options) -> Result<ProgramAnalysis, MwpError> {
    let mut summaries = Summaries::new();
    let mut functions = Vec::with_capacity(program.functions.len());
    for f in &program.functions {
        let analysis = analyze_function(f, &summaries, options)?;
        if let Some(s) = &analysis.summary {
            summaries.insert(f.name.clone(), s.clone());
        }
        functions.push(analysis);
    }
    Ok(ProgramAnalysis { functions })
}

/// The derivation proper: matrix, registry, delta graph and call sites of a
/// command list over the given variables.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub matrix: PolyMatrix,
    pub registry: Registry,
    pub delta_graph: DeltaGraph,
    pub call_sites: Vec<CallSite>,
}

pub fn derive(
    body: &[Command],
    variables: &[String],
    summaries: &Summaries,
) -> Result<Derivation, MwpError> {
    let mut ctx = Ctx {
        index: variables
            .iter()
            .enumerate()
            .map(|(k, v)| (v.as_str(), k))
            .collect(),
        n: variables.len(),
        registry: Registry::new(),
        delta_graph: DeltaGraph::new(Registry::new()),
        summaries,
        call_sites: Vec::new(),
    };
    let matrix = ctx.commands(body)?;
    Ok(Derivation {
        matrix,
        registry: ctx.registry,
        delta_graph: ctx.delta_graph,
        call_sites: ctx.call_sites,
    })
}

pub fn analyze_function(
    f: &FunctionDecl,
    summaries: &Summaries,
    options: &Options,
) -> Result<FunctionAnalysis, MwpError> {
    let variables = collect_vars(f);
    let Derivation {
        matrix,
        registry,
        mut delta_graph,
        call_sites,
    } = derive(&f.body, &variables, summaries)?;
    delta_graph.set_registry(&registry);

    let (verdict, sample, infinity_free) = match options.strategy {
        Strategy::DeltaGraph => {
            let (v, s) = delta_graph_verdict(&delta_graph);
            (v, s, None)
        }
        Strategy::Enumerate => {
            let (v, s, count) = enumerated_verdict(&matrix, &registry, options.budget)?;
            (v, s, Some(count))
        }
    };

    let blame = blame_pairs(&matrix, &variables);

    let summary = match &f.ret {
        None => None,
        Some(ret) => Some(summarize(
            f,
            &variables,
            ret,
            &matrix,
            &registry,
            &delta_graph,
            options.budget,
        )?),
    };

    Ok(FunctionAnalysis {
        name: f.name.clone(),
        variables,
        registry,
        matrix,
        delta_graph,
        verdict,
        sample,
        blame,
        summary,
        call_sites,
        infinity_free,
    })
}

pub fn delta_graph_verdict(graph: &DeltaGraph) -> (Verdict, Option<Assignment>) {
    if graph.is_empty() {
        return (Verdict::Bounded, graph.first_uncovered());
    }
    match graph.first_uncovered() {
        None => (Verdict::Unbounded, None),
        Some(a) => (Verdict::ConditionallyBounded, Some(a)),
    }
}

/// Verdict by evaluating the matrix at every assignment.
pub fn enumerated_verdict(
    matrix: &PolyMatrix,
    registry: &Registry,
    budget: u128,
) -> Result<(Verdict, Option<Assignment>, u128), MwpError> {
    let needed = registry.assignment_count();
    if needed > budget {
        return Err(MwpError::BudgetExceeded { needed, budget });
    }
    let mut first = None;
    let mut free = 0u128;
    for a in registry.assignments() {
        if !evaluate(matrix, &a)?.has_inf() {
            free += 1;
            if first.is_none() {
                first = Some(a);
            }
        }
    }
    let verdict = if free == needed {
        Verdict::Bounded
    } else if free == 0 {
        Verdict::Unbounded
    } else {
        Verdict::ConditionallyBounded
    };
    Ok((verdict, first, free))
}

pub fn blame_pairs(matrix: &PolyMatrix, variables: &[String]) -> Vec<(String, String)> {
    matrix
        .entries()
        .filter(|(_, _, p)| p.has_inf())
        .map(|(i, j, _)| (variables[i].clone(), variables[j].clone()))
        .collect()
}

/// Collects the distinct `∞`-free parameter-to-return behaviours.
///
/// Only choice indices that influence either those entries or the presence
/// of `∞` are enumerated; every other index is held at `0`, which keeps the
/// representatives lexicographically smallest.
fn summarize(
    f: &FunctionDecl,
    variables: &[String],
    ret: &str,
    matrix: &PolyMatrix,
    registry: &Registry,
    graph: &DeltaGraph,
    budget: u128,
) -> Result<FunctionSummary, MwpError> {
    let r = variables
        .iter()
        .position(|v| v == ret)
        .ok_or_else(|| MwpError::UnknownVariable(ret.to_string()))?;
    let param_rows: Vec<usize> = (0..f.params.len()).collect();

    let mut relevant: BTreeSet<usize> = BTreeSet::new();
    for &p in &param_rows {
        relevant.extend(matrix.get(p, r).indices());
    }
    for v in graph.vertices() {
        relevant.extend(v.iter().map(|d| d.index as usize));
    }
    let relevant: Vec<usize> = relevant.into_iter().collect();
    let sub =
        Registry::from_cardinalities(relevant.iter().map(|&k| registry.cardinality(k)).collect());
    let needed = sub.assignment_count();
    if needed > budget {
        return Err(MwpError::BudgetExceeded { needed, budget });
    }

    let mut behaviors: Vec<Vec<Mwp>> = Vec::new();
    let mut representatives = Vec::new();
    let mut full = vec![0u32; registry.len()];
    for partial in sub.assignments() {
        for (slot, &k) in relevant.iter().enumerate() {
            full[k] = partial.values()[slot];
        }
        let alpha = Assignment(full.clone());
        if graph.covered(&alpha) {
            continue;
        }
        let behavior = param_rows
            .iter()
            .map(|&p| {
                let v = matrix.get(p, r).eval(&alpha)?;
                v.finite()
                    .ok_or_else(|| MwpError::Internal("∞ outside the delta graph".into()))
            })
            .collect::<Result<Vec<Mwp>, MwpError>>()?;
        if !behaviors.contains(&behavior) {
            behaviors.push(behavior);
            representatives.push(alpha);
        }
    }
    Ok(FunctionSummary {
        name: f.name.clone(),
        params: f.params.clone(),
        behaviors,
        representatives,
    })
}

struct Ctx<'a> {
    index: HashMap<&'a str, usize>,
    n: usize,
    registry: Registry,
    delta_graph: DeltaGraph,
    summaries: &'a Summaries,
    call_sites: Vec<CallSite>,
}

type Vector = Vec<ChoicePolynomial>;

fn delta_poly(value: u32, index: usize) -> ChoicePolynomial {
    ChoicePolynomial::monomial(
        Monomial::new(MwpInf::M, [Delta::new(value, index as u32)]).expect("single delta"),
    )
}

impl<'a> Ctx<'a> {
    fn var(&self, name: &str) -> Result<usize, MwpError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| MwpError::UnknownVariable(name.to_string()))
    }

    fn compact(&self, m: PolyMatrix) -> PolyMatrix {
        let cards = self.registry.cardinalities();
        m.map(|p| p.compact(cards))
    }

    fn zero_vector(&self) -> Vector {
        vec![ChoicePolynomial::zero(); self.n]
    }

    fn unit(&self, k: usize, scalar: MwpInf) -> Vector {
        let mut v = self.zero_vector();
        v[k] = ChoicePolynomial::constant(scalar);
        v
    }

    fn expr(&mut self, e: &Expr) -> Result<Vector, MwpError> {
        match e {
            Expr::Var(x) => Ok(self.unit(self.var(x)?, MwpInf::M)),
            Expr::Binary(BinOp::Mul, _, _) => {
                let mut v = self.zero_vector();
                for x in e.vars() {
                    v[self.var(x)?] = ChoicePolynomial::constant(MwpInf::W);
                }
                Ok(v)
            }
            Expr::Binary(_, lhs, rhs) => {
                // The node's own choice is allocated before its operands'.
                let j = self.registry.allocate(3);
                let v1 = self.expr(lhs)?;
                let v2 = self.expr(rhs)?;
                let (d0, d1, d2) = (delta_poly(0, j), delta_poly(1, j), delta_poly(2, j));
                let mut weak = vec![false; self.n];
                for x in e.vars() {
                    weak[self.var(x)?] = true;
                }
                // Branch 2 weakens the whole expression to `w`, whatever the
                // operands' own choices are.
                Ok(v1
                    .iter()
                    .zip(&v2)
                    .zip(weak)
                    .map(|((a, b), weak)| {
                        let first = a.add(&b.scale(MwpInf::P)).mul(&d0);
                        let second = a.scale(MwpInf::P).add(b).mul(&d1);
                        let sum = first.add(&second);
                        if weak {
                            sum.add(&d2.scale(MwpInf::W))
                        } else {
                            sum
                        }
                    })
                    .collect())
            }
        }
    }

    fn commands(&mut self, cmds: &[Command]) -> Result<PolyMatrix, MwpError> {
        let mut acc: Option<PolyMatrix> = None;
        for c in cmds {
            let m = self.command(c)?;
            acc = Some(match acc {
                None => m,
                Some(a) => self.compact(a.mul(&m)?),
            });
        }
        Ok(acc.unwrap_or_else(|| PolyMatrix::identity(self.n)))
    }

    fn command(&mut self, c: &Command) -> Result<PolyMatrix, MwpError> {
        match c {
            Command::Assign { target, expr } => {
                let j = self.var(target)?;
                let v = self.expr(expr)?;
                PolyMatrix::identity(self.n).with_column(j, &v)
            }
            Command::Call {
                target,
                callee,
                args,
            } => self.call(target, callee, args),
            Command::If {
                then_branch,
                else_branch,
                ..
            } => {
                let a = self.commands(then_branch)?;
                let b = match else_branch {
                    Some(e) => self.commands(e)?,
                    None => PolyMatrix::identity(self.n),
                };
                Ok(self.compact(a.add(&b)?))
            }
            Command::While { body, .. } => {
                let m = self.commands(body)?;
                let out = self.loop_rule(&m, None);
                Ok(self.compact(out))
            }
            Command::Loop { counter, body } => {
                let l = self.var(counter)?;
                let m = self.commands(body)?;
                let out = self.loop_rule(&m, Some(l));
                Ok(self.compact(out))
            }
        }
    }

    /// `L∞` when `counter` is given, `W∞` otherwise.
    fn loop_rule(&mut self, body: &PolyMatrix, counter: Option<usize>) -> PolyMatrix {
        let star = poly_closure(body, self.registry.cardinalities());
        let n = self.n;
        let mut out = star.clone();
        let mut infinite: Vec<Vec<Delta>> = Vec::new();
        for j in 0..n {
            // M*_jj ≠ m, i.e. the diagonal reaches w or more (it is never 0).
            let diag = star.get(j, j).filter_at_least(MwpInf::W);
            infinite.extend(diag.monomials().iter().map(|m| m.deltas().to_vec()));
            let mut extra = to_scalar(&diag, MwpInf::INF);
            let mut column_p = ChoicePolynomial::zero();
            for i in 0..n {
                let at_p = star.get(i, j).filter_at_least(MwpInf::P);
                if at_p.is_zero() {
                    continue;
                }
                match counter {
                    None => {
                        infinite.extend(at_p.monomials().iter().map(|m| m.deltas().to_vec()));
                        let inf = to_scalar(&at_p, MwpInf::INF);
                        if i == j {
                            extra = extra.add(&inf);
                        } else {
                            out.set(i, j, out.get(i, j).add(&inf));
                        }
                    }
                    Some(_) => column_p = column_p.add(&at_p),
                }
            }
            if !extra.is_zero() {
                out.set(j, j, out.get(j, j).add(&extra));
            }
            if let Some(l) = counter {
                if !column_p.is_zero() {
                    let p = to_scalar(&column_p, MwpInf::P);
                    out.set(l, j, out.get(l, j).add(&p));
                }
            }
        }
        self.delta_graph.set_registry(&self.registry);
        for d in infinite {
            self.delta_graph.insert(d);
        }
        out
    }

    fn call(
        &mut self,
        target: &str,
        callee: &str,
        args: &[String],
    ) -> Result<PolyMatrix, MwpError> {
        let summary = self
            .summaries
            .get(callee)
            .ok_or_else(|| MwpError::UnknownFunction(callee.to_string()))?;
        if summary.params.len() != args.len() {
            return Err(MwpError::Arity {
                callee: callee.to_string(),
                expected: summary.params.len(),
                got: args.len(),
            });
        }
        let t = self.var(target)?;
        let rows = args
            .iter()
            .map(|a| self.var(a))
            .collect::<Result<Vec<_>, _>>()?;
        let first_index = self.registry.len();
        let mut column = self.zero_vector();

        let choice = if summary.behaviors.is_empty() {
            // No polynomial certificate for the callee: every argument flows
            // into the result with ∞, under every assignment.
            for &r in &rows {
                column[r] = ChoicePolynomial::constant(MwpInf::INF);
            }
            self.delta_graph.set_registry(&self.registry);
            self.delta_graph.insert(Vec::new());
            None
        } else {
            let k = summary.behaviors.len();
            let i0 = self.registry.allocate(k as u32);
            for (b, behavior) in summary.behaviors.iter().enumerate() {
                let d = delta_poly(b as u32, i0);
                for (&r, &flow) in rows.iter().zip(behavior) {
                    if flow == Mwp::Zero {
                        continue;
                    }
                    let term = d.scale(MwpInf::from(flow));
                    column[r] = column[r].add(&term);
                }
            }
            Some(i0)
        };
        self.call_sites.push(CallSite {
            callee: callee.to_string(),
            target: target.to_string(),
            args: args.to_vec(),
            first_index,
            choice,
        });
        PolyMatrix::identity(self.n).with_column(t, &column)
    }
}

/// Same cylinders, every scalar replaced by `scalar`.
fn to_scalar(p: &ChoicePolynomial, scalar: MwpInf) -> ChoicePolynomial {
    ChoicePolynomial::from_monomials(p.monomials().iter().map(|m| {
        Monomial::new(scalar, m.deltas().iter().copied()).expect("deltas already consistent")
    }))
}
