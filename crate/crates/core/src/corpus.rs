//! Random and scaled program generators for property tests, acceptance
//! runs and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use std::collections::HashSet;

use crate::analyzer::jk::{jk_guided, jk_oracle, Callees, E2Policy};
use crate::analyzer::{analyze_function, Options, Summaries};
use crate::delta_graph::DeltaGraph;
use crate::frontend::{BExpr, BinOp, CmpOp, Command, Expr, FunctionDecl, Program};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub variables: usize,
    /// Upper bound on `+`/`-` nodes, hence on choice points.
    pub max_choices: usize,
    pub max_depth: usize,
    pub max_commands: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            variables: 3,
            max_choices: 8,
            max_depth: 2,
            max_commands: 3,
        }
    }
}

fn var(k: usize) -> String {
    format!("X{}", k + 1)
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    choices_left: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn pick_var(&mut self, avoid: &[String]) -> String {
        loop {
            let v = var(self.rng.gen_range(0..self.cfg.variables));
            if !avoid.contains(&v) {
                return v;
            }
        }
    }

    fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Expr::Var(self.pick_var(&[]));
        }
        let op = if self.choices_left == 0 || self.rng.gen_bool(0.15) {
            BinOp::Mul
        } else {
            self.choices_left -= 1;
            *[BinOp::Add, BinOp::Sub].choose(self.rng).unwrap()
        };
        let l = self.expr(depth - 1);
        let r = self.expr(depth - 1);
        Expr::binary(op, l, r)
    }

    fn cond(&mut self) -> BExpr {
        let op = *[CmpOp::Lt, CmpOp::Eq, CmpOp::Ne].choose(self.rng).unwrap();
        let c = BExpr::Cmp(
            op,
            Expr::Var(self.pick_var(&[])),
            Expr::Var(self.pick_var(&[])),
        );
        if self.rng.gen_bool(0.2) {
            BExpr::Not(Box::new(c))
        } else {
            c
        }
    }

    fn commands(&mut self, depth: usize, counters: &mut Vec<String>) -> Vec<Command> {
        let n = self.rng.gen_range(1..=self.cfg.max_commands);
        (0..n).map(|_| self.command(depth, counters)).collect()
    }

    fn command(&mut self, depth: usize, counters: &mut Vec<String>) -> Command {
        let roll = self.rng.gen_range(0..10);
        let assignable = counters.len() < self.cfg.variables;
        if depth == 0 || roll < 5 || !assignable {
            let target = if assignable {
                self.pick_var(counters)
            } else {
                var(0)
            };
            let expr = self.expr(2);
            return Command::Assign { target, expr };
        }
        match roll {
            5 | 6 => {
                let cond = self.cond();
                let then_branch = self.commands(depth - 1, counters);
                let else_branch = self
                    .rng
                    .gen_bool(0.6)
                    .then(|| self.commands(depth - 1, counters));
                Command::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            7 => {
                let cond = self.cond();
                Command::While {
                    cond,
                    body: self.commands(depth - 1, counters),
                }
            }
            _ => {
                let counter = self.pick_var(counters);
                counters.push(counter.clone());
                let body = self.commands(depth - 1, counters);
                counters.pop();
                Command::Loop { counter, body }
            }
        }
    }
}

/// A body of assignments, ifs, whiles and loops with at most
/// `cfg.max_choices` choice points. Loop counters are never assigned
/// inside their own loop.
pub fn random_body<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Vec<Command> {
    let mut g = Gen {
        rng,
        cfg,
        choices_left: cfg.max_choices,
    };
    let mut counters = Vec::new();
    g.commands(cfg.max_depth, &mut counters)
}

/// A one-function program `main`.
pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Program {
    Program {
        functions: vec![FunctionDecl {
            name: "main".into(),
            params: vec![],
            body: random_body(rng, cfg),
            ret: None,
        }],
    }
}

/// A callee `f` with one or two parameters and a `main` calling it once at
/// the top level, between random prefix and suffix commands.
pub fn random_pair<R: Rng>(rng: &mut R) -> Program {
    let callee_cfg = GenConfig {
        variables: 3,
        max_choices: 3,
        max_depth: 1,
        max_commands: 2,
    };
    let arity = rng.gen_range(1..=2);
    let params: Vec<String> = (0..arity).map(var).collect();
    let body = random_body(rng, &callee_cfg);
    let ret = var(rng.gen_range(0..callee_cfg.variables));
    let callee = FunctionDecl {
        name: "f".into(),
        params,
        body,
        ret: Some(ret),
    };

    let caller_cfg = GenConfig {
        variables: 3,
        max_choices: 2,
        max_depth: 1,
        max_commands: 2,
    };
    let mut body = Vec::new();
    if rng.gen_bool(0.7) {
        body.extend(random_body(rng, &caller_cfg));
    }
    let args = (0..arity).map(|_| var(rng.gen_range(0..3))).collect();
    body.push(Command::Call {
        target: var(rng.gen_range(0..3)),
        callee: "f".into(),
        args,
    });
    if rng.gen_bool(0.7) {
        body.extend(random_body(rng, &caller_cfg));
    }
    Program {
        functions: vec![
            callee,
            FunctionDecl {
                name: "main".into(),
                params: vec![],
                body,
                ret: None,
            },
        ],
    }
}

/// A straight-line chain of `n` sums over four variables, each feeding the
/// next, inside a loop; it has exactly `n` choice points.
pub fn explosion(n: usize) -> Program {
    let vars = 4;
    let body = (0..n)
        .map(|k| Command::Assign {
            target: var(k % vars),
            expr: Expr::binary(
                BinOp::Add,
                Expr::Var(var((k + 1) % vars)),
                Expr::Var(var((k + 2) % vars)),
            ),
        })
        .collect();
    Program {
        functions: vec![FunctionDecl {
            name: "main".into(),
            params: vec![],
            body: vec![Command::Loop {
                counter: var(vars),
                body,
            }],
            ret: None,
        }],
    }
}

/// Compares the analysis of `main` against the reference calculus: the
/// `∞`-free evaluations must be exactly the derivable matrices, and each
/// assignment must carry `∞` exactly when its guided derivation fails.
pub fn check_reference(program: &Program) -> Result<(), String> {
    let main = program.function("main").ok_or("no main")?;
    let analysis = analyze_function(main, &Summaries::new(), &Options::default())
        .map_err(|e| e.to_string())?;
    let derivable = jk_oracle(
        &main.body,
        &analysis.variables,
        &Callees::new(),
        E2Policy::CompoundOnly,
    )
    .map_err(|e| e.to_string())?;
    let mut seen = HashSet::new();
    for alpha in analysis.registry.assignments() {
        let m = analysis.evaluate(&alpha).map_err(|e| e.to_string())?;
        let guided = jk_guided(&main.body, &analysis.variables, &Callees::new(), &alpha)
            .map_err(|e| e.to_string())?;
        match (m.to_finite(), guided) {
            (Some(f), Some(g)) if f == g => {
                seen.insert(f);
            }
            (None, None) => {}
            (f, g) => {
                return Err(format!(
                    "at {alpha}: analyzer {} but guided derivation {}",
                    f.map_or("∞".into(), |m| format!("\n{m}")),
                    g.map_or("fails".into(), |m| format!("\n{m}")),
                ))
            }
        }
    }
    if seen != derivable {
        return Err(format!(
            "{} analyzer matrices vs {} derivable",
            seen.len(),
            derivable.len()
        ));
    }
    Ok(())
}

/// Checks the delta graph against enumeration: it covers exactly the
/// assignments carrying `∞`, it is complete exactly when none is
/// `∞`-free, and fusing the raw `∞` cylinders changes no coverage.
pub fn check_delta_graph(program: &Program) -> Result<(), String> {
    let main = program.function("main").ok_or("no main")?;
    let a = analyze_function(main, &Summaries::new(), &Options::default())
        .map_err(|e| e.to_string())?;
    let mut raw = DeltaGraph::new(a.registry.clone());
    for (_, _, p) in a.matrix.entries() {
        for m in p.inf_part().monomials() {
            raw.insert_unfused(m.deltas().to_vec());
        }
    }
    let mut fused = raw.clone();
    fused.fuse();
    let mut any_free = false;
    for alpha in a.registry.assignments() {
        let inf = a.evaluate(&alpha).map_err(|e| e.to_string())?.has_inf();
        any_free |= !inf;
        let covers = [
            a.delta_graph.covered(&alpha),
            raw.covered(&alpha),
            fused.covered(&alpha),
        ];
        if covers.iter().any(|&c| c != inf) {
            return Err(format!(
                "at {alpha}: ∞ {inf}, covered (graph, raw, fused) {covers:?}"
            ));
        }
    }
    if a.delta_graph.is_complete() == any_free {
        return Err(format!(
            "complete {} but ∞-free assignment exists {any_free}",
            a.delta_graph.is_complete()
        ));
    }
    Ok(())
}
