//! `mwp`: flow analysis of programs in the small imperative language.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use mwp_core::analyzer::{
    analyze_function, FunctionAnalysis, Options, ProgramAnalysis, Strategy, Summaries, Verdict,
    DEFAULT_BUDGET,
};
use mwp_core::frontend::{parse_with, ParseOptions, Program};
use mwp_core::inliner::{check_call_theorem, TheoremReport};
use mwp_core::report::{document, render_matrix, render_text, to_json};
use mwp_core::{Assignment, MwpError};

const EXIT_BOUNDED: u8 = 0;
const EXIT_UNBOUNDED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mwp",
    version,
    about = "Classifies how variable sizes flow through a program"
)]
struct Cli {
    /// Program to analyze (`.imp`).
    file: PathBuf,

    /// Only report on this function.
    #[arg(long, value_name = "NAME")]
    function: Option<String>,

    /// Print the matrix at this assignment, e.g. `1,0,2`.
    #[arg(long, value_name = "PICKS", allow_hyphen_values = true)]
    eval: Option<String>,

    /// Emit the JSON report.
    #[arg(long)]
    json: bool,

    /// Verdict from the delta graph only, without enumerating assignments.
    #[arg(long)]
    fast: bool,

    /// Check the call rule against inlining for CALLER's first call to CALLEE.
    #[arg(long, num_args = 2, value_names = ["CALLER", "CALLEE"], hide = true)]
    check_inline: Option<Vec<String>>,

    /// Print the parsed program and exit.
    #[arg(long)]
    dump_ast: bool,
}

fn main() -> ExitCode {
    // `analyze` is the only command and may be omitted.
    let mut args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some("analyze") {
        args.remove(1);
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_BOUNDED
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("mwp: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    let path = cli.file.display();
    let source = std::fs::read_to_string(&cli.file).map_err(|e| format!("{path}: {e}"))?;
    let parsed = parse_with(&source, ParseOptions::default()).map_err(|d| format!("{path}:{d}"))?;
    for w in &parsed.warnings {
        eprintln!("{path}:{w}");
    }
    let program = parsed.program;

    if cli.dump_ast {
        println!("{program:#?}");
        return Ok(EXIT_BOUNDED);
    }
    if let Some(pair) = &cli.check_inline {
        return check_inline(&program, &pair[0], &pair[1]);
    }
    if let Some(name) = &cli.function {
        if program.function(name).is_none() {
            return Err(format!("no function `{name}`"));
        }
    }

    let start = Instant::now();
    let analysis = analyze(&program, cli.fast).map_err(|e| e.to_string())?;
    eprintln!("analyzed in {:.3} ms", start.elapsed().as_secs_f64() * 1e3);

    let selected: Vec<&FunctionAnalysis> = analysis
        .functions
        .iter()
        .filter(|f| cli.function.as_deref().map_or(true, |n| f.name == n))
        .collect();

    let out = if let Some(picks) = &cli.eval {
        let f = eval_target(&analysis, cli.function.as_deref())?;
        let alpha = parse_assignment(picks)?;
        let m = f.evaluate(&alpha).map_err(|e| e.to_string())?;
        render_matrix(&m, &f.variables)
    } else if cli.json {
        to_json(&document(&analysis, cli.function.as_deref())) + "\n"
    } else {
        let parts: Vec<String> = selected.iter().map(|f| render_text(f)).collect();
        parts.join("\n")
    };
    emit(&out);

    let unbounded = selected.iter().any(|f| f.verdict == Verdict::Unbounded);
    Ok(if unbounded {
        EXIT_UNBOUNDED
    } else {
        EXIT_BOUNDED
    })
}

/// Enumerates unless `fast`; a function whose choice space exceeds the
/// budget falls back to the delta graph, with a note on stderr.
fn analyze(program: &Program, fast: bool) -> Result<ProgramAnalysis, MwpError> {
    let strategy = if fast {
        Strategy::DeltaGraph
    } else {
        Strategy::Enumerate
    };
    let options = Options {
        strategy,
        budget: DEFAULT_BUDGET,
    };
    let mut summaries = Summaries::new();
    let mut functions = Vec::with_capacity(program.functions.len());
    for f in &program.functions {
        let a = match analyze_function(f, &summaries, &options) {
            Err(MwpError::BudgetExceeded { needed, budget }) if !fast => {
                eprintln!(
                    "note: `{}` has {needed} assignments (budget {budget}); using the delta graph",
                    f.name
                );
                let fallback = Options {
                    strategy: Strategy::DeltaGraph,
                    ..options
                };
                analyze_function(f, &summaries, &fallback)?
            }
            other => other?,
        };
        if let Some(s) = &a.summary {
            summaries.insert(f.name.clone(), s.clone());
        }
        functions.push(a);
    }
    Ok(ProgramAnalysis { functions })
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush());
}

fn eval_target<'a>(
    analysis: &'a ProgramAnalysis,
    name: Option<&str>,
) -> Result<&'a FunctionAnalysis, String> {
    match name {
        Some(n) => analysis
            .function(n)
            .ok_or_else(|| format!("no function `{n}`")),
        None if analysis.functions.len() == 1 => Ok(&analysis.functions[0]),
        None => analysis
            .function("main")
            .ok_or_else(|| "--eval needs --function when there is no main".to_string()),
    }
}

fn parse_assignment(text: &str) -> Result<Assignment, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Assignment(Vec::new()));
    }
    text.split(',')
        .map(|p| {
            p.trim().parse::<u32>().map_err(|_| {
                format!(
                    "bad assignment `{text}`: `{}` is not a branch number",
                    p.trim()
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Assignment)
}

fn check_inline(program: &Program, caller: &str, callee: &str) -> Result<u8, String> {
    let r =
        check_call_theorem(program, caller, callee, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    emit(&theorem_text(&r));
    Ok(if r.holds() {
        EXIT_BOUNDED
    } else {
        EXIT_UNBOUNDED
    })
}

fn theorem_text(r: &TheoremReport) -> String {
    let p = &r.projection;
    let mut lines = vec![format!("call {} -> {}", r.caller, r.callee)];
    lines.push(match p.call_index {
        Some(i) => format!(
            "  call choice {i}; inlined block {}..{} ({} behaviours)",
            p.block_start,
            p.block_start + p.block_len,
            p.representatives.len()
        ),
        None => "  callee has no behaviour".to_string(),
    });
    lines.push(format!(
        "  assignments: caller {}, inlined {}",
        r.caller_assignments, r.inlined_assignments
    ));
    lines.push(match r.equality_failures.first() {
        None => "  equality on the image: ok".to_string(),
        Some((alpha, beta)) => format!(
            "  equality on the image: FAILS at {alpha} (inlined {}), {} in total",
            beta.as_ref().map_or("-".to_string(), |b| b.to_string()),
            r.equality_failures.len()
        ),
    });
    lines.push(format!(
        "  outside the image: {} ({} with ∞, {} merged)",
        r.outside_image, r.outside_with_infinity, r.outside_merged
    ));
    if let Some(b) = r.outside_failures.first() {
        lines.push(format!("  ∞ outside the image: FAILS at {b}"));
    }
    let verdict = if r.holds() {
        "holds"
    } else if r.holds_up_to_merging() {
        "holds up to merged behaviours"
    } else {
        "fails"
    };
    lines.push(format!("  result: {verdict}"));
    lines.join("\n") + "\n"
}
