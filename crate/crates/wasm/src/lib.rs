//! Browser bindings: analyze a program, evaluate one function at an
//! assignment, and dump its delta graph. Errors come back as strings.

use wasm_bindgen::prelude::*;

use mwp_core::analyzer::{analyze_program, FunctionAnalysis, Options, ProgramAnalysis};
use mwp_core::frontend::parse;
use mwp_core::report::{document, render_matrix, render_text, to_json};
use mwp_core::Assignment;

fn run(source: &str) -> Result<ProgramAnalysis, String> {
    let program = parse(source).map_err(|d| format!("line {d}"))?;
    analyze_program(&program, &Options::default()).map_err(|e| e.to_string())
}

fn pick<'a>(analysis: &'a ProgramAnalysis, name: &str) -> Result<&'a FunctionAnalysis, String> {
    let name = name.trim();
    if name.is_empty() {
        return analysis
            .function("main")
            .or(analysis.functions.last())
            .ok_or_else(|| "no functions".to_string());
    }
    analysis
        .function(name)
        .ok_or_else(|| format!("no function `{name}`"))
}

/// The text report of every function.
pub fn report_text(source: &str) -> Result<String, String> {
    let a = run(source)?;
    let parts: Vec<String> = a.functions.iter().map(render_text).collect();
    Ok(parts.join("\n"))
}

pub fn report_json(source: &str) -> Result<String, String> {
    Ok(to_json(&document(&run(source)?, None)))
}

/// `picks` is comma separated, e.g. `1,0,2`; empty for no choices.
pub fn evaluate_at(source: &str, function: &str, picks: &str) -> Result<String, String> {
    let a = run(source)?;
    let f = pick(&a, function)?;
    let values = picks
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| format!("`{p}` is not a branch number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = f.evaluate(&Assignment(values)).map_err(|e| e.to_string())?;
    Ok(render_matrix(&m, &f.variables))
}

pub fn delta_graph_text(source: &str, function: &str) -> Result<String, String> {
    let a = run(source)?;
    let f = pick(&a, function)?;
    let g = &f.delta_graph;
    let mut out = format!("function {}: {} vertices\n", f.name, g.vertex_count());
    out.push_str(&g.to_string());
    match g.first_uncovered() {
        Some(s) if s.is_empty() => out.push_str("first ∞-free assignment: ()\n"),
        Some(s) => out.push_str(&format!("first ∞-free assignment: {s}\n")),
        None => out.push_str("every assignment is covered\n"),
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn analyze(source: &str) -> Result<String, JsValue> {
    report_text(source).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn analyze_json(source: &str) -> Result<String, JsValue> {
    report_json(source).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn evaluate(source: &str, function: &str, picks: &str) -> Result<String, JsValue> {
    evaluate_at(source, function, picks).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn delta_graph(source: &str, function: &str) -> Result<String, JsValue> {
    delta_graph_text(source, function).map_err(JsValue::from)
}
