//! Human-readable and JSON renderings of an analysis.
//!
//! JSON key order is fixed by the struct field order and timing is left
//! out, so identical input gives byte-identical output.

use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::analyzer::{FunctionAnalysis, ProgramAnalysis};
use crate::choice_poly::{ChoicePolynomial, Monomial};
use crate::semiring::{MwpInf, MwpMatrix};

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub version: String,
    pub functions: Vec<FunctionReport>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct FunctionReport {
    pub name: String,
    pub variables: Vec<String>,
    pub choices: Vec<ChoiceReport>,
    pub matrix: Vec<Vec<PolynomialReport>>,
    pub verdict: String,
    pub sample_assignment: Option<Vec<u32>>,
    pub blame: Vec<[String; 2]>,
    pub behaviors: Vec<Behavior>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ChoiceReport {
    pub index: usize,
    pub domain: u32,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct PolynomialReport {
    pub monomials: Vec<MonomialReport>,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct MonomialReport {
    pub scalar: String,
    /// `[value, index]` pairs, sorted by index.
    pub deltas: Vec<[u32; 2]>,
}

/// Parameter → flow class, serialized as an object in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior(pub Vec<(String, String)>);

impl Serialize for Behavior {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

pub fn scalar_name(s: MwpInf) -> String {
    match s {
        MwpInf::Inf => "inf".to_string(),
        MwpInf::Finite(v) => v.symbol().to_string(),
    }
}

fn monomial_report(m: &Monomial) -> MonomialReport {
    MonomialReport {
        scalar: scalar_name(m.scalar),
        deltas: m.deltas().iter().map(|d| [d.value, d.index]).collect(),
    }
}

fn polynomial_report(p: &ChoicePolynomial) -> PolynomialReport {
    PolynomialReport {
        monomials: p.monomials().iter().map(monomial_report).collect(),
    }
}

pub fn function_report(f: &FunctionAnalysis) -> FunctionReport {
    let n = f.variables.len();
    FunctionReport {
        name: f.name.clone(),
        variables: f.variables.clone(),
        choices: f
            .registry
            .cardinalities()
            .iter()
            .enumerate()
            .map(|(index, &domain)| ChoiceReport { index, domain })
            .collect(),
        matrix: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| polynomial_report(f.matrix.get(i, j)))
                    .collect()
            })
            .collect(),
        verdict: f.verdict.name().to_string(),
        sample_assignment: f.sample.as_ref().map(|a| a.values().to_vec()),
        blame: f
            .blame
            .iter()
            .map(|(a, b)| [a.clone(), b.clone()])
            .collect(),
        behaviors: f
            .summary
            .iter()
            .flat_map(|s| {
                s.behaviors.iter().map(|b| {
                    Behavior(
                        s.params
                            .iter()
                            .zip(b)
                            .map(|(p, v)| (p.clone(), v.symbol().to_string()))
                            .collect(),
                    )
                })
            })
            .collect(),
    }
}

pub fn document(analysis: &ProgramAnalysis, only: Option<&str>) -> ReportDocument {
    ReportDocument {
        version: env!("CARGO_PKG_VERSION").to_string(),
        functions: analysis
            .functions
            .iter()
            .filter(|f| only.map_or(true, |n| f.name == n))
            .map(function_report)
            .collect(),
    }
}

pub fn to_json(doc: &ReportDocument) -> String {
    serde_json::to_string_pretty(doc).expect("report serializes")
}

/// Plain-text report; `∞` appears as `i`.
pub fn render_text(f: &FunctionAnalysis) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "function {}", f.name);
    let _ = writeln!(out, "  variables: {}", f.variables.join(" "));
    let domains: Vec<String> = f
        .registry
        .cardinalities()
        .iter()
        .enumerate()
        .map(|(k, d)| format!("{k}:{d}"))
        .collect();
    if domains.is_empty() {
        let _ = writeln!(out, "  choices: none");
    } else {
        let _ = writeln!(out, "  choices: {}", domains.join(" "));
    }
    let _ = writeln!(out, "  flows:");
    let mut any = false;
    for (i, j, p) in f.matrix.entries() {
        if !p.is_zero() {
            any = true;
            let _ = writeln!(out, "    {} -> {}: {}", f.variables[i], f.variables[j], p);
        }
    }
    if !any {
        let _ = writeln!(out, "    none");
    }
    let _ = writeln!(out, "  verdict: {}", f.verdict.name());
    if let Some(s) = &f.sample {
        let shown = if s.is_empty() {
            "()".to_string()
        } else {
            s.to_string()
        };
        let _ = writeln!(out, "  sample assignment: {shown}");
    }
    if let Some(n) = f.infinity_free {
        let _ = writeln!(
            out,
            "  infinity-free assignments: {n} of {}",
            f.registry.assignment_count()
        );
    }
    if !f.blame.is_empty() {
        let pairs: Vec<String> = f.blame.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        let _ = writeln!(out, "  blame: {}", pairs.join(" "));
    }
    if let Some(s) = &f.summary {
        let _ = writeln!(out, "  behaviors: {}", s.behaviors.len());
        for b in &s.behaviors {
            let flows: Vec<String> = s
                .params
                .iter()
                .zip(b)
                .map(|(p, v)| format!("{p}:{v}"))
                .collect();
            let _ = writeln!(out, "    {}", flows.join(" "));
        }
    }
    out
}

/// A matrix with row and column headers.
pub fn render_matrix(m: &MwpMatrix, variables: &[String]) -> String {
    let width = variables.iter().map(|v| v.len()).max().unwrap_or(1).max(1);
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "");
    for v in variables {
        let _ = write!(out, " {v:>width$}");
    }
    out.push('\n');
    for (i, v) in variables.iter().enumerate() {
        let _ = write!(out, "{v:width$}");
        for j in 0..variables.len() {
            let _ = write!(out, " {:>width$}", m.get(i, j).symbol());
        }
        out.push('\n');
    }
    out
}
