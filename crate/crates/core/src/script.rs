//! Line-oriented scripts: graph declarations, let/matrix/endo bindings, and
//! exact assertions.
//!
//! ```text
//! graph rose 2
//! let x = e1*e2' + e2*e1'
//! assert x*x == v
//! endo fx = fu x x
//! assert fx(e1) == e2
//! ```

use crate::error::{LpaError, Result};
use crate::graph::{Graph, VertexId};
use crate::matrix::{AlgMatrix, InvertiblePair};
use crate::morphism::{Automorphism, Endo};
use crate::parse::{parse_element_env, parse_matrix, Binding, Env};
use crate::scalar::FieldMode;
use crate::verify::{Check, Report, Verdict};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

struct ScriptState {
    graph: Option<Arc<Graph>>,
    env: Env,
    matrices: BTreeMap<String, AlgMatrix>,
    field: FieldMode,
}

impl ScriptState {
    fn graph(&self, line: usize) -> Result<&Arc<Graph>> {
        self.graph.as_ref().ok_or_else(|| LpaError::Script {
            line,
            msg: "no graph declared yet (use `graph rose N` or `graph file PATH`)".into(),
        })
    }

    fn matrix(&self, name: &str, line: usize) -> Result<&AlgMatrix> {
        self.matrices.get(name).ok_or_else(|| LpaError::Script {
            line,
            msg: format!("unknown matrix `{name}`"),
        })
    }
}

/// Executes a script; assertions become report checks in file order. Parse
/// and runtime errors abort with the offending line.
pub fn run_script(src: &str, field: FieldMode) -> Result<Report> {
    let mut state = ScriptState {
        graph: None,
        env: Env::new(),
        matrices: BTreeMap::new(),
        field,
    };
    let mut checks = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let fail = |msg: String| LpaError::Script { line, msg };
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            ["graph", "rose", n] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| fail(format!("bad petal count `{n}`")))?;
                state.graph = Some(Graph::rose(n)?);
            }
            ["graph", "file", path] => {
                let contents = std::fs::read_to_string(path)?;
                state.graph = Some(Graph::parse(&contents)?);
            }
            ["let", name, "=", ..] => {
                let expr = text.split_once('=').unwrap().1;
                let graph = state.graph(line)?.clone();
                let value = parse_element_env(expr, &graph, state.field, Some(&state.env))?;
                state
                    .env
                    .insert((*name).to_string(), Binding::Element(value));
            }
            ["matrix", name, "=", ..] => {
                let expr = text.split_once('=').unwrap().1;
                let graph = state.graph(line)?.clone();
                let m = parse_matrix(expr.trim(), &graph, state.field, VertexId(0))?;
                state.matrices.insert((*name).to_string(), m);
            }
            ["endo", name, "=", "fu", u, uinv] => {
                let graph = state.graph(line)?.clone();
                let u = parse_element_env(u, &graph, state.field, Some(&state.env))?;
                let uinv = parse_element_env(uinv, &graph, state.field, Some(&state.env))?;
                let endo = Endo::mk_fu(&u, &uinv)?;
                state
                    .env
                    .insert((*name).to_string(), Binding::Endo(Arc::new(endo)));
            }
            ["endo", name, "=", "phi", p, pinv, rest @ ..] => {
                let graph = state.graph(line)?.clone();
                let pair = InvertiblePair::new(
                    state.matrix(p, line)?.clone(),
                    state.matrix(pinv, line)?.clone(),
                )?;
                let endo = Endo::mk_phi_rose(&graph, pair)?;
                match rest {
                    [] => {}
                    ["witness", q, qinv] => {
                        let witness = InvertiblePair::new(
                            state.matrix(q, line)?.clone(),
                            state.matrix(qinv, line)?.clone(),
                        )?;
                        Automorphism::certify(&endo, &witness)?;
                    }
                    _ => return Err(fail("expected `witness Q QINV` after the pair".into())),
                }
                state
                    .env
                    .insert((*name).to_string(), Binding::Endo(Arc::new(endo)));
            }
            ["assert", ..] => {
                let body = text.strip_prefix("assert").unwrap().trim();
                let (lhs, rhs, negated) = if let Some(at) = body.find("==") {
                    (&body[..at], &body[at + 2..], false)
                } else if let Some(at) = body.find("!=") {
                    (&body[..at], &body[at + 2..], true)
                } else {
                    return Err(fail("assertion needs `==` or `!=`".into()));
                };
                let graph = state.graph(line)?.clone();
                let started = Instant::now();
                let left = parse_element_env(lhs, &graph, state.field, Some(&state.env))?;
                let right = parse_element_env(rhs, &graph, state.field, Some(&state.env))?;
                let holds = (left == right) != negated;
                checks.push(Check {
                    name: format!("line {line}"),
                    verdict: if holds { Verdict::Pass } else { Verdict::Fail },
                    millis: started.elapsed().as_millis(),
                    detail: if holds {
                        body.to_string()
                    } else {
                        format!("{body}: left = {left}, right = {right}")
                    },
                });
            }
            _ => return Err(fail(format!("unrecognized command `{text}`"))),
        }
    }
    Ok(Report { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_script_passes() {
        let src = "\
# rose with two petals
graph rose 2
let x = e1*e2' + e2*e1'
assert x*x == v
endo fx = fu x x
assert fx(e1) == e2
assert fx(e1*e2') == e2*e1'
";
        let report = run_script(src, FieldMode::Rational).unwrap();
        assert_eq!(report.checks.len(), 3);
        assert!(report.all_pass());
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn failed_identity_reports_fail() {
        let src = "\
graph rose 2
let u = e1*e2' + e2*e1' + e1^2*e2'*e1'
let uinv = e1*e2' + e2*e1' - e2*e1*e2'^2
endo fu = fu u uinv
assert fu(u) == u
";
        let report = run_script(src, FieldMode::Rational).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.checks[0].verdict, Verdict::Fail);
        assert_eq!(report.exit_code(), 1);
        // and the inequality assertion passes
        let src2 = src.replace("assert fu(u) == u", "assert fu(u) != u");
        assert!(run_script(&src2, FieldMode::Rational).unwrap().all_pass());
    }

    #[test]
    fn empty_script_is_an_empty_pass() {
        let report = run_script("", FieldMode::Rational).unwrap();
        assert!(report.checks.is_empty());
        assert!(report.all_pass());
    }

    #[test]
    fn matrix_and_phi_bindings() {
        let src = "\
graph rose 2
matrix P = [0, v; v, 0]
endo f = phi P P witness P P
assert f(e1) == e2
";
        assert!(run_script(src, FieldMode::Rational).unwrap().all_pass());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = run_script("graph rose 2\nlet x = e9\n", FieldMode::Rational).unwrap_err();
        assert!(matches!(err, LpaError::Parse { .. }));
        let err = run_script("let x = v\n", FieldMode::Rational).unwrap_err();
        assert!(matches!(err, LpaError::Script { line: 1, .. }));
        let err = run_script("graph rose 2\nfrobnicate\n", FieldMode::Rational).unwrap_err();
        assert!(matches!(err, LpaError::Script { line: 2, .. }));
    }
}
