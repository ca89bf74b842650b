use std::fmt::Write;

use crate::dsl::{parse_pattern, Abstraction, DslError, Grammar, RuleId};

/// One `fn_k = <body>` line per abstraction, in registration order.
pub fn format_library(g: &Grammar) -> String {
    let mut out = String::new();
    for a in g.abstractions() {
        let _ = writeln!(out, "{} = {}", a.name, a.body.display(g));
    }
    out
}

/// Registers every `name = body` line of `text` in `g`. Blank lines and `;`
/// comments are skipped; errors carry the 1-based line number.
pub fn load_library(g: &mut Grammar, text: &str) -> Result<Vec<RuleId>, (usize, DslError)> {
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let code = line.split(';').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let err = |e| (i + 1, e);
        let (name, body) = code.split_once('=').ok_or_else(|| {
            err(DslError::Syntax {
                pos: 0,
                msg: "expected `fn_k = <body>`".into(),
            })
        })?;
        let pat = parse_pattern(body.trim(), g).map_err(err)?;
        let id = g
            .register_abstraction(Abstraction {
                name: name.trim().to_string(),
                body: pat.body,
                hole_types: pat.hole_types,
                return_type: pat.return_type,
            })
            .map_err(err)?;
        ids.push(id);
    }
    Ok(ids)
}
