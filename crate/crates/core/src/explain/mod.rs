//! Per-decision explanations and accuracy tables over runs.
//!
//! An explanation is computed on the fully expanded program, so it never
//! refers to library functions, and lists only the cells read on the path
//! that produced the action.

mod report;

pub use report::{accuracy_report, diff_reports, AccuracyRow, AccuracyTable, DiffRow, DiffTable};

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{trace_evaluate, Comparison, Grammar, Program};
use crate::liblearn::expand_abstractions;
use crate::types::{Action, Cell, Direction, Observation, AGENT_CELL, VIEW_SIZE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("no runs to report")]
    EmptyReport,
    #[error("program returned {0} instead of an action")]
    NotAnAction(String),
}

/// A cell read by the program, with the object it was compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightedCell {
    pub x: u8,
    pub y: u8,
    pub compared: Option<Cell>,
    pub outcome: Option<bool>,
}

/// An `eq-direction?` test on the agent heading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub heading: Direction,
    pub compared: Direction,
    pub outcome: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub action: Action,
    pub cells: Vec<HighlightedCell>,
    pub direction_checks: Vec<DirectionCheck>,
    /// The expanded program text.
    pub program: String,
}

/// Explains the action `p` takes on `obs`.
///
/// Every executed `get` yields one highlighted cell, in execution order; it
/// is paired with the next not yet used object comparison on the same
/// coordinates, if any.
pub fn explain_decision(g: &Grammar, p: &Program, obs: &Observation) -> Result<Explanation, ExplainError> {
    let expanded = expand_abstractions(p, g);
    let trace = trace_evaluate(g, &expanded, obs);
    let action = trace
        .result
        .as_action()
        .ok_or_else(|| ExplainError::NotAnAction(trace.result.type_tag().to_string()))?;
    let mut used = vec![false; trace.comparisons.len()];
    let cells = trace
        .accessed_cells
        .iter()
        .map(|&(x, y)| {
            let hit = trace.comparisons.iter().enumerate().find(|(i, c)| {
                !used[*i] && matches!(c, Comparison::Object { x: cx, y: cy, .. } if (*cx, *cy) == (x, y))
            });
            match hit {
                Some((i, &Comparison::Object { against, outcome, .. })) => {
                    used[i] = true;
                    HighlightedCell {
                        x,
                        y,
                        compared: Some(against),
                        outcome: Some(outcome),
                    }
                }
                _ => HighlightedCell {
                    x,
                    y,
                    compared: None,
                    outcome: None,
                },
            }
        })
        .collect();
    let direction_checks = trace
        .comparisons
        .iter()
        .filter_map(|c| match *c {
            Comparison::Heading {
                heading,
                against,
                outcome,
            } => Some(DirectionCheck {
                heading,
                compared: against,
                outcome,
            }),
            Comparison::Object { .. } => None,
        })
        .collect();
    Ok(Explanation {
        action,
        cells,
        direction_checks,
        program: expanded.to_sexpr(g),
    })
}

fn glyph(c: Cell) -> char {
    match c {
        Cell::Wall => '#',
        Cell::Empty => '.',
        Cell::Goal => 'G',
    }
}

/// Draws the view with the farthest row on top and the agent row at the
/// bottom. Inspected cells are bracketed; the agent cell shows `A`.
pub fn render_ascii(expl: &Explanation, obs: &Observation) -> String {
    let mut out = String::new();
    for y in (0..VIEW_SIZE).rev() {
        let _ = write!(out, "{y} ");
        for x in 0..VIEW_SIZE {
            let inspected = expl.cells.iter().any(|c| (c.x as usize, c.y as usize) == (x, y));
            let ch = if (x as u8, y as u8) == AGENT_CELL {
                'A'
            } else {
                glyph(obs.get(x, y))
            };
            if inspected {
                let _ = write!(out, "[{ch}]");
            } else {
                let _ = write!(out, " {ch} ");
            }
        }
        out.push('\n');
    }
    out.push_str("   0  1  2  3  4\n");
    let _ = writeln!(out, "heading: {}", obs.heading.index());
    let _ = writeln!(out, "action: {}", expl.action);
    for c in &expl.cells {
        match (c.compared, c.outcome) {
            (Some(o), Some(r)) => {
                let _ = writeln!(out, "  ({}, {}) is {}? {}", c.x, c.y, o.rule_name(), r);
            }
            _ => {
                let _ = writeln!(out, "  ({}, {}) read", c.x, c.y);
            }
        }
    }
    for d in &expl.direction_checks {
        let _ = writeln!(out, "  heading {} is direction-{}? {}", d.heading.index(), d.compared.index(), d.outcome);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{evaluate, parse_program};
    use crate::liblearn::load_library;

    const LISTING: &str = "(if_action (eq-obj? (get $1 1 0) goal-obj) left-action forward-action)";

    fn empty() -> Observation {
        Observation::filled(Cell::Empty, Direction::North)
    }

    #[test]
    fn listing_program_highlights_the_goal_check() {
        let g = Grammar::base();
        let p = parse_program(LISTING, &g).unwrap();
        let obs = empty().with(1, 0, Cell::Goal);
        let e = explain_decision(&g, &p, &obs).unwrap();
        assert_eq!(e.action, Action::Left);
        assert_eq!(
            e.cells,
            vec![HighlightedCell {
                x: 1,
                y: 0,
                compared: Some(Cell::Goal),
                outcome: Some(true)
            }]
        );
        assert_eq!(e.program, LISTING);
    }

    #[test]
    fn constant_program_highlights_nothing() {
        let g = Grammar::base();
        let p = parse_program("forward-action", &g).unwrap();
        let e = explain_decision(&g, &p, &empty()).unwrap();
        assert!(e.cells.is_empty() && e.direction_checks.is_empty());
        let text = render_ascii(&e, &empty());
        assert!(!text.contains('['));
        assert_eq!(text, render_ascii(&e, &empty()));
    }

    #[test]
    fn library_program_is_explained_in_base_rules() {
        let mut g = Grammar::base();
        load_library(
            &mut g,
            "fn_0 = (eq-obj? (get #2 #1 #0) #3)\nfn_1 = (if_action #0 left-action forward-action)\nfn_2 = (fn_0 #2 #1 #0 (get-game-obj (get #0 2 1)))\nfn_3 = (eq-obj? (get #0 2 1) wall-obj)\n",
        )
        .unwrap();
        let p = parse_program("(fn_1 (fn_3 $1))", &g).unwrap();
        let obs = empty().with(2, 1, Cell::Wall);
        let e = explain_decision(&g, &p, &obs).unwrap();
        assert_eq!(e.action, Action::Left);
        assert_eq!(e.cells.len(), 1);
        assert_eq!((e.cells[0].x, e.cells[0].y), (2, 1));
        assert_eq!((e.cells[0].compared, e.cells[0].outcome), (Some(Cell::Wall), Some(true)));
        assert!(!e.program.contains("fn_"));
        let text = render_ascii(&e, &obs);
        assert!(text.contains("[#]"));
        assert!(text.lines().nth(3).unwrap().contains("[#]"));
    }

    #[test]
    fn direction_checks_are_reported() {
        let g = Grammar::base();
        let p = parse_program("(if_action (eq-direction? $0 direction-1) right-action left-action)", &g).unwrap();
        let obs = Observation::filled(Cell::Empty, Direction::East);
        let e = explain_decision(&g, &p, &obs).unwrap();
        assert_eq!(e.action, Action::Right);
        assert_eq!(e.action, evaluate(&g, &p, &obs).as_action().unwrap());
        assert_eq!(
            e.direction_checks,
            vec![DirectionCheck {
                heading: Direction::East,
                compared: Direction::East,
                outcome: true
            }]
        );
    }

    #[test]
    fn non_action_programs_are_rejected() {
        let g = Grammar::base();
        let p = parse_program("(eq-direction? $0 direction-1)", &g).unwrap();
        assert!(matches!(explain_decision(&g, &p, &empty()), Err(ExplainError::NotAnAction(_))));
    }
}
