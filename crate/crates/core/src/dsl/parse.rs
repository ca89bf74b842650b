use super::grammar::Grammar;
use super::program::{Head, Node, Program};
use super::value::TypeTag;
use super::DslError;

enum Sexp {
    Atom(String),
    List(Vec<Sexp>, usize),
}

fn read(text: &str) -> Result<Sexp, DslError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' | ')' => {
                tokens.push((i, c.to_string()));
                chars.next();
            }
            ';' => {
                while chars.next_if(|&(_, c)| c != '\n').is_some() {}
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut atom = String::new();
                while let Some((_, c)) =
                    chars.next_if(|&(_, c)| !c.is_whitespace() && c != '(' && c != ')' && c != ';')
                {
                    atom.push(c);
                }
                tokens.push((i, atom));
            }
        }
    }
    let mut pos = 0;
    let expr = read_expr(&tokens, &mut pos, text.len())?;
    if let Some((at, tok)) = tokens.get(pos) {
        return Err(DslError::Syntax {
            pos: *at,
            msg: format!("unexpected `{tok}` after the expression"),
        });
    }
    Ok(expr)
}

fn read_expr(tokens: &[(usize, String)], pos: &mut usize, end: usize) -> Result<Sexp, DslError> {
    let Some((at, tok)) = tokens.get(*pos) else {
        return Err(DslError::Syntax {
            pos: end,
            msg: "unexpected end of input".into(),
        });
    };
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((_, t)) if t == ")" => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => items.push(read_expr(tokens, pos, end)?),
                    None => {
                        return Err(DslError::Syntax {
                            pos: end,
                            msg: "unclosed `(`".into(),
                        })
                    }
                }
            }
            Ok(Sexp::List(items, *at))
        }
        ")" => Err(DslError::Syntax {
            pos: *at,
            msg: "unexpected `)`".into(),
        }),
        _ => Ok(Sexp::Atom(tok.clone())),
    }
}

fn resolve_head(g: &Grammar, name: &str, allow_holes: bool) -> Result<Head, DslError> {
    if let Some(k) = name.strip_prefix('#') {
        if allow_holes {
            if let Ok(k) = k.parse::<u8>() {
                return Ok(Head::Hole(k));
            }
        }
        return Err(DslError::UnknownSymbol(name.to_string()));
    }
    g.lookup(name)
        .map(Head::Rule)
        .ok_or_else(|| DslError::UnknownSymbol(name.to_string()))
}

/// Builds the node tree; returns the synthesized type (unknown for holes).
fn build(
    g: &Grammar,
    e: &Sexp,
    path: &mut Vec<usize>,
    holes: &mut Option<Vec<Option<TypeTag>>>,
) -> Result<(Node, Option<TypeTag>), DslError> {
    let (head, args) = match e {
        Sexp::Atom(name) => (resolve_head(g, name, holes.is_some())?, &[][..]),
        Sexp::List(items, pos) => match items.split_first() {
            Some((Sexp::Atom(name), rest)) => (resolve_head(g, name, holes.is_some())?, rest),
            Some((Sexp::List(..), _)) => {
                return Err(DslError::Syntax {
                    pos: *pos,
                    msg: "the head of an application must be a symbol".into(),
                })
            }
            None => {
                return Err(DslError::Syntax {
                    pos: *pos,
                    msg: "empty application".into(),
                })
            }
        },
    };
    let rule = match head {
        Head::Hole(k) => {
            if !args.is_empty() || matches!(e, Sexp::List(..)) {
                return Err(DslError::Arity {
                    rule: format!("#{k}"),
                    expected: 0,
                    found: args.len(),
                    path: path.clone(),
                });
            }
            return Ok((Node::hole(k), None));
        }
        Head::Rule(r) => g.rule(r),
    };
    let applied = matches!(e, Sexp::List(..));
    if args.len() != rule.arity() || (applied && rule.arity() == 0) {
        return Err(DslError::Arity {
            rule: rule.name.clone(),
            expected: rule.arity(),
            found: args.len(),
            path: path.clone(),
        });
    }
    let mut children = Vec::with_capacity(args.len());
    let mut types = Vec::with_capacity(args.len());
    for (i, a) in args.iter().enumerate() {
        path.push(i);
        let (n, t) = build(g, a, path, holes)?;
        path.pop();
        children.push(n);
        types.push(t);
    }
    // eq-obj? also accepts (object, mapObject) and is normalized to the
    // declared (mapObject, object) order.
    if rule.name == "eq-obj?" && types == [Some(TypeTag::Object), Some(TypeTag::MapObject)] {
        children.swap(0, 1);
        types.swap(0, 1);
    }
    for (i, (t, &expected)) in types.iter().zip(&rule.param_types).enumerate() {
        path.push(i);
        match t {
            Some(found) if *found != expected => {
                return Err(DslError::TypeMismatch {
                    path: path.clone(),
                    expected,
                    found: *found,
                })
            }
            Some(_) => {}
            None => {
                let Head::Hole(k) = children[i].head else {
                    unreachable!("only holes have unknown types")
                };
                let slots = holes.as_mut().expect("holes only parse in pattern mode");
                let k = k as usize;
                if slots.len() <= k {
                    slots.resize(k + 1, None);
                }
                match slots[k] {
                    Some(prev) if prev != expected => {
                        return Err(DslError::TypeMismatch {
                            path: path.clone(),
                            expected: prev,
                            found: expected,
                        })
                    }
                    _ => slots[k] = Some(expected),
                }
            }
        }
        path.pop();
    }
    let rule_return = rule.return_type;
    Ok((
        Node {
            head,
            children,
        },
        Some(rule_return),
    ))
}

/// Parses a closed program such as
/// `(if_action (eq-obj? (get $1 1 0) goal-obj) left-action forward-action)`.
pub fn parse_program(text: &str, grammar: &Grammar) -> Result<Program, DslError> {
    let sexp = read(text)?;
    let (root, _) = build(grammar, &sexp, &mut Vec::new(), &mut None)?;
    Ok(Program::new(root))
}

/// An abstraction body parsed from text, with hole types inferred from context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub body: Node,
    pub hole_types: Vec<TypeTag>,
    pub return_type: TypeTag,
}

/// Parses a body with `#k` holes, e.g. `(if_action #0 left-action forward-action)`.
pub fn parse_pattern(text: &str, grammar: &Grammar) -> Result<Pattern, DslError> {
    let sexp = read(text)?;
    let mut holes = Some(Vec::new());
    let (body, ret) = build(grammar, &sexp, &mut Vec::new(), &mut holes)?;
    let Some(return_type) = ret else {
        return Err(DslError::Syntax {
            pos: 0,
            msg: "a pattern cannot be a bare hole".into(),
        });
    };
    let hole_types = holes
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(k, t)| t.ok_or_else(|| DslError::UnknownSymbol(format!("#{k}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pattern {
        body,
        hole_types,
        return_type,
    })
}

/// One program per non-blank line; `;` starts a comment. Errors carry the
/// 1-based line number.
pub fn parse_program_file(text: &str, grammar: &Grammar) -> Result<Vec<Program>, (usize, DslError)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let code = line.split(';').next().unwrap_or("").trim();
            (!code.is_empty()).then(|| parse_program(code, grammar).map_err(|e| (i + 1, e)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "(if_action (eq-obj? (get $1 1 0) goal-obj) left-action forward-action)";

    #[test]
    fn parses_listing_program() {
        let g = Grammar::base();
        let p = parse_program(LISTING, &g).unwrap();
        // if_action eq-obj? get $1 1 0 goal-obj left-action forward-action
        assert_eq!(p.size(), 9);
        assert_eq!(p.to_sexpr(&g), LISTING);
    }

    #[test]
    fn flipped_eq_obj_is_normalized() {
        let g = Grammar::base();
        let p = parse_program(
            "(if_action (eq-obj? goal-obj (get $1 1 0))\n  left-action forward-action)",
            &g,
        )
        .unwrap();
        assert_eq!(p.to_sexpr(&g), LISTING);
    }

    #[test]
    fn terminal_program() {
        let g = Grammar::base();
        let p = parse_program("  left-action ; trailing comment", &g).unwrap();
        assert_eq!(p.size(), 1);
        assert_eq!(p.to_sexpr(&g), "left-action");
    }

    #[test]
    fn errors() {
        let g = Grammar::base();
        assert!(matches!(
            parse_program("(and (not (eq-direction? $0 direction-1)))", &g),
            Err(DslError::Arity { expected: 2, found: 1, .. })
        ));
        assert_eq!(
            parse_program("(jump-action)", &g),
            Err(DslError::UnknownSymbol("jump-action".into()))
        );
        assert!(matches!(
            parse_program("(eq-direction? $1 direction-0)", &g),
            Err(DslError::TypeMismatch {
                expected: TypeTag::AgentDirection,
                found: TypeTag::Map,
                ..
            })
        ));
        assert!(matches!(parse_program("(left-action)", &g), Err(DslError::Arity { .. })));
        assert!(matches!(parse_program("(not", &g), Err(DslError::Syntax { .. })));
        assert!(matches!(parse_program("left-action right-action", &g), Err(DslError::Syntax { .. })));
        assert!(matches!(parse_program("", &g), Err(DslError::Syntax { .. })));
        assert_eq!(
            parse_program("(if_action #0 left-action forward-action)", &g),
            Err(DslError::UnknownSymbol("#0".into()))
        );
    }

    #[test]
    fn patterns_infer_hole_types() {
        let g = Grammar::base();
        let p = parse_pattern("(eq-obj? (get #2 #1 #0) #3)", &g).unwrap();
        assert_eq!(
            p.hole_types,
            vec![TypeTag::Int, TypeTag::Int, TypeTag::Map, TypeTag::Object]
        );
        assert_eq!(p.return_type, TypeTag::Bool);
        assert_eq!(p.body.concrete_size(), 2);
        assert!(parse_pattern("#0", &g).is_err());
        // #1 never occurs, so its type is unknown
        assert!(parse_pattern("(not #0 )", &g).is_ok());
        assert!(parse_pattern("(and #0 #2)", &g).is_err());
        assert!(matches!(
            parse_pattern("(if_int #0 #0 1)", &g),
            Err(DslError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn program_file_skips_comments() {
        let g = Grammar::base();
        let text = "; best programs\nleft-action\n\n(if_action (not (eq-direction? $0 direction-2)) right-action left-action) ; len 4\n";
        let ps = parse_program_file(text, &g).unwrap();
        assert_eq!(ps.len(), 2);
        let err = parse_program_file("left-action\n(bogus)\n", &g).unwrap_err();
        assert_eq!(err.0, 2);
    }
}
