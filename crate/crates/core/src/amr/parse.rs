//! PENMAN text parsing.
//!
//! One block is a sequence of optional `# ::key value` metadata lines
//! followed by a single parenthesized expression. Unquoted leaf tokens are
//! resolved against the set of defined variables, so backward and forward
//! reentrant references both work; tokens that are not variables become
//! constant (literal) leaves.

use std::collections::HashMap;

use thiserror::Error;

use super::{AmrGraph, Concept, ConceptKind, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced brackets at {line}:{col}")]
    UnbalancedBrackets { line: usize, col: usize },
    #[error("duplicate definition of variable `{var}` at {line}:{col}")]
    DuplicateVariableDefinition { var: String, line: usize, col: usize },
    #[error("reference to undefined variable `{var}` at {line}:{col}")]
    UndefinedVariableReference { var: String, line: usize, col: usize },
    #[error("graph contains a directed cycle (reentrancy into an ancestor) near {line}:{col}")]
    CyclicGraph { line: usize, col: usize },
    #[error("unterminated string literal at {line}:{col}")]
    UnterminatedString { line: usize, col: usize },
    #[error("{msg} at {line}:{col}")]
    Syntax { msg: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Slash,
    Role(String),
    Str(String),
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            '(' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Token { tok: Tok::LParen, line: tl, col: tc });
            }
            ')' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Token { tok: Tok::RParen, line: tl, col: tc });
            }
            '/' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Token { tok: Tok::Slash, line: tl, col: tc });
            }
            '"' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let mut s = String::new();
                let mut closed = false;
                while let Some(&d) = chars.peek() {
                    chars.next();
                    bump(d, &mut line, &mut col);
                    match d {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            // Only embedded quotes are escaped.
                            if let Some(&'"') = chars.peek() {
                                chars.next();
                                bump('"', &mut line, &mut col);
                                s.push('"');
                            } else {
                                s.push('\\');
                            }
                        }
                        _ => s.push(d),
                    }
                }
                if !closed {
                    return Err(ParseError::UnterminatedString { line: tl, col: tc });
                }
                out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            }
            ':' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || matches!(d, '(' | ')' | '"') {
                        break;
                    }
                    chars.next();
                    bump(d, &mut line, &mut col);
                    s.push(d);
                }
                if s.is_empty() {
                    return Err(ParseError::Syntax {
                        msg: "empty relation label after ':'".into(),
                        line: tl,
                        col: tc,
                    });
                }
                out.push(Token { tok: Tok::Role(s), line: tl, col: tc });
            }
            _ => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || matches!(d, '(' | ')' | '"' | '/') {
                        break;
                    }
                    chars.next();
                    bump(d, &mut line, &mut col);
                    s.push(d);
                }
                out.push(Token { tok: Tok::Atom(s), line: tl, col: tc });
            }
        }
    }
    Ok(out)
}

/// Tokens that denote constants rather than variable references: numbers,
/// polarity/mode markers, and the interrogative marker.
fn is_constant_token(tok: &str) -> bool {
    if matches!(tok, "-" | "+" | "?") {
        return true;
    }
    let t = tok.strip_prefix(['+', '-']).unwrap_or(tok);
    !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || c == '.') && t != "."
}

/// Conventional AMR variable shape: one or two lowercase letters followed
/// by an optional numeric suffix ("b", "go", "s2", "d11").
fn looks_like_variable(tok: &str) -> bool {
    let letters: String = tok.chars().take_while(|c| c.is_ascii_lowercase()).collect();
    if letters.is_empty() || letters.len() > 2 {
        return false;
    }
    tok[letters.len()..].chars().all(|c| c.is_ascii_digit())
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

enum Leaf {
    Var { name: String, line: usize, col: usize },
    Const(String),
}

enum Target {
    Node(NodeId),
    Pending(Leaf),
}

struct RawEdge {
    source: NodeId,
    label: String,
    target: Target,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_pos(&self) -> (usize, usize) {
        self.tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    /// Parse `( var / label relation* )`, appending nodes in text order.
    fn parse_node(
        &mut self,
        nodes: &mut Vec<Concept>,
        edges: &mut Vec<RawEdge>,
        vars: &mut HashMap<String, NodeId>,
    ) -> Result<NodeId, ParseError> {
        let open = match self.next() {
            Some(t @ Token { tok: Tok::LParen, .. }) => t,
            Some(t) => {
                return Err(ParseError::Syntax {
                    msg: "expected '('".into(),
                    line: t.line,
                    col: t.col,
                })
            }
            None => {
                let (line, col) = self.last_pos();
                return Err(ParseError::UnbalancedBrackets { line, col });
            }
        };
        let var = match self.next() {
            Some(Token { tok: Tok::Atom(v), line, col }) => {
                if vars.contains_key(&v) {
                    return Err(ParseError::DuplicateVariableDefinition { var: v, line, col });
                }
                v
            }
            Some(t) => {
                return Err(ParseError::Syntax {
                    msg: "expected variable after '('".into(),
                    line: t.line,
                    col: t.col,
                })
            }
            None => {
                return Err(ParseError::UnbalancedBrackets {
                    line: open.line,
                    col: open.col,
                })
            }
        };
        match self.next() {
            Some(Token { tok: Tok::Slash, .. }) => {}
            Some(t) => {
                return Err(ParseError::Syntax {
                    msg: "expected '/' after variable".into(),
                    line: t.line,
                    col: t.col,
                })
            }
            None => {
                return Err(ParseError::UnbalancedBrackets {
                    line: open.line,
                    col: open.col,
                })
            }
        }
        let label = match self.next() {
            Some(Token { tok: Tok::Atom(l), .. }) => l,
            Some(t) => {
                return Err(ParseError::Syntax {
                    msg: "expected concept label after '/'".into(),
                    line: t.line,
                    col: t.col,
                })
            }
            None => {
                return Err(ParseError::UnbalancedBrackets {
                    line: open.line,
                    col: open.col,
                })
            }
        };
        let id = nodes.len();
        nodes.push(Concept {
            variable: Some(var.clone()),
            label: label.clone(),
            kind: ConceptKind::classify(&label),
        });
        vars.insert(var, id);

        loop {
            match self.peek() {
                Some(Token { tok: Tok::RParen, .. }) => {
                    self.next();
                    return Ok(id);
                }
                Some(Token { tok: Tok::Role(_), .. }) => {
                    let role = match self.next() {
                        Some(Token { tok: Tok::Role(r), .. }) => r,
                        _ => unreachable!(),
                    };
                    match self.peek() {
                        Some(Token { tok: Tok::LParen, .. }) => {
                            // Reserve the slot first so edges keep text order
                            // even though the child subtree parses eagerly.
                            let slot = edges.len();
                            edges.push(RawEdge {
                                source: id,
                                label: role,
                                target: Target::Node(usize::MAX),
                            });
                            let child = self.parse_node(nodes, edges, vars)?;
                            edges[slot].target = Target::Node(child);
                        }
                        Some(Token { tok: Tok::Str(_), .. }) => {
                            let s = match self.next() {
                                Some(Token { tok: Tok::Str(s), .. }) => s,
                                _ => unreachable!(),
                            };
                            edges.push(RawEdge {
                                source: id,
                                label: role,
                                target: Target::Pending(Leaf::Const(s)),
                            });
                        }
                        Some(Token { tok: Tok::Atom(_), .. }) => {
                            let (a, line, col) = match self.next() {
                                Some(Token { tok: Tok::Atom(a), line, col }) => (a, line, col),
                                _ => unreachable!(),
                            };
                            let leaf = if is_constant_token(&a) {
                                Leaf::Const(a)
                            } else {
                                Leaf::Var { name: a, line, col }
                            };
                            edges.push(RawEdge {
                                source: id,
                                label: role,
                                target: Target::Pending(leaf),
                            });
                        }
                        Some(t) => {
                            return Err(ParseError::Syntax {
                                msg: format!("expected relation target after ':{role}'"),
                                line: t.line,
                                col: t.col,
                            })
                        }
                        None => {
                            let (line, col) = self.last_pos();
                            return Err(ParseError::UnbalancedBrackets { line, col });
                        }
                    }
                }
                Some(t) => {
                    return Err(ParseError::Syntax {
                        msg: "expected relation or ')'".into(),
                        line: t.line,
                        col: t.col,
                    })
                }
                None => {
                    return Err(ParseError::UnbalancedBrackets {
                        line: open.line,
                        col: open.col,
                    })
                }
            }
        }
    }
}

/// Split leading `# ::key value` lines from the expression body.
fn split_metadata(text: &str) -> (Vec<(String, String)>, String) {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with('#') {
            if let Some(rest) = trimmed.trim_start_matches('#').trim_start().strip_prefix("::") {
                let mut parts = rest.splitn(2, char::is_whitespace);
                let key = parts.next().unwrap_or("").to_string();
                let value = parts.next().unwrap_or("").trim().to_string();
                if !key.is_empty() {
                    meta.push((key, value));
                }
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    (meta, body)
}

/// Parse one PENMAN block into an [`AmrGraph`].
pub fn parse_penman(text: &str) -> Result<AmrGraph, ParseError> {
    let (metadata, body) = split_metadata(text);
    if body.trim().is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let tokens = tokenize(&body)?;
    if tokens.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut parser = Parser { tokens, pos: 0 };
    let mut nodes = Vec::new();
    let mut raw_edges = Vec::new();
    let mut vars: HashMap<String, NodeId> = HashMap::new();
    let root = parser.parse_node(&mut nodes, &mut raw_edges, &mut vars)?;
    if let Some(t) = parser.peek() {
        if t.tok == Tok::RParen {
            return Err(ParseError::UnbalancedBrackets { line: t.line, col: t.col });
        }
        return Err(ParseError::Syntax {
            msg: "trailing input after expression".into(),
            line: t.line,
            col: t.col,
        });
    }

    // Resolve pending leaves: variable references to defined nodes,
    // everything else to fresh literal nodes.
    let mut graph = AmrGraph::from_parts(nodes, Vec::new(), root);
    graph.metadata = metadata;
    let mut cycle_hint = (1, 1);
    for raw in raw_edges {
        let target = match raw.target {
            Target::Node(id) => id,
            Target::Pending(Leaf::Const(s)) => graph.add_node(Concept::literal(&s)),
            Target::Pending(Leaf::Var { name, line, col }) => match vars.get(&name) {
                Some(&id) => {
                    cycle_hint = (line, col);
                    id
                }
                None => {
                    if looks_like_variable(&name) {
                        return Err(ParseError::UndefinedVariableReference {
                            var: name,
                            line,
                            col,
                        });
                    }
                    // Bare-word constant such as `:mode imperative`.
                    graph.add_node(Concept::literal(&name))
                }
            },
        };
        graph.edges.push(super::Relation {
            source: raw.source,
            label: raw.label,
            target,
        });
    }
    if let Err(super::GraphError::Cyclic(_)) = graph.validate() {
        return Err(ParseError::CyclicGraph {
            line: cycle_hint.0,
            col: cycle_hint.1,
        });
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::ConceptKind;

    #[test]
    fn minimal_expression() {
        let g = parse_penman("(c / country :name (n / name :op1 \"Japan\"))").unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.root, 0);
        assert_eq!(g.nodes[0].label, "country");
        assert_eq!(g.nodes[1].label, "name");
        assert_eq!(g.nodes[2].label, "Japan");
        assert_eq!(g.nodes[2].kind, ConceptKind::Literal);
        assert_eq!(g.edges[0].label, "name");
        assert_eq!(g.edges[1].label, "op1");
    }

    #[test]
    fn canonical_reentrancy() {
        let g = parse_penman("(a / and :op1 (b / boy) :op2 b)").unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.in_degree(1), 2);
    }

    #[test]
    fn unbalanced_brackets() {
        let err = parse_penman("(a / a :op1 (b / b)").unwrap_err();
        assert!(matches!(err, ParseError::UnbalancedBrackets { .. }));
        let err = parse_penman("(a / a))").unwrap_err();
        assert!(matches!(err, ParseError::UnbalancedBrackets { .. }));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_penman("").unwrap_err(), ParseError::EmptyInput);
        assert_eq!(parse_penman("  \n \t").unwrap_err(), ParseError::EmptyInput);
        // metadata only, no expression
        assert_eq!(
            parse_penman("# ::id abc\n").unwrap_err(),
            ParseError::EmptyInput
        );
    }

    #[test]
    fn duplicate_variable() {
        let err = parse_penman("(a / x :op1 (a / y))").unwrap_err();
        assert!(matches!(
            err,
            ParseError::DuplicateVariableDefinition { ref var, .. } if var == "a"
        ));
    }

    #[test]
    fn undefined_variable_reference() {
        let err = parse_penman("(a / and :op1 (b / boy) :op2 c)").unwrap_err();
        assert!(matches!(
            err,
            ParseError::UndefinedVariableReference { ref var, line: 1, .. } if var == "c"
        ));
    }

    #[test]
    fn forward_reference_resolves() {
        let g = parse_penman("(a / x :op1 b :op2 (b / y))").unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.in_degree(1), 2);
    }

    #[test]
    fn constants_become_literals() {
        let g = parse_penman("(d / date-entity :year 2002 :month 1 :day 5)").unwrap();
        assert_eq!(g.nodes.len(), 4);
        for id in 1..4 {
            assert_eq!(g.nodes[id].kind, ConceptKind::Literal);
        }
        assert_eq!(g.nodes[1].label, "2002");
        let g = parse_penman("(p / possible-01 :polarity -)").unwrap();
        assert_eq!(g.nodes[1].label, "-");
        let g = parse_penman("(s / say-01 :mode imperative)").unwrap();
        assert_eq!(g.nodes[1].label, "imperative");
        assert_eq!(g.nodes[1].kind, ConceptKind::Literal);
    }

    #[test]
    fn metadata_captured() {
        let g = parse_penman("# ::id doc.1\n# ::snt The boy ran.\n(r / run-01)").unwrap();
        assert_eq!(g.metadata.len(), 2);
        assert_eq!(g.sentence(), Some("The boy ran."));
    }

    #[test]
    fn cycle_rejected() {
        let err = parse_penman("(a / x :op1 (b / y :op2 a))").unwrap_err();
        assert!(matches!(err, ParseError::CyclicGraph { .. }));
    }

    #[test]
    fn escaped_quote_in_literal() {
        let g = parse_penman(r#"(x / thing :name (n / name :op1 "a \"b\" c"))"#).unwrap();
        assert_eq!(g.nodes[2].label, "a \"b\" c");
    }
}
