//! Surface syntax for formulas.
//!
//! ```text
//! f   := (eq xI xJ) | (rank R xI) | (attr S xI) | (adj REL xI xJ)
//!      | (and f f) | (not f) | (exists N (xI xJ) f)
//! REL := B | C | up | down
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment that runs to the end
//! of the line. The printer emits the canonical single-line form, which the
//! parser reads back to the same tree.

use std::fmt::Write as _;

use crate::acc::NeighborhoodKind;
use crate::error::{Error, Result};

use super::ast::{Builder, Formula, FormulaNode, Node};

/// Parses a formula whose variable indices must not exceed `k`.
pub fn parse_formula(text: &str, k: usize) -> Result<Formula> {
    let mut builder = Builder::new();
    parse_formula_with(text, k, &mut builder)
}

/// Parses a formula, interning its nodes in `builder`.
pub fn parse_formula_with(text: &str, k: usize, builder: &mut Builder) -> Result<Formula> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        k,
        builder,
    };
    let f = parser.formula()?;
    if let Some(tok) = parser.tokens.get(parser.pos) {
        return Err(tok.error("unexpected text after the formula"));
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Open,
    Close,
    Word(String),
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    line: usize,
    column: usize,
}

impl Token {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut c = 0;
        while c < chars.len() {
            let ch = chars[c];
            let (line_no, col_no) = (li + 1, c + 1);
            if ch.is_whitespace() {
                c += 1;
            } else if ch == '(' || ch == ')' {
                tokens.push(Token {
                    kind: if ch == '(' { TokenKind::Open } else { TokenKind::Close },
                    line: line_no,
                    column: col_no,
                });
                c += 1;
            } else {
                let start = c;
                while c < chars.len() && !chars[c].is_whitespace() && chars[c] != '(' && chars[c] != ')' {
                    c += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Word(chars[start..c].iter().collect()),
                    line: line_no,
                    column: col_no,
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'b> {
    tokens: Vec<Token>,
    pos: usize,
    k: usize,
    builder: &'b mut Builder,
}

impl Parser<'_> {
    fn end_error(&self) -> Error {
        let (line, column) = self.tokens.last().map(|t| (t.line, t.column + 1)).unwrap_or((1, 1));
        Error::Syntax {
            line,
            column,
            message: "unexpected end of input".into(),
        }
    }

    fn next(&mut self) -> Result<Token> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| self.end_error())?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect_open(&mut self) -> Result<Token> {
        let tok = self.next()?;
        if tok.kind != TokenKind::Open {
            return Err(tok.error("expected '('"));
        }
        Ok(tok)
    }

    fn expect_close(&mut self) -> Result<()> {
        let tok = self.next()?;
        if tok.kind != TokenKind::Close {
            return Err(tok.error("expected ')'"));
        }
        Ok(())
    }

    fn word(&mut self, what: &str) -> Result<(String, Token)> {
        let tok = self.next()?;
        match &tok.kind {
            TokenKind::Word(w) => Ok((w.clone(), tok)),
            _ => Err(tok.error(format!("expected {what}"))),
        }
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<(T, Token)> {
        let (w, tok) = self.word(what)?;
        let value = w
            .parse()
            .map_err(|_| tok.error(format!("expected {what}, found {w:?}")))?;
        Ok((value, tok))
    }

    fn variable(&mut self) -> Result<usize> {
        let (w, tok) = self.word("a variable such as x1")?;
        let index: usize = w
            .strip_prefix('x')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| tok.error(format!("expected a variable such as x1, found {w:?}")))?;
        if index == 0 || index > self.k {
            return Err(tok.error(format!("variable x{index} outside x1..x{}", self.k)));
        }
        Ok(index)
    }

    fn formula(&mut self) -> Result<Formula> {
        let open = self.expect_open()?;
        let (head, head_tok) = self.word("a connective")?;
        let at = |e: Error| match e {
            Error::InvalidArgument(m) => open.error(m),
            other => other,
        };
        let f = match head.as_str() {
            "eq" => {
                let (i, j) = (self.variable()?, self.variable()?);
                self.builder.eq(i, j).map_err(at)?
            }
            "rank" => {
                let (r, _) = self.number::<u32>("a rank")?;
                let i = self.variable()?;
                self.builder.rank(r, i).map_err(at)?
            }
            "attr" => {
                let (s, tok) = self.number::<usize>("an attribute bit")?;
                if s == 0 {
                    return Err(tok.error("attribute bits are numbered from 1"));
                }
                let i = self.variable()?;
                self.builder.attr(s, i).map_err(at)?
            }
            "adj" => {
                let (rel, tok) = self.word("a neighborhood (B, C, up or down)")?;
                let kind = NeighborhoodKind::from_short_name(&rel)
                    .ok_or_else(|| tok.error(format!("unknown neighborhood {rel:?}; use B, C, up or down")))?;
                let (i, j) = (self.variable()?, self.variable()?);
                self.builder.adj(kind, i, j).map_err(at)?
            }
            "and" => {
                let a = self.formula()?;
                let b = self.formula()?;
                self.builder.and(a, b)
            }
            "not" => {
                let a = self.formula()?;
                self.builder.not(a)
            }
            "exists" => {
                let (n, _) = self.number::<u64>("a count")?;
                let pair = self.expect_open()?;
                let (i, j) = (self.variable()?, self.variable()?);
                self.expect_close()?;
                if i == j {
                    return Err(pair.error(format!(
                        "a counting quantifier needs two distinct variables, got x{i} twice"
                    )));
                }
                let body = self.formula()?;
                self.builder.exists(n, i, j, body).map_err(at)?
            }
            other => return Err(head_tok.error(format!("unknown connective {other:?}"))),
        };
        self.expect_close()?;
        Ok(f)
    }
}

/// Canonical text of a formula.
pub fn print_formula(f: &Formula) -> String {
    print_formula_node(f)
}

pub(crate) fn print_formula_node(f: &FormulaNode) -> String {
    let mut out = String::new();
    write_node(f, &mut out);
    out
}

fn write_node(f: &FormulaNode, out: &mut String) {
    match f.node() {
        Node::Eq(i, j) => {
            let _ = write!(out, "(eq x{i} x{j})");
        }
        Node::Rank(r, i) => {
            let _ = write!(out, "(rank {r} x{i})");
        }
        Node::Attr(s, i) => {
            let _ = write!(out, "(attr {s} x{i})");
        }
        Node::Adj(kind, i, j) => {
            let _ = write!(out, "(adj {} x{i} x{j})", kind.short_name());
        }
        Node::And(a, b) => {
            out.push_str("(and ");
            write_node(a, out);
            out.push(' ');
            write_node(b, out);
            out.push(')');
        }
        Node::Not(a) => {
            out.push_str("(not ");
            write_node(a, out);
            out.push(')');
        }
        Node::Exists { n, i, j, body } => {
            let _ = write!(out, "(exists {n} (x{i} x{j}) ");
            write_node(body, out);
            out.push(')');
        }
    }
}

/// Indented multi-line rendering for human reading; parses back to the same tree.
pub fn pretty_formula(f: &Formula) -> String {
    let mut out = String::new();
    pretty(f, 0, &mut out);
    out
}

fn pretty(f: &FormulaNode, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match f.node() {
        Node::And(a, b) => {
            let _ = writeln!(out, "{pad}(and");
            pretty(a, indent + 1, out);
            out.push('\n');
            pretty(b, indent + 1, out);
            out.push(')');
        }
        Node::Not(a) => {
            let _ = writeln!(out, "{pad}(not");
            pretty(a, indent + 1, out);
            out.push(')');
        }
        Node::Exists { n, i, j, body } => {
            let _ = writeln!(out, "{pad}(exists {n} (x{i} x{j})");
            pretty(body, indent + 1, out);
            out.push(')');
        }
        _ => {
            out.push_str(&pad);
            write_node(f, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms() {
        let f = parse_formula("(eq x1 x2)", 2).unwrap();
        assert_eq!(f.node(), &Node::Eq(1, 2));
        assert_eq!(f.free_vars(), vec![1, 2]);
        assert_eq!(f.quantifier_depth(), 0);
    }

    #[test]
    fn round_trips_canonical_text() {
        let text = "(exists 16 (x1 x2) (and (adj down x1 x2) (exists 1 (x3 x4) (not (eq x1 x3)))))";
        let f = parse_formula(text, 4).unwrap();
        assert_eq!(print_formula(&f), text);
        assert_eq!(f.quantifier_depth(), 2);
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn pretty_text_parses_back() {
        let text = "(and (rank 1 x1) (not (exists 2 (x2 x1) (adj B x1 x2))))";
        let f = parse_formula(text, 2).unwrap();
        let g = parse_formula(&pretty_formula(&f), 2).unwrap();
        assert_eq!(print_formula(&g), text);
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let f = parse_formula("# a comment\n(adj   up\n x1 x2) # trailing", 2).unwrap();
        assert_eq!(print_formula(&f), "(adj up x1 x2)");
    }

    #[test]
    fn rejects_repeated_quantified_variable() {
        let err = parse_formula("(exists 1 (x1 x1) (eq x1 x2))", 2).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Syntax {
                    line: 1,
                    column: 11,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn rejects_variables_beyond_arity() {
        assert!(matches!(parse_formula("(eq x1 x3)", 2), Err(Error::Syntax { .. })));
    }

    #[test]
    fn reports_positions() {
        match parse_formula("(and (eq x1 x2)\n  (foo x1))", 2) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_formula("(not (eq x1 x2)", 2), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_formula("(eq x1 x2) extra", 2),
            Err(Error::Syntax { .. })
        ));
    }
}
