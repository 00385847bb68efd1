//! Line-oriented problem files.
//!
//! ```text
//! version: 1
//! frame: x1 x2
//! source:
//!   0.6 {x1}
//!   0.4 *
//! ```
//!
//! Logic problems declare `atoms:` instead of `frame:` and write each
//! outcome's term as `[p !q]`. A `#` starts a comment.

use std::fmt::Write as _;

use dsmc_core::logic::{ClauseQuery, Literal, LogicProblem, LogicSource, TermSet};
use dsmc_core::{validate_problem, EvidenceProblem, FocalSet, Frame, Outcome, SourceModel};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemText {
    Set(EvidenceProblem),
    Logic(LogicProblem),
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

// Splits on whitespace and commas; brackets and braces stand alone.
fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let column_of = |byte: usize| line[..byte].chars().count() + 1;
    let mut pending = Vec::new();
    for (i, c) in line.char_indices() {
        let lone = matches!(c, '{' | '}' | '[' | ']' | '(' | ')' | '|');
        if c.is_whitespace() || c == ',' || lone {
            if let Some(s) = start.take() {
                pending.push((s, i));
            }
            if lone {
                pending.push((i, i + c.len_utf8()));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        pending.push((s, line.len()));
    }
    for (s, e) in pending {
        out.push(Token {
            text: &line[s..e],
            column: column_of(s),
        });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(kept, _)| kept)
}

enum Header {
    Frame(Frame),
    Atoms(Vec<String>),
}

/// Parses and validates either kind of problem.
pub fn parse_problem(text: &str) -> Result<ProblemText, FormatError> {
    let mut header: Option<Header> = None;
    let mut set_sources: Vec<Vec<Outcome>> = Vec::new();
    let mut logic_sources: Vec<LogicSource> = Vec::new();
    let mut seen_content = false;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let body = strip_comment(raw);
        let toks = tokens(body);
        let Some(first) = toks.first().copied() else {
            continue;
        };
        if let Some(rest) = keyword(first.text, "version:") {
            if seen_content {
                return Err(syntax(line_no, first.column, "version must come first"));
            }
            seen_content = true;
            let (value, used) = if rest.is_empty() {
                (toks.get(1).map(|t| t.text), 2)
            } else {
                (Some(rest), 1)
            };
            match value {
                Some(v) if v.parse::<u32>() == Ok(FORMAT_VERSION) => {}
                Some(v) => return Err(syntax(line_no, first.column, format!("unsupported format version '{v}'"))),
                None => return Err(syntax(line_no, first.column, "missing version number")),
            }
            if let Some(extra) = toks.get(used) {
                return Err(syntax(line_no, extra.column, "unexpected text after version"));
            }
            continue;
        }
        seen_content = true;
        if let Some(rest) = keyword(first.text, "frame:").or_else(|| keyword(first.text, "atoms:")) {
            if header.is_some() {
                return Err(syntax(line_no, first.column, "duplicate header"));
            }
            let mut names: Vec<String> = Vec::new();
            if !rest.is_empty() {
                names.push(rest.to_string());
            }
            for t in &toks[1..] {
                if is_punct(t.text) {
                    return Err(syntax(line_no, t.column, format!("unexpected '{}' in header", t.text)));
                }
                if names.iter().any(|n| n == t.text) {
                    return Err(syntax(line_no, t.column, format!("duplicate name '{}'", t.text)));
                }
                names.push(t.text.to_string());
            }
            if names.is_empty() {
                return Err(syntax(line_no, first.column, "header declares no names"));
            }
            header = Some(if first.text.starts_with("frame:") {
                Header::Frame(Frame::new(names).map_err(|e| syntax(line_no, first.column, e.to_string()))?)
            } else {
                Header::Atoms(names)
            });
            continue;
        }
        let Some(h) = &header else {
            return Err(syntax(line_no, first.column, "expected 'frame:' or 'atoms:' header"));
        };
        if let Some(rest) = keyword(first.text, "source:") {
            if !rest.is_empty() {
                return Err(syntax(line_no, first.column + 7, "unexpected text after 'source:'"));
            }
            if let Some(extra) = toks.get(1) {
                return Err(syntax(line_no, extra.column, "outcomes go on their own lines"));
            }
            match h {
                Header::Frame(_) => set_sources.push(Vec::new()),
                Header::Atoms(_) => logic_sources.push(LogicSource { outcomes: Vec::new() }),
            }
            continue;
        }
        let probability = first
            .text
            .parse::<f64>()
            .map_err(|_| syntax(line_no, first.column, format!("expected a probability, found '{}'", first.text)))?;
        let rest = &toks[1..];
        let Some(open) = rest.first() else {
            return Err(syntax(line_no, first.column + first.text.chars().count(), "missing target"));
        };
        match h {
            Header::Frame(frame) => {
                let (target, used) = parse_set_tokens(frame, rest, line_no)?;
                trailing(rest, used, line_no)?;
                let Some(source) = set_sources.last_mut() else {
                    return Err(syntax(line_no, first.column, "outcome outside a 'source:' block"));
                };
                source.push(Outcome::new(probability, target));
            }
            Header::Atoms(names) => {
                if open.text != "[" {
                    return Err(syntax(line_no, open.column, "expected '[' to open a term"));
                }
                let close = rest
                    .iter()
                    .position(|t| t.text == "]")
                    .ok_or_else(|| syntax(line_no, open.column, "unclosed '['"))?;
                let lits = rest[1..close]
                    .iter()
                    .map(|t| literal(names, *t, line_no))
                    .collect::<Result<Vec<_>, _>>()?;
                trailing(rest, close + 1, line_no)?;
                let Some(source) = logic_sources.last_mut() else {
                    return Err(syntax(line_no, first.column, "outcome outside a 'source:' block"));
                };
                source.outcomes.push((probability, TermSet::new(lits)));
            }
        }
    }

    match header {
        None => Err(syntax(1, 1, "expected 'frame:' or 'atoms:' header")),
        Some(Header::Frame(frame)) => {
            let sources = set_sources
                .into_iter()
                .map(|o| SourceModel::unchecked(frame.clone(), o))
                .collect();
            let problem = EvidenceProblem::unchecked(frame, sources);
            let report = validate_problem(&problem);
            if report.is_empty() {
                Ok(ProblemText::Set(problem))
            } else {
                Err(FormatError::Invalid(report.to_string()))
            }
        }
        Some(Header::Atoms(atoms)) => {
            let problem =
                LogicProblem::unchecked(atoms, logic_sources).map_err(|e| FormatError::Invalid(e.to_string()))?;
            let report = problem.violations();
            if report.is_empty() {
                Ok(ProblemText::Logic(problem))
            } else {
                Err(FormatError::Invalid(report.join("; ")))
            }
        }
    }
}

pub fn parse_set_problem(text: &str) -> Result<EvidenceProblem, FormatError> {
    match parse_problem(text)? {
        ProblemText::Set(p) => Ok(p),
        ProblemText::Logic(_) => Err(FormatError::Invalid(
            "this is a logic problem ('atoms:' header); pass --logic".into(),
        )),
    }
}

pub fn parse_logic_problem(text: &str) -> Result<LogicProblem, FormatError> {
    match parse_problem(text)? {
        ProblemText::Logic(p) => Ok(p),
        ProblemText::Set(_) => Err(FormatError::Invalid(
            "--logic expects an 'atoms:' header, found 'frame:'".into(),
        )),
    }
}

fn keyword<'a>(token: &'a str, word: &str) -> Option<&'a str> {
    token.strip_prefix(word)
}

fn is_punct(t: &str) -> bool {
    matches!(t, "{" | "}" | "[" | "]" | "(" | ")" | "|" | "*")
}

fn trailing(toks: &[Token<'_>], used: usize, line: usize) -> Result<(), FormatError> {
    match toks.get(used) {
        Some(t) => Err(syntax(line, t.column, format!("unexpected '{}'", t.text))),
        None => Ok(()),
    }
}

fn literal(atoms: &[String], t: Token<'_>, line: usize) -> Result<Literal, FormatError> {
    let (name, positive) = match t.text.strip_prefix('!') {
        Some(n) => (n, false),
        None => (t.text, true),
    };
    let atom = atoms
        .iter()
        .position(|a| a == name)
        .ok_or_else(|| syntax(line, t.column, format!("unknown atom '{name}'")))?;
    Ok(Literal { atom, positive })
}

// Returns the set and the number of tokens it spans.
fn parse_set_tokens(frame: &Frame, toks: &[Token<'_>], line: usize) -> Result<(FocalSet, usize), FormatError> {
    let open = toks[0];
    if open.text == "*" {
        return Ok((frame.full(), 1));
    }
    if open.text != "{" {
        return Err(syntax(line, open.column, format!("expected '{{' or '*', found '{}'", open.text)));
    }
    let mut set = frame.empty_set();
    for (k, t) in toks.iter().enumerate().skip(1) {
        if t.text == "}" {
            return Ok((set, k + 1));
        }
        let j = frame
            .index_of(t.text)
            .ok_or_else(|| syntax(line, t.column, format!("unknown element '{}'", t.text)))?;
        set.insert(j);
    }
    Err(syntax(line, open.column, "unclosed '{'"))
}

/// Parses a query such as `{x1 x3}`, `*` or `{}`.
pub fn parse_set_query(frame: &Frame, text: &str) -> Result<FocalSet, FormatError> {
    let toks = tokens(text);
    if toks.is_empty() {
        return Err(syntax(1, 1, "empty query"));
    }
    let (set, used) = parse_set_tokens(frame, &toks, 1)?;
    trailing(&toks, used, 1)?;
    Ok(set)
}

/// Parses a clause such as `p | !q`, `(p | !q)` or `p !q`.
pub fn parse_clause_query(problem: &LogicProblem, text: &str) -> Result<ClauseQuery, FormatError> {
    let toks: Vec<Token<'_>> = tokens(text).into_iter().filter(|t| t.text != "|").collect();
    let inner = match toks.as_slice() {
        [open, inner @ .., close] if open.text == "(" && close.text == ")" => inner,
        all => all,
    };
    let lits = inner
        .iter()
        .map(|t| literal(problem.atoms(), *t, 1))
        .collect::<Result<Vec<_>, _>>()?;
    ClauseQuery::new(lits).map_err(|_| syntax(1, 1, "a clause needs at least one literal"))
}

pub fn render_set(frame: &Frame, set: &FocalSet) -> String {
    if set.is_full() {
        return "*".into();
    }
    let labels: Vec<&str> = set.iter().map(|j| frame.label(j)).collect();
    format!("{{{}}}", labels.join(" "))
}

pub fn render_clause(problem: &LogicProblem, c: &ClauseQuery) -> String {
    let lits: Vec<String> = c.literals().iter().map(|l| problem.display_literal(*l)).collect();
    lits.join(" | ")
}

pub fn render_problem(problem: &ProblemText) -> String {
    let mut out = format!("version: {FORMAT_VERSION}\n");
    match problem {
        ProblemText::Set(p) => {
            let _ = writeln!(out, "frame: {}", p.frame().labels().join(" "));
            for s in p.sources() {
                out.push_str("source:\n");
                for o in s.outcomes() {
                    let _ = writeln!(out, "  {} {}", o.probability, render_set(p.frame(), &o.target));
                }
            }
        }
        ProblemText::Logic(p) => {
            let _ = writeln!(out, "atoms: {}", p.atoms().join(" "));
            for s in p.sources() {
                out.push_str("source:\n");
                for (prob, term) in &s.outcomes {
                    let lits: Vec<String> = term.literals().iter().map(|l| p.display_literal(*l)).collect();
                    let _ = writeln!(out, "  {} [{}]", prob, lits.join(" "));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsmc_core::SimpleSupport;

    const TWO_SSF: &str = "frame: x1 x2\nsource:\n 0.6 {x1}\n 0.4 *\nsource:\n 0.5 {x2}\n 0.5 *\n";

    #[test]
    fn reads_two_simple_supports() {
        let ProblemText::Set(p) = parse_problem(TWO_SSF).unwrap() else {
            panic!("expected a set problem");
        };
        let f = p.frame().clone();
        let expected = EvidenceProblem::from_simple_supports(
            f.clone(),
            &[
                SimpleSupport::new(f.subset(["x1"]).unwrap(), 0.6),
                SimpleSupport::new(f.subset(["x2"]).unwrap(), 0.5),
            ],
        )
        .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn reports_bad_sums() {
        let err = parse_problem("frame: x1\nsource:\n 0.6 {x1}\n 0.5 *\n").unwrap_err();
        assert_eq!(err.to_string(), "source 0: probabilities sum to 1.1");
    }

    #[test]
    fn reads_logic_terms() {
        let text = "atoms: p q\nsource:\n  0.7 [p]\n  0.3 []\nsource:\n  0.5 [!p q]\n  0.5 []\n";
        let ProblemText::Logic(p) = parse_problem(text).unwrap() else {
            panic!("expected a logic problem");
        };
        assert_eq!(p.atoms(), ["p", "q"]);
        assert_eq!(p.sources()[0].outcomes[0], (0.7, TermSet::new([Literal::pos(0)])));
        assert_eq!(
            p.sources()[1].outcomes[0].1,
            TermSet::new([Literal::neg(0), Literal::pos(1)])
        );
    }

    #[test]
    fn locates_syntax_errors() {
        let err = parse_problem("frame: a b\nsource:\n  0.5 {a c}\n  0.5 *\n").unwrap_err();
        assert_eq!(
            err,
            FormatError::Syntax {
                line: 3,
                column: 10,
                message: "unknown element 'c'".into()
            }
        );
        let err = parse_problem("# comment\nframe: a\nsource:\n  half *\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 4, column: 3, .. }), "{err}");
        let err = parse_problem("source:\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 1, column: 1, .. }));
        let err = parse_problem("frame: a\n 1 *\n").unwrap_err();
        assert!(err.to_string().contains("outside a 'source:' block"));
        let err = parse_problem("frame: a\nsource:\n 1 {a\n").unwrap_err();
        assert!(err.to_string().contains("unclosed"));
        let err = parse_problem("frame: a a\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn empty_targets_are_invalid() {
        let err = parse_problem("frame: a b\nsource:\n 1 *\nsource:\n 1 {}\n").unwrap_err();
        assert_eq!(err.to_string(), "source 1 outcome 0: empty target");
    }

    #[test]
    fn comments_and_commas() {
        let p = parse_set_problem("frame: a, b # two\nsource: # first\n 1 {a, b}\n").unwrap();
        assert_eq!(p.frame().labels(), ["a", "b"]);
        assert!(p.sources()[0].outcomes()[0].target.is_full());
    }

    #[test]
    fn renders_and_reparses() {
        let p = parse_problem(TWO_SSF).unwrap();
        let text = render_problem(&p);
        assert_eq!(
            text,
            "version: 1\nframe: x1 x2\nsource:\n  0.6 {x1}\n  0.4 *\nsource:\n  0.5 {x2}\n  0.5 *\n"
        );
        assert_eq!(parse_problem(&text).unwrap(), p);
        assert!(parse_problem("version: 2\nframe: a\n").is_err());
    }

    #[test]
    fn queries() {
        let f = Frame::new(["x1", "x2", "x3"]).unwrap();
        assert!(parse_set_query(&f, "*").unwrap().is_full());
        assert!(parse_set_query(&f, "{}").unwrap().is_empty());
        assert_eq!(parse_set_query(&f, "{x3 x1}").unwrap(), f.subset(["x1", "x3"]).unwrap());
        assert!(parse_set_query(&f, "{x4}").is_err());
        assert!(parse_set_query(&f, "{x1} x2").is_err());
        assert_eq!(render_set(&f, &f.subset(["x1", "x3"]).unwrap()), "{x1 x3}");

        let ProblemText::Logic(p) = parse_problem("atoms: p q\nsource:\n 1 []\n").unwrap() else {
            panic!()
        };
        let c = parse_clause_query(&p, "(p | !q)").unwrap();
        assert_eq!(c.literals(), [Literal::pos(0), Literal::neg(1)]);
        assert_eq!(parse_clause_query(&p, "p !q").unwrap(), c);
        assert_eq!(render_clause(&p, &c), "p | !q");
        assert!(parse_clause_query(&p, "r").is_err());
        assert!(parse_clause_query(&p, "").is_err());
    }
}
