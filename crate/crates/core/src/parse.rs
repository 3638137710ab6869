//! Parser for the Boolean rule file format.
//!
//! ```text
//! # comment
//! states: x1, x2, x3
//! inputs: u
//! subsystems: 2
//!
//! [subsystem 1]
//! x1 = (u ^ x1) & (x2 <-> x3)
//! ...
//! ```
//!
//! ASCII operator spellings: `!` (not), `&` (and), `|` (or), `^` (xor),
//! `->` (implies, right-associative), `<->` (iff), with precedence
//! `!` > `&` > `|` > `^` > `->` > `<->`. Comment lines start with `#`.
//! The `inputs:` and `subsystems:` headers are optional (defaulting to
//! no inputs and a single subsystem); the `[subsystem k]` block header
//! may be omitted only when there is exactly one subsystem.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::BooleanExpr;

/// A parsed rule file: declared names and one expression per state per
/// subsystem (`rules[l][i]` is the update rule of state `i` in
/// subsystem `l+1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub rules: Vec<Vec<BooleanExpr>>,
}

impl RuleSet {
    pub fn subsystems(&self) -> usize {
        self.rules.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredIdentifier(String),
    DuplicateDefinition(String),
    MissingDefinition(String),
}

/// Position-annotated parse error (1-based line and column).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => {
                write!(f, "line {}, column {}: {}", self.line, self.col, msg)
            }
            ParseErrorKind::UndeclaredIdentifier(name) => write!(
                f,
                "line {}, column {}: undeclared identifier `{}`",
                self.line, self.col, name
            ),
            ParseErrorKind::DuplicateDefinition(name) => write!(
                f,
                "line {}, column {}: duplicate definition of `{}`",
                self.line, self.col, name
            ),
            ParseErrorKind::MissingDefinition(what) => {
                write!(f, "line {}: missing definition: {}", self.line, what)
            }
        }
    }
}

fn err(line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    err(line, col, ParseErrorKind::Syntax(msg.into()))
}

/// Parses a complete rule file.
pub fn parse_rules(text: &str) -> Result<RuleSet, ParseError> {
    let mut states: Vec<String> = Vec::new();
    let mut inputs: Vec<String> = Vec::new();
    let mut subsystems: usize = 1;
    let mut saw_states = false;
    let mut saw_subsystems = false;

    // rules[l][i] = Some(expr) once defined.
    let mut rules: Vec<Vec<Option<BooleanExpr>>> = Vec::new();
    let mut current_block: Option<usize> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = line.len() - trimmed.len();

        if let Some(rest) = trimmed.strip_prefix("states:") {
            if saw_states {
                return Err(syntax(lineno, indent + 1, "repeated `states:` header"));
            }
            states = parse_name_list(rest, lineno, indent + "states:".len() + 1)?;
            if states.is_empty() {
                return Err(syntax(lineno, indent + 1, "empty states list"));
            }
            saw_states = true;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("inputs:") {
            inputs = parse_name_list(rest, lineno, indent + "inputs:".len() + 1)?;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("subsystems:") {
            subsystems = rest.trim().parse::<usize>().map_err(|_| {
                syntax(lineno, indent + "subsystems:".len() + 2, "expected a positive integer")
            })?;
            if subsystems == 0 {
                return Err(syntax(lineno, indent + 1, "subsystem count must be positive"));
            }
            saw_subsystems = true;
            continue;
        }
        if trimmed.starts_with('[') {
            if !saw_states {
                return Err(syntax(lineno, indent + 1, "block before `states:` header"));
            }
            let inner = trimmed
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| syntax(lineno, indent + 1, "malformed block header"))?;
            let k = inner
                .trim()
                .strip_prefix("subsystem")
                .map(str::trim)
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| syntax(lineno, indent + 1, "expected `[subsystem k]`"))?;
            if k == 0 || k > subsystems {
                return Err(syntax(
                    lineno,
                    indent + 1,
                    format!("subsystem index {} out of range 1..={}", k, subsystems),
                ));
            }
            ensure_blocks(&mut rules, subsystems, states.len());
            current_block = Some(k - 1);
            continue;
        }

        // A `name = expr` rule line.
        if !saw_states {
            return Err(syntax(lineno, indent + 1, "rule before `states:` header"));
        }
        ensure_blocks(&mut rules, subsystems, states.len());
        let block = match current_block {
            Some(b) => b,
            None if subsystems == 1 => {
                current_block = Some(0);
                0
            }
            None => {
                return Err(syntax(lineno, indent + 1, "rule outside a `[subsystem k]` block"));
            }
        };

        let eq_pos = trimmed
            .find('=')
            .ok_or_else(|| syntax(lineno, indent + 1, "expected `name = expr`"))?;
        let name = trimmed[..eq_pos].trim();
        if name.is_empty() || !is_identifier(name) {
            return Err(syntax(lineno, indent + 1, "expected a state name before `=`"));
        }
        let state_idx = states.iter().position(|s| s == name).ok_or_else(|| {
            err(lineno, indent + 1, ParseErrorKind::UndeclaredIdentifier(name.to_owned()))
        })?;
        if rules[block][state_idx].is_some() {
            return Err(err(
                lineno,
                indent + 1,
                ParseErrorKind::DuplicateDefinition(name.to_owned()),
            ));
        }

        let rhs_col = indent + eq_pos + 2; // 1-based column right after `=`
        let rhs = &trimmed[eq_pos + 1..];
        let expr = parse_expr(rhs, lineno, rhs_col, &states, &inputs)?;
        rules[block][state_idx] = Some(expr);
    }

    if !saw_states {
        return Err(err(
            last_line.max(1),
            1,
            ParseErrorKind::MissingDefinition("no `states:` header".to_owned()),
        ));
    }
    let _ = saw_subsystems;
    ensure_blocks(&mut rules, subsystems, states.len());

    let mut out = Vec::with_capacity(subsystems);
    for (l, block) in rules.into_iter().enumerate() {
        let mut exprs = Vec::with_capacity(states.len());
        for (i, slot) in block.into_iter().enumerate() {
            match slot {
                Some(e) => exprs.push(e),
                None => {
                    return Err(err(
                        last_line.max(1),
                        1,
                        ParseErrorKind::MissingDefinition(format!(
                            "state `{}` in subsystem {}",
                            states[i],
                            l + 1
                        )),
                    ));
                }
            }
        }
        out.push(exprs);
    }

    Ok(RuleSet { states, inputs, rules: out })
}

fn ensure_blocks(rules: &mut Vec<Vec<Option<BooleanExpr>>>, z: usize, n: usize) {
    if rules.is_empty() {
        for _ in 0..z {
            rules.push(alloc::vec![None; n]);
        }
    }
}

fn parse_name_list(rest: &str, line: usize, col0: usize) -> Result<Vec<String>, ParseError> {
    let mut names = Vec::new();
    let mut col = col0;
    for part in rest.split(',') {
        let name = part.trim();
        if name.is_empty() {
            if rest.trim().is_empty() && names.is_empty() {
                break; // "inputs:" with nothing after is an empty list
            }
            return Err(syntax(line, col, "empty name in list"));
        }
        if !is_identifier(name) {
            return Err(syntax(line, col, format!("invalid name `{}`", name)));
        }
        if names.iter().any(|n| n == name) {
            return Err(err(line, col, ParseErrorKind::DuplicateDefinition(name.to_owned())));
        }
        names.push(name.to_owned());
        col += part.len() + 1;
    }
    Ok(names)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---- expression parsing -------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    Imp,
    Iff,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(Tok, usize)>, // token and its 1-based column
    pos: usize,
    line: usize,
    end_col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Lexer, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let col = col0 + i;
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Not, col));
                i += 1;
            }
            '&' => {
                toks.push((Tok::And, col));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Or, col));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Xor, col));
                i += 1;
            }
            '-' => {
                if text[i..].starts_with("->") {
                    toks.push((Tok::Imp, col));
                    i += 2;
                } else {
                    return Err(syntax(line, col, "unexpected character `-`"));
                }
            }
            '<' => {
                if text[i..].starts_with("<->") {
                    toks.push((Tok::Iff, col));
                    i += 3;
                } else {
                    return Err(syntax(line, col, "unexpected character `<`"));
                }
            }
            '0' => {
                toks.push((Tok::Const(false), col));
                i += 1;
            }
            '1' => {
                toks.push((Tok::Const(true), col));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::Const(true),
                    "false" => Tok::Const(false),
                    _ => Tok::Ident(word.to_owned()),
                };
                toks.push((tok, col));
            }
            other => {
                return Err(syntax(line, col, format!("unexpected character `{}`", other)));
            }
        }
    }
    Ok(Lexer { toks, pos: 0, line, end_col: col0 + text.len() })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, c)| c).unwrap_or(self.end_col)
    }
}

fn parse_expr(
    text: &str,
    line: usize,
    col0: usize,
    states: &[String],
    inputs: &[String],
) -> Result<BooleanExpr, ParseError> {
    let mut lx = lex(text, line, col0)?;
    let expr = parse_iff(&mut lx, states, inputs)?;
    if let Some((_, col)) = lx.next() {
        return Err(syntax(line, col, "unexpected trailing token"));
    }
    Ok(expr)
}

fn parse_iff(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let mut left = parse_imp(lx, states, inputs)?;
    while lx.peek() == Some(&Tok::Iff) {
        lx.next();
        let right = parse_imp(lx, states, inputs)?;
        left = BooleanExpr::Iff(left.into(), right.into());
    }
    Ok(left)
}

fn parse_imp(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let left = parse_xor(lx, states, inputs)?;
    if lx.peek() == Some(&Tok::Imp) {
        lx.next();
        // right-associative
        let right = parse_imp(lx, states, inputs)?;
        return Ok(BooleanExpr::Imp(left.into(), right.into()));
    }
    Ok(left)
}

fn parse_xor(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let mut left = parse_or(lx, states, inputs)?;
    while lx.peek() == Some(&Tok::Xor) {
        lx.next();
        let right = parse_or(lx, states, inputs)?;
        left = BooleanExpr::Xor(left.into(), right.into());
    }
    Ok(left)
}

fn parse_or(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let mut left = parse_and(lx, states, inputs)?;
    while lx.peek() == Some(&Tok::Or) {
        lx.next();
        let right = parse_and(lx, states, inputs)?;
        left = BooleanExpr::Or(left.into(), right.into());
    }
    Ok(left)
}

fn parse_and(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let mut left = parse_unary(lx, states, inputs)?;
    while lx.peek() == Some(&Tok::And) {
        lx.next();
        let right = parse_unary(lx, states, inputs)?;
        left = BooleanExpr::And(left.into(), right.into());
    }
    Ok(left)
}

fn parse_unary(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    if lx.peek() == Some(&Tok::Not) {
        lx.next();
        let inner = parse_unary(lx, states, inputs)?;
        return Ok(BooleanExpr::Not(inner.into()));
    }
    parse_atom(lx, states, inputs)
}

fn parse_atom(lx: &mut Lexer, states: &[String], inputs: &[String]) -> Result<BooleanExpr, ParseError> {
    let line = lx.line;
    let col = lx.here();
    match lx.next() {
        Some((Tok::Ident(name), col)) => {
            if states.iter().any(|s| *s == name) || inputs.iter().any(|s| *s == name) {
                Ok(BooleanExpr::Var(name))
            } else {
                Err(err(line, col, ParseErrorKind::UndeclaredIdentifier(name)))
            }
        }
        Some((Tok::Const(b), _)) => Ok(BooleanExpr::Const(b)),
        Some((Tok::LParen, _)) => {
            let inner = parse_iff(lx, states, inputs)?;
            match lx.next() {
                Some((Tok::RParen, _)) => Ok(inner),
                _ => Err(syntax(line, lx.here(), "expected `)`")),
            }
        }
        Some((_, col)) => Err(syntax(line, col, "expected a variable, constant, or `(`")),
        None => Err(syntax(line, col, "unexpected end of expression")),
    }
}
