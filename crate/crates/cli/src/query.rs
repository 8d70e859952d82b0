//! Query language.
//!
//! ```text
//! query   := ("mv" | "k") arglist
//! arglist := arg+
//! arg     := INT | "(" INT ("," INT)* ")"
//! ```
//!
//! Bare integers are singlets and parenthesized lists are product groups,
//! so `k 3 (1,3) (1,2,3)` is the cumulant of `X3`, `X1 X3` and `X1 X2 X3`.
//! `mv` takes bare integers only and means the expectation of their product.
//! Whitespace is insignificant except as a separator between integers.
//! This is the Mathematica `MV[...]` / `K[...]` notation with parentheses in
//! place of braces, which keeps shell quoting simple.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use gauss_cumulants::{CumulantQuery, Group, Index, IndexList};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Moment(IndexList),
    Cumulant(CumulantQuery),
}

impl Query {
    pub fn order(&self) -> usize {
        match self {
            Query::Moment(ix) => ix.len(),
            Query::Cumulant(q) => q.order(),
        }
    }
}

/// Renders a query back into the syntax accepted by [`parse_query`].
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Moment(ix) => write!(f, "mv {}", ix.as_slice().iter().join(" ")),
            Query::Cumulant(q) => write!(f, "k {q}"),
        }
    }
}

/// Parse failure; `column` is one-based and counts characters.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

fn fail<T>(column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        column,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Moment,
    Cumulant,
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            chars: input.chars().enumerate().map(|(i, c)| (i + 1, c)).collect(),
            pos: 0,
            input,
        }
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(col, _)| col)
            .unwrap_or(self.input.chars().count() + 1)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn keyword(&mut self) -> Result<Kind, ParseError> {
        self.skip_ws();
        let col = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        match word.to_ascii_lowercase().as_str() {
            "mv" => Ok(Kind::Moment),
            "k" => Ok(Kind::Cumulant),
            "" => fail(col, "expected `mv` or `k`"),
            other => fail(col, format!("unknown query kind `{other}`, expected `mv` or `k`")),
        }
    }

    fn index(&mut self) -> Result<Index, ParseError> {
        self.skip_ws();
        let col = self.column();
        match self.peek() {
            Some('-') => return fail(col, "indices must be positive"),
            Some(c) if c.is_ascii_digit() => {}
            Some(c) => return fail(col, format!("expected an index, found `{c}`")),
            None => return fail(col, "expected an index, found end of input"),
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        match digits.parse::<Index>() {
            Ok(0) => fail(col, "indices must be positive, got 0"),
            Ok(i) => Ok(i),
            Err(_) => fail(col, format!("index `{digits}` is too large")),
        }
    }

    fn group(&mut self) -> Result<Vec<Index>, ParseError> {
        let open = self.column();
        self.pos += 1;
        let mut items = vec![self.index()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    items.push(self.index()?);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(items);
                }
                Some('(') => return fail(self.column(), "nested groups are not allowed"),
                Some(c) if c.is_ascii_digit() => {
                    return fail(self.column(), "expected `,` or `)` between indices")
                }
                Some(c) => return fail(self.column(), format!("unexpected `{c}` in group")),
                None => return fail(open, "unbalanced `(`: group is never closed"),
            }
        }
    }
}

pub fn parse_query(input: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(input);
    let kind = p.keyword()?;
    let mut args: Vec<Vec<Index>> = Vec::new();
    loop {
        p.skip_ws();
        let col = p.column();
        match p.peek() {
            None => break,
            Some('(') => {
                if kind == Kind::Moment {
                    return fail(col, "`mv` takes bare indices, not groups");
                }
                args.push(p.group()?);
            }
            Some(')') => return fail(col, "unbalanced `)`"),
            Some(_) => args.push(vec![p.index()?]),
        }
    }
    if args.is_empty() {
        return fail(p.column(), "empty argument list");
    }
    let query = match kind {
        Kind::Moment => Query::Moment(IndexList::new(args.into_iter().flatten()).expect("indices validated")),
        Kind::Cumulant => {
            let groups = args
                .into_iter()
                .map(|g| Group::new(g).expect("indices validated"))
                .collect();
            Query::Cumulant(CumulantQuery::new(groups).expect("at least one group"))
        }
    };
    Ok(query)
}
