//! Text formats.
//!
//! Problems use a DIMACS variant with a `p pqe` header, an `x` line listing
//! the quantified variables and a `g` line listing the 1-based ordinals of the
//! target clauses:
//!
//! ```text
//! c Example: take clause 1 out of ∃x3,x4[F]
//! p pqe 4 4
//! x 3 4 0
//! g 1 0
//! -3 4 0
//! 1 3 0
//! 1 -4 0
//! 2 4 0
//! ```
//!
//! Every variable `<= V` not listed on the `x` line is unquantified.
//! Solutions are plain `p cnf` files over unquantified variables.

use std::fmt::{self, Write};

use thiserror::Error;

use crate::formula::{Clause, CnfFormula, FormulaError, Lit, Var};
use crate::problem::{PqeProblem, ProblemError, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing header line")]
    MissingHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("second header line")]
    DuplicateHeader,
    #[error("content before the header")]
    BeforeHeader,
    #[error("invalid token {0:?}")]
    BadToken(String),
    #[error("line must end with 0")]
    MissingTerminator,
    #[error("missing x line")]
    MissingQuantifierLine,
    #[error("missing g line")]
    MissingTargetLine,
    #[error("second {0} line")]
    DuplicateLine(char),
    #[error("{0} line must precede the clauses")]
    LineAfterClauses(char),
    #[error("clause ordinal {ordinal} is out of range 1..={clauses}")]
    OrdinalOutOfRange { ordinal: i64, clauses: usize },
    #[error("target set G is empty")]
    EmptyTarget,
    #[error("clause ordinal {0} is listed twice")]
    DuplicateTarget(usize),
    #[error("target clause {0} has no quantified variable")]
    UnquantifiedTarget(usize),
    #[error("tautological clause (contains {0} and -{0})")]
    Tautology(i32),
    #[error("variable {var} exceeds the declared count {max}")]
    VariableOutOfRange { var: i64, max: u32 },
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCount { declared: usize, found: usize },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("quantified variable {0} appears in the solution")]
    QuantifiedInSolution(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

struct Header {
    line: usize,
    num_vars: u32,
    num_clauses: usize,
}

fn parse_header(tokens: &[&str], format: &str, line: usize) -> Result<Header, ParseError> {
    let malformed = |msg: String| err(line, ParseErrorKind::MalformedHeader(msg));
    if tokens.len() != 4 || tokens[0] != "p" {
        return Err(malformed(format!(
            "expected \"p {format} <vars> <clauses>\""
        )));
    }
    if tokens[1] != format {
        return Err(malformed(format!(
            "expected format {format:?}, found {:?}",
            tokens[1]
        )));
    }
    let num_vars = tokens[2]
        .parse::<u32>()
        .map_err(|_| malformed(format!("bad variable count {:?}", tokens[2])))?;
    let num_clauses = tokens[3]
        .parse::<usize>()
        .map_err(|_| malformed(format!("bad clause count {:?}", tokens[3])))?;
    Ok(Header {
        line,
        num_vars,
        num_clauses,
    })
}

/// Integers of a zero-terminated line, without the terminator.
fn terminated_ints(tokens: &[&str], line: usize) -> Result<Vec<i64>, ParseError> {
    let mut values = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let v = tok
            .parse::<i64>()
            .map_err(|_| err(line, ParseErrorKind::BadToken(tok.to_string())))?;
        values.push(v);
    }
    match values.pop() {
        Some(0) if !values.contains(&0) => Ok(values),
        _ => Err(err(line, ParseErrorKind::MissingTerminator)),
    }
}

/// Clause lines: literals accumulate across lines until a 0.
struct ClauseReader {
    num_vars: u32,
    clauses: Vec<Clause>,
    pending: Vec<Lit>,
    pending_line: usize,
}

impl ClauseReader {
    fn new(num_vars: u32) -> ClauseReader {
        ClauseReader {
            num_vars,
            clauses: Vec::new(),
            pending: Vec::new(),
            pending_line: 0,
        }
    }

    fn feed(&mut self, tokens: &[&str], line: usize) -> Result<(), ParseError> {
        for tok in tokens {
            let v = tok
                .parse::<i64>()
                .map_err(|_| err(line, ParseErrorKind::BadToken(tok.to_string())))?;
            if v == 0 {
                let lits = std::mem::take(&mut self.pending);
                let clause = Clause::new(lits).map_err(|e| match e {
                    FormulaError::Tautology(v) => {
                        err(self.pending_line, ParseErrorKind::Tautology(v))
                    }
                    other => err(
                        self.pending_line,
                        ParseErrorKind::BadToken(other.to_string()),
                    ),
                })?;
                self.clauses.push(clause);
                continue;
            }
            if v.unsigned_abs() > self.num_vars as u64 {
                return Err(err(
                    line,
                    ParseErrorKind::VariableOutOfRange {
                        var: v.abs(),
                        max: self.num_vars,
                    },
                ));
            }
            if self.pending.is_empty() {
                self.pending_line = line;
            }
            self.pending
                .push(Lit::from_dimacs(v as i32).expect("nonzero"));
        }
        Ok(())
    }

    fn finish(self, header: &Header) -> Result<CnfFormula, ParseError> {
        if !self.pending.is_empty() {
            return Err(err(self.pending_line, ParseErrorKind::UnterminatedClause));
        }
        if self.clauses.len() != header.num_clauses {
            return Err(err(
                header.line,
                ParseErrorKind::ClauseCount {
                    declared: header.num_clauses,
                    found: self.clauses.len(),
                },
            ));
        }
        Ok(CnfFormula::with_num_vars(self.clauses, header.num_vars)
            .expect("variables range-checked"))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first() {
            None => None,
            Some(t) if t.starts_with('c') => None,
            Some(_) => Some((i + 1, tokens)),
        }
    })
}

/// Parses a `p pqe` problem.
pub fn parse_problem(text: &str) -> Result<PqeProblem, ParseError> {
    let mut header: Option<Header> = None;
    let mut x_line: Option<(usize, Vec<Var>)> = None;
    let mut g_line: Option<(usize, Vec<usize>)> = None;
    let mut reader: Option<ClauseReader> = None;
    let mut last_line = 0;

    for (line, tokens) in content_lines(text) {
        last_line = line;
        match tokens[0] {
            "p" => {
                if header.is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateHeader));
                }
                header = Some(parse_header(&tokens, "pqe", line)?);
            }
            "x" | "g" => {
                let tag = tokens[0].chars().next().unwrap();
                let h = header
                    .as_ref()
                    .ok_or(err(line, ParseErrorKind::BeforeHeader))?;
                if reader
                    .as_ref()
                    .is_some_and(|r| !r.clauses.is_empty() || !r.pending.is_empty())
                {
                    return Err(err(line, ParseErrorKind::LineAfterClauses(tag)));
                }
                let values = terminated_ints(&tokens[1..], line)?;
                if tag == 'x' {
                    if x_line.is_some() {
                        return Err(err(line, ParseErrorKind::DuplicateLine('x')));
                    }
                    let mut vars = Vec::with_capacity(values.len());
                    for v in values {
                        if v < 1 || v > h.num_vars as i64 {
                            return Err(err(
                                line,
                                ParseErrorKind::VariableOutOfRange {
                                    var: v,
                                    max: h.num_vars,
                                },
                            ));
                        }
                        vars.push(Var::new(v as u32).expect("positive"));
                    }
                    x_line = Some((line, vars));
                } else {
                    if g_line.is_some() {
                        return Err(err(line, ParseErrorKind::DuplicateLine('g')));
                    }
                    if values.is_empty() {
                        return Err(err(line, ParseErrorKind::EmptyTarget));
                    }
                    let mut ordinals: Vec<usize> = Vec::with_capacity(values.len());
                    for v in values {
                        if v < 1 || v as u64 > h.num_clauses as u64 {
                            return Err(err(
                                line,
                                ParseErrorKind::OrdinalOutOfRange {
                                    ordinal: v,
                                    clauses: h.num_clauses,
                                },
                            ));
                        }
                        let index = v as usize - 1;
                        if ordinals.contains(&index) {
                            return Err(err(line, ParseErrorKind::DuplicateTarget(v as usize)));
                        }
                        ordinals.push(index);
                    }
                    g_line = Some((line, ordinals));
                }
            }
            _ => {
                let h = header
                    .as_ref()
                    .ok_or(err(line, ParseErrorKind::BeforeHeader))?;
                if x_line.is_none() {
                    return Err(err(line, ParseErrorKind::MissingQuantifierLine));
                }
                if g_line.is_none() {
                    return Err(err(line, ParseErrorKind::MissingTargetLine));
                }
                reader
                    .get_or_insert_with(|| ClauseReader::new(h.num_vars))
                    .feed(&tokens, line)?;
            }
        }
    }

    let header = header.ok_or(err(last_line.max(1), ParseErrorKind::MissingHeader))?;
    let (_, quantified) = x_line.ok_or(err(last_line, ParseErrorKind::MissingQuantifierLine))?;
    let (g_at, targets) = g_line.ok_or(err(last_line, ParseErrorKind::MissingTargetLine))?;
    let formula = reader
        .unwrap_or_else(|| ClauseReader::new(header.num_vars))
        .finish(&header)?;
    PqeProblem::new(formula, quantified, targets).map_err(|e| match e {
        ProblemError::UnquantifiedTarget(i) => err(g_at, ParseErrorKind::UnquantifiedTarget(i + 1)),
        other => unreachable!("checked while parsing: {other}"),
    })
}

/// Parses a `p cnf` solution for `problem`.
pub fn parse_solution(text: &str, problem: &PqeProblem) -> Result<Solution, ParseError> {
    let f = parse_cnf(text)?;
    for (i, line) in content_lines(text).skip(1) {
        for tok in line {
            if let Ok(v) = tok.parse::<i64>() {
                let v = v.unsigned_abs();
                if v > problem.num_vars() as u64 {
                    return Err(err(
                        i,
                        ParseErrorKind::VariableOutOfRange {
                            var: v as i64,
                            max: problem.num_vars(),
                        },
                    ));
                }
                if v > 0 && problem.is_quantified(Var::new(v as u32).unwrap()) {
                    return Err(err(i, ParseErrorKind::QuantifiedInSolution(v as u32)));
                }
            }
        }
    }
    let mut h = CnfFormula::from_clauses(f.clauses().to_vec());
    h.extend_num_vars(problem.num_vars());
    Ok(Solution::new(h, problem).expect("variables checked above"))
}

/// Parses a plain `p cnf` file.
pub fn parse_cnf(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<Header> = None;
    let mut reader: Option<ClauseReader> = None;
    let mut last_line = 0;
    for (line, tokens) in content_lines(text) {
        last_line = line;
        if tokens[0] == "p" {
            if header.is_some() {
                return Err(err(line, ParseErrorKind::DuplicateHeader));
            }
            header = Some(parse_header(&tokens, "cnf", line)?);
            continue;
        }
        let h = header
            .as_ref()
            .ok_or(err(line, ParseErrorKind::BeforeHeader))?;
        reader
            .get_or_insert_with(|| ClauseReader::new(h.num_vars))
            .feed(&tokens, line)?;
    }
    let header = header.ok_or(err(last_line.max(1), ParseErrorKind::MissingHeader))?;
    reader
        .unwrap_or_else(|| ClauseReader::new(header.num_vars))
        .finish(&header)
}

fn write_clauses(out: &mut String, f: &CnfFormula) -> fmt::Result {
    for c in f.clauses() {
        for lit in c.lits() {
            write!(out, "{} ", lit.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

pub fn write_problem(problem: &PqeProblem) -> String {
    let mut out = String::new();
    let f = problem.formula();
    writeln!(out, "p pqe {} {}", f.num_vars(), f.len()).unwrap();
    write!(out, "x").unwrap();
    for v in problem.quantified() {
        write!(out, " {}", v.id()).unwrap();
    }
    writeln!(out, " 0").unwrap();
    write!(out, "g").unwrap();
    for i in problem.targets() {
        write!(out, " {}", i + 1).unwrap();
    }
    writeln!(out, " 0").unwrap();
    write_clauses(&mut out, f).unwrap();
    out
}

pub fn write_cnf(f: &CnfFormula) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", f.num_vars(), f.len()).unwrap();
    write_clauses(&mut out, f).unwrap();
    out
}

pub fn write_solution(h: &Solution) -> String {
    write_cnf(h.formula())
}
