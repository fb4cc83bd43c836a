//! Plan text format: nested s-expressions.
//!
//! ```text
//! (split 0 4 2 B (direct 0 2) (direct 2 4))
//! ```
//!
//! The writer emits the canonical single-spaced form; the parser accepts
//! any whitespace between tokens. Canonical output round-trips
//! byte-for-byte.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Interval, Plan, Strategy};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PlanTextError {
    #[error("unexpected end of plan text")]
    UnexpectedEnd,
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("plan intervals are inconsistent at {0}..{1}")]
    Inconsistent(usize, usize),
}

pub fn format_plan(plan: &Plan) -> String {
    let mut out = String::new();
    write_node(plan, &mut out);
    out.push('\n');
    out
}

fn write_node(plan: &Plan, out: &mut String) {
    match plan {
        Plan::Direct(iv) => write!(out, "(direct {} {})", iv.a, iv.c).unwrap(),
        Plan::Split {
            interval,
            b,
            strategy,
            left,
            right,
        } => {
            let tag = match strategy {
                Strategy::A => 'A',
                Strategy::B => 'B',
            };
            write!(out, "(split {} {} {} {} ", interval.a, interval.c, b, tag).unwrap();
            write_node(left, out);
            out.push(' ');
            write_node(right, out);
            out.push(')');
        }
    }
}

pub fn parse_plan(text: &str) -> Result<Plan, PlanTextError> {
    let mut tokens = tokenize(text);
    let plan = parse_node(&mut tokens)?;
    match tokens.next() {
        None => {
            if plan.is_well_formed() {
                Ok(plan)
            } else {
                let iv = plan.interval();
                Err(PlanTextError::Inconsistent(iv.a, iv.c))
            }
        }
        Some(tok) => Err(PlanTextError::UnexpectedToken(tok.to_string())),
    }
}

fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .flat_map(|word| split_parens(word))
}

fn split_parens(word: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut rest = word;
    while !rest.is_empty() {
        if let Some(stripped) = rest.strip_prefix('(') {
            parts.push("(");
            rest = stripped;
        } else if let Some(stripped) = rest.strip_prefix(')') {
            parts.push(")");
            rest = stripped;
        } else {
            let end = rest.find(['(', ')']).unwrap_or(rest.len());
            parts.push(&rest[..end]);
            rest = &rest[end..];
        }
    }
    parts
}

fn parse_node<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<Plan, PlanTextError> {
    expect(tokens, "(")?;
    let head = next(tokens)?;
    let plan = match head {
        "direct" => {
            let a = number(tokens)?;
            let c = number(tokens)?;
            if a >= c {
                return Err(PlanTextError::Inconsistent(a, c));
            }
            Plan::Direct(Interval::new(a, c))
        }
        "split" => {
            let a = number(tokens)?;
            let c = number(tokens)?;
            let b = number(tokens)?;
            if !(a < b && b < c) {
                return Err(PlanTextError::Inconsistent(a, c));
            }
            let strategy = match next(tokens)? {
                "A" => Strategy::A,
                "B" => Strategy::B,
                other => return Err(PlanTextError::UnexpectedToken(other.to_string())),
            };
            let left = parse_node(tokens)?;
            let right = parse_node(tokens)?;
            Plan::Split {
                interval: Interval::new(a, c),
                b,
                strategy,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        other => return Err(PlanTextError::UnexpectedToken(other.to_string())),
    };
    expect(tokens, ")")?;
    Ok(plan)
}

fn next<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<&'a str, PlanTextError> {
    tokens.next().ok_or(PlanTextError::UnexpectedEnd)
}

fn expect<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    want: &str,
) -> Result<(), PlanTextError> {
    let tok = next(tokens)?;
    if tok == want {
        Ok(())
    } else {
        Err(PlanTextError::UnexpectedToken(tok.to_string()))
    }
}

fn number<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<usize, PlanTextError> {
    let tok = next(tokens)?;
    tok.parse()
        .map_err(|_| PlanTextError::UnexpectedToken(tok.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Plan {
        Plan::Split {
            interval: Interval::new(0, 4),
            b: 2,
            strategy: Strategy::B,
            left: Box::new(Plan::Direct(Interval::new(0, 2))),
            right: Box::new(Plan::Direct(Interval::new(2, 4))),
        }
    }

    #[test]
    fn canonical_roundtrip() {
        let plan = sample();
        let text = format_plan(&plan);
        assert_eq!(text, "(split 0 4 2 B (direct 0 2) (direct 2 4))\n");
        let parsed = parse_plan(&text).unwrap();
        assert_eq!(parsed, plan);
        assert_eq!(format_plan(&parsed), text);
    }

    #[test]
    fn whitespace_tolerated() {
        let parsed = parse_plan("( split 0 4 2 B\n  (direct 0 2)\n  (direct 2 4) )").unwrap();
        assert_eq!(parsed, sample());
    }

    #[test]
    fn inconsistent_intervals_rejected() {
        let err = parse_plan("(split 0 4 2 B (direct 0 2) (direct 2 5))");
        assert_eq!(err, Err(PlanTextError::Inconsistent(0, 4)));
    }

    #[test]
    fn truncated_input_rejected() {
        assert_eq!(parse_plan("(split 0 4 2 B"), Err(PlanTextError::UnexpectedEnd));
    }
}
