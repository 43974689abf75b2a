//! Verification queries: an input box and a conjunction of linear
//! constraints over the network outputs.
//!
//! Text format (one statement per line, `#` starts a comment):
//!
//! ```text
//! checknn-property v1
//! name output-0-not-maximal
//! input 0 in [-1, 1]
//! input 1 in [0, 0.5]
//! assert y0 - y1 <= 0
//! assert 2*y1 + 0.5 y2 > -3
//! ```
//!
//! The header line is optional, but when present it must name version 1.
//! Inputs must be bounded contiguously from index 0. All numbers are exact
//! decimals (or `p/q` fractions); nothing in this module takes a tolerance.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::Rational;
use crate::verify::Interval;

pub const PROPERTY_HEADER: &str = "checknn-property v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("property has no assert statements")]
    EmptyPostcondition,
    #[error("property bounds no inputs")]
    NoInputs,
    #[error("input {0} is not bounded")]
    MissingInput(usize),
    #[error("property constrains {property} inputs but the network takes {network}")]
    InputArity { property: usize, network: usize },
    #[error("property reads output y{index} but only {outputs} outputs exist")]
    OutputArity { index: usize, outputs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

/// `sum_k c_k * y_k  <rel>  bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearAtom {
    coefficients: BTreeMap<usize, Rational>,
    relation: Relation,
    bound: Rational,
}

impl LinearAtom {
    /// Zero coefficients are dropped; `None` if none remain.
    pub fn new(
        coefficients: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        bound: Rational,
    ) -> Option<Self> {
        let mut map: BTreeMap<usize, Rational> = BTreeMap::new();
        for (k, c) in coefficients {
            let sum = map.remove(&k).map_or(c.clone(), |prev| &prev + &c);
            if !sum.is_zero() {
                map.insert(k, sum);
            }
        }
        if map.is_empty() {
            return None;
        }
        Some(LinearAtom {
            coefficients: map,
            relation,
            bound,
        })
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, Rational> {
        &self.coefficients
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn max_output(&self) -> usize {
        *self.coefficients.keys().next_back().expect("atoms are nonempty")
    }

    /// Left-hand side value. Callers guarantee every referenced output exists.
    pub fn lhs(&self, outputs: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .fold(Rational::zero(), |acc, (&k, c)| &acc + &(c * &outputs[k]))
    }

    pub fn holds(&self, outputs: &[Rational]) -> bool {
        self.relation.holds(&self.lhs(outputs), &self.bound)
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = Rational::from(1);
        for (n, (k, c)) in self.coefficients.iter().enumerate() {
            let magnitude = if c.is_negative() { -c } else { c.clone() };
            match (n, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if magnitude != one {
                write!(f, "{}*", render(&magnitude))?;
            }
            write!(f, "y{k}")?;
        }
        write!(f, " {} {}", self.relation.symbol(), render(&self.bound))
    }
}

fn render(x: &Rational) -> String {
    x.to_decimal_string().unwrap_or_else(|| x.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputBox {
    bounds: Vec<Interval>,
}

impl InputBox {
    pub fn new(bounds: Vec<Interval>) -> Self {
        InputBox { bounds }
    }

    pub fn arity(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        point.len() == self.bounds.len()
            && self.bounds.iter().zip(point).all(|(iv, x)| iv.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub precondition: InputBox,
    pub postcondition: Vec<LinearAtom>,
}

/// Outcome of checking every atom on one output vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub holds: bool,
    /// Indices of every violated atom, in declaration order.
    pub violated: Vec<usize>,
}

impl Property {
    pub fn new(
        name: impl Into<String>,
        precondition: InputBox,
        postcondition: Vec<LinearAtom>,
    ) -> Result<Self, PropertyError> {
        if precondition.arity() == 0 {
            return Err(PropertyError::NoInputs);
        }
        if postcondition.is_empty() {
            return Err(PropertyError::EmptyPostcondition);
        }
        Ok(Property {
            name: name.into(),
            precondition,
            postcondition,
        })
    }

    pub fn parse(text: &str) -> Result<Self, PropertyError> {
        parse_property(text)
    }

    /// Highest output index any atom reads.
    pub fn max_output(&self) -> usize {
        self.postcondition
            .iter()
            .map(LinearAtom::max_output)
            .max()
            .unwrap_or(0)
    }

    pub fn check_arity(&self, inputs: usize, outputs: usize) -> Result<(), PropertyError> {
        if self.precondition.arity() != inputs {
            return Err(PropertyError::InputArity {
                property: self.precondition.arity(),
                network: inputs,
            });
        }
        if self.max_output() >= outputs {
            return Err(PropertyError::OutputArity {
                index: self.max_output(),
                outputs,
            });
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{PROPERTY_HEADER}\nname {}\n", self.name);
        for (i, iv) in self.precondition.bounds().iter().enumerate() {
            out.push_str(&format!("input {i} in [{}, {}]\n", render(iv.lo()), render(iv.hi())));
        }
        for atom in &self.postcondition {
            out.push_str(&format!("assert {atom}\n"));
        }
        out
    }
}

/// Exact evaluation of every atom. Lists all violated atoms.
pub fn eval_postcondition(prop: &Property, outputs: &[Rational]) -> Result<Evaluation, PropertyError> {
    if prop.max_output() >= outputs.len() {
        return Err(PropertyError::OutputArity {
            index: prop.max_output(),
            outputs: outputs.len(),
        });
    }
    let violated: Vec<usize> = prop
        .postcondition
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.holds(outputs))
        .map(|(i, _)| i)
        .collect();
    Ok(Evaluation {
        holds: violated.is_empty(),
        violated,
    })
}

pub fn parse_property(text: &str) -> Result<Property, PropertyError> {
    let mut name = None;
    let mut inputs: BTreeMap<usize, Interval> = BTreeMap::new();
    let mut atoms = Vec::new();
    let mut seen_statement = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| PropertyError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with("checknn-property") {
            if seen_statement {
                return Err(err("header must be the first statement".into()));
            }
            if content != PROPERTY_HEADER {
                return Err(err(format!("unsupported header {content:?}")));
            }
            seen_statement = true;
            continue;
        }
        seen_statement = true;
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .map_or((content, ""), |(k, r)| (k, r.trim()));
        match keyword {
            "name" => {
                if rest.is_empty() {
                    return Err(err("empty name".into()));
                }
                name = Some(rest.to_string());
            }
            "input" => {
                let (index, interval) = parse_input(rest).map_err(err)?;
                if inputs.insert(index, interval).is_some() {
                    return Err(PropertyError::Parse {
                        line,
                        message: format!("duplicate bound for input {index}"),
                    });
                }
            }
            "assert" => atoms.push(parse_atom(rest).map_err(err)?),
            other => return Err(err(format!("unknown statement {other:?}"))),
        }
    }
    if let Some(gap) = (0..inputs.len()).find(|i| !inputs.contains_key(i)) {
        return Err(PropertyError::MissingInput(gap));
    }
    Property::new(
        name.unwrap_or_else(|| "unnamed".to_string()),
        InputBox::new(inputs.into_values().collect()),
        atoms,
    )
}

fn parse_number(text: &str) -> Result<Rational, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("malformed number {:?}", text.trim()))
}

fn parse_input(rest: &str) -> Result<(usize, Interval), String> {
    let (index, range) = rest
        .split_once(" in ")
        .ok_or_else(|| "expected `input <i> in [<lo>, <hi>]`".to_string())?;
    let index: usize = index
        .trim()
        .parse()
        .map_err(|_| format!("malformed input index {:?}", index.trim()))?;
    let inner = range
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| "interval must be written [lo, hi]".to_string())?;
    let (lo, hi) = inner
        .split_once(',')
        .ok_or_else(|| "interval must be written [lo, hi]".to_string())?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    let interval = Interval::new(lo, hi).map_err(|iv| {
        format!("empty interval for input {index}: {} > {}", iv.0, iv.1)
    })?;
    Ok((index, interval))
}

#[derive(Debug, PartialEq)]
enum Token {
    Number(Rational),
    Output(usize),
    Plus,
    Minus,
    Star,
}

fn tokenize(expr: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = expr.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let c = chars[pos];
        match c {
            ' ' | '\t' => pos += 1,
            '+' => {
                tokens.push(Token::Plus);
                pos += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                pos += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                pos += 1;
            }
            'y' => {
                let start = pos + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                if end == start {
                    return Err("output name needs an index, as in y0".into());
                }
                let index: String = chars[start..end].iter().collect();
                tokens.push(Token::Output(index.parse().map_err(|_| "output index too large")?));
                pos = end;
            }
            d if d.is_ascii_digit() => {
                let start = pos;
                let mut end = pos;
                while end < chars.len() && (chars[end].is_ascii_digit() || chars[end] == '.' || chars[end] == '/') {
                    end += 1;
                }
                if end < chars.len() && (chars[end] == 'e' || chars[end] == 'E') {
                    let mut exp_end = end + 1;
                    if exp_end < chars.len() && (chars[exp_end] == '+' || chars[exp_end] == '-') {
                        exp_end += 1;
                    }
                    let digits_start = exp_end;
                    while exp_end < chars.len() && chars[exp_end].is_ascii_digit() {
                        exp_end += 1;
                    }
                    if exp_end > digits_start {
                        end = exp_end;
                    }
                }
                let text: String = chars[start..end].iter().collect();
                tokens.push(Token::Number(parse_number(&text)?));
                pos = end;
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(tokens)
}

fn parse_linear(expr: &str) -> Result<Vec<(usize, Rational)>, String> {
    let tokens = tokenize(expr)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut terms = Vec::new();
    let mut iter = tokens.into_iter().peekable();
    let mut first = true;
    while iter.peek().is_some() {
        let mut sign = Rational::from(1);
        match iter.peek() {
            Some(Token::Plus) => {
                iter.next();
            }
            Some(Token::Minus) => {
                iter.next();
                sign = Rational::from(-1);
            }
            _ if first => {}
            Some(t) => return Err(format!("expected + or - before {t:?}")),
            None => unreachable!(),
        }
        first = false;
        let coefficient = match iter.next() {
            Some(Token::Number(n)) => {
                if iter.peek() == Some(&Token::Star) {
                    iter.next();
                }
                match iter.next() {
                    Some(Token::Output(k)) => (k, n),
                    _ => return Err("a coefficient must multiply an output such as y0".into()),
                }
            }
            Some(Token::Output(k)) => (k, Rational::from(1)),
            Some(t) => return Err(format!("unexpected {t:?}")),
            None => return Err("expression ends with an operator".into()),
        };
        terms.push((coefficient.0, &sign * &coefficient.1));
    }
    Ok(terms)
}

fn parse_atom(rest: &str) -> Result<LinearAtom, String> {
    let (pos, relation, width) = ["<=", ">=", "<", ">"]
        .iter()
        .filter_map(|sym| rest.find(sym).map(|p| (p, *sym)))
        .min_by_key(|(p, sym)| (*p, std::cmp::Reverse(sym.len())))
        .map(|(p, sym)| {
            let rel = match sym {
                "<=" => Relation::Le,
                ">=" => Relation::Ge,
                "<" => Relation::Lt,
                _ => Relation::Gt,
            };
            (p, rel, sym.len())
        })
        .ok_or_else(|| "assert needs one of <=, <, >=, >".to_string())?;
    let lhs = &rest[..pos];
    let rhs = rest[pos + width..].trim();
    if rhs.contains(['<', '>', 'y']) {
        return Err("right-hand side must be a single constant".into());
    }
    let bound = parse_number(rhs)?;
    let terms = parse_linear(lhs)?;
    LinearAtom::new(terms, relation, bound)
        .ok_or_else(|| "constraint has no nonzero coefficient".to_string())
}

/// Verification outcome. `CounterexampleFound` is the SAT case of the usual
/// benchmark tables, `Holds` the UNSAT case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    CounterexampleFound(Witness),
    Timeout,
    Unknown(String),
}

/// A concrete input inside the box whose outputs violate the postcondition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub inputs: Vec<Rational>,
    pub outputs: Vec<Rational>,
    pub violated: Vec<usize>,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::CounterexampleFound(_) => "counterexample",
            Verdict::Timeout => "timeout",
            Verdict::Unknown(_) => "unknown",
        }
    }

    /// SAT/UNSAT reading: SAT means a counterexample exists.
    pub fn sat_label(&self) -> &'static str {
        match self {
            Verdict::Holds => "UNSAT",
            Verdict::CounterexampleFound(_) => "SAT",
            Verdict::Timeout => "TIMEOUT",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_decided(&self) -> bool {
        matches!(self, Verdict::Holds | Verdict::CounterexampleFound(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::CounterexampleFound(w) => Some(w),
            _ => None,
        }
    }
}
