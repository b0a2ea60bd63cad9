//! Exact text format for instances.
//!
//! ```text
//! QUBO 3
//! c 1 -5 -5
//! 1 2 1
//! 1 3 1
//! ```
//!
//! Off-diagonal entries are listed once, upper triangle, 1-based. Values
//! are integers or fractions `p/q`. An asymmetric instance is written with
//! the header `QUBO n asymmetric` and lists every nonzero `(i, j)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qubo::{QuboInstance, Rational};

pub fn save_canonical(inst: &QuboInstance) -> String {
    let n = inst.n();
    let mut out = String::new();
    if inst.is_asymmetric() {
        out.push_str(&format!("QUBO {n} asymmetric\n"));
    } else {
        out.push_str(&format!("QUBO {n}\n"));
    }
    out.push('c');
    for i in 0..n {
        out.push_str(&format!(" {}", inst.c(i)));
    }
    out.push('\n');
    for i in 0..n {
        let start = if inst.is_asymmetric() { 0 } else { i + 1 };
        for j in start..n {
            let v = inst.q(i, j);
            if !v.is_zero() {
                out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
            }
        }
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into `(column, token)` pairs with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn rational(tok: &str, line: usize, col: usize) -> Result<Rational> {
    tok.parse::<Rational>()
        .map_err(|_| parse_err(line, col, format!("expected a number, found `{tok}`")))
}

fn index(tok: &str, n: usize, line: usize, col: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(line, col, format!("expected an index, found `{tok}`")))?;
    if v == 0 || v > n {
        return Err(parse_err(line, col, format!("index {v} out of range 1..={n}")));
    }
    Ok(v - 1)
}

pub fn load_canonical(text: &str) -> Result<QuboInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let h = tokens(header);
    if h.first().map(|t| t.1) != Some("QUBO") {
        return Err(parse_err(hl, 1, "expected `QUBO n`"));
    }
    let (ncol, ntok) = *h.get(1).ok_or_else(|| parse_err(hl, header.len() + 1, "missing dimension"))?;
    let n: usize = ntok
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| parse_err(hl, ncol, "dimension must be a positive integer"))?;
    let asymmetric = match h.get(2) {
        None => false,
        Some((_, "asymmetric")) => true,
        Some(&(col, tok)) => return Err(parse_err(hl, col, format!("unexpected `{tok}`"))),
    };
    let (cl, cline) = lines.next().ok_or_else(|| parse_err(hl + 1, 1, "missing `c` line"))?;
    let ct = tokens(cline);
    if ct.first().map(|t| t.1) != Some("c") {
        return Err(parse_err(cl, 1, "expected `c` followed by the linear coefficients"));
    }
    if ct.len() != n + 1 {
        return Err(parse_err(cl, 1, format!("expected {n} linear coefficients, found {}", ct.len() - 1)));
    }
    let c = ct[1..]
        .iter()
        .map(|&(col, tok)| rational(tok, cl, col))
        .collect::<Result<Vec<_>>>()?;
    let mut q = vec![vec![Rational::zero(); n]; n];
    for (ln, line) in lines {
        let t = tokens(line);
        if t.len() != 3 {
            return Err(parse_err(ln, 1, "expected `i j value`"));
        }
        let i = index(t[0].1, n, ln, t[0].0)?;
        let j = index(t[1].1, n, ln, t[1].0)?;
        if i == j {
            return Err(parse_err(ln, t[1].0, "diagonal entries are not allowed"));
        }
        let v = rational(t[2].1, ln, t[2].0)?;
        if asymmetric {
            q[i][j] = v;
        } else {
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    if asymmetric {
        QuboInstance::new_asymmetric(q, c)
    } else {
        QuboInstance::new(q, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures;

    #[test]
    fn round_trip_fixtures() {
        for name in fixtures::NAMES {
            let inst = fixtures::by_name(name).unwrap();
            let text = save_canonical(&inst);
            assert_eq!(load_canonical(&text).unwrap(), inst, "{name}");
        }
    }

    #[test]
    fn layout() {
        assert_eq!(save_canonical(&fixtures::ex3()), "QUBO 3\nc 1 -5 -5\n1 2 1\n1 3 1\n");
        assert!(save_canonical(&fixtures::ex8(1)).contains("1 2 1/2"));
    }

    #[test]
    fn errors_carry_location() {
        let e = load_canonical("QUBO 2\nc 0 0\n1 3 4\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 3,
                column: 3,
                message: "index 3 out of range 1..=2".into()
            }
        );
        assert!(matches!(load_canonical("QUBO 2\nc 0 x\n"), Err(Error::Parse { line: 2, column: 5, .. })));
        assert!(load_canonical("").is_err());
        assert!(load_canonical("QUBO 0\nc\n").is_err());
    }
}
