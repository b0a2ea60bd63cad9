//! OR-Library `bqp` text format.
//!
//! The first token is the number of instances. Each instance starts with
//! `n m` followed by `m` triples `i j v` (1-based). A diagonal entry `i i v`
//! becomes the linear coefficient `c_i` because `x_i² = x_i`. An
//! off-diagonal entry adds `v` to both `q_ij` and `q_ji`; repeated pairs
//! accumulate.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qubo::{QuboInstance, Rational};

struct Tok<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

fn lex(text: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut start = None;
        for (k, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push(Tok {
                        line: ln + 1,
                        column: s + 1,
                        text: &line[s..k],
                    });
                }
            } else if start.is_none() {
                start = Some(k);
            }
        }
    }
    out
}

struct Cursor<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&Tok<'a>> {
        let line = self.last_line;
        let tok = self.toks.get(self.pos).ok_or_else(|| Error::Parse {
            line: line + 1,
            column: 1,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        self.last_line = tok.line;
        Ok(tok)
    }

    fn usize(&mut self, what: &str) -> Result<(usize, usize, usize)> {
        let t = self.next(what)?;
        let v = t.text.parse::<usize>().map_err(|_| Error::Parse {
            line: t.line,
            column: t.column,
            message: format!("expected {what}, found `{}`", t.text),
        })?;
        Ok((v, t.line, t.column))
    }

    fn number(&mut self) -> Result<Rational> {
        let t = self.next("a coefficient")?;
        t.text.parse::<Rational>().map_err(|_| Error::Parse {
            line: t.line,
            column: t.column,
            message: format!("expected a coefficient, found `{}`", t.text),
        })
    }
}

pub fn parse_orlib(text: &str) -> Result<Vec<QuboInstance>> {
    let toks = lex(text);
    if toks.is_empty() {
        return Ok(Vec::new());
    }
    let mut cur = Cursor { toks, pos: 0, last_line: 0 };
    let (count, _, _) = cur.usize("the instance count")?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, nl, nc) = cur.usize("the dimension n")?;
        if n == 0 {
            return Err(Error::Parse {
                line: nl,
                column: nc,
                message: "dimension must be positive".into(),
            });
        }
        let (m, _, _) = cur.usize("the entry count m")?;
        let mut q = vec![vec![Rational::zero(); n]; n];
        let mut c = vec![Rational::zero(); n];
        for _ in 0..m {
            let mut idx = [0usize; 2];
            for slot in &mut idx {
                let (v, l, col) = cur.usize("an index")?;
                if v == 0 || v > n {
                    return Err(Error::Parse {
                        line: l,
                        column: col,
                        message: format!("index {v} out of range 1..={n}"),
                    });
                }
                *slot = v - 1;
            }
            let v = cur.number()?;
            let [i, j] = idx;
            if i == j {
                c[i] += v;
            } else {
                q[i][j] += v;
                q[j][i] += v;
            }
        }
        out.push(QuboInstance::new(q, c)?);
    }
    if let Some(t) = cur.toks.get(cur.pos) {
        return Err(Error::Parse {
            line: t.line,
            column: t.column,
            message: format!("trailing input `{}`", t.text),
        });
    }
    Ok(out)
}

/// Writes instances in the same format: diagonal entries for `c`, then the
/// upper triangle of `Q`.
pub fn write_orlib(insts: &[QuboInstance]) -> String {
    let mut out = format!("{}\n", insts.len());
    for inst in insts {
        let n = inst.n();
        let mut entries = Vec::new();
        for i in 0..n {
            if !inst.c(i).is_zero() {
                entries.push((i, i, inst.c(i)));
            }
            for j in (i + 1)..n {
                if !inst.q(i, j).is_zero() {
                    entries.push((i, j, inst.q(i, j)));
                }
            }
        }
        out.push_str(&format!("{} {}\n", n, entries.len()));
        for (i, j, v) in entries {
            out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures;

    #[test]
    fn single_pair() {
        let v = parse_orlib("1\n2 1\n1 2 5\n").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0], QuboInstance::from_integers(&[vec![0, 5], vec![5, 0]], &[0, 0]).unwrap());
    }

    #[test]
    fn diagonal_is_linear() {
        let v = parse_orlib("1\n2 1\n1 1 7\n").unwrap();
        assert_eq!(v[0], QuboInstance::from_integers(&[vec![0, 0], vec![0, 0]], &[7, 0]).unwrap());
    }

    #[test]
    fn duplicates_accumulate() {
        let v = parse_orlib("1\n2 2\n1 2 5\n2 1 -2\n").unwrap();
        assert_eq!(v[0].q(0, 1), Rational::from_integer(3));
    }

    #[test]
    fn empty_and_zero_count() {
        assert!(parse_orlib("0\n").unwrap().is_empty());
        assert!(parse_orlib("").unwrap().is_empty());
    }

    #[test]
    fn errors_located() {
        assert_eq!(
            parse_orlib("1\n2 1\n1 3 5\n").unwrap_err(),
            Error::Parse {
                line: 3,
                column: 3,
                message: "index 3 out of range 1..=2".into()
            }
        );
        assert!(matches!(parse_orlib("1\n2 2\n1 2 5\n"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_orlib("1\n2 1\n1 2 x\n"), Err(Error::Parse { line: 3, column: 5, .. })));
    }

    #[test]
    fn write_round_trip() {
        let insts = vec![fixtures::ex2(), fixtures::ex3(), fixtures::ex8(1)];
        assert_eq!(parse_orlib(&write_orlib(&insts)).unwrap(), insts);
    }
}
