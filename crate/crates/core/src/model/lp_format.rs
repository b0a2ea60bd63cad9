//! CPLEX-style LP text.
//!
//! The objective lists every variable, zero coefficients included, so a
//! re-import recovers the original column order. Continuous variables always
//! get an explicit bounds line; binaries only when their bounds are tighter
//! than `[0, 1]`.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{fmt_num, MilpModel, ModelMeta, RowTag, Sense, VarKind, VarRole, Variable};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;
const MODEL_HEADER: &str = "\\ model: ";
const INSTANCE_HEADER: &str = "\\ instance: ";

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        fmt_num(v)
    }
}

fn write_expr(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    for (k, (a, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let neg = a < 0.0;
        if k == 0 {
            if neg {
                let _ = write!(out, " -{} {}", fmt_num(-a), name);
            } else {
                let _ = write!(out, " {} {}", fmt_num(a), name);
            }
        } else if neg {
            let _ = write!(out, " - {} {}", fmt_num(-a), name);
        } else {
            let _ = write!(out, " + {} {}", fmt_num(a), name);
        }
    }
}

pub fn export_lp(m: &MilpModel) -> Result<String> {
    m.validate()?;
    if m.variables.is_empty() {
        return Err(Error::InvalidModel("model has no variables".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}{}", MODEL_HEADER, m.meta.model);
    let _ = writeln!(out, "{}{}", INSTANCE_HEADER, m.meta.instance_fingerprint);
    out.push_str("Maximize\n obj:");
    write_expr(
        &mut out,
        m.objective.iter().zip(&m.variables).map(|(&a, v)| (a, v.name.clone())),
    );
    out.push_str("\nSubject To\n");
    for c in &m.constraints {
        let _ = write!(out, " {}:", c.name);
        if c.terms.is_empty() {
            let _ = write!(out, " 0 {}", m.variables[0].name);
        } else {
            write_expr(
                &mut out,
                c.terms.iter().map(|&(v, a)| (a, m.variables[v].name.clone())),
            );
        }
        let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &m.variables {
        match v.kind {
            VarKind::Binary => {
                if v.lower != 0.0 || v.upper != 1.0 {
                    let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
                }
            }
            VarKind::Continuous => {
                if v.lower == 0.0 && v.upper == f64::INFINITY {
                    let _ = writeln!(out, " {} >= 0", v.name);
                } else if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                    let _ = writeln!(out, " {} free", v.name);
                } else {
                    let _ = writeln!(out, " {} <= {} <= {}", fmt_bound(v.lower), v.name, fmt_bound(v.upper));
                }
            }
        }
    }
    let bins: Vec<&str> = m
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    match words.as_slice() {
        ["maximize"] | ["maximise"] | ["maximum"] | ["max"] => Some(Section::Objective),
        ["subject", "to"] | ["such", "that"] | ["st"] | ["s.t."] => Some(Section::Constraints),
        ["bounds"] | ["bound"] => Some(Section::Bounds),
        ["binaries"] | ["binary"] | ["bin"] => Some(Section::Binaries),
        ["end"] => Some(Section::End),
        _ => None,
    }
}

fn parse_err(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: col,
        message: message.into(),
    }
}

fn lex_line(text: &str, line: usize, out: &mut Vec<Spanned>) -> Result<()> {
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        let col = k + 1;
        if ch.is_whitespace() {
            k += 1;
            continue;
        }
        let push = |tok, out: &mut Vec<Spanned>| out.push(Spanned { tok, line, col });
        match ch {
            '+' => {
                push(Tok::Plus, out);
                k += 1;
            }
            '-' => {
                push(Tok::Minus, out);
                k += 1;
            }
            ':' => {
                push(Tok::Colon, out);
                k += 1;
            }
            '<' | '>' | '=' => {
                let next = chars.get(k + 1).copied();
                let (sense, width) = match (ch, next) {
                    ('<', Some('=')) | ('=', Some('<')) => (Sense::Le, 2),
                    ('>', Some('=')) | ('=', Some('>')) => (Sense::Ge, 2),
                    ('<', _) => (Sense::Le, 1),
                    ('>', _) => (Sense::Ge, 1),
                    _ => (Sense::Eq, 1),
                };
                push(Tok::Cmp(sense), out);
                k += width;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    k += 1;
                }
                if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                    let mut j = k + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        k = j;
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                    }
                }
                let s: String = chars[start..k].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, col, format!("bad number `{s}`")))?;
                push(Tok::Num(v), out);
            }
            c if c.is_alphabetic() || "_!\"#$%&()/,;?@'`{}|~[]".contains(c) => {
                let start = k;
                while k < chars.len()
                    && !chars[k].is_whitespace()
                    && !"+-:<>=".contains(chars[k])
                {
                    k += 1;
                }
                let s: String = chars[start..k].iter().collect();
                let lower = s.to_ascii_lowercase();
                if lower == "inf" || lower == "infinity" {
                    push(Tok::Num(f64::INFINITY), out);
                } else {
                    push(Tok::Ident(s), out);
                }
            }
            other => return Err(parse_err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(())
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
    end_line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Spanned> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        match self.peek() {
            Some(t) => parse_err(t.line, t.col, msg),
            None => parse_err(self.end_line, 1, msg),
        }
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                }
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.pos += 1;
                }
                Some(Tok::Num(v)) => {
                    let v = *v;
                    self.pos += 1;
                    return Ok(sign * v);
                }
                _ => return Err(self.err_here("expected a number")),
            }
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.err_here("expected a variable name")),
        }
    }

    /// Optional `name :` label.
    fn label(&mut self) -> Option<String> {
        if let (Some(Spanned { tok: Tok::Ident(s), .. }), Some(Spanned { tok: Tok::Colon, .. })) =
            (self.peek(), self.peek_at(1))
        {
            self.pos += 2;
            Some(s.clone())
        } else {
            None
        }
    }

    /// Linear expression up to (not including) a comparison or a new label.
    fn expression(&mut self, vars: &mut VarTable) -> Result<Vec<(usize, f64)>> {
        let mut terms = Vec::new();
        loop {
            match self.peek().map(|t| &t.tok) {
                None | Some(Tok::Cmp(_)) => break,
                Some(Tok::Ident(_)) if matches!(self.peek_at(1).map(|t| &t.tok), Some(Tok::Colon)) => break,
                _ => {}
            }
            let mut sign = 1.0;
            let mut coef = None;
            loop {
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Plus) => self.pos += 1,
                    Some(Tok::Minus) => {
                        sign = -sign;
                        self.pos += 1;
                    }
                    _ => break,
                }
            }
            if let Some(Tok::Num(v)) = self.peek().map(|t| &t.tok) {
                coef = Some(*v);
                self.pos += 1;
            }
            let name = self.ident()?;
            let id = vars.get_or_insert(&name);
            terms.push((id, sign * coef.unwrap_or(1.0)));
        }
        Ok(terms)
    }
}

#[derive(Default)]
struct VarTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl VarTable {
    fn get_or_insert(&mut self, name: &str) -> usize {
        if let Some(&k) = self.index.get(name) {
            return k;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }
}

struct PendingRow {
    name: String,
    terms: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
    line: usize,
}

pub fn import_lp(text: &str) -> Result<MilpModel> {
    let mut meta = ModelMeta::default();
    let mut sections: Vec<(Section, Vec<Spanned>)> = Vec::new();
    let mut current = Section::Preamble;
    let mut toks = Vec::new();
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        if let Some(rest) = raw.strip_prefix(MODEL_HEADER) {
            meta.model = rest.trim().to_string();
            continue;
        }
        if let Some(rest) = raw.strip_prefix(INSTANCE_HEADER) {
            meta.instance_fingerprint = rest.trim().to_string();
            continue;
        }
        let body = match raw.find('\\') {
            Some(k) => &raw[..k],
            None => raw,
        };
        if let Some(sec) = section_keyword(body) {
            if sec == Section::Objective && current != Section::Preamble {
                return Err(parse_err(line, 1, "objective section must come first"));
            }
            sections.push((current, std::mem::take(&mut toks)));
            current = sec;
            continue;
        }
        let lower = body.trim().to_ascii_lowercase();
        if ["minimize", "minimise", "minimum", "min"].contains(&lower.as_str()) {
            return Err(parse_err(line, 1, "only maximization models are supported"));
        }
        if ["generals", "general", "gen", "semi-continuous", "sos"].contains(&lower.as_str()) {
            return Err(parse_err(line, 1, format!("unsupported section `{}`", body.trim())));
        }
        if current == Section::End && !body.trim().is_empty() {
            return Err(parse_err(line, 1, "text after End"));
        }
        lex_line(body, line, &mut toks)?;
    }
    sections.push((current, toks));

    let mut vars = VarTable::default();
    let mut objective: HashMap<usize, f64> = HashMap::new();
    let mut rows: Vec<PendingRow> = Vec::new();
    let mut bounds: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut binaries: Vec<usize> = Vec::new();
    let mut saw_objective = false;

    for (sec, toks) in &sections {
        let mut cur = Cursor {
            toks,
            pos: 0,
            end_line: last_line,
        };
        match sec {
            Section::Preamble | Section::End => {
                if let Some(t) = cur.peek() {
                    return Err(parse_err(t.line, t.col, "text outside of any section"));
                }
            }
            Section::Objective => {
                saw_objective = true;
                cur.label();
                for (v, a) in cur.expression(&mut vars)? {
                    *objective.entry(v).or_insert(0.0) += a;
                }
                if !cur.done() {
                    return Err(cur.err_here("unexpected token in objective"));
                }
            }
            Section::Constraints => {
                while !cur.done() {
                    let line = cur.peek().map(|t| t.line).unwrap_or(last_line);
                    let name = cur.label().unwrap_or_else(|| format!("R{}", rows.len() + 1));
                    let terms = cur.expression(&mut vars)?;
                    let sense = match cur.next().map(|t| &t.tok) {
                        Some(Tok::Cmp(s)) => *s,
                        _ => {
                            cur.pos -= 1;
                            return Err(cur.err_here("expected a comparison operator"));
                        }
                    };
                    let rhs = cur.signed_number()?;
                    rows.push(PendingRow {
                        name,
                        terms,
                        sense,
                        rhs,
                        line,
                    });
                }
            }
            Section::Bounds => {
                while !cur.done() {
                    parse_bound(&mut cur, &mut vars, &mut bounds)?;
                }
            }
            Section::Binaries => {
                while !cur.done() {
                    let name = cur.ident()?;
                    binaries.push(vars.get_or_insert(&name));
                }
            }
        }
    }
    if !saw_objective {
        return Err(parse_err(1, 1, "missing Maximize section"));
    }

    let mut model = MilpModel::new(meta);
    for (k, name) in vars.names.iter().enumerate() {
        let (lower, upper) = bounds.get(&k).copied().unwrap_or((0.0, f64::INFINITY));
        let role = VarRole::parse(name);
        model.add_variable(
            Variable {
                name: name.clone(),
                lower,
                upper,
                kind: VarKind::Continuous,
                role,
            },
            objective.get(&k).copied().unwrap_or(0.0),
        );
    }
    for k in binaries {
        let v = &mut model.variables[k];
        v.kind = VarKind::Binary;
        if !bounds.contains_key(&k) {
            v.lower = 0.0;
            v.upper = 1.0;
        }
    }
    let mut seen = HashMap::new();
    for row in rows {
        if seen.insert(row.name.clone(), row.line).is_some() {
            return Err(Error::DuplicateRow(row.name));
        }
        let tag = RowTag::from_name(&row.name);
        model.add_constraint(tag, row.terms, row.sense, row.rhs);
        model.constraints.last_mut().expect("just pushed").name = row.name;
    }
    model.validate()?;
    Ok(model)
}

fn parse_bound(cur: &mut Cursor<'_>, vars: &mut VarTable, bounds: &mut HashMap<usize, (f64, f64)>) -> Result<()> {
    let starts_with_name = matches!(cur.peek().map(|t| &t.tok), Some(Tok::Ident(_)));
    if starts_with_name {
        let name = cur.ident()?;
        let k = vars.get_or_insert(&name);
        let entry = bounds.entry(k).or_insert((0.0, f64::INFINITY));
        match cur.peek().map(|t| &t.tok) {
            Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("free") => {
                cur.pos += 1;
                *entry = (f64::NEG_INFINITY, f64::INFINITY);
            }
            Some(Tok::Cmp(s)) => {
                let s = *s;
                cur.pos += 1;
                let v = cur.signed_number()?;
                match s {
                    Sense::Le => entry.1 = v,
                    Sense::Ge => entry.0 = v,
                    Sense::Eq => *entry = (v, v),
                }
            }
            _ => return Err(cur.err_here("expected `free` or a comparison after variable name")),
        }
        return Ok(());
    }
    let lo = cur.signed_number()?;
    let s1 = match cur.next().map(|t| &t.tok) {
        Some(Tok::Cmp(s)) => *s,
        _ => {
            cur.pos -= 1;
            return Err(cur.err_here("expected a comparison operator"));
        }
    };
    let name = cur.ident()?;
    let k = vars.get_or_insert(&name);
    let entry = bounds.entry(k).or_insert((0.0, f64::INFINITY));
    match s1 {
        Sense::Le => entry.0 = lo,
        Sense::Ge => entry.1 = lo,
        Sense::Eq => *entry = (lo, lo),
    }
    if let Some(Tok::Cmp(s2)) = cur.peek().map(|t| &t.tok) {
        let s2 = *s2;
        cur.pos += 1;
        let hi = cur.signed_number()?;
        match s2 {
            Sense::Le => entry.1 = hi,
            Sense::Ge => entry.0 = hi,
            Sense::Eq => *entry = (hi, hi),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RowCode;

    fn tiny() -> MilpModel {
        let mut m = MilpModel::new(ModelMeta {
            model: "GW".into(),
            instance_fingerprint: "00ff".into(),
        });
        let x1 = m.add_variable(Variable::binary(VarRole::X(0)), 5.0);
        let x2 = m.add_variable(Variable::binary(VarRole::X(1)), -0.5);
        let y = m.add_variable(Variable::continuous(VarRole::Y(0, 1), 0.0, 1.0), 2.0);
        let z = m.add_variable(Variable::continuous(VarRole::Y(1, 0), f64::NEG_INFINITY, f64::INFINITY), 0.0);
        m.add_constraint(RowTag::pair(RowCode::Type1, 0, 1), vec![(x1, 1.0), (x2, 1.0), (y, -1.0)], Sense::Le, 1.0);
        m.add_constraint(RowTag::row(RowCode::AggRowUpper, 1), vec![(z, 0.1), (x2, -3.0)], Sense::Le, 0.0);
        m.add_constraint(RowTag::pair(RowCode::SymmetryEq, 0, 1), vec![(y, 1.0), (z, -1.0)], Sense::Eq, 0.0);
        m
    }

    #[test]
    fn export_contains_sections() {
        let text = export_lp(&tiny()).unwrap();
        assert!(text.contains("Maximize"));
        assert!(text.contains("5 x1"));
        assert!(text.contains(" T1_1_2: 1 x1 + 1 x2 - 1 y1_2 <= 1"));
        assert!(text.contains(" y2_1 free"));
        assert!(text.contains("Binaries\n x1 x2\n"));
    }

    #[test]
    fn round_trip_is_a_fixpoint() {
        let m = tiny();
        let text = export_lp(&m).unwrap();
        let back = import_lp(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(export_lp(&back).unwrap(), text);
    }

    #[test]
    fn accepts_loose_spacing_and_implicit_coefficients() {
        let text = "Maximize\n obj: 3x + y\nSubject To\n c1: x+y<=4\n -x + 2 y >= -2\nBounds\n 0 <= y <= 3\n x <= 2\nEnd\n";
        let m = import_lp(text).unwrap();
        assert_eq!(m.num_vars(), 2);
        assert_eq!(m.constraints[0].terms, vec![(0, 1.0), (1, 1.0)]);
        assert_eq!(m.constraints[1].name, "R2");
        assert_eq!(m.constraints[1].rhs, -2.0);
        assert_eq!(m.variables[1].upper, 3.0);
        assert_eq!(m.variables[0].upper, 2.0);
        assert_eq!(m.constraints[0].tag.code, RowCode::Other);
    }

    #[test]
    fn reports_parse_location() {
        let text = "Maximize\n obj: x\nSubject To\n c1: x <= ?\nEnd\n";
        match import_lp(text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, 11);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_rows() {
        let text = "Maximize\n obj: x\nSubject To\n c1: x <= 1\n c1: x <= 2\nEnd\n";
        assert_eq!(import_lp(text), Err(Error::DuplicateRow("c1".into())));
    }

    #[test]
    fn rejects_minimize() {
        assert!(matches!(import_lp("Minimize\n obj: x\nEnd\n"), Err(Error::Parse { .. })));
    }
}
