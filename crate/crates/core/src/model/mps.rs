//! Fixed-field MPS text.
//!
//! Names are written in the fixed columns when they fit in eight characters;
//! the reader splits on whitespace, so longer names also round-trip.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{fmt_num, MilpModel, ModelMeta, RowTag, Sense, VarKind, VarRole, Variable};
use crate::error::{Error, Result};

const OBJ_ROW: &str = "OBJ";
const MODEL_HEADER: &str = "* model: ";
const INSTANCE_HEADER: &str = "* instance: ";

fn field_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let line = format!(" {:<2} {:<8}  {:<8}  {}", f1, f2, f3, f4);
    out.push_str(line.trim_end());
    out.push('\n');
}

pub fn export_mps(m: &MilpModel) -> Result<String> {
    m.validate()?;
    if m.constraints.iter().any(|c| c.name == OBJ_ROW) {
        return Err(Error::InvalidModel(format!("row name `{OBJ_ROW}` is reserved")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}{}", MODEL_HEADER, m.meta.model);
    let _ = writeln!(out, "{}{}", INSTANCE_HEADER, m.meta.instance_fingerprint);
    let name = if m.meta.model.is_empty() { "QUBOLIN" } else { m.meta.model.as_str() };
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("OBJSENSE\n    MAX\nROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for c in &m.constraints {
        let t = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {}  {}", t, c.name);
    }

    let mut col_entries: Vec<Vec<(&str, f64)>> = vec![Vec::new(); m.variables.len()];
    for c in &m.constraints {
        for &(v, a) in &c.terms {
            col_entries[v].push((c.name.as_str(), a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (k, v) in m.variables.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let kind = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker:<4}  'MARKER'                 {kind}");
            marker += 1;
            in_int = is_int;
        }
        field_line(&mut out, "", &v.name, OBJ_ROW, &fmt_num(m.objective[k]));
        for (row, a) in &col_entries[k] {
            field_line(&mut out, "", &v.name, row, &fmt_num(*a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{marker:<4}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for c in &m.constraints {
        if c.rhs != 0.0 {
            field_line(&mut out, "", "RHS", &c.name, &fmt_num(c.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for v in &m.variables {
        match v.kind {
            VarKind::Binary => {
                if v.lower == 0.0 && v.upper == 1.0 {
                    field_line(&mut out, "BV", "BND", &v.name, "");
                } else {
                    field_line(&mut out, "LO", "BND", &v.name, &fmt_num(v.lower));
                    field_line(&mut out, "UP", "BND", &v.name, &fmt_num(v.upper));
                }
            }
            VarKind::Continuous => {
                let (lo, hi) = (v.lower, v.upper);
                if lo == hi {
                    field_line(&mut out, "FX", "BND", &v.name, &fmt_num(lo));
                    continue;
                }
                if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                    field_line(&mut out, "FR", "BND", &v.name, "");
                    continue;
                }
                if lo == f64::NEG_INFINITY {
                    field_line(&mut out, "MI", "BND", &v.name, "");
                } else if lo != 0.0 {
                    field_line(&mut out, "LO", "BND", &v.name, &fmt_num(lo));
                }
                if hi != f64::INFINITY {
                    field_line(&mut out, "UP", "BND", &v.name, &fmt_num(hi));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: message.into(),
    }
}

fn num(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| perr(line, format!("bad number `{s}`")))
}

pub fn import_mps(text: &str) -> Result<MilpModel> {
    let mut meta = ModelMeta::default();
    let mut section = Section::None;
    let mut maximize = false;
    let mut obj_name: Option<String> = None;
    let mut row_names: Vec<(String, Sense, usize)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut obj: Vec<f64> = Vec::new();
    let mut is_int: Vec<bool> = Vec::new();
    let mut bounds: Vec<(f64, f64, bool)> = Vec::new();
    let mut in_int = false;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        if let Some(rest) = raw.strip_prefix(MODEL_HEADER) {
            meta.model = rest.trim().to_string();
            continue;
        }
        if let Some(rest) = raw.strip_prefix(INSTANCE_HEADER) {
            meta.instance_fingerprint = rest.trim().to_string();
            continue;
        }
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0].to_ascii_uppercase().as_str() {
                "NAME" => Section::None,
                "OBJSENSE" => {
                    if let Some(s) = fields.get(1) {
                        maximize = s.eq_ignore_ascii_case("MAX") || s.eq_ignore_ascii_case("MAXIMIZE");
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(perr(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => {
                maximize = fields[0].eq_ignore_ascii_case("MAX") || fields[0].eq_ignore_ascii_case("MAXIMIZE");
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(perr(line, "ROWS entry needs a type and a name"));
                }
                let name = fields[1].to_string();
                let sense = match fields[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(name);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(perr(line, format!("unknown row type `{t}`"))),
                };
                if row_index.contains_key(&name) || obj_name.as_deref() == Some(name.as_str()) {
                    return Err(Error::DuplicateRow(name));
                }
                row_index.insert(name.clone(), row_names.len());
                row_names.push((name, sense, line));
                row_terms.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match fields[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        m => return Err(perr(line, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(perr(line, "COLUMNS entry needs 3 or 5 fields"));
                }
                let col = match col_index.get(fields[0]) {
                    Some(&k) => k,
                    None => {
                        cols.push(fields[0].to_string());
                        obj.push(0.0);
                        is_int.push(in_int);
                        let b = if in_int { (0.0, 1.0, false) } else { (0.0, f64::INFINITY, false) };
                        bounds.push(b);
                        col_index.insert(fields[0].to_string(), cols.len() - 1);
                        cols.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let v = num(pair[1], line)?;
                    if obj_name.as_deref() == Some(pair[0]) {
                        obj[col] += v;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| perr(line, format!("unknown row `{}`", pair[0])))?;
                        row_terms[r].push((col, v));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(perr(line, "RHS entry needs 3 or 5 fields"));
                }
                for pair in fields[1..].chunks(2) {
                    let v = num(pair[1], line)?;
                    if obj_name.as_deref() == Some(pair[0]) {
                        continue;
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| perr(line, format!("unknown row `{}`", pair[0])))?;
                    rhs[r] = v;
                }
            }
            Section::Ranges => return Err(perr(line, "RANGES are not supported")),
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(perr(line, "BOUNDS entry needs at least 3 fields"));
                }
                let k = *col_index
                    .get(fields[2])
                    .ok_or_else(|| perr(line, format!("unknown column `{}`", fields[2])))?;
                let value = || -> Result<f64> {
                    fields.get(3).map(|s| num(s, line)).unwrap_or_else(|| Err(perr(line, "missing bound value")))
                };
                let b = &mut bounds[k];
                b.2 = true;
                match fields[0].to_ascii_uppercase().as_str() {
                    "UP" => b.1 = value()?,
                    "LO" => b.0 = value()?,
                    "FX" => {
                        let v = value()?;
                        b.0 = v;
                        b.1 = v;
                    }
                    "FR" => {
                        b.0 = f64::NEG_INFINITY;
                        b.1 = f64::INFINITY;
                    }
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "BV" => {
                        b.0 = 0.0;
                        b.1 = 1.0;
                        is_int[k] = true;
                    }
                    t => return Err(perr(line, format!("unsupported bound type `{t}`"))),
                }
            }
            Section::None | Section::End => return Err(perr(line, "data outside of a section")),
        }
    }

    let sign = if maximize { 1.0 } else { -1.0 };
    let mut model = MilpModel::new(meta);
    for (k, name) in cols.iter().enumerate() {
        let (lower, upper, _) = bounds[k];
        model.add_variable(
            Variable {
                name: name.clone(),
                lower,
                upper,
                kind: if is_int[k] { VarKind::Binary } else { VarKind::Continuous },
                role: VarRole::parse(name),
            },
            sign * obj[k],
        );
    }
    for (r, (name, sense, _)) in row_names.into_iter().enumerate() {
        let terms = std::mem::take(&mut row_terms[r]);
        model.add_constraint(RowTag::from_name(&name), terms, sense, rhs[r]);
        model.constraints.last_mut().expect("just pushed").name = name;
    }
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RowCode;

    #[test]
    fn single_column_model() {
        let mut m = MilpModel::new(ModelMeta::default());
        m.add_variable(Variable::binary(VarRole::X(0)), 5.0);
        let text = export_mps(&m).unwrap();
        assert!(text.contains("COLUMNS\n    MARKER0     'MARKER'                 'INTORG'\n    x1        OBJ       5\n"));
        assert!(text.contains(" BV BND       x1"));
        let back = import_mps(&text).unwrap();
        assert_eq!(back.num_vars(), 1);
        assert_eq!(back.objective, vec![5.0]);
        assert_eq!(export_mps(&back).unwrap(), text);
    }

    #[test]
    fn round_trip_preserves_everything() {
        let mut m = MilpModel::new(ModelMeta {
            model: "FT(a,g,t)".into(),
            instance_fingerprint: "abc".into(),
        });
        let x = m.add_variable(Variable::binary(VarRole::X(0)), -2.5);
        let y = m.add_variable(Variable::continuous(VarRole::Y(0, 1), 0.0, 1.0), 3.0);
        let z = m.add_variable(Variable::continuous(VarRole::Y(1, 0), f64::NEG_INFINITY, 4.0), 0.0);
        m.add_constraint(RowTag::row(RowCode::AggRowUpper, 0), vec![(y, 2.0), (x, -2.0)], Sense::Le, 0.0);
        m.add_constraint(RowTag::pair(RowCode::SymmetryEq, 0, 1), vec![(y, 1.0), (z, -1.0)], Sense::Eq, 0.0);
        m.add_constraint(RowTag::pair(RowCode::Type1, 0, 1), vec![(x, 1.0), (z, 1.0)], Sense::Ge, -1.0);
        let text = export_mps(&m).unwrap();
        let back = import_mps(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(export_mps(&back).unwrap(), text);
    }

    #[test]
    fn minimization_is_negated() {
        let text = "NAME t\nROWS\n N  COST\n L  c1\nCOLUMNS\n    x  COST  2  c1  1\nRHS\n    RHS  c1  4\nENDATA\n";
        let m = import_mps(text).unwrap();
        assert_eq!(m.objective, vec![-2.0]);
        assert_eq!(m.constraints[0].rhs, 4.0);
    }

    #[test]
    fn duplicate_rows_rejected() {
        let text = "NAME t\nROWS\n N  OBJ\n L  c1\n L  c1\nENDATA\n";
        assert_eq!(import_mps(text), Err(Error::DuplicateRow("c1".into())));
    }
}
