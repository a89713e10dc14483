//! Free-format MPS writer and a reader for the subset it emits.
//!
//! Binary columns sit between `INTORG`/`INTEND` markers with an explicit
//! upper bound of 1; free columns carry an `FR` bound. Output is
//! deterministic: rows and columns follow model order and numbers use the
//! shortest representation that round-trips.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::milp::{MilpModel, Sense};

const OBJECTIVE_ROW: &str = "obj";

fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".to_string()
    } else if (1e-5..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn sense_code(s: Sense) -> char {
    match s {
        Sense::Le => 'L',
        Sense::Eq => 'E',
        Sense::Ge => 'G',
    }
}

/// Writes `model` in free MPS format. The objective constant is not
/// representable and is omitted.
pub fn write_mps<W: Write>(model: &MilpModel, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    let rows: Vec<String> = model.constraints.iter().map(|c| c.tag.name()).collect();
    let n = model.num_variables();

    // Column-major view of the constraint matrix.
    let mut start = vec![0usize; n + 1];
    for row in &model.constraints {
        for &(c, _) in &row.coefficients {
            start[c + 1] += 1;
        }
    }
    for c in 0..n {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut entries = vec![(0u32, 0.0f64); start[n]];
    for (r, row) in model.constraints.iter().enumerate() {
        for &(c, a) in &row.coefficients {
            entries[fill[c]] = (r as u32, a);
            fill[c] += 1;
        }
    }
    let mut objective = vec![0.0; n];
    for &(c, a) in &model.objective {
        objective[c] += a;
    }

    writeln!(out, "NAME {}", model.name)?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N {OBJECTIVE_ROW}")?;
    for (row, name) in model.constraints.iter().zip(&rows) {
        writeln!(out, " {} {name}", sense_code(row.sense))?;
    }
    writeln!(out, "COLUMNS")?;
    let mut in_integer = false;
    let mut markers = 0;
    let mut line = String::new();
    for (c, kind) in model.variables.iter().enumerate() {
        if kind.is_binary() != in_integer {
            let tag = if in_integer { "INTEND" } else { "INTORG" };
            writeln!(out, "    M{markers} 'MARKER' '{tag}'")?;
            markers += 1;
            in_integer = !in_integer;
        }
        let name = kind.name();
        let col = &entries[start[c]..start[c + 1]];
        if objective[c] != 0.0 || col.is_empty() {
            writeln!(out, "    {name} {OBJECTIVE_ROW} {}", number(objective[c]))?;
        }
        for &(r, a) in col {
            line.clear();
            let _ = write!(line, "    {name} {} {}", rows[r as usize], number(a));
            writeln!(out, "{line}")?;
        }
    }
    if in_integer {
        writeln!(out, "    M{markers} 'MARKER' 'INTEND'")?;
    }
    writeln!(out, "RHS")?;
    for (row, name) in model.constraints.iter().zip(&rows) {
        if row.rhs != 0.0 {
            writeln!(out, "    rhs {name} {}", number(row.rhs))?;
        }
    }
    writeln!(out, "BOUNDS")?;
    for (c, kind) in model.variables.iter().enumerate() {
        let (lo, hi) = model.bounds(c);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " FR bnd {}", kind.name())?;
        } else if hi.is_finite() {
            writeln!(out, " UP bnd {} {}", kind.name(), number(hi))?;
        }
    }
    writeln!(out, "ENDATA")?;
    out.flush()
}

pub fn to_mps_string(model: &MilpModel) -> String {
    let mut buf = Vec::new();
    write_mps(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("MPS output is ASCII")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsRow {
    pub name: String,
    pub sense: Sense,
    pub coefficients: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsColumn {
    pub name: String,
    pub integer: bool,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub rows: Vec<MpsRow>,
    pub columns: Vec<MpsColumn>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Parses free MPS with `N`/`L`/`E`/`G` rows, integer markers, `RHS` and
/// `UP`/`LO`/`FX`/`FR`/`MI`/`BV` bounds. `RANGES` is rejected.
pub fn read_mps(text: &str) -> Result<MpsModel, String> {
    let mut section = Section::Start;
    let mut name = String::new();
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<MpsRow> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut columns: Vec<MpsColumn> = Vec::new();
    let mut column_index: HashMap<String, usize> = HashMap::new();
    let mut integer = false;

    let parse = |s: &str, line: usize| {
        s.parse::<f64>()
            .map_err(|_| format!("line {line}: bad number {s:?}"))
    };

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match fields[0] {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(format!("line {line_no}: unsupported section {other}")),
            };
            continue;
        }
        match section {
            Section::Rows => {
                let [kind, row] = fields[..] else {
                    return Err(format!("line {line_no}: malformed row"));
                };
                let sense = match kind {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(row.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    other => return Err(format!("line {line_no}: unknown row type {other}")),
                };
                row_index.insert(row.to_string(), rows.len());
                rows.push(MpsRow {
                    name: row.to_string(),
                    sense,
                    coefficients: Vec::new(),
                    rhs: 0.0,
                });
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1] == "'MARKER'" {
                    integer = match fields[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(format!("line {line_no}: unknown marker {other}")),
                    };
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(format!("line {line_no}: malformed column entry"));
                }
                let col = *column_index
                    .entry(fields[0].to_string())
                    .or_insert_with(|| {
                        columns.push(MpsColumn {
                            name: fields[0].to_string(),
                            integer,
                            lower: 0.0,
                            upper: f64::INFINITY,
                            objective: 0.0,
                        });
                        columns.len() - 1
                    });
                for pair in fields[1..].chunks(2) {
                    let value = parse(pair[1], line_no)?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        columns[col].objective += value;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| format!("line {line_no}: unknown row {}", pair[0]))?;
                        rows[r].coefficients.push((col, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(format!("line {line_no}: malformed rhs entry"));
                }
                for pair in fields[1..].chunks(2) {
                    let value = parse(pair[1], line_no)?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        continue;
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| format!("line {line_no}: unknown row {}", pair[0]))?;
                    rows[r].rhs = value;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(format!("line {line_no}: malformed bound"));
                }
                let col = *column_index
                    .get(fields[2])
                    .ok_or_else(|| format!("line {line_no}: unknown column {}", fields[2]))?;
                let value = fields.get(3).map(|v| parse(v, line_no)).transpose()?;
                let need = || value.ok_or_else(|| format!("line {line_no}: bound needs a value"));
                let c = &mut columns[col];
                match fields[0] {
                    "UP" => c.upper = need()?,
                    "LO" => c.lower = need()?,
                    "FX" => {
                        c.lower = need()?;
                        c.upper = c.lower;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "BV" => {
                        c.integer = true;
                        c.lower = 0.0;
                        c.upper = 1.0;
                    }
                    other => return Err(format!("line {line_no}: unsupported bound type {other}")),
                }
            }
            Section::Start | Section::End => {
                return Err(format!("line {line_no}: data outside a section"))
            }
        }
    }
    if section != Section::End {
        return Err("missing ENDATA".to_string());
    }
    Ok(MpsModel {
        name,
        rows,
        columns,
    })
}
