use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use super::schema::{snake_case, COMMENT_FIELDS, ID_FIELDS, TARGET_FIELD, TERM_FIELD};
use super::{Cell, FieldKind, Outcome, RawCohort, RawRecord, Schema};
use crate::{Error, Result};

/// Loads a cohort CSV. Columns are matched by normalised name, so their order
/// in the file does not matter. The UCI export uses `;` as separator; a
/// header line with semicolons and no commas switches the reader to `;`.
pub fn load_cohort(path: &Path, schema: &Schema) -> Result<RawCohort> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    load_cohort_from_reader(text.as_bytes(), schema)
        .map_err(|e| match e {
            Error::EmptyFile(_) => Error::EmptyFile(path.display().to_string()),
            other => other,
        })
}

pub fn load_cohort_from_reader<R: Read>(mut reader: R, schema: &Schema) -> Result<RawCohort> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile("<input>".into()));
    }
    let header_line = text.lines().next().unwrap_or_default();
    let delimiter = if !header_line.contains(',') && header_line.contains(';') {
        b';'
    } else {
        b','
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers: Vec<String> = rdr.headers()?.iter().map(snake_case).collect();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let mut columns = Vec::with_capacity(schema.len());
    for (name, _) in &schema.fields {
        columns.push(find(name).ok_or_else(|| Error::MissingColumn(name.clone()))?);
    }
    let target_col = find(TARGET_FIELD).ok_or_else(|| Error::MissingColumn(TARGET_FIELD.into()))?;
    let id_col = ID_FIELDS.iter().find_map(|f| find(f));
    let term_col = find(TERM_FIELD);
    let comment_col = COMMENT_FIELDS.iter().find_map(|f| find(f));

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::TypeMismatch {
                line: line as usize,
                column: "<row>".into(),
                value: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut cells = Vec::with_capacity(schema.len());
        for ((name, kind), &col) in schema.fields.iter().zip(&columns) {
            let raw = record.get(col).unwrap_or("");
            cells.push(parse_cell(raw, *kind).ok_or_else(|| Error::TypeMismatch {
                line: line as usize,
                column: name.clone(),
                value: raw.to_string(),
            })?);
        }
        let raw_target = record.get(target_col).unwrap_or("");
        let target = Outcome::parse(raw_target).ok_or_else(|| Error::TypeMismatch {
            line: line as usize,
            column: TARGET_FIELD.into(),
            value: raw_target.to_string(),
        })?;
        let opt = |c: Option<usize>| {
            c.and_then(|c| record.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };
        rows.push(RawRecord {
            line,
            id: opt(id_col),
            term: opt(term_col),
            cells,
            target,
            comment: opt(comment_col),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile("<input>".into()));
    }
    Ok(RawCohort {
        schema: schema.clone(),
        rows,
    })
}

fn is_missing(s: &str) -> bool {
    matches!(s, "" | "NA" | "N/A" | "na" | "NaN" | "nan" | "?" | "null")
}

fn parse_cell(raw: &str, kind: FieldKind) -> Option<Cell> {
    let s = raw.trim();
    if is_missing(s) {
        return Some(Cell::Missing);
    }
    match kind {
        FieldKind::IntegerCode => {
            if let Ok(v) = s.parse::<i64>() {
                return Some(Cell::Int(v));
            }
            // Integral floats such as "3.0" appear in some re-exports.
            let f = s.parse::<f64>().ok()?;
            (f.fract() == 0.0 && f.is_finite()).then_some(Cell::Int(f as i64))
        }
        FieldKind::Real => s
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .map(Cell::Real),
        FieldKind::Text => Some(Cell::Missing),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_schema() -> Schema {
        Schema {
            fields: vec![
                ("course".into(), FieldKind::IntegerCode),
                ("admission_grade".into(), FieldKind::Real),
            ],
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = load_cohort_from_reader("".as_bytes(), &tiny_schema()).unwrap_err();
        assert!(matches!(err, Error::EmptyFile(_)));
        let err = load_cohort_from_reader("Course,Admission grade,Target\n".as_bytes(), &tiny_schema())
            .unwrap_err();
        assert!(matches!(err, Error::EmptyFile(_)));
    }

    #[test]
    fn missing_column_is_reported() {
        let csv = "Course,Target\n1,Graduate\n";
        let err = load_cohort_from_reader(csv.as_bytes(), &tiny_schema()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "admission_grade"));
    }

    #[test]
    fn type_mismatch_carries_line_and_column() {
        let csv = "Course,Admission grade,Target\n1,120.5,Graduate\nabc,99,Dropout\n";
        let err = load_cohort_from_reader(csv.as_bytes(), &tiny_schema()).unwrap_err();
        match err {
            Error::TypeMismatch { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "course");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_order_does_not_matter() {
        let a = "Course,Admission grade,Target\n1,120.5,Graduate\n2,,Dropout\n";
        let b = "Target,Admission grade,Course\nGraduate,120.5,1\nDropout,,2\n";
        let ra = load_cohort_from_reader(a.as_bytes(), &tiny_schema()).unwrap();
        let rb = load_cohort_from_reader(b.as_bytes(), &tiny_schema()).unwrap();
        assert_eq!(ra.rows.len(), 2);
        for (x, y) in ra.rows.iter().zip(&rb.rows) {
            assert_eq!(x.cells, y.cells);
            assert_eq!(x.target, y.target);
        }
        assert_eq!(ra.rows[1].cells[1], Cell::Missing);
    }

    #[test]
    fn semicolon_export_is_accepted() {
        let csv = "Course;Admission grade;Target\n9500;127.3;Enrolled\n";
        let r = load_cohort_from_reader(csv.as_bytes(), &tiny_schema()).unwrap();
        assert_eq!(r.rows[0].cells, vec![Cell::Int(9500), Cell::Real(127.3)]);
        assert_eq!(r.rows[0].target, Outcome::Enrolled);
    }

    #[test]
    fn unknown_target_is_a_type_mismatch() {
        let csv = "Course,Admission grade,Target\n1,1,Transferred\n";
        let err = load_cohort_from_reader(csv.as_bytes(), &tiny_schema()).unwrap_err();
        assert!(matches!(err, Error::TypeMismatch { ref column, .. } if column == "target"));
    }
}
