use std::collections::HashSet;

use super::schema::{CATEGORICAL_FIELDS, MACRO_FIELDS, NUMERIC_FIELDS};
use super::{missing_rates, Cell, CleanCohort, Code, Comment, RawCohort, StudentRecord};
use crate::util::{fnv1a64, median};
use crate::{Error, Result};

/// Converts raw rows to typed records, normalises comment text and drops
/// repeated (hashed id, term) pairs, keeping the first occurrence.
///
/// Rows without an explicit id get the hash of their 0-based data-row index.
pub fn clean_and_dedupe(raw: RawCohort) -> CleanCohort {
    let n_cat = CATEGORICAL_FIELDS.len();
    let n_num = NUMERIC_FIELDS.len();
    let position = |name: &str| raw.schema.position(name);
    let cat_pos: Vec<Option<usize>> = CATEGORICAL_FIELDS.iter().map(|f| position(f)).collect();
    let num_pos: Vec<Option<usize>> = NUMERIC_FIELDS.iter().map(|f| position(f)).collect();
    let mac_pos: Vec<Option<usize>> = MACRO_FIELDS.iter().map(|f| position(f)).collect();

    let rows = raw
        .rows
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            let id = match r.id {
                Some(explicit) => format!("{:016x}", fnv1a64(explicit.as_bytes())),
                None => format!("{:016x}", fnv1a64(&(index as u64).to_le_bytes())),
            };
            let code_at = |p: Option<usize>| match p.map(|p| r.cells[p]) {
                Some(Cell::Int(v)) => Code::Level(v),
                Some(Cell::Real(v)) if v.fract() == 0.0 => Code::Level(v as i64),
                _ => Code::Missing,
            };
            let real_at = |p: Option<usize>| match p.map(|p| r.cells[p]) {
                Some(Cell::Real(v)) => Some(v),
                Some(Cell::Int(v)) => Some(v as f64),
                _ => None,
            };
            let mut codes = Vec::with_capacity(n_cat);
            codes.extend(cat_pos.iter().map(|&p| code_at(p)));
            let mut numeric = Vec::with_capacity(n_num);
            numeric.extend(num_pos.iter().map(|&p| real_at(p)));
            let macro_indicators = mac_pos.iter().map(|&p| real_at(p)).collect();
            let comments = r
                .comment
                .map(|c| clean_text(&c))
                .filter(|c| !c.is_empty())
                .map(|text| {
                    vec![Comment {
                        text,
                        age_days: 0,
                        provenance: None,
                    }]
                })
                .unwrap_or_default();
            StudentRecord {
                id,
                term: r.term.unwrap_or_else(|| "0".into()),
                codes,
                numeric,
                macro_indicators,
                label: r.target,
                comments,
                days_since_last_grade: None,
                synthetic: false,
            }
        })
        .collect();
    dedupe(CleanCohort::new(rows))
}

/// Removes later rows whose (id, term) pair was already seen.
pub fn dedupe(cohort: CleanCohort) -> CleanCohort {
    let before = cohort.rows.len();
    let mut seen = HashSet::with_capacity(before);
    let rows: Vec<StudentRecord> = cohort
        .rows
        .into_iter()
        .filter(|r| seen.insert((r.id.clone(), r.term.clone())))
        .collect();
    let removed = before - rows.len();
    let (num, cat) = missing_rates(&rows);
    CleanCohort {
        rows,
        duplicates_removed: cohort.duplicates_removed + removed,
        missing_numeric_rate: num,
        missing_categorical_rate: cat,
    }
}

/// Lower-cases, strips HTML tags and URLs, and collapses whitespace.
pub fn clean_text(raw: &str) -> String {
    let without_tags = strip_tags(raw);
    let mut out = String::with_capacity(without_tags.len());
    for token in without_tags.split_whitespace() {
        let lower = token.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&lower);
    }
    out
}

/// Removes `<...>` spans that look like tags: `<` followed by a letter, `/`
/// or `!`, up to the next `>`. A `<` with no closing `>` is kept verbatim.
fn strip_tags(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '<' {
            let opens_tag = chars
                .get(i + 1)
                .is_some_and(|n| n.is_ascii_alphabetic() || *n == '/' || *n == '!');
            if opens_tag {
                if let Some(end) = chars[i + 1..].iter().position(|&ch| ch == '>') {
                    i += end + 2;
                    continue;
                }
            }
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Median-imputes numeric gaps and maps categorical gaps to `Unknown`.
pub fn impute(mut cohort: CleanCohort) -> Result<CleanCohort> {
    if cohort.rows.is_empty() {
        return Ok(cohort);
    }
    let medians = |get: &dyn Fn(&StudentRecord) -> &Vec<Option<f64>>, names: &[&str]| {
        (0..names.len())
            .map(|j| {
                let observed: Vec<f64> = cohort.rows.iter().filter_map(|r| get(r)[j]).collect();
                median(&observed).ok_or_else(|| Error::AllMissingColumn(names[j].to_string()))
            })
            .collect::<Result<Vec<f64>>>()
    };
    let num_medians = medians(&|r| &r.numeric, &NUMERIC_FIELDS)?;
    let mac_medians = medians(&|r| &r.macro_indicators, &MACRO_FIELDS)?;
    for r in &mut cohort.rows {
        for (v, m) in r.numeric.iter_mut().zip(&num_medians) {
            v.get_or_insert(*m);
        }
        for (v, m) in r.macro_indicators.iter_mut().zip(&mac_medians) {
            v.get_or_insert(*m);
        }
        for c in &mut r.codes {
            if *c == Code::Missing {
                *c = Code::Unknown;
            }
        }
    }
    Ok(cohort)
}
