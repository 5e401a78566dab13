//! Column layout of the "Predict Students' Dropout and Academic Success"
//! export, after snake_case normalisation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    IntegerCode,
    Real,
    Text,
}

/// Integer-coded columns, one-hot encoded downstream.
pub const CATEGORICAL_FIELDS: [&str; 29] = [
    "marital_status",
    "application_mode",
    "application_order",
    "course",
    "daytime_evening_attendance",
    "previous_qualification",
    "nacionality",
    "mothers_qualification",
    "fathers_qualification",
    "mothers_occupation",
    "fathers_occupation",
    "displaced",
    "educational_special_needs",
    "debtor",
    "tuition_fees_up_to_date",
    "gender",
    "scholarship_holder",
    "age_at_enrollment",
    "international",
    "curricular_units_1st_sem_credited",
    "curricular_units_1st_sem_enrolled",
    "curricular_units_1st_sem_evaluations",
    "curricular_units_1st_sem_approved",
    "curricular_units_1st_sem_without_evaluations",
    "curricular_units_2nd_sem_credited",
    "curricular_units_2nd_sem_enrolled",
    "curricular_units_2nd_sem_evaluations",
    "curricular_units_2nd_sem_approved",
    "curricular_units_2nd_sem_without_evaluations",
];

/// Real-valued student-level columns.
pub const NUMERIC_FIELDS: [&str; 5] = [
    "previous_qualification_grade",
    "admission_grade",
    "curricular_units_1st_sem_grade",
    "curricular_units_2nd_sem_grade",
    "unemployment_rate",
];

/// Macro-economic indicators for the enrolment year.
pub const MACRO_FIELDS: [&str; 2] = ["inflation_rate", "gdp"];

pub const TARGET_FIELD: &str = "target";

/// Optional columns recognised when present.
pub const ID_FIELDS: [&str; 2] = ["id", "student_id"];
pub const TERM_FIELD: &str = "term";
pub const COMMENT_FIELDS: [&str; 2] = ["student_comment", "comment"];

/// Ordered field name -> declared kind mapping for the 36 data columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub fields: Vec<(String, FieldKind)>,
}

impl Schema {
    pub fn uci() -> Self {
        let mut fields: Vec<(String, FieldKind)> = Vec::with_capacity(36);
        fields.extend(
            CATEGORICAL_FIELDS
                .iter()
                .map(|f| (f.to_string(), FieldKind::IntegerCode)),
        );
        fields.extend(NUMERIC_FIELDS.iter().map(|f| (f.to_string(), FieldKind::Real)));
        fields.extend(MACRO_FIELDS.iter().map(|f| (f.to_string(), FieldKind::Real)));
        Self { fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(n, _)| n == name)
    }
}

/// Lower-case, drop apostrophes, map every other non-alphanumeric run to a
/// single underscore and trim underscores at both ends.
///
/// `"Mother's qualification"` -> `mothers_qualification`,
/// `"Daytime/evening attendance\t"` -> `daytime_evening_attendance`.
pub fn snake_case(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for ch in raw.trim_start_matches('\u{feff}').chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uci_schema_has_36_columns() {
        let s = Schema::uci();
        assert_eq!(s.len(), 36);
        let ints = s
            .fields
            .iter()
            .filter(|(_, k)| *k == FieldKind::IntegerCode)
            .count();
        assert_eq!(ints, 29);
    }

    #[test]
    fn snake_case_handles_uci_headers() {
        assert_eq!(snake_case("Mother's qualification"), "mothers_qualification");
        assert_eq!(
            snake_case("Daytime/evening attendance\t"),
            "daytime_evening_attendance"
        );
        assert_eq!(
            snake_case("Curricular units 1st sem (without evaluations)"),
            "curricular_units_1st_sem_without_evaluations"
        );
        assert_eq!(snake_case("GDP"), "gdp");
        assert_eq!(snake_case("\u{feff}Marital status"), "marital_status");
        assert_eq!(snake_case("already_snake"), "already_snake");
    }
}
