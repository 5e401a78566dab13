use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::CleanCohort;
use crate::util::sub_rng;
use crate::{Error, Result};

const STREAM_SPLIT: u64 = 0x5B_117;

/// Row indices into the cohort the plan was drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub train_histogram: [usize; 3],
    pub test_histogram: [usize; 3],
}

/// Per-class holdout of `round(n_c * test_frac)` rows. Each class is sorted
/// by id and then shuffled with a stream keyed by `(seed, class)`, so the
/// result does not depend on input row order.
pub fn stratified_split(cohort: &CleanCohort, test_frac: f64, seed: u64) -> Result<SplitPlan> {
    if !(0.0..=1.0).contains(&test_frac) {
        return Err(Error::InvalidConfig(format!("test_frac {test_frac} outside [0, 1]")));
    }
    let mut by_class: [Vec<usize>; 3] = Default::default();
    for (i, r) in cohort.rows.iter().enumerate() {
        by_class[r.label.index()].push(i);
    }
    let mut plan = SplitPlan {
        train: Vec::new(),
        test: Vec::new(),
        train_histogram: [0; 3],
        test_histogram: [0; 3],
    };
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.len() == 1 {
            return Err(Error::ClassTooSmall { class, count: 1 });
        }
        members.sort_by(|a, b| {
            let (ra, rb) = (&cohort.rows[*a], &cohort.rows[*b]);
            (&ra.id, &ra.term).cmp(&(&rb.id, &rb.term))
        });
        members.shuffle(&mut sub_rng(seed, STREAM_SPLIT, class as u64));
        let n_test = (members.len() as f64 * test_frac).round() as usize;
        plan.test.extend_from_slice(&members[..n_test]);
        plan.train.extend_from_slice(&members[n_test..]);
        plan.test_histogram[class] = n_test;
        plan.train_histogram[class] = members.len() - n_test;
    }
    plan.train.sort_unstable();
    plan.test.sort_unstable();
    Ok(plan)
}

impl SplitPlan {
    pub fn select(&self, cohort: &CleanCohort, test: bool) -> CleanCohort {
        let idx = if test { &self.test } else { &self.train };
        CleanCohort::new(idx.iter().map(|&i| cohort.rows[i].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Code, Outcome, StudentRecord};

    fn cohort(labels: &[usize]) -> CleanCohort {
        CleanCohort::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| StudentRecord {
                    id: format!("{i:04}"),
                    term: "0".into(),
                    codes: vec![Code::Level(1); 29],
                    numeric: vec![Some(0.0); 5],
                    macro_indicators: vec![Some(0.0); 2],
                    label: Outcome::ALL[*l],
                    comments: vec![],
                    days_since_last_grade: Some(0),
                    synthetic: false,
                })
                .collect(),
        )
    }

    #[test]
    fn ten_rows_one_class() {
        let p = stratified_split(&cohort(&[0; 10]), 0.2, 1).unwrap();
        assert_eq!(p.test.len(), 2);
        assert_eq!(p.train.len(), 8);
    }

    #[test]
    fn singleton_class_rejected() {
        let e = stratified_split(&cohort(&[0, 0, 0, 1]), 0.2, 1).unwrap_err();
        assert!(matches!(e, Error::ClassTooSmall { count: 1, .. }));
    }

    #[test]
    fn disjoint_cover() {
        let labels: Vec<usize> = (0..97).map(|i| (i * 7) % 3).collect();
        let p = stratified_split(&cohort(&labels), 0.2, 9).unwrap();
        let mut all: Vec<usize> = p.train.iter().chain(&p.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..97).collect::<Vec<_>>());
    }
}
