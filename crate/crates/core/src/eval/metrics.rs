use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::names::normalize_name;
use crate::parser::TaskValue;
use crate::taxonomy::label_key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Weighted,
    Macro,
    BinaryPositive,
    SetMicro,
}

/// Scores for one task. `None` marks an undefined metric (`--` in reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub support: usize,
    pub averaging: Averaging,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub(crate) fn harmonic(p: Option<f64>, r: Option<f64>) -> Option<f64> {
    let (p, r) = (p?, r?);
    Some(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
}

fn check_shape(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::ShapeError(a, b));
    }
    if a == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleLabelMetrics {
    /// Support-weighted averages; the headline numbers.
    pub weighted: TaskMetrics,
    /// Unweighted means over every class seen in gold or predictions.
    pub macro_avg: TaskMetrics,
}

#[derive(Default)]
struct ClassCounts {
    tp: usize,
    predicted: usize,
    gold: usize,
}

/// Accuracy and per-class precision/recall/F1 for single-label tasks.
///
/// An invalid prediction is always wrong and is counted as a prediction of
/// a reserved non-label class, so it lowers the recall of the gold class
/// without raising any real class's predicted count. A class with no
/// predictions contributes precision 0 to the averages. Precision and F1
/// are undefined only when no valid prediction exists at all.
pub fn eval_single_label(
    preds: &[TaskValue<String>],
    golds: &[String],
) -> Result<SingleLabelMetrics, EvalError> {
    check_shape(preds.len(), golds.len())?;
    let n = golds.len();
    // keyed by case-folded label so iteration order is deterministic
    let mut classes: BTreeMap<String, ClassCounts> = BTreeMap::new();
    let mut correct = 0usize;
    let mut valid = 0usize;
    for (pred, gold) in preds.iter().zip(golds) {
        let g = label_key(gold);
        classes.entry(g.clone()).or_default().gold += 1;
        if let TaskValue::Valid(p) = pred {
            valid += 1;
            let p = label_key(p);
            let entry = classes.entry(p.clone()).or_default();
            entry.predicted += 1;
            if p == g {
                entry.tp += 1;
                correct += 1;
            }
        }
    }

    let accuracy = ratio(correct, n);
    let mut w_p = 0.0;
    let mut w_r = 0.0;
    let mut w_f = 0.0;
    let mut m_p = 0.0;
    let mut m_r = 0.0;
    let mut m_f = 0.0;
    for c in classes.values() {
        let p = ratio(c.tp, c.predicted).unwrap_or(0.0);
        let r = ratio(c.tp, c.gold).unwrap_or(0.0);
        let f = harmonic(Some(p), Some(r)).unwrap_or(0.0);
        let w = c.gold as f64 / n as f64;
        w_p += w * p;
        w_r += w * r;
        w_f += w * f;
        m_p += p;
        m_r += r;
        m_f += f;
    }
    let k = classes.len() as f64;
    let any_valid = valid > 0;
    let weighted = TaskMetrics {
        accuracy,
        precision: any_valid.then_some(w_p),
        recall: Some(w_r),
        f1: any_valid.then_some(w_f),
        support: n,
        averaging: Averaging::Weighted,
    };
    let macro_avg = TaskMetrics {
        accuracy,
        precision: any_valid.then_some(m_p / k),
        recall: Some(m_r / k),
        f1: any_valid.then_some(m_f / k),
        support: n,
        averaging: Averaging::Macro,
    };
    Ok(SingleLabelMetrics { weighted, macro_avg })
}

/// Matching key for person names: canonical form, case-folded.
pub fn person_key(raw: &str) -> Option<String> {
    normalize_name(raw).ok().map(|n| n.to_lowercase())
}

fn person_set(names: &[String]) -> BTreeSet<String> {
    names.iter().filter_map(|n| person_key(n)).collect()
}

/// Micro-averaged set overlap for person recognition.
///
/// Accuracy is the exact-set-match rate. An invalid prediction is an empty
/// set that never counts as an exact match.
pub fn eval_person(
    preds: &[TaskValue<Vec<String>>],
    golds: &[Vec<String>],
) -> Result<TaskMetrics, EvalError> {
    check_shape(preds.len(), golds.len())?;
    let mut exact = 0usize;
    let mut overlap = 0usize;
    let mut predicted = 0usize;
    let mut gold_total = 0usize;
    for (pred, gold) in preds.iter().zip(golds) {
        let g = person_set(gold);
        gold_total += g.len();
        match pred {
            TaskValue::Valid(names) => {
                let p = person_set(names);
                predicted += p.len();
                overlap += p.intersection(&g).count();
                if p == g {
                    exact += 1;
                }
            }
            TaskValue::Invalid(_) => {}
        }
    }
    let precision = ratio(overlap, predicted);
    let recall = ratio(overlap, gold_total);
    Ok(TaskMetrics {
        accuracy: ratio(exact, golds.len()),
        precision,
        recall,
        f1: harmonic(precision, recall),
        support: golds.len(),
        averaging: Averaging::SetMicro,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitiveMetrics {
    pub binary: TaskMetrics,
    /// Share of true positives whose predicted category matches gold.
    pub category_match_rate: Option<f64>,
}

/// Binary sensitive-content scoring: positive iff the list is non-empty.
///
/// Invalid predictions count as the wrong binary answer.
pub fn eval_sensitive(
    preds: &[TaskValue<Vec<String>>],
    golds: &[Vec<String>],
) -> Result<SensitiveMetrics, EvalError> {
    check_shape(preds.len(), golds.len())?;
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    let mut category_hits = 0usize;
    for (pred, gold) in preds.iter().zip(golds) {
        let gold_pos = !gold.is_empty();
        match pred {
            TaskValue::Valid(labels) => {
                let pred_pos = !labels.is_empty();
                match (pred_pos, gold_pos) {
                    (true, true) => {
                        tp += 1;
                        let a: BTreeSet<String> = labels.iter().map(|l| label_key(l)).collect();
                        let b: BTreeSet<String> = gold.iter().map(|l| label_key(l)).collect();
                        if a == b {
                            category_hits += 1;
                        }
                    }
                    (true, false) => fp += 1,
                    (false, true) => fneg += 1,
                    (false, false) => tn += 1,
                }
            }
            TaskValue::Invalid(_) if gold_pos => fneg += 1,
            TaskValue::Invalid(_) => fp += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    Ok(SensitiveMetrics {
        binary: TaskMetrics {
            accuracy: ratio(tp + tn, golds.len()),
            precision,
            recall,
            f1: harmonic(precision, recall),
            support: golds.len(),
            averaging: Averaging::BinaryPositive,
        },
        category_match_rate: ratio(category_hits, tp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::InvalidReason;

    fn v(s: &str) -> TaskValue<String> {
        TaskValue::Valid(s.to_string())
    }

    fn strs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_single_label() {
        let golds = strs(&["A", "B", "C"]);
        let preds: Vec<_> = golds.iter().map(|g| v(g)).collect();
        let m = eval_single_label(&preds, &golds).unwrap().weighted;
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.f1, Some(1.0));
    }

    #[test]
    fn three_class_hand_check() {
        // golds A A B C, preds A B B C
        // A: tp1 pred1 gold2 -> P1 R.5 F 2/3
        // B: tp1 pred2 gold1 -> P.5 R1 F 2/3
        // C: tp1 pred1 gold1 -> 1 1 1
        let m = eval_single_label(&[v("A"), v("B"), v("B"), v("C")], &strs(&["A", "A", "B", "C"])).unwrap();
        let w = m.weighted;
        assert_eq!(w.accuracy, Some(0.75));
        assert!((w.precision.unwrap() - (0.5 * 1.0 + 0.25 * 0.5 + 0.25 * 1.0)).abs() < 1e-12);
        assert!((w.recall.unwrap() - 0.75).abs() < 1e-12);
        assert!((w.f1.unwrap() - (0.5 * 2.0 / 3.0 + 0.25 * 2.0 / 3.0 + 0.25)).abs() < 1e-12);
        assert!((m.macro_avg.precision.unwrap() - 2.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_counts_as_incorrect() {
        let mut preds = vec![v("A"), v("B"), v("C"), v("D")];
        preds.push(TaskValue::Invalid(InvalidReason::OutOfTaxonomy));
        let m = eval_single_label(&preds, &strs(&["A", "B", "C", "D", "E"])).unwrap();
        assert_eq!(m.weighted.accuracy, Some(0.8));
    }

    #[test]
    fn all_invalid_has_undefined_precision() {
        let preds = vec![TaskValue::<String>::Invalid(InvalidReason::NoJson); 3];
        let m = eval_single_label(&preds, &strs(&["A", "B", "A"])).unwrap().weighted;
        assert_eq!(m.accuracy, Some(0.0));
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
    }

    #[test]
    fn degenerate_constant_predictor_matches_appendix_pattern() {
        // 10 of 100 gold X, always predict X: Acc .10, weighted P .01
        let mut golds = vec!["X".to_string(); 10];
        golds.extend((0..90).map(|i| format!("Y{}", i % 9)));
        let preds = vec![v("X"); 100];
        let w = eval_single_label(&preds, &golds).unwrap().weighted;
        assert!((w.accuracy.unwrap() - 0.10).abs() < 1e-12);
        assert!((w.precision.unwrap() - 0.01).abs() < 1e-12);
        assert!((w.recall.unwrap() - 0.10).abs() < 1e-12);
        assert!((w.f1.unwrap() - 0.1 * (2.0 * 0.1 / 1.1)).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(eval_single_label(&[v("A")], &[]), Err(EvalError::ShapeError(1, 0))));
        assert!(matches!(eval_person(&[], &[]), Err(EvalError::Empty)));
    }

    #[test]
    fn person_examples() {
        let empty = eval_person(&vec![TaskValue::Valid(vec![]); 3], &[vec![], vec![], vec![]]).unwrap();
        assert_eq!(empty.accuracy, Some(1.0));
        assert_eq!((empty.precision, empty.recall), (None, None));

        let m = eval_person(
            &[TaskValue::Valid(strs(&["Anna Neri", "Carlo Blu"]))],
            &[strs(&["anna neri", "Bruno Verdi"])],
        )
        .unwrap();
        assert_eq!((m.precision, m.recall, m.accuracy), (Some(0.5), Some(0.5), Some(0.0)));

        let m = eval_person(&[TaskValue::Valid(strs(&["A A", "B B", "C C", "D D"]))], &[strs(&["A A"])]).unwrap();
        assert_eq!(m.precision, Some(0.25));
        assert_eq!(m.recall, Some(1.0));
    }

    #[test]
    fn person_invalid_is_never_exact() {
        let m = eval_person(&[TaskValue::Invalid(InvalidReason::NoJson)], &[vec![]]).unwrap();
        assert_eq!(m.accuracy, Some(0.0));
    }

    fn sensitive_set(positives: usize, n: usize) -> Vec<Vec<String>> {
        (0..n).map(|i| if i < positives { strs(&["Violence"]) } else { vec![] }).collect()
    }

    #[test]
    fn always_negative_prevalence() {
        let golds = sensitive_set(12, 100);
        let m = eval_sensitive(&vec![TaskValue::Valid(vec![]); 100], &golds).unwrap().binary;
        assert_eq!(m.accuracy, Some(0.88));
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
    }

    #[test]
    fn always_positive_and_perfect() {
        let golds = sensitive_set(12, 100);
        let m = eval_sensitive(&vec![TaskValue::Valid(strs(&["Violence"])); 100], &golds).unwrap();
        assert_eq!(m.binary.accuracy, Some(0.12));
        assert_eq!(m.binary.recall, Some(1.0));
        assert_eq!(m.binary.precision, Some(0.12));
        assert_eq!(m.category_match_rate, Some(1.0));

        let perfect: Vec<_> = golds.iter().cloned().map(TaskValue::Valid).collect();
        let m = eval_sensitive(&perfect, &golds).unwrap().binary;
        assert_eq!((m.accuracy, m.f1), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn category_mismatch_among_true_positives() {
        let m = eval_sensitive(
            &[TaskValue::Valid(strs(&["Blood"])), TaskValue::Valid(strs(&["violence"]))],
            &[strs(&["Violence"]), strs(&["Violence"])],
        )
        .unwrap();
        assert_eq!(m.binary.precision, Some(1.0));
        assert_eq!(m.category_match_rate, Some(0.5));
    }
}
