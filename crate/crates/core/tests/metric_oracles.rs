mod common;

use common::oracle;
use proptest::prelude::*;
use tvlens_core::eval::{eval_person, eval_single_label};
use tvlens_core::parser::{InvalidReason, TaskValue};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn single_label_equals_confusion_matrix(items in prop::collection::vec((prop::option::weighted(0.85, 0u8..6), 0u8..6), 1..=30)) {
        let preds: Vec<Option<String>> = items.iter().map(|(p, _)| p.map(|p| format!("c{p}"))).collect();
        let golds: Vec<String> = items.iter().map(|(_, g)| format!("c{g}")).collect();
        let tv: Vec<_> = preds.iter().map(|p| p.clone().map_or(TaskValue::Invalid(InvalidReason::OutOfTaxonomy), TaskValue::Valid)).collect();
        let got = eval_single_label(&tv, &golds).unwrap();
        let want = oracle::single_label(&preds, &golds);
        prop_assert_eq!(got.weighted.accuracy, Some(want.accuracy));
        prop_assert_eq!((got.weighted.precision, got.weighted.recall.unwrap(), got.weighted.f1), want.weighted);
        prop_assert_eq!((got.macro_avg.precision, got.macro_avg.recall.unwrap(), got.macro_avg.f1), want.macro_avg);
    }

    #[test]
    fn person_equals_set_overlap(items in prop::collection::vec((prop::option::weighted(0.9, prop::collection::vec(0u8..6, 0..5)), prop::collection::vec(0u8..6, 0..5)), 1..=30)) {
        let pool = ["anna neri", "Bruno Verdi", "CARLO BLU", "dora  gialli", "Elio Rosa", "fabio grigi"];
        let names = |v: &Vec<u8>| v.iter().map(|&i| pool[i as usize].to_string()).collect::<Vec<_>>();
        let preds: Vec<Option<Vec<String>>> = items.iter().map(|(p, _)| p.as_ref().map(names)).collect();
        let golds: Vec<Vec<String>> = items.iter().map(|(_, g)| names(g)).collect();
        let tv: Vec<_> = preds.iter().map(|p| p.clone().map_or(TaskValue::Invalid(InvalidReason::NoJson), TaskValue::Valid)).collect();
        let got = eval_person(&tv, &golds).unwrap();
        let (acc, p, r) = oracle::person(&preds, &golds);
        prop_assert_eq!((got.accuracy, got.precision, got.recall), (Some(acc), p, r));
    }
}
