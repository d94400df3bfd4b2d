mod common;

use std::collections::{BTreeMap, HashMap};

use common::round2_reference;
use numina_core::eval::{
    extract_answer, score_dataset, score_ni, selfcheck, within_threshold, ParsedAnswer, PredictionRecord,
};
use numina_core::qa::{
    balanced_letters, builtin_bank, display_value, generate_rule_records, GenConfig, QaError, Targets, LETTERS,
};
use numina_core::scene::generate_synthetic_scene;
use numina_core::scene::synthetic::random_layout;
use numina_core::seed::rng_for;
use numina_core::{extract_ngt, LabelFilter, NgtTable, QaRecord, Task};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tables(seed: u64, scenes: usize, instances: usize) -> Vec<NgtTable> {
    (0..scenes)
        .map(|i| {
            let id = format!("p{seed}-{i}");
            let spec = random_layout(&id, instances, &mut rng_for(seed, &id));
            let (scene, _) = generate_synthetic_scene(&spec, seed).unwrap();
            extract_ngt(&scene, &LabelFilter::new(["item", "object"]), 1e-9).unwrap()
        })
        .collect()
}

/// Rule records, or `None` when the random layout cannot meet the targets
/// (small rooms often have every label exactly once).
fn generate(t: &[NgtTable], cfg: &GenConfig) -> Option<Vec<QaRecord>> {
    match generate_rule_records(t, &builtin_bank(), cfg) {
        Ok(r) => Some(r),
        Err(QaError::InsufficientCandidates(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_matches_decimal_reference(cents in 0u64..10_000_000, extra in 0u32..1000) {
        // Values with up to five fractional digits, including exact midpoints.
        let v = (cents as f64 * 1000.0 + extra as f64) / 100_000.0;
        prop_assert_eq!(display_value(v), round2_reference(v));
    }

    #[test]
    fn display_of_two_decimal_values_is_identity(cents in 0u64..100_000_000) {
        let v = cents as f64 / 100.0;
        let shown: f64 = display_value(v).parse().unwrap();
        prop_assert_eq!(shown, v);
    }

    #[test]
    fn threshold_hits_are_monotone_and_scale_free(
        gt in 0.001f64..1e4,
        ratio in 0.0f64..3.0,
        scale in 0.01f64..100.0,
    ) {
        let pred = gt * ratio;
        let mut prev = false;
        for t in [0.05, 0.10, 0.20, 0.5] {
            let hit = within_threshold(pred, gt, t);
            prop_assert!(hit || !prev);
            prev = hit;
        }
        // Exact multiples of the threshold sit on the boundary and must miss.
        prop_assert!(!within_threshold(gt * 1.25, gt, 0.0625) || gt * 1.25 - gt < 0.0625 * gt);
        let a = within_threshold(pred, gt, 0.1);
        let b = within_threshold(pred * scale, gt * scale, 0.1);
        let margin = ((pred - gt).abs() - 0.1 * gt).abs() / gt;
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn balanced_letters_are_within_one(n in 0usize..2000, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let letters = balanced_letters(n, &mut rng);
        prop_assert_eq!(letters.len(), n);
        let mut counts: BTreeMap<char, usize> = LETTERS.iter().map(|l| (*l, 0)).collect();
        for l in letters {
            *counts.get_mut(&l).unwrap() += 1;
        }
        let expected = n as f64 / 5.0;
        prop_assert!(counts.values().all(|c| (*c as f64 - expected).abs() <= 1.0));
    }

    #[test]
    fn extraction_takes_first_token(prefix in "[ a-z]{0,12}", word in prop::sample::select(vec!["yes", "No", "YES", "no"])) {
        let raw = format!("{prefix} {word}, then maybe yes or no.");
        let want = word.eq_ignore_ascii_case("yes");
        let got = extract_answer(Task::FV, &raw);
        // A prefix can only contain lowercase words; it hides the answer only
        // when it spells yes/no itself.
        let hidden = prefix.split_whitespace().any(|w| w == "yes" || w == "no");
        if !hidden {
            prop_assert_eq!(got, ParsedAnswer::YesNo(want));
        }
    }

    #[test]
    fn numeric_extraction_round_trips(v in 0.0f64..1e6) {
        let shown = display_value(v);
        let raw = format!("The distance is {shown} meters.");
        prop_assert_eq!(extract_answer(Task::NI, &raw), ParsedAnswer::Numeric(shown.parse().unwrap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generated_datasets_pass_selfcheck(seed in 0u64..1000) {
        let t = tables(seed, 3, 16);
        let cfg = GenConfig { targets: Targets::uniform(12), seed, ..Default::default() };
        let records = generate(&t, &cfg);
        prop_assume!(records.is_some());
        let records = records.unwrap();
        let report = selfcheck(&records, &builtin_bank());
        prop_assert!(report.passed, "{:?}", report.problems);

        // The cp link is an involution on every FV record.
        let by_id: HashMap<&str, &QaRecord> = records.iter().map(|r| (r.qa_id.as_str(), r)).collect();
        for r in records.iter().filter(|r| r.cp_link.is_some()) {
            let partner = by_id[r.cp_link.as_deref().unwrap()];
            prop_assert_eq!(partner.cp_link.as_deref(), Some(r.qa_id.as_str()));
        }
    }

    #[test]
    fn generation_is_seed_deterministic(seed in 0u64..1000) {
        let t = tables(seed, 3, 24);
        let cfg = GenConfig { targets: Targets::uniform(8), seed, ..Default::default() };
        let mut reversed = t.clone();
        reversed.reverse();
        let a = format!("{:?}", generate_rule_records(&t, &builtin_bank(), &cfg));
        let b = format!("{:?}", generate_rule_records(&reversed, &builtin_bank(), &cfg));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn perturbed_numeric_predictions_score_below_one(seed in 0u64..1000) {
        let t = tables(seed, 3, 24);
        let cfg = GenConfig { targets: Targets::uniform(8), seed, ..Default::default() };
        let records = generate(&t, &cfg);
        prop_assume!(records.is_some());
        let records: Vec<QaRecord> = records
            .unwrap()
            .into_iter()
            .filter(|r| r.task == Task::NI && r.gt_value.is_some_and(|g| g > 0.0))
            .collect();
        let preds: HashMap<String, String> = records
            .iter()
            .map(|r| (r.qa_id.clone(), format!("{}", r.gt_value.unwrap() * 1.3)))
            .collect();
        let ta = score_ni(&records, &preds, &[0.05, 0.10, 0.20]);
        prop_assert!(ta.iter().all(|v| *v == 0.0), "{ta:?}");

        let exact: Vec<PredictionRecord> = records
            .iter()
            .map(|r| PredictionRecord { qa_id: r.qa_id.clone(), raw_output: r.answer.clone() })
            .collect();
        let rep = score_dataset(&records, &exact).unwrap();
        prop_assert!(rep.strata.iter().all(|s| s.ta.as_ref().unwrap().values().all(|v| *v == 1.0)));
    }
}
