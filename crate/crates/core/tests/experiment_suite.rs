//! End-to-end experiment checks: CSV round trips, report recovery of
//! generating parameters, and Monte Carlo power against the analytic
//! noncentral-t benchmark.

use preflab::experiments::io::{
    load_likert_records, load_spa_records, spa_records_to_csv, write_likert_records,
    write_spa_records,
};
use preflab::experiments::{
    comparison_report, exclude_annotators, power_analysis, synth_spa_records, AnnotatorMeta,
    Effect, ExperimentDesign, LikertRecord, ReportOptions,
};
use preflab::protocols::SpaEstimate;
use preflab_testkit::noncentral_t_power;

fn design(pairs: &[(&str, &str)], n_a: u32) -> ExperimentDesign {
    ExperimentDesign::new(
        5,
        n_a,
        5,
        pairs
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect(),
    )
    .unwrap()
}

#[test]
fn simulated_records_round_trip_bit_for_bit() {
    let comparisons = vec![
        ("sys_a".to_string(), "sys_b".to_string()),
        ("sys_b".to_string(), "sys_c".to_string()),
    ];
    let records = synth_spa_records(&comparisons, &[0.62, 0.55], 0.15, 40, 5, 11).unwrap();
    let dir = std::env::temp_dir().join("preflab_roundtrip_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spa.csv");
    write_spa_records(&path, &records).unwrap();
    let loaded = load_spa_records(&path).unwrap();
    assert_eq!(loaded.rows, records, "records survive the CSV wire format");
    assert_eq!(
        spa_records_to_csv(&loaded.rows),
        spa_records_to_csv(&records)
    );

    // Reports built from either side are identical.
    let d = design(&[("sys_a", "sys_b"), ("sys_b", "sys_c")], 40);
    let options = ReportOptions::default();
    let from_memory = comparison_report(&records, &[], &d, &options).unwrap();
    let from_disk = comparison_report(&loaded.rows, &[], &d, &options).unwrap();
    assert_eq!(from_memory, from_disk);

    let likert: Vec<LikertRecord> = (0..10)
        .flat_map(|i| {
            [
                LikertRecord::new(format!("a{i:02}"), "sys_a", "i0", 1 + (i % 5), 5).unwrap(),
                LikertRecord::new(format!("a{i:02}"), "sys_b", "i0", 1 + ((i + 2) % 5), 5).unwrap(),
            ]
        })
        .collect();
    let likert_path = dir.join("likert.csv");
    write_likert_records(&likert_path, &likert).unwrap();
    let loaded_likert = load_likert_records(&likert_path).unwrap();
    assert_eq!(loaded_likert.rows, likert);
}

#[test]
fn report_recovers_generating_means() {
    let comparisons: Vec<(String, String)> = vec![
        ("a".into(), "b".into()),
        ("b".into(), "c".into()),
        ("c".into(), "d".into()),
    ];
    let true_means = [0.42, 0.688, 0.575];
    let records = synth_spa_records(&comparisons, &true_means, 0.15, 2000, 5, 3).unwrap();
    let d = design(&[("a", "b"), ("b", "c"), ("c", "d")], 2000);
    let report = comparison_report(&records, &[], &d, &ReportOptions::default()).unwrap();
    for (row, mean) in report.rows.iter().zip(true_means) {
        let recovered = row.spa_mean.unwrap();
        // n = 2000 gives a standard error around 0.0034.
        assert!(
            (recovered - mean).abs() < 0.012,
            "recovered {recovered}, generating {mean}"
        );
    }
}

#[test]
fn exclusion_pipeline_keeps_ninety_of_one_hundred() {
    let comparisons = vec![("x".to_string(), "y".to_string())];
    let records = synth_spa_records(&comparisons, &[0.6], 0.15, 100, 5, 9).unwrap();
    let meta: Vec<AnnotatorMeta> = records
        .iter()
        .enumerate()
        .map(|(i, r)| AnnotatorMeta {
            annotator: r.annotator.clone(),
            native_speaker: !(10..15).contains(&i),
            submission_count: if (15..20).contains(&i) { 2 } else { 1 },
            tags: Default::default(),
        })
        .collect();
    let (kept, log) = exclude_annotators(records, &meta).unwrap();
    assert_eq!(kept.len(), 90);
    assert_eq!(log.len(), 10);
}

#[test]
fn power_matches_noncentral_t_benchmark() {
    let d = design(&[("x", "y")], 90)
        .with_alphas(vec![0.05, 0.01])
        .unwrap();
    let effect = Effect {
        mean: 0.575,
        sd: 0.15,
    };
    let replications = 4000;
    let estimates = power_analysis(&d, &[(5, 90)], effect, replications, 17).unwrap();
    for estimate in estimates {
        let delta = (effect.mean - 0.5) * (estimate.n_a as f64).sqrt() / effect.sd;
        let analytic = noncentral_t_power(estimate.alpha, estimate.n_a as u64 - 1, delta);
        assert!(
            (estimate.power - analytic).abs() < 0.03,
            "alpha {}: monte carlo {} vs analytic {analytic}",
            estimate.alpha,
            estimate.power
        );
    }
}

#[test]
fn power_is_monotone_in_sample_size_and_effect() {
    let d = design(&[("x", "y")], 90).with_alphas(vec![0.05]).unwrap();
    let grid = [(5u32, 20u32), (5, 60), (5, 180)];
    let mut previous = -1.0;
    for effect_mean in [0.52, 0.56, 0.60] {
        let estimates = power_analysis(
            &d,
            &grid,
            Effect {
                mean: effect_mean,
                sd: 0.15,
            },
            1500,
            23,
        )
        .unwrap();
        // Monotone in n_A at fixed effect (within Monte Carlo slack).
        for pair in estimates.windows(2) {
            assert!(
                pair[1].power >= pair[0].power - 0.03,
                "n_A {} -> {} power {} -> {}",
                pair[0].n_a,
                pair[1].n_a,
                pair[0].power,
                pair[1].power
            );
        }
        // Monotone in the effect at the largest n_A.
        let strongest = estimates.last().unwrap().power;
        assert!(strongest >= previous - 0.03);
        previous = strongest;
    }
}

#[test]
fn degenerate_spa_rows_are_flagged_not_fatal() {
    let flat: Vec<SpaEstimate> = (0..5)
        .map(|i| SpaEstimate {
            annotator: format!("a{i}").into(),
            system_x: "x".into(),
            system_y: "y".into(),
            p_hat: 0.5,
            m_seen: 5,
        })
        .collect();
    let d = design(&[("x", "y")], 5);
    let report = comparison_report(&flat, &[], &d, &ReportOptions::default()).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.spa_mean, Some(0.5));
    assert!(row.spa_test.is_none());
    assert!(row.spa_error.is_some());
}
