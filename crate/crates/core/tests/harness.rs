use swipt_maxmin::harness::{
    figure_scenarios, improvement_percent, preset_by_name, read_rows, run_experiment, summarize, write_rows,
    Algorithm, ExperimentSpec, Metric, ResultRow, RunOptions, SinrProfile, BASE_COLUMNS, SCHEMA_LINE,
};
use swipt_maxmin::model::units::{dbm_to_w, w_to_dbm};
use swipt_maxmin::Error;

const SCENARIO: &str = r#"
[scenario]
N = 4
K = 4
P_T = "10 W"
sigma_a_sq = "-70 dBm"
sigma_d_sq = "-50 dBm"
gamma_bar = "10 dB"
L = 5.0
theta = 0.1
alpha = 2.5
S_E = "-30 dBm"
"#;

fn spec_text(algorithms: &str, realizations: usize, gammas: &str) -> String {
    format!(
        "name = \"t\"\nalgorithms = {algorithms}\nrealizations = {realizations}\n{SCENARIO}\n[sweep]\ngamma_db = {gammas}\nN = [4]\nK = [4]\nL = [5.0]\n"
    )
}

fn spec(algorithms: &str, realizations: usize, gammas: &str) -> ExperimentSpec {
    ExperimentSpec::from_toml_str(&spec_text(algorithms, realizations, gammas)).unwrap()
}

#[test]
fn unknown_algorithm_is_a_config_error() {
    let err = ExperimentSpec::from_toml_str(&spec_text("[\"GOA\", \"FOO\"]", 1, "[10.0]")).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn unknown_field_and_empty_axes_are_rejected() {
    let text = spec_text("[\"GOA\"]", 1, "[10.0]").replace("realizations", "bogus = 1\nrealizations");
    assert!(matches!(ExperimentSpec::from_toml_str(&text), Err(Error::Config(_))));
    assert!(matches!(ExperimentSpec::from_toml_str(&spec_text("[\"GOA\"]", 1, "[]")), Err(Error::Config(_))));
    assert!(matches!(ExperimentSpec::from_toml_str(&spec_text("[\"GOA\"]", 0, "[10.0]")), Err(Error::Config(_))));
}

#[test]
fn algorithm_names_round_trip() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
}

#[test]
fn single_point_single_realization_gives_one_row() {
    let s = spec("[\"GOA\"]", 1, "[10.0]");
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 1);
    let r = &report.rows[0];
    assert_eq!((r.algorithm.as_str(), r.n, r.k, r.realization), ("GOA", 4, 4, 0));
    assert!(r.feasible);
    assert!(r.goa_iters.is_some());
    assert_eq!(r.rho.len(), 4);
    assert!(r.wall_s.is_none());
    assert!(report.incidents.is_empty());
}

#[test]
fn rows_follow_point_realization_algorithm_order() {
    let s = spec("[\"DWA-UPS\", \"P_lb\", \"GOA\"]", 2, "[0.0, 20.0]");
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    let keys: Vec<(f64, u64, String)> = report.rows.iter().map(|r| (r.gamma_db, r.realization, r.algorithm.clone())).collect();
    let mut expected = Vec::new();
    for g in [0.0, 20.0] {
        for r in 0..2 {
            for a in ["DWA-UPS", "P_lb", "GOA"] {
                expected.push((g, r, a.to_string()));
            }
        }
    }
    assert_eq!(keys, expected);
}

#[test]
fn goa_dominates_and_sits_inside_the_bounds() {
    let s = spec("[\"GOA\", \"P_lb\", \"P_ub\", \"DWA-UPS\", \"UWA-UPS\"]", 3, "[10.0]");
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    for chunk in report.rows.chunks(5) {
        if !chunk[0].feasible {
            continue;
        }
        let p: Vec<f64> = chunk.iter().map(|r| r.p_star_w.unwrap_or(0.0)).collect();
        assert!(p[1] <= p[0] + 1e-4 && p[0] <= p[2] + 1e-4, "{p:?}");
        assert!(p[0] >= p[3] - 1e-4 && p[0] >= p[4] - 1e-4, "{p:?}");
    }
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let s = spec("[\"GOA\", \"DWA-DPS\"]", 3, "[10.0]");
    let csv = |workers| {
        let report = run_experiment(&s, &RunOptions { workers: Some(workers), ..RunOptions::default() }).unwrap();
        let mut buf = Vec::new();
        write_rows(&mut buf, &report.rows, s.fixed_k()).unwrap();
        buf
    };
    let a = csv(1);
    assert_eq!(a, csv(1));
    assert_eq!(a, csv(3));
}

#[test]
fn seed_override_changes_the_channels() {
    let s = spec("[\"EFM-only\"]", 1, "[10.0]");
    let a = run_experiment(&s, &RunOptions::default()).unwrap();
    let b = run_experiment(&s, &RunOptions { seed: Some(99), ..RunOptions::default() }).unwrap();
    assert_ne!(a.rows[0].p_star_w, b.rows[0].p_star_w);
}

#[test]
fn channels_are_shared_across_sinr_targets() {
    // energy-only designs ignore the SINR target, so common channels give equal rows
    let s = spec("[\"EFM-only\"]", 2, "[0.0, 30.0]");
    let rows = run_experiment(&s, &RunOptions::default()).unwrap().rows;
    assert_eq!(rows[0].p_star_w, rows[2].p_star_w);
    assert_eq!(rows[1].p_star_w, rows[3].p_star_w);
}

#[test]
fn csv_round_trips_with_schema_line() {
    let s = spec("[\"GOA\", \"DWA-UPS\", \"SINR-UPS\"]", 2, "[10.0]");
    let report = run_experiment(&s, &RunOptions { timing: true, ..RunOptions::default() }).unwrap();
    let mut buf = Vec::new();
    write_rows(&mut buf, &report.rows, Some(4)).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SCHEMA_LINE));
    let header = lines.next().unwrap();
    assert!(header.starts_with(&BASE_COLUMNS.join(",")));
    assert!(header.ends_with("w_1,w_2,w_3,w_4"));
    let back = read_rows(buf.as_slice()).unwrap();
    assert_eq!(back.len(), report.rows.len());
    for (a, b) in back.iter().zip(&report.rows) {
        assert_eq!(a.algorithm, b.algorithm);
        assert_eq!(a.p_star_w, b.p_star_w);
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.weights, b.weights);
        assert!(a.wall_s.is_some());
    }
}

#[test]
fn csv_without_schema_line_is_rejected() {
    let text = format!("{}\n", BASE_COLUMNS.join(","));
    assert!(matches!(read_rows(text.as_bytes()), Err(Error::Config(_))));
}

#[test]
fn dbm_round_trip() {
    assert!((w_to_dbm(10.0) - 40.0).abs() < 1e-12);
    for dbm in [-60.0, -30.0, 0.0, 17.5, 40.0] {
        assert!((w_to_dbm(dbm_to_w(dbm)) - dbm).abs() < 1e-12);
    }
}

fn row(alg: &str, gamma_db: f64, p: Option<f64>) -> ResultRow {
    let mut r = ResultRow::infeasible("t", gamma_db, 4, 4, 5.0, alg, 0);
    r.feasible = p.is_some();
    r.p_star_w = p;
    r
}

#[test]
fn summary_means_linear_watts_then_converts() {
    let rows = vec![row("A", 0.0, Some(10.0)), row("A", 0.0, Some(10.0)), row("A", 0.0, None)];
    let by = vec!["algorithm".to_string()];
    let s = summarize(&rows, Metric::PStar, &by, None).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!((s[0].count, s[0].total), (2, 3));
    assert!((s[0].mean_dbm.unwrap() - 40.0).abs() < 1e-12);

    // the mean of 1 W and 100 W is 50.5 W, not the 1 W geometric mean
    let rows = vec![row("A", 0.0, Some(1.0)), row("A", 0.0, Some(100.0))];
    let s = summarize(&rows, Metric::PStar, &by, None).unwrap();
    assert!((s[0].mean - 50.5).abs() < 1e-12);
    assert!((s[0].median - 50.5).abs() < 1e-12);
}

#[test]
fn improvement_against_baseline() {
    assert!((improvement_percent(1.26, 1.00) - 26.0).abs() < 1e-9);
    let rows = vec![
        row("GOA", 0.0, Some(1.26)),
        row("DWA-UPS", 0.0, Some(1.0)),
        row("GOA", 10.0, Some(2.0)),
        row("DWA-UPS", 10.0, Some(1.0)),
    ];
    let by = vec!["gamma_db".to_string(), "algorithm".to_string()];
    let s = summarize(&rows, Metric::PStar, &by, Some("DWA-UPS")).unwrap();
    let get = |g: &str, a: &str| s.iter().find(|x| x.key == [g, a]).unwrap().improvement_pct.unwrap();
    assert!((get("0", "GOA") - 26.0).abs() < 1e-9);
    assert!((get("10", "GOA") - 100.0).abs() < 1e-9);
    assert_eq!(get("10", "DWA-UPS"), 0.0);
    assert!(matches!(summarize(&rows, Metric::PStar, &["gamma_db".into()], Some("GOA")), Err(Error::Config(_))));
    assert!(matches!(summarize(&rows, Metric::PStar, &["bogus".into()], None), Err(Error::Config(_))));
}

#[test]
fn presets_cover_the_figures() {
    let all = figure_scenarios();
    assert_eq!(all.len(), 11);
    for p in &all {
        p.validate().unwrap();
        assert_eq!(p.realizations, 1000);
    }
    let f2 = preset_by_name("F2").unwrap();
    let combos: std::collections::BTreeSet<(usize, u64)> =
        f2.points().iter().map(|p| (p.n, p.l.to_bits())).collect();
    assert_eq!(combos.len(), 4);

    let f3 = preset_by_name("F3").unwrap();
    let distinct: Vec<Vec<f64>> = f3
        .points()
        .into_iter()
        .filter_map(|p| match p.profile {
            SinrProfile::Distinct(v) => Some(v),
            SinrProfile::Common(_) => None,
        })
        .collect();
    assert!(distinct.contains(&vec![8.0, 9.0, 11.0, 12.0]));
    assert!(distinct.contains(&vec![500.0, 750.0, 1250.0, 1500.0]));
    assert!(f3.points().iter().any(|p| p.label == "F3-distinct"));

    let f12 = preset_by_name("F12").unwrap();
    assert_eq!(f12.sweep.n, vec![8]);
    assert_eq!(f12.sweep.l, vec![5.0, 6.0]);
    assert!(f12.fixed_k().is_none());
    assert!(matches!(preset_by_name("F1"), Err(Error::Config(_))));
}

#[test]
fn distinct_profile_reports_mean_target_in_db() {
    let p = SinrProfile::Distinct(vec![8.0, 9.0, 11.0, 12.0]);
    assert!((p.gamma_db() - 10.0).abs() < 1e-12);
    assert!(p.targets(3).is_err());
}

#[test]
fn infeasible_targets_give_flagged_rows_not_incidents() {
    let s = spec("[\"GOA\", \"DWA-UPS\", \"EFM-only\"]", 2, "[120.0]");
    let report = run_experiment(&s, &RunOptions::default()).unwrap();
    assert_eq!(report.infeasible_realizations, 2);
    assert!(report.incidents.is_empty(), "{:?}", report.incidents);
    for r in &report.rows {
        // energy-only designs ignore the SINR targets
        assert_eq!(r.feasible, r.algorithm == "EFM-only", "{r:?}");
    }
}
