use loewy_cli::{
    run, Outcome, CSV_HEADER, EXIT_MISMATCH, EXIT_NOT_AMPLE, EXIT_NOT_POLYNOMIAL, EXIT_USAGE,
};
use serde_json::Value;

fn loewy(args: &[&str]) -> Outcome {
    run(std::iter::once("loewy").chain(args.iter().copied()))
}

fn json(outcome: &Outcome) -> Value {
    serde_json::from_str(&outcome.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", outcome.stdout))
}

fn csv_rows(outcome: &Outcome) -> Vec<Vec<String>> {
    let mut lines = outcome.stdout.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn negative(text: &str) -> bool {
    text.starts_with('-')
}

#[test]
fn df_hirzebruch_matches_closed_form() {
    let out = loewy(&["df", "hirzebruch:n=1,a=1,b=1", "--check-closed-form"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["df_num"], "-1/6");
    assert_eq!(v["norm"], "13/108");
    assert_eq!(v["closed_form"]["match"], true);
}

#[test]
fn df_bundle_over_p2() {
    let v = json(&loewy(&["df", "projbundle-p2"]));
    assert_eq!(v["a0"], "7/6");
    assert_eq!(v["df_num"], "-7/48");
    assert_eq!(v["norm"], "97/1120");
}

#[test]
fn df_rejects_non_ample() {
    assert_eq!(loewy(&["df", "delpezzo8:a=1,b=1"]).code, EXIT_NOT_AMPLE);
    assert_eq!(loewy(&["df", "delpezzo8:a=1,b=2"]).code, EXIT_NOT_AMPLE);
    assert_eq!(
        loewy(&["df", "blowup-n-line:n=3,a=3,b=1"]).code,
        EXIT_NOT_AMPLE
    );
}

#[test]
fn df_reports_rank_three_norm_mismatch() {
    let out = loewy(&["df", "projbundle-p1r3:n=1,a=1,b=1", "--check-closed-form"]);
    assert_eq!(out.code, EXIT_MISMATCH);
    let v = json(&out);
    assert_eq!(v["norm"], "19/480");
    assert_eq!(v["closed_form"]["df_num"]["match"], true);
    assert_eq!(v["closed_form"]["norm"]["match"], false);
}

#[test]
fn weight_offset_shifts_df_num() {
    let base = json(&loewy(&["df", "hirzebruch:n=2,a=1,b=1"]));
    let shifted = json(&loewy(&[
        "df",
        "hirzebruch:n=2,a=1,b=1",
        "--weight-offset",
        "1",
    ]));
    assert_eq!(base["df_num"], "-1/2");
    assert_eq!(base["a0"], "2");
    assert_eq!(shifted["df_num"], "-9/2");
    assert_eq!(base["norm"], shifted["norm"]);
}

#[test]
fn usage_errors() {
    for args in [
        &["df", "nosuchfamily:a=1"][..],
        &["df", "hirzebruch:n=1,a=1"],
        &["df", "hirzebruch:n=1,a=1,b=1,q=2"],
        &["df", "hirzebruch:n=1,a=1,b=1", "--window", "1..3"],
        &["scan", "delpezzo8:a=2..x,b=1"],
        &["frobnicate"],
    ] {
        let out = loewy(args);
        assert_eq!(out.code, EXIT_USAGE, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn scan_del_pezzo_signs() {
    let rows = csv_rows(&loewy(&["scan", "delpezzo8:a=2..6,b=1..5"]));
    assert_eq!(rows.len(), 25);
    for row in rows {
        let (a, b): (u32, u32) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => {
                assert_eq!(row[6], "true");
                assert!(negative(&row[7]), "{row:?}");
                assert_eq!(row[10], (a - b).to_string());
            }
            std::cmp::Ordering::Equal => assert_eq!(row[7], "0", "{row:?}"),
            std::cmp::Ordering::Less => {
                assert_eq!((row[6].as_str(), row[7].as_str()), ("false", ""))
            }
        }
    }
}

#[test]
fn scan_collinear_points_negative() {
    let rows = csv_rows(&loewy(&["scan", "blowup-n-line:n=2..4,a=2..12,b=1..2"]));
    let ample: Vec<_> = rows.iter().filter(|r| r[6] == "true").collect();
    assert!(ample.len() > 20);
    assert!(ample
        .iter()
        .all(|r| negative(&r[7]) && !r[8].is_empty() && !negative(&r[9])));
}

#[test]
fn scan_empty_grid_is_header_only() {
    let out = loewy(&["scan", "delpezzo8:a=3..2,b=1"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, format!("{CSV_HEADER}\n"));
}

#[test]
fn scan_is_deterministic_across_jobs() {
    let grid = "hirzebruch:n=1..3,a=1..4,b=1..3";
    let serial = loewy(&["scan", grid, "--jobs", "1"]);
    let parallel = loewy(&["scan", grid, "--jobs", "4"]);
    assert_eq!(serial, parallel);
    assert_eq!(serial, loewy(&["scan", grid, "--jobs", "1"]));
    let json_serial = loewy(&["scan", grid, "--format", "json"]);
    assert_eq!(json(&json_serial)["rows"].as_array().unwrap().len(), 36);
}

#[test]
fn oracle_verify_del_pezzo() {
    let out = loewy(&["oracle-verify", "delpezzo8:a=3,b=1", "--kmax", "3"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["layers"][0]["layers"], serde_json::json!([2, 3, 4]));
    assert!(v["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_verify_hirzebruch_vanishing_and_rees() {
    let out = loewy(&[
        "oracle-verify",
        "hirzebruch:n=2,a=1,b=1",
        "--kmax",
        "3",
        "--vanishing",
        "--rees",
    ]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(v["vanishing"]["equality"], true);
    assert_eq!(v["rees"]["first_stabilizing_r"], 1);
}

#[test]
fn oracle_verify_blowup_strict_inclusion() {
    let out = loewy(&[
        "oracle-verify",
        "blowup-n-line:n=2,a=3,b=1",
        "--kmax",
        "2",
        "--vanishing",
    ]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(v["vanishing"]["divisor"], "line-total");
    assert_eq!(v["vanishing"]["equality"], false);
    assert!(!v["vanishing"]["strict_at"].as_array().unwrap().is_empty());
    let proper = json(&loewy(&[
        "oracle-verify",
        "blowup-n-line:n=2,a=3,b=1",
        "--kmax",
        "2",
        "--vanishing",
        "--divisor",
        "line",
    ]));
    assert_eq!(proper["vanishing"]["equality"], true);
}

#[test]
fn oracle_verify_orbifold_mismatch() {
    let out = loewy(&["oracle-verify", "orbifold-dp", "--kmax", "1"]);
    assert_eq!(out.code, EXIT_MISMATCH);
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(
        v["mismatches"][0]["expected_layers"],
        serde_json::json!([1, 3, 2, 1])
    );
    assert_eq!(
        v["mismatches"][0]["oracle_layers"],
        serde_json::json!([2, 2, 2, 1])
    );
}

#[test]
fn fit_rank_three_bundle() {
    let v = json(&loewy(&["fit", "projbundle-p1r3:n=1,a=1,b=1"]));
    assert_eq!(v["a0"], "2/3");
    assert_eq!(v["b0"], "1/4");
    assert_eq!(v["degrees"], serde_json::json!([3, 4, 5]));
    assert_eq!(v["certified"], true);
}

#[test]
fn fit_oracle_layers() {
    let ok = loewy(&["fit", "hirzebruch:n=2,a=1,b=1", "--oracle"]);
    assert_eq!(ok.code, 0);
    assert_eq!(
        json(&ok)["a0"],
        json(&loewy(&["fit", "hirzebruch:n=2,a=1,b=1"]))["a0"]
    );
    let bad = loewy(&["fit", "orbifold-dp", "--oracle", "--window", "1..8"]);
    assert_eq!(bad.code, EXIT_NOT_POLYNOMIAL);
    assert_eq!(json(&bad)["certified"], false);
}

#[test]
fn export_layer_table() {
    let out = loewy(&["export", "hirzebruch:n=1,a=1,b=1", "--kmax", "2"]);
    assert_eq!(out.stdout, "k,i,dim\n1,0,2\n1,1,3\n2,0,3\n2,1,4\n2,2,5\n");
    let v = json(&loewy(&[
        "export",
        "delpezzo8:a=2,b=1",
        "--kmax",
        "1",
        "--format",
        "json",
    ]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["layers"].as_array().unwrap().len(), 2);
}
