use common_learning_web::{posterior_path_json, region_json, summary_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn summary_of_the_bundled_structure() {
    let v = parse(summary_json("").unwrap());
    assert_eq!(v["join"], serde_json::json!([["θ1", "θ2", "θ3"], ["θ4"]]));
    assert_eq!(v["lambda"][1]["lambda"], "1/3");
    assert_eq!(v["global_lambda"], "1/2");
}

#[test]
fn region_matches_the_golden_count() {
    let v = parse(region_json("", 60, 0.05, 0.8, "θ4").unwrap());
    let ball = v["ball"].as_array().unwrap();
    assert_eq!(ball.len(), 61);
    let inside = ball
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .filter(|c| c.as_array().unwrap().contains(&Value::from(3)))
        .count();
    assert_eq!(inside, 49);
    // Common belief implies mutual belief.
    let m = v["mutual"].as_array().unwrap();
    for (i, row) in v["common"].as_array().unwrap().iter().enumerate() {
        for (j, c) in row.as_array().unwrap().iter().enumerate() {
            assert!(!c.as_bool().unwrap() || m[i][j].as_bool().unwrap());
        }
    }
}

#[test]
fn region_rejects_large_horizons_and_bad_cells() {
    assert!(region_json("", 10_000, 0.05, 0.8, "θ4").is_err());
    assert!(region_json("", 10, 0.05, 0.8, "nope").is_err());
}

#[test]
fn posterior_path_starts_at_the_prior() {
    let v = parse(posterior_path_json("", 1, "0 1 1").unwrap());
    let rows = v["posterior"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for p in rows[0].as_array().unwrap() {
        assert!((p.as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
    assert_eq!(v["counts"], serde_json::json!([1, 2]));
    assert!(posterior_path_json("", 1, "012").is_err());
    assert!(posterior_path_json("", 3, "0").is_err());
}
