use bric_web::{funnel_curve_json, simulate_json, transform_curves_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn short_run_returns_series_and_report() {
    let v = parse(&simulate_json("fig1_bric", r#"{"t_end": 2.0}"#).unwrap());
    assert_eq!(v["status"], "completed");
    assert_eq!(v["controller"], "bric");
    let t = v["series"]["t"].as_array().unwrap();
    assert_eq!(t.last().unwrap().as_f64().unwrap(), 2.0);
    assert_eq!(v["series"]["e1"].as_array().unwrap().len(), 2);
    assert_eq!(v["series"]["zeta"][1].as_array().unwrap().len(), t.len());
    // phi is unbounded at t = 0
    assert!(v["series"]["funnel"][0][0].is_null());
    assert!(v["series"]["funnel"][0][1].is_number());
    assert!(v["report"]["effort"].as_f64().unwrap() > 0.0);
}

#[test]
fn overrides_reach_the_controller() {
    let base = parse(&simulate_json("fig1_ppc", r#"{"t_end": 1.0}"#).unwrap());
    let tuned = parse(&simulate_json("fig1_ppc", r#"{"t_end": 1.0, "k_ppc": 0.3}"#).unwrap());
    assert_eq!(tuned["controller"], "ppc");
    assert_ne!(base["report"]["effort"], tuned["report"]["effort"]);
    let nodist = parse(
        &simulate_json(
            "fig3_disturbance",
            r#"{"t_end": 1.0, "disturbance": false}"#,
        )
        .unwrap(),
    );
    let plain = parse(&simulate_json("fig1_bric", r#"{"t_end": 1.0}"#).unwrap());
    assert_eq!(nodist["report"]["effort"], plain["report"]["effort"]);
}

#[test]
fn infeasible_override_reports_violation() {
    let v = parse(&simulate_json("fig1_bric", r#"{"floor": 0.001, "h": 0.1}"#).unwrap());
    assert_eq!(v["status"], "violation");
    assert!(v["violation"]["t"].as_f64().unwrap() > 0.0);
    assert!(v["series"]["t"].as_array().unwrap().is_empty());
}

#[test]
fn bad_input_is_rejected() {
    assert!(simulate_json("nope", "").is_err());
    assert!(simulate_json("fig1_bric", r#"{"gain": 3}"#)
        .unwrap_err()
        .contains("gain"));
    assert!(simulate_json("fig1_bric", r#"{"kappa": -1}"#)
        .unwrap_err()
        .contains("kappa"));
    assert!(transform_curves_json(0.0, 0.9, 10).is_err());
    assert!(transform_curves_json(1.0, 1.0, 10).is_err());
    assert!(funnel_curve_json(0.5, 0.0, 10.0, 10).is_err());
}

#[test]
fn transform_curves_match_closed_forms() {
    let v = parse(&transform_curves_json(12.0, 0.5, 3).unwrap());
    let s: Vec<f64> = serde_json::from_value(v["s"].clone()).unwrap();
    let eta: Vec<f64> = serde_json::from_value(v["eta"].clone()).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s[1], 0.0);
    assert_eq!(eta[1], 0.0);
    let r = 5.0 * 12f64.sqrt();
    assert!((eta[2] - r / (r * r + 12.0).sqrt()).abs() < 1e-15);
    let chi: Vec<f64> = serde_json::from_value(v["chi"].clone()).unwrap();
    assert!((chi[2] - 2.0 / 3.0).abs() < 1e-15);
    let d: Vec<f64> = serde_json::from_value(v["chi_deriv"].clone()).unwrap();
    assert!((d[0] - 1.25 / 0.5625).abs() < 1e-14);
}

#[test]
fn funnel_curve_starts_at_unit_gain() {
    let v = parse(&funnel_curve_json(0.5, 0.5, 100.0, 101).unwrap());
    assert!(v["phi"][0].is_null());
    assert_eq!(v["psi"][0].as_f64().unwrap(), 0.0);
    assert_eq!(v["beta"][0].as_f64().unwrap(), 1.0);
    let last_beta = v["beta"][100].as_f64().unwrap();
    assert!((last_beta - 5f64.sqrt()).abs() < 1e-6);
    let beta: Vec<f64> = serde_json::from_value(v["beta"].clone()).unwrap();
    assert!(beta.windows(2).all(|w| w[1] >= w[0]));
}
