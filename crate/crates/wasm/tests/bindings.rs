use serde_json::Value;
use skg_compat_wasm::{ablation_json, decide_json, hub_family_json, weights_json};

const CAMPUS: &str = include_str!("../../core/tests/fixtures/campus.json");

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn weights_of_campus() {
    let t = json(&weights_json(CAMPUS, false).unwrap());
    let student = t["entries"].as_array().unwrap().iter().find(|e| e["etype"] == "student").unwrap();
    assert_eq!(student["weight"], "3/8");
    assert_eq!(t["preprocessed"], false);
}

#[test]
fn weights_reject_bad_input() {
    assert!(weights_json("{", false).is_err());
    assert!(weights_json(r#"{"name":"s","etypes":[],"object_properties":[],"is_a":[],"extra":1}"#, false).is_err());
}

#[test]
fn decisions_reach_each_tier() {
    let d = json(&decide_json(r#"{"label":"Student"}"#, r#"{"label":"student"}"#, "", "").unwrap());
    assert_eq!(d["tier"], "label");
    let props = r#"["name","birth date","major"]"#;
    let u = format!(r#"{{"label":"pupil","properties":{props}}}"#);
    let v = format!(r#"{{"label":"learner","properties":{props}}}"#);
    let d = json(&decide_json(&u, &v, "", "").unwrap());
    assert_eq!(d["tier"], "property");
    assert_eq!(d["equivalent"], true);
    let d = json(&decide_json(r#"{"label":"gender"}"#, r#"{"label":"sex"}"#, "", "gender\tsex\n").unwrap());
    assert_eq!(d["tier"], "label");
    let d = json(&decide_json(r#"{"label":"gender"}"#, r#"{"label":"sex"}"#, "", "").unwrap());
    assert_eq!(d["equivalent"], false);
}

#[test]
fn decide_validates_config() {
    let bad = r#"{"t_label":0.4,"t_property":1.5,"t_overall":0.5}"#;
    assert!(decide_json(r#"{"label":"a"}"#, r#"{"label":"b"}"#, bad, "").is_err());
    assert!(decide_json(r#"{"label":"a","colour":1}"#, r#"{"label":"b"}"#, "", "").is_err());
}

#[test]
fn hub_family_ablation_curves() {
    let h = json(&hub_family_json());
    let (x, y) = (h["x"].to_string(), h["y"].to_string());
    let out = json(&ablation_json(&x, &y).unwrap());
    let curves = out["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 6);
    let m2 = curves.iter().find(|c| c["method"] == 2 && c["metric"] == "coverage").unwrap();
    assert_eq!(m2["exact"], serde_json::json!(["1/196", "29/196"]));
    assert!(ablation_json(&x, &x).is_err());
}
