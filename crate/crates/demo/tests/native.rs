use chanshort::channels::SAMPLE_3X4;
use chanshort_demo::{design_json, ergodic_json, isi_json};
use serde_json::Value;

#[test]
fn design_matches_library() {
    let v: Value = serde_json::from_str(&design_json(SAMPLE_3X4, 1.0, 1, "", false).unwrap()).unwrap();
    assert!((v["g_r"][1][1][0].as_f64().unwrap() - 1.9286).abs() < 1e-4);
    assert!(v["lambda_min"].as_f64().unwrap() < 0.0);

    let v: Value = serde_json::from_str(&design_json(SAMPLE_3X4, 1.0, 0, "2,2", true).unwrap()).unwrap();
    assert_eq!(v["units"], "bits");
    assert_eq!(v["rates"]["kind"], "blocks");
}

#[test]
fn design_reports_errors() {
    assert!(design_json("2 2\n1 0\n", 1.0, 1, "", false).unwrap_err().contains("rows"));
    assert!(design_json("2 2\n1 0\n0 q\n", 1.0, 1, "", false).unwrap_err().contains("line 3"));
    assert!(design_json(SAMPLE_3X4, 1.0, 1, "1,1", false).is_err());
    assert!(design_json(SAMPLE_3X4, -1.0, 1, "", false).is_err());
}

#[test]
fn ergodic_curves_are_ordered() {
    let v: Value = serde_json::from_str(&ergodic_json(4, 6, 2, "", 50, 1, "0:10:30", false).unwrap()).unwrap();
    let snr = v["snr_db"].as_array().unwrap();
    assert_eq!(snr.len(), 4);
    let curves = v["curves"].as_array().unwrap();
    let get = |name: &str| -> Vec<f64> {
        let c = curves.iter().find(|c| c["name"] == name).unwrap();
        c["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
    };
    for (full, direct) in get("full").iter().zip(get("direct")) {
        assert!(direct <= *full);
    }
    assert!(v["notes"].as_array().unwrap().iter().any(|n| n[0] == "slope_theory"));
    assert!(ergodic_json(4, 6, 6, "", 10, 1, "0", false).is_err());
}

#[test]
fn isi_curves_have_every_series() {
    let v: Value = serde_json::from_str(&isi_json(0.7, 12, 25, 1, "0:10:20", true).unwrap()).unwrap();
    let names: Vec<&str> = v["curves"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["full", "banded", "classical", "lambda_min"]);
    assert_eq!(v["units"], "bits");
    assert!(isi_json(0.7, 12, 24, 1, "0", false).is_err());
}
