use cbs_demo::{budget, importance, ranking, synth};
use serde_json::Value;

fn generated() -> (String, String) {
    let doc: Value = serde_json::from_str(&synth("4,3,2", 6, 0.6, 3).unwrap()).unwrap();
    (doc["space"].as_str().unwrap().into(), doc["scores"].as_str().unwrap().into())
}

#[test]
fn synth_output_feeds_every_export() {
    let (space, scores) = generated();
    assert!(scores.starts_with("# synthetic scores"));

    let r: Value = serde_json::from_str(&ranking(&space, &scores, 0.97, "test", 5).unwrap()).unwrap();
    assert_eq!(r["entries"].as_array().unwrap().len(), 5);
    assert_eq!(r["contexts"].as_array().unwrap().len(), 12);

    let b: Value = serde_json::from_str(&budget(&space, &scores, 0.97, 10).unwrap()).unwrap();
    let means: Vec<f64> = b["points"].as_array().unwrap().iter().map(|p| p["mean"].as_f64().unwrap()).collect();
    assert_eq!(means.len(), 10);
    assert!(means.iter().all(|m| (0.0..=1.0).contains(m)));

    let i: Value = serde_json::from_str(&importance(&space, &scores, 20, 0).unwrap()).unwrap();
    let reports = i.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn synth_is_seeded() {
    assert_eq!(synth("3,3", 4, 0.5, 9), synth("3,3", 4, 0.5, 9));
    assert_ne!(synth("3,3", 4, 0.5, 9), synth("3,3", 4, 0.5, 10));
}

#[test]
fn errors_are_messages() {
    let (space, scores) = generated();
    assert!(ranking(&space, &scores, 1.2, "test", 0).is_err());
    assert!(ranking(&space, &scores, 0.97, "dev", 0).unwrap_err().contains("unknown split"));
    assert!(ranking("{", &scores, 0.97, "test", 0).unwrap_err().starts_with("space file"));
    assert!(synth("4,x", 3, 0.5, 0).unwrap_err().contains("'x'"));
}
