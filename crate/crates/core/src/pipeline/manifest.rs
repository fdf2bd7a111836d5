//! Machine-readable run manifest. Keys are sorted, so two runs over the same
//! inputs differ only in the `timing` object.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::io::{read_labeled_checkins, sha256_file};
use super::{PipelineConfig, PipelineError, Stage, StageTiming, INGEST_VENUES, LABELED_CHECKINS};
use crate::classify::{Label, UserClass};
use crate::ingest::read_catalog;
use crate::synth::read_ground_truth;

pub const MANIFEST_FILE: &str = "manifest.json";

fn internal(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Internal(format!("{}: {e}", path.display()))
}

fn file_entry(path: &Path) -> Result<Value, PipelineError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sha = sha256_file(path).map_err(|e| PipelineError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(json!({ "file": name, "sha256": sha }))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn csv_rows(path: &Path) -> Result<u64, PipelineError> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| internal(path, e))?;
    let mut n = 0;
    for rec in r.records() {
        rec.map_err(|e| internal(path, e))?;
        n += 1;
    }
    Ok(n)
}

fn outputs(root: &Path) -> Result<Value, PipelineError> {
    let mut files = Vec::new();
    if root.is_dir() {
        collect_files(root, &mut files).map_err(|e| internal(root, e))?;
    }
    let mut map = Map::new();
    for path in files {
        let rel = path.strip_prefix(root).unwrap_or(&path);
        let key = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if key == MANIFEST_FILE {
            continue;
        }
        let rows = if path.extension().is_some_and(|e| e == "csv") {
            json!(csv_rows(&path)?)
        } else {
            Value::Null
        };
        let sha = sha256_file(&path).map_err(|e| internal(&path, e))?;
        map.insert(key, json!({ "rows": rows, "sha256": sha }));
    }
    Ok(Value::Object(map))
}

/// Label counts and, when ground truth is configured, agreement with it.
fn classification(cfg: &PipelineConfig) -> Result<Value, PipelineError> {
    let labeled_path = cfg.output_dir.join(LABELED_CHECKINS);
    let venues_path = cfg.output_dir.join(INGEST_VENUES);
    if !labeled_path.is_file() || !venues_path.is_file() {
        return Ok(Value::Null);
    }
    let labeled = read_labeled_checkins(&labeled_path)?;
    let venues = read_catalog(&venues_path)?.catalog;

    let mut label_counts: BTreeMap<&str, u64> = [Label::Resident, Label::Tourist, Label::Excluded]
        .into_iter()
        .map(|l| (l.as_str(), 0))
        .collect();
    for lc in &labeled {
        *label_counts.entry(lc.label.as_str()).or_default() += 1;
    }

    let users_path = cfg.output_dir.join("classify/users.csv");
    let mut home: BTreeMap<String, String> = BTreeMap::new();
    let mut r = csv::Reader::from_path(&users_path).map_err(|e| internal(&users_path, e))?;
    for rec in r.records() {
        let rec = rec.map_err(|e| internal(&users_path, e))?;
        home.insert(rec[0].to_string(), rec[1].to_string());
    }
    let with_home = home.values().filter(|h| !h.is_empty()).count();
    let mut value = json!({
        "users": home.len(),
        "users_with_home_city": with_home,
        "users_without_home_city": home.len() - with_home,
        "checkin_labels": label_counts,
    });

    if let Some(gt_path) = &cfg.ground_truth {
        let truth = read_ground_truth(gt_path).map_err(|e| PipelineError::Data(e.to_string()))?;
        let truth_home: HashMap<&str, &str> = truth
            .iter()
            .map(|g| (g.user_id.as_str(), g.home_city.as_str()))
            .collect();
        let user_hits = truth
            .iter()
            .filter(|g| home.get(&g.user_id).is_some_and(|h| *h == g.home_city))
            .count();
        let mut checked = 0u64;
        let mut hits = 0u64;
        for lc in &labeled {
            let (Some(&th), Some(v)) = (
                truth_home.get(lc.checkin.user_id.as_str()),
                venues.get(&lc.checkin.venue_id),
            ) else {
                continue;
            };
            let expected = if v.city == th {
                UserClass::Resident
            } else {
                UserClass::Tourist
            };
            checked += 1;
            if lc.label == expected.label() {
                hits += 1;
            }
        }
        let ratio = |a: u64, b: u64| {
            if b == 0 {
                Value::Null
            } else {
                json!(a as f64 / b as f64)
            }
        };
        value["ground_truth"] = json!({
            "users": truth.len(),
            "user_accuracy": ratio(user_hits as u64, truth.len() as u64),
            "checkins": checked,
            "checkin_label_accuracy": ratio(hits, checked),
        });
    }
    Ok(value)
}

/// Builds the manifest for the current state of the output directory.
pub fn build_manifest(cfg: &PipelineConfig, stages: &[Stage], timings: &[StageTiming]) -> Result<Value, PipelineError> {
    let mut params = serde_json::to_value(cfg).map_err(|e| PipelineError::Internal(e.to_string()))?;
    if let Value::Object(m) = &mut params {
        for key in ["checkins", "venues", "category_map", "ground_truth", "output_dir"] {
            m.remove(key);
        }
    }
    params["lda"]["alpha"] = json!(cfg.lda.params().alpha);

    let mut inputs = Map::new();
    inputs.insert("checkins".into(), file_entry(&cfg.checkins)?);
    inputs.insert("venues".into(), file_entry(&cfg.venues)?);
    if let Some(p) = &cfg.category_map {
        inputs.insert("category_map".into(), file_entry(p)?);
    }
    if let Some(p) = &cfg.ground_truth {
        inputs.insert("ground_truth".into(), file_entry(p)?);
    }

    let mut timing = Map::new();
    for t in timings {
        timing.insert(format!("{}_ms", t.stage), json!(t.millis));
    }
    timing.insert("total_ms".into(), json!(timings.iter().map(|t| t.millis).sum::<f64>()));

    Ok(json!({
        "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "stages": stages.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "parameters": params,
        "inputs": inputs,
        "outputs": outputs(&cfg.output_dir)?,
        "classification": classification(cfg)?,
        "timing": timing,
    }))
}
