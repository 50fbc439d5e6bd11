//! `summary.json`: verdicts and measured constants of every suite run under one
//! configuration.

use serde_json::{json, Map, Value};

use super::ExperimentReport;

fn constant(suites: &Map<String, Value>, suite: &str, key: &str) -> Value {
    suites.get(suite).and_then(|s| s.get("constants")).and_then(|c| c.get(key)).cloned().unwrap_or(Value::Null)
}

fn prefixed(suites: &Map<String, Value>, suite: &str, prefix: &str) -> Value {
    let Some(c) = suites.get(suite).and_then(|s| s.get("constants")).and_then(Value::as_object) else {
        return Value::Null;
    };
    Value::Object(
        c.iter().filter_map(|(k, v)| k.strip_prefix(prefix).map(|rest| (rest.to_string(), v.clone()))).collect(),
    )
}

/// Build the summary, keeping suite entries of `previous` when it was written
/// under the same config hash.
pub fn build_summary(
    previous: Option<&Value>,
    config_hash: &str,
    config: &Value,
    reports: &[ExperimentReport],
) -> Value {
    let mut suites = Map::new();
    if let Some(prev) = previous {
        if prev.get("config_hash").and_then(Value::as_str) == Some(config_hash) {
            if let Some(old) = prev.get("suites").and_then(Value::as_object) {
                suites = old.clone();
            }
        }
    }
    for r in reports {
        suites.insert(
            r.suite.clone(),
            json!({
                "passed": r.passed,
                "rows": r.rows.len(),
                "constants": r.constants,
                "notes": r.notes,
            }),
        );
    }
    let passed = suites.values().all(|s| s.get("passed").and_then(Value::as_bool).unwrap_or(false));
    let envelope = json!({
        "c5_hat": constant(&suites, "selftest", "envelope_c5_hat"),
        "c5_hat_full_range": constant(&suites, "selftest", "envelope_c5_hat_full_range"),
        "bernstein_window": constant(&suites, "selftest", "bernstein_window_m7"),
        "n_alpha_min": constant(&suites, "voronovskaya", "n_alpha_min"),
        "n_alpha_max": constant(&suites, "voronovskaya", "n_alpha_max"),
        "voronovskaya_residual_window": constant(&suites, "voronovskaya", "normalized_residual_window"),
        "lemma_windows": prefixed(&suites, "lemmas", "window_"),
        "converse_ratio_window_max": constant(&suites, "converse", "ratio_window_max"),
        "converse_ratio_windows": prefixed(&suites, "converse", "ratio_window:"),
        "delayed_max_ratio_window_max": constant(&suites, "delayed-max", "ratio_window_max"),
        "equivalence_ratio_min": constant(&suites, "modulus", "ratio_min"),
        "equivalence_ratio_max": constant(&suites, "modulus", "ratio_max"),
    });
    json!({
        "config_hash": config_hash,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "passed": passed,
        "suites": suites,
        "envelope_constants": envelope,
    })
}
