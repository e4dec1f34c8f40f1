use std::fmt::Write as _;

use super::{Hyperplane, Standardizer, SvmError};

/// Contents of a trained-model file.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub hyperplane: Hyperplane,
    pub standardizer: Standardizer,
    pub train_seed: u64,
    pub margin: f64,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub fn write_model(m: &ModelFile) -> String {
    let h = &m.hyperplane;
    let mut s = String::new();
    writeln!(s, "feature_names={}", h.feature_names.join(",")).unwrap();
    writeln!(s, "w_scaled={}", join(&h.weights_scaled)).unwrap();
    writeln!(s, "b_scaled={:?}", h.bias_scaled).unwrap();
    writeln!(s, "w_physical={}", join(&h.weights_physical)).unwrap();
    writeln!(s, "b_physical={:?}", h.bias_physical).unwrap();
    writeln!(s, "standardizer_mean={}", join(&m.standardizer.mean)).unwrap();
    writeln!(s, "standardizer_std={}", join(&m.standardizer.std)).unwrap();
    writeln!(s, "train_seed={}", m.train_seed).unwrap();
    writeln!(s, "margin={:?}", m.margin).unwrap();
    s
}

pub fn read_model(text: &str) -> Result<ModelFile, SvmError> {
    let mut fields = std::collections::HashMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| SvmError::Parse {
            line: no + 1,
            reason: "expected key=value".into(),
        })?;
        fields.insert(k.trim().to_string(), (no + 1, v.trim().to_string()));
    }
    let get = |key: &str| {
        fields.get(key).cloned().ok_or_else(|| SvmError::Parse {
            line: 0,
            reason: format!("missing key {key}"),
        })
    };
    let vec = |key: &str| -> Result<Vec<f64>, SvmError> {
        let (line, v) = get(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|x| {
                x.trim().parse::<f64>().map_err(|e| SvmError::Parse {
                    line,
                    reason: format!("{key}: {e}"),
                })
            })
            .collect()
    };
    let scalar = |key: &str| -> Result<f64, SvmError> {
        let (line, v) = get(key)?;
        v.parse().map_err(|e| SvmError::Parse { line, reason: format!("{key}: {e}") })
    };
    let (_, names) = get("feature_names")?;
    let feature_names: Vec<String> = if names.is_empty() {
        Vec::new()
    } else {
        names.split(',').map(|s| s.trim().to_string()).collect()
    };
    let (seed_line, seed) = get("train_seed")?;
    let train_seed = seed.parse().map_err(|e| SvmError::Parse {
        line: seed_line,
        reason: format!("train_seed: {e}"),
    })?;
    let std = vec("standardizer_std")?;
    let dropped = std.iter().enumerate().filter(|(_, s)| **s == 0.0).map(|(j, _)| j).collect();
    let m = ModelFile {
        hyperplane: Hyperplane {
            weights_scaled: vec("w_scaled")?,
            bias_scaled: scalar("b_scaled")?,
            weights_physical: vec("w_physical")?,
            bias_physical: scalar("b_physical")?,
            feature_names,
        },
        standardizer: Standardizer {
            mean: vec("standardizer_mean")?,
            std,
            dropped,
        },
        train_seed,
        margin: scalar("margin")?,
    };
    let d = m.hyperplane.feature_names.len();
    for (name, len) in [
        ("w_scaled", m.hyperplane.weights_scaled.len()),
        ("w_physical", m.hyperplane.weights_physical.len()),
        ("standardizer_mean", m.standardizer.mean.len()),
        ("standardizer_std", m.standardizer.std.len()),
    ] {
        if len != d {
            return Err(SvmError::DimensionMismatch(format!("{name} has {len} entries for {d} features")));
        }
    }
    Ok(m)
}
