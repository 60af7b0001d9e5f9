//! Flat `key = value` configuration format for sweep scenarios.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Absent
//! keys take the scenario defaults; unknown and duplicated keys are errors
//! so typos cannot silently fall back to defaults. [`emit_config`] writes
//! every key back out, and `parse_config(emit_config(cfg))` round-trips.

use std::collections::HashSet;

use crate::pkd::PaModel;
use crate::sweep::SweepConfig;
use crate::ModelError;

/// Every recognized configuration key, with its default noted in README.
pub const CONFIG_KEYS: [&str; 22] = [
    "loss_start_db",
    "loss_stop_db",
    "loss_step_db",
    "mu_signal",
    "mu_decoy",
    "p_signal",
    "p_decoy",
    "p_vacuum",
    "pair_rate",
    "herald_efficiency",
    "intrinsic_error",
    "tau_s",
    "dark_space",
    "dark_ground",
    "background_ground",
    "detector_efficiency",
    "f_ec",
    "source_rate",
    "pa_model",
    "opt_lower",
    "opt_upper",
    "opt_tol",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key '{key}': cannot parse value '{value}'")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{0}")]
    OutOfRange(ModelError),
}

/// Parses a flat `key = value` configuration into a validated [`SweepConfig`].
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut cfg = SweepConfig::default();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key_raw, value_raw)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            });
        };
        let key = key_raw.trim();
        let value = value_raw.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: line.to_string(),
            });
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }

        let bad_value = || ConfigError::InvalidValue {
            line: line_no,
            key: key.to_string(),
            value: value.to_string(),
        };
        if key == "pa_model" {
            cfg.pa_model = PaModel::from_id(value).ok_or_else(bad_value)?;
            continue;
        }
        let num: f64 = value.parse().map_err(|_| bad_value())?;
        match key {
            "loss_start_db" => cfg.loss_start_db = num,
            "loss_stop_db" => cfg.loss_stop_db = num,
            "loss_step_db" => cfg.loss_step_db = num,
            "mu_signal" => cfg.wcp.mu_signal = num,
            "mu_decoy" => cfg.wcp.mu_decoy = num,
            "p_signal" => cfg.wcp.p_signal = num,
            "p_decoy" => cfg.wcp.p_decoy = num,
            "p_vacuum" => cfg.wcp.p_vacuum = num,
            "pair_rate" => cfg.pair.pair_rate = num,
            "herald_efficiency" => cfg.pair.herald_efficiency = num,
            "intrinsic_error" => cfg.pair.intrinsic_error = num,
            "tau_s" => cfg.gate_window = num,
            "dark_space" => cfg.space_noise.dark_rate = num,
            "dark_ground" => cfg.ground_noise.dark_rate = num,
            "background_ground" => cfg.ground_noise.background_rate = num,
            "detector_efficiency" => cfg.detector_efficiency = num,
            "f_ec" => cfg.error_correction.efficiency = num,
            "source_rate" => cfg.source_rate = num,
            "opt_lower" => cfg.optimizer.lower = num,
            "opt_upper" => cfg.optimizer.upper = num,
            "opt_tol" => cfg.optimizer.tolerance = num,
            _ => unreachable!("key list covered above"),
        }
    }

    cfg.validate().map_err(ConfigError::OutOfRange)?;
    Ok(cfg)
}

/// Writes every configuration key as `key = value`, one per line.
pub fn emit_config(cfg: &SweepConfig) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    kv("loss_start_db", cfg.loss_start_db.to_string());
    kv("loss_stop_db", cfg.loss_stop_db.to_string());
    kv("loss_step_db", cfg.loss_step_db.to_string());
    kv("mu_signal", cfg.wcp.mu_signal.to_string());
    kv("mu_decoy", cfg.wcp.mu_decoy.to_string());
    kv("p_signal", cfg.wcp.p_signal.to_string());
    kv("p_decoy", cfg.wcp.p_decoy.to_string());
    kv("p_vacuum", cfg.wcp.p_vacuum.to_string());
    kv("pair_rate", cfg.pair.pair_rate.to_string());
    kv("herald_efficiency", cfg.pair.herald_efficiency.to_string());
    kv("intrinsic_error", cfg.pair.intrinsic_error.to_string());
    kv("tau_s", cfg.gate_window.to_string());
    kv("dark_space", cfg.space_noise.dark_rate.to_string());
    kv("dark_ground", cfg.ground_noise.dark_rate.to_string());
    kv(
        "background_ground",
        cfg.ground_noise.background_rate.to_string(),
    );
    kv("detector_efficiency", cfg.detector_efficiency.to_string());
    kv("f_ec", cfg.error_correction.efficiency.to_string());
    kv("source_rate", cfg.source_rate.to_string());
    kv("pa_model", cfg.pa_model.id().to_string());
    kv("opt_lower", cfg.optimizer.lower.to_string());
    kv("opt_upper", cfg.optimizer.upper.to_string());
    kv("opt_tol", cfg.optimizer.tolerance.to_string());
    out
}
