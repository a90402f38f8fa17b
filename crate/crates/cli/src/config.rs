//! TOML channel configuration.
//!
//! A config file declares what the channel looks like; the operating point
//! (power or energy) always comes from the command line. Validation is by
//! hand rather than serde-derived so every rejection can name the offending
//! key and say what would have been accepted.
//!
//! ```toml
//! profile = "farfield"
//! area_t_m2 = 0.01
//! area_r_m2 = 0.01
//! path_len_m = 1.0e5
//! omega_c_rad_s = 3.7699e15
//! ```
//!
//! Flat profiles take `eta`, `delta_omega` (rad/s) and an optional `n_modes`
//! (absent means the unbounded ladder); tabulated profiles take `modes`, an
//! array of `[omega_rad_s, eta]` pairs.

use bosonic_core::{FarFieldGeometry, ModeGrid, ModeSpec};
use toml::Value;

/// A validated channel description, ready to be priced against a budget.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    /// No config file: the pure dimensionless far-field workflow.
    NormalizedFarField,
    FarField { geometry: FarFieldGeometry },
    Flat { eta: f64, delta_omega: f64, n_modes: Option<usize> },
    Tabulated { grid: ModeGrid },
}

impl ChannelSpec {
    pub fn profile_name(&self) -> &'static str {
        match self {
            ChannelSpec::NormalizedFarField => "farfield (normalized)",
            ChannelSpec::FarField { .. } => "farfield",
            ChannelSpec::Flat { .. } => "flat",
            ChannelSpec::Tabulated { .. } => "tabulated",
        }
    }
}

/// Keys each profile accepts besides `profile` itself.
const FLAT_KEYS: &[&str] = &["eta", "delta_omega", "n_modes"];
const FARFIELD_KEYS: &[&str] = &["area_t_m2", "area_r_m2", "path_len_m", "omega_c_rad_s"];
const TABULATED_KEYS: &[&str] = &["modes"];

pub fn parse_config(text: &str) -> Result<ChannelSpec, String> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| format!("config is not valid TOML: {e}"))?;

    let profile = match table.get("profile") {
        None => return Err("config: missing key \"profile\" (flat | farfield | tabulated)".into()),
        Some(Value::String(s)) => s.as_str(),
        Some(other) => {
            return Err(format!(
                "config: key \"profile\" must be a string, got {}",
                type_name(other)
            ))
        }
    };

    let allowed: &[&str] = match profile {
        "flat" => FLAT_KEYS,
        "farfield" => FARFIELD_KEYS,
        "tabulated" => TABULATED_KEYS,
        other => {
            return Err(format!(
                "config: key \"profile\" must be one of flat | farfield | tabulated, got \"{other}\""
            ))
        }
    };
    for key in table.keys() {
        if key != "profile" && !allowed.contains(&key.as_str()) {
            return Err(format!(
                "config: key \"{key}\" does not apply to profile \"{profile}\" (accepted: {})",
                allowed.join(", ")
            ));
        }
    }

    match profile {
        "flat" => {
            let eta = require_number(&table, "eta")?;
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(format!("config: key \"eta\" must lie in (0, 1], got {eta}"));
            }
            let delta_omega = require_number(&table, "delta_omega")?;
            if !(delta_omega > 0.0 && delta_omega.is_finite()) {
                return Err(format!(
                    "config: key \"delta_omega\" must be a positive frequency, got {delta_omega}"
                ));
            }
            let n_modes = match table.get("n_modes") {
                None => None,
                Some(Value::Integer(n)) if *n > 0 => Some(*n as usize),
                Some(Value::Integer(n)) => {
                    return Err(format!("config: key \"n_modes\" must be positive, got {n}"))
                }
                Some(other) => {
                    return Err(format!(
                        "config: key \"n_modes\" must be an integer, got {}",
                        type_name(other)
                    ))
                }
            };
            Ok(ChannelSpec::Flat { eta, delta_omega, n_modes })
        }
        "farfield" => {
            let geometry = FarFieldGeometry::new(
                require_number(&table, "area_t_m2")?,
                require_number(&table, "area_r_m2")?,
                require_number(&table, "path_len_m")?,
                require_number(&table, "omega_c_rad_s")?,
            )
            .map_err(|e| format!("config: {e}"))?;
            Ok(ChannelSpec::FarField { geometry })
        }
        "tabulated" => {
            let modes = match table.get("modes") {
                None => {
                    return Err(
                        "config: missing key \"modes\" (array of [omega_rad_s, eta] pairs)".into()
                    )
                }
                Some(Value::Array(rows)) => rows,
                Some(other) => {
                    return Err(format!(
                        "config: key \"modes\" must be an array of [omega_rad_s, eta] pairs, got {}",
                        type_name(other)
                    ))
                }
            };
            let mut specs = Vec::with_capacity(modes.len());
            for (i, row) in modes.iter().enumerate() {
                let pair = row.as_array().filter(|a| a.len() == 2).ok_or(format!(
                    "config: key \"modes\"[{i}] must be a two-element [omega_rad_s, eta] pair"
                ))?;
                let omega = as_number(&pair[0]).ok_or(format!(
                    "config: key \"modes\"[{i}][0] (omega) must be a number"
                ))?;
                let eta = as_number(&pair[1])
                    .ok_or(format!("config: key \"modes\"[{i}][1] (eta) must be a number"))?;
                specs.push(ModeSpec::new(omega, eta));
            }
            let grid = ModeGrid::new(specs).map_err(|e| format!("config: key \"modes\": {e}"))?;
            Ok(ChannelSpec::Tabulated { grid })
        }
        _ => unreachable!("profile validated above"),
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn require_number(table: &toml::Table, key: &'static str) -> Result<f64, String> {
    match table.get(key) {
        None => Err(format!("config: missing key \"{key}\"")),
        Some(v) => as_number(v)
            .ok_or_else(|| format!("config: key \"{key}\" must be a number, got {}", type_name(v))),
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}
