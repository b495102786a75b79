//! Structural parameters, the flat key=value config schema and named presets.

use crate::error::{Error, Result};
use crate::slackening::{PiecewiseLinear, SlackeningModel};
use serde::Serialize;

/// Structural constants and the mode pair under study.
///
/// `alpha` scales flexural stiffness with `j^4`, `beta` torsional stiffness
/// with `k^2`, and `gamma` is the deck geometry ratio.  All are taken as
/// given; deriving them from raw section constants is out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub j: u32,
    pub k: u32,
}

impl BridgeParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, j: u32, k: u32) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Validation {
                field: "alpha",
                reason: format!("alpha must be positive, got {alpha}"),
            });
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Validation {
                field: "beta",
                reason: format!("beta must be non-negative, got {beta}"),
            });
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Validation {
                field: "gamma",
                reason: format!("gamma must be positive, got {gamma}"),
            });
        }
        if j < 1 {
            return Err(Error::Validation {
                field: "j",
                reason: "j must be >= 1".into(),
            });
        }
        if k < 1 {
            return Err(Error::Validation {
                field: "k",
                reason: "k must be >= 1".into(),
            });
        }
        Ok(BridgeParams {
            alpha,
            beta,
            gamma,
            j,
            k,
        })
    }

    /// `alpha * j^4`, the flexural stiffness of the selected mode.
    pub fn alpha_j4(&self) -> f64 {
        self.alpha * (self.j as f64).powi(4)
    }

    /// `k^2`, the weight of `beta` in the torsional stiffness.
    pub fn k_sq(&self) -> f64 {
        (self.k as f64) * (self.k as f64)
    }
}

/// A parsed run configuration: structural parameters plus the restoring law.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: BridgeParams,
    pub model: SlackeningModel,
    /// Reference spectral value attached by some presets (highlighted line
    /// in diagrams); not used by the solvers themselves.
    pub reference_beta: Option<f64>,
}

/// Keys understood by the config schema, all lowercase except `M`.
const KNOWN_KEYS: &[&str] = &[
    "alpha", "beta", "gamma", "j", "k", "model", "m", "r0", "h", "M", "knots",
];

/// Parses the UTF-8 key=value schema.
///
/// Lines are `key = value`; `#` starts a comment.  `model` selects
/// `mmk|sqrt|exp|piecewise`; `mmk` needs `m, r0`, `sqrt`/`exp` need `m, h`,
/// and `piecewise` needs `knots = <csv path>` (rows `r,f`) with `M`
/// optionally pinning the traction tail slope.
pub fn parse_config(text: &str) -> Result<Config> {
    parse_config_with(text, |path| {
        std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_string(),
            source,
        })
    })
}

/// Same as [`parse_config`] with an injectable sidecar reader (tests).
pub fn parse_config_with(
    text: &str,
    read_sidecar: impl Fn(&str) -> Result<String>,
) -> Result<Config> {
    let mut kv = std::collections::BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Schema {
                key: format!("line {}", lineno + 1),
                reason: format!("expected key=value, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Schema {
                key: key.to_string(),
                reason: "unknown key".into(),
            });
        }
        if kv.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Schema {
                key: key.to_string(),
                reason: "duplicate key".into(),
            });
        }
    }

    let f64_field = |key: &str| -> Result<f64> {
        let raw = kv.get(key).ok_or_else(|| Error::Schema {
            key: key.to_string(),
            reason: "missing required key".into(),
        })?;
        raw.parse::<f64>().map_err(|_| Error::Schema {
            key: key.to_string(),
            reason: format!("`{raw}` is not a number"),
        })
    };
    let int_field = |key: &str| -> Result<u32> {
        let raw = kv.get(key).ok_or_else(|| Error::Schema {
            key: key.to_string(),
            reason: "missing required key".into(),
        })?;
        // integer-domain violation (e.g. j=0 or j=1.5) surfaces as validation
        match raw.parse::<i64>() {
            Ok(v) if v >= 1 && v <= u32::MAX as i64 => Ok(v as u32),
            Ok(v) => Err(Error::Validation {
                field: if key == "j" { "j" } else { "k" },
                reason: format!("must be an integer >= 1, got {v}"),
            }),
            Err(_) => Err(Error::Schema {
                key: key.to_string(),
                reason: format!("`{raw}` is not an integer"),
            }),
        }
    };

    let params = BridgeParams::new(
        f64_field("alpha")?,
        f64_field("beta")?,
        f64_field("gamma")?,
        int_field("j")?,
        int_field("k")?,
    )?;

    let model_name = kv.get("model").ok_or_else(|| Error::Schema {
        key: "model".into(),
        reason: "missing required key".into(),
    })?;
    let model = match model_name.as_str() {
        "mmk" => SlackeningModel::mmk(f64_field("m")?, f64_field("r0")?)?,
        "sqrt" => SlackeningModel::sqrt_smooth(f64_field("m")?, f64_field("h")?)?,
        "exp" => SlackeningModel::exponential(f64_field("m")?, f64_field("h")?)?,
        "piecewise" => {
            let path = kv.get("knots").ok_or_else(|| Error::Schema {
                key: "knots".into(),
                reason: "piecewise model needs a `knots = <csv path>` sidecar".into(),
            })?;
            let csv = read_sidecar(path)?;
            let knots = parse_knots_csv(&csv)?;
            let m_override = if kv.contains_key("M") {
                Some(f64_field("M")?)
            } else {
                None
            };
            SlackeningModel::PiecewiseLinear(PiecewiseLinear::new(knots, m_override)?)
        }
        other => {
            return Err(Error::Schema {
                key: "model".into(),
                reason: format!("unknown model `{other}` (use mmk|sqrt|exp|piecewise)"),
            })
        }
    };

    Ok(Config {
        params,
        model,
        reference_beta: None,
    })
}

fn parse_knots_csv(csv: &str) -> Result<Vec<(f64, f64)>> {
    let mut knots = Vec::new();
    for (lineno, raw) in csv.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Schema {
                    key: format!("knots line {}", lineno + 1),
                    reason: format!("expected `r,f`, got `{line}`"),
                })
        };
        let r = parse(parts.next())?;
        let f = parse(parts.next())?;
        knots.push((r, f));
    }
    Ok(knots)
}

/// Serializes a config back into the key=value schema; round-trips through
/// [`parse_config`] for the built-in model variants.
pub fn serialize_config(cfg: &Config) -> String {
    let p = &cfg.params;
    let mut out = String::new();
    out.push_str(&format!("alpha = {:e}\n", p.alpha));
    out.push_str(&format!("beta = {:e}\n", p.beta));
    out.push_str(&format!("gamma = {:e}\n", p.gamma));
    out.push_str(&format!("j = {}\n", p.j));
    out.push_str(&format!("k = {}\n", p.k));
    match cfg.model {
        SlackeningModel::Mmk { m, r0 } => {
            out.push_str("model = mmk\n");
            out.push_str(&format!("m = {:e}\n", m));
            out.push_str(&format!("r0 = {:e}\n", r0));
        }
        SlackeningModel::SqrtSmooth { m, h } => {
            out.push_str("model = sqrt\n");
            out.push_str(&format!("m = {:e}\n", m));
            out.push_str(&format!("h = {:e}\n", h));
        }
        SlackeningModel::Exponential { m, h } => {
            out.push_str("model = exp\n");
            out.push_str(&format!("m = {:e}\n", m));
            out.push_str(&format!("h = {:e}\n", h));
        }
        SlackeningModel::PiecewiseLinear(_) => {
            out.push_str("model = piecewise\n# knots sidecar path not serialized\n");
        }
    }
    out
}

/// Named parameter sets.
///
/// `academic` is the unit-scale set used throughout the worked diagrams;
/// `tnb` carries the Tacoma Narrows constants with the reference spectral
/// value attached.  The deck geometry ratio `gamma` is not part of the
/// published TNB table; both presets use the thin-rod cross-section value
/// `gamma = 3` (a rigid rod of length `2l` has polar second moment
/// `J = l^2 S / 3`), and a config file can override it.
pub fn preset(name: &str) -> Result<Config> {
    match name {
        "academic" => Ok(Config {
            params: BridgeParams::new(1.0, 1.0, 3.0, 1, 1)?,
            model: SlackeningModel::mmk(3.0, 1.0 / 3.0)?,
            reference_beta: None,
        }),
        "tnb" => {
            let beta_ref = 8.1833e-5;
            Ok(Config {
                params: BridgeParams::new(8.0353e-4, beta_ref, 3.0, 3, 2)?,
                model: SlackeningModel::mmk(185.1, 0.0265)?,
                reference_beta: Some(beta_ref),
            })
        }
        other => Err(Error::UnknownPreset {
            name: other.to_string(),
            available: "academic, tnb",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_mmk_config() {
        let cfg = parse_config(
            "alpha = 1\nbeta = 2\ngamma = 3\nj = 1\nk = 1\nmodel = mmk\nm = 3\nr0 = 0.3333\n",
        )
        .unwrap();
        assert_eq!(cfg.params.alpha, 1.0);
        assert_eq!(cfg.params.j, 1);
        assert!(matches!(cfg.model, SlackeningModel::Mmk { .. }));
    }

    #[test]
    fn rejects_zero_mode_index() {
        let err = parse_config(
            "alpha = 1\nbeta = 1\ngamma = 3\nj = 0\nk = 1\nmodel = mmk\nm = 3\nr0 = 0.3\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains('j'), "{err}");
    }

    #[test]
    fn rejects_negative_alpha() {
        let err = parse_config(
            "alpha = -1\nbeta = 1\ngamma = 3\nj = 1\nk = 1\nmodel = mmk\nm = 3\nr0 = 0.3\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn rejects_unknown_key() {
        let err = parse_config("alpha = 1\nzeta = 3\n").unwrap_err();
        assert!(err.to_string().contains("zeta"), "{err}");
    }

    #[test]
    fn round_trips_through_serialize() {
        let cfg = parse_config(
            "alpha = 8.0353e-4\nbeta = 8.1833e-5\ngamma = 3\nj = 3\nk = 2\nmodel = mmk\nm = 185.1\nr0 = 0.0265\n",
        )
        .unwrap();
        let text = serialize_config(&cfg);
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn presets_are_valid_and_named() {
        let a = preset("academic").unwrap();
        assert_eq!(a.params.alpha, 1.0);
        assert_eq!(a.params.gamma, 3.0);
        assert!(matches!(a.model, SlackeningModel::Mmk { m, r0 } if m == 3.0 && r0 == 1.0 / 3.0));

        let t = preset("tnb").unwrap();
        assert_eq!(t.params.alpha, 8.0353e-4);
        assert!(matches!(t.model, SlackeningModel::Mmk { m, r0 } if m == 185.1 && r0 == 0.0265));
        assert_eq!(t.reference_beta, Some(8.1833e-5));

        let err = preset("bogus").unwrap_err();
        assert!(err.to_string().contains("academic"), "{err}");
    }

    #[test]
    fn piecewise_config_reads_sidecar() {
        let cfg = parse_config_with(
            "alpha = 1\nbeta = 1\ngamma = 3\nj = 1\nk = 1\nmodel = piecewise\nknots = cable.csv\n",
            |path| {
                assert_eq!(path, "cable.csv");
                Ok("-2.0,-1.05\n-1.0,-1.0\n1.0,1.0\n".to_string())
            },
        )
        .unwrap();
        assert!(matches!(cfg.model, SlackeningModel::PiecewiseLinear(_)));
    }
}
