//! JSON metric-spec documents.
//!
//! ```json
//! {"dimension": 6, "k": 2, "type": "schwarzschild", "mass_param": 1.0}
//! {"dimension": 5, "k": 1, "type": "radial_expr", "expr": "-0.5*ln(1+r^-3)", "tau": 3}
//! {"dimension": 6, "k": 2, "type": "builtin:two_center"}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{builtin, expr, schwarzschild_profile, Ball, Field, MetricSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub dimension: usize,
    pub k: usize,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excised_radius: Option<f64>,
}

impl MetricDoc {
    pub fn new(dimension: usize, k: usize, kind: &str) -> Self {
        Self { dimension, k, kind: kind.to_string(), mass_param: None, expr: None, tau: None, excised_radius: None }
    }

    pub fn to_spec(&self) -> Result<MetricSpec> {
        let (n, k) = (self.dimension, self.k);
        let unused = |field: &str, present: bool| {
            if present {
                Err(Error::Spec(format!("field `{field}` is not used by type `{}`", self.kind)))
            } else {
                Ok(())
            }
        };
        let mut spec = match self.kind.as_str() {
            "schwarzschild" => {
                unused("expr", self.expr.is_some())?;
                unused("tau", self.tau.is_some())?;
                let m = self.mass_param.ok_or_else(|| Error::Spec("schwarzschild needs `mass_param`".into()))?;
                schwarzschild_profile(n, k, m)?
            }
            "radial_expr" => {
                unused("mass_param", self.mass_param.is_some())?;
                let src = self.expr.as_deref().ok_or_else(|| Error::Spec("radial_expr needs `expr`".into()))?;
                let tau = self.tau.ok_or_else(|| Error::Spec("radial_expr needs a decay order `tau`".into()))?;
                MetricSpec::custom(n, k, Field::Radial(expr::parse(src)?), tau, &format!("radial_expr({src})"))?
            }
            "flat" => {
                unused("mass_param", self.mass_param.is_some())?;
                unused("expr", self.expr.is_some())?;
                MetricSpec::flat(n, k)?
            }
            other => match other.strip_prefix("builtin:") {
                Some(name) => {
                    unused("mass_param", self.mass_param.is_some())?;
                    unused("expr", self.expr.is_some())?;
                    let mut s = builtin(name, n, k)?;
                    if let Some(tau) = self.tau {
                        s.tau = tau;
                    }
                    s
                }
                None => {
                    return Err(Error::Spec(format!(
                        "unknown type `{other}`; expected schwarzschild, radial_expr, flat or builtin:<name>"
                    )))
                }
            },
        };
        if let Some(radius) = self.excised_radius {
            spec.excised = vec![Ball::centered(n, radius)];
        }
        spec.doc = self.clone();
        spec.validate()?;
        Ok(spec)
    }
}

pub fn spec_from_json(text: &str) -> Result<MetricSpec> {
    let doc: MetricDoc = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    doc.to_spec()
}

pub fn load_spec(path: &Path) -> Result<MetricSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    spec_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        let s = spec_from_json(r#"{"dimension": 6, "k": 2, "type": "schwarzschild", "mass_param": 1.0}"#).unwrap();
        assert_eq!(s.catalog.unwrap().expected_mass, 1.0);
        let s = spec_from_json(r#"{"dimension":5,"k":1,"type":"radial_expr","expr":"-0.5*ln(1+r^-3)","tau":3}"#)
            .unwrap();
        assert!(s.is_radial());
        let json = serde_json::to_string(&s.doc).unwrap();
        assert_eq!(spec_from_json(&json).unwrap().doc, s.doc);
        let s = spec_from_json(r#"{"dimension": 6, "k": 2, "type": "flat", "excised_radius": 1.0}"#).unwrap();
        assert_eq!(s.excised.len(), 1);
    }

    #[test]
    fn rejects_bad_documents() {
        for bad in [
            r#"{"dimension": 6, "k": 2, "type": "flat", "colour": 1}"#,
            r#"{"dimension": 6, "k": 2, "type": "schwarzschild"}"#,
            r#"{"dimension": 6, "k": 3, "type": "flat"}"#,
            r#"{"dimension": 6, "k": 2, "type": "radial_expr", "expr": "ln(", "tau": 1}"#,
            r#"{"dimension": 6, "k": 2, "type": "radial_expr", "expr": "r^-4"}"#,
            r#"{"dimension": 6, "k": 2, "type": "builtin:unknown"}"#,
            r#"{"dimension": 6, "k": 2, "type": "torus"}"#,
        ] {
            assert!(spec_from_json(bad).is_err(), "{bad}");
        }
    }
}
