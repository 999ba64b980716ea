//! JSON and CSV emission.
//!
//! Every JSON document is an envelope `{tool, version, config, reports}`.
//! Keys follow struct field order and floats use the shortest round-trip
//! form, so equal inputs give byte-identical output.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mass::MassReport;

pub const TOOL: &str = "gbc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a C,
    pub reports: &'a R,
}

/// Pretty-printed envelope with a trailing newline.
pub fn to_json<C: Serialize, R: Serialize>(config: &C, reports: &R) -> Result<String> {
    let env = Envelope { tool: TOOL, version: VERSION, config, reports };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::Domain(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// `label,evaluator,radius,flux` rows, one per radius of every report.
pub fn flux_csv(reports: &[MassReport]) -> String {
    let mut out = String::from("label,evaluator,radius,flux\n");
    for r in reports {
        let label = if r.label.contains([',', '"']) { format!("\"{}\"", r.label.replace('"', "\"\"")) } else { r.label.clone() };
        for (radius, flux) in r.radii.iter().zip(&r.flux) {
            out.push_str(&format!("{label},{},{radius:e},{flux:e}\n", r.evaluator));
        }
    }
    out
}
