//! Run-configuration plumbing: the flat key=value config file format,
//! comma-separated list parsing and the figure presets.

use capasym_core::model::{omega_from_physical, DimensionlessParams, PhysicalParams};
use capasym_core::perturbation::IcFamily;
use std::collections::BTreeMap;
use std::path::Path;

/// Configuration-level failure; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parse the flat `key=value` file format with bracketed section headers.
/// Lines starting with `#` or `;` are comments; keys are reported as
/// `section.key` (or bare `key` before any section).
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line
            .strip_prefix('[')
            .and_then(|rest| rest.strip_suffix(']'))
        {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "malformed line {} in {}: expected key=value, got `{raw}`",
                lineno + 1,
                path.display()
            )));
        };
        let full = if section.is_empty() {
            key.trim().to_string()
        } else {
            format!("{section}.{}", key.trim())
        };
        out.insert(full, value.trim().to_string());
    }
    Ok(out)
}

/// Read the `[physical]` block of a config file into tube parameters and
/// derive the dimensionless pair.
pub fn physical_from_file(
    path: &Path,
) -> Result<(PhysicalParams, DimensionlessParams), ConfigError> {
    let map = parse_config_file(path)?;
    let get = |key: &str| -> Result<f64, ConfigError> {
        let full = format!("physical.{key}");
        let raw = map.get(&full).or_else(|| map.get(key)).ok_or_else(|| {
            ConfigError(format!(
                "missing `{key}` in [physical] block of {}",
                path.display()
            ))
        })?;
        raw.parse::<f64>()
            .map_err(|_| ConfigError(format!("`{key}` is not a number: {raw}")))
    };
    let params = PhysicalParams {
        density: get("density")?,
        gravity: get("gravity")?,
        radius: get("radius")?,
        viscosity: get("viscosity")?,
        surface_tension: get("surface_tension")?,
        contact_angle: get("contact_angle")?,
    };
    let dimensionless = omega_from_physical(&params).map_err(|e| ConfigError(e.to_string()))?;
    Ok((params, dimensionless))
}

/// Parse a comma-separated list of floats.
pub fn parse_list(raw: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        out.push(
            item.parse::<f64>()
                .map_err(|_| ConfigError(format!("not a number in list: `{item}`")))?,
        );
    }
    if out.is_empty() {
        return Err(ConfigError("empty list".into()));
    }
    Ok(out)
}

/// Named figure-reproduction presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name {
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(ConfigError(format!(
                "unknown preset `{other}` (expected fig2a, fig2b, fig3 or fig4)"
            ))),
        }
    }
}

/// Preset payload for the delta study: (family, deltas, T).
pub fn delta_preset(p: Preset) -> Result<(IcFamily, Vec<f64>, f64), ConfigError> {
    let deltas = vec![0.2, 0.1, 0.05, 0.02, 0.01];
    match p {
        Preset::Fig2a => Ok((IcFamily::A, deltas, 6.0)),
        Preset::Fig2b => Ok((IcFamily::B, deltas, 6.0)),
        _ => Err(ConfigError(
            "presets fig3/fig4 belong to the `asym` command".into(),
        )),
    }
}

/// Preset payload for the asymptotics command: (epsilon, anchor T).
pub fn asym_preset(p: Preset) -> Result<(f64, f64), ConfigError> {
    match p {
        Preset::Fig3 => Ok((0.8, 6.855)),
        Preset::Fig4 => Ok((0.1, 12.582)),
        _ => Err(ConfigError(
            "presets fig2a/fig2b belong to the `delta-study` command".into(),
        )),
    }
}

/// Worker-thread cap for study sweeps: `CAPASYM_THREADS`, else all cores.
pub fn thread_cap() -> usize {
    match std::env::var("CAPASYM_THREADS") {
        Ok(v) => v.parse::<usize>().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn config_file_round_trip() {
        let dir = std::env::temp_dir().join("capasym-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("water.cfg");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# water in a 1 mm tube").unwrap();
        writeln!(f, "[physical]").unwrap();
        writeln!(f, "density = 1000").unwrap();
        writeln!(f, "gravity = 9.81").unwrap();
        writeln!(f, "radius = 1e-3").unwrap();
        writeln!(f, "viscosity = 1e-3").unwrap();
        writeln!(f, "surface_tension = 0.0727").unwrap();
        writeln!(f, "contact_angle = 0").unwrap();
        let (_, d) = physical_from_file(&path).unwrap();
        assert!((d.omega() - 10.3418).abs() < 1e-3);
        assert!((d.epsilon() - 0.311).abs() < 5e-4);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(
            parse_list("1e-1, 1e-2,1e-3").unwrap(),
            vec![0.1, 0.01, 0.001]
        );
        assert!(parse_list("a,b").is_err());
        assert!(parse_list("").is_err());
    }

    #[test]
    fn preset_routing() {
        assert!(delta_preset(Preset::Fig2a).is_ok());
        assert!(delta_preset(Preset::Fig3).is_err());
        assert!(asym_preset(Preset::Fig4).is_ok());
        assert!(asym_preset(Preset::Fig2b).is_err());
        assert!(Preset::parse("fig5").is_err());
    }
}
