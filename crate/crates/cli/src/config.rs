//! Run configuration: the well, the separation and optional command
//! parameters, read from JSON and overridden by flags.

use std::path::Path;

use magtun_core::potential::{ConfigDescriptor, DoubleWellConfig, WellDescriptor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub well: WellDescriptor,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<f64>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_half: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            well: WellDescriptor { profile: "bump".into(), depth: 1.0, a: 1.0 },
            l: 4.0,
            h: None,
            eta: None,
            beta: None,
            grid: None,
            box_half: None,
            tol: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let rc: Self = serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))?;
        rc.validate()?;
        Ok(rc)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// Field checks that do not need the numerical modules.
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        for (name, list) in [("h", &self.h), ("eta", &self.eta), ("beta", &self.beta)] {
            if let Some(list) = list {
                if list.is_empty() {
                    return Err(format!("{name} list is empty"));
                }
                for &v in list {
                    positive(name, v)?;
                }
            }
        }
        if let Some(g) = self.grid {
            positive("grid", g)?;
        }
        if let Some([x, y]) = self.box_half {
            positive("box half-width", x)?;
            positive("box half-width", y)?;
        }
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        Ok(())
    }

    pub fn double_well(&self) -> Result<DoubleWellConfig, String> {
        let d = ConfigDescriptor { well: self.well.clone(), l: self.l };
        DoubleWellConfig::from_descriptor(&d).map_err(|e| e.to_string())
    }
}

/// `lo:hi:n`, geometrically spaced and listed from `hi` down to `lo`.
pub fn parse_h_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("h-range must be lo:hi:n, got '{s}'"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad lower bound '{}'", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad upper bound '{}'", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad point count '{}'", parts[2]))?;
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("h-range needs 0 < lo <= hi, got {lo}:{hi}"));
    }
    match n {
        0 => Err("h-range needs at least one point".into()),
        1 => Ok(vec![hi]),
        _ => {
            let ratio = (lo / hi).ln() / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|k| hi * (ratio * k as f64).exp()).collect();
            v[n - 1] = lo;
            Ok(v)
        }
    }
}
