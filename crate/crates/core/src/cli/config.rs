use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::DEFAULT_DELTA;
use crate::lattice::QuasiMomentum;
use crate::spectral::ScattererConfig;

/// `k` as three numbers or a named preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Preset(String),
    Vector([f64; 3]),
}

impl KSpec {
    pub fn resolve(&self) -> Result<QuasiMomentum> {
        match self {
            KSpec::Preset(name) if name == "paper" || name == "reference" => Ok(QuasiMomentum::reference()),
            KSpec::Preset(name) => Err(Error::param(format!("unknown quasimomentum preset {name:?}"))),
            KSpec::Vector(k) => QuasiMomentum::new(*k),
        }
    }

    /// Parses a preset name (`paper` or its alias `reference`) or `a,b,c`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Ok(KSpec::Preset(text.to_string()));
        }
        Ok(KSpec::Vector(parse_triple(text)?))
    }
}

pub fn parse_triple(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::param(format!("expected three comma-separated numbers, got {text:?}")));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("{p:?} is not a number")))?;
    }
    Ok(out)
}

/// Parses `a:b`.
pub fn parse_window(text: &str) -> Result<[f64; 2]> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Error::param(format!("window {text:?} must look like a:b")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::param(format!("{s:?} is not a number")))
    };
    Ok([num(a)?, num(b)?])
}

/// Filter thresholds; a missing `e` or `f` is chosen canonically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub g: f64,
    pub d: f64,
    pub e: Option<f64>,
    pub f: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            g: 10.0,
            d: 1.0,
            e: None,
            f: None,
        }
    }
}

/// One experiment: the model parameters plus where to write results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k: KSpec,
    pub x0: [f64; 3],
    pub phi: f64,
    pub window: [f64; 2],
    pub delta: f64,
    pub filter: FilterConfig,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: KSpec::Preset("paper".into()),
            x0: [0.0; 3],
            phi: 0.0,
            window: [0.0, 100.0],
            delta: DEFAULT_DELTA,
            filter: FilterConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.quasimomentum()?;
        self.scatterer()?;
        let [a, b] = self.window;
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && a <= b) {
            return Err(Error::param(format!("window [{a}, {b}] is invalid")));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param(format!("delta = {} must be positive", self.delta)));
        }
        Ok(())
    }

    pub fn quasimomentum(&self) -> Result<QuasiMomentum> {
        self.k.resolve()
    }

    pub fn scatterer(&self) -> Result<ScattererConfig> {
        ScattererConfig::new(self.x0, self.phi)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window[0], self.window[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"k":[0.1,0.2,0.3],"phi":0.5}"#).unwrap();
        assert_eq!(cfg.k, KSpec::Vector([0.1, 0.2, 0.3]));
        assert_eq!(cfg.window, [0.0, 100.0]);
        assert_eq!(cfg.filter.g, 10.0);
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"k":"paper"}"#).unwrap();
        assert_eq!(cfg.quasimomentum().unwrap(), QuasiMomentum::reference());
        assert_eq!(KSpec::Preset("reference".into()).resolve().unwrap(), QuasiMomentum::reference());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.phi = std::f64::consts::PI;
        assert!(cfg.validate().is_err());
        cfg.phi = 0.0;
        cfg.window = [5.0, 1.0];
        assert!(cfg.validate().is_err());
        cfg.window = [0.0, 1.0];
        cfg.k = KSpec::Preset("other".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_triple("1, 2,3.5").unwrap(), [1.0, 2.0, 3.5]);
        assert!(parse_triple("1,2").is_err());
        assert_eq!(parse_window("99:101").unwrap(), [99.0, 101.0]);
        assert!(parse_window("99-101").is_err());
        assert_eq!(KSpec::parse("paper").unwrap(), KSpec::Preset("paper".into()));
        assert_eq!(KSpec::parse("0.5,0.25,0.125").unwrap(), KSpec::Vector([0.5, 0.25, 0.125]));
    }
}
