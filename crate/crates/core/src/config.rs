//! Flat key-value run configuration with dotted sections, e.g.
//!
//! ```text
//! field.dimension = 1
//! field.intensity = 0.25
//! field.radii = 1.0
//! field.weights = 1.0
//! field.seed = 7
//! nu.pmf = 0:0.5,2:0.5
//! sim.dt = 0.001
//! ```
//!
//! `#` starts a comment. Keys are consumed by typed getters; any key left
//! unconsumed at the end of parsing is rejected, so typos fail loudly.

use crate::branching::{SimConfig, StopRule};
use crate::error::{Error, Result};
use crate::obstacles::{ObstacleField, ShapeLaw};
use crate::offspring::OffspringDistribution;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Default)]
pub struct RunConfig {
    map: BTreeMap<String, String>,
    consumed: RefCell<BTreeSet<String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}: empty key", lineno + 1)));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::config(format!("duplicate key `{key}`")));
            }
        }
        Ok(RunConfig { map, consumed: RefCell::new(BTreeSet::new()) })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Command-line override; replaces or inserts a key.
    pub fn set(&mut self, key: &str, value: &str) {
        self.map.insert(key.trim().to_string(), value.trim().to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.map.get(key).map(String::as_str);
        if v.is_some() {
            self.consumed.borrow_mut().insert(key.to_string());
        }
        v
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        self.raw(key).map(|s| s.to_string())
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(format!("key `{key}`: `{s}` is not a number"))),
        }
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::config(format!("key `{key}`: `{s}` is not a nonnegative integer"))),
        }
    }

    pub fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some("true") | Some("1") | Some("yes") => Ok(Some(true)),
            Some("false") | Some("0") | Some("no") => Ok(Some(false)),
            Some(s) => Err(Error::config(format!("key `{key}`: `{s}` is not a boolean"))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.opt_u64(key)?.ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.opt_bool(key)?.unwrap_or(default))
    }

    pub fn list_f64(&self, key: &str) -> Result<Vec<f64>> {
        let s = self
            .raw(key)
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))?;
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(format!("key `{key}`: `{tok}` is not a number")))
            })
            .collect()
    }

    pub fn opt_list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        if self.map.contains_key(key) {
            self.list_f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Reject any key never consumed by a getter.
    pub fn finish(&self) -> Result<()> {
        let consumed = self.consumed.borrow();
        let unknown: Vec<&String> = self.map.keys().filter(|k| !consumed.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "unknown key(s): {}",
                unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    }

    /// Sorted `key = value` echo for output stamping.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.map.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    // ----- typed blocks -----

    /// `field.*` block; None when `field.intensity` is absent.
    pub fn field(&self) -> Result<Option<ObstacleField>> {
        if !self.map.contains_key("field.intensity") {
            return Ok(None);
        }
        let dim = self.u64_or("field.dimension", 1)? as usize;
        let intensity = self.f64("field.intensity")?;
        let radii = self.opt_list_f64("field.radii")?.unwrap_or_else(|| vec![1.0]);
        let weights = self
            .opt_list_f64("field.weights")?
            .unwrap_or_else(|| vec![1.0 / radii.len() as f64; radii.len()]);
        if radii.len() != weights.len() {
            return Err(Error::config(format!(
                "field.radii has {} entries but field.weights has {}",
                radii.len(),
                weights.len()
            )));
        }
        let shape = ShapeLaw::new(radii.into_iter().zip(weights).collect(), intensity)?;
        let seed = self.u64_or("field.seed", 0x0b57_ac1e)?;
        let field = match self.opt_f64("field.cell_size")? {
            Some(cs) => ObstacleField::with_cell_size(shape, dim, seed, cs)?,
            None => ObstacleField::new(shape, dim, seed)?,
        };
        Ok(Some(field))
    }

    /// `nu.pmf` in `k:p,k:p` form; binary branching by default.
    pub fn offspring(&self) -> Result<OffspringDistribution> {
        match self.raw("nu.pmf") {
            None => Ok(OffspringDistribution::binary()),
            Some("binary") => Ok(OffspringDistribution::binary()),
            Some("geometric") => Ok(OffspringDistribution::geometric_type()),
            Some(s) => {
                let mut pmf = Vec::new();
                for tok in s.split(',') {
                    let (k, p) = tok
                        .split_once(':')
                        .ok_or_else(|| Error::config(format!("nu.pmf: `{tok}` is not k:p")))?;
                    let k = k.trim().parse::<u32>().map_err(|_| {
                        Error::config(format!("nu.pmf: `{k}` is not an offspring count"))
                    })?;
                    let p = p.trim().parse::<f64>().map_err(|_| {
                        Error::config(format!("nu.pmf: `{p}` is not a probability"))
                    })?;
                    pmf.push((k, p));
                }
                OffspringDistribution::new(pmf)
            }
        }
    }

    /// `sim.*` block.
    pub fn sim(&self) -> Result<SimConfig> {
        let stop = match (self.opt_f64("sim.stop_radius")?, self.opt_f64("sim.half_line")?) {
            (Some(_), Some(_)) => {
                return Err(Error::config("set either sim.stop_radius or sim.half_line, not both"))
            }
            (Some(r), None) => StopRule::BallExit { radius: r },
            (None, Some(level)) => StopRule::HalfLine { level },
            (None, None) => StopRule::None,
        };
        let t_max = self.f64_or("sim.t_max", SimConfig::default_t_max(&stop))?;
        let mut cfg = SimConfig::new(
            self.f64_or("sim.epsilon", 0.0)?,
            self.f64_or("sim.dt", 1e-3)?,
            stop,
            t_max,
            self.u64_or("sim.initial_count", 1)?,
            self.u64_or("sim.seed", 1)?,
        );
        cfg.bridge = self.bool_or("sim.bridge", false)?;
        if let Some(times) = self.opt_list_f64("sim.snapshots")? {
            cfg.snapshot_times = times;
        }
        Ok(cfg)
    }

    pub fn threads(&self) -> Result<usize> {
        Ok(self.u64_or("threads", 1)? as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let cfg = RunConfig::parse("field.intensity = 0.5\nfield.dimension = 1 # balls\nbogus.key = 3\n").unwrap();
        let _ = cfg.field().unwrap();
        let err = cfg.finish().unwrap_err();
        assert!(err.to_string().contains("bogus.key"), "{err}");
    }

    #[test]
    fn degenerate_pmf_rejected_with_sigma2_message() {
        let cfg = RunConfig::parse("nu.pmf = 1:1.0\n").unwrap();
        let err = cfg.offspring().unwrap_err();
        assert!(err.to_string().contains("sigma^2 > 0"), "{err}");
    }

    #[test]
    fn sim_block_defaults_and_stop_rules() {
        let cfg = RunConfig::parse("sim.stop_radius = 5\n").unwrap();
        let sim = cfg.sim().unwrap();
        assert_eq!(sim.stop, StopRule::BallExit { radius: 5.0 });
        assert_eq!(sim.t_max, 64.0 * 25.0);
        let cfg = RunConfig::parse("sim.stop_radius = 5\nsim.half_line = 2\n").unwrap();
        assert!(cfg.sim().is_err());
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut cfg = RunConfig::parse("sim.dt = 0.1\n").unwrap();
        cfg.set("sim.dt", "0.01");
        assert_eq!(cfg.sim().unwrap().dt, 0.01);
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(RunConfig::parse("a = 1\na = 2\n").is_err());
    }
}
