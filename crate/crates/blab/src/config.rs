//! Line-oriented configuration: `[section]` headers, `key = value` lines and
//! `#` comments. Every key has a default; unknown sections and keys are
//! errors. Overrides of the form `section.key=value` are applied after the
//! file, with the same validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use blab_core::cantor::{parse_rational, Scheme};
use num_rational::BigRational;

use crate::error::{BlabError, Result};

/// (section, key, default, meaning)
pub const KEYS: &[(&str, &str, &str, &str)] = &[
    ("scenario", "name", "", "scenario label copied into reports"),
    ("scenario", "seed", "1", "seed for every random choice"),
    ("scenario", "k", "0.5", "norm k of the Teichmüller form, in (0, 1)"),
    ("scenario", "phi", "boundary-singular", "phi of the form: boundary-singular | monomial:N | boundary-power:S"),
    ("cantor", "scheme", "absolute-fifth", "absolute-fifth | proportional-fifth"),
    ("cantor", "stage", "6", "construction stage, at most 64 (20 for anything that lists intervals)"),
    ("cantor", "lambda", "0.8", "radial scale, a rational in (0, 1)"),
    ("field", "kappa", "0.5", "value of kappa on E, in [0, 1)"),
    ("field", "set", "cantor", "E: cantor | sector | annulus | disk | empty"),
    ("field", "sector", "0.2,0.6,0,1.5", "inner, outer, start, end of the sector (or annulus radii)"),
    ("field", "disk", "0.3,0.2,0.1", "centre re, centre im, radius of a disk E and of the landslide control disk"),
    ("field", "m", "1,2,3", "powers m of the perturbations z^m on the Cantor set"),
    ("field", "t", "0.1,0.01", "perturbation sizes t for the certified pairs"),
    ("battery", "pairs", "100", "number of randomized pairs per kind"),
    ("battery", "phis", "10", "size of the phi test battery (1..10)"),
    ("battery", "degree", "15", "certificates compare pairings against z^0..z^degree"),
    ("battery", "moments", "10", "moment battery uses n = 0..moments"),
    ("battery", "x", "0.9,0.99,0.999", "kernel sweep parameters"),
    ("battery", "family_x", "0,0.5,0.9,0.99,0.999", "kernel family for the Hamilton search"),
    ("battery", "rho", "0.5", "radius of the mass-fraction disk"),
    ("battery", "disks", "100", "random disks in the landslide probe"),
    ("battery", "disk_radius", "0.05", "radius of the probe disks"),
    ("battery", "samples", "4000", "sample budget per ess-sup estimate"),
    ("battery", "iterations", "200", "subgradient iterations per start"),
    ("battery", "starts", "8", "random starts in addition to one per family member"),
    ("battery", "local_degree", "3", "degree of the local families in extremality probes"),
    ("solver", "enabled", "true", "run the Beltrami solver inside construction scenarios"),
    ("solver", "n", "512", "grid size, a power of two"),
    ("solver", "half_width", "2", "grid square is [-L, L]^2"),
    ("solver", "padding", "2", "torus size for S in units of the grid"),
    ("solver", "tol", "1e-9", "stop when the grid L2 increment is below this"),
    ("solver", "max_iter", "100", "iteration cap"),
    ("solver", "support", "disk", "disk (mu extended by 0) | square (mu on the whole square)"),
    ("solver", "mu", "constant:0.3", "field for the solve subcommand: constant:C | disk:C | construction"),
    ("solver", "image_samples", "20000", "samples pushed through the map for image statistics"),
    ("output", "dir", "blab-out", "output directory"),
    ("output", "csv", "true", "write CSV tables next to the JSON report"),
    ("output", "grid", "false", "write solved grids in the binary grid format"),
];

pub const SECTIONS: &[&str] = &["scenario", "cantor", "field", "battery", "solver", "output"];

fn known(section: &str, key: &str) -> bool {
    KEYS.iter().any(|(s, k, _, _)| *s == section && *k == key)
}

/// Raw key/value store with file and override provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<(String, String), String>,
}

impl Default for Config {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|(s, k, d, _)| ((s.to_string(), k.to_string()), d.to_string()))
            .collect();
        Self { values }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| BlabError::Config(format!("line {line_no}: malformed section header `{line}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(BlabError::Config(format!("line {line_no}: unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BlabError::Config(format!("line {line_no}: expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| BlabError::Config(format!("line {line_no}: `{key}` appears before any [section]")))?;
            if !known(sec, key) {
                return Err(BlabError::Config(format!("line {line_no}: unknown key `{key}` in [{sec}]")));
            }
            let id = (sec.to_string(), key.to_string());
            if let Some(prev) = seen.insert(id.clone(), line_no) {
                return Err(BlabError::Config(format!(
                    "line {line_no}: `{sec}.{key}` already set on line {prev}"
                )));
            }
            cfg.values.insert(id, value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BlabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            BlabError::Config(m) => BlabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Applies `section.key=value`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| BlabError::Config(format!("override `{assignment}` is not section.key=value")))?;
        let (sec, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| BlabError::Config(format!("override key `{path}` is not section.key")))?;
        if !SECTIONS.contains(&sec) {
            return Err(BlabError::Config(format!("override: unknown section `{sec}`")));
        }
        if !known(sec, key) {
            return Err(BlabError::Config(format!("override: unknown key `{key}` in [{sec}]")));
        }
        self.values.insert((sec.to_string(), key.to_string()), value.trim().to_string());
        Ok(())
    }

    pub fn raw(&self, section: &str, key: &str) -> &str {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
            .unwrap_or_else(|| panic!("no such key {section}.{key}"))
    }

    /// All values in section/key order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.values.iter().map(|((s, k), v)| (s.as_str(), k.as_str(), v.as_str()))
    }

    fn bad<T>(&self, section: &str, key: &str, what: &str) -> Result<T> {
        Err(BlabError::Config(format!(
            "{section}.{key} = `{}`: {what}",
            self.raw(section, key)
        )))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<f64> {
        match self.raw(section, key).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.bad(section, key, "expected a finite number"),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<u64> {
        match self.raw(section, key).parse::<u64>() {
            Ok(v) => Ok(v),
            Err(_) => self.bad(section, key, "expected a nonnegative integer"),
        }
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<usize> {
        Ok(self.u64(section, key)? as usize)
    }

    pub fn bool(&self, section: &str, key: &str) -> Result<bool> {
        match self.raw(section, key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => self.bad(section, key, "expected true or false"),
        }
    }

    pub fn str(&self, section: &str, key: &str) -> &str {
        self.raw(section, key)
    }

    pub fn rational(&self, section: &str, key: &str) -> Result<BigRational> {
        parse_rational(self.raw(section, key)).or_else(|_| self.bad(section, key, "expected a rational number"))
    }

    pub fn f64_list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(section, key);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| match t.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => self.bad(section, key, "expected a comma-separated list of numbers"),
            })
            .collect()
    }

    pub fn u32_list(&self, section: &str, key: &str) -> Result<Vec<u32>> {
        let raw = self.raw(section, key);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .or_else(|_| self.bad(section, key, "expected a comma-separated list of integers"))
            })
            .collect()
    }

    pub fn scheme(&self) -> Result<Scheme> {
        Scheme::parse(self.raw("cantor", "scheme")).or_else(|_| {
            self.bad("cantor", "scheme", "expected absolute-fifth or proportional-fifth")
        })
    }
}

impl fmt::Display for Config {
    /// Canonical file form; parsing it gives back the same configuration.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, sec) in SECTIONS.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "[{sec}]")?;
            for (s, k, _, _) in KEYS.iter().filter(|(s, ..)| s == sec) {
                writeln!(f, "{k} = {}", self.raw(s, k))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_key() {
        let c = Config::default();
        for (s, k, d, _) in KEYS {
            assert_eq!(c.raw(s, k), *d);
        }
    }

    #[test]
    fn file_values_and_comments() {
        let c = Config::parse("# top\n[cantor]\nstage = 3 # trailing\n\n[field]\nkappa=0.25\n").unwrap();
        assert_eq!(c.u64("cantor", "stage").unwrap(), 3);
        assert_eq!(c.f64("field", "kappa").unwrap(), 0.25);
    }

    #[test]
    fn unknown_and_malformed_lines_fail() {
        for text in [
            "[cantor]\nstagee = 3\n",
            "[nope]\n",
            "stage = 3\n",
            "[cantor]\nstage 3\n",
            "[cantor\n",
            "[cantor]\nstage = 1\nstage = 2\n",
        ] {
            assert!(matches!(Config::parse(text), Err(BlabError::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        let mut c = Config::default();
        c.set("cantor.lambda=3/4").unwrap();
        assert_eq!(Config::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn typed_errors_name_the_key() {
        let mut c = Config::default();
        c.set("cantor.stage=-1").unwrap();
        let e = c.u64("cantor", "stage").unwrap_err().to_string();
        assert!(e.contains("cantor.stage"), "{e}");
    }
}
