//! Plain-text key=value configuration files.
//!
//! One `key = value` per line, `#` starts a comment. Flags always override
//! file values. Unknown keys are fatal so typos never get absorbed
//! silently.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{source}:{}: expected `key = value`, got `{raw_line}`",
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::usage(format!(
                    "{source}:{}: duplicate key `{key}`",
                    idx + 1
                )));
            }
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Fails on any key outside the allowed set.
    pub fn ensure_known_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for key in self.values.keys() {
            if !allowed.contains(key.as_str()) {
                return Err(CliError::usage(format!(
                    "unknown config key `{key}` (known keys: {})",
                    allowed.into_iter().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("config key `{key}`: cannot parse `{raw}`"))),
        }
    }
}

/// Picks the flag value when present, else the file value, else the default.
pub fn resolve<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Comma-separated list of floats.
pub fn parse_float_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{what}: `{part}` is not a number")))
        })
        .collect()
}

/// Directed pairs in `x:y,y:z` form.
pub fn parse_comparisons(raw: &str) -> Result<Vec<(String, String)>, CliError> {
    raw.split(',')
        .map(|pair| {
            pair.trim()
                .split_once(':')
                .map(|(x, y)| (x.trim().to_string(), y.trim().to_string()))
                .filter(|(x, y)| !x.is_empty() && !y.is_empty())
                .ok_or_else(|| {
                    CliError::usage(format!("comparison `{pair}` is not of the form x:y"))
                })
        })
        .collect()
}

/// Utility ranges in `lo:hi` form, `;`-separated.
pub fn parse_ranges(raw: &str) -> Result<Vec<(f64, f64)>, CliError> {
    raw.split(';')
        .map(|range| {
            let (lo, hi) = range
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("range `{range}` is not lo:hi")))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("range `{range}`: `{lo}` is not a number")))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("range `{range}`: `{hi}` is not a number")))?;
            Ok((lo, hi))
        })
        .collect()
}

/// Named systems in `name=path,name=path` form.
pub fn parse_named_paths(raw: &str) -> Result<Vec<(String, String)>, CliError> {
    raw.split(',')
        .map(|entry| {
            entry
                .trim()
                .split_once('=')
                .map(|(name, path)| (name.trim().to_string(), path.trim().to_string()))
                .filter(|(name, path)| !name.is_empty() && !path.is_empty())
                .ok_or_else(|| {
                    CliError::usage(format!("system `{entry}` is not of the form name=path"))
                })
        })
        .collect()
}

/// Power grid in `m=1,3,5;na=30,90` form (cartesian product).
pub fn parse_power_grid(raw: &str) -> Result<Vec<(u32, u32)>, CliError> {
    let mut ms: Option<Vec<u32>> = None;
    let mut nas: Option<Vec<u32>> = None;
    for part in raw.split(';') {
        let (key, values) = part
            .trim()
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("grid part `{part}` is not key=values")))?;
        let parsed: Vec<u32> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("grid value `{v}` is not an integer")))
            })
            .collect::<Result<_, _>>()?;
        match key.trim() {
            "m" => ms = Some(parsed),
            "na" | "n_a" => nas = Some(parsed),
            other => {
                return Err(CliError::usage(format!(
                    "grid axis `{other}` is not one of m, na"
                )))
            }
        }
    }
    let ms = ms.ok_or_else(|| CliError::usage("grid is missing the m axis".to_string()))?;
    let nas = nas.ok_or_else(|| CliError::usage("grid is missing the na axis".to_string()))?;
    let mut grid = Vec::with_capacity(ms.len() * nas.len());
    for &m in &ms {
        for &na in &nas {
            grid.push((m, na));
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_comments() {
        let config = FileConfig::parse("a = 1\n# comment\nb = two # trailing\n", "t").unwrap();
        assert_eq!(config.get("a"), Some("1"));
        assert_eq!(config.get("b"), Some("two"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let config = FileConfig::parse("good = 1\nbda = 2\n", "t").unwrap();
        assert!(config.ensure_known_keys(&["good", "bad"]).is_err());
        assert!(config.ensure_known_keys(&["good", "bda"]).is_ok());
    }

    #[test]
    fn rejects_malformed_lines_and_duplicates() {
        assert!(FileConfig::parse("just a line\n", "t").is_err());
        assert!(FileConfig::parse("a = 1\na = 2\n", "t").is_err());
    }

    #[test]
    fn comparison_syntax() {
        let pairs = parse_comparisons("a:b, b:c").unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], ("a".to_string(), "b".to_string()));
        assert!(parse_comparisons("a-b").is_err());
    }

    #[test]
    fn grid_syntax() {
        let grid = parse_power_grid("m=1,5;na=30,90").unwrap();
        assert_eq!(grid, vec![(1, 30), (1, 90), (5, 30), (5, 90)]);
        assert!(parse_power_grid("m=1").is_err());
        assert!(parse_power_grid("m=1;q=2").is_err());
    }

    #[test]
    fn range_syntax() {
        assert_eq!(
            parse_ranges("0:10;90:100").unwrap(),
            vec![(0.0, 10.0), (90.0, 100.0)]
        );
        assert!(parse_ranges("10").is_err());
    }
}
