//! Line-oriented `key = value` configuration files.
//!
//! `#` starts a comment. Lists are comma separated; an integer or real list
//! entry may also be a `start:step:end` range with an inclusive end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{io_err, CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct Config {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("expected key = value, got '{line}'"),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    /// Rejects keys outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> CliResult<()> {
        for (key, (line, _)) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(self.err(*line, format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }

    fn err(&self, line: usize, msg: String) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line,
            msg,
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| self.err(*line, format!("{key}: {e}"))),
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(item.parse().map_err(|e| self.err(*line, format!("{key}: '{item}': {e}")))?);
        }
        Ok(Some(out))
    }

    /// Comma list whose entries may be inclusive `start:step:end` ranges.
    pub fn get_int_range(&self, key: &str) -> CliResult<Option<Vec<usize>>> {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = |m: &str| self.err(*line, format!("{key}: '{item}': {m}"));
            let parts: Vec<&str> = item.split(':').collect();
            match parts.as_slice() {
                [one] => out.push(one.trim().parse().map_err(|_| bad("not an integer"))?),
                [a, s, b] => {
                    let (a, s, b): (usize, usize, usize) = (
                        a.trim().parse().map_err(|_| bad("bad range start"))?,
                        s.trim().parse().map_err(|_| bad("bad range step"))?,
                        b.trim().parse().map_err(|_| bad("bad range end"))?,
                    );
                    if s == 0 || b < a {
                        return Err(bad("empty range"));
                    }
                    out.extend((a..=b).step_by(s));
                }
                _ => return Err(bad("expected an integer or start:step:end")),
            }
        }
        Ok(Some(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text, Path::new("test.cfg")).unwrap()
    }

    #[test]
    fn parses_values_lists_and_ranges() {
        let c = cfg("# header\nn = 512 # trailing\nk = 40:10:70, 100\nnoise = 0.00001, 0.05\nname=x\n");
        assert_eq!(c.get::<usize>("n").unwrap(), Some(512));
        assert_eq!(c.get_int_range("k").unwrap(), Some(vec![40, 50, 60, 70, 100]));
        assert_eq!(c.get_list::<f64>("noise").unwrap(), Some(vec![1e-5, 0.05]));
        assert_eq!(c.get::<String>("name").unwrap().as_deref(), Some("x"));
        assert_eq!(c.get::<usize>("missing").unwrap(), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Config::parse("n = 1\nbroken line\n", Path::new("a.cfg")).unwrap_err();
        assert!(e.to_string().contains("a.cfg:2"), "{e}");
        let c = cfg("n = 1\nk = abc\n");
        assert!(c.get::<usize>("k").unwrap_err().to_string().contains(":2"));
        assert!(c.check_keys(&["n"]).is_err());
        assert!(cfg("k = 5:0:9").get_int_range("k").is_err());
        assert!(Config::parse("a=1\na=2", Path::new("d")).is_err());
    }
}
