//! Error kinds with their exit codes, and the `key = value` config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "FRANKFIT_SEED";

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Estimation(m) => write!(f, "estimation failed: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Settings read from a config file. Each command takes the keys it knows;
/// whatever is left over is reported as an error.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", i + 1));
            }
        }
        Ok(Self { entries })
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.take_raw(key)
            .map(|v| parse_value(key, &v))
            .transpose()
    }

    pub fn take_list<T: FromStr>(&mut self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        self.take_raw(key).map(|v| parse_list(key, &v)).transpose()
    }

    /// Fails if any key was not consumed.
    pub fn finish(self) -> CliResult<()> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<_> = self.entries.into_keys().collect();
            Err(CliError::Usage(format!("unknown config key(s) for this command: {}", keys.join(", "))))
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("config key '{key}': cannot parse '{v}': {e}")))
}

pub fn parse_list<T: FromStr>(key: &str, v: &str) -> CliResult<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_value(key, s)).collect()
}

/// Flag value, else config value.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// `--seed`, then the config file, then `FRANKFIT_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, file: &mut ConfigFile) -> CliResult<u64> {
    if let Some(s) = pick(flag, file.take("seed")?) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{SEED_ENV}='{v}': {e}"))),
        Err(_) => Ok(0),
    }
}

pub fn required<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required setting '{name}' (flag --{name} or config key)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let mut c = ConfigFile::parse("# header\n\ntheta = 2.5  # trailing\nn=10\nthetas = 1, 2,3\n").unwrap();
        assert_eq!(c.take::<f64>("theta").unwrap(), Some(2.5));
        assert_eq!(c.take::<usize>("n").unwrap(), Some(10));
        assert_eq!(c.take_list::<f64>("thetas").unwrap(), Some(vec![1.0, 2.0, 3.0]));
        assert!(c.finish().is_ok());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("theta 2").is_err());
        assert!(ConfigFile::parse("= 2").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
    }

    #[test]
    fn leftover_keys_are_errors() {
        let c = ConfigFile::parse("bogus = 1").unwrap();
        assert_eq!(c.finish().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut c = ConfigFile::parse("n = ten").unwrap();
        assert_eq!(c.take::<usize>("n").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn flag_beats_file() {
        assert_eq!(pick(Some(1), Some(2)), Some(1));
        assert_eq!(pick(None, Some(2)), Some(2));
        assert_eq!(pick::<u8>(None, None), None);
    }
}
