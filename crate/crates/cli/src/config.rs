use std::path::Path;

use serde::de::DeserializeOwned;

use crate::commands::CliError;

/// Values from an optional `--config` file, consulted when a flag is absent.
#[derive(Debug, Default)]
pub struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(FileConfig { table })
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.table
            .get(key)
            .map(|v| v.clone().try_into().map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    /// Flag value, else config value, else `default`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
