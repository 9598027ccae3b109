//! `key=value` text documents used for object metadata and scene records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed key/value document that remembers where each key came from.
#[derive(Debug, Clone)]
pub struct KvDoc {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvDoc {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected key=value, got {line:?}"),
                ));
            };
            let k = k.trim().to_string();
            if entries
                .insert(k.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(KvDoc {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::parse(&self.path, 0, format!("missing key {key:?}")))
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self
            .entries
            .get(key)
            .ok_or_else(|| Error::parse(&self.path, 0, format!("missing key {key:?}")))?;
        v.parse::<T>()
            .map_err(|e| Error::parse(&self.path, *line, format!("bad value for {key}: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self
            .entries
            .get(key)
            .ok_or_else(|| Error::parse(&self.path, 0, format!("missing key {key:?}")))?;
        v.split(',')
            .map(|s| {
                s.trim().parse::<T>().map_err(|e| {
                    Error::parse(&self.path, *line, format!("bad value for {key}: {e}"))
                })
            })
            .collect()
    }

    pub fn error(&self, key: &str, msg: impl Into<String>) -> Error {
        let line = self.entries.get(key).map(|(l, _)| *l).unwrap_or(0);
        Error::parse(&self.path, line, msg)
    }
}

/// Ordered writer producing the same format.
#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.out.push_str("# ");
        self.out.push_str(text);
        self.out.push('\n');
        self
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.out.push_str(key);
        self.out.push('=');
        self.out.push_str(&value.to_string());
        self.out.push('\n');
        self
    }

    pub fn put_list<T: std::fmt::Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.put(key, joined.join(","))
    }

    pub fn finish(self) -> String {
        self.out
    }
}
