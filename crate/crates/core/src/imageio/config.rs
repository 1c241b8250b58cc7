//! Flat `key = value` text with optional `[section]` blocks.
//!
//! ```text
//! # comment
//! formats = erp, cmp, eac
//! [eac:2]
//! kernel = lanczos3
//! ```

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigSection {
    pub name: String,
    pub line: usize,
    pub entries: Vec<ConfigEntry>,
}

impl ConfigSection {
    pub fn get(&self, key: &str) -> Option<&ConfigEntry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFile {
    pub global: Vec<ConfigEntry>,
    pub sections: Vec<ConfigSection>,
}

fn strip_trailing_comment(line: &str) -> &str {
    let cut = line
        .char_indices()
        .find(|&(i, c)| c == '#' && (i == 0 || line[..i].ends_with(char::is_whitespace)))
        .map(|(i, _)| i);
    cut.map_or(line, |i| &line[..i])
}

impl ConfigFile {
    /// Keys are lowercased; lines starting with `#` or `;` are comments, and
    /// a `#` preceded by whitespace starts a trailing comment.
    /// Duplicate keys within one block are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = strip_trailing_comment(raw).trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or(Error::Config {
                    line,
                    reason: "unterminated section header".into(),
                })?;
                let name = name.trim().to_ascii_lowercase();
                if name.is_empty() {
                    return Err(Error::Config {
                        line,
                        reason: "empty section name".into(),
                    });
                }
                if cfg.sections.iter().any(|sec| sec.name == name) {
                    return Err(Error::Config {
                        line,
                        reason: format!("duplicate section [{name}]"),
                    });
                }
                cfg.sections.push(ConfigSection {
                    name,
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (k, v) = s.split_once('=').ok_or(Error::Config {
                line,
                reason: format!("expected 'key = value', got '{s}'"),
            })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::Config {
                    line,
                    reason: "empty key".into(),
                });
            }
            let block = match cfg.sections.last_mut() {
                Some(sec) => &mut sec.entries,
                None => &mut cfg.global,
            };
            if block.iter().any(|e| e.key == key) {
                return Err(Error::Config {
                    line,
                    reason: format!("duplicate key '{key}'"),
                });
            }
            block.push(ConfigEntry {
                key,
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Global (section-less) entry.
    pub fn get(&self, key: &str) -> Option<&ConfigEntry> {
        self.global.iter().find(|e| e.key == key)
    }
}
