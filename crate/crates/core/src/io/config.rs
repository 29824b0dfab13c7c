//! Flat INI-style scenario files.
//!
//! ```text
//! [scenario]
//! strategem = rollover
//!
//! [rollover]
//! principal_cents = 10000
//! rate = 0.05
//!
//! [love_letters.events]
//! 120 borrow IS 250000000000
//! ```
//!
//! Sections whose name contains a dot hold free-form lines (event lists);
//! the others hold `key = value` pairs. `#` and `;` start comment lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{location, read_to_string};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectionBody {
    Pairs(Vec<(String, String)>),
    Lines(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub body: SectionBody,
}

impl Section {
    pub fn is_raw(name: &str) -> bool {
        name.contains('.')
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub sections: Vec<Section>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut config = ScenarioConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k as u64 + 1;
            let at = |message: String| Error::parse(location(source, line_no), message);
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header `{line}`")))?
                    .trim();
                if name.is_empty() {
                    return Err(at("empty section name".into()));
                }
                if config.section(name).is_some() {
                    return Err(at(format!("section [{name}] appears twice")));
                }
                let body = if Section::is_raw(name) {
                    SectionBody::Lines(Vec::new())
                } else {
                    SectionBody::Pairs(Vec::new())
                };
                config.sections.push(Section {
                    name: name.to_string(),
                    body,
                });
                continue;
            }
            let Some(section) = config.sections.last_mut() else {
                return Err(at("content before the first section header".into()));
            };
            match &mut section.body {
                SectionBody::Lines(lines) => {
                    lines.push(line.split_whitespace().collect::<Vec<_>>().join(" "))
                }
                SectionBody::Pairs(pairs) => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
                    let (key, value) = (key.trim(), value.trim());
                    if key.is_empty() {
                        return Err(at("empty key".into()));
                    }
                    if pairs.iter().any(|(k, _)| k == key) {
                        return Err(at(format!("key `{key}` repeated in [{}]", section.name)));
                    }
                    pairs.push((key.to_string(), value.to_string()));
                }
            }
        }
        Ok(config)
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, section) in self.sections.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", section.name);
            match &section.body {
                SectionBody::Pairs(pairs) => {
                    for (key, value) in pairs {
                        let _ = writeln!(out, "{key} = {value}");
                    }
                }
                SectionBody::Lines(lines) => {
                    for line in lines {
                        let _ = writeln!(out, "{line}");
                    }
                }
            }
        }
        out
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn pairs(&self, section: &str) -> &[(String, String)] {
        match self.section(section).map(|s| &s.body) {
            Some(SectionBody::Pairs(p)) => p,
            _ => &[],
        }
    }

    pub fn lines(&self, section: &str) -> &[String] {
        match self.section(section).map(|s| &s.body) {
            Some(SectionBody::Lines(l)) => l,
            _ => &[],
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.pairs(section)
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::param(format!("{section}.{key}"), "missing"))
    }

    /// Fails on any key in `section` outside `known`.
    pub fn check_keys(&self, section: &str, known: &[&str]) -> Result<()> {
        for (key, _) in self.pairs(section) {
            if !known.contains(&key.as_str()) {
                return Err(Error::param(
                    format!("{section}.{key}"),
                    format!("unknown key; expected one of {}", known.join(", ")),
                ));
            }
        }
        Ok(())
    }
}
