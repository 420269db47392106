//! Line-oriented `section.key = value` documents.
//!
//! ```text
//! # comments start with '#'
//! model.q = 1
//! model.rho[0] = 2
//! model.theta[1] = 1.6,0      # complex values are written re,im
//! ```
//!
//! A model comes either from explicit `model.*` couplings or from the four
//! `example.*` keys (`Delta`, `t0`, `t`, `delta`), never both. Consumers take
//! the keys they understand; [`ConfigDoc::finish`] then rejects whatever is
//! left, naming the first stray key.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{example_model, LatticeModel, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    entries: BTreeMap<String, Entry>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn valid_key(key: &str) -> bool {
    let (section, name) = match key.split_once('.') {
        Some(parts) => parts,
        None => return false,
    };
    let ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    let name = match name.split_once('[') {
        Some((base, rest)) => {
            let idx = match rest.strip_suffix(']') {
                Some(idx) => idx,
                None => return false,
            };
            if idx.parse::<i64>().is_err() {
                return false;
            }
            base
        }
        None => name,
    };
    ident(section) && ident(name)
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected `section.key = value`, got `{body}`")))?;
            let key: String = key.split_whitespace().collect();
            let value = value.trim();
            if !valid_key(&key) {
                return Err(parse_err(line, format!("malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(parse_err(line, format!("key `{key}` has no value")));
            }
            let entry = Entry {
                line,
                value: value.to_string(),
            };
            if let Some(prev) = entries.insert(key.clone(), entry) {
                return Err(parse_err(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
        }
        Ok(ConfigDoc { entries })
    }

    /// Merge `other` on top of `self`; keys in `other` win.
    pub fn overlay(&mut self, other: ConfigDoc) {
        self.entries.extend(other.entries);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    pub fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    /// Remove and return every entry of `section`, keyed by the part after the dot.
    pub fn take_section(&mut self, section: &str) -> Vec<(String, Entry)> {
        let prefix = format!("{section}.");
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(&prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let e = self.entries.remove(&k).expect("key listed above");
                (k[prefix.len()..].to_string(), e)
            })
            .collect()
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|e| parse_f64(&e)).transpose()
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|_| parse_err(e.line, format!("`{}` is not a non-negative integer", e.value)))
            })
            .transpose()
    }

    pub fn take_i64(&mut self, key: &str) -> Result<Option<i64>> {
        self.take(key)
            .map(|e| {
                e.value
                    .parse::<i64>()
                    .map_err(|_| parse_err(e.line, format!("`{}` is not an integer", e.value)))
            })
            .transpose()
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(parse_err(e.line, format!("`{other}` is not a boolean"))),
            })
            .transpose()
    }

    pub fn take_complex(&mut self, key: &str) -> Result<Option<C64>> {
        self.take(key).map(|e| parse_complex(&e)).transpose()
    }

    /// Whitespace-separated list of reals.
    pub fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|e| {
                e.value
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|_| parse_err(e.line, format!("`{tok}` is not a number")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn take_string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|e| e.value)
    }

    /// Fail on the first key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(Error::UnknownKey { key, line: e.line }),
            None => Ok(()),
        }
    }
}

pub fn parse_f64(entry: &Entry) -> Result<f64> {
    let v = entry
        .value
        .parse::<f64>()
        .map_err(|_| parse_err(entry.line, format!("`{}` is not a number", entry.value)))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(entry.line, format!("`{}` is not finite", entry.value)))
    }
}

/// `re,im` or a bare real.
pub fn parse_complex(entry: &Entry) -> Result<C64> {
    let part = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(entry.line, format!("`{}` is not a complex number `re,im`", entry.value)))
    };
    match entry.value.split_once(',') {
        Some((re, im)) => Ok(C64::new(part(re)?, part(im)?)),
        None => Ok(C64::new(part(&entry.value)?, 0.0)),
    }
}

/// The four parameters of [`example_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams {
    pub mass: f64,
    pub t0: f64,
    pub t: f64,
    pub delta: f64,
}

impl ExampleParams {
    pub fn build(&self) -> LatticeModel {
        example_model(self.mass, self.t0, self.t, self.delta)
    }
}

/// A model as written in a document: explicit couplings or example parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Explicit(LatticeModel),
    Example(ExampleParams),
}

impl ModelSpec {
    pub fn build(&self) -> LatticeModel {
        match self {
            ModelSpec::Explicit(m) => m.clone(),
            ModelSpec::Example(p) => p.build(),
        }
    }
}

/// Consume the `model.*` or `example.*` section and build the lattice.
pub fn take_model(doc: &mut ConfigDoc) -> Result<LatticeModel> {
    take_model_spec(doc).map(|spec| spec.build())
}

/// Like [`take_model`], keeping the example parameters when they were used.
pub fn take_model_spec(doc: &mut ConfigDoc) -> Result<ModelSpec> {
    let explicit = doc.has_section("model");
    let example = doc.has_section("example");
    match (explicit, example) {
        (true, true) => {
            let line = doc
                .entries
                .iter()
                .filter(|(k, _)| k.starts_with("example."))
                .map(|(_, e)| e.line)
                .min()
                .unwrap_or(0);
            Err(parse_err(
                line,
                "give either model.* couplings or example.* parameters, not both",
            ))
        }
        (false, false) => Err(Error::MissingKey("model.q (or example.*)".into())),
        (false, true) => {
            let mut get = |name: &str| {
                let key = format!("example.{name}");
                doc.take_f64(&key)?.ok_or(Error::MissingKey(key))
            };
            let mass = get("Delta")?;
            let t0 = get("t0")?;
            let t = get("t")?;
            let delta = get("delta")?;
            let leftover = doc.take_section("example");
            if let Some((k, e)) = leftover.into_iter().next() {
                return Err(Error::UnknownKey {
                    key: format!("example.{k}"),
                    line: e.line,
                });
            }
            Ok(ModelSpec::Example(ExampleParams { mass, t0, t, delta }))
        }
        (true, false) => {
            let range = doc
                .take_usize("model.q")?
                .ok_or_else(|| Error::MissingKey("model.q".into()))?;
            let mut model = LatticeModel::new(range)?;
            for (name, entry) in doc.take_section("model") {
                let unknown = || Error::UnknownKey {
                    key: format!("model.{name}"),
                    line: entry.line,
                };
                let (base, idx) = name.split_once('[').ok_or_else(unknown)?;
                let offset: i64 = idx.trim_end_matches(']').parse().map_err(|_| unknown())?;
                let value = parse_complex(&entry)?;
                let set = match base {
                    "rho" => model.set_rho(offset, value),
                    "theta" => model.set_theta(offset, value),
                    "phi" => model.set_phi(offset, value),
                    _ => return Err(unknown()),
                };
                set.map_err(|e| parse_err(entry.line, e.to_string()))?;
            }
            Ok(ModelSpec::Explicit(model))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_model() {
        let text = "# chain\nmodel.q = 1\nmodel.rho[0] = 2\nmodel.theta[1] = 1.6, 0\nmodel.phi[-1] = 0.4,0.1  # tail\n";
        let mut doc = ConfigDoc::parse(text).unwrap();
        let m = take_model(&mut doc).unwrap();
        doc.finish().unwrap();
        assert_eq!(m.rho(0), C64::new(2.0, 0.0));
        assert_eq!(m.theta(1), C64::new(1.6, 0.0));
        assert_eq!(m.phi(-1), C64::new(0.4, 0.1));
    }

    #[test]
    fn example_section_matches_constructor() {
        let mut doc =
            ConfigDoc::parse("example.Delta = 2\nexample.t0 = 0.4\nexample.t = 1\nexample.delta = 0.6").unwrap();
        assert_eq!(take_model(&mut doc).unwrap(), example_model(2.0, 0.4, 1.0, 0.6));
    }

    #[test]
    fn errors_name_the_problem() {
        let mut doc = ConfigDoc::parse("model.q = 1\nmodel.rho[3] = 1").unwrap();
        assert!(matches!(take_model(&mut doc), Err(Error::Parse { line: 2, .. })));

        let mut doc = ConfigDoc::parse("model.q = 1\nmodel.gamma[0] = 1").unwrap();
        assert_eq!(
            take_model(&mut doc),
            Err(Error::UnknownKey {
                key: "model.gamma[0]".into(),
                line: 2
            })
        );

        let mut doc = ConfigDoc::parse("example.Delta = 2\nexample.t0 = 0.4\nexample.t = 1").unwrap();
        assert_eq!(take_model(&mut doc), Err(Error::MissingKey("example.delta".into())));

        assert!(matches!(
            ConfigDoc::parse("a.b = 1\na.b = 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(ConfigDoc::parse("novalue"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ConfigDoc::parse("nosection = 1"), Err(Error::Parse { .. })));

        let doc = ConfigDoc::parse("gbz.grid = 4\nobc.cells = 4").unwrap();
        assert_eq!(
            doc.finish(),
            Err(Error::UnknownKey {
                key: "gbz.grid".into(),
                line: 1
            })
        );
    }

    #[test]
    fn typed_getters() {
        let mut doc = ConfigDoc::parse("ws.forces = 0.5 1  2.5\nws.steps = 10\nws.z = 1,-2\nws.f = x").unwrap();
        assert_eq!(doc.take_f64_list("ws.forces").unwrap(), Some(vec![0.5, 1.0, 2.5]));
        assert_eq!(doc.take_usize("ws.steps").unwrap(), Some(10));
        assert_eq!(doc.take_complex("ws.z").unwrap(), Some(C64::new(1.0, -2.0)));
        assert!(doc.take_f64("ws.f").is_err());
        assert_eq!(doc.take_f64("ws.missing").unwrap(), None);
    }
}
