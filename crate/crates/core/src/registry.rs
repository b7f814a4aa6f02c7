//! Name-keyed registry of interchangeable strategies.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Holds strategies of one family (`kind`) keyed by their CLI-facing name.
///
/// `T` is usually a boxed trait object or a boxed factory closure.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `entry` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, entry: Box<T>) -> &mut Self {
        self.entries.insert(name.into(), entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}
