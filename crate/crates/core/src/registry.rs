//! Name-keyed registries of interchangeable strategies.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown {kind} `{name}` (available: {available})")]
pub struct UnknownStrategy {
    pub kind: &'static str,
    pub name: String,
    pub available: String,
}

/// Strategies of one kind, looked up case-insensitively by name or alias.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
    aliases: BTreeMap<String, String>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
            aliases: BTreeMap::new(),
        }
    }

    /// Adds `strategy` under `name`, replacing any earlier entry of that name.
    pub fn register(&mut self, name: &str, strategy: Arc<T>) -> &mut Self {
        self.entries.insert(name.to_ascii_lowercase(), strategy);
        self
    }

    pub fn alias(&mut self, alias: &str, name: &str) -> &mut Self {
        self.aliases.insert(alias.to_ascii_lowercase(), name.to_ascii_lowercase());
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>, UnknownStrategy> {
        let key = name.to_ascii_lowercase();
        let key = self.aliases.get(&key).unwrap_or(&key);
        self.entries.get(key).cloned().ok_or_else(|| UnknownStrategy {
            kind: self.kind,
            name: name.to_string(),
            available: self.names().collect::<Vec<_>>().join(", "),
        })
    }

    /// Registered primary names, sorted.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("entries", &self.entries.keys().collect::<Vec<_>>())
            .field("aliases", &self.aliases)
            .finish()
    }
}
