//! Name-keyed registries of interchangeable strategies.

use crate::error::{Error, Result};

/// Ordered collection of trait objects selectable by name at runtime.
pub struct Registry<F: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Box<F>)>,
}

impl<F: ?Sized> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds an entry; a later registration under the same name replaces the
    /// earlier one.
    pub fn register(&mut self, name: impl Into<String>, item: Box<F>) -> &mut Self {
        let name = name.into();
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, item));
        self
    }

    pub fn with(mut self, name: impl Into<String>, item: Box<F>) -> Self {
        self.register(name, item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&F> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f.as_ref())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown {} '{name}' (available: {})",
                    self.kind,
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}
