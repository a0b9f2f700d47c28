//! Name-keyed registries of interchangeable strategies.
//!
//! Each family of algorithms (supermatrix builders, susceptibility methods,
//! sweep parameters) implements [`Named`] and is collected in a [`Registry`]
//! so that the CLI and library callers can select a variant by name.

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str {
        ""
    }
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers a strategy; a later entry with the same name replaces the earlier one.
    pub fn register(&mut self, entry: Box<T>) -> &mut Self {
        self.entries.retain(|e| e.name() != entry.name());
        self.entries.push(entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct A(&'static str);
    impl Named for A {
        fn name(&self) -> &'static str {
            self.0
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<A> = Registry::new("thing");
        r.register(Box::new(A("x"))).register(Box::new(A("y")));
        assert_eq!(r.names(), vec!["x", "y"]);
        assert!(r.get("y").is_ok());
        r.register(Box::new(A("x")));
        assert_eq!(r.len(), 2);
        let err = r.get("z").err().unwrap().to_string();
        assert!(err.contains("unknown thing 'z'"), "{err}");
        assert!(err.contains("y, x"), "{err}");
    }
}
