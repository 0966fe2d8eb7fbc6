//! Interned register values.
//!
//! Every network carries one [`ValueTable`]. The error value `#` is always
//! interned first, so [`HASH`] is valid in every table.

use std::collections::HashMap;
use std::fmt;

/// A register value, interned in a [`ValueTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u16);

/// The reserved error value `#`.
pub const HASH: Value = Value(0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueTable {
    names: Vec<String>,
    index: HashMap<String, Value>,
}

impl Default for ValueTable {
    fn default() -> Self {
        Self::new()
    }
}

impl ValueTable {
    pub fn new() -> Self {
        let mut table = ValueTable {
            names: Vec::new(),
            index: HashMap::new(),
        };
        table.intern("#");
        table
    }

    pub fn intern(&mut self, name: &str) -> Value {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = Value(u16::try_from(self.names.len()).expect("too many values"));
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: Value) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.names.len()).map(|i| Value(i as u16))
    }

    /// Interns a name that does not clash with any existing value.
    pub fn fresh(&mut self, base: &str) -> Value {
        if self.get(base).is_none() {
            return self.intern(base);
        }
        let mut i = 1;
        loop {
            let candidate = format!("{base}{i}");
            if self.get(&candidate).is_none() {
                return self.intern(&candidate);
            }
            i += 1;
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}
