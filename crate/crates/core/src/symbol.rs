//! Interned symbol names for ring variables.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

static TABLE: Lazy<Mutex<Interner>> = Lazy::new(|| {
    Mutex::new(Interner {
        names: Vec::new(),
        ids: HashMap::new(),
    })
});

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

/// A ring variable, interned by name. Symbols with the same name are equal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Sym(pub u32);

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut t = TABLE.lock().unwrap();
        if let Some(&id) = t.ids.get(name) {
            return Sym(id);
        }
        let id = t.names.len() as u32;
        t.names.push(name.to_string());
        t.ids.insert(name.to_string(), id);
        Sym(id)
    }

    pub fn name(&self) -> String {
        TABLE.lock().unwrap().names[self.0 as usize].clone()
    }
}

impl std::fmt::Display for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}
