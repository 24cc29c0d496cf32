use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::RunError;

/// Typed access to request parameters. Keys that are never read are
/// reported by [`Params::reject_unknown`].
pub struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
    read: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a BTreeMap<String, Value>) -> Self {
        Self { map, read: RefCell::new(BTreeSet::new()) }
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.read.borrow_mut().insert(key.to_string());
        self.map.get(key).filter(|v| !v.is_null())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.raw(key).is_some()
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, RunError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| RunError::Usage(format!("parameter `{key}`: {e}"))),
        }
    }

    pub fn get_or<T: DeserializeOwned>(&self, key: &str, default: T) -> Result<T, RunError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn reject_unknown(&self) -> Result<(), RunError> {
        let read = self.read.borrow();
        match self.map.keys().find(|k| !read.contains(*k)) {
            Some(k) => Err(RunError::Usage(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Usage error unless `lo <= x <= hi`.
pub fn in_range<T: PartialOrd + std::fmt::Display>(key: &str, x: T, lo: T, hi: T) -> Result<T, RunError> {
    if x < lo || x > hi {
        return Err(RunError::Usage(format!("parameter `{key}` = {x} must lie in [{lo}, {hi}]")));
    }
    Ok(x)
}
