//! In-memory sessions: one uploaded table with its scheme, typed dataset,
//! view settings and mining results.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use hetviz_core::rules::Rule;
use hetviz_core::scheme::RawTable;
use hetviz_core::view::{ViewBundle, ViewConfig};
use hetviz_core::Dataset;

use crate::engine::{self, DiscoveredBlock};
use crate::error::Result;
use crate::schemefile::SchemeDocument;

pub struct Session {
    pub id: String,
    raw: RawTable,
    scheme: SchemeDocument,
    dataset: Arc<Dataset>,
    pub view: ViewConfig,
    /// Keyed by the serialized view config; emptied on scheme change.
    layouts: Mutex<HashMap<String, Arc<ViewBundle>>>,
    pub hyperblocks: Vec<DiscoveredBlock>,
    pub rules: Vec<Rule>,
}

impl Session {
    pub fn new(id: String, raw: RawTable, scheme: SchemeDocument) -> Result<Self> {
        let dataset = Arc::new(engine::typed_dataset(&raw, &scheme)?);
        Ok(Session {
            id,
            raw,
            scheme,
            dataset,
            view: ViewConfig::default(),
            layouts: Mutex::new(HashMap::new()),
            hyperblocks: Vec::new(),
            rules: Vec::new(),
        })
    }

    pub fn raw(&self) -> &RawTable {
        &self.raw
    }

    pub fn scheme(&self) -> &SchemeDocument {
        &self.scheme
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    /// Re-types the table. On failure the session is left as it was.
    pub fn set_scheme(&mut self, scheme: SchemeDocument) -> Result<()> {
        let dataset = engine::typed_dataset(&self.raw, &scheme)?;
        self.scheme = scheme;
        self.dataset = Arc::new(dataset);
        self.layouts.lock().expect("layout cache poisoned").clear();
        self.hyperblocks.clear();
        Ok(())
    }

    pub fn cached_layouts(&self) -> usize {
        self.layouts.lock().expect("layout cache poisoned").len()
    }

    pub fn layout(&self, cfg: &ViewConfig) -> Result<Arc<ViewBundle>> {
        let key = serde_json::to_string(cfg).expect("view configs serialize");
        if let Some(hit) = self.layouts.lock().expect("layout cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let bundle = Arc::new(engine::view(&self.dataset, cfg)?);
        self.layouts
            .lock()
            .expect("layout cache poisoned")
            .insert(key, Arc::clone(&bundle));
        Ok(bundle)
    }
}

/// Sessions by id. Each session has its own lock: many readers or one writer.
#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    next_id: AtomicU64,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, raw: RawTable, scheme: SchemeDocument) -> Result<Arc<RwLock<Session>>> {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("ds{n}");
        let session = Arc::new(RwLock::new(Session::new(id.clone(), raw, scheme)?));
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, Arc::clone(&session));
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Option<Arc<RwLock<Session>>> {
        self.sessions.read().expect("session map poisoned").get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetviz_core::scheme::raw_from_rows;
    use hetviz_core::MeasurementType;

    fn raw() -> RawTable {
        raw_from_rows(&["a", "class"], &[&["x", "e"], &["y", "p"], &["y", "e"]]).unwrap()
    }

    #[test]
    fn ids_are_unique_and_cache_resets_on_scheme_change() {
        let store = SessionStore::new();
        let one = store.create(raw(), engine::default_scheme(&raw(), None).unwrap()).unwrap();
        let two = store.create(raw(), engine::default_scheme(&raw(), None).unwrap()).unwrap();
        assert_ne!(one.read().unwrap().id, two.read().unwrap().id);
        assert_eq!(store.len(), 2);

        let mut s = one.write().unwrap();
        let first = s.layout(&ViewConfig::default()).unwrap();
        let again = s.layout(&ViewConfig::default()).unwrap();
        assert!(Arc::ptr_eq(&first, &again));
        assert_eq!(s.cached_layouts(), 1);

        let mut doc = s.scheme().clone();
        doc.scheme.target = Some("a".into());
        s.set_scheme(doc).unwrap();
        assert_eq!(s.cached_layouts(), 0);
        assert_eq!(s.layout(&ViewConfig::default()).unwrap().reference.as_deref(), Some("a"));
    }

    #[test]
    fn failed_scheme_change_keeps_state() {
        let store = SessionStore::new();
        let s = store.create(raw(), engine::default_scheme(&raw(), None).unwrap()).unwrap();
        let mut s = s.write().unwrap();
        let before = s.scheme().clone();
        let mut bad = before.clone();
        bad.scheme.entries[0].mtype = MeasurementType::Ratio;
        bad.scheme.entries[0].codes = None;
        assert!(s.set_scheme(bad).is_err());
        assert_eq!(s.scheme(), &before);
    }
}
