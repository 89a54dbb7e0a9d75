//! Process-wide cache of quadrature oracles and invariant-density tables.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crossover_core::closed_form::{InvariantTable, SpectralOracle};
use crossover_core::{Result, Scale};

type Key = (u64, u64, u64);

#[derive(Default)]
pub struct OracleCache {
    oracles: Mutex<HashMap<Key, SpectralOracle>>,
    tables: Mutex<HashMap<Key, Arc<InvariantTable>>>,
}

fn key(lambda: f64, scale: Scale, extra: f64) -> Key {
    (lambda.to_bits(), scale.get().to_bits(), extra.to_bits())
}

impl OracleCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Values are pure functions of the key, so a racing double computation
    /// stores identical entries.
    pub fn oracle(&self, lambda: f64, scale: Scale, tol: f64) -> Result<SpectralOracle> {
        let k = key(lambda, scale, tol);
        if let Some(o) = self.oracles.lock().expect("cache lock").get(&k) {
            return Ok(*o);
        }
        let o = SpectralOracle::compute(lambda, scale, tol)?;
        self.oracles.lock().expect("cache lock").insert(k, o);
        Ok(o)
    }

    pub fn table(&self, lambda: f64, scale: Scale) -> Result<Arc<InvariantTable>> {
        let k = key(lambda, scale, InvariantTable::DEFAULT_POINTS as f64);
        if let Some(t) = self.tables.lock().expect("cache lock").get(&k) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(InvariantTable::new(lambda, scale)?);
        Ok(Arc::clone(self.tables.lock().expect("cache lock").entry(k).or_insert(t)))
    }
}

pub fn global() -> &'static OracleCache {
    static CACHE: OnceLock<OracleCache> = OnceLock::new();
    CACHE.get_or_init(OracleCache::new)
}
