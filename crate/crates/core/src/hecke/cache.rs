//! On-disk trace cache: one `label B l a_l` record per line.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use super::HeckeError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(super) struct StoredTable {
    pub bound: u64,
    pub traces: BTreeMap<u64, i64>,
}

/// Counters for cache behaviour, mostly for tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub traces_computed: u64,
    pub corrupt_recovered: u64,
}

/// Trace cache shared between threads. Reads take a shared lock; commits
/// take the exclusive lock and rewrite the backing file through a rename.
#[derive(Debug)]
pub struct TraceCache {
    path: Option<PathBuf>,
    tables: RwLock<BTreeMap<String, StoredTable>>,
    hits: AtomicU64,
    misses: AtomicU64,
    computed: AtomicU64,
    recovered: AtomicU64,
}

impl TraceCache {
    /// A cache that lives only in memory.
    pub fn in_memory() -> Self {
        Self::with_tables(None, BTreeMap::new())
    }

    /// Open (or create on first commit) a cache file. A syntactically broken
    /// file is reported as `CacheCorrupt` rather than partially loaded.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, HeckeError> {
        let path = path.as_ref().to_path_buf();
        let tables = match fs::read_to_string(&path) {
            Ok(text) => parse(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(HeckeError::Io(e.to_string())),
        };
        Ok(Self::with_tables(Some(path), tables))
    }

    /// Like [`TraceCache::open`], but a corrupt file is discarded and will be
    /// overwritten by the next commit.
    pub fn open_or_reset(path: impl AsRef<Path>) -> Result<Self, HeckeError> {
        match Self::open(path.as_ref()) {
            Err(HeckeError::CacheCorrupt { .. }) => {
                let cache = Self::with_tables(Some(path.as_ref().to_path_buf()), BTreeMap::new());
                cache.recovered.fetch_add(1, Ordering::Relaxed);
                Ok(cache)
            }
            other => other,
        }
    }

    fn with_tables(path: Option<PathBuf>, tables: BTreeMap<String, StoredTable>) -> Self {
        TraceCache {
            path,
            tables: RwLock::new(tables),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            computed: AtomicU64::new(0),
            recovered: AtomicU64::new(0),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            traces_computed: self.computed.load(Ordering::Relaxed),
            corrupt_recovered: self.recovered.load(Ordering::Relaxed),
        }
    }

    pub(super) fn get(&self, label: &str) -> Option<StoredTable> {
        self.tables.read().expect("cache lock").get(label).cloned()
    }

    pub(super) fn note_hit(&self) {
        self.hits.fetch_add(1, Ordering::Relaxed);
    }

    pub(super) fn note_miss(&self, computed: u64) {
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.computed.fetch_add(computed, Ordering::Relaxed);
    }

    pub(super) fn note_recovered(&self) {
        self.recovered.fetch_add(1, Ordering::Relaxed);
    }

    /// Store a table and rewrite the file. Larger bounds win over smaller.
    pub(super) fn commit(&self, label: &str, table: StoredTable) -> Result<(), HeckeError> {
        let mut guard = self.tables.write().expect("cache lock");
        match guard.get(label) {
            Some(old) if old.bound > table.bound && old.traces.len() >= table.traces.len() => {
                return Ok(())
            }
            _ => {}
        }
        guard.insert(label.to_string(), table);
        if let Some(path) = &self.path {
            write_atomic(path, &render(&guard))?;
        }
        Ok(())
    }
}

fn render(tables: &BTreeMap<String, StoredTable>) -> String {
    let mut out = String::new();
    for (label, t) in tables {
        for (l, a) in &t.traces {
            out.push_str(&format!("{label} {} {l} {a}\n", t.bound));
        }
    }
    out
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), HeckeError> {
    let io = |e: std::io::Error| HeckeError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

fn parse(text: &str) -> Result<BTreeMap<String, StoredTable>, HeckeError> {
    let mut tables: BTreeMap<String, StoredTable> = BTreeMap::new();
    let mut last: Option<(String, u64)> = None;
    for (i, line) in text.lines().enumerate() {
        let corrupt = |reason: &str| HeckeError::CacheCorrupt {
            line: i + 1,
            reason: reason.to_string(),
        };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [label, bound, ell, a] = fields[..] else {
            return Err(corrupt("expected four fields"));
        };
        let bound: u64 = bound.parse().map_err(|_| corrupt("bad bound"))?;
        let ell: u64 = ell.parse().map_err(|_| corrupt("bad prime"))?;
        let a: i64 = a.parse().map_err(|_| corrupt("bad trace"))?;
        let key = (label.to_string(), ell);
        if let Some(prev) = &last {
            if *prev >= key {
                return Err(corrupt("records not sorted by (label, prime)"));
            }
        }
        last = Some(key);
        let entry = tables.entry(label.to_string()).or_insert_with(|| StoredTable {
            bound,
            traces: BTreeMap::new(),
        });
        if entry.bound != bound {
            return Err(corrupt("inconsistent bound within a label"));
        }
        entry.traces.insert(ell, a);
    }
    Ok(tables)
}
