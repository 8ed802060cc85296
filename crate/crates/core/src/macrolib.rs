//! Persistent library of macro actions that led to successful runs, with
//! similarity clustering and lookup.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::{SimilarityError, SimilarityProvider};

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("only entries from successful runs can be stored")]
    NotSuccessful,
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("library line {line}: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryEntry {
    #[serde(default)]
    pub id: usize,
    pub description: String,
    pub pre: String,
    pub post: String,
    /// Canonical action strings of the block.
    pub block: Vec<String>,
    /// Which agent produced the entry.
    pub agent: String,
    pub success: bool,
    #[serde(default)]
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MacroLibrary {
    entries: Vec<LibraryEntry>,
}

impl MacroLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&LibraryEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Stores a successful entry and returns its id; an identical
    /// (description, block) pair returns the existing id.
    pub fn store(&mut self, mut entry: LibraryEntry) -> Result<usize, LibraryError> {
        if !entry.success {
            return Err(LibraryError::NotSuccessful);
        }
        if let Some(e) = self
            .entries
            .iter()
            .find(|e| e.description == entry.description && e.block == entry.block)
        {
            return Ok(e.id);
        }
        entry.id = self.entries.iter().map(|e| e.id).max().unwrap_or(0) + 1;
        let id = entry.id;
        self.entries.push(entry);
        Ok(id)
    }

    /// Single-linkage clustering over pairwise description similarity.
    /// Each cluster is labelled by its lowest (earliest) entry id, which is
    /// also its representative. Assignments are written into the entries
    /// and returned as (entry id, cluster id) pairs in id order.
    pub fn cluster(&mut self, threshold: f64, sim: &SimilarityProvider) -> Result<Vec<(usize, usize)>, LibraryError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(LibraryError::Threshold(threshold));
        }
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by_key(|&i| self.entries[i].id);
        let n = order.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for a in 0..n {
            for b in a + 1..n {
                let s = sim.score(&self.entries[order[a]].description, &self.entries[order[b]].description)?;
                if s >= threshold {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    // Keep the smaller index (earlier id) as the root.
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    parent[hi] = lo;
                }
            }
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let r = root(&mut parent, k);
            let cid = self.entries[order[r]].id;
            self.entries[order[k]].cluster = Some(cid);
            out.push((self.entries[order[k]].id, cid));
        }
        Ok(out)
    }

    /// The most similar entry at or above `min_sim`; ties go to the lowest id.
    pub fn lookup(&self, description: &str, min_sim: f64, sim: &SimilarityProvider) -> Result<Option<&LibraryEntry>, LibraryError> {
        let mut best: Option<(&LibraryEntry, f64)> = None;
        for e in &self.entries {
            let s = sim.score(description, &e.description)?;
            if s < min_sim {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bs)) => s > bs || (s == bs && e.id < b.id),
            };
            if better {
                best = Some((e, s));
            }
        }
        Ok(best.map(|(e, _)| e))
    }

    /// JSON-lines, one entry per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LibraryError> {
        let mut lib = MacroLibrary::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: LibraryEntry = serde_json::from_str(line).map_err(|err| LibraryError::Corrupt {
                line: i + 1,
                msg: err.to_string(),
            })?;
            lib.entries.push(e);
        }
        Ok(lib)
    }

    /// Loads a library file; a missing file is an empty library.
    pub fn load(path: &Path) -> Result<Self, LibraryError> {
        match fs::read_to_string(path) {
            Ok(t) => Self::from_jsonl(&t),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes atomically through a temporary file in the same directory.
    pub fn save(&self, path: &Path) -> Result<(), LibraryError> {
        let tmp = path.with_extension("jsonl.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_jsonl().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}
