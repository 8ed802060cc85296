//! String similarity used for object resolution, action mapping and macro
//! clustering.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("embedding endpoint: {0}")]
    Transport(String),
    #[error("embedding endpoint returned {got} vectors for {want} texts")]
    Shape { want: usize, got: usize },
}

/// Lowercases, replaces punctuation with spaces and collapses whitespace.
pub fn normalize(s: &str) -> String {
    let mapped: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Character trigram counts of the normalized string. Strings shorter than
/// three characters contribute themselves as a single gram.
pub fn trigram_counts(s: &str) -> BTreeMap<String, u32> {
    let n = normalize(s);
    let chars: Vec<char> = n.chars().collect();
    let mut m = BTreeMap::new();
    if chars.is_empty() {
        return m;
    }
    if chars.len() < 3 {
        m.insert(n, 1);
        return m;
    }
    for w in chars.windows(3) {
        *m.entry(w.iter().collect()).or_insert(0) += 1;
    }
    m
}

/// Sparse trigram vector with its precomputed norm.
#[derive(Debug, Clone)]
pub struct TrigramVector {
    counts: BTreeMap<String, u32>,
    norm: f64,
    key: String,
}

impl TrigramVector {
    pub fn new(s: &str) -> Self {
        let counts = trigram_counts(s);
        let norm = counts.values().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
        TrigramVector {
            counts,
            norm,
            key: normalize(s),
        }
    }

    pub fn cosine(&self, other: &TrigramVector) -> f64 {
        if self.key == other.key {
            return 1.0;
        }
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (&self.counts, &other.counts)
        } else {
            (&other.counts, &self.counts)
        };
        let dot: f64 = small
            .iter()
            .filter_map(|(g, &c)| large.get(g).map(|&d| c as f64 * d as f64))
            .sum();
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// Cosine similarity of character-trigram count vectors.
pub fn trigram_cosine(a: &str, b: &str) -> f64 {
    TrigramVector::new(a).cosine(&TrigramVector::new(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimilarityConfig {
    LexicalTrigram,
    Embedding {
        url: String,
        /// Name of the environment variable holding the bearer token.
        token_env: Option<String>,
    },
}

/// Pluggable similarity: deterministic trigrams by default, or an external
/// embedding endpoint.
#[derive(Default)]
pub enum SimilarityProvider {
    #[default]
    Trigram,
    Embedding(EmbeddingClient),
}


impl SimilarityProvider {
    pub fn from_config(cfg: &SimilarityConfig) -> Self {
        match cfg {
            SimilarityConfig::LexicalTrigram => SimilarityProvider::Trigram,
            SimilarityConfig::Embedding { url, token_env } => {
                let token = token_env.as_ref().and_then(|v| std::env::var(v).ok());
                SimilarityProvider::Embedding(EmbeddingClient::new(url, token))
            }
        }
    }

    /// Score in `[0, 1]`, symmetric, with `score(a, a) == 1`.
    pub fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        match self {
            SimilarityProvider::Trigram => Ok(trigram_cosine(a, b)),
            SimilarityProvider::Embedding(c) => c.score(a, b),
        }
    }

    /// Scores one query against many candidates.
    pub fn score_many(&self, query: &str, candidates: &[String]) -> Result<Vec<f64>, SimilarityError> {
        match self {
            SimilarityProvider::Trigram => {
                let q = TrigramVector::new(query);
                Ok(candidates.iter().map(|c| q.cosine(&TrigramVector::new(c))).collect())
            }
            SimilarityProvider::Embedding(c) => {
                let mut texts = vec![query.to_string()];
                texts.extend(candidates.iter().cloned());
                c.prefetch(&texts)?;
                candidates.iter().map(|x| c.score(query, x)).collect()
            }
        }
    }
}

/// Client for an endpoint that takes `{"input": [texts]}` and answers with
/// `{"embeddings": [[f64]]}` of equal length. Vectors are cached per text.
pub struct EmbeddingClient {
    url: String,
    token: Option<String>,
    cache: RefCell<HashMap<String, Vec<f64>>>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

impl EmbeddingClient {
    pub fn new(url: &str, token: Option<String>) -> Self {
        EmbeddingClient {
            url: url.to_string(),
            token,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn prefetch(&self, texts: &[String]) -> Result<(), SimilarityError> {
        let missing: Vec<String> = {
            let cache = self.cache.borrow();
            let mut m: Vec<String> = texts.iter().filter(|t| !cache.contains_key(*t)).cloned().collect();
            m.sort();
            m.dedup();
            m
        };
        if missing.is_empty() {
            return Ok(());
        }
        let mut req = ureq::post(&self.url);
        if let Some(tok) = &self.token {
            req = req.header("Authorization", &format!("Bearer {tok}"));
        }
        let resp: EmbedResponse = req
            .send_json(EmbedRequest { input: &missing })
            .map_err(|e| SimilarityError::Transport(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| SimilarityError::Transport(e.to_string()))?;
        if resp.embeddings.len() != missing.len() {
            return Err(SimilarityError::Shape {
                want: missing.len(),
                got: resp.embeddings.len(),
            });
        }
        let mut cache = self.cache.borrow_mut();
        for (t, v) in missing.into_iter().zip(resp.embeddings) {
            cache.insert(t, v);
        }
        Ok(())
    }

    pub fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        if a == b {
            return Ok(1.0);
        }
        self.prefetch(&[a.to_string(), b.to_string()])?;
        let cache = self.cache.borrow();
        let (va, vb) = (&cache[a], &cache[b]);
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Ok(0.0);
        }
        Ok((dot / (na * nb)).clamp(0.0, 1.0))
    }
}
