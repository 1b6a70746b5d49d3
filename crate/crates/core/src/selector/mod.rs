//! Source sentence selection: spectral clustering for test-time aspect
//! discovery and four reference-based similarity strategies (LCS, VSM,
//! Smatch, Concept Coverage) for building training data.

mod spectral;

pub use spectral::{jacobi_eigen, spectral_select, AffinityMatrix, SpectralError};

use std::collections::{HashMap, HashSet};

use crate::amr::AmrGraph;
use crate::features::{CorpusStats, GraphFeatures};
use crate::metrics::smatch;
use crate::source_graph::{build_source_graph, collapse_entities, merge_key};
use crate::text::tokenize;
use crate::trainer::{project_gold, TrainingInstance};

/// One source sentence: its position, raw text, tokens, and AMR graph.
#[derive(Debug, Clone)]
pub struct SentenceRecord {
    pub doc: usize,
    pub sent: usize,
    pub text: String,
    pub tokens: Vec<String>,
    pub amr: AmrGraph,
}

impl SentenceRecord {
    pub fn new(doc: usize, sent: usize, text: &str, amr: AmrGraph) -> SentenceRecord {
        SentenceRecord {
            doc,
            sent,
            text: text.to_string(),
            tokens: tokenize(text),
            amr,
        }
    }
}

/// Sentence-level token statistics for TF-IDF: document frequency is the
/// number of sentences containing a token, with the configured stopwords
/// removed.
#[derive(Debug, Clone, Default)]
pub struct TokenStats {
    df: HashMap<String, usize>,
    n_sentences: usize,
    stopwords: HashSet<String>,
}

impl TokenStats {
    pub fn build(sentences: &[SentenceRecord], stopwords: &HashSet<String>) -> TokenStats {
        let mut df: HashMap<String, usize> = HashMap::new();
        for s in sentences {
            let uniq: HashSet<&String> = s
                .tokens
                .iter()
                .filter(|t| !stopwords.contains(*t))
                .collect();
            for t in uniq {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        TokenStats {
            df,
            n_sentences: sentences.len(),
            stopwords: stopwords.clone(),
        }
    }

    /// Smoothed inverse document frequency; ln((n+1)/df) so that tokens
    /// occurring in every sentence still carry a little weight.
    fn idf(&self, token: &str) -> f64 {
        let df = self.df.get(token).copied().unwrap_or(0).max(1);
        ((self.n_sentences + 1) as f64 / df as f64).ln()
    }

    fn tfidf_vector<'a>(&self, tokens: &'a [String]) -> HashMap<&'a str, f64> {
        let mut tf: HashMap<&str, usize> = HashMap::new();
        for t in tokens {
            if !self.stopwords.contains(t) {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        tf.into_iter()
            .map(|(t, c)| (t, c as f64 * self.idf(t)))
            .collect()
    }
}

/// Longest-common-subsequence similarity: |LCS(a, b)| / max(|a|, |b|).
/// Two empty inputs score 0.
pub fn lcs_similarity(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i][j] = if a[i - 1] == b[j - 1] {
                dp[i - 1][j - 1] + 1
            } else {
                dp[i - 1][j].max(dp[i][j - 1])
            };
        }
    }
    dp[a.len()][b.len()] as f64 / a.len().max(b.len()) as f64
}

/// Cosine similarity of TF-IDF vectors; 0 when either vector is all-zero.
pub fn vsm_similarity(a: &[String], b: &[String], stats: &TokenStats) -> f64 {
    let va = stats.tfidf_vector(a);
    let vb = stats.tfidf_vector(b);
    let dot: f64 = va
        .iter()
        .map(|(t, x)| x * vb.get(t).copied().unwrap_or(0.0))
        .sum();
    let na: f64 = va.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = vb.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

fn concept_keys(g: &AmrGraph) -> HashSet<String> {
    collapse_entities(g).nodes.iter().map(merge_key).collect()
}

/// Greedy set cover over the reference's concept merge keys: repeatedly
/// take the candidate covering the most still-uncovered keys, breaking
/// ties by earlier (document, sentence) position. Once coverage is
/// complete the remaining slots fill in tie-break order (all marginals
/// are zero by then).
pub fn concept_coverage_select(
    reference: &AmrGraph,
    candidates: &[SentenceRecord],
    n: usize,
) -> Vec<SentenceRecord> {
    let target = concept_keys(reference);
    let keys: Vec<HashSet<String>> = candidates.iter().map(|c| concept_keys(&c.amr)).collect();
    let mut uncovered: HashSet<&String> = target.iter().collect();
    let mut picked: Vec<usize> = Vec::new();
    let mut available: Vec<usize> = (0..candidates.len()).collect();
    while picked.len() < n && !available.is_empty() {
        let best = available
            .iter()
            .copied()
            .max_by(|&x, &y| {
                let mx = keys[x].iter().filter(|k| uncovered.contains(k)).count();
                let my = keys[y].iter().filter(|k| uncovered.contains(k)).count();
                mx.cmp(&my).then_with(|| {
                    let px = (candidates[x].doc, candidates[x].sent);
                    let py = (candidates[y].doc, candidates[y].sent);
                    py.cmp(&px) // earlier position wins under max_by
                })
            })
            .unwrap();
        picked.push(best);
        available.retain(|&i| i != best);
        for k in &keys[best] {
            uncovered.remove(k);
        }
    }
    picked.into_iter().map(|i| candidates[i].clone()).collect()
}

/// Similarity strategy used to pair source sentences with a reference
/// sentence when constructing training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMetric {
    Lcs,
    Vsm,
    Smatch,
    ConceptCoverage,
}

impl SelectionMetric {
    pub fn parse(name: &str) -> Option<SelectionMetric> {
        match name {
            "lcs" => Some(SelectionMetric::Lcs),
            "vsm" => Some(SelectionMetric::Vsm),
            "smatch" => Some(SelectionMetric::Smatch),
            "cov" | "coverage" | "concept-coverage" => Some(SelectionMetric::ConceptCoverage),
            _ => None,
        }
    }
}

/// A reference summary sentence: an id plus its AMR graph (whose ::snt
/// metadata supplies the text for token-level metrics).
#[derive(Debug, Clone)]
pub struct ReferenceSentence {
    pub id: String,
    pub amr: AmrGraph,
}

/// Rank candidates against one reference sentence with the chosen metric;
/// higher is better, ties go to earlier (document, sentence) position.
pub fn rank_candidates(
    reference: &ReferenceSentence,
    candidates: &[SentenceRecord],
    metric: SelectionMetric,
    stats: &TokenStats,
    seed: u64,
) -> Vec<(usize, f64)> {
    let ref_tokens = tokenize(reference.amr.sentence().unwrap_or(""));
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, cand)| {
            let score = match metric {
                SelectionMetric::Lcs => lcs_similarity(&cand.tokens, &ref_tokens),
                SelectionMetric::Vsm => vsm_similarity(&cand.tokens, &ref_tokens, stats),
                SelectionMetric::Smatch => smatch(&cand.amr, &reference.amr, 4, seed).prf.f1,
                SelectionMetric::ConceptCoverage => 0.0, // handled by greedy selection
            };
            (i, score)
        })
        .collect();
    scored.sort_by(|&(i, x), &(j, y)| {
        y.partial_cmp(&x).unwrap().then_with(|| {
            let pi = (candidates[i].doc, candidates[i].sent);
            let pj = (candidates[j].doc, candidates[j].sent);
            pi.cmp(&pj)
        })
    });
    scored
}

/// Build one training instance per reference sentence: select the top-N
/// similar source sentences, merge them into a source graph, and project
/// the reference graph onto it.
pub fn build_training_instances(
    references: &[ReferenceSentence],
    candidates: &[SentenceRecord],
    metric: SelectionMetric,
    n: usize,
    event_terms: &HashSet<String>,
    stats: &TokenStats,
    seed: u64,
) -> Vec<TrainingInstance> {
    let mut instances = Vec::new();
    for reference in references {
        let selected: Vec<SentenceRecord> = match metric {
            SelectionMetric::ConceptCoverage => {
                concept_coverage_select(&reference.amr, candidates, n)
            }
            _ => rank_candidates(reference, candidates, metric, stats, seed)
                .into_iter()
                .take(n)
                .map(|(i, _)| candidates[i].clone())
                .collect(),
        };
        if selected.is_empty() {
            continue;
        }
        let graphs: Vec<AmrGraph> = selected.iter().map(|r| r.amr.clone()).collect();
        let graph = build_source_graph(&graphs, None).expect("non-empty selection");
        // Group the selected sentences by document for the stats.
        let mut by_doc: HashMap<usize, Vec<AmrGraph>> = HashMap::new();
        for r in &selected {
            by_doc.entry(r.doc).or_default().push(collapse_entities(&r.amr));
        }
        let mut docs: Vec<(usize, Vec<AmrGraph>)> = by_doc.into_iter().collect();
        docs.sort_by_key(|(d, _)| *d);
        let doc_graphs: Vec<Vec<AmrGraph>> = docs.into_iter().map(|(_, g)| g).collect();
        let corpus_stats = CorpusStats::build(&doc_graphs, event_terms.clone());
        let features = GraphFeatures::extract(&graph, &corpus_stats);
        let projection = project_gold(&reference.amr, &graph);
        instances.push(TrainingInstance {
            id: reference.id.clone(),
            graph,
            features,
            gold: projection.selection,
            coverage: projection.coverage,
        });
    }
    instances
}
