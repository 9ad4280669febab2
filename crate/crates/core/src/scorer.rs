//! Coreference metrics: MUC, B-cubed, CEAF-φ4 and their CoNLL average.
//!
//! Every metric is first computed as raw numerator/denominator counts
//! ([`MetricCounts`]) so that corpus scores can be micro-averaged by summing
//! counts over documents before dividing. A zero denominator yields a zero
//! component, and F1 of (0, 0) is 0.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::hash::Hash;

use crate::assignment::max_weight_assignment;
use crate::conll::{ConllDocument, DocId, Mention};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("invalid clustering: {0}")]
    InvalidClustering(String),
    #[error("document mismatch: {0}")]
    DocumentMismatch(String),
}

/// Anything usable as a mention identity.
pub trait MentionId: Eq + Hash + Clone + fmt::Debug {}

impl<T: Eq + Hash + Clone + fmt::Debug> MentionId for T {}

/// Disjoint, non-empty chains of mention ids.
#[derive(Debug, Clone)]
pub struct Clustering<M> {
    chains: Vec<Vec<M>>,
    chain_of: HashMap<M, usize>,
}

impl<M: PartialEq> PartialEq for Clustering<M> {
    fn eq(&self, other: &Self) -> bool {
        self.chains == other.chains
    }
}

impl<M: MentionId> Clustering<M> {
    pub fn new(chains: Vec<Vec<M>>) -> Result<Self, ScoreError> {
        let mut chain_of = HashMap::new();
        for (i, chain) in chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(ScoreError::InvalidClustering(format!("chain {i} is empty")));
            }
            for m in chain {
                if let Some(prev) = chain_of.insert(m.clone(), i) {
                    return Err(ScoreError::InvalidClustering(format!(
                        "mention {m:?} appears in chains {prev} and {i}"
                    )));
                }
            }
        }
        Ok(Clustering { chains, chain_of })
    }

    pub fn chains(&self) -> &[Vec<M>] {
        &self.chains
    }

    pub fn chain_of(&self, mention: &M) -> Option<usize> {
        self.chain_of.get(mention).copied()
    }

    pub fn mention_count(&self) -> usize {
        self.chain_of.len()
    }

    /// |chain_i ∩ other.chain_j| for every j that overlaps, plus the count
    /// of chain members missing from `other`.
    fn overlaps(&self, i: usize, other: &Clustering<M>) -> (HashMap<usize, usize>, usize) {
        let mut counts = HashMap::new();
        let mut missing = 0;
        for m in &self.chains[i] {
            match other.chain_of(m) {
                Some(j) => *counts.entry(j).or_insert(0) += 1,
                None => missing += 1,
            }
        }
        (counts, missing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    pub fn new(precision: f64, recall: f64) -> Self {
        ScoreTriple {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }

    pub const PERFECT: ScoreTriple = ScoreTriple {
        precision: 1.0,
        recall: 1.0,
        f1: 1.0,
    };
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Raw counts behind a [`ScoreTriple`]; addition is the corpus merge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricCounts {
    pub recall_num: f64,
    pub recall_den: f64,
    pub precision_num: f64,
    pub precision_den: f64,
}

impl MetricCounts {
    pub fn triple(&self) -> ScoreTriple {
        ScoreTriple::new(
            ratio(self.precision_num, self.precision_den),
            ratio(self.recall_num, self.recall_den),
        )
    }
}

impl std::ops::Add for MetricCounts {
    type Output = MetricCounts;

    fn add(self, o: MetricCounts) -> MetricCounts {
        MetricCounts {
            recall_num: self.recall_num + o.recall_num,
            recall_den: self.recall_den + o.recall_den,
            precision_num: self.precision_num + o.precision_num,
            precision_den: self.precision_den + o.precision_den,
        }
    }
}

impl std::ops::AddAssign for MetricCounts {
    fn add_assign(&mut self, o: MetricCounts) {
        *self = *self + o;
    }
}

/// Σ(|S| - |p(S)|) and Σ(|S| - 1) over the chains of `gold`, where p(S)
/// partitions S by the chains of `other` (missing mentions are singletons).
fn muc_side<M: MentionId>(gold: &Clustering<M>, other: &Clustering<M>) -> (f64, f64) {
    let mut num = 0usize;
    let mut den = 0usize;
    for (i, chain) in gold.chains.iter().enumerate() {
        let (overlaps, missing) = gold.overlaps(i, other);
        let parts = overlaps.len() + missing;
        num += chain.len() - parts;
        den += chain.len() - 1;
    }
    (num as f64, den as f64)
}

pub fn muc_counts<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> MetricCounts {
    let (recall_num, recall_den) = muc_side(key, response);
    let (precision_num, precision_den) = muc_side(response, key);
    MetricCounts {
        recall_num,
        recall_den,
        precision_num,
        precision_den,
    }
}

/// Link-based MUC score.
pub fn muc_score<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> ScoreTriple {
    muc_counts(key, response).triple()
}

/// Σ over mentions of `gold` of |G ∩ O(m)| / |G|, and the mention count.
fn b3_side<M: MentionId>(gold: &Clustering<M>, other: &Clustering<M>) -> (f64, f64) {
    let mut num = 0.0;
    for (i, chain) in gold.chains.iter().enumerate() {
        let (overlaps, missing) = gold.overlaps(i, other);
        // each mention in an overlap of size k contributes k/|G|
        let sq: usize = overlaps.values().map(|k| k * k).sum::<usize>() + missing;
        num += sq as f64 / chain.len() as f64;
    }
    (num, gold.mention_count() as f64)
}

pub fn b_cubed_counts<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> MetricCounts {
    let (recall_num, recall_den) = b3_side(key, response);
    let (precision_num, precision_den) = b3_side(response, key);
    MetricCounts {
        recall_num,
        recall_den,
        precision_num,
        precision_den,
    }
}

/// Per-mention B-cubed score.
pub fn b_cubed<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> ScoreTriple {
    b_cubed_counts(key, response).triple()
}

/// φ4(K, R) = 2|K ∩ R| / (|K| + |R|).
pub fn phi4(overlap: usize, key_len: usize, response_len: usize) -> f64 {
    2.0 * overlap as f64 / (key_len + response_len) as f64
}

/// Optimal total φ4 similarity over one-to-one chain alignments.
pub fn ceaf_phi4_similarity<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> f64 {
    let mut weights = vec![vec![0.0; response.chains.len()]; key.chains.len()];
    for (i, row) in weights.iter_mut().enumerate() {
        let (overlaps, _) = key.overlaps(i, response);
        for (j, k) in overlaps {
            row[j] = phi4(k, key.chains[i].len(), response.chains[j].len());
        }
    }
    max_weight_assignment(&weights).0
}

pub fn ceaf_phi4_counts<M: MentionId>(
    key: &Clustering<M>,
    response: &Clustering<M>,
) -> MetricCounts {
    let phi = ceaf_phi4_similarity(key, response);
    MetricCounts {
        recall_num: phi,
        recall_den: key.chains.len() as f64,
        precision_num: phi,
        precision_den: response.chains.len() as f64,
    }
}

/// Entity-based CEAF with the φ4 similarity.
pub fn ceaf_phi4<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> ScoreTriple {
    ceaf_phi4_counts(key, response).triple()
}

/// Component-wise mean. F1 is the mean of the three F1s, not recomputed.
pub fn conll_average(muc: ScoreTriple, b3: ScoreTriple, ceaf4: ScoreTriple) -> ScoreTriple {
    let mean = |f: fn(&ScoreTriple) -> f64| (f(&muc) + f(&b3) + f(&ceaf4)) / 3.0;
    ScoreTriple {
        precision: mean(|t| t.precision),
        recall: mean(|t| t.recall),
        f1: mean(|t| t.f1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub muc: ScoreTriple,
    pub b3: ScoreTriple,
    pub ceaf4: ScoreTriple,
    pub avg: ScoreTriple,
}

impl ScoreReport {
    pub fn from_triples(muc: ScoreTriple, b3: ScoreTriple, ceaf4: ScoreTriple) -> Self {
        ScoreReport {
            muc,
            b3,
            ceaf4,
            avg: conll_average(muc, b3, ceaf4),
        }
    }

    /// Columns in display order: MUC, CEAF-φ4, B³, AVG.
    fn columns(&self) -> [(&'static str, &'static str, ScoreTriple); 4] {
        [
            ("MUC", "MUC", self.muc),
            ("CEAF_φ4", "CEAF_phi4", self.ceaf4),
            ("B³", "B3", self.b3),
            ("AVG", "AVG", self.avg),
        ]
    }

    /// Fixed-width table, three decimals.
    pub fn to_text_table(&self) -> String {
        let mut top = String::new();
        let mut sub = String::new();
        let mut vals = String::new();
        for (name, _, t) in self.columns() {
            let _ = write!(
                top,
                "{}{}",
                name,
                " ".repeat(22usize.saturating_sub(name.chars().count()))
            );
            let _ = write!(sub, "{:<7}{:<7}{:<8}", "P", "R", "F1");
            let _ = write!(vals, "{:<7.3}{:<7.3}{:<8.3}", t.precision, t.recall, t.f1);
        }
        format!(
            "{}\n{}\n{}\n",
            top.trim_end(),
            sub.trim_end(),
            vals.trim_end()
        )
    }

    /// Header plus one row, six decimals.
    pub fn to_csv(&self) -> String {
        let mut header = Vec::new();
        let mut row = Vec::new();
        for (_, key, t) in self.columns() {
            for (part, v) in [("P", t.precision), ("R", t.recall), ("F1", t.f1)] {
                header.push(format!("{key}_{part}"));
                row.push(format!("{v:.6}"));
            }
        }
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

/// Summed counts for all three metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorpusCounts {
    pub muc: MetricCounts,
    pub b3: MetricCounts,
    pub ceaf4: MetricCounts,
}

impl CorpusCounts {
    pub fn of<M: MentionId>(key: &Clustering<M>, response: &Clustering<M>) -> Self {
        CorpusCounts {
            muc: muc_counts(key, response),
            b3: b_cubed_counts(key, response),
            ceaf4: ceaf_phi4_counts(key, response),
        }
    }

    pub fn report(&self) -> ScoreReport {
        ScoreReport::from_triples(self.muc.triple(), self.b3.triple(), self.ceaf4.triple())
    }
}

impl std::ops::AddAssign for CorpusCounts {
    fn add_assign(&mut self, o: CorpusCounts) {
        self.muc += o.muc;
        self.b3 += o.b3;
        self.ceaf4 += o.ceaf4;
    }
}

/// Maps span-identical mentions of two documents to shared ids.
///
/// Ids are dense: mentions of the key first (in chain order), then
/// response-only mentions.
pub fn align_mentions(
    key: &ConllDocument,
    response: &ConllDocument,
) -> Result<(Clustering<usize>, Clustering<usize>), ScoreError> {
    if key.token_count() != response.token_count() {
        return Err(ScoreError::DocumentMismatch(format!(
            "{}: key has {} tokens, response has {}",
            key.id,
            key.token_count(),
            response.token_count()
        )));
    }
    let mut ids: HashMap<Mention, usize> = HashMap::new();
    let mut to_ids = |doc: &ConllDocument| -> Vec<Vec<usize>> {
        doc.chains
            .iter()
            .filter(|c| !c.mentions.is_empty())
            .map(|c| {
                c.mentions
                    .iter()
                    .map(|m| {
                        let next = ids.len();
                        *ids.entry(*m).or_insert(next)
                    })
                    .collect()
            })
            .collect()
    };
    let key_chains = to_ids(key);
    let response_chains = to_ids(response);
    let wrap = |side: &str, e: ScoreError| match e {
        ScoreError::InvalidClustering(msg) => {
            ScoreError::InvalidClustering(format!("{} ({side}): {msg}", key.id))
        }
        other => other,
    };
    Ok((
        Clustering::new(key_chains).map_err(|e| wrap("key", e))?,
        Clustering::new(response_chains).map_err(|e| wrap("response", e))?,
    ))
}

/// Micro-averaged scores over a corpus.
///
/// Documents are matched by [`DocId`]. A key document with no response
/// counterpart is scored against an empty response; a response document
/// absent from the key is an error.
pub fn score_corpus(
    key: &[ConllDocument],
    response: &[ConllDocument],
) -> Result<ScoreReport, ScoreError> {
    let mut by_id: HashMap<&DocId, &ConllDocument> = HashMap::new();
    for doc in response {
        if by_id.insert(&doc.id, doc).is_some() {
            return Err(ScoreError::DocumentMismatch(format!(
                "response document {} appears twice",
                doc.id
            )));
        }
    }
    let key_ids: HashSet<&DocId> = key.iter().map(|d| &d.id).collect();
    if let Some(extra) = response.iter().find(|d| !key_ids.contains(&d.id)) {
        return Err(ScoreError::DocumentMismatch(format!(
            "response document {} has no key counterpart",
            extra.id
        )));
    }
    let mut total = CorpusCounts::default();
    for k in key {
        let counts = match by_id.get(&k.id) {
            Some(r) => {
                let (kc, rc) = align_mentions(k, r)?;
                CorpusCounts::of(&kc, &rc)
            }
            None => {
                let empty = ConllDocument::new(k.id.clone(), k.sentences.clone(), Vec::new());
                let (kc, rc) = align_mentions(k, &empty)?;
                CorpusCounts::of(&kc, &rc)
            }
        };
        total += counts;
    }
    Ok(total.report())
}
