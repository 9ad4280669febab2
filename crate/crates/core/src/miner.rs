//! Neopronoun candidate mining over line-oriented corpora.
//!
//! Reflexive forms are a cheap proxy for pronoun sets of any shape: every
//! token ending in `self` or `selves` is counted unless it is a first- or
//! second-person (or plural) reflexive or on the stoplist. Counts from
//! independent shards merge by addition, so a corpus can be mined in any
//! number of pieces.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::normalize::is_edge_noise;

/// Reflexives that are not third-person singular.
pub const NON_THIRD_PERSON: &[&str] = &[
    "myself",
    "meself",
    "ourself",
    "ourselves",
    "yourself",
    "yourselves",
    "yourselfs",
    "thyself",
    "urself",
    "urselves",
    "themselves",
];

/// Standard English third-person reflexives, excluded only on request.
pub const STANDARD_REFLEXIVES: &[&str] = &["himself", "herself", "itself", "themself"];

/// Default stoplist: the non-third-person reflexives plus `oneself`.
pub const DEFAULT_STOPLIST: &[&str] = &[
    "myself",
    "meself",
    "ourself",
    "ourselves",
    "yourself",
    "yourselves",
    "yourselfs",
    "thyself",
    "urself",
    "urselves",
    "themselves",
    "oneself",
];

#[derive(Debug, Clone)]
pub struct MinerConfig {
    /// Lowercase suffixes a candidate must end with.
    pub suffixes: Vec<String>,
    /// Normalized (NFC, lowercase) tokens never emitted.
    pub stoplist: HashSet<String>,
    pub filter_non_third_person: bool,
    /// Also drop `himself`, `herself`, `itself` and `themself`.
    pub exclude_standard_reflexives: bool,
    /// Minimum candidate length in characters.
    pub min_token_length: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            suffixes: vec!["self".into(), "selves".into()],
            stoplist: DEFAULT_STOPLIST.iter().map(|s| s.to_string()).collect(),
            filter_non_third_person: true,
            exclude_standard_reflexives: false,
            min_token_length: 0,
        }
    }
}

impl MinerConfig {
    /// Replaces the stoplist with the contents of a stoplist file: one
    /// token per line, `#` starts a comment line.
    pub fn with_stoplist_text(mut self, text: &str) -> Self {
        self.stoplist = parse_stoplist(text);
        self
    }
}

pub fn parse_stoplist(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_token)
        .collect()
}

fn normalize_token(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenCount {
    pub token: String,
    pub count: u64,
}

impl TokenCount {
    pub fn new(token: impl Into<String>, count: u64) -> Self {
        TokenCount {
            token: token.into(),
            count,
        }
    }
}

fn is_dash(c: char) -> bool {
    c.general_category() == GeneralCategory::DashPunctuation
}

fn strip_edges(s: &str) -> &str {
    s.trim_matches(is_edge_noise)
}

/// Streaming counter. Feed lines, then merge shards or finish.
#[derive(Debug, Clone)]
pub struct Miner<'c> {
    config: &'c MinerConfig,
    counts: HashMap<String, u64>,
    lines: u64,
    malformed_lines: u64,
}

impl<'c> Miner<'c> {
    pub fn new(config: &'c MinerConfig) -> Self {
        Miner {
            config,
            counts: HashMap::new(),
            lines: 0,
            malformed_lines: 0,
        }
    }

    fn mentions_suffix(&self, raw: &str) -> bool {
        // NFC and lowercasing never turn non-ASCII text into an ASCII
        // suffix, but be exact and only shortcut pure ASCII tokens.
        if !raw.is_ascii() {
            return true;
        }
        let bytes = raw.as_bytes();
        self.config.suffixes.iter().any(|suf| {
            let s = suf.as_bytes();
            s.is_empty() || bytes.windows(s.len()).any(|w| w.eq_ignore_ascii_case(s))
        })
    }

    fn accept(&self, token: &str) -> bool {
        let cfg = self.config;
        let len = token.chars().count();
        if len < cfg.min_token_length {
            return false;
        }
        let suffix_ok = cfg
            .suffixes
            .iter()
            .any(|s| token.ends_with(s.as_str()) && len > s.chars().count());
        suffix_ok
            && !cfg.stoplist.contains(token)
            && !(cfg.filter_non_third_person && NON_THIRD_PERSON.contains(&token))
            && !(cfg.exclude_standard_reflexives && STANDARD_REFLEXIVES.contains(&token))
    }

    pub fn feed_line(&mut self, line: &str) {
        self.lines += 1;
        for raw in line.split_whitespace() {
            if !self.mentions_suffix(raw) {
                continue;
            }
            for part in raw.split(is_dash) {
                let part = strip_edges(part);
                if part.is_empty() {
                    continue;
                }
                let token = normalize_token(part);
                if self.accept(&token) {
                    *self.counts.entry(token).or_insert(0) += 1;
                }
            }
        }
    }

    /// Feeds one raw line; invalid UTF-8 is counted and skipped.
    pub fn feed_bytes(&mut self, line: &[u8]) {
        match std::str::from_utf8(line) {
            Ok(s) => self.feed_line(s),
            Err(_) => {
                self.lines += 1;
                self.malformed_lines += 1;
            }
        }
    }

    /// Adds another shard's counts into this one.
    pub fn merge(&mut self, other: Miner<'_>) {
        self.lines += other.lines;
        self.malformed_lines += other.malformed_lines;
        for (tok, n) in other.counts {
            *self.counts.entry(tok).or_insert(0) += n;
        }
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    pub fn malformed_lines(&self) -> u64 {
        self.malformed_lines
    }

    /// Counts sorted by count descending, then token.
    pub fn finish(self) -> Vec<TokenCount> {
        sorted_counts(self.counts)
    }
}

fn sorted_counts(counts: HashMap<String, u64>) -> Vec<TokenCount> {
    let mut out: Vec<TokenCount> = counts
        .into_iter()
        .map(|(token, count)| TokenCount { token, count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    out
}

/// Mines an in-memory sequence of lines.
pub fn mine_stream<I, S>(lines: I, config: &MinerConfig) -> Vec<TokenCount>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut miner = Miner::new(config);
    for line in lines {
        miner.feed_line(line.as_ref());
    }
    miner.finish()
}

/// Mines a reader line by line; returns the counts and the number of lines
/// skipped as invalid UTF-8.
pub fn mine_reader<R: BufRead>(
    mut reader: R,
    config: &MinerConfig,
) -> io::Result<(Vec<TokenCount>, u64)> {
    let mut miner = Miner::new(config);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        miner.feed_bytes(&buf);
    }
    let malformed = miner.malformed_lines();
    Ok((miner.finish(), malformed))
}

/// Adds count lists together.
pub fn merge_counts<I: IntoIterator<Item = Vec<TokenCount>>>(parts: I) -> Vec<TokenCount> {
    let mut acc: HashMap<String, u64> = HashMap::new();
    for part in parts {
        for tc in part {
            *acc.entry(tc.token).or_insert(0) += tc.count;
        }
    }
    sorted_counts(acc)
}

/// `token<TAB>count` lines.
pub fn counts_to_tsv(counts: &[TokenCount]) -> String {
    let mut out = String::from("token\tcount\n");
    for tc in counts {
        out.push_str(&tc.token);
        out.push('\t');
        out.push_str(&tc.count.to_string());
        out.push('\n');
    }
    out
}

/// Rows of (occurrence count, number of tokens with that count), by
/// decreasing occurrence count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankTable {
    pub rows: Vec<(u64, u64)>,
}

impl RankTable {
    /// Σ count × tokens.
    pub fn total_mentions(&self) -> u64 {
        self.rows.iter().map(|(c, n)| c * n).sum()
    }

    pub fn distinct_tokens(&self) -> u64 {
        self.rows.iter().map(|(_, n)| n).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["count", "num_tokens"])?;
        for (count, n) in &self.rows {
            w.write_record([count.to_string(), n.to_string()])?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn from_csv(text: &str) -> Result<RankTable, csv::Error> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize::<(u64, u64)>()
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RankTable { rows })
    }
}

pub fn rank_frequency(counts: &[TokenCount]) -> RankTable {
    let mut groups: HashMap<u64, u64> = HashMap::new();
    for tc in counts.iter().filter(|tc| tc.count > 0) {
        *groups.entry(tc.count).or_insert(0) += 1;
    }
    let mut rows: Vec<(u64, u64)> = groups.into_iter().collect();
    rows.sort_by_key(|&(count, _)| std::cmp::Reverse(count));
    RankTable { rows }
}

pub fn export_rank_csv(table: &RankTable, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    table.write_csv(&mut w)?;
    w.flush()
}
