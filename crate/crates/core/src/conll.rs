//! CoNLL-2012 coreference files.
//!
//! Documents are delimited by `#begin document (<name>); part <nnn>` and
//! `#end document`; sentences by blank lines. Each token line holds
//! whitespace-separated columns with the coreference annotation last, e.g.
//! `(3`, `3)`, `(3)` or `(3|(7)`, and `-` when empty.
//!
//! Parsed documents remember the exact whitespace, line endings and
//! non-token lines they came from, so writing an unmodified document gives
//! back the input bytes. Edits to forms or chains only touch the affected
//! columns.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConllError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: unbalanced coreference brackets: {message}")]
    UnbalancedBrackets { line: usize, message: String },
    #[error("input is not valid UTF-8: {0}")]
    BadEncoding(#[from] std::str::Utf8Error),
    #[error("line {line}: chain {chain} lists mention {mention} twice")]
    DuplicateMention {
        line: usize,
        chain: u64,
        mention: Mention,
    },
    #[error("document {doc}: invalid span {mention} in chain {chain}: {message}")]
    InvalidSpan {
        doc: String,
        chain: u64,
        mention: Mention,
        message: String,
    },
}

/// Zero-based column positions of the form and part-of-speech columns.
/// The coreference column is always the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConllLayout {
    pub form_column: usize,
    pub pos_column: usize,
}

impl ConllLayout {
    /// Assembled OntoNotes files: doc, part, index, word, POS, ...
    pub const ONTONOTES: ConllLayout = ConllLayout {
        form_column: 3,
        pos_column: 4,
    };

    /// `form pos ... coref`, as written by [`ConllToken::simple`].
    pub const MINIMAL: ConllLayout = ConllLayout {
        form_column: 0,
        pos_column: 1,
    };
}

impl Default for ConllLayout {
    fn default() -> Self {
        Self::ONTONOTES
    }
}

/// Header key of a document: the begin-document name plus its part number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId {
    pub name: String,
    pub part: String,
}

impl DocId {
    pub fn new(name: impl Into<String>, part: impl Into<String>) -> Self {
        DocId {
            name: name.into(),
            part: part.into(),
        }
    }

    fn parse_header(rest: &str) -> DocId {
        let rest = rest.trim();
        if let Some((name, part)) = rest.split_once(';') {
            let name = name.trim();
            let name = name
                .strip_prefix('(')
                .and_then(|n| n.strip_suffix(')'))
                .unwrap_or(name);
            let part = part.trim();
            let part = part.strip_prefix("part").map_or(part, str::trim);
            DocId::new(name, part)
        } else {
            DocId::new(rest, "")
        }
    }

    fn header_line(&self) -> String {
        if self.part.is_empty() {
            format!("#begin document {}\n", self.name)
        } else {
            format!("#begin document ({}); part {}\n", self.name, self.part)
        }
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.part.is_empty() {
            f.write_str(&self.name)
        } else {
            write!(f, "{}_{}", self.name, self.part)
        }
    }
}

/// A mention span: sentence index and inclusive token range within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mention {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl Mention {
    pub fn new(sentence: usize, start: usize, end: usize) -> Self {
        Mention {
            sentence,
            start,
            end,
        }
    }
}

impl fmt::Display for Mention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}..={})", self.sentence, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefChain {
    pub chain_id: u64,
    /// Sorted, without duplicates.
    pub mentions: Vec<Mention>,
}

/// One token line: its columns and the whitespace around them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllToken {
    columns: Vec<String>,
    /// `columns.len() + 1` runs: leading, between each pair, trailing
    /// (including the line terminator).
    separators: Vec<String>,
    layout: ConllLayout,
}

impl ConllToken {
    /// Builds a token from columns; the last column is the coreference
    /// column. Columns are joined by single spaces on output.
    pub fn from_columns<S: Into<String>>(columns: Vec<S>, layout: ConllLayout) -> Self {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        let mut separators = vec![String::new()];
        separators.extend((1..columns.len()).map(|_| " ".to_owned()));
        separators.push("\n".to_owned());
        ConllToken {
            columns,
            separators,
            layout,
        }
    }

    /// Three-column token `form pos -` with a matching layout.
    pub fn simple(form: &str, pos: &str) -> Self {
        Self::from_columns(vec![form, pos, "-"], ConllLayout::MINIMAL)
    }

    pub fn form(&self) -> &str {
        &self.columns[self.layout.form_column]
    }

    pub fn set_form(&mut self, form: impl Into<String>) {
        let col = self.layout.form_column;
        self.columns[col] = form.into();
    }

    /// The POS tag, if the layout's POS column exists and is not the
    /// coreference column.
    pub fn pos(&self) -> Option<&str> {
        let col = self.layout.pos_column;
        (col + 1 < self.columns.len()).then(|| self.columns[col].as_str())
    }

    pub fn raw_columns(&self) -> &[String] {
        &self.columns
    }

    pub fn coref_column(&self) -> &str {
        self.columns.last().map_or("-", String::as_str)
    }

    fn write_into(&self, coref: &str, out: &mut String) {
        let last = self.columns.len() - 1;
        for (i, col) in self.columns.iter().enumerate() {
            out.push_str(&self.separators[i]);
            out.push_str(if i == last { coref } else { col });
        }
        out.push_str(&self.separators[self.columns.len()]);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RawLine {
    Token,
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RawLayout {
    leading: String,
    header: String,
    lines: Vec<RawLine>,
    sentence_lengths: Vec<usize>,
    footer: String,
    trailing: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllDocument {
    pub id: DocId,
    pub sentences: Vec<Vec<ConllToken>>,
    pub chains: Vec<CorefChain>,
    raw: Option<RawLayout>,
}

impl ConllDocument {
    /// A document with canonical layout. Chains are sorted and deduplicated.
    pub fn new(id: DocId, sentences: Vec<Vec<ConllToken>>, chains: Vec<CorefChain>) -> Self {
        let chains = chains
            .into_iter()
            .map(|mut c| {
                c.mentions.sort();
                c.mentions.dedup();
                c
            })
            .collect();
        ConllDocument {
            id,
            sentences,
            chains,
            raw: None,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &ConllToken> {
        self.sentences.iter().flatten()
    }

    pub fn tokens_mut(&mut self) -> impl Iterator<Item = &mut ConllToken> {
        self.sentences.iter_mut().flatten()
    }

    /// Checks every mention against sentence bounds and representability in
    /// the bracket column.
    pub fn check_spans(&self) -> Result<(), ConllError> {
        for chain in &self.chains {
            let bad = |mention: Mention, message: &str| ConllError::InvalidSpan {
                doc: self.id.to_string(),
                chain: chain.chain_id,
                mention,
                message: message.to_owned(),
            };
            for &m in &chain.mentions {
                let len = self.sentences.get(m.sentence).map(Vec::len);
                match len {
                    None => return Err(bad(m, "sentence index out of range")),
                    Some(len) if m.end >= len => return Err(bad(m, "span runs past sentence end")),
                    _ if m.start > m.end => return Err(bad(m, "start after end")),
                    _ => {}
                }
            }
            // Same-chain spans that cross cannot be expressed with brackets.
            for (i, a) in chain.mentions.iter().enumerate() {
                for b in &chain.mentions[i + 1..] {
                    if a.sentence == b.sentence
                        && a.start < b.start
                        && b.start < a.end
                        && a.end < b.end
                    {
                        return Err(bad(*b, "crosses another mention of the same chain"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Renders the coreference column for every token from `self.chains`.
    ///
    /// A token whose stored column already encodes the same markers keeps
    /// its original string, so parsed files reproduce their own columns.
    pub fn chains_to_column(&self) -> Vec<Vec<String>> {
        let markers = self.markers();
        self.sentences
            .iter()
            .zip(markers)
            .map(|(sent, marks)| {
                sent.iter()
                    .zip(marks)
                    .map(|(tok, mine)| column_string(tok, &mine))
                    .collect()
            })
            .collect()
    }

    fn markers(&self) -> Vec<Vec<Vec<Marker>>> {
        // (group, nesting rank, chain id, marker), sorted per token
        type Keyed = (u8, usize, u64, Marker);
        let mut out: Vec<Vec<Vec<Keyed>>> = self
            .sentences
            .iter()
            .map(|s| vec![Vec::new(); s.len()])
            .collect();
        for chain in &self.chains {
            let id = chain.chain_id;
            for m in &chain.mentions {
                let sent = &mut out[m.sentence];
                if m.start == m.end {
                    sent[m.start].push((1, 0, id, Marker::Single(id)));
                } else {
                    // closes first (innermost first), then singles, then
                    // opens (outermost first)
                    sent[m.end].push((0, usize::MAX - m.start, id, Marker::Close(id)));
                    sent[m.start].push((2, usize::MAX - m.end, id, Marker::Open(id)));
                }
            }
        }
        out.into_iter()
            .map(|sent| {
                sent.into_iter()
                    .map(|mut tok| {
                        tok.sort();
                        tok.into_iter().map(|(.., m)| m).collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn write_into(&self, out: &mut String) -> Result<(), ConllError> {
        self.check_spans()?;
        let columns = self.chains_to_column();

        let lengths: Vec<usize> = self.sentences.iter().map(Vec::len).collect();
        match &self.raw {
            Some(raw) if raw.sentence_lengths == lengths => {
                out.push_str(&raw.leading);
                out.push_str(&raw.header);
                let mut positions =
                    self.sentences.iter().enumerate().flat_map(|(s, sent)| {
                        sent.iter().enumerate().map(move |(t, tok)| (s, t, tok))
                    });
                for line in &raw.lines {
                    match line {
                        RawLine::Other(text) => out.push_str(text),
                        RawLine::Token => {
                            let (s, t, tok) = positions.next().expect("token count checked");
                            tok.write_into(&columns[s][t], out);
                        }
                    }
                }
                out.push_str(&raw.footer);
                out.push_str(&raw.trailing);
            }
            _ => {
                out.push_str(&self.id.header_line());
                for (s, sent) in self.sentences.iter().enumerate() {
                    if s > 0 {
                        out.push('\n');
                    }
                    for (t, tok) in sent.iter().enumerate() {
                        tok.write_into(&columns[s][t], out);
                    }
                }
                if !self.sentences.is_empty() {
                    out.push('\n');
                }
                out.push_str("#end document\n");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Marker {
    Open(u64),
    Close(u64),
    Single(u64),
}

fn column_string(tok: &ConllToken, mine: &[Marker]) -> String {
    let raw = tok.coref_column();
    if let Ok(mut theirs) = parse_markers(raw) {
        let mut sorted = mine.to_vec();
        sorted.sort();
        theirs.sort();
        if sorted == theirs {
            return raw.to_owned();
        }
    }
    render_markers(mine)
}

fn render_markers(markers: &[Marker]) -> String {
    if markers.is_empty() {
        return "-".to_owned();
    }
    markers
        .iter()
        .map(|m| match m {
            Marker::Open(id) => format!("({id}"),
            Marker::Close(id) => format!("{id})"),
            Marker::Single(id) => format!("({id})"),
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn parse_markers(field: &str) -> Result<Vec<Marker>, String> {
    if field == "-" || field.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| format!("bad chain id in coreference field {field:?}"))
    };
    field
        .split('|')
        .map(|part| {
            let open = part.starts_with('(');
            let close = part.ends_with(')');
            match (open, close) {
                (true, true) if part.len() >= 3 => {
                    num(&part[1..part.len() - 1]).map(Marker::Single)
                }
                (true, false) => num(&part[1..]).map(Marker::Open),
                (false, true) => num(&part[..part.len() - 1]).map(Marker::Close),
                _ => Err(format!("bad coreference field {field:?}")),
            }
        })
        .collect()
}

/// Splits a line into columns and the whitespace runs around them.
fn split_columns(line: &str) -> (Vec<String>, Vec<String>) {
    let mut columns = Vec::new();
    let mut separators = Vec::new();
    let mut rest = line;
    loop {
        let ws_end = rest
            .char_indices()
            .find(|&(_, c)| !c.is_whitespace())
            .map_or(rest.len(), |(i, _)| i);
        separators.push(rest[..ws_end].to_owned());
        rest = &rest[ws_end..];
        if rest.is_empty() {
            break;
        }
        let col_end = rest
            .char_indices()
            .find(|&(_, c)| c.is_whitespace())
            .map_or(rest.len(), |(i, _)| i);
        columns.push(rest[..col_end].to_owned());
        rest = &rest[col_end..];
    }
    if separators.len() == columns.len() {
        separators.push(String::new());
    }
    (columns, separators)
}

struct DocBuilder {
    id: DocId,
    raw: RawLayout,
    sentences: Vec<Vec<ConllToken>>,
    current: Vec<ConllToken>,
    columns: Option<usize>,
    open: HashMap<u64, Vec<(usize, usize)>>,
    chains: BTreeMap<u64, Vec<Mention>>,
    chain_lines: HashMap<(u64, Mention), usize>,
}

impl DocBuilder {
    fn end_sentence(&mut self, line: usize) -> Result<(), ConllError> {
        if let Some((id, _)) = self.open.iter().find(|(_, v)| !v.is_empty()) {
            return Err(ConllError::UnbalancedBrackets {
                line,
                message: format!("chain {id} still open at sentence end"),
            });
        }
        if !self.current.is_empty() {
            self.raw.sentence_lengths.push(self.current.len());
            self.sentences.push(std::mem::take(&mut self.current));
        }
        Ok(())
    }

    fn add_token(
        &mut self,
        line_no: usize,
        line: &str,
        layout: ConllLayout,
    ) -> Result<(), ConllError> {
        let (columns, separators) = split_columns(line);
        let needed = layout.form_column + 2;
        if columns.len() < needed {
            return Err(ConllError::MalformedLine {
                line: line_no,
                message: format!(
                    "expected at least {needed} columns, found {}",
                    columns.len()
                ),
            });
        }
        match self.columns {
            Some(n) if n != columns.len() => {
                return Err(ConllError::MalformedLine {
                    line: line_no,
                    message: format!(
                        "expected {n} columns like the rest of the document, found {}",
                        columns.len()
                    ),
                })
            }
            _ => self.columns = Some(columns.len()),
        }
        let sentence = self.sentences.len();
        let index = self.current.len();
        let markers = parse_markers(columns.last().expect("non-empty")).map_err(|message| {
            ConllError::MalformedLine {
                line: line_no,
                message,
            }
        })?;
        for marker in markers {
            match marker {
                Marker::Open(id) => self.open.entry(id).or_default().push((index, line_no)),
                Marker::Single(id) => {
                    self.add_mention(id, Mention::new(sentence, index, index), line_no)?
                }
                Marker::Close(id) => {
                    let (start, _) =
                        self.open.get_mut(&id).and_then(Vec::pop).ok_or_else(|| {
                            ConllError::UnbalancedBrackets {
                                line: line_no,
                                message: format!("chain {id} closed without being opened"),
                            }
                        })?;
                    self.add_mention(id, Mention::new(sentence, start, index), line_no)?;
                }
            }
        }
        self.current.push(ConllToken {
            columns,
            separators,
            layout,
        });
        self.raw.lines.push(RawLine::Token);
        Ok(())
    }

    fn add_mention(&mut self, chain: u64, mention: Mention, line: usize) -> Result<(), ConllError> {
        if self.chain_lines.insert((chain, mention), line).is_some() {
            return Err(ConllError::DuplicateMention {
                line,
                chain,
                mention,
            });
        }
        self.chains.entry(chain).or_default().push(mention);
        Ok(())
    }

    fn finish(self) -> ConllDocument {
        let chains = self
            .chains
            .into_iter()
            .map(|(chain_id, mut mentions)| {
                mentions.sort();
                CorefChain { chain_id, mentions }
            })
            .collect();
        ConllDocument {
            id: self.id,
            sentences: self.sentences,
            chains,
            raw: Some(self.raw),
        }
    }
}

/// Parses CoNLL-2012 bytes with the OntoNotes column layout.
pub fn parse_conll(input: &[u8]) -> Result<Vec<ConllDocument>, ConllError> {
    parse_conll_with(input, ConllLayout::default())
}

pub fn parse_conll_with(
    input: &[u8],
    layout: ConllLayout,
) -> Result<Vec<ConllDocument>, ConllError> {
    let text = std::str::from_utf8(input)?;
    let mut docs: Vec<ConllDocument> = Vec::new();
    let mut pending = String::new();
    let mut current: Option<DocBuilder> = None;

    for (i, line) in text.split_inclusive('\n').enumerate() {
        let line_no = i + 1;
        let content = line.trim_end_matches(['\n', '\r']);
        if let Some(rest) = content.strip_prefix("#begin document") {
            if current.is_some() {
                return Err(ConllError::MalformedLine {
                    line: line_no,
                    message: "nested #begin document".into(),
                });
            }
            current = Some(DocBuilder {
                id: DocId::parse_header(rest),
                raw: RawLayout {
                    leading: std::mem::take(&mut pending),
                    header: line.to_owned(),
                    lines: Vec::new(),
                    sentence_lengths: Vec::new(),
                    footer: String::new(),
                    trailing: String::new(),
                },
                sentences: Vec::new(),
                current: Vec::new(),
                columns: None,
                open: HashMap::new(),
                chains: BTreeMap::new(),
                chain_lines: HashMap::new(),
            });
        } else if content.starts_with("#end document") {
            let mut doc = current.take().ok_or_else(|| ConllError::MalformedLine {
                line: line_no,
                message: "#end document without #begin document".into(),
            })?;
            doc.end_sentence(line_no)?;
            doc.raw.footer = line.to_owned();
            docs.push(doc.finish());
        } else if let Some(doc) = current.as_mut() {
            if content.trim().is_empty() {
                doc.end_sentence(line_no)?;
                doc.raw.lines.push(RawLine::Other(line.to_owned()));
            } else if content.starts_with('#') {
                doc.raw.lines.push(RawLine::Other(line.to_owned()));
            } else {
                doc.add_token(line_no, line, layout)?;
            }
        } else if content.trim().is_empty() || content.starts_with('#') {
            pending.push_str(line);
        } else {
            return Err(ConllError::MalformedLine {
                line: line_no,
                message: "token line outside of a document".into(),
            });
        }
    }
    if current.is_some() {
        return Err(ConllError::MalformedLine {
            line: text.split_inclusive('\n').count(),
            message: "document not terminated by #end document".into(),
        });
    }
    if let Some(last) = docs.last_mut() {
        if let Some(raw) = last.raw.as_mut() {
            raw.trailing = pending;
        }
    }
    Ok(docs)
}

/// Serializes documents. Unmodified parsed documents come back byte-exact.
pub fn write_conll(docs: &[ConllDocument]) -> Result<Vec<u8>, ConllError> {
    let mut out = String::new();
    for doc in docs {
        doc.write_into(&mut out)?;
    }
    Ok(out.into_bytes())
}
