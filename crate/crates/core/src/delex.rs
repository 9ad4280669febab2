//! Pronoun delexicalization and post-hoc relexicalization.
//!
//! Delexicalization rewrites pronoun tokens into placeholders so that a
//! model never sees which pronoun set was used. Two placeholder schemes
//! exist:
//!
//! | case                     | paper    | extended     |
//! |--------------------------|----------|--------------|
//! | nominative               | `PRP`    | `PRP:nom`    |
//! | accusative               | `PRP`    | `PRP:acc`    |
//! | reflexive                | `PRP`    | `PRP:refl`   |
//! | possessive (independent) | `PRP`    | `PRP:posind` |
//! | possessive (dependent)   | `PRP$`   | `PRP$`       |
//!
//! Relexicalization goes the other way for the extended scheme, filling each
//! slot from an [`IndividualProfile`]. Only the replaced token itself is ever
//! inspected (plus the following token when resolving `her`/`his`-style
//! ambiguity); names and other context are never used to pick pronouns.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::conll::ConllDocument;
use crate::normalize::{is_alphabetic_form, split_punct};
use crate::profile::{IndividualProfile, Policy, ProfileViolation};
use crate::registry::{Case, Lexicon, PronounCategory, PronounRegistry, SetId};

pub const PRP: &str = "PRP";
pub const PRP_POSS: &str = "PRP$";
pub const PRP_NOM: &str = "PRP:nom";
pub const PRP_ACC: &str = "PRP:acc";
pub const PRP_REFL: &str = "PRP:refl";
pub const PRP_POSIND: &str = "PRP:posind";

const ROW_ORDER: [&str; 6] = [PRP, PRP_POSS, PRP_NOM, PRP_ACC, PRP_REFL, PRP_POSIND];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DelexMode {
    /// Two placeholders, `PRP` and `PRP$`.
    #[default]
    Paper,
    /// Case-tagged placeholders that can be relexicalized.
    Extended,
}

impl std::str::FromStr for DelexMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(DelexMode::Paper),
            "extended" => Ok(DelexMode::Extended),
            other => Err(format!("unknown delexicalization mode {other:?}")),
        }
    }
}

pub fn placeholder(case: Case, mode: DelexMode) -> &'static str {
    match (mode, case) {
        (_, Case::PossessiveDependent) => PRP_POSS,
        (DelexMode::Paper, _) => PRP,
        (DelexMode::Extended, Case::Nominative) => PRP_NOM,
        (DelexMode::Extended, Case::Accusative) => PRP_ACC,
        (DelexMode::Extended, Case::Reflexive) => PRP_REFL,
        (DelexMode::Extended, Case::PossessiveIndependent) => PRP_POSIND,
    }
}

/// Case encoded by an extended placeholder. `PRP` itself has none.
pub fn placeholder_case(token: &str) -> Option<Case> {
    match token {
        PRP_NOM => Some(Case::Nominative),
        PRP_ACC => Some(Case::Accusative),
        PRP_REFL => Some(Case::Reflexive),
        PRP_POSIND => Some(Case::PossessiveIndependent),
        PRP_POSS => Some(Case::PossessiveDependent),
        _ => None,
    }
}

fn is_placeholder(token: &str) -> bool {
    token == PRP || placeholder_case(token).is_some()
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DelexError {
    #[error("document {doc}: token {token} has no part-of-speech column")]
    MissingPos { doc: String, token: usize },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RelexError {
    #[error("token {index} is a bare `PRP` placeholder; its case is unknown")]
    UnresolvedPlaceholder { index: usize },
    #[error("profile has no pronoun sets for policy {0}")]
    EmptyProfile(Policy),
    #[error("mirrored pronouns need the referring speaker's set")]
    MissingMirrorSet,
    #[error("pronoun set {0} is not registered")]
    UnknownSet(SetId),
    #[error("invalid profile: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidProfile(Vec<ProfileViolation>),
}

/// Replacement counts per placeholder and corpus split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DelexReport {
    splits: Vec<String>,
    counts: BTreeMap<String, BTreeMap<String, u64>>,
    /// Input tokens that already looked like placeholders.
    pub warnings: Vec<String>,
}

impl DelexReport {
    pub const DEFAULT_SPLIT: &'static str = "all";

    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, placeholder: &str, split: &str, n: u64) {
        if !self.splits.iter().any(|s| s == split) {
            self.splits.push(split.to_owned());
        }
        *self
            .counts
            .entry(placeholder.to_owned())
            .or_default()
            .entry(split.to_owned())
            .or_insert(0) += n;
    }

    pub fn count(&self, placeholder: &str, split: &str) -> u64 {
        self.counts
            .get(placeholder)
            .and_then(|m| m.get(split))
            .copied()
            .unwrap_or(0)
    }

    pub fn placeholder_total(&self, placeholder: &str) -> u64 {
        self.counts.get(placeholder).map_or(0, |m| m.values().sum())
    }

    pub fn split_total(&self, split: &str) -> u64 {
        self.counts.values().filter_map(|m| m.get(split)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flat_map(|m| m.values()).sum()
    }

    pub fn splits(&self) -> &[String] {
        &self.splits
    }

    /// Placeholders with a non-zero count.
    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// Moves every count into a single split named `split`.
    pub fn relabel(self, split: &str) -> Self {
        let mut out = DelexReport {
            warnings: self.warnings,
            ..Default::default()
        };
        out.splits.push(split.to_owned());
        for (ph, per_split) in self.counts {
            out.add(&ph, split, per_split.values().sum());
        }
        out
    }

    pub fn merge(&mut self, other: DelexReport) {
        for split in other.splits {
            if !self.splits.contains(&split) {
                self.splits.push(split);
            }
        }
        for (ph, per_split) in other.counts {
            for (split, n) in per_split {
                self.add(&ph, &split, n);
            }
        }
        self.warnings.extend(other.warnings);
    }

    /// Tab-separated table: one row per placeholder, one column per split,
    /// then a total column and a total row. `PRP` and `PRP$` rows are
    /// always present.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<&str> = vec![PRP, PRP_POSS];
        rows.extend(
            ROW_ORDER[2..]
                .iter()
                .copied()
                .filter(|r| self.counts.contains_key(*r)),
        );
        rows.extend(
            self.counts
                .keys()
                .map(String::as_str)
                .filter(|k| !ROW_ORDER.contains(k)),
        );

        let mut out = String::from("placeholder");
        for split in &self.splits {
            let _ = write!(out, "\t{split}");
        }
        out.push_str("\ttotal\n");
        for row in rows {
            out.push_str(row);
            for split in &self.splits {
                let _ = write!(out, "\t{}", self.count(row, split));
            }
            let _ = writeln!(out, "\t{}", self.placeholder_total(row));
        }
        out.push_str("Total");
        for split in &self.splits {
            let _ = write!(out, "\t{}", self.split_total(split));
        }
        let _ = writeln!(out, "\t{}", self.total());
        out
    }
}

/// Case of a standard English personal pronoun as tagged `PRP` in the Penn
/// Treebank. Forms that are both nominative and accusative (`you`, `it`)
/// resolve to nominative.
pub fn english_prp_case(form: &str) -> Option<Case> {
    let lower = form.to_lowercase();
    Some(match lower.as_str() {
        "i" | "you" | "he" | "she" | "it" | "we" | "they" | "thou" | "ye" | "u" => Case::Nominative,
        "me" | "him" | "her" | "us" | "them" | "thee" | "'em" => Case::Accusative,
        "myself" | "yourself" | "himself" | "herself" | "itself" | "ourselves" | "yourselves"
        | "themselves" | "themself" | "oneself" | "thyself" => Case::Reflexive,
        "mine" | "yours" | "his" | "hers" | "ours" | "theirs" | "thine" => {
            Case::PossessiveIndependent
        }
        _ => return None,
    })
}

/// Replaces every `PRP`/`PRP$`-tagged token form with a placeholder.
///
/// Tags, chains and token count are untouched. In extended mode `PRP`
/// tokens are classified with [`english_prp_case`]; unknown forms keep the
/// bare `PRP` placeholder. Forms that already are placeholders are kept, so
/// delexicalizing twice changes nothing.
pub fn delex_document(
    doc: &ConllDocument,
    mode: DelexMode,
) -> Result<(ConllDocument, DelexReport), DelexError> {
    let mut out = doc.clone();
    let mut report = DelexReport::new();
    for (i, tok) in out.tokens_mut().enumerate() {
        let pos = tok.pos().ok_or_else(|| DelexError::MissingPos {
            doc: doc.id.to_string(),
            token: i,
        })?;
        let ph = match pos {
            "PRP$" => PRP_POSS,
            "PRP" => match mode {
                DelexMode::Paper => PRP,
                DelexMode::Extended => placeholder_case(tok.form())
                    .or_else(|| english_prp_case(tok.form()))
                    .map_or(PRP, |c| placeholder(c, DelexMode::Extended)),
            },
            _ => continue,
        };
        tok.set_form(ph);
        report.add(ph, DelexReport::DEFAULT_SPLIT, 1);
    }
    Ok((out, report))
}

/// Picks one case when a surface form is listed under several.
pub trait CaseResolver {
    /// `candidates` is non-empty, sorted, without duplicates. `next` is the
    /// following token with punctuation stripped, or `None` at a clause
    /// boundary.
    fn resolve(&self, candidates: &[Case], next: Option<&str>, lexicon: &Lexicon) -> Case;
}

/// Default resolver: a dependent possessive wins when followed directly by
/// an alphabetic word that is not itself in the lexicon (a rough noun-phrase
/// test); otherwise accusative, then nominative, reflexive and independent
/// possessive in that order.
#[derive(Debug, Clone, Copy, Default)]
pub struct NextWordHeuristic;

impl CaseResolver for NextWordHeuristic {
    fn resolve(&self, candidates: &[Case], next: Option<&str>, lexicon: &Lexicon) -> Case {
        if candidates.len() == 1 {
            return candidates[0];
        }
        let has = |c| candidates.contains(&c);
        if has(Case::PossessiveDependent) {
            let noun_follows = next.is_some_and(|w| is_alphabetic_form(w) && !lexicon.contains(w));
            if noun_follows {
                return Case::PossessiveDependent;
            }
        }
        [
            Case::Accusative,
            Case::Nominative,
            Case::Reflexive,
            Case::PossessiveIndependent,
            Case::PossessiveDependent,
        ]
        .into_iter()
        .find(|&c| has(c))
        .expect("candidates non-empty")
    }
}

/// Splits text into alternating whitespace / token pieces.
fn pieces(text: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_ws = None;
    for (i, c) in text.char_indices() {
        let ws = c.is_whitespace();
        if in_ws != Some(ws) {
            if i > start {
                out.push((in_ws.unwrap_or(ws), &text[start..i]));
            }
            start = i;
            in_ws = Some(ws);
        }
    }
    if start < text.len() {
        out.push((in_ws.unwrap_or(false), &text[start..]));
    }
    out
}

/// Lexicon-driven delexicalization of whitespace-tokenized text.
pub fn delex_text(text: &str, lexicon: &Lexicon, mode: DelexMode) -> (String, DelexReport) {
    delex_text_with(text, lexicon, mode, &NextWordHeuristic)
}

pub fn delex_text_with(
    text: &str,
    lexicon: &Lexicon,
    mode: DelexMode,
    resolver: &dyn CaseResolver,
) -> (String, DelexReport) {
    let parts = pieces(text);
    let tokens: Vec<(&str, &str, &str)> = parts
        .iter()
        .filter(|(ws, _)| !ws)
        .map(|(_, t)| split_punct(t))
        .collect();
    let mut report = DelexReport::new();
    let mut out = String::with_capacity(text.len());
    let mut ti = 0;
    for (ws, piece) in parts {
        if ws {
            out.push_str(piece);
            continue;
        }
        let (lead, core, trail) = tokens[ti];
        let next = if trail.is_empty() {
            tokens
                .get(ti + 1)
                .filter(|(l, c, _)| l.is_empty() && !c.is_empty())
                .map(|(_, c, _)| *c)
        } else {
            None
        };
        ti += 1;

        if is_placeholder(core) {
            report.warnings.push(format!(
                "input token {core:?} collides with a placeholder; left unchanged"
            ));
        }
        let entries = lexicon.lookup(core);
        if core.is_empty() || entries.is_empty() {
            out.push_str(piece);
            continue;
        }
        let mut cases: Vec<Case> = entries.iter().map(|e| e.case).collect();
        cases.sort();
        cases.dedup();
        let case = resolver.resolve(&cases, next, lexicon);
        let ph = placeholder(case, mode);
        out.push_str(lead);
        out.push_str(ph);
        out.push_str(trail);
        report.add(ph, DelexReport::DEFAULT_SPLIT, 1);
    }
    (out, report)
}

/// Extra inputs for relexicalization.
#[derive(Debug, Clone, Default)]
pub struct RelexOptions {
    /// The speaker's own set, used by [`Policy::Mirrored`].
    pub mirror_set: Option<SetId>,
}

fn avoid_marker(placeholder: &str) -> String {
    format!("<avoid:{placeholder}>")
}

/// Fills extended placeholders with the profile's pronoun forms.
///
/// No morphosyntactic repair is attempted: `PRP:nom likes` becomes
/// `they likes`.
pub fn relexicalize(
    text: &str,
    profile: &IndividualProfile,
    registry: &PronounRegistry,
    options: &RelexOptions,
) -> Result<String, RelexError> {
    let violations = registry.validate_profile(profile);
    if !violations.is_empty() {
        return Err(RelexError::InvalidProfile(violations));
    }
    let sets: Vec<_> = match profile.policy {
        Policy::Mirrored => {
            let id = options
                .mirror_set
                .as_ref()
                .ok_or(RelexError::MissingMirrorSet)?;
            vec![registry
                .get(id)
                .ok_or_else(|| RelexError::UnknownSet(id.clone()))?]
        }
        _ => profile
            .sets
            .iter()
            .map(|id| registry.get(id).expect("validated"))
            .collect(),
    };
    if sets.is_empty() && matches!(profile.policy, Policy::Single | Policy::EqualAlternating) {
        return Err(RelexError::EmptyProfile(profile.policy));
    }
    let name = profile.name.as_deref().unwrap_or_default();
    let nameself = sets
        .iter()
        .find(|s| s.category == PronounCategory::Nameself);

    let mut out = String::with_capacity(text.len());
    let mut slot = 0usize;
    let mut index = 0usize;
    for (ws, piece) in pieces(text) {
        if ws {
            out.push_str(piece);
            continue;
        }
        index += 1;
        let (lead, core, trail) = split_punct(piece);
        let case = match placeholder_case(core) {
            Some(case) => case,
            None if core == PRP => {
                return Err(RelexError::UnresolvedPlaceholder { index: index - 1 })
            }
            None => {
                out.push_str(piece);
                continue;
            }
        };
        let replacement = match profile.policy {
            Policy::Single | Policy::Mirrored => sets[0].forms.get(case).to_owned(),
            Policy::EqualAlternating => sets[slot % sets.len()].forms.get(case).to_owned(),
            Policy::NameOnly => match case {
                Case::Nominative | Case::Accusative => name.to_owned(),
                Case::PossessiveDependent | Case::PossessiveIndependent => format!("{name}'s"),
                Case::Reflexive => nameself.map_or(name, |s| &s.forms.reflexive).to_owned(),
            },
            Policy::Avoid => avoid_marker(core),
        };
        slot += 1;
        out.push_str(lead);
        out.push_str(&replacement);
        out.push_str(trail);
    }
    Ok(out)
}
