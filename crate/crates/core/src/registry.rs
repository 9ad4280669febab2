//! Open-class third-person pronoun sets and the lexicon derived from them.
//!
//! A [`PronounRegistry`] starts either empty or seeded with the builtin
//! inventory (gendered, gender-neutral, neopronoun and nounself rows) and
//! accepts new sets at any time. Nothing here restricts what a legal form
//! looks like beyond being a non-empty, whitespace-free token: emoji, digits
//! and names are all fine.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::normalize::{lexicon_key, nfc};
use crate::profile::{IndividualProfile, Policy, ProfileViolation};

const BUILTIN_SETS: &str = include_str!("../data/builtin_sets.tsv");

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("{0} form is empty after normalization")]
    EmptyForm(Case),
    #[error("{case} form {form:?} contains whitespace")]
    WhitespaceInForm { case: Case, form: String },
    #[error("a pronoun set with id {0} is already registered")]
    DuplicateId(SetId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Grammatical case columns, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    Nominative,
    Accusative,
    PossessiveDependent,
    PossessiveIndependent,
    Reflexive,
}

impl Case {
    pub const ALL: [Case; 5] = [
        Case::Nominative,
        Case::Accusative,
        Case::PossessiveDependent,
        Case::PossessiveIndependent,
        Case::Reflexive,
    ];

    pub fn is_possessive(self) -> bool {
        matches!(
            self,
            Case::PossessiveDependent | Case::PossessiveIndependent
        )
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Nominative => "nominative",
            Case::Accusative => "accusative",
            Case::PossessiveDependent => "possessive (dependent)",
            Case::PossessiveIndependent => "possessive (independent)",
            Case::Reflexive => "reflexive",
        })
    }
}

/// The five case forms of one pronoun set, NFC-normalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PronounForms {
    pub nominative: String,
    pub accusative: String,
    pub possessive_dependent: String,
    pub possessive_independent: String,
    pub reflexive: String,
}

impl PronounForms {
    /// Normalizes and validates the five forms, given in table order.
    pub fn new(
        nominative: &str,
        accusative: &str,
        possessive_dependent: &str,
        possessive_independent: &str,
        reflexive: &str,
    ) -> Result<Self, RegistryError> {
        Self::from_array([
            nominative,
            accusative,
            possessive_dependent,
            possessive_independent,
            reflexive,
        ])
    }

    pub fn from_array(forms: [&str; 5]) -> Result<Self, RegistryError> {
        let mut out: [String; 5] = Default::default();
        for ((slot, raw), case) in out.iter_mut().zip(forms).zip(Case::ALL) {
            let form = nfc(raw.trim());
            if form.is_empty() {
                return Err(RegistryError::EmptyForm(case));
            }
            if form.chars().any(char::is_whitespace) {
                return Err(RegistryError::WhitespaceInForm { case, form });
            }
            *slot = form;
        }
        let [nominative, accusative, possessive_dependent, possessive_independent, reflexive] = out;
        Ok(PronounForms {
            nominative,
            accusative,
            possessive_dependent,
            possessive_independent,
            reflexive,
        })
    }

    pub fn get(&self, case: Case) -> &str {
        match case {
            Case::Nominative => &self.nominative,
            Case::Accusative => &self.accusative,
            Case::PossessiveDependent => &self.possessive_dependent,
            Case::PossessiveIndependent => &self.possessive_independent,
            Case::Reflexive => &self.reflexive,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Case, &str)> + '_ {
        Case::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}

impl fmt::Display for PronounForms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}/{}",
            self.nominative,
            self.accusative,
            self.possessive_dependent,
            self.possessive_independent,
            self.reflexive
        )
    }
}

/// Descriptive label for a set. It never restricts which forms are legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PronounCategory {
    Gendered,
    GenderNeutral,
    Neopronoun,
    Nounself,
    Emojiself,
    Numberself,
    Nameself,
    Custom,
}

impl PronounCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            PronounCategory::Gendered => "gendered",
            PronounCategory::GenderNeutral => "gender_neutral",
            PronounCategory::Neopronoun => "neopronoun",
            PronounCategory::Nounself => "nounself",
            PronounCategory::Emojiself => "emojiself",
            PronounCategory::Numberself => "numberself",
            PronounCategory::Nameself => "nameself",
            PronounCategory::Custom => "custom",
        }
    }
}

impl fmt::Display for PronounCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PronounCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "gendered" => PronounCategory::Gendered,
            "gender_neutral" => PronounCategory::GenderNeutral,
            "neopronoun" => PronounCategory::Neopronoun,
            "nounself" => PronounCategory::Nounself,
            "emojiself" => PronounCategory::Emojiself,
            "numberself" => PronounCategory::Numberself,
            "nameself" => PronounCategory::Nameself,
            "custom" => PronounCategory::Custom,
            other => return Err(format!("unknown pronoun category {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Builtin,
    User,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Builtin => "builtin",
            Source::User => "user",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(Source::Builtin),
            "user" => Ok(Source::User),
            other => Err(format!("unknown set source {other:?}")),
        }
    }
}

/// Identifier of a registered set: its five forms joined by `/`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetId(String);

impl SetId {
    pub fn for_forms(forms: &PronounForms) -> SetId {
        SetId(forms.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SetId {
    fn from(s: &str) -> Self {
        SetId(nfc(s))
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounSet {
    pub id: SetId,
    pub forms: PronounForms,
    pub category: PronounCategory,
    pub source: Source,
}

impl PronounSet {
    /// One line of the pronoun-set file format, without the newline.
    pub fn to_tsv_line(&self) -> String {
        let f = &self.forms;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.category,
            f.nominative,
            f.accusative,
            f.possessive_dependent,
            f.possessive_independent,
            f.reflexive,
            self.source.as_str()
        )
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.forms.iter().any(|(_, f)| lexicon_key(f) == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub set: SetId,
    pub case: Case,
}

/// Surface form to (set, case) multimap. Ambiguity is kept, never merged.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Vec<LexiconEntry>>,
}

impl Lexicon {
    fn insert(&mut self, set: &PronounSet) {
        for (case, form) in set.forms.iter() {
            self.entries
                .entry(lexicon_key(form))
                .or_default()
                .push(LexiconEntry {
                    set: set.id.clone(),
                    case,
                });
        }
    }

    /// All entries for `surface`, in registration then case order.
    pub fn lookup(&self, surface: &str) -> &[LexiconEntry] {
        self.entries
            .get(&lexicon_key(surface))
            .map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, surface: &str) -> bool {
        !self.lookup(surface).is_empty()
    }

    /// Number of distinct normalized keys.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Registered pronoun sets plus their lexicon.
///
/// Built once and then shared read-only; registration needs `&mut self`.
#[derive(Debug, Clone, Default)]
pub struct PronounRegistry {
    sets: Vec<PronounSet>,
    index: HashMap<SetId, usize>,
    lexicon: Lexicon,
}

impl PronounRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry seeded with the builtin inventory.
    pub fn builtin() -> Self {
        let mut reg = Self::new();
        reg.load_tsv(BUILTIN_SETS)
            .expect("builtin pronoun inventory is well formed");
        reg
    }

    /// The builtin inventory in file form.
    pub fn builtin_tsv() -> &'static str {
        BUILTIN_SETS
    }

    pub fn register_set(
        &mut self,
        forms: PronounForms,
        category: PronounCategory,
    ) -> Result<&PronounSet, RegistryError> {
        self.register_with_source(forms, category, Source::User)
    }

    pub fn register_with_source(
        &mut self,
        forms: PronounForms,
        category: PronounCategory,
        source: Source,
    ) -> Result<&PronounSet, RegistryError> {
        let id = SetId::for_forms(&forms);
        if self.index.contains_key(&id) {
            return Err(RegistryError::DuplicateId(id));
        }
        let set = PronounSet {
            id: id.clone(),
            forms,
            category,
            source,
        };
        self.lexicon.insert(&set);
        self.index.insert(id, self.sets.len());
        self.sets.push(set);
        Ok(self.sets.last().expect("just pushed"))
    }

    /// Registers `stem/stem/stems/stems/stemself`.
    ///
    /// Deriving a set whose forms are already registered returns the
    /// existing set unchanged.
    pub fn derive_set_from_stem(
        &mut self,
        stem: &str,
        category: PronounCategory,
    ) -> Result<&PronounSet, RegistryError> {
        let stem = nfc(stem.trim());
        let forms = PronounForms::new(
            &stem,
            &stem,
            &format!("{stem}s"),
            &format!("{stem}s"),
            &format!("{stem}self"),
        )?;
        let id = SetId::for_forms(&forms);
        if let Some(&i) = self.index.get(&id) {
            return Ok(&self.sets[i]);
        }
        self.register_set(forms, category)
    }

    /// Every (set, case) pair whose form matches `surface`.
    pub fn lookup_form(&self, surface: &str) -> Vec<(&PronounSet, Case)> {
        self.lexicon
            .lookup(surface)
            .iter()
            .map(|e| (&self.sets[self.index[&e.set]], e.case))
            .collect()
    }

    pub fn get(&self, id: &SetId) -> Option<&PronounSet> {
        self.index.get(id).map(|&i| &self.sets[i])
    }

    /// Finds a registered set with exactly these forms.
    pub fn find(&self, forms: &PronounForms) -> Option<&PronounSet> {
        self.get(&SetId::for_forms(forms))
    }

    pub fn sets(&self) -> &[PronounSet] {
        &self.sets
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Checks a profile against this registry. An empty list means valid.
    pub fn validate_profile(&self, profile: &IndividualProfile) -> Vec<ProfileViolation> {
        let mut out = Vec::new();
        for (i, id) in profile.sets.iter().enumerate() {
            if self.get(id).is_none() {
                out.push(ProfileViolation::UnknownSet(id.clone()));
            }
            if profile.sets[..i].contains(id) {
                out.push(ProfileViolation::RepeatedSet(id.clone()));
            }
        }
        let has_name = profile
            .name
            .as_deref()
            .is_some_and(|n| !n.trim().is_empty());
        if profile.policy == Policy::NameOnly && !has_name {
            out.push(ProfileViolation::NameOnlyWithoutName);
        }
        if let Some(name) = &profile.name {
            if name.chars().any(char::is_whitespace) {
                out.push(ProfileViolation::NameNotSingleToken);
            }
        }
        out
    }

    /// Parses pronoun-set file content and registers every line.
    ///
    /// Sets already present are skipped, so loading the builtin file on top
    /// of a builtin registry is a no-op. Returns the ids in file order.
    pub fn load_tsv(&mut self, text: &str) -> Result<Vec<SetId>, RegistryError> {
        let mut ids = Vec::new();
        for (line, category, forms, source) in parse_set_lines(text)? {
            let id = SetId::for_forms(&forms);
            if self.get(&id).is_none() {
                self.register_with_source(forms, category, source)
                    .map_err(|e| RegistryError::Parse {
                        line,
                        message: e.to_string(),
                    })?;
            }
            ids.push(id);
        }
        Ok(ids)
    }

    /// Serializes every set in registration order, with a header comment.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "# category\tnominative\taccusative\tposs_dependent\tposs_independent\treflexive\tsource\n",
        );
        for set in &self.sets {
            out.push_str(&set.to_tsv_line());
            out.push('\n');
        }
        out
    }
}

pub(crate) type SetLine = (usize, PronounCategory, PronounForms, Source);

pub(crate) fn parse_set_lines(text: &str) -> Result<Vec<SetLine>, RegistryError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 7 {
            return Err(RegistryError::Parse {
                line,
                message: format!("expected 7 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse_err = |message: String| RegistryError::Parse { line, message };
        let category = fields[0].parse().map_err(parse_err)?;
        let forms =
            PronounForms::from_array([fields[1], fields[2], fields[3], fields[4], fields[5]])
                .map_err(|e| parse_err(e.to_string()))?;
        let source = fields[6].trim().parse().map_err(parse_err)?;
        out.push((line, category, forms, source));
    }
    Ok(out)
}
