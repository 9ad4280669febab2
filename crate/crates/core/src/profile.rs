//! Individual pronoun profiles.
//!
//! A profile is a snapshot: an optional name, an ordered list of n >= 0
//! registered sets, and a usage policy. Replacing a profile is always
//! allowed; nothing here infers pronouns from a name or from context.
//!
//! Profile files use the pronoun-set file format preceded by one header
//! line. Fields are tab-separated:
//!
//! ```text
//! #!profile  policy=equal_alternating  name=Alex
//! gender_neutral  they  them  their  theirs  themself  user
//! neopronoun  xe  xem  xyr  xyrs  xemself  user
//! ```

use std::fmt;
use std::str::FromStr;

use crate::registry::{parse_set_lines, PronounRegistry, RegistryError, SetId};

pub const PROFILE_HEADER: &str = "#!profile";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Always the first set.
    Single,
    /// Round-robin over the sets, one step per pronoun slot.
    EqualAlternating,
    /// The referring speaker's pronouns; supplied at relexicalization time.
    Mirrored,
    /// The individual's name in place of pronouns.
    NameOnly,
    /// No pronouns at all.
    Avoid,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Single => "single",
            Policy::EqualAlternating => "equal_alternating",
            Policy::Mirrored => "mirrored",
            Policy::NameOnly => "name_only",
            Policy::Avoid => "avoid",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "single" => Policy::Single,
            "equal_alternating" => Policy::EqualAlternating,
            "mirrored" => Policy::Mirrored,
            "name_only" => Policy::NameOnly,
            "avoid" => Policy::Avoid,
            other => return Err(format!("unknown profile policy {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualProfile {
    pub name: Option<String>,
    pub sets: Vec<SetId>,
    pub policy: Policy,
}

impl IndividualProfile {
    pub fn new(name: Option<String>, sets: Vec<SetId>, policy: Policy) -> Self {
        IndividualProfile { name, sets, policy }
    }

    pub fn single(set: SetId) -> Self {
        Self::new(None, vec![set], Policy::Single)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileViolation {
    UnknownSet(SetId),
    RepeatedSet(SetId),
    NameOnlyWithoutName,
    NameNotSingleToken,
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileViolation::UnknownSet(id) => write!(f, "unknown pronoun set {id}"),
            ProfileViolation::RepeatedSet(id) => write!(f, "pronoun set {id} listed twice"),
            ProfileViolation::NameOnlyWithoutName => {
                f.write_str("policy name_only requires a name")
            }
            ProfileViolation::NameNotSingleToken => f.write_str("name must be a single token"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("profile file must start with a `{PROFILE_HEADER}` header line")]
    MissingHeader,
    #[error("bad profile header: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Sets(#[from] RegistryError),
}

/// Parses a profile file, registering any sets the registry lacks.
pub fn parse_profile(
    text: &str,
    registry: &mut PronounRegistry,
) -> Result<IndividualProfile, ProfileError> {
    let header = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .find(|l| !l.trim().is_empty())
        .ok_or(ProfileError::MissingHeader)?;
    let mut fields = header.split('\t');
    if fields.next() != Some(PROFILE_HEADER) {
        return Err(ProfileError::MissingHeader);
    }
    let mut policy = None;
    let mut name = None;
    for field in fields.filter(|f| !f.is_empty()) {
        match field.split_once('=') {
            Some(("policy", v)) => policy = Some(v.parse().map_err(ProfileError::BadHeader)?),
            Some(("name", v)) => name = Some(crate::normalize::nfc(v)),
            _ => {
                return Err(ProfileError::BadHeader(format!(
                    "unexpected field {field:?}"
                )))
            }
        }
    }
    let policy = policy.ok_or_else(|| ProfileError::BadHeader("missing policy=".into()))?;

    let mut sets = Vec::new();
    for (_, category, forms, source) in parse_set_lines(text)? {
        let id = match registry.find(&forms) {
            Some(existing) => existing.id.clone(),
            None => registry
                .register_with_source(forms, category, source)?
                .id
                .clone(),
        };
        sets.push(id);
    }
    Ok(IndividualProfile { name, sets, policy })
}

/// Writes a profile file. Unknown set ids are skipped.
pub fn write_profile(profile: &IndividualProfile, registry: &PronounRegistry) -> String {
    let mut out = format!("{PROFILE_HEADER}\tpolicy={}", profile.policy);
    if let Some(name) = &profile.name {
        out.push_str("\tname=");
        out.push_str(name);
    }
    out.push('\n');
    for set in profile.sets.iter().filter_map(|id| registry.get(id)) {
        out.push_str(&set.to_tsv_line());
        out.push('\n');
    }
    out
}
