//! Unicode normalization shared by the lexicon, the delexicalizer and the miner.

use unicode_normalization::{is_nfc, UnicodeNormalization};
use unicode_properties::{GeneralCategoryGroup, UnicodeEmoji, UnicodeGeneralCategory};

/// NFC-normalizes `s`, borrowing-free fast path for already-normalized input.
pub fn nfc(s: &str) -> String {
    if is_nfc(s) {
        s.to_owned()
    } else {
        s.nfc().collect()
    }
}

/// True when every code point of `s` is alphabetic (and `s` is non-empty).
pub fn is_alphabetic_form(s: &str) -> bool {
    !s.is_empty() && s.chars().all(char::is_alphabetic)
}

/// Key used for lexicon lookup.
///
/// Purely alphabetic forms are case-folded; anything containing digits,
/// emoji or other symbols is matched exactly (after NFC).
pub fn lexicon_key(s: &str) -> String {
    let n = nfc(s);
    if is_alphabetic_form(&n) {
        n.to_lowercase()
    } else {
        n
    }
}

/// Punctuation, or a symbol that is not an emoji.
pub(crate) fn is_edge_noise(c: char) -> bool {
    match c.general_category_group() {
        GeneralCategoryGroup::Punctuation => true,
        GeneralCategoryGroup::Symbol => !c.is_emoji_char(),
        _ => false,
    }
}

pub(crate) fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Splits `token` into (leading punctuation, core, trailing punctuation).
///
/// Only Unicode punctuation is peeled off; symbols (including emoji) stay in
/// the core so that emojiself forms survive.
pub(crate) fn split_punct(token: &str) -> (&str, &str, &str) {
    let start = token
        .char_indices()
        .find(|&(_, c)| !is_punctuation(c))
        .map_or(token.len(), |(i, _)| i);
    let rest = &token[start..];
    let end = rest
        .char_indices()
        .rev()
        .find(|&(_, c)| !is_punctuation(c))
        .map_or(0, |(i, c)| i + c.len_utf8());
    (&token[..start], &rest[..end], &rest[end..])
}
