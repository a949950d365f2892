//! Case folding for text comparison.

use std::borrow::Cow;

/// Per-character simple case folding.
///
/// Characters whose lowercase form is a single code point map to it; the rest
/// (e.g. `İ`) are kept unchanged so folding never changes string length in
/// code points. Final sigma folds to `σ`.
pub fn fold(text: &str) -> Cow<'_, str> {
    if text.is_ascii() {
        if text.bytes().any(|b| b.is_ascii_uppercase()) {
            return Cow::Owned(text.to_ascii_lowercase());
        }
        return Cow::Borrowed(text);
    }
    Cow::Owned(text.chars().map(fold_char).collect())
}

fn fold_char(c: char) -> char {
    if c == 'ς' {
        return 'σ';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}
