//! Lemma-lite: possessive and plural suffix stripping with an exception list.

use std::borrow::Cow;

/// Singular words ending in `s` that the plural rules would damage.
const EXCEPTIONS: &[&str] = &[
    "alias", "always", "analytics", "atlas", "bias", "canvas", "chaos", "diabetes", "does",
    "economics", "ethics", "gas", "has", "headquarters", "his", "lens", "logistics",
    "mathematics", "means", "news", "overseas", "perhaps", "physics", "politics", "series",
    "species", "towards", "was", "whereas", "yes",
];

const MIN_STEM: usize = 3;

fn is_exception(t: &str) -> bool {
    EXCEPTIONS.binary_search(&t).is_ok()
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

fn strip_possessive(mut t: &str) -> &str {
    loop {
        if let Some(s) = t.strip_suffix("'s") {
            t = s;
        } else if let Some(s) = t.strip_suffix('\'') {
            t = s;
        } else {
            return t;
        }
    }
}

fn strip_plural(t: &str) -> Cow<'_, str> {
    if let Some(stem) = t.strip_suffix("ies") {
        if char_len(stem) >= MIN_STEM - 1 && char_len(t) > 4 {
            return Cow::Owned(format!("{stem}y"));
        }
    }
    for suffix in ["sses", "xes", "ches", "shes"] {
        if t.ends_with(suffix) {
            let stem = &t[..t.len() - 2];
            if char_len(stem) >= MIN_STEM {
                return Cow::Borrowed(stem);
            }
        }
    }
    if t.ends_with('s') && !t.ends_with("ss") && !t.ends_with("us") && !t.ends_with("is") {
        let stem = &t[..t.len() - 1];
        if char_len(stem) >= MIN_STEM {
            return Cow::Borrowed(stem);
        }
    }
    Cow::Borrowed(t)
}

/// Normalizes one token; borrows when nothing changes.
pub fn normalize_token_cow(token: &str) -> Cow<'_, str> {
    let t = strip_possessive(token);
    if t.is_empty() {
        return Cow::Borrowed(token);
    }
    if is_exception(t) {
        return Cow::Borrowed(t);
    }
    strip_plural(t)
}

/// `employees` → `employee`, `salaries` → `salary`, `business` stays.
pub fn normalize_token(token: &str) -> String {
    normalize_token_cow(token).into_owned()
}
