/// Characters kept inside a token when they sit between two alphanumerics.
fn joiner(c: char) -> Option<char> {
    match c {
        '-' | '_' | '\'' => Some(c),
        '\u{2019}' => Some('\''),
        '\u{2010}' | '\u{2011}' => Some('-'),
        _ => None,
    }
}

fn push_lower(buf: &mut String, c: char) {
    if c.is_ascii() {
        buf.push(c.to_ascii_lowercase());
    } else {
        buf.extend(c.to_lowercase());
    }
}

/// Calls `f` with each lowercase token of `text`, reusing one buffer.
///
/// Tokens are maximal runs of alphanumerics, optionally joined by a single
/// hyphen, underscore or apostrophe; all other characters separate tokens.
pub fn for_each_token<F: FnMut(&str)>(text: &str, mut f: F) {
    let mut buf = String::with_capacity(32);
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            push_lower(&mut buf, c);
            continue;
        }
        if let Some(j) = joiner(c) {
            if !buf.is_empty() && chars.peek().is_some_and(|n| n.is_alphanumeric()) {
                buf.push(j);
                continue;
            }
        }
        if !buf.is_empty() {
            f(&buf);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        f(&buf);
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |t| out.push(t.to_owned()));
    out
}

pub fn count_tokens(text: &str) -> usize {
    let mut n = 0;
    for_each_token(text, |_| n += 1);
    n
}
