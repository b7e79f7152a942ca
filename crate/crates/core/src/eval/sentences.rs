/// Abbreviations that end in a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "co.", "corp.", "dr.", "e.g.", "etc.", "i.e.", "inc.", "jr.", "ltd.", "mr.", "mrs.", "ms.", "no.",
    "sr.", "st.", "u.k.", "u.s.", "u.s.a.", "vs.",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(CLOSERS);
    if !core.ends_with(['.', '!', '?']) {
        return false;
    }
    if core.ends_with('.') {
        let lower = core.trim_start_matches(['(', '"', '\'', '\u{201c}']).to_lowercase();
        if ABBREVIATIONS.contains(&lower.as_str()) {
            return false;
        }
    }
    true
}

/// Splits on words ending in `.`, `!` or `?` (closing quotes and brackets
/// allowed after), except known abbreviations. Whitespace inside a sentence
/// collapses to single spaces.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
        if ends_sentence(word) {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}
