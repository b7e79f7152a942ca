use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lexicon::{term_sequence, CategoryKey, Lexicon};
use crate::text::{for_each_token, normalize_token_cow};

/// Token id for anything outside the pattern alphabet. It never matches and
/// sends the automaton back to the root, so it also works as a document
/// boundary.
pub const SENTINEL: u32 = u32::MAX;

const ROOT: u32 = 0;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
struct Node {
    /// Sorted by token id. The root uses `root_goto` instead.
    children: Vec<(u32, u32)>,
    fail: u32,
    /// Pattern ending exactly here: (length, column).
    output: Option<(u32, u32)>,
    /// Nearest node on the fail chain with an output.
    dict: u32,
}

#[derive(Debug, Clone, Default)]
pub struct CompileOptions {
    /// Subcategories whose terms are left out (e.g. `covid`).
    pub exclude_subcategories: Vec<String>,
}

/// Aho-Corasick automaton over normalized token ids with leftmost-longest,
/// non-overlapping match selection.
#[derive(Debug, Clone)]
pub struct CompiledMatcher {
    columns: Vec<CategoryKey>,
    alphabet: HashMap<String, u32>,
    root_goto: Vec<u32>,
    nodes: Vec<Node>,
    /// Distinct token sequences, with the terms that produced each.
    patterns: Vec<(Vec<String>, Vec<String>, usize)>,
}

impl CompiledMatcher {
    /// Builds from `(term, column)` pairs. Terms that normalize to the same
    /// sequence are merged when they share a column and rejected otherwise.
    pub fn build(columns: Vec<CategoryKey>, terms: &[(String, usize)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("cannot compile an empty lexicon"));
        }
        let mut by_seq: HashMap<Vec<String>, usize> = HashMap::new();
        let mut patterns: Vec<(Vec<String>, Vec<String>, usize)> = Vec::new();
        for (term, col) in terms {
            if *col >= columns.len() {
                return Err(Error::invalid(format!("column {col} out of range")));
            }
            let seq = term_sequence(term);
            if seq.is_empty() {
                return Err(Error::EmptyPattern(term.clone()));
            }
            match by_seq.get(&seq) {
                Some(&p) if patterns[p].2 == *col => patterns[p].1.push(term.clone()),
                Some(&p) => {
                    return Err(Error::PatternCollision {
                        sequence: seq.join(" "),
                        first: patterns[p].1[0].clone(),
                        second: term.clone(),
                    })
                }
                None => {
                    by_seq.insert(seq.clone(), patterns.len());
                    patterns.push((seq, vec![term.clone()], *col));
                }
            }
        }
        let mut alphabet: HashMap<String, u32> = HashMap::new();
        for (seq, _, _) in &patterns {
            for t in seq {
                let next = alphabet.len() as u32;
                alphabet.entry(t.clone()).or_insert(next);
            }
        }
        let mut m = Self {
            columns,
            root_goto: vec![NONE; alphabet.len()],
            alphabet,
            nodes: vec![Node {
                dict: NONE,
                ..Node::default()
            }],
            patterns,
        };
        m.build_trie();
        m.build_links();
        Ok(m)
    }

    fn child(&self, node: u32, tok: u32) -> u32 {
        if node == ROOT {
            return self.root_goto.get(tok as usize).copied().unwrap_or(NONE);
        }
        let ch = &self.nodes[node as usize].children;
        match ch.binary_search_by_key(&tok, |c| c.0) {
            Ok(i) => ch[i].1,
            Err(_) => NONE,
        }
    }

    fn build_trie(&mut self) {
        for p in 0..self.patterns.len() {
            let ids: Vec<u32> = self.patterns[p].0.iter().map(|t| self.alphabet[t]).collect();
            let mut node = ROOT;
            for &tok in &ids {
                let next = self.child(node, tok);
                node = if next != NONE {
                    next
                } else {
                    let id = self.nodes.len() as u32;
                    self.nodes.push(Node {
                        dict: NONE,
                        ..Node::default()
                    });
                    if node == ROOT {
                        self.root_goto[tok as usize] = id;
                    } else {
                        let ch = &mut self.nodes[node as usize].children;
                        let at = ch.partition_point(|c| c.0 < tok);
                        ch.insert(at, (tok, id));
                    }
                    id
                };
            }
            self.nodes[node as usize].output = Some((ids.len() as u32, self.patterns[p].2 as u32));
        }
    }

    fn build_links(&mut self) {
        let mut queue = std::collections::VecDeque::new();
        for &c in &self.root_goto {
            if c != NONE {
                self.nodes[c as usize].fail = ROOT;
                queue.push_back(c);
            }
        }
        while let Some(u) = queue.pop_front() {
            let children = self.nodes[u as usize].children.clone();
            for (tok, v) in children {
                let mut f = self.nodes[u as usize].fail;
                let target = loop {
                    let c = self.child(f, tok);
                    if c != NONE {
                        break c;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = self.nodes[f as usize].fail;
                };
                self.nodes[v as usize].fail = target;
                let t = &self.nodes[target as usize];
                self.nodes[v as usize].dict = if t.output.is_some() { target } else { t.dict };
                queue.push_back(v);
            }
        }
    }

    /// Compiles a lexicon into one column per (category, subcategory).
    pub fn compile(lexicon: &Lexicon, options: &CompileOptions) -> Result<Self> {
        let excluded = |e: &crate::lexicon::LexiconEntry| {
            e.subcategory
                .as_ref()
                .is_some_and(|s| options.exclude_subcategories.iter().any(|x| x == s))
        };
        let columns: Vec<CategoryKey> = lexicon
            .columns()
            .into_iter()
            .filter(|k| {
                !k.subcategory
                    .as_ref()
                    .is_some_and(|s| options.exclude_subcategories.contains(s))
            })
            .collect();
        let terms: Vec<(String, usize)> = lexicon
            .entries()
            .iter()
            .filter(|e| !excluded(e))
            .map(|e| {
                let col = columns
                    .iter()
                    .position(|k| k.category == e.category && k.subcategory == e.subcategory)
                    .expect("every kept entry has a column");
                (e.term.clone(), col)
            })
            .collect();
        Self::build(columns, &terms)
    }

    pub fn columns(&self) -> &[CategoryKey] {
        &self.columns
    }

    pub fn column_labels(&self) -> Vec<String> {
        self.columns.iter().map(CategoryKey::label).collect()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// Maps a normalized token to its id, or [`SENTINEL`].
    pub fn token_id(&self, token: &str) -> u32 {
        self.alphabet.get(token).copied().unwrap_or(SENTINEL)
    }

    /// Tokenizes and normalizes `text` into ids.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::new();
        for_each_token(text, |t| ids.push(self.token_id(&normalize_token_cow(t))));
        ids
    }

    /// Selected matches as (start, length, column), leftmost-longest and
    /// non-overlapping.
    pub fn find_matches(&self, ids: &[u32]) -> Vec<(usize, usize, usize)> {
        // longest pattern starting at each position, found via the
        // automaton's end positions
        let mut best: Vec<(u32, u32)> = vec![(0, 0); ids.len()];
        let mut state = ROOT;
        for (i, &tok) in ids.iter().enumerate() {
            state = self.step(state, tok);
            let mut n = state;
            if self.nodes[n as usize].output.is_none() {
                n = self.nodes[n as usize].dict;
            }
            while n != NONE && n != ROOT {
                let node = &self.nodes[n as usize];
                if let Some((len, col)) = node.output {
                    let start = i + 1 - len as usize;
                    if len > best[start].0 {
                        best[start] = (len, col);
                    }
                }
                n = node.dict;
            }
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < ids.len() {
            let (len, col) = best[i];
            if len > 0 {
                out.push((i, len as usize, col as usize));
                i += len as usize;
            } else {
                i += 1;
            }
        }
        out
    }

    #[inline]
    fn step(&self, mut state: u32, tok: u32) -> u32 {
        if tok == SENTINEL {
            return ROOT;
        }
        loop {
            let c = self.child(state, tok);
            if c != NONE {
                return c;
            }
            if state == ROOT {
                return ROOT;
            }
            state = self.nodes[state as usize].fail;
        }
    }

    /// Hit counts per column for an id stream.
    pub fn count_ids(&self, ids: &[u32]) -> Vec<u64> {
        let mut counts = vec![0u64; self.columns.len()];
        for (_, _, col) in self.find_matches(ids) {
            counts[col] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(c: &str) -> CategoryKey {
        CategoryKey {
            category: c.into(),
            subcategory: None,
        }
    }

    fn matcher(terms: &[(&str, usize)], ncols: usize) -> CompiledMatcher {
        let cols = (0..ncols).map(|i| key(&format!("C{i}"))).collect();
        let terms: Vec<(String, usize)> = terms.iter().map(|(t, c)| (t.to_string(), *c)).collect();
        CompiledMatcher::build(cols, &terms).unwrap()
    }

    #[test]
    fn exact_token_match() {
        let m = matcher(&[("diversity", 0)], 1);
        assert_eq!(m.count_ids(&m.encode("diversity")), [1]);
        assert_eq!(m.count_ids(&m.encode("diversify")), [0]);
    }

    #[test]
    fn two_token_pattern_needs_adjacency() {
        let m = matcher(&[("human_capital", 0)], 1);
        assert_eq!(m.count_ids(&m.encode("human capital")), [1]);
        assert_eq!(m.count_ids(&m.encode("human and capital")), [0]);
        assert_eq!(m.count_ids(&m.encode("capital human")), [0]);
    }

    #[test]
    fn longest_wins_at_same_start() {
        let m = matcher(&[("human_capital", 0), ("human_capital_management", 1)], 2);
        assert_eq!(m.count_ids(&m.encode("human capital management")), [0, 1]);
        assert_eq!(m.count_ids(&m.encode("human capital manager")), [1, 0]);
    }

    #[test]
    fn leftmost_beats_longer_later() {
        let m = matcher(&[("a_b", 0), ("b_c_d", 1)], 2);
        assert_eq!(m.find_matches(&m.encode("a b c d")), [(0, 2, 0)]);
    }

    #[test]
    fn collisions() {
        let cols = vec![key("A"), key("B")];
        let same = CompiledMatcher::build(cols.clone(), &[("veteran".into(), 0), ("veterans".into(), 0)]).unwrap();
        assert_eq!(same.pattern_count(), 1);
        let err = CompiledMatcher::build(cols.clone(), &[("veteran".into(), 0), ("veterans".into(), 1)]).unwrap_err();
        assert!(matches!(err, Error::PatternCollision { .. }));
        assert!(matches!(
            CompiledMatcher::build(cols, &[("+".into(), 0)]),
            Err(Error::EmptyPattern(_))
        ));
    }

    #[test]
    fn published_lexicon_compiles() {
        let lex = Lexicon::published();
        let m = CompiledMatcher::compile(&lex, &CompileOptions::default()).unwrap();
        assert_eq!(m.columns().len(), 6);
        let no_covid = CompiledMatcher::compile(
            &lex,
            &CompileOptions {
                exclude_subcategories: vec!["covid".into()],
            },
        )
        .unwrap();
        assert_eq!(no_covid.columns().len(), 5);
        assert!(no_covid.column_labels().iter().all(|l| !l.contains("covid")));
    }

    /// O(N·P) reference: at each position try every pattern, take the
    /// longest, skip past it.
    fn brute_force(patterns: &[(Vec<u32>, usize)], doc: &[u32], ncols: usize) -> Vec<u64> {
        let mut counts = vec![0; ncols];
        let mut i = 0;
        while i < doc.len() {
            let mut best: Option<(usize, usize)> = None;
            for (p, col) in patterns {
                if doc[i..].starts_with(p) && best.is_none_or(|b| p.len() > b.0) {
                    best = Some((p.len(), *col));
                }
            }
            match best {
                Some((len, col)) => {
                    counts[col] += 1;
                    i += len;
                }
                None => i += 1,
            }
        }
        counts
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_brute_force(
            pats in prop::collection::vec((prop::collection::vec(0u8..5, 1..5), 0usize..3), 1..12),
            doc in prop::collection::vec(0u8..6, 0..200),
        ) {
            let word = |t: u8| format!("w{t}");
            let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
            let mut terms = Vec::new();
            for (p, c) in &pats {
                let c = *seen.entry(p.clone()).or_insert(*c);
                terms.push((p.iter().map(|&t| word(t)).collect::<Vec<_>>().join("_"), c));
            }
            let cols: Vec<CategoryKey> = (0..3).map(|i| key(&format!("C{i}"))).collect();
            let m = CompiledMatcher::build(cols, &terms).unwrap();
            let text: String = doc.iter().map(|&t| word(t)).collect::<Vec<_>>().join(" ");
            let ids = m.encode(&text);
            let pattern_ids: Vec<(Vec<u32>, usize)> = terms
                .iter()
                .map(|(t, c)| (t.split('_').map(|w| m.token_id(w)).collect(), *c))
                .collect();
            prop_assert_eq!(m.count_ids(&ids), brute_force(&pattern_ids, &ids, 3));
            let covered: usize = m.find_matches(&ids).iter().map(|x| x.1).sum();
            prop_assert!(covered <= ids.len());
        }

        #[test]
        fn additive_across_sentinel(
            a in prop::collection::vec(0u8..4, 0..60),
            b in prop::collection::vec(0u8..4, 0..60),
        ) {
            let m = matcher(&[("w0_w1", 0), ("w1", 1), ("w2_w3_w0", 0), ("w3", 2)], 3);
            let enc = |v: &[u8]| v.iter().map(|&t| m.token_id(&format!("w{t}"))).collect::<Vec<u32>>();
            let (ea, eb) = (enc(&a), enc(&b));
            let mut joined = ea.clone();
            joined.push(SENTINEL);
            joined.extend(&eb);
            let sum: Vec<u64> = m.count_ids(&ea).iter().zip(m.count_ids(&eb)).map(|(x, y)| x + y).collect();
            prop_assert_eq!(m.count_ids(&joined), sum);
        }
    }
}
