//! Tokenization, character edit distance, word alignment and correction
//! typing.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Lowercased word tokens. Tokens never contain whitespace and are never
/// empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Builds a sequence from already-clean tokens, dropping any that are
    /// empty or contain whitespace.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Splits utterance text into word tokens.
///
/// The default splits on whitespace; a morphological analyzer can be
/// plugged in for languages written without spaces.
pub trait Tokenizer: Send + Sync + fmt::Debug {
    fn tokenize(&self, text: &str) -> TokenSequence;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_ascii() && !c.is_alphanumeric())
}

impl Tokenizer for WhitespaceTokenizer {
    fn tokenize(&self, text: &str) -> TokenSequence {
        TokenSequence(
            text.split_whitespace()
                .map(|w| w.trim_matches(is_punct).to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }
}

/// Tokenizes with [`WhitespaceTokenizer`].
pub fn tokenize(text: &str) -> TokenSequence {
    WhitespaceTokenizer.tokenize(text)
}

/// Unit-cost character Levenshtein distance.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance over characters with all whitespace removed,
/// divided by the longer stripped length. Two empty strings are at
/// distance 0.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().filter(|c| !c.is_whitespace()).collect();
    let b: Vec<char> = b.chars().filter(|c| !c.is_whitespace()).collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / longest as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    Match,
    Insert,
    Delete,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub kind: RegionKind,
    pub u1_span: Range<usize>,
    pub u2_span: Range<usize>,
}

/// Word-level alignment of `U1` against `U2` as maximal regions that tile
/// both sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EditScript {
    pub regions: Vec<Region>,
}

impl EditScript {
    pub fn has_match(&self) -> bool {
        self.regions.iter().any(|r| r.kind == RegionKind::Match)
    }

    /// Checks the tiling and region-shape invariants against the aligned
    /// sequences.
    pub fn is_valid_for(&self, u1: &TokenSequence, u2: &TokenSequence) -> bool {
        let (mut i, mut j) = (0, 0);
        let mut last_kind = None;
        for r in &self.regions {
            if r.u1_span.start != i || r.u2_span.start != j || r.u1_span.end < i || r.u2_span.end < j {
                return false;
            }
            let (n1, n2) = (r.u1_span.len(), r.u2_span.len());
            let shape_ok = match r.kind {
                RegionKind::Match => n1 > 0 && n1 == n2 && u1.0[r.u1_span.clone()] == u2.0[r.u2_span.clone()],
                RegionKind::Insert => n1 == 0 && n2 > 0,
                RegionKind::Delete => n1 > 0 && n2 == 0,
                RegionKind::Replace => n1 > 0 && n2 > 0,
            };
            if !shape_ok || last_kind == Some(r.kind) {
                return false;
            }
            last_kind = Some(r.kind);
            i = r.u1_span.end;
            j = r.u2_span.end;
        }
        i == u1.len() && j == u2.len()
    }
}

/// Aligns two token sequences through a longest common subsequence.
///
/// Among all LCS alignments the one whose matched pairs are
/// lexicographically smallest by `(u1 index, u2 index)` is chosen.
pub fn word_diff(u1: &TokenSequence, u2: &TokenSequence) -> EditScript {
    let (a, b) = (&u1.0, &u2.0);
    let (n, m) = (a.len(), b.len());
    // suffix[i][j] = LCS length of a[i..] and b[j..]
    let mut suffix = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i][j] = if a[i] == b[j] {
                suffix[i + 1][j + 1] + 1
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }

    let mut pairs = Vec::with_capacity(suffix[0][0] as usize);
    let (mut i, mut j) = (0, 0);
    while suffix[i][j] > 0 {
        let need = suffix[i][j];
        let next = (i..n)
            .flat_map(|p| (j..m).map(move |q| (p, q)))
            .find(|&(p, q)| a[p] == b[q] && suffix[p + 1][q + 1] + 1 == need)
            .expect("an optimal next match exists while the suffix LCS is positive");
        pairs.push(next);
        i = next.0 + 1;
        j = next.1 + 1;
    }

    let mut regions: Vec<Region> = Vec::new();
    let push_gap = |regions: &mut Vec<Region>, i0: usize, i1: usize, j0: usize, j1: usize| {
        let kind = match (i1 > i0, j1 > j0) {
            (false, false) => return,
            (false, true) => RegionKind::Insert,
            (true, false) => RegionKind::Delete,
            (true, true) => RegionKind::Replace,
        };
        regions.push(Region {
            kind,
            u1_span: i0..i1,
            u2_span: j0..j1,
        });
    };
    let (mut i, mut j) = (0, 0);
    for (p, q) in pairs {
        push_gap(&mut regions, i, p, j, q);
        match regions.last_mut() {
            Some(last) if last.kind == RegionKind::Match && last.u1_span.end == p && last.u2_span.end == q => {
                last.u1_span.end = p + 1;
                last.u2_span.end = q + 1;
            }
            _ => regions.push(Region {
                kind: RegionKind::Match,
                u1_span: p..p + 1,
                u2_span: q..q + 1,
            }),
        }
        i = p + 1;
        j = q + 1;
    }
    push_gap(&mut regions, i, n, j, m);
    EditScript { regions }
}

/// How `U2` was derived from `U1` at word level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CorrectionType {
    #[serde(rename = "ADD")]
    Add,
    #[serde(rename = "OMIT")]
    Omit,
    #[serde(rename = "PAR")]
    Par,
    #[serde(rename = "OTHER")]
    Other,
}

impl CorrectionType {
    pub const ALL: [CorrectionType; 4] = [Self::Add, Self::Omit, Self::Par, Self::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Add => "ADD",
            Self::Omit => "OMIT",
            Self::Par => "PAR",
            Self::Other => "OTHER",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CorrectionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// ADD: only insertions; OMIT: only deletions; PAR: exactly one replaced
/// span; OTHER: anything else, including pairs with no word in common.
pub fn classify_correction(script: &EditScript) -> CorrectionType {
    if !script.has_match() {
        return CorrectionType::Other;
    }
    let edits: Vec<RegionKind> = script
        .regions
        .iter()
        .map(|r| r.kind)
        .filter(|&k| k != RegionKind::Match)
        .collect();
    match edits.as_slice() {
        [] => CorrectionType::Other,
        [RegionKind::Replace] => CorrectionType::Par,
        e if e.iter().all(|&k| k == RegionKind::Insert) => CorrectionType::Add,
        e if e.iter().all(|&k| k == RegionKind::Delete) => CorrectionType::Omit,
        _ => CorrectionType::Other,
    }
}

/// Convenience: tokenize, align and classify two utterance texts.
pub fn correction_type_of(u1: &str, u2: &str) -> CorrectionType {
    classify_correction(&word_diff(&tokenize(u1), &tokenize(u2)))
}

/// Number of distinct token types shared by both sequences.
pub fn common_word_count(u1: &TokenSequence, u2: &TokenSequence) -> usize {
    let left: HashSet<&str> = u1.0.iter().map(String::as_str).collect();
    let right: HashSet<&str> = u2.0.iter().map(String::as_str).collect();
    left.intersection(&right).count()
}
