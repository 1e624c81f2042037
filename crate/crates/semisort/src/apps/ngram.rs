//! N-gram grouping over cleaned text.
//!
//! Cleaning keeps ASCII letters (lowercased) and turns every other byte,
//! including all non-ASCII bytes, into a word separator. An n-gram record is
//! keyed by its first `n - 1` words and carries its last word; keys are views
//! into the word table, hashed by combining per-word hashes and compared
//! word by word on the raw bytes.

use semisort_core::hash::{combine, hash_bytes};
use semisort_core::KeyAdapter;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Word {
    pub start: u32,
    pub len: u32,
    pub hash: u64,
}

/// Word indices of one n-gram: the key spans words `first .. first + n - 1`,
/// the value is word `last`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGramRecord {
    pub first: u32,
    pub last: u32,
}

#[derive(Clone, Debug, Default)]
pub struct NGramCorpus {
    pub gram: usize,
    /// Cleaned text; words are ranges into it.
    pub arena: Vec<u8>,
    pub words: Vec<Word>,
    pub records: Vec<NGramRecord>,
}

/// Lowercase letters, everything else becomes a space.
pub fn clean(text: &[u8]) -> Vec<u8> {
    text.iter().map(|&b| if b.is_ascii_alphabetic() { b.to_ascii_lowercase() } else { b' ' }).collect()
}

/// Split cleaned text into words and form every window of `gram` words.
///
/// Panics if `gram < 2`.
pub fn build_ngrams(text: &[u8], gram: usize) -> NGramCorpus {
    assert!(gram >= 2, "n-grams need n >= 2");
    let arena = clean(text);
    let mut words = Vec::new();
    let mut i = 0;
    while i < arena.len() {
        if arena[i] == b' ' {
            i += 1;
            continue;
        }
        let start = i;
        while i < arena.len() && arena[i] != b' ' {
            i += 1;
        }
        words.push(Word { start: start as u32, len: (i - start) as u32, hash: hash_bytes(&arena[start..i]) });
    }
    let records = if words.len() < gram {
        Vec::new()
    } else {
        (0..=words.len() - gram).map(|f| NGramRecord { first: f as u32, last: (f + gram - 1) as u32 }).collect()
    };
    NGramCorpus { gram, arena, words, records }
}

impl NGramCorpus {
    pub fn word(&self, i: u32) -> &[u8] {
        let w = self.words[i as usize];
        &self.arena[w.start as usize..(w.start + w.len) as usize]
    }

    /// Key words of a record joined by spaces.
    pub fn key_text(&self, r: &NGramRecord) -> String {
        (r.first..r.first + self.gram as u32 - 1)
            .map(|i| String::from_utf8_lossy(self.word(i)).into_owned())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn value_text(&self, r: &NGramRecord) -> String {
        String::from_utf8_lossy(self.word(r.last)).into_owned()
    }

    pub fn adapter(&self) -> NGramKey<'_> {
        NGramKey { corpus: self }
    }
}

/// Key adapter over a corpus. The key is the index of the first key word.
#[derive(Clone, Copy)]
pub struct NGramKey<'a> {
    corpus: &'a NGramCorpus,
}

impl KeyAdapter<NGramRecord> for NGramKey<'_> {
    type Key = u32;

    #[inline]
    fn key(&self, r: &NGramRecord) -> u32 {
        r.first
    }

    #[inline]
    fn hash(&self, &first: &u32) -> u64 {
        let words = &self.corpus.words[first as usize..first as usize + self.corpus.gram - 1];
        words.iter().fold(0, |h, w| combine(h, w.hash))
    }

    fn eq(&self, &a: &u32, &b: &u32) -> bool {
        a == b || (0..self.corpus.gram as u32 - 1).all(|i| self.corpus.word(a + i) == self.corpus.word(b + i))
    }

    fn has_order(&self) -> bool {
        true
    }

    fn less(&self, &a: &u32, &b: &u32) -> bool {
        for i in 0..self.corpus.gram as u32 - 1 {
            match self.corpus.word(a + i).cmp(self.corpus.word(b + i)) {
                std::cmp::Ordering::Equal => continue,
                o => return o.is_lt(),
            }
        }
        false
    }
}
