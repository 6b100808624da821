use std::cmp::Ordering;
use std::fmt;

use crate::error::{Result, SigError};

/// A word over the alphabet `{0, .., d}`.
///
/// Ordering is by length first, then lexicographic, which matches the layout of
/// dense tensor levels.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: u8) -> Self {
        Word(vec![i])
    }

    /// Build a word, checking every letter against the alphabet size.
    pub fn new(letters: Vec<u8>, d: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l as usize > d) {
            return Err(SigError::InvalidLetter { letter: bad, d });
        }
        Ok(Word(letters))
    }

    /// Build a word without checks. Letters must be in range for whatever
    /// alphabet it will be used with.
    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }

    pub fn count(&self, letter: u8) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The word without its last letter.
    pub fn prefix(&self) -> Word {
        Word(self.0[..self.0.len().saturating_sub(1)].to_vec())
    }

    /// Position inside its dense tensor level (base `d + 1` digits).
    pub fn level_index(&self, d: usize) -> usize {
        let base = d + 1;
        self.0.iter().fold(0usize, |acc, &l| acc * base + l as usize)
    }

    /// Inverse of [`Word::level_index`].
    pub fn from_level_index(mut idx: usize, len: usize, d: usize) -> Word {
        let base = d + 1;
        let mut v = vec![0u8; len];
        for slot in v.iter_mut().rev() {
            *slot = (idx % base) as u8;
            idx /= base;
        }
        Word(v)
    }

    /// Parse the compact digit form, `e` (or an empty string) for the empty word.
    pub fn parse(s: &str) -> Option<Word> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Some(Word::empty());
        }
        s.chars()
            .map(|c| c.to_digit(10).map(|x| x as u8))
            .collect::<Option<Vec<u8>>>()
            .map(Word)
    }
}

impl From<&[u8]> for Word {
    fn from(l: &[u8]) -> Self {
        Word(l.to_vec())
    }
}

impl<const K: usize> From<[u8; K]> for Word {
    fn from(l: [u8; K]) -> Self {
        Word(l.to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.0 {
            if l < 10 {
                write!(f, "{l}")?;
            } else {
                write!(f, "[{l}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Number of words of length at most `n` over `d + 1` letters.
pub fn words_up_to(d: usize, n: usize) -> usize {
    (0..=n).map(|k| (d + 1).pow(k as u32)).sum()
}

/// All words of length at most `n`, in level order.
pub fn all_words(d: usize, n: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(words_up_to(d, n));
    for len in 0..=n {
        for idx in 0..(d + 1).pow(len as u32) {
            out.push(Word::from_level_index(idx, len, d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_index_roundtrip() {
        for w in all_words(2, 4) {
            let back = Word::from_level_index(w.level_index(2), w.len(), 2);
            assert_eq!(back, w);
        }
    }

    #[test]
    fn ordering_is_length_first() {
        let a = Word::from([2u8]);
        let b = Word::from([0u8, 0]);
        assert!(a < b);
        assert!(Word::from([0u8, 1]) < Word::from([1u8, 0]));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Word::parse("e"), Some(Word::empty()));
        assert_eq!(Word::parse("0110").unwrap().letters(), &[0, 1, 1, 0]);
        assert_eq!(Word::from([1u8, 0]).to_string(), "10");
        assert!(Word::parse("0x").is_none());
    }

    #[test]
    fn rejects_out_of_range_letter() {
        assert!(matches!(Word::new(vec![0, 3], 2), Err(SigError::InvalidLetter { letter: 3, d: 2 })));
    }
}
