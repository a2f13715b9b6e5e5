//! Words over the alphabet `{1, …, d}` and their letter-count indices.
//!
//! Words label the orthonormal basis of the full Fock space over d letters.
//! Every graded basis in this crate is ordered the same way: by length
//! first, then lexicographically by letters, with the empty word at
//! position 0. [`enumerate_words`] and [`word_index`] realize that order.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A word over the alphabet `{1, …, d}`; the empty word is the monoid unit.
///
/// Letters are stored 1-based. The `Ord` instance is graded-lexicographic,
/// which makes ordered maps keyed by `Word` iterate in basis order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<u8>,
}

impl Word {
    /// The empty word.
    pub fn empty() -> Self {
        Word {
            letters: Vec::new(),
        }
    }

    /// Builds a word from 1-based letters.
    ///
    /// Panics on a zero letter. The upper range check against an ambient
    /// dimension happens where a word meets a series or an operator.
    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        let letters = letters.into();
        assert!(letters.iter().all(|&l| l >= 1), "letters are 1-based");
        Word { letters }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest letter appearing in the word, or 0 for the empty word.
    pub fn max_letter(&self) -> u8 {
        self.letters.iter().copied().max().unwrap_or(0)
    }

    /// Letter reversal: the transpose of `i1 i2 … ik` is `ik … i2 i1`.
    pub fn transpose(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// The prefix consisting of the first `k` letters.
    pub fn prefix(&self, k: usize) -> Word {
        Word {
            letters: self.letters[..k].to_vec(),
        }
    }

    /// The suffix starting at position `k`.
    pub fn suffix_from(&self, k: usize) -> Word {
        Word {
            letters: self.letters[k..].to_vec(),
        }
    }

    /// If `self = p·rest`, returns `rest`.
    pub fn strip_prefix(&self, p: &Word) -> Option<Word> {
        self.letters
            .strip_prefix(p.letters.as_slice())
            .map(|rest| Word {
                letters: rest.to_vec(),
            })
    }

    /// Occurrences of each letter, as a d-dimensional multi-index.
    /// Panics if the word uses a letter above `d`.
    pub fn letter_count(&self, d: usize) -> MultiIndex {
        let mut counts = vec![0u32; d];
        for &l in &self.letters {
            counts[(l - 1) as usize] += 1;
        }
        MultiIndex { counts }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 && self.max_letter() > 9 {
                write!(f, ".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

// Words travel over the wire as plain JSON integer arrays.
impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.letters.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let letters = Vec::<u8>::deserialize(deserializer)?;
        if let Some(&l) = letters.iter().find(|&&l| l == 0) {
            return Err(D::Error::custom(format!("letter {l} is not 1-based")));
        }
        Ok(Word { letters })
    }
}

/// Number of words of length at most `max_degree` over `d` letters:
/// `(d^(N+1) - 1)/(d - 1)` for `d >= 2`, and `N + 1` for `d = 1`.
///
/// Panics on `d = 0` or on `usize` overflow.
pub fn word_count(d: usize, max_degree: usize) -> usize {
    assert!(d >= 1, "the alphabet must have at least one letter");
    let mut total: usize = 0;
    let mut layer: usize = 1;
    for k in 0..=max_degree {
        total = total
            .checked_add(layer)
            .expect("word count overflows usize");
        if k < max_degree {
            layer = layer.checked_mul(d).expect("word count overflows usize");
        }
    }
    total
}

/// All words of length at most `max_degree`, in graded-lexicographic order.
pub fn enumerate_words(d: usize, max_degree: usize) -> Vec<Word> {
    assert!(d >= 1, "the alphabet must have at least one letter");
    let mut out = Vec::with_capacity(word_count(d, max_degree));
    out.push(Word::empty());
    let mut layer_start = 0;
    for _ in 0..max_degree {
        let layer_end = out.len();
        for i in layer_start..layer_end {
            for l in 1..=d as u8 {
                let mut letters = out[i].letters.clone();
                letters.push(l);
                out.push(Word { letters });
            }
        }
        layer_start = layer_end;
    }
    out
}

/// Position of `word` in the graded-lexicographic enumeration over `d`
/// letters. Inverse of indexing into [`enumerate_words`].
pub fn word_index(word: &Word, d: usize) -> usize {
    assert!(d >= 1, "the alphabet must have at least one letter");
    let offset = if word.is_empty() {
        0
    } else {
        word_count(d, word.len() - 1)
    };
    let mut within: usize = 0;
    for &l in word.letters() {
        debug_assert!((l as usize) <= d, "letter outside the alphabet");
        within = within * d + (l as usize - 1);
    }
    offset + within
}

/// A d-tuple of letter multiplicities; the image of a word under the
/// letter-counting map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn new(counts: Vec<u32>) -> Self {
        assert!(!counts.is_empty(), "a multi-index needs at least one slot");
        MultiIndex { counts }
    }

    /// The zero multi-index in dimension `d`.
    pub fn zeros(d: usize) -> Self {
        MultiIndex::new(vec![0; d])
    }

    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Total degree `|n| = n_1 + … + n_d`.
    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// Entrywise sum; the exponent of a product of monomials.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dimension(), other.dimension(), "dimension mismatch");
        MultiIndex {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.counts.cmp(&other.counts))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiIndex{self}")
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.counts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let counts = Vec::<u32>::deserialize(deserializer)?;
        if counts.is_empty() {
            return Err(D::Error::custom("a multi-index needs at least one slot"));
        }
        Ok(MultiIndex { counts })
    }
}
