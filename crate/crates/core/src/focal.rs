//! Fixed-width bitmask subsets of a frame.

use std::fmt;

use crate::evidence::EvidenceError;

const WORD_BITS: usize = 64;

/// A subset of a frame, stored as a bitmask over the frame's element indices.
///
/// Bit `j` is set exactly when element `j` belongs to the subset. Bits past the
/// frame width are always clear, so equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FocalSet {
    width: usize,
    words: Box<[u64]>,
}

pub(crate) fn word_count(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

impl FocalSet {
    pub fn empty(width: usize) -> Self {
        FocalSet {
            width,
            words: vec![0; word_count(width)].into_boxed_slice(),
        }
    }

    pub fn full(width: usize) -> Self {
        let mut set = FocalSet {
            width,
            words: vec![u64::MAX; word_count(width)].into_boxed_slice(),
        };
        set.clear_tail();
        set
    }

    /// Builds a set from element indices. Indices `>= width` are rejected.
    pub fn from_indices<I>(width: usize, indices: I) -> Result<Self, EvidenceError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = FocalSet::empty(width);
        for j in indices {
            if j >= width {
                return Err(EvidenceError::IndexOutOfRange { index: j, width });
            }
            set.insert(j);
        }
        Ok(set)
    }

    /// Builds a set from raw words; stray bits beyond `width` are cleared.
    pub fn from_words(width: usize, words: &[u64]) -> Self {
        let mut set = FocalSet::empty(width);
        for (dst, src) in set.words.iter_mut().zip(words) {
            *dst = *src;
        }
        set.clear_tail();
        set
    }

    fn clear_tail(&mut self) {
        let rem = self.width % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Number of frame elements this set ranges over.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        j < self.width && (self.words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    pub fn insert(&mut self, j: usize) {
        assert!(j < self.width, "element {j} outside frame of {}", self.width);
        self.words[j / WORD_BITS] |= 1u64 << (j % WORD_BITS);
    }

    pub fn remove(&mut self, j: usize) {
        if j < self.width {
            self.words[j / WORD_BITS] &= !(1u64 << (j % WORD_BITS));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        *self == FocalSet::full(self.width)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_width(&self, other: &FocalSet) -> Result<(), EvidenceError> {
        if self.width != other.width {
            return Err(EvidenceError::FrameMismatch {
                expected: self.width,
                found: other.width,
            });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &FocalSet) -> Result<FocalSet, EvidenceError> {
        self.check_width(other)?;
        let mut out = self.clone();
        out.intersect_in_place(other);
        Ok(out)
    }

    pub fn union(&self, other: &FocalSet) -> Result<FocalSet, EvidenceError> {
        self.check_width(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(other.words.iter()) {
            *a |= *b;
        }
        Ok(out)
    }

    /// `self ∩= other`. Widths must already agree.
    #[inline]
    pub(crate) fn intersect_in_place(&mut self, other: &FocalSet) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
    }

    pub fn complement(&self) -> FocalSet {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.clear_tail();
        out
    }

    pub fn is_subset_of(&self, other: &FocalSet) -> Result<bool, EvidenceError> {
        self.check_width(other)?;
        Ok(self.subset_unchecked(other))
    }

    #[inline]
    pub(crate) fn subset_unchecked(&self, other: &FocalSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &FocalSet) -> Result<bool, EvidenceError> {
        self.check_width(other)?;
        Ok(self
            .words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0))
    }

    /// Element indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    /// The set as a single integer mask; only meaningful for width ≤ 64.
    pub(crate) fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Intersection of a non-empty list of sets over one frame.
pub fn focal_intersect(sets: &[FocalSet]) -> Result<FocalSet, EvidenceError> {
    let (first, rest) = sets.split_first().ok_or(EvidenceError::EmptySetList)?;
    let mut acc = first.clone();
    for set in rest {
        first.check_width(set)?;
        acc.intersect_in_place(set);
    }
    Ok(acc)
}
