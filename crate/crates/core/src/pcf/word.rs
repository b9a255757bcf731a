//! Finite words over the branch alphabet and the partitions `Λ_m`.

use std::fmt;

use crate::error::{Error, Result};
use crate::pcf::FractalDescriptor;

/// A word `w = w_1 … w_n` packed as a base-`N` integer, first letter most
/// significant. Letters are 0-based; `Display` prints them 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    code: u64,
    len: u8,
}

impl Word {
    pub const EMPTY: Word = Word { code: 0, len: 0 };

    pub fn from_letters(letters: &[usize], branches: usize) -> Word {
        let mut w = Word::EMPTY;
        for &l in letters {
            w = w.child(l, branches);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn child(&self, letter: usize, branches: usize) -> Word {
        Word { code: self.code * branches as u64 + letter as u64, len: self.len + 1 }
    }

    /// `w*`, the word with its last letter removed.
    pub fn parent(&self, branches: usize) -> Option<Word> {
        (self.len > 0).then(|| Word { code: self.code / branches as u64, len: self.len - 1 })
    }

    pub fn last(&self, branches: usize) -> Option<usize> {
        (self.len > 0).then(|| (self.code % branches as u64) as usize)
    }

    pub fn letters(&self, branches: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        let mut c = self.code;
        for slot in out.iter_mut().rev() {
            *slot = (c % branches as u64) as usize;
            c /= branches as u64;
        }
        out
    }

    /// Prefix of length `k`.
    pub fn truncate(&self, k: usize, branches: usize) -> Word {
        assert!(k <= self.len());
        let drop = (self.len() - k) as u32;
        Word { code: self.code / (branches as u64).pow(drop), len: k as u8 }
    }

    pub fn is_prefix_of(&self, other: &Word, branches: usize) -> bool {
        self.len <= other.len && other.truncate(self.len(), branches) == *self
    }

    /// `r_w = r_{w_1} ⋯ r_{w_n}`.
    pub fn resistance(&self, desc: &FractalDescriptor) -> f64 {
        let r = desc.weights();
        self.letters(desc.branches()).iter().fold(1.0, |acc, &l| acc * r[l])
    }

    /// Renders the word with 1-based letters, `∅` for the empty word.
    pub fn display(&self, branches: usize) -> WordDisplay {
        WordDisplay { letters: self.letters(branches) }
    }
}

pub struct WordDisplay {
    letters: Vec<usize>,
}

impl fmt::Display for WordDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("∅");
        }
        let sep = if self.letters.iter().any(|&l| l >= 9) { "." } else { "" };
        let parts: Vec<String> = self.letters.iter().map(|l| (l + 1).to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

/// `μ_i = r_i^{d_H}` for each branch.
pub fn branch_measures(desc: &FractalDescriptor, d_h: f64) -> Vec<f64> {
    desc.weights().iter().map(|r| r.powf(d_h)).collect()
}

/// The partition `Λ_m = {w : r_w ≤ r^m < r_{w*}}` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Partition {
    level: usize,
    scale: f64,
    words: Vec<Word>,
    resistance: Vec<f64>,
    measure: Vec<f64>,
}

pub const DEFAULT_CELL_BUDGET: usize = 2_000_000;

/// Relative slack on `r_w ≤ r^m`: products of equal weights evaluated in a
/// different order must still land on the same side.
const SCALE_SLACK: f64 = 1e-12;

impl Partition {
    pub fn build(desc: &FractalDescriptor, d_h: f64, level: usize, budget: usize) -> Result<Self> {
        let n = desc.branches();
        let r = desc.weights();
        let mu = branch_measures(desc, d_h);
        let base = desc.base_scale();
        let mut scale = 1.0;
        for _ in 0..level {
            scale *= base;
        }
        let threshold = scale * (1.0 + SCALE_SLACK);
        let mut words = Vec::new();
        let mut res = Vec::new();
        let mut meas = Vec::new();
        // Depth-first with children pushed in reverse keeps lexicographic order.
        let mut stack = vec![(Word::EMPTY, 1.0f64, 1.0f64)];
        while let Some((w, rw, mw)) = stack.pop() {
            if rw <= threshold {
                if words.len() == budget {
                    return Err(Error::LevelTooLarge { level, needed: budget + 1, budget });
                }
                words.push(w);
                res.push(rw);
                meas.push(mw);
                continue;
            }
            if w.len() >= desc.max_word_len() {
                return Err(Error::LevelTooLarge { level, needed: usize::MAX, budget });
            }
            for i in (0..n).rev() {
                stack.push((w.child(i, n), rw * r[i], mw * mu[i]));
            }
        }
        Ok(Partition { level, scale, words, resistance: res, measure: meas })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `r^m`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn resistances(&self) -> &[f64] {
        &self.resistance
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Index of the cell containing the infinite word with the given prefix,
    /// if the prefix is long enough to decide it.
    pub fn locate(&self, letters: &[usize], branches: usize) -> Option<usize> {
        let mut w = Word::EMPTY;
        for k in 0..=letters.len() {
            if let Ok(pos) = self.words.binary_search_by(|x| cmp_lex(x, &w, branches)) {
                return Some(pos);
            }
            if k < letters.len() {
                w = w.child(letters[k], branches);
            }
        }
        None
    }

    /// For each cell, the index of its ancestor in the coarser partition.
    pub fn parents_in(&self, coarse: &Partition, branches: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        let mut j = 0;
        for w in &self.words {
            while !coarse.words[j].is_prefix_of(w, branches) {
                j += 1;
            }
            out.push(j as u32);
        }
        out
    }
}

/// Lexicographic comparison of words (a proper prefix sorts first).
pub fn cmp_lex(a: &Word, b: &Word, branches: usize) -> std::cmp::Ordering {
    let k = a.len().min(b.len());
    let (ta, tb) = (a.truncate(k, branches), b.truncate(k, branches));
    ta.code.cmp(&tb.code).then(a.len.cmp(&b.len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf::{presets, DescriptorDocument};

    fn two_scale() -> FractalDescriptor {
        // r = (1/2, 1/4) on an interval-like skeleton.
        let mut doc: DescriptorDocument = presets::interval().to_document();
        doc.r = vec![0.5, 0.25];
        FractalDescriptor::from_document(doc).unwrap()
    }

    #[test]
    fn word_arithmetic() {
        let w = Word::from_letters(&[2, 0, 1], 3);
        assert_eq!(w.letters(3), vec![2, 0, 1]);
        assert_eq!(w.parent(3).unwrap().letters(3), vec![2, 0]);
        assert_eq!(w.last(3), Some(1));
        assert_eq!(w.display(3).to_string(), "312");
        assert_eq!(Word::EMPTY.display(3).to_string(), "∅");
        assert!(w.truncate(1, 3).is_prefix_of(&w, 3));
    }

    #[test]
    fn level_zero_is_root() {
        let d = presets::sierpinski_gasket();
        let p = Partition::build(&d, 2.0, 0, 10).unwrap();
        assert_eq!(p.words(), &[Word::EMPTY]);
    }

    #[test]
    fn unequal_weights_level_one() {
        let d = two_scale();
        let p = Partition::build(&d, 1.0, 1, 100).unwrap();
        let shown: Vec<String> = p.words().iter().map(|w| w.display(2).to_string()).collect();
        assert_eq!(shown, ["11", "12", "2"]);
    }

    #[test]
    fn equal_weights_give_full_level() {
        let d = presets::sierpinski_gasket();
        let p = Partition::build(&d, 1.0, 2, 100).unwrap();
        assert_eq!(p.len(), 9);
        assert!(p.words().iter().all(|w| w.len() == 2));
        assert!(p.words().windows(2).all(|x| x[0].code() < x[1].code()));
    }

    #[test]
    fn budget_is_enforced() {
        let d = presets::sierpinski_gasket();
        assert!(matches!(
            Partition::build(&d, 1.0, 3, 20),
            Err(Error::LevelTooLarge { .. })
        ));
    }

    #[test]
    fn parents_and_locate() {
        let d = two_scale();
        let fine = Partition::build(&d, 1.0, 3, 100).unwrap();
        let coarse = Partition::build(&d, 1.0, 2, 100).unwrap();
        let par = fine.parents_in(&coarse, 2);
        for (k, w) in fine.words().iter().enumerate() {
            assert!(coarse.words()[par[k] as usize].is_prefix_of(w, 2));
            let letters = w.letters(2);
            assert_eq!(fine.locate(&letters, 2), Some(k));
        }
    }
}
