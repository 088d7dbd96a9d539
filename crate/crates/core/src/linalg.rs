//! Dense linear algebra over `F2`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A fixed-length vector over `F2`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: alloc::vec![0; len.div_ceil(64)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Highest set index strictly below `bound`.
    pub fn highest_below(&self, bound: usize) -> Option<usize> {
        if bound == 0 {
            return None;
        }
        let top = bound - 1;
        let mut w = top / 64;
        let mut word = self.words[w] & low_mask(top % 64 + 1);
        loop {
            if word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            word = self.words[w];
        }
    }

    pub fn highest(&self) -> Option<usize> {
        self.highest_below(self.len)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Incremental echelon basis with pivots at the highest set index.
///
/// Reduced vectors have no entries at pivot positions, so every coset of the
/// span has exactly one reduced representative: the smallest one when
/// vectors are compared from the highest index down.
#[derive(Clone, Debug)]
pub struct Reducer {
    len: usize,
    /// pivot -> (row, combination of inserted vectors)
    rows: BTreeMap<usize, (BitVec, Vec<usize>)>,
    inserted: usize,
}

impl Reducer {
    pub fn new(len: usize) -> Self {
        Reducer { len, rows: BTreeMap::new(), inserted: 0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.rows.contains_key(&i)
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Positions that are not pivots: a transversal of the quotient.
    pub fn free_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|i| !self.rows.contains_key(i)).collect()
    }

    /// Reduces `v`; returns the indices of inserted vectors used (as an `F2` set).
    pub fn reduce_tracked(&self, v: &mut BitVec) -> Vec<usize> {
        let mut combo: BTreeMap<usize, ()> = BTreeMap::new();
        let mut bound = self.len;
        while let Some(h) = v.highest_below(bound) {
            if let Some((row, c)) = self.rows.get(&h) {
                v.xor_assign(row);
                for i in c {
                    if combo.remove(i).is_none() {
                        combo.insert(*i, ());
                    }
                }
            }
            bound = h;
        }
        combo.into_keys().collect()
    }

    pub fn reduce(&self, v: &mut BitVec) {
        let mut bound = self.len;
        while let Some(h) = v.highest_below(bound) {
            if let Some((row, _)) = self.rows.get(&h) {
                v.xor_assign(row);
            }
            bound = h;
        }
    }

    pub fn reduced(&self, v: &BitVec) -> BitVec {
        let mut w = v.clone();
        self.reduce(&mut w);
        w
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduced(v).is_zero()
    }

    /// Inserts `v` (numbered by insertion order); returns its new pivot, or
    /// `None` when `v` is already in the span.
    pub fn insert(&mut self, v: &BitVec) -> Option<usize> {
        let id = self.inserted;
        self.inserted += 1;
        let mut w = v.clone();
        let mut combo = self.reduce_tracked(&mut w);
        let pivot = w.highest()?;
        combo.push(id);
        combo.sort_unstable();
        // Keep rows fully reduced: clear the new pivot from existing rows.
        let keys: Vec<usize> = self.rows.keys().copied().filter(|&k| k > pivot).collect();
        for k in keys {
            let (row, c) = self.rows.get_mut(&k).unwrap();
            if row.get(pivot) {
                row.xor_assign(&w);
                *c = sym_diff(c, &combo);
            }
        }
        self.rows.insert(pivot, (w, combo));
        Some(pivot)
    }

    /// Expresses `v` as a combination of inserted vectors, if it lies in the span.
    pub fn solve(&self, v: &BitVec) -> Option<Vec<usize>> {
        let mut w = v.clone();
        let combo = self.reduce_tracked(&mut w);
        if w.is_zero() {
            Some(combo)
        } else {
            None
        }
    }
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// A matrix over `F2` stored by columns; column `j` is the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    columns: Vec<BitVec>,
}

/// Rank, kernel basis and image basis of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearAnalysis {
    pub rank: usize,
    /// Vectors in the domain (length = number of columns).
    pub kernel: Vec<BitVec>,
    /// Vectors in the codomain (length = number of rows).
    pub image: Vec<BitVec>,
}

impl F2Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        F2Matrix { rows, columns: alloc::vec![BitVec::zeros(rows); cols] }
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix { rows: n, columns: (0..n).map(|i| BitVec::unit(n, i)).collect() }
    }

    pub fn from_columns(rows: usize, columns: Vec<BitVec>) -> Self {
        assert!(columns.iter().all(|c| c.len() == rows));
        F2Matrix { rows, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &BitVec {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[j].get(i)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.columns[j].set(i, b)
    }

    pub fn apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rows);
        for j in v.ones() {
            out.xor_assign(&self.columns[j]);
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols(), other.rows());
        F2Matrix { rows: self.rows, columns: other.columns.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn rank(&self) -> usize {
        let mut r = Reducer::new(self.rows);
        for c in &self.columns {
            r.insert(c);
        }
        r.rank()
    }

    /// Gaussian elimination processing columns in order.
    pub fn analyze(&self) -> LinearAnalysis {
        let mut r = Reducer::new(self.rows);
        let mut image = Vec::new();
        let mut kernel = Vec::new();
        for (j, c) in self.columns.iter().enumerate() {
            match r.insert(c) {
                Some(_) => image.push(c.clone()),
                None => {
                    let combo = r.solve(c).expect("dependent column lies in span");
                    let mut k = BitVec::from_ones(self.cols(), combo);
                    k.flip(j);
                    kernel.push(k);
                }
            }
        }
        LinearAnalysis { rank: image.len(), kernel, image }
    }
}
